//! Closed-form solution of the negative binomial Stein equation
//!
//! ```text
//! p(r+i) g(i+1) − i g(i) = f(i) − μ_f,        i ≥ 0,
//! ```
//!
//! namely `g(j+1) = D(j) / (p(r+j) π_j)` with `D(j) = Σ_{k≤j} π_k (f(k) − μ_f)`.
//! Since `D(j) = −Σ_{k>j} π_k (f(k) − μ_f)`, the ratio `w_j = D(j)/π_j` can be
//! accumulated either upwards (head sums) or downwards (tail sums) using only
//! the pmf ratios `π_j/π_{j−1} = p(r+j−1)/j`, so no π_j is ever formed and
//! nothing underflows. The rounding error of each direction is proportional
//! to the matching sum of absolute terms; for every j we keep the direction
//! whose absolute sum is smaller.

use serde::Serialize;

use super::lipschitz::LipschitzFn;
use crate::distributions::NegBinParams;
use crate::error::{domain, Error, Result};

/// Residual tolerance relative to `max(1, max_i |f(i) − μ_f|)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

const TAIL_ITER_CAP: u64 = 50_000_000;

/// `g_f` on `0..=N+1` together with its certification data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinSolution {
    pub params: NegBinParams,
    /// `g[i]` for `i = 0..=N+1`; `g[0]` is set equal to `g[1]` because the
    /// equation never constrains it.
    pub g: Vec<f64>,
    pub n: u64,
    pub mu_f: f64,
    pub residual_max: f64,
    /// Bound on how far the truncated tail series could move any `g(i)`.
    pub tail_note: f64,
}

impl SteinSolution {
    pub fn g(&self, i: u64) -> f64 {
        self.g[i as usize]
    }

    /// `Δg(i) = g(i+1) − g(i)` for `i ≤ N`.
    pub fn delta_g(&self, i: u64) -> f64 {
        self.g[i as usize + 1] - self.g[i as usize]
    }

    /// `max_{1 ≤ w ≤ N+1} g(w)`.
    pub fn sup_g(&self) -> f64 {
        self.g[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Survival function `S(m) = P(Z > m)` for `m = 0..=last`, accumulated from
/// the top so small tails keep their relative accuracy.
fn survival(params: &NegBinParams, last: u64) -> Vec<f64> {
    let pmf = params.to_pmf_upto(last);
    let mut s = vec![0.0; last as usize + 1];
    let mut acc = pmf.tail_mass;
    for m in (0..=last as usize).rev() {
        s[m] = acc;
        acc += pmf.weights[m];
    }
    s
}

/// `μ_f` by summation by parts: `E f(Z) = f(0) + Σ_m d_m P(Z > m)`, with the
/// constant-slope tail summed through `E Z = Σ_m P(Z > m)`.
fn expectation_with(f: &LipschitzFn, mean: f64, surv: &[f64]) -> f64 {
    let s = f.tail_slope();
    let head: f64 = f
        .increments()
        .iter()
        .zip(surv)
        .map(|(d, sm)| (d - s) * sm)
        .sum();
    f.f0() + head + s * mean
}

/// `NB(r, p){f} = E f(Z)`.
pub fn nb_expectation_lipschitz(f: &LipschitzFn, params: &NegBinParams) -> f64 {
    let last = (f.n_f() as u64).max(1) - 1;
    expectation_with(f, params.mean(), &survival(params, last))
}

/// Reusable solver for one `(r, p, N)`; caches the survival function so
/// that many right-hand sides can be solved cheaply.
#[derive(Debug, Clone)]
pub struct SteinSolver {
    params: NegBinParams,
    n: u64,
    surv: Vec<f64>,
}

impl SteinSolver {
    pub fn new(params: NegBinParams, n: u64) -> Result<Self> {
        if n < 1 {
            return Err(domain("truncation N must be >= 1"));
        }
        Ok(Self {
            params,
            n,
            surv: survival(&params, n),
        })
    }

    pub fn params(&self) -> NegBinParams {
        self.params
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn expectation(&self, f: &LipschitzFn) -> f64 {
        if f.n_f() <= self.surv.len() {
            expectation_with(f, self.params.mean(), &self.surv)
        } else {
            nb_expectation_lipschitz(f, &self.params)
        }
    }

    /// `w_N = D(N)/π_N = −Σ_{k>N} (π_k/π_N)(f(k) − μ)`, with the absolute
    /// sum and a bound on the neglected remainder.
    fn tail_start(&self, f: &LipschitzFn, f_n: f64, mu: f64) -> Result<(f64, f64, f64)> {
        let (r, p) = (self.params.r(), self.params.p());
        let ratio = |m: u64| p * (r + m as f64) / (m as f64 + 1.0);
        let n = self.n;
        let (mut acc, mut abs_acc) = (0.0, 0.0);
        let mut t = 1.0;
        let mut fk = f_n;
        let mut k = n;
        loop {
            t *= ratio(k);
            fk += f.increment(k);
            k += 1;
            let c = (fk - mu).abs();
            acc += t * (fk - mu);
            abs_acc += t * c;
            if k as usize >= f.n_f() {
                let rho = ratio(k).max(p);
                if rho < 1.0 {
                    let g = rho / (1.0 - rho);
                    // Remaining terms are at most t ρ^j (c + j), j ≥ 1.
                    let rem = t * (c * g + rho / ((1.0 - rho) * (1.0 - rho)));
                    if rem <= 1e-17 * abs_acc.max(1e-300) || rem < 1e-300 {
                        return Ok((-acc, abs_acc, rem));
                    }
                }
            }
            if k - n > TAIL_ITER_CAP {
                return Err(Error::Accuracy {
                    what: "Stein tail series did not converge".into(),
                    estimate: -acc,
                    err_est: f64::INFINITY,
                });
            }
        }
    }

    pub fn solve(&self, f: &LipschitzFn) -> Result<SteinSolution> {
        let (r, p) = (self.params.r(), self.params.p());
        let n = self.n as usize;
        let mu = self.expectation(f);
        let vals = f.values(self.n);
        let c: Vec<f64> = vals.iter().map(|v| v - mu).collect();

        // Head sums, upwards.
        let mut u = vec![0.0; n + 1];
        let mut a = vec![0.0; n + 1];
        u[0] = c[0];
        a[0] = c[0].abs();
        for j in 1..=n {
            let back = j as f64 / (p * (r + j as f64 - 1.0));
            u[j] = u[j - 1] * back + c[j];
            a[j] = a[j - 1] * back + c[j].abs();
        }

        // Tail sums, downwards.
        let (v_n, b_n, rem) = self.tail_start(f, vals[n], mu)?;
        let mut v = vec![0.0; n + 1];
        let mut b = vec![0.0; n + 1];
        v[n] = v_n;
        b[n] = b_n;
        for j in (1..=n).rev() {
            let fwd = p * (r + j as f64 - 1.0) / j as f64;
            v[j - 1] = (v[j] - c[j]) * fwd;
            b[j - 1] = (b[j] + c[j].abs()) * fwd;
        }

        let mut g = vec![0.0; n + 2];
        for j in 0..=n {
            let w = if a[j] <= b[j] { u[j] } else { v[j] };
            g[j + 1] = w / (p * (r + j as f64));
        }
        g[0] = g[1];

        let mut sol = SteinSolution {
            params: self.params,
            g,
            n: self.n,
            mu_f: mu,
            residual_max: 0.0,
            tail_note: rem / (p * (r + self.n as f64)),
        };
        sol.residual_max = residual_from(&sol, &c);
        let scale = c.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if !(sol.residual_max <= RESIDUAL_TOL * scale) {
            return Err(Error::Accuracy {
                what: format!("Stein residual not certified at N = {}", self.n),
                estimate: sol.residual_max,
                err_est: RESIDUAL_TOL * scale,
            });
        }
        Ok(sol)
    }
}

fn residual_from(sol: &SteinSolution, c: &[f64]) -> f64 {
    let (r, p) = (sol.params.r(), sol.params.p());
    (0..=sol.n as usize)
        .map(|i| {
            let lhs = p * (r + i as f64) * sol.g[i + 1] - i as f64 * sol.g[i];
            (lhs - c[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// Solve the Stein equation for `f` on `0..=N`.
pub fn solve_stein(f: &LipschitzFn, params: &NegBinParams, n: u64) -> Result<SteinSolution> {
    SteinSolver::new(*params, n)?.solve(f)
}

/// `max_{0≤i≤N} |p(r+i) g(i+1) − i g(i) − (f(i) − μ_f)|`.
pub fn stein_residual(sol: &SteinSolution, f: &LipschitzFn) -> f64 {
    let c: Vec<f64> = f.values(sol.n).iter().map(|v| v - sol.mu_f).collect();
    residual_from(sol, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stein::extremal_f;

    fn nb(r: f64, p: f64) -> NegBinParams {
        NegBinParams::new(r, p).unwrap()
    }

    #[test]
    fn expectations() {
        let f = LipschitzFn::linear(0.0, -1.0).unwrap();
        assert!((nb_expectation_lipschitz(&f, &nb(2.0, 0.5)) + 2.0).abs() < 1e-14);
        // E|Z − 1| = 1 for Z ~ Geometric(1/2) on ℤ₊.
        assert!((nb_expectation_lipschitz(&extremal_f(1), &nb(1.0, 0.5)) + 1.0).abs() < 1e-14);
        let c = LipschitzFn::constant(3.25).unwrap();
        assert_eq!(nb_expectation_lipschitz(&c, &nb(5.0, 0.3)), 3.25);
    }

    #[test]
    fn expectation_against_direct_sum() {
        let params = nb(2.5, 0.7);
        let f = LipschitzFn::new(0.3, vec![0.5, -1.0, 1.0, 0.25, -0.75], 0.4).unwrap();
        let pmf = params.to_pmf_upto(2000);
        let direct: f64 = pmf
            .weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * f.eval(k as u64))
            .sum();
        assert!((nb_expectation_lipschitz(&f, &params) - direct).abs() < 1e-12);
    }

    #[test]
    fn hand_solution_geometric() {
        let sol = solve_stein(&extremal_f(1), &nb(1.0, 0.5), 40).unwrap();
        let want = [0.0, 1.0, 4.0 / 3.0, 1.5];
        for (i, w) in want.iter().enumerate() {
            assert!((sol.g(i as u64 + 1) - w).abs() < 1e-14, "g({}) = {}", i + 1, sol.g(i as u64 + 1));
        }
        assert_eq!(sol.delta_g(1), 1.0);
        assert_eq!(sol.g(0), sol.g(1));
    }

    #[test]
    fn linear_test_function_gives_constant_solution() {
        for &(r, p) in &[(0.4, 0.1), (1.0, 0.5), (20.0, 0.9), (5.0, 0.3)] {
            let params = nb(r, p);
            let f = LipschitzFn::linear(0.0, -1.0).unwrap();
            let sol = solve_stein(&f, &params, params.truncation()).unwrap();
            for &g in &sol.g {
                assert!((g - 1.0 / (1.0 - p)).abs() < 1e-10, "r={r} p={p} g={g}");
            }
        }
    }

    #[test]
    fn constant_function_gives_zero() {
        let sol = solve_stein(&LipschitzFn::constant(2.0).unwrap(), &nb(3.0, 0.4), 80).unwrap();
        assert!(sol.g.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn residual_reacts_to_perturbation() {
        let params = nb(1.0, 0.5);
        let f = extremal_f(1);
        let mut sol = solve_stein(&f, &params, 40).unwrap();
        let before = stein_residual(&sol, &f);
        let eps = 1e-6;
        sol.g[2] += eps;
        let after = stein_residual(&sol, &f);
        // g(2) enters rows i = 1 (coefficient p(r+1) = 1) and i = 2 (coefficient 2).
        assert!((after - before - 2.0 * eps).abs() < 1e-12, "{after}");
    }

    #[test]
    fn zero_candidate_residual() {
        let params = nb(1.0, 0.5);
        let f = extremal_f(1);
        let mut sol = solve_stein(&f, &params, 4).unwrap();
        sol.g.iter_mut().for_each(|g| *g = 0.0);
        // |f₁(i) + 1| on i ≤ 4 peaks at i = 4 with value 2.
        assert!((stein_residual(&sol, &f) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_zero_truncation() {
        assert!(solve_stein(&extremal_f(0), &nb(1.0, 0.5), 0).is_err());
    }
}
