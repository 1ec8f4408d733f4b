use serde::Serialize;

use super::pmf::Pmf;
use super::truncation_index;
use crate::error::{domain, Result};
use crate::numerics::RngStream;

/// Kendall's time-dependent parameters of a birth–death process with
/// per-capita birth rate `b` and unit death rate, observed at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaTheta {
    /// Λ_t(b) = e^{−(1−b)t}.
    pub lambda: f64,
    /// θ_t(b) = b(1 − Λ)/(1 − bΛ), equal to t/(1 + t) at b = 1.
    pub theta: f64,
    /// (1 − Λ)/(1 − bΛ), the probability that a single ancestor's line is
    /// extinct by time t (θ/b for b > 0).
    pub extinct: f64,
    /// (1 − Λ)/(1 − b), continuous through b = 1 where it equals t.
    q: f64,
}

const LIMIT_SWITCH: f64 = 1e-12;

/// Compute Λ_t(b) and θ_t(b) for b ≥ 0 and finite t ≥ 0.
///
/// With x = (1 − b)t and q = (1 − Λ)/(1 − b) = t(1 − e^{−x})/x, every
/// quantity is a ratio of positive terms:
/// extinct = q/(q + Λ), θ = b·extinct, 1 − θ = 1/(q + Λ).
/// This has no 0/0 at b = 1; for |x| < 1e-12 we use the b = 1 limit of q.
pub fn lambda_theta(b: f64, t: f64) -> Result<LambdaTheta> {
    if !b.is_finite() || b < 0.0 {
        return Err(domain(format!("birth rate must be finite and >= 0, got {b}")));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(domain(format!("time must be finite and >= 0, got {t}")));
    }
    let x = (1.0 - b) * t;
    let lambda = (-x).exp();
    let q = if x.abs() < LIMIT_SWITCH {
        t
    } else {
        t * (-(-x).exp_m1() / x)
    };
    let extinct = q / (q + lambda);
    Ok(LambdaTheta {
        lambda,
        theta: b * extinct,
        extinct,
        q,
    })
}

/// θ_∞(b) = b, the parameter of the stationary NB(a/b, b) law; needs b < 1.
pub fn stationary_theta(b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&b) {
        return Err(domain(format!("stationary regime needs 0 <= b < 1, got {b}")));
    }
    Ok(b)
}

/// Law of the population at time `t` descended from one individual in a
/// birth–death process with birth rate `b` and unit death rate.
///
/// P[0] = (1 − Λ)/(1 − bΛ), P[k] = Λ(1 − θ)² θ^{k−1} for k ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModGeomParams {
    b: f64,
    t: f64,
    lt: LambdaTheta,
}

impl ModGeomParams {
    /// Any b ≥ 0 is accepted for finite t > 0.
    pub fn new(b: f64, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(domain(format!("time must be > 0, got {t}")));
        }
        let lt = lambda_theta(b, t)?;
        Ok(Self { b, t, lt })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn lambda(&self) -> f64 {
        self.lt.lambda
    }

    pub fn theta(&self) -> f64 {
        self.lt.theta
    }

    pub fn lambda_theta(&self) -> LambdaTheta {
        self.lt
    }

    /// P[Y = 0].
    pub fn p0(&self) -> f64 {
        self.lt.extinct
    }

    /// 1 − θ, computed as 1/(q + Λ) to avoid cancellation near θ ≈ 1.
    fn one_minus_theta(&self) -> f64 {
        1.0 / (self.lt.q + self.lt.lambda)
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return self.p0();
        }
        let omt = self.one_minus_theta();
        let geo = if k == 1 {
            1.0
        } else {
            self.lt.theta.powf((k - 1) as f64)
        };
        self.lt.lambda * omt * omt * geo
    }

    /// First and second moments: Λ and Λ(1 + b − 2bΛ)/(1 − b).
    ///
    /// The second moment is evaluated as Λ(1 + 2bq), the same expression with
    /// the 1 − b cancelled; at b = 1 it reduces to 1 + 2t.
    pub fn moments(&self) -> (f64, f64) {
        let lam = self.lt.lambda;
        (lam, lam * (1.0 + 2.0 * self.b * self.lt.q))
    }

    pub fn truncation(&self) -> u64 {
        let (m1, m2) = self.moments();
        truncation_index(m1, (m2 - m1 * m1).max(0.0).sqrt())
    }

    /// Materialize on `0..=truncation()`; the tail is geometric and exact.
    pub fn to_pmf(&self) -> Pmf {
        let last = self.truncation();
        let weights: Vec<f64> = (0..=last).map(|k| self.pmf(k)).collect();
        let theta = self.lt.theta;
        let lam = self.lt.lambda;
        let th_last = if theta == 0.0 { 0.0 } else { theta.powf(last as f64) };
        Pmf {
            offset: 0,
            weights,
            tail_mass: lam * self.one_minus_theta() * th_last,
            tail_excess: lam * th_last,
        }
    }

    /// Zero with probability P[0]; otherwise 1 + Geometric, where the
    /// geometric part has P[m] = (1 − θ)θ^m on m ≥ 0.
    pub fn sample(&self, rng: &mut RngStream) -> u64 {
        let u = rng.uniform();
        if u < self.p0() {
            return 0;
        }
        let theta = self.lt.theta;
        if theta <= 0.0 {
            return 1;
        }
        let v = rng.uniform();
        let m = (v.ln() / theta.ln()).floor();
        1 + m as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng_stream;

    fn mg(b: f64, t: f64) -> ModGeomParams {
        ModGeomParams::new(b, t).unwrap()
    }

    #[test]
    fn pure_death() {
        let d = mg(0.0, std::f64::consts::LN_2);
        assert!((d.pmf(0) - 0.5).abs() < 1e-15);
        assert!((d.pmf(1) - 0.5).abs() < 1e-15);
        assert_eq!(d.pmf(2), 0.0);
    }

    #[test]
    fn critical_case_b_one() {
        let d = mg(1.0, 1.0);
        assert!((d.theta() - 0.5).abs() < 1e-15);
        assert_eq!(d.lambda(), 1.0);
        assert!((d.pmf(0) - 0.5).abs() < 1e-15);
        for k in 1..10u64 {
            let want = 0.25 * 0.5f64.powi(k as i32 - 1);
            assert!((d.pmf(k) - want).abs() < 1e-15);
        }
        let (_, m2) = mg(1.0, 3.0).moments();
        assert!((m2 - 7.0).abs() < 1e-14);
    }

    #[test]
    fn theta_tends_to_b() {
        let d = mg(0.5, 80.0);
        assert!((d.theta() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn theta_is_continuous_through_b_one() {
        let t = 2.0;
        let at = mg(1.0, t).theta();
        assert!((at - t / (1.0 + t)).abs() < 1e-15);
        for eps in [1e-6, 1e-9, 1e-13] {
            for b in [1.0 - eps, 1.0 + eps] {
                assert!((mg(b, t).theta() - at).abs() < 10.0 * eps, "b={b}");
            }
        }
    }

    #[test]
    fn pure_death_moments() {
        let (m1, m2) = mg(0.0, 1.0).moments();
        let e = (-1.0f64).exp();
        assert!((m1 - e).abs() < 1e-15 && (m2 - e).abs() < 1e-15);
    }

    #[test]
    fn moments_match_pmf_sums() {
        for &(b, t) in &[(0.3, 1.0), (0.7, 5.0), (1.0, 0.1), (1.2, 1.0), (0.0, 5.0)] {
            let d = mg(b, t);
            let pmf = d.to_pmf();
            let (m1, m2) = d.moments();
            assert!((pmf.mean() - m1).abs() < 1e-10, "b={b} t={t}");
            // Σ k² P[k] = Λ(1 + θ)/(1 − θ).
            let theta = d.theta();
            let alt = d.lambda() * (1.0 + theta) / (1.0 - theta);
            assert!(((m2 - alt) / m2).abs() < 1e-12, "b={b} t={t}");
        }
    }

    #[test]
    fn extinction_identity() {
        // 1 − θ/b = Λ(1 − θ).
        for b in [0.3, 0.7, 0.999_999, 1.0, 1.000_001, 1.2] {
            for t in [0.1, 1.0, 5.0] {
                let d = mg(b, t);
                let lhs = 1.0 - d.theta() / b;
                let rhs = d.lambda() * (1.0 - d.theta());
                assert!((lhs - rhs).abs() < 1e-12, "b={b} t={t}");
            }
        }
    }

    #[test]
    fn sampler_atom_at_zero() {
        let d = mg(0.5, 1.0);
        let n = 100_000;
        let mut rng = rng_stream(5, 0);
        let zeros = (0..n).filter(|_| d.sample(&mut rng) == 0).count() as f64 / n as f64;
        let p0 = 1.0 - d.lambda() * (1.0 - d.theta());
        let se = (p0 * (1.0 - p0) / n as f64).sqrt();
        assert!((zeros - p0).abs() < 3.0 * se, "{zeros} vs {p0}");
    }

    #[test]
    fn sampler_mean_at_b_one() {
        let d = mg(1.0, 1.0);
        let n = 100_000;
        let mut rng = rng_stream(6, 0);
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let (m1, m2) = d.moments();
        let se = ((m2 - m1 * m1) / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn stationary_requires_subcritical() {
        assert_eq!(stationary_theta(0.5).unwrap(), 0.5);
        assert!(stationary_theta(1.0).is_err());
    }
}
