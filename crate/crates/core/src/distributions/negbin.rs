use serde::{Deserialize, Serialize};

use super::pmf::Pmf;
use super::sampling::{sample_gamma, sample_poisson};
use super::truncation_index;
use crate::error::{domain, Result};
use crate::numerics::{ln_factorial, ln_gamma_unchecked, RngStream};

const TAIL_EXCESS_TARGET: f64 = 1e-13;
const MAX_MATERIALIZED: u64 = 50_000_000;

/// Parameters of NB(r, p): pmf Γ(r+k)/(Γ(r) k!) (1−p)^r p^k on ℤ₊.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegBinParams {
    r: f64,
    p: f64,
}

/// Location and height of the largest pmf value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmfMax {
    pub argmax: u64,
    pub value: f64,
}

/// Upper bounds on `max_k NB(r, p){k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmfMaxBound {
    /// `√((1−p)/(2erp))·K_r`, defined for r > 1/2.
    pub phillips: Option<f64>,
    /// `K_r = √r Γ(r−1/2)/Γ(r)`, defined for r > 1/2.
    pub k_r: Option<f64>,
    /// The applicable bound: Phillips for r > 1/2, otherwise 1.
    pub bound: f64,
}

impl NegBinParams {
    pub fn new(r: f64, p: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(domain(format!("r must be finite and > 0, got {r}")));
        }
        if !p.is_finite() || p <= 0.0 || p >= 1.0 {
            return Err(domain(format!("p must lie in (0, 1), got {p}")));
        }
        Ok(Self { r, p })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mean(&self) -> f64 {
        self.r * self.p / (1.0 - self.p)
    }

    pub fn variance(&self) -> f64 {
        let q = 1.0 - self.p;
        self.r * self.p / (q * q)
    }

    /// `(mean, variance)`.
    pub fn moments(&self) -> (f64, f64) {
        (self.mean(), self.variance())
    }

    /// ln NB(r, p){k}.
    pub fn log_pmf(&self, k: u64) -> f64 {
        let kf = k as f64;
        let coeff = ln_gamma_unchecked(self.r + kf) - ln_gamma_unchecked(self.r) - ln_factorial(k);
        let tail = if k == 0 { 0.0 } else { kf * self.p.ln() };
        coeff + self.r * (-self.p).ln_1p() + tail
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.log_pmf(k).exp()
    }

    /// Likelihood ratio NB{k+1}/NB{k} = p(r+k)/(k+1).
    pub(crate) fn ratio(&self, k: u64) -> f64 {
        self.p * (self.r + k as f64) / (k as f64 + 1.0)
    }

    /// F(k) = Σ_{j ≤ k} NB{j}; zero for k < 0.
    pub fn cdf(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        let mut log_term = self.r * (-self.p).ln_1p();
        let mut acc = log_term.exp();
        for j in 0..k as u64 {
            log_term += self.ratio(j).ln();
            acc += log_term.exp();
        }
        acc.min(1.0)
    }

    /// Default truncation: `ceil(mean + 12 sd) + 64`.
    pub fn truncation(&self) -> u64 {
        truncation_index(self.mean(), self.variance().sqrt())
    }

    /// Materialize the pmf from 0 to at least `truncation()`, extending
    /// until `E[(Z − last)⁺]` is below 1e-13. Small r with p near 1 needs
    /// this: the moment-based cut-off leaves a heavy geometric tail there.
    pub fn to_pmf(&self) -> Pmf {
        let mut last = self.truncation();
        loop {
            let pmf = self.to_pmf_upto(last);
            if pmf.tail_excess <= TAIL_EXCESS_TARGET || last >= MAX_MATERIALIZED {
                return pmf;
            }
            // The tail decays at least like p^k past the mode.
            let extra = ((pmf.tail_excess / TAIL_EXCESS_TARGET).ln() / -self.p.ln()).ceil() as u64 + 1;
            last = (last + extra).min(MAX_MATERIALIZED);
        }
    }

    /// Materialize the pmf on `0..=last` with a certified tail.
    pub fn to_pmf_upto(&self, last: u64) -> Pmf {
        let mut weights = Vec::with_capacity(last as usize + 1);
        let mut log_term = self.r * (-self.p).ln_1p();
        weights.push(log_term.exp());
        for j in 0..last {
            log_term += self.ratio(j).ln();
            weights.push(log_term.exp());
        }
        let (tail_mass, tail_excess) = sum_tail(last, log_term, |k| self.ratio(k), self.p);
        Pmf {
            offset: 0,
            weights,
            tail_mass,
            tail_excess,
        }
    }

    /// Exact maximum of the pmf (smallest maximizer on ties).
    ///
    /// The ratio p(r+k)/(k+1) decreases through 1 exactly once, so the
    /// maximizer is the first k where it is ≤ 1. We start from the closed
    /// form `ceil((pr − 1)/(1 − p))` and walk to correct rounding.
    pub fn pmf_max(&self) -> PmfMax {
        let guess = ((self.p * self.r - 1.0) / (1.0 - self.p)).ceil();
        let mut k = if guess > 0.0 { guess as u64 } else { 0 };
        while k > 0 && self.ratio(k - 1) <= 1.0 {
            k -= 1;
        }
        while self.ratio(k) > 1.0 {
            k += 1;
        }
        PmfMax {
            argmax: k,
            value: self.pmf(k),
        }
    }

    /// Phillips' mixed-Poisson bound on the maximal pmf value.
    pub fn pmf_max_bound(&self) -> PmfMaxBound {
        match k_r(self.r) {
            Some(k) => {
                let phillips = ((1.0 - self.p) / (2.0 * std::f64::consts::E * self.r * self.p)).sqrt() * k;
                PmfMaxBound {
                    phillips: Some(phillips),
                    k_r: Some(k),
                    bound: phillips,
                }
            }
            None => PmfMaxBound {
                phillips: None,
                k_r: None,
                bound: 1.0,
            },
        }
    }

    /// Draw from NB(r, p) as Poisson(G) with G ~ Gamma(r, scale p/(1−p)).
    pub fn sample(&self, rng: &mut RngStream) -> u64 {
        let g = sample_gamma(rng, self.r) * self.p / (1.0 - self.p);
        sample_poisson(rng, g)
    }
}

/// `K_r = √r Γ(r − 1/2)/Γ(r)` for r > 1/2, otherwise `None`.
pub fn k_r(r: f64) -> Option<f64> {
    if !(r > 0.5) || !r.is_finite() {
        return None;
    }
    let log = 0.5 * r.ln() + ln_gamma_unchecked(r - 0.5) - ln_gamma_unchecked(r);
    Some(log.exp())
}

/// `max_k Po(λ){k} ≤ 1/√(2eλ)`.
pub fn poisson_max_bound(lambda: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::E * lambda).sqrt()
}

/// Sum the pmf beyond `last`, given ln pmf(last), the ratio
/// pmf(k+1)/pmf(k) (monotone in k) and its limit as k → ∞. Returns
/// `(P(Z > last), E[(Z − last)⁺])`, each including a geometric bound on what
/// remains after the explicit summation stops.
pub(crate) fn sum_tail(
    last: u64,
    log_last: f64,
    ratio: impl Fn(u64) -> f64,
    ratio_limit: f64,
) -> (f64, f64) {
    let mut mass = 0.0;
    let mut excess = 0.0;
    let mut log_term = log_last;
    let mut k = last;
    loop {
        let rho = ratio(k);
        log_term += rho.ln();
        k += 1;
        let term = log_term.exp();
        let m = (k - last) as f64;
        mass += term;
        excess += m * term;
        // Monotone ratios are bounded by the larger of the current one and
        // their limit, so the remainder is dominated by a geometric series.
        let rho_bound = ratio(k).max(ratio_limit);
        if rho_bound < 1.0 && (term < 1e-300 || term * (m + 1.0) < 1e-18 * excess.max(1e-300)) {
            let g = rho_bound / (1.0 - rho_bound);
            mass += term * g;
            // Σ_{j≥1} (m + j) ρ^j = m g + ρ/(1−ρ)².
            excess += term * (m * g + rho_bound / ((1.0 - rho_bound) * (1.0 - rho_bound)));
            break;
        }
        if k - last > 10_000_000 {
            break;
        }
    }
    (mass, excess)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nb(r: f64, p: f64) -> NegBinParams {
        NegBinParams::new(r, p).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NegBinParams::new(0.0, 0.5).is_err());
        assert!(NegBinParams::new(1.0, 1.0).is_err());
        assert!(NegBinParams::new(1.0, 0.0).is_err());
        assert!(NegBinParams::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn log_pmf_trivial_values() {
        assert!((nb(1.0, 0.5).log_pmf(0) - 0.5f64.ln()).abs() < 1e-15);
        assert!((nb(2.0, 0.5).log_pmf(1) - 0.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_pmf_matches_product_form() {
        let (r, p) = (2.5, 0.3);
        let mut prod = (1.0f64 - p).powf(r);
        for j in 0..7 {
            prod *= (r + j as f64) * p / (j as f64 + 1.0);
        }
        let got = nb(r, p).pmf(7);
        assert!(((got - prod) / prod).abs() < 1e-12, "{got} vs {prod}");
    }

    #[test]
    fn cdf_values() {
        assert_eq!(nb(3.0, 0.2).cdf(-1), 0.0);
        assert!((nb(1.0, 0.5).cdf(1) - 0.75).abs() < 1e-15);
        assert!((nb(2.0, 0.5).cdf(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn moments() {
        assert_eq!(nb(2.0, 0.5).moments(), (2.0, 4.0));
        assert_eq!(nb(1.0, 0.5).moments(), (1.0, 2.0));
        let (m, v) = nb(10.0, 0.1).moments();
        assert!((m - 10.0 / 9.0).abs() < 1e-15 && (v - 100.0 / 81.0).abs() < 1e-14);
    }

    #[test]
    fn pmf_max_examples() {
        assert_eq!(nb(1.0, 0.5).pmf_max().argmax, 0);
        assert!((nb(1.0, 0.5).pmf_max().value - 0.5).abs() < 1e-15);
        let m = nb(2.0, 0.5).pmf_max();
        assert_eq!(m.argmax, 0);
        assert!((m.value - 0.25).abs() < 1e-15);
        let m = nb(0.5, 0.9).pmf_max();
        assert_eq!(m.argmax, 0);
        assert!((m.value - 0.1f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pmf_max_agrees_with_scan() {
        for &(r, p) in &[(3.7, 0.6), (20.0, 0.9), (0.4, 0.3), (5.0, 0.5), (101.0, 0.01)] {
            let d = nb(r, p);
            let pmf = d.to_pmf();
            let (mut best_k, mut best) = (0usize, f64::MIN);
            for (k, &w) in pmf.weights.iter().enumerate() {
                if w > best * (1.0 + 1e-13) {
                    best = w;
                    best_k = k;
                }
            }
            let m = d.pmf_max();
            assert_eq!(m.argmax as usize, best_k, "r={r} p={p}");
            assert!(((m.value - best) / best).abs() < 1e-12);
        }
    }

    #[test]
    fn k_r_closed_form_and_phillips_example() {
        let b = nb(2.0, 0.5).pmf_max_bound();
        let k2 = b.k_r.unwrap();
        assert!((k2 - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-14);
        assert!((b.bound - 0.3801).abs() < 1e-4);
        assert!(b.bound >= 0.25);
        let low = nb(0.4, 0.5).pmf_max_bound();
        assert_eq!(low.bound, 1.0);
        assert!(low.phillips.is_none());
    }

    #[test]
    fn poisson_bound_at_two() {
        let bound = poisson_max_bound(2.0);
        assert!((bound - 1.0 / (4.0 * std::f64::consts::E).sqrt()).abs() < 1e-15);
        assert!(bound >= 2.0 * (-2.0f64).exp());
    }

    #[test]
    fn materialized_pmf_is_normalized_and_consistent() {
        for &(r, p) in &[(0.4, 0.1), (2.0, 0.5), (20.0, 0.9), (0.6, 0.9)] {
            let d = nb(r, p);
            let pmf = d.to_pmf();
            assert!((pmf.total_mass() - 1.0).abs() < 1e-12);
            for k in [0u64, 3, 17] {
                let a = pmf.prob(k);
                let b = d.pmf(k);
                assert!(((a - b) / b).abs() < 1e-12, "r={r} p={p} k={k}");
            }
            assert!((pmf.mean() - d.mean()).abs() < 1e-10 * (1.0 + d.mean()));
        }
    }
}
