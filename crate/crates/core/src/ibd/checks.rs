use serde::Serialize;

use super::sim::{run_replicates, simulate_ibd, IBDParams};
use crate::distributions::{ModGeomParams, Pmf};
use crate::error::{domain, Error, Result};
use crate::metrics::{tv_distance, tv_two_sample, EmpiricalDist};
use crate::numerics::{integrate, QuadratureSpec, RngStream};

/// Smallest sample accepted by the law checks.
pub const MIN_LAW_SAMPLES: u64 = 1000;

/// Outcome of comparing a sample with a law, or two samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LawCheckReport {
    pub tv: f64,
    pub n: u64,
    /// Largest standardized deviation of a single cell.
    pub worst_cell_z: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn require_samples(n: u64) -> Result<()> {
    if n < MIN_LAW_SAMPLES {
        return Err(Error::Precision(format!(
            "law checks need at least {MIN_LAW_SAMPLES} samples, got {n}"
        )));
    }
    Ok(())
}

/// Total variation between an empirical law and a model law.
pub fn check_law(samples: &EmpiricalDist, law: &Pmf, threshold: f64) -> Result<LawCheckReport> {
    require_samples(samples.n())?;
    let tv = tv_distance(&samples.to_pmf()?, law);
    let n = samples.n() as f64;
    let top = law.end().max(samples.counts().len() as u64);
    let mut worst = 0.0f64;
    for k in 0..top {
        let pi = if k < law.end() { law.prob(k) } else { law.tail_mass };
        let freq = samples.freq(k);
        let z = if pi > 0.0 {
            (freq - pi).abs() / (pi * (1.0 - pi) / n).sqrt()
        } else if freq > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(z);
    }
    Ok(LawCheckReport {
        tv,
        n: samples.n(),
        worst_cell_z: worst,
        threshold,
        pass: tv <= threshold,
    })
}

/// Two-sample version of [`check_law`]; cell z-scores use the pooled
/// frequency.
pub fn check_two_sample(a: &EmpiricalDist, b: &EmpiricalDist, threshold: f64) -> Result<LawCheckReport> {
    require_samples(a.n().min(b.n()))?;
    let tv = tv_two_sample(a, b)?;
    let (na, nb) = (a.n() as f64, b.n() as f64);
    let top = a.counts().len().max(b.counts().len()) as u64;
    let mut worst = 0.0f64;
    for k in 0..top {
        let pooled = (a.count(k) + b.count(k)) as f64 / (na + nb);
        if pooled > 0.0 && pooled < 1.0 {
            let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
            worst = worst.max((a.freq(k) - b.freq(k)).abs() / se);
        }
    }
    Ok(LawCheckReport {
        tv,
        n: a.n().min(b.n()),
        worst_cell_z: worst,
        threshold,
        pass: tv <= threshold,
    })
}

/// Compare `Z_i(t)` with `Z_{i−1}(t) + Y₁(t)` in law, for immigration rate
/// `rp`, birth rate `p` and unit death rate; `Y₁` is the single-ancestor
/// population drawn from its modified geometric law.
///
/// Replicate streams are keyed by two seeds drawn from `rng`.
pub fn coupling_check(
    i: u64,
    rp: f64,
    p: f64,
    t: f64,
    n: u64,
    threshold: f64,
    rng: &mut RngStream,
) -> Result<LawCheckReport> {
    if i < 1 {
        return Err(domain("coupling index i must be >= 1"));
    }
    require_samples(n)?;
    let direct = IBDParams::constant(rp, p, i)?;
    let shifted = IBDParams::constant(rp, p, i - 1)?;
    let single = ModGeomParams::new(p, t)?;
    let (seed_a, seed_b) = (rng.next_u64(), rng.next_u64());
    let a = run_replicates(n, seed_a, 0, |r| simulate_ibd(&direct, t, r))?;
    let b = run_replicates(n, seed_b, 0, |r| {
        let z = simulate_ibd(&shifted, t, r)?;
        Ok(z + single.sample(r))
    })?;
    check_two_sample(&a, &b, threshold)
}

/// The two integrals `∫₀^∞ Λ_t/√(1−Λ_t) dt` and `∫₀^∞ Λ_t²/√(1−Λ_t) dt`,
/// `Λ_t = e^{−(1−p)t}`, next to their closed forms `2/(1−p)` and `4/(3(1−p))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralIdentities {
    pub p: f64,
    pub i1: f64,
    pub i1_err: f64,
    pub i1_closed: f64,
    pub i2: f64,
    pub i2_err: f64,
    pub i2_closed: f64,
}

impl IntegralIdentities {
    /// Largest deviation from the closed forms.
    pub fn max_abs_error(&self) -> f64 {
        (self.i1 - self.i1_closed).abs().max((self.i2 - self.i2_closed).abs())
    }
}

pub fn verify_integral_identities(p: f64, spec: &QuadratureSpec) -> Result<IntegralIdentities> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("p must lie in (0, 1), got {p}")));
    }
    let c = 1.0 - p;
    // 1 − Λ via expm1 keeps full relative precision near t = 0.
    let lam = move |t: f64| (-c * t).exp();
    let root = move |t: f64| (-(-c * t).exp_m1()).sqrt();
    let i1 = integrate(|t| lam(t) / root(t), 0.0, f64::INFINITY, spec)?;
    let i2 = integrate(|t| lam(t) * lam(t) / root(t), 0.0, f64::INFINITY, spec)?;
    Ok(IntegralIdentities {
        p,
        i1: i1.value,
        i1_err: i1.err_est,
        i1_closed: 2.0 / c,
        i2: i2.value,
        i2_err: i2.err_est,
        i2_closed: 4.0 / (3.0 * c),
    })
}
