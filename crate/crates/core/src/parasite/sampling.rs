use rayon::prelude::*;
use serde::Serialize;

use super::bound::{theorem31_bound, BoundReport};
use super::exposure::{compute_exposure, ExposureSummary};
use super::scenario::ScenarioParams;
use crate::distributions::{ModGeomParams, NegBinParams};
use crate::error::{domain, Error, Result};
use crate::ibd::run_replicates;
use crate::metrics::{wasserstein_empirical, wasserstein_two_sample, EmpiricalDist};
use crate::numerics::{QuadratureSpec, RngStream};

/// Smallest sample accepted by [`validate_scenario`].
pub const MIN_VALIDATION_SAMPLES: u64 = 10_000;
/// Bootstrap resamples behind the Monte Carlo half-width.
pub const BOOTSTRAP_RESAMPLES: u64 = 50;

/// One exact draw of the parasite count W at host age T.
///
/// Ingestion times come from thinning a rate-`a_max` Poisson process on
/// [0, T]; each parasite ingested at τ contributes an independent
/// single-ancestor population observed after T − τ.
pub fn sample_w(sc: &ScenarioParams, rng: &mut RngStream) -> Result<u64> {
    let a_max = sc.a_max();
    if !a_max.is_finite() {
        return Err(domain("ingestion rate is unbounded"));
    }
    if a_max <= 0.0 {
        return Ok(0);
    }
    let mut s = 0.0;
    let mut total = 0u64;
    loop {
        s += rng.exponential(a_max);
        if s > sc.t {
            return Ok(total);
        }
        if rng.uniform() * a_max >= sc.rate.eval(s) {
            continue;
        }
        let age = sc.t - s;
        total += if age > 0.0 {
            ModGeomParams::new(sc.b, age)?.sample(rng)
        } else {
            1
        };
    }
}

/// `n` draws of W, replicate `i` on stream `(seed, i)`.
pub fn sample_w_replicates(sc: &ScenarioParams, n: u64, seed: u64) -> Result<EmpiricalDist> {
    run_replicates(n, seed, 0, |rng| sample_w(sc, rng))
}

/// Empirical check of the single-host bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    #[serde(rename = "empirical_dW")]
    pub empirical_dw: f64,
    pub bound: f64,
    pub mc_halfwidth: f64,
    pub pass: bool,
    pub seed: u64,
    pub n: u64,
    /// `bound / empirical_dW`, the measured slack.
    pub slack_ratio: f64,
    pub summary: ExposureSummary,
    pub bound_report: BoundReport,
}

/// Resample `emp` with replacement; draw k is the value at rank
/// `below(n)` in the sorted sample.
fn resample(emp: &EmpiricalDist, cum: &[u64], rng: &mut RngStream) -> EmpiricalDist {
    let mut counts = vec![0u64; cum.len()];
    for _ in 0..emp.n() {
        let u = rng.below(emp.n());
        counts[cum.partition_point(|&c| c <= u)] += 1;
    }
    EmpiricalDist::from_counts(counts)
}

/// 97.5% quantile of `d_W(F*, F_n)` over bootstrap resamples `F*` of `emp`.
///
/// By the triangle inequality, `d_W(F_n, F) ≤ d_W(F_n, F*) + d_W(F*, F)`
/// links this spread to the fluctuation of the empirical distance.
pub fn bootstrap_halfwidth(emp: &EmpiricalDist, resamples: u64, seed: u64) -> Result<f64> {
    let cum: Vec<u64> = emp
        .counts()
        .iter()
        .scan(0u64, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect();
    let mut dists: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = RngStream::new(seed, b);
            wasserstein_two_sample(&resample(emp, &cum, &mut rng), emp)
        })
        .collect::<Result<_>>()?;
    dists.sort_by(f64::total_cmp);
    let idx = ((0.975 * resamples as f64).ceil() as usize).clamp(1, dists.len()) - 1;
    Ok(dists[idx])
}

/// Compare `n` exact draws of W with `NB(R_a*, θ_T)` and the bound.
///
/// Two seeds drawn from `rng` key the sampling and bootstrap streams.
pub fn validate_scenario(
    sc: &ScenarioParams,
    n: u64,
    rng: &mut RngStream,
    spec: &QuadratureSpec,
) -> Result<ValidationReport> {
    if n < MIN_VALIDATION_SAMPLES {
        return Err(Error::Precision(format!(
            "validation needs at least {MIN_VALIDATION_SAMPLES} samples, got {n}"
        )));
    }
    let summary = compute_exposure(sc, spec)?;
    let bound_report = theorem31_bound(&summary);
    let (seed_w, seed_b) = (rng.next_u64(), rng.next_u64());
    let emp = sample_w_replicates(sc, n, seed_w)?;
    let law = NegBinParams::new(summary.r_a_star, summary.theta_t)?.to_pmf();
    let empirical_dw = wasserstein_empirical(&emp, &law)?;
    let mc_halfwidth = bootstrap_halfwidth(&emp, BOOTSTRAP_RESAMPLES, seed_b)?;
    let bound = bound_report.bound_total;
    Ok(ValidationReport {
        empirical_dw,
        bound,
        mc_halfwidth,
        pass: empirical_dw <= bound + mc_halfwidth,
        seed: rng.seed(),
        n,
        slack_ratio: bound / empirical_dw,
        summary,
        bound_report,
    })
}
