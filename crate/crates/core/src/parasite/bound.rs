use serde::Serialize;

use super::exposure::ExposureSummary;
use crate::error::{Error, Result};

/// Constant multiplying the A_T* term of the single-host bound.
pub const THEOREM31_CONSTANT: f64 = 16.0;
/// Constant of the multi-host bound.
pub const AGGREGATE_CONSTANT: f64 = 24.0;

/// The single-host Wasserstein bound, term by term:
/// `|A_T| + 16 θ_T A_T* (1 + ln{1/(1−θ_T)}) · min{2/(1−θ_T), 3/(2√(R_a* θ_T (1−θ_T)³))}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_total: f64,
    /// `|A_T|`.
    pub term_a: f64,
    pub term_main: f64,
    pub delta_g_factor: f64,
    pub delta_g_components: [f64; 2],
    /// `1 + ln{1/(1−θ_T)}`.
    pub log_factor: f64,
    pub constant: f64,
}

fn log_factor(theta: f64) -> f64 {
    1.0 - (-theta).ln_1p()
}

pub fn theorem31_bound(s: &ExposureSummary) -> BoundReport {
    let th = s.theta_t;
    let q = 1.0 - th;
    let components = [2.0 / q, 3.0 / (2.0 * (s.r_a_star * th * q * q * q).sqrt())];
    let delta_g_factor = components[0].min(components[1]);
    let lf = log_factor(th);
    let term_a = s.a_t.abs();
    let term_main = THEOREM31_CONSTANT * th * s.a_star * lf * delta_g_factor;
    BoundReport {
        bound_total: term_a + term_main,
        term_a,
        term_main,
        delta_g_factor,
        delta_g_components: components,
        log_factor: lf,
        constant: THEOREM31_CONSTANT,
    }
}

/// Bound on the distance between the total burden of `n_hosts` hosts
/// and `NB(n R̄, θ_T)`, where R̄ is the mean of the hosts' `R_T`:
/// `24 (1 + ln{1/(1−θ_T)}) √θ_T / ((1−θ_T)^{3/2} √(nR̄)) Σ_i A_T*⁽ⁱ⁾`.
///
/// Valid only when `nR̄ > r₀`.
pub fn aggregate_bound(summaries: &[ExposureSummary], n_hosts: usize, r0: f64) -> Result<f64> {
    if summaries.is_empty() || summaries.len() != n_hosts {
        return Err(Error::Input(format!(
            "expected {n_hosts} host summaries, got {}",
            summaries.len()
        )));
    }
    let th = summaries[0].theta_t;
    if summaries.iter().any(|s| (s.theta_t - th).abs() > 1e-12 * th.max(1.0)) {
        return Err(Error::Input("all hosts must share theta_T".into()));
    }
    let total_r: f64 = summaries.iter().map(|s| s.r_t).sum();
    if !(total_r > r0) {
        return Err(Error::Precondition(format!(
            "the aggregate bound needs n*Rbar > r0, got {total_r} <= {r0}"
        )));
    }
    let sum_star: f64 = summaries.iter().map(|s| s.a_star).sum();
    let q = 1.0 - th;
    Ok(AGGREGATE_CONSTANT * log_factor(th) * th.sqrt() / (q.powf(1.5) * total_r.sqrt()) * sum_star)
}
