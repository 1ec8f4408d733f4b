use serde::Serialize;

use super::scenario::ScenarioParams;
use crate::distributions::lambda_theta;
use crate::error::Result;
use crate::numerics::{find_root, integrate, integrate_piecewise, QuadratureSpec};

/// Uniform grid size for tracking `t ↦ A_t`.
pub const EXPOSURE_GRID: usize = 1024;

/// Exposure functionals of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExposureSummary {
    /// `A_T = ∫₀ᵀ (a_{T−s} − ā) e^{−(1−b)s} ds`.
    #[serde(rename = "A_T")]
    pub a_t: f64,
    /// `A_T* = sup_{0≤t≤T} |A_t|`.
    #[serde(rename = "A_star")]
    pub a_star: f64,
    /// `R_T = (1−b)/(b(1−e^{−(1−b)T})) ∫₀ᵀ a_{T−s} e^{−(1−b)s} ds`.
    #[serde(rename = "R_T")]
    pub r_t: f64,
    /// `R_a* = ā/b`.
    #[serde(rename = "R_a_star")]
    pub r_a_star: f64,
    #[serde(rename = "theta_T")]
    pub theta_t: f64,
    /// `μ_T = ∫₀ᵀ e^{−(T−s)} a_s ds`.
    #[serde(rename = "mu_T")]
    pub mu_t: f64,
}

/// Points `t` where `A_t` is tracked: the uniform grid, the images
/// `T − s` of the rate's breakpoints, and the zeros of `a_{T−t} − ā`, where
/// `A_t` has its local extrema.
fn tracking_points(sc: &ScenarioParams) -> Result<Vec<f64>> {
    let t_end = sc.t;
    let h = |t: f64| sc.rate.eval(t_end - t) - sc.abar;
    let mut pts: Vec<f64> = (0..=EXPOSURE_GRID)
        .map(|k| t_end * k as f64 / EXPOSURE_GRID as f64)
        .collect();
    pts.extend(sc.rate.breaks(t_end).iter().map(|s| t_end - s));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (l, r) = (w[0], w[1]);
        // Stay off the cell edges so a jump at an edge is not mistaken for a zero.
        let eps = 1e-12 * (r - l);
        let (hl, hr) = (h(l + eps), h(r - eps));
        if hl * hr < 0.0 {
            roots.push(find_root(h, l + eps, r - eps, 1e-15 * t_end.max(1.0))?);
        }
    }
    pts.extend(roots);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

/// `(t, A_t)` on the tracking points.
pub fn exposure_path(sc: &ScenarioParams, spec: &QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    let c = 1.0 - sc.b;
    let t_end = sc.t;
    let pts = tracking_points(sc)?;
    let piece = QuadratureSpec {
        abs_tol: spec.abs_tol / pts.len() as f64,
        ..*spec
    };
    let mut out = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    out.push((pts[0], 0.0));
    for w in pts.windows(2) {
        let part = integrate(
            |s| (sc.rate.eval(t_end - s) - sc.abar) * (-c * s).exp(),
            w[0],
            w[1],
            &piece,
        )?;
        acc += part.value;
        out.push((w[1], acc));
    }
    Ok(out)
}

pub fn compute_exposure(sc: &ScenarioParams, spec: &QuadratureSpec) -> Result<ExposureSummary> {
    let (b, t_end) = (sc.b, sc.t);
    let c = 1.0 - b;
    let path = exposure_path(sc, spec)?;
    let a_t = path.last().map(|p| p.1).unwrap_or(0.0);
    let a_star = path.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));

    let rate_breaks = sc.rate.breaks(t_end);
    let mirrored: Vec<f64> = rate_breaks.iter().map(|s| t_end - s).collect();
    let exposure = integrate_piecewise(
        |s| sc.rate.eval(t_end - s) * (-c * s).exp(),
        0.0,
        t_end,
        &mirrored,
        spec,
    )?;
    let one_minus_lambda = -(-c * t_end).exp_m1();
    let r_t = c / (b * one_minus_lambda) * exposure.value;
    let mu_t = integrate_piecewise(
        |s| (-(t_end - s)).exp() * sc.rate.eval(s),
        0.0,
        t_end,
        &rate_breaks,
        spec,
    )?
    .value;

    Ok(ExposureSummary {
        a_t,
        a_star,
        r_t,
        r_a_star: sc.abar / b,
        theta_t: lambda_theta(b, t_end)?.theta,
        mu_t,
    })
}
