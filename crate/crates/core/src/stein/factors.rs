use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use super::lipschitz::{extremal_f, LipschitzFn};
use super::solver::SteinSolver;
use crate::distributions::NegBinParams;
use crate::error::{domain, Result};
use crate::numerics::{find_root, ln_gamma_unchecked};

/// Slack allowed when comparing measured factors with their bounds.
pub const FACTOR_TOL: f64 = 1e-9;

/// Shape grid used by the factor certification.
pub const GRID_R: [f64; 6] = [0.4, 0.6, 1.0, 2.0, 5.0, 20.0];
/// Success-probability grid used by the factor certification.
pub const GRID_P: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn r0_target() -> f64 {
    3.0 * (2.0 * std::f64::consts::E).sqrt() / 8.0
}

/// `Γ(r − 1/2)/Γ(r)`, strictly decreasing on r > 1/2.
pub fn gamma_ratio(r: f64) -> f64 {
    (ln_gamma_unchecked(r - 0.5) - ln_gamma_unchecked(r)).exp()
}

/// The root r₀ of `Γ(r − 1/2)/Γ(r) = 3√(2e)/8`, by bisection on [1, 4]
/// until the bracket is no wider than `tol`.
pub fn compute_r0(tol: f64) -> Result<f64> {
    find_root(|r| gamma_ratio(r) - r0_target(), 1.0, 4.0, tol)
}

/// r₀ at bracket width 1e-13, computed once.
pub fn r0() -> f64 {
    static R0: OnceLock<f64> = OnceLock::new();
    *R0.get_or_init(|| compute_r0(1e-13).expect("the r0 bracket [1, 4] has a sign change"))
}

/// The bounds `G1 ≤ 1/(1−p)` and
/// `G2 ≤ min{2/(1−p), (1+p)/(1−p)², √(r₀/(rp(1−p)³))}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Bound {
    pub g1_bound: f64,
    pub components: [f64; 3],
    pub g2_bound: f64,
}

pub fn theorem1_bound(params: &NegBinParams, r0: f64) -> Theorem1Bound {
    let (r, p) = (params.r(), params.p());
    let q = 1.0 - p;
    let components = [2.0 / q, (1.0 + p) / (q * q), (r0 / (r * p * q * q * q)).sqrt()];
    Theorem1Bound {
        g1_bound: 1.0 / q,
        components,
        g2_bound: components.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Measured Stein factors next to their bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinFactorReport {
    pub r: f64,
    pub p: f64,
    pub g1_measured: f64,
    pub g2_measured: f64,
    pub g1_bound: f64,
    pub g2_bound_components: [f64; 3],
    pub g2_bound: f64,
    /// The i whose extremal function attains `g2_measured` (smallest on ties).
    pub argmax_i: u64,
    pub n: u64,
    pub i_max: u64,
}

impl SteinFactorReport {
    /// Both measured factors lie within their bounds.
    pub fn certified(&self) -> bool {
        self.g1_measured <= self.g1_bound + FACTOR_TOL && self.g2_measured <= self.g2_bound + FACTOR_TOL
    }
}

/// Default G2 sweep limit: mode + ⌈10 sd⌉.
pub fn default_i_max(params: &NegBinParams) -> u64 {
    params.pmf_max().argmax + (10.0 * params.variance().sqrt()).ceil() as u64
}

/// Default truncation for a sweep up to `i_max`.
pub fn default_n(params: &NegBinParams, i_max: u64) -> u64 {
    params.truncation().max(i_max + 50)
}

/// Measure G1 with `f(x) = −x` and G2 as `max_{i ≤ i_max} Δg_{f_i}(i)`.
pub fn measure_factors(params: &NegBinParams, n: u64, i_max: u64) -> Result<SteinFactorReport> {
    if i_max < 1 {
        return Err(domain("i_max must be >= 1"));
    }
    if n < i_max + 1 {
        return Err(domain(format!("N = {n} must exceed i_max = {i_max}")));
    }
    let solver = SteinSolver::new(*params, n)?;
    let g1 = solver.solve(&LipschitzFn::linear(0.0, -1.0)?)?.sup_g();

    let deltas: Vec<f64> = (0..=i_max)
        .into_par_iter()
        .map(|i| solver.solve(&extremal_f(i)).map(|s| s.delta_g(i)))
        .collect::<Result<_>>()?;
    let (argmax_i, g2) = deltas
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });

    let bound = theorem1_bound(params, r0());
    Ok(SteinFactorReport {
        r: params.r(),
        p: params.p(),
        g1_measured: g1,
        g2_measured: g2,
        g1_bound: bound.g1_bound,
        g2_bound_components: bound.components,
        g2_bound: bound.g2_bound,
        argmax_i: argmax_i as u64,
        n,
        i_max,
    })
}

/// [`measure_factors`] with the default sweep and truncation.
pub fn measure_factors_default(params: &NegBinParams) -> Result<SteinFactorReport> {
    let i_max = default_i_max(params).max(1);
    measure_factors(params, default_n(params, i_max), i_max)
}
