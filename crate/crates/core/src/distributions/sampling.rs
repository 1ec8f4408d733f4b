//! Gamma and Poisson samplers driven by [`RngStream`].

use crate::numerics::{ln_factorial, RngStream};

/// Gamma(shape, scale 1).
///
/// Marsaglia & Tsang (2000): for shape a ≥ 1 set d = a − 1/3, c = 1/√(9d);
/// draw x ~ N(0,1), v = (1 + cx)³, accept d·v when u < 1 − 0.0331x⁴ or
/// ln u < x²/2 + d(1 − v + ln v). For a < 1 return Gamma(a + 1)·u^{1/a}.
pub fn sample_gamma(rng: &mut RngStream, shape: f64) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let g = sample_gamma(rng, shape + 1.0);
        return g * rng.uniform().powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

const PTRS_THRESHOLD: f64 = 10.0;

/// Poisson(λ).
///
/// Inversion by sequential search for λ < 10; above that the transformed
/// rejection sampler PTRS of Hörmann (1993).
pub fn sample_poisson(rng: &mut RngStream, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda < PTRS_THRESHOLD {
        let u = rng.uniform();
        let mut k = 0u64;
        let mut term = (-lambda).exp();
        let mut cdf = term;
        while u > cdf {
            k += 1;
            term *= lambda / k as f64;
            let next = cdf + term;
            if next == cdf {
                break;
            }
            cdf = next;
        }
        return k;
    }
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.uniform() - 0.5;
        let v = rng.uniform();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -lambda + k * loglam - ln_factorial(k as u64);
        if lhs <= rhs {
            return k as u64;
        }
    }
}
