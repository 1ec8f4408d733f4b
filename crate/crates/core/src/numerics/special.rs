//! Log-gamma.
//!
//! Away from the zeros of ln Γ at x = 1 and x = 2 we use the Lanczos
//! approximation with g = 607/128 and the 15 coefficients tabulated by
//! Godfrey (the same table used by Apache Commons Math and Numerical
//! Recipes, 3rd ed.):
//!
//! ```text
//! Γ(x) = √(2π) (x + g − 1/2)^(x − 1/2) e^−(x + g − 1/2) A(x),
//! A(x) = c₀ + Σ_{i=1}^{14} cᵢ / (x − 1 + i).
//! ```
//!
//! Near x = 1 and x = 2 the Lanczos sum loses relative accuracy through
//! cancellation, so we switch to the Taylor expansion
//!
//! ```text
//! ln Γ(2 + z) = (1 − γ) z + Σ_{k≥2} (−1)^k (ζ(k) − 1) z^k / k,
//! ln Γ(1 + z) = ln Γ(2 + z) − ln(1 + z),
//! ```
//!
//! which converges like (z/2)^k. For |z| ≤ 1/4 the 29 tabulated values of
//! ζ(k) − 1 give full double precision.

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;

const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_83e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// ζ(k) − 1 for k = 2..=30.
const ZETA_MINUS_ONE: [f64; 29] = [
    0.644_934_066_848_226_4,
    0.202_056_903_159_594_3,
    0.082_323_233_711_138_19,
    0.036_927_755_143_369_93,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_827,
    0.004_077_356_197_944_339,
    0.002_008_392_826_082_214,
    0.000_994_575_127_818_085_3,
    0.000_494_188_604_119_464_6,
    0.000_246_086_553_308_048_3,
    0.000_122_713_347_578_489_1,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_762e-6,
    3.817_293_264_999_84e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_961e-7,
    4.769_329_867_878_065e-7,
    2.384_505_027_277_33e-7,
    1.192_199_259_653_111e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_429e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
];

const SERIES_RADIUS: f64 = 0.25;

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

/// ln Γ(x) without argument validation. Callers guarantee x > 0.
pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if (x - 2.0).abs() <= SERIES_RADIUS {
        return ln_gamma_2p(x - 2.0);
    }
    if (x - 1.0).abs() <= SERIES_RADIUS {
        let z = x - 1.0;
        return ln_gamma_2p(z) - z.ln_1p();
    }
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum in its accurate range.
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    lanczos(x)
}

fn lanczos(x: f64) -> f64 {
    let mut sum = 0.0;
    for i in (1..LANCZOS.len()).rev() {
        sum += LANCZOS[i] / (x + (i as f64 - 1.0));
    }
    sum += LANCZOS[0];
    let tmp = x + LANCZOS_G - 0.5;
    (x - 0.5) * tmp.ln() - tmp + HALF_LN_2PI + sum.ln()
}

/// ln Γ(2 + z) for |z| ≤ 1/4.
fn ln_gamma_2p(z: f64) -> f64 {
    // Horner on the alternating series, highest order first.
    let mut acc = 0.0;
    for (idx, c) in ZETA_MINUS_ONE.iter().enumerate().rev() {
        let k = (idx + 2) as f64;
        let sign = if (idx + 2) % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * z + sign * c / k;
    }
    z * ((1.0 - EULER_GAMMA) + z * acc)
}

/// ln(k!) for integer k.
pub(crate) fn ln_factorial(k: u64) -> f64 {
    ln_gamma_unchecked(k as f64 + 1.0)
}
