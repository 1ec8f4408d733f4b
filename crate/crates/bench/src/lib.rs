//! Fixtures shared by the benchmarks.

use nbstein::distributions::NegBinParams;
use nbstein::ibd::IBDParams;
use nbstein::numerics::QuadratureSpec;

/// `(label, NB(r, p))` pairs from light to heavy.
pub fn nb_cases() -> Vec<(&'static str, NegBinParams)> {
    [("r1_p0.5", 1.0, 0.5), ("r5_p0.7", 5.0, 0.7), ("r20_p0.9", 20.0, 0.9)]
        .into_iter()
        .map(|(name, r, p)| (name, NegBinParams::new(r, p).expect("valid fixture")))
        .collect()
}

/// `(label, process, horizon)`.
pub fn ibd_cases() -> Vec<(&'static str, IBDParams, f64)> {
    vec![
        ("single_ancestor", IBDParams::constant(0.0, 0.7, 1).expect("valid fixture"), 3.0),
        ("immigration", IBDParams::constant(2.0, 0.5, 0).expect("valid fixture"), 5.0),
        ("critical", IBDParams::constant(1.0, 1.0, 0).expect("valid fixture"), 3.0),
    ]
}

pub fn tight_quadrature() -> QuadratureSpec {
    QuadratureSpec::new(1e-12, 1e-12, 80).expect("valid fixture")
}
