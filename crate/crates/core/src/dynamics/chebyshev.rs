use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::UnimodalQuadratic;
use crate::{Error, Result};

/// `T(z) = -(z + 1/z)`, which satisfies `T(z^2) = Ch(T(z))` for `Ch(x) = 2 - x^2`.
#[inline]
pub fn semiconjugacy_t(z: Complex64) -> Complex64 {
    -(z + z.inv())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SemiconjugacyReport {
    pub samples: usize,
    pub max_residual: f64,
    pub min_dt: f64,
    pub max_dt: f64,
}

/// Samples the annulus `r_in < |z| < r_out` on a Kronecker sequence and measures
/// `|T(z^2) - Ch(T(z))|` together with the range of `|DT(z)| = |1 - z^-2|`.
pub fn chebyshev_semiconjugacy_check(sample_count: usize, annulus: (f64, f64)) -> Result<SemiconjugacyReport> {
    let (r_in, r_out) = annulus;
    if !(1.0 < r_in && r_in < r_out && r_out.is_finite()) {
        return Err(Error::Config(format!("annulus ({r_in}, {r_out}) must satisfy 1 < r_in < r_out")));
    }
    let ch = UnimodalQuadratic::chebyshev();
    // Additive recurrences with irrational steps give a deterministic, well-spread sample.
    let g1 = 0.754_877_666_246_692_8;
    let g2 = 0.569_840_290_998_053_3;
    let mut report = SemiconjugacyReport { samples: sample_count, max_residual: 0.0, min_dt: f64::INFINITY, max_dt: 0.0 };
    for i in 0..sample_count {
        let s = ((i as f64 + 0.5) * g1).fract();
        let t = ((i as f64 + 0.5) * g2).fract();
        // Area-uniform radius.
        let r = (r_in * r_in + s * (r_out * r_out - r_in * r_in)).sqrt();
        let z = Complex64::from_polar(r, std::f64::consts::TAU * t);
        let lhs = semiconjugacy_t(z * z);
        let rhs = ch.eval(semiconjugacy_t(z));
        report.max_residual = report.max_residual.max((lhs - rhs).norm());
        let dt = (Complex64::new(1.0, 0.0) - (z * z).inv()).norm();
        report.min_dt = report.min_dt.min(dt);
        report.max_dt = report.max_dt.max(dt);
    }
    Ok(report)
}
