use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::renorm::DomainSystem;
use crate::series::{enumerate_families, EnumOptions, SourceSpec};
use crate::{Error, Result};

/// Comparison of `(A <- U)` at `x` with `(A' <-[U\A'] U')` at `lambda x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BijectionReport {
    pub x: Complex64,
    pub delta: f64,
    /// Truncation in steps of the rescaled return map; the small-scale side uses `p` times as many `f`-steps.
    pub j: usize,
    pub large_scale: f64,
    pub small_scale: f64,
    pub relative_residual: f64,
}

/// Inverse branch of `f^p` on `U'`: pull `w ∈ V'` back along the critical orbit.
fn return_preimages(ds: &DomainSystem, w: Complex64) -> [(Complex64, f64); 2] {
    let f = ds.map();
    let orbit = ds.postcritical_outside();
    let mut y = w;
    let mut dmag = 1.0;
    for target in orbit.iter().rev() {
        let r = f.preimages(y).branches[0];
        y = if (r - target).norm_sqr() <= (-r - target).norm_sqr() { r } else { -r };
        dmag *= 2.0 * y.norm();
    }
    let r = f.preimages(y).branches[0];
    let d = dmag * 2.0 * r.norm();
    [(r, d), (-r, d)]
}

/// Measures the rescaling identity under the polynomial proxy. Orbits of the
/// rescaled return map correspond to `f`-orbits `p` times longer, with equal
/// weights for an exact renormalization fixed point.
pub fn rescaling_residual(ds: &DomainSystem, x: Complex64, delta: f64, j: usize) -> Result<BijectionReport> {
    if !ds.a().admits(x) {
        return Err(Error::Config(format!("{x} is not in A")));
    }
    let u = ds.u().clone();
    let src = [SourceSpec { region: &u, nontrivial: false }];
    let large = enumerate_families(ds.map(), x, &u, &src, delta, j, &EnumOptions::default())?.remove(0).sum;

    let lx = x * ds.lambda();
    let mut small = 0.0;
    let mut stack: Vec<(Complex64, f64, usize)> = Vec::new();
    if j > 0 {
        for (y, d) in return_preimages(ds, lx) {
            stack.push((y, d, 1));
        }
    }
    while let Some((y, d, k)) = stack.pop() {
        if !ds.u_prime().admits(y) {
            continue;
        }
        small += d.powf(-delta);
        if k < j {
            for (y2, d2) in return_preimages(ds, y) {
                stack.push((y2, d2 * d, k + 1));
            }
        }
    }
    let scale = large.abs().max(small.abs());
    let rel = if scale > 0.0 { (large - small).abs() / scale } else { 0.0 };
    Ok(BijectionReport { x, delta, j, large_scale: large, small_scale: small, relative_residual: rel })
}
