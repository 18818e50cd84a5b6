use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::UnimodalQuadratic;
use crate::{Error, Result};

/// Root of the fitted pressure function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    pub delta_cr: f64,
    /// Unclamped root of the fitted pressure.
    pub raw_root: f64,
    /// RMS residual of the growth-rate regression at the root.
    pub fit_residual: f64,
    /// Set when the raw root fell outside the bracket and was clamped.
    pub clamped: bool,
    pub depth: usize,
    /// `(delta, P(delta))` pairs evaluated during the bisection.
    pub samples: Vec<(f64, f64)>,
}

/// Regression threshold on the RMS residual of `ln S_k` against `k`.
const MAX_FIT_RESIDUAL: f64 = 0.25;

fn log_derivatives(f: &UnimodalQuadratic, z: Complex64, depth: usize, first: usize) -> Result<Vec<Vec<f64>>> {
    let mut levels: Vec<Vec<f64>> = (first..=depth).map(|k| Vec::with_capacity(1 << k.min(24))).collect();
    let mut stack: Vec<(Complex64, f64, usize)> = vec![(z, 0.0, 0)];
    while let Some((w, ld, k)) = stack.pop() {
        if k >= first {
            levels[k - first].push(ld);
        }
        if k == depth {
            continue;
        }
        let r = f.preimages(w).branches[0];
        let step = (2.0 * r.norm()).ln();
        if !step.is_finite() {
            return Err(Error::CriticalHit { orbit: vec![r, w] });
        }
        stack.push((-r, ld + step, k + 1));
        stack.push((r, ld + step, k + 1));
    }
    Ok(levels)
}

fn log_sum_exp(values: &[f64], delta: f64) -> f64 {
    let m = values.iter().map(|l| -delta * l).fold(f64::NEG_INFINITY, f64::max);
    m + values.iter().map(|l| (-delta * l - m).exp()).sum::<f64>().ln()
}

/// Least-squares slope and RMS residual.
fn fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (points.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    (slope, rms)
}

/// Estimates the critical exponent as the root of the growth rate of the level
/// sums `sum_{f^k(w) = z} |Df^k(w)|^-delta` over the last `depth / 2` levels.
pub fn pressure_critical_exponent(f: &UnimodalQuadratic, z: Complex64, depth: usize, bracket: (f64, f64)) -> Result<PressureEstimate> {
    if !(4..=22).contains(&depth) {
        return Err(Error::Range(format!("pressure depth {depth} (must lie in 4..=22)")));
    }
    let (lo_b, hi_b) = bracket;
    if !(lo_b < hi_b && lo_b > 0.0) {
        return Err(Error::Config(format!("bad delta bracket ({lo_b}, {hi_b})")));
    }
    let first = depth - depth / 2;
    let levels = log_derivatives(f, z, depth, first)?;
    let pressure = |delta: f64| -> (f64, f64) {
        let pts: Vec<(f64, f64)> = levels.iter().enumerate().map(|(i, l)| ((first + i) as f64, log_sum_exp(l, delta))).collect();
        fit(&pts)
    };
    let mut samples = Vec::new();
    let (mut lo, mut hi) = ((lo_b - 0.5).max(1e-3), hi_b + 0.5);
    let (p_lo, _) = pressure(lo);
    let (p_hi, _) = pressure(hi);
    samples.push((lo, p_lo));
    samples.push((hi, p_hi));
    let raw = if p_lo <= 0.0 {
        lo
    } else if p_hi >= 0.0 {
        hi
    } else {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let (p, _) = pressure(mid);
            samples.push((mid, p));
            if p > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let (_, rms) = pressure(raw);
    if !(rms <= MAX_FIT_RESIDUAL) {
        return Err(Error::BadFit { residual: rms });
    }
    let clamped = raw < lo_b || raw > hi_b;
    Ok(PressureEstimate { delta_cr: raw.clamp(lo_b, hi_b), raw_root: raw, fit_residual: rms, clamped, depth, samples })
}
