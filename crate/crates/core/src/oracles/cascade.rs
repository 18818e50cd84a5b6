use serde::{Deserialize, Serialize};

use crate::dynamics::UnimodalQuadratic;
use crate::renorm::{find_superattracting_parameter_in, CombinatoricsSpec};
use crate::{Error, Result};

/// Largest supported doubling level.
pub const MAX_LEVEL: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeLevel {
    pub n: u32,
    pub period: usize,
    pub c: f64,
    /// Closest return `f^{2^{n-1}}(0)` at `c`.
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeEstimate {
    pub n_max: u32,
    pub levels: Vec<CascadeLevel>,
    /// `d_{n+1} / d_n`.
    pub ratios: Vec<f64>,
    /// Aitken-accelerated ratios over consecutive triples.
    pub accelerated: Vec<f64>,
    pub lambda: f64,
    pub error_bar: f64,
    pub inverse_abs: f64,
}

/// Aitken's delta-squared transform of a sequence, one value per triple.
fn aitken(xs: &[f64]) -> Vec<f64> {
    xs.windows(3)
        .map(|w| {
            let d2 = w[2] - 2.0 * w[1] + w[0];
            if d2 == 0.0 {
                w[2]
            } else {
                w[2] - (w[2] - w[1]).powi(2) / d2
            }
        })
        .collect()
}

/// Scaling factor of the period-doubling cascade from closest returns.
///
/// The superattracting parameter of period `2^n` lies on the accumulation side
/// of the one of period `2^{n-1}`; each is located in a window scaled from the
/// previous gap. The estimate is the last Aitken-accelerated ratio and the error
/// bar is the last difference of the sequence it was taken from. A ladder with a
/// single ratio reports `|lambda|` itself as its error bar.
pub fn cascade_lambda_oracle(n_max: u32) -> Result<CascadeEstimate> {
    if !(2..=MAX_LEVEL).contains(&n_max) {
        return Err(Error::Range(format!("doubling level n_max = {n_max} (supported: 2..={MAX_LEVEL})")));
    }
    let mut levels: Vec<CascadeLevel> = Vec::new();
    // Superattracting parameters of periods 1 and 2 are 0 and 1.
    let (mut prev, mut prev2) = (0.0f64, 0.0f64);
    for n in 1..=n_max {
        let spec = CombinatoricsSpec::period_doubling(n)?;
        let gap = prev - prev2;
        let (lo, hi) = if n == 1 { (0.5, 1.5) } else { (prev + 0.05 * gap, prev + 0.6 * gap) };
        let root = find_superattracting_parameter_in(&spec, lo, hi, 2000, 1e-15)?;
        let f = UnimodalQuadratic::new(root.c)?;
        let d = f.iterate_real(0.0, spec.period / 2).0;
        levels.push(CascadeLevel { n, period: spec.period, c: root.c, d });
        prev2 = prev;
        prev = root.c;
    }
    let ratios: Vec<f64> = levels.windows(2).map(|w| w[1].d / w[0].d).collect();
    let accelerated = aitken(&ratios);
    let seq: &[f64] = if accelerated.is_empty() { &ratios } else { &accelerated };
    let lambda = *seq.last().ok_or_else(|| Error::Config("empty ratio sequence".into()))?;
    let error_bar = match seq.len() {
        1 if accelerated.is_empty() => lambda.abs(),
        1 => (lambda - ratios[ratios.len() - 1]).abs(),
        k => (seq[k - 1] - seq[k - 2]).abs(),
    };
    Ok(CascadeEstimate { n_max, levels, ratios, accelerated, lambda, error_bar, inverse_abs: 1.0 / lambda.abs() })
}
