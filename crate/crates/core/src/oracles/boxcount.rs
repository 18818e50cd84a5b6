use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::UnimodalQuadratic;
use crate::oracles::escape::{default_escape_radius, escape_step};
use crate::{Error, Result};

/// Largest supported number of boxes per side.
pub const MAX_RESOLUTION: usize = 4096;

/// Relative padding of the counting window beyond `|beta|`.
const WINDOW_PAD: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub resolution: usize,
    pub box_size: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub c: f64,
    pub value: f64,
    /// Half-width of the square window `[-W, W]^2`.
    pub window: f64,
    pub max_iter: usize,
    pub ladder: Vec<LadderRow>,
    /// Number of finest ladder rows entering the fit.
    pub fit_points: usize,
    /// Root mean square residual of the fit in log space.
    pub fit_residual: f64,
}

/// Box-counting dimension of `J(f_c)` by boundary detection.
///
/// Escape outcomes are sampled on the `(N+1)^2` corner lattice of the finest
/// grid. A box at any resolution counts when the lattice points it contains
/// include both escaping and retained samples, so every coarse count is the
/// union of the fine boxes it covers and counts are nonincreasing in box size.
/// The dimension is the least-squares slope of `log count` against `log(1/size)`
/// over the finest half of the ladder.
pub fn box_counting_dimension(c: f64, resolutions: &[usize], max_iter: usize) -> Result<DimensionEstimate> {
    let f = UnimodalQuadratic::new(c)?;
    if resolutions.len() < 2 {
        return Err(Error::Config("need at least two resolutions".into()));
    }
    if resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("resolutions {resolutions:?} must be strictly ascending")));
    }
    let fine = *resolutions.last().unwrap_or(&0);
    if resolutions[0] < 2 || fine > MAX_RESOLUTION {
        return Err(Error::Range(format!("resolution ladder {resolutions:?} (supported: 2..={MAX_RESOLUTION})")));
    }
    if let Some(bad) = resolutions.iter().find(|&&n| !fine.is_multiple_of(n)) {
        return Err(Error::Config(format!("resolution {bad} does not divide the finest resolution {fine}")));
    }
    if max_iter == 0 {
        return Err(Error::Config("max_iter must be positive".into()));
    }

    let window = WINDOW_PAD * f.beta_abs();
    let r = default_escape_radius(c);
    let step = 2.0 * window / fine as f64;
    let side = fine + 1;
    let coord = |i: usize| -window + step * i as f64;
    let escapes: Vec<bool> = (0..side)
        .into_par_iter()
        .flat_map_iter(|row| {
            let im = coord(row);
            (0..side).map(move |col| escape_step(&f, Complex64::new(coord(col), im), max_iter, r * r).escapes())
        })
        .collect();

    // Fine boundary mask; a coarse box of `b x b` fine boxes counts if any of them does.
    let mask: Vec<bool> = (0..fine * fine)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / fine, k % fine);
            let s = [escapes[i * side + j], escapes[i * side + j + 1], escapes[(i + 1) * side + j], escapes[(i + 1) * side + j + 1]];
            s.iter().any(|&e| e) && s.iter().any(|&e| !e)
        })
        .collect();
    let count_at = |res: usize| {
        let b = fine / res;
        let mut hit = vec![false; res * res];
        for (k, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
            hit[(k / fine / b) * res + (k % fine) / b] = true;
        }
        hit.iter().filter(|&&h| h).count() as u64
    };
    let ladder: Vec<LadderRow> =
        resolutions.iter().map(|&res| LadderRow { resolution: res, box_size: 2.0 * window / res as f64, count: count_at(res) }).collect();
    let fit_points = ladder.len().div_ceil(2).max(2);
    let top = &ladder[ladder.len() - fit_points..];
    if top.iter().any(|row| row.count == 0) {
        return Err(Error::DegenerateFit(format!("empty box count at c = {c}")));
    }
    let xs: Vec<f64> = top.iter().map(|row| (1.0 / row.box_size).ln()).collect();
    let ys: Vec<f64> = top.iter().map(|row| (row.count as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys).ok_or_else(|| Error::DegenerateFit("coincident box sizes".into()))?;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let fit_residual = (rss / xs.len() as f64).sqrt();
    if !(0.0..=2.0).contains(&slope) {
        return Err(Error::DegenerateFit(format!("slope {slope} outside [0, 2]")));
    }
    Ok(DimensionEstimate { c, value: slope, window, max_iter, ladder, fit_points, fit_residual })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| (sxy / sxx, my - sxy / sxx * mx))
}

/// Resolution ladder as CSV.
pub fn dimension_csv(est: &DimensionEstimate) -> String {
    let mut out = String::from("resolution,box_size,count\n");
    for row in &est.ladder {
        out.push_str(&format!("{},{:e},{}\n", row.resolution, row.box_size, row.count));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_is_one_dimensional() {
        let est = box_counting_dimension(0.0, &[32, 64, 128, 256], 200).unwrap();
        assert!((est.value - 1.0).abs() < 0.1, "{est:?}");
        assert!(est.ladder.windows(2).all(|w| w[0].count <= w[1].count));
    }

    #[test]
    fn rejects_bad_ladders() {
        assert!(box_counting_dimension(0.0, &[64, 32], 100).is_err());
        assert!(box_counting_dimension(0.0, &[48, 64], 100).is_err());
        assert!(box_counting_dimension(0.0, &[4096, 8192], 100).is_err());
    }
}
