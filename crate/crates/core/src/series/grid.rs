use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Region;

/// A sampled terminal and the radius of the grid cell it represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    pub z: Complex64,
    pub spacing: f64,
}

/// Terminals standing in for a region in sup computations.
///
/// Every region built by this crate is symmetric under complex conjugation, so
/// the polar constructors only sample the closed upper half plane.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TerminalGrid {
    pub terminals: Vec<Terminal>,
}

impl TerminalGrid {
    pub fn new(terminals: Vec<Terminal>) -> Self {
        Self { terminals }
    }

    /// Cell centres of a polar grid on `r_in <= |z| <= r_out`, `0 <= arg z <= pi`.
    /// Radii are geometric when `r_in > 0`.
    pub fn polar(r_in: f64, r_out: f64, radial: usize, angular: usize) -> Self {
        let mut terminals = Vec::with_capacity(radial * angular);
        let dtheta = PI / angular as f64;
        for i in 0..radial {
            let (a, b) = if r_in > 0.0 {
                let q = (r_out / r_in).powf(1.0 / radial as f64);
                (r_in * q.powi(i as i32), r_in * q.powi(i as i32 + 1))
            } else {
                (r_out * i as f64 / radial as f64, r_out * (i + 1) as f64 / radial as f64)
            };
            let r = 0.5 * (a + b);
            let spacing = 0.5 * ((b - a).powi(2) + (b * dtheta).powi(2)).sqrt();
            for k in 0..angular {
                let theta = dtheta * (k as f64 + 0.5);
                terminals.push(Terminal { z: Complex64::from_polar(r, theta), spacing });
            }
        }
        Self { terminals }
    }

    /// `count` points on the circle `|z| = r`, with spacing half the arc between neighbours.
    pub fn circle(r: f64, count: usize) -> Self {
        let spacing = PI * r / count as f64;
        let terminals = (0..count).map(|k| Terminal { z: Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / count as f64), spacing }).collect();
        Self { terminals }
    }

    /// Square grid of side `2 r` around 0, upper half only.
    pub fn square(r: f64, per_side: usize) -> Self {
        let h = 2.0 * r / per_side as f64;
        let mut terminals = Vec::new();
        for i in 0..per_side {
            for k in 0..per_side.div_ceil(2) {
                let z = Complex64::new(-r + h * (i as f64 + 0.5), h * (k as f64 + 0.5));
                terminals.push(Terminal { z, spacing: h / std::f64::consts::SQRT_2 });
            }
        }
        Self { terminals }
    }

    /// Keeps terminals admitted by the region (uncertain ones included).
    pub fn filtered(mut self, region: &Region) -> Self {
        self.terminals.retain(|t| region.admits(t.z));
        self
    }

    pub fn merged(mut self, other: &TerminalGrid) -> Self {
        self.terminals.extend_from_slice(&other.terminals);
        self
    }

    /// Every `step`-th terminal.
    pub fn thinned(&self, step: usize) -> Self {
        Self { terminals: self.terminals.iter().step_by(step.max(1)).copied().collect() }
    }

    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }
}
