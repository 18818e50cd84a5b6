use serde::{Deserialize, Serialize};

/// The six base sups of the quadratic recursive estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BaseSups {
    /// `A' <-[U\V']- U\V'`
    pub a1: f64,
    /// `A <-[U\V']- U\V'`
    pub a2: f64,
    /// `U' <-[U\V']- U\V'`
    pub a3: f64,
    /// `A' <-[U\V']-+ A'`
    pub b1: f64,
    /// `A <-[U\V']- A'`
    pub b2: f64,
    /// `U' <-[U\V']- A'`
    pub b3: f64,
}

impl BaseSups {
    pub fn as_array(&self) -> [f64; 6] {
        [self.a1, self.a2, self.a3, self.b1, self.b2, self.b3]
    }

    pub fn all_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// `P(s) = alpha + beta s + gamma s^2` assembled from the base sups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRecursion {
    pub delta: f64,
    pub sups: BaseSups,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl QuadraticRecursion {
    pub fn new(delta: f64, sups: BaseSups) -> Self {
        let BaseSups { a1, a2, a3, b1, b2, b3 } = sups;
        Self { delta, sups, alpha: 1.0 + a1 + a2 * (1.0 + a3), beta: b1 + b2 * (1.0 + a3) + a2 * b3, gamma: b2 * b3 }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.alpha + s * (self.beta + s * self.gamma)
    }

    /// `beta < 1/3` and `P` maps `[0, 2 P(0)]` into itself, i.e. `2 beta + 4 alpha gamma <= 1`.
    pub fn invariant_interval(&self) -> bool {
        self.beta < 1.0 / 3.0 && 2.0 * self.beta + 4.0 * self.alpha * self.gamma <= 1.0
    }

    pub fn fixed_point(&self) -> FixedPointSolution {
        solve_quadratic_fixed_point(self.alpha, self.beta, self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSolution {
    /// Smallest positive fixed point, if any.
    pub s: Option<f64>,
    /// `P(0), P(P(0)), ..`, stopped at convergence, at 200 terms, or on blow-up.
    pub trace: Vec<f64>,
}

/// Smallest positive fixed point of `P(s) = alpha + beta s + gamma s^2`.
///
/// Uses `s = 2 alpha / ((1 - beta) + sqrt((1 - beta)^2 - 4 alpha gamma))`, which
/// stays accurate as `gamma -> 0`.
pub fn solve_quadratic_fixed_point(alpha: f64, beta: f64, gamma: f64) -> FixedPointSolution {
    let p = |s: f64| alpha + s * (beta + s * gamma);
    let mut trace = Vec::new();
    let mut x = 0.0f64;
    for _ in 0..200 {
        let next = p(x);
        trace.push(next);
        if !next.is_finite() || next > 1e300 || (next - x).abs() <= 1e-15 * next.abs().max(1.0) {
            break;
        }
        x = next;
    }
    let ok = [alpha, beta, gamma].iter().all(|v| v.is_finite() && *v >= 0.0);
    let disc = (1.0 - beta).powi(2) - 4.0 * alpha * gamma;
    let s = (ok && beta < 1.0 && disc >= 0.0).then(|| 2.0 * alpha / ((1.0 - beta) + disc.sqrt()));
    FixedPointSolution { s: s.filter(|s| *s > 0.0 || alpha == 0.0), trace }
}
