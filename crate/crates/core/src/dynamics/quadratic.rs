use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The map `x -> c - x^2` acting on the complex plane.
///
/// At `c = 2` this is the Chebyshev polynomial. The substitution `w = -x` turns
/// it into the standard form `w -> w^2 - c`, see [`UnimodalQuadratic::standard_form_parameter`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnimodalQuadratic {
    c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CocycleResult {
    pub value: Complex64,
    pub derivative: Complex64,
    pub steps: usize,
}

/// The two inverse branches, principal square root first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preimages {
    pub branches: [Complex64; 2],
    /// Set when `z = c`, where both branches collapse onto the critical point.
    pub critical: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub point: f64,
    pub multiplier: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    pub alpha: FixedPoint,
    pub beta: FixedPoint,
}

impl UnimodalQuadratic {
    pub fn new(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::Config(format!("parameter c = {c} is not finite")));
        }
        Ok(Self { c })
    }

    pub fn chebyshev() -> Self {
        Self { c: 2.0 }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Parameter of the conjugate map `w -> w^2 + c'` under `w = -x`; equals `-c`.
    pub fn standard_form_parameter(&self) -> f64 {
        -self.c
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.c - (z.re * z.re - z.im * z.im), -2.0 * z.re * z.im)
    }

    #[inline]
    pub fn eval_real(&self, x: f64) -> f64 {
        self.c - x * x
    }

    #[inline]
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        -2.0 * z
    }

    /// `f^k(0)` for `k = 1..=n`.
    pub fn critical_orbit(&self, n: usize) -> Vec<f64> {
        let mut x = 0.0;
        (0..n)
            .map(|_| {
                x = self.eval_real(x);
                x
            })
            .collect()
    }

    /// Real iterate `f^k(x)` together with its derivative.
    pub fn iterate_real(&self, mut x: f64, k: usize) -> (f64, f64) {
        let mut d = 1.0;
        for _ in 0..k {
            d *= -2.0 * x;
            x = self.eval_real(x);
        }
        (x, d)
    }

    pub fn iterate_with_derivative(&self, z: Complex64, k: usize) -> Result<CocycleResult> {
        iterate_with_derivative(self, z, k)
    }

    pub fn preimages(&self, z: Complex64) -> Preimages {
        preimages(self, z)
    }

    /// Both real fixed points; requires `c >= -1/4`.
    pub fn fixed_points(&self) -> Result<FixedPoints> {
        let disc = 1.0 + 4.0 * self.c;
        if disc < 0.0 {
            return Err(Error::Range(format!("c = {} has no real fixed points", self.c)));
        }
        let root = disc.sqrt();
        let alpha = (root - 1.0) / 2.0;
        let beta = -(1.0 + root) / 2.0;
        Ok(FixedPoints { alpha: FixedPoint { point: alpha, multiplier: -2.0 * alpha }, beta: FixedPoint { point: beta, multiplier: -2.0 * beta } })
    }

    /// `|beta|`, the half-width of the invariant interval.
    pub fn beta_abs(&self) -> f64 {
        (1.0 + (1.0 + 4.0 * self.c.abs()).sqrt()) / 2.0
    }
}

pub fn iterate_with_derivative(f: &UnimodalQuadratic, z: Complex64, k: usize) -> Result<CocycleResult> {
    let mut value = z;
    let mut derivative = Complex64::new(1.0, 0.0);
    for step in 0..k {
        derivative *= f.derivative(value);
        value = f.eval(value);
        if !(value.re.is_finite() && value.im.is_finite() && derivative.re.is_finite() && derivative.im.is_finite()) {
            return Err(Error::Overflow { step });
        }
    }
    Ok(CocycleResult { value, derivative, steps: k })
}

pub fn preimages(f: &UnimodalQuadratic, z: Complex64) -> Preimages {
    let w = (Complex64::new(f.c(), 0.0) - z).sqrt();
    Preimages { branches: [w, -w], critical: w.re == 0.0 && w.im == 0.0 }
}
