use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::UnimodalQuadratic;
use crate::{Error, Result};

/// Tri-state membership. `Uncertain` means the point lies within the region's
/// margin of its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Membership {
    Inside,
    Outside,
    Uncertain,
}

impl std::ops::Not for Membership {
    type Output = Self;

    fn not(self) -> Self {
        match self {
            Self::Inside => Self::Outside,
            Self::Outside => Self::Inside,
            Self::Uncertain => Self::Uncertain,
        }
    }
}

impl Membership {
    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (Self::Outside, _) | (_, Self::Outside) => Self::Outside,
            (Self::Inside, Self::Inside) => Self::Inside,
            _ => Self::Uncertain,
        }
    }

    pub fn or(self, other: Self) -> Self {
        !(!self).and(!other)
    }

    /// Conservative reading used by the series engine: uncertain counts as inside.
    #[inline]
    pub fn admits(self) -> bool {
        self != Self::Outside
    }
}

/// Relative membership margin applied when no explicit margin is given.
pub const DEFAULT_RELATIVE_MARGIN: f64 = 1e-9;

/// The component of `f^{-p}(D(0, rho))` containing the critical point.
///
/// `z` belongs when `f^p(z)` lands in the target disk and every intermediate
/// `f^i(z)`, `1 <= i < p`, stays within `tube * |f^i(0)|` of `f^i(0)`.
#[derive(Debug, Clone)]
pub struct TrackedPullback {
    map: UnimodalQuadratic,
    steps: usize,
    target_radius: f64,
    tube: f64,
    orbit: Vec<Complex64>,
    margin: f64,
}

impl TrackedPullback {
    pub fn new(map: UnimodalQuadratic, steps: usize, target_radius: f64, tube: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Config("pullback needs at least one step".into()));
        }
        if !(target_radius > 0.0 && target_radius.is_finite()) {
            return Err(Error::Config(format!("pullback target radius {target_radius} must be positive")));
        }
        if !(tube > 0.0 && tube < 1.0) {
            return Err(Error::Config(format!("tube constant {tube} must lie in (0, 1)")));
        }
        let orbit: Vec<Complex64> = map.critical_orbit(steps - 1).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        if orbit.iter().any(|o| o.norm() == 0.0) {
            return Err(Error::Config(format!("critical orbit returns to 0 before step {steps}")));
        }
        let mut pb = Self { map, steps, target_radius, tube, orbit, margin: 0.0 };
        pb.margin = DEFAULT_RELATIVE_MARGIN * pb.diameter_estimate();
        Ok(pb)
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn map(&self) -> &UnimodalQuadratic {
        &self.map
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn target_radius(&self) -> f64 {
        self.target_radius
    }

    pub fn tube(&self) -> f64 {
        self.tube
    }

    /// `2 sqrt(rho / |Df^{p-1}(c)|)`, the diameter of the quadratic approximation.
    pub fn diameter_estimate(&self) -> f64 {
        let (_, d) = self.map.iterate_real(self.map.c(), self.steps - 1);
        2.0 * (self.target_radius / d.abs().max(f64::MIN_POSITIVE)).sqrt()
    }

    pub fn membership(&self, z: Complex64) -> Membership {
        let c = self.map.c();
        let mut w = z;
        let mut d = Complex64::new(1.0, 0.0);
        d *= -2.0 * w;
        w = Complex64::new(c - (w.re * w.re - w.im * w.im), -2.0 * w.re * w.im);
        for o in &self.orbit {
            let tol = self.tube * o.norm();
            if (w - o).norm_sqr() > tol * tol {
                return Membership::Outside;
            }
            d *= -2.0 * w;
            w = Complex64::new(c - (w.re * w.re - w.im * w.im), -2.0 * w.re * w.im);
        }
        let r = w.norm();
        let dn = d.norm();
        if dn > 0.0 {
            let dist = (self.target_radius - r) / dn;
            if dist.abs() <= self.margin {
                return Membership::Uncertain;
            }
        }
        if r < self.target_radius {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    /// Distance from 0 to the boundary along the ray of angle `theta`, by bisection.
    pub fn radius_along(&self, theta: f64) -> f64 {
        let dir = Complex64::from_polar(1.0, theta);
        let mut lo = 0.0;
        let mut hi = self.diameter_estimate();
        while self.membership(dir * hi) != Membership::Outside {
            lo = hi;
            hi *= 2.0;
            if hi > 16.0 {
                return hi;
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.membership(dir * mid) == Membership::Outside {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Region geometry in the dynamical plane.
#[derive(Debug, Clone)]
pub enum Region {
    Plane,
    Empty,
    Disk {
        center: Complex64,
        radius: f64,
        margin: f64,
    },
    /// `factor * base`: contains `z` iff `base` contains `z / factor`.
    Scaled {
        factor: Complex64,
        base: Box<Region>,
    },
    Pullback(Arc<TrackedPullback>),
    Complement(Box<Region>),
    Difference(Box<Region>, Box<Region>),
    Intersection(Box<Region>, Box<Region>),
    Union(Box<Region>, Box<Region>),
}

impl Region {
    pub fn disk(center: Complex64, radius: f64) -> Self {
        Self::Disk { center, radius, margin: DEFAULT_RELATIVE_MARGIN * 2.0 * radius }
    }

    pub fn scaled(factor: Complex64, base: Region) -> Self {
        Self::Scaled { factor, base: Box::new(base) }
    }

    pub fn pullback(pb: TrackedPullback) -> Self {
        Self::Pullback(Arc::new(pb))
    }

    pub fn complement(self) -> Self {
        Self::Complement(Box::new(self))
    }

    pub fn minus(self, other: Region) -> Self {
        Self::Difference(Box::new(self), Box::new(other))
    }

    pub fn intersect(self, other: Region) -> Self {
        Self::Intersection(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: Region) -> Self {
        Self::Union(Box::new(self), Box::new(other))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Plane | Self::Empty | Self::Pullback(_) => Ok(()),
            Self::Disk { center, radius, margin } => {
                if !(center.re.is_finite() && center.im.is_finite()) {
                    return Err(Error::Config("disk centre is not finite".into()));
                }
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::Config(format!("disk radius {radius} is not a finite nonnegative number")));
                }
                if !(margin.is_finite() && *margin >= 0.0) {
                    return Err(Error::Config(format!("disk margin {margin} is invalid")));
                }
                Ok(())
            }
            Self::Scaled { factor, base } => {
                if factor.norm() == 0.0 || !factor.norm().is_finite() {
                    return Err(Error::Config(format!("scale factor {factor} must be finite and nonzero")));
                }
                base.validate()
            }
            Self::Complement(a) => a.validate(),
            Self::Difference(a, b) | Self::Intersection(a, b) | Self::Union(a, b) => {
                a.validate()?;
                b.validate()
            }
        }
    }

    pub fn membership(&self, z: Complex64) -> Membership {
        match self {
            Self::Plane => Membership::Inside,
            Self::Empty => Membership::Outside,
            Self::Disk { center, radius, margin } => {
                let r = (z - center).norm();
                if (r - radius).abs() <= *margin {
                    Membership::Uncertain
                } else if r < *radius {
                    Membership::Inside
                } else {
                    Membership::Outside
                }
            }
            Self::Scaled { factor, base } => base.membership(z / factor),
            Self::Pullback(pb) => pb.membership(z),
            Self::Complement(a) => !a.membership(z),
            Self::Difference(a, b) => {
                let ma = a.membership(z);
                if ma == Membership::Outside {
                    return ma;
                }
                ma.and(!b.membership(z))
            }
            Self::Intersection(a, b) => {
                let ma = a.membership(z);
                if ma == Membership::Outside {
                    return ma;
                }
                ma.and(b.membership(z))
            }
            Self::Union(a, b) => {
                let ma = a.membership(z);
                if ma == Membership::Inside {
                    return ma;
                }
                ma.or(b.membership(z))
            }
        }
    }

    #[inline]
    pub fn admits(&self, z: Complex64) -> bool {
        self.membership(z).admits()
    }

    /// True only for regions that are empty by construction.
    pub fn is_trivially_empty(&self) -> bool {
        match self {
            Self::Empty => true,
            Self::Disk { radius, .. } => *radius == 0.0,
            Self::Scaled { base, .. } => base.is_trivially_empty(),
            Self::Intersection(a, b) => a.is_trivially_empty() || b.is_trivially_empty(),
            Self::Difference(a, _) => a.is_trivially_empty(),
            Self::Union(a, b) => a.is_trivially_empty() && b.is_trivially_empty(),
            _ => false,
        }
    }
}

/// Validating membership query.
pub fn region_membership(r: &Region, z: Complex64) -> Result<Membership> {
    r.validate()?;
    Ok(r.membership(z))
}
