use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Region, UnimodalQuadratic};
use crate::renorm::{build_domain_system, find_superattracting_parameter, CombinatoricsSpec};
use crate::series::{measure_expansion_profile, ProfileRequest, TerminalGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Radius of `V'` for the domain system providing `U'` and `A'`.
    pub rho: f64,
    /// Outer radius of the circles; defaults to `rho`.
    pub outer_radius: Option<f64>,
    pub circles: usize,
    pub per_circle: usize,
    pub annulus_samples: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { rho: 0.1, outer_radius: None, circles: 16, per_circle: 64, annulus_samples: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSweepReport {
    pub p: usize,
    pub c: f64,
    pub kappa: f64,
    pub eps: f64,
    pub rho: f64,
    pub u_prime_diameter: f64,
    /// `min |y|^{2-kappa} / |f(y) - 2|` over the circles.
    pub critical_value_ratio: f64,
    pub critical_value_worst: Complex64,
    pub critical_value_pass: bool,
    /// `min |Df^m(y)| / (2 - eps)^m` over the samples of `A'`.
    pub escape_ratio: f64,
    pub escape_worst: Complex64,
    pub escape_worst_m: usize,
    pub escape_samples: usize,
    pub escape_pass: bool,
}

impl LemmaSweepReport {
    /// Margin of the critical-value inequality, `ratio - 1`.
    pub fn critical_value_margin(&self) -> f64 {
        self.critical_value_ratio - 1.0
    }

    /// Margin of the escape expansion inequality, `ratio - 1`.
    pub fn escape_margin(&self) -> f64 {
        self.escape_ratio - 1.0
    }
}

/// Checks `|f(y) - 2| <= |y|^{2-kappa}` on circles between `diam U'` and the
/// outer radius, and `|Df^m(y)| >= (2 - eps)^m` on samples of `A'`, where `m`
/// is the first `m >= 2` with `|f^m(y) + 2| > 1/10`.
pub fn expansion_lemma_sweep(p: usize, kappa: f64, eps: f64, options: &SweepOptions) -> Result<LemmaSweepReport> {
    if !(3..=14).contains(&p) {
        return Err(Error::Range(format!("period {p} in 64-bit mode (supported: 3..=14)")));
    }
    if !(kappa > 0.0 && kappa < 0.5) {
        return Err(Error::Config(format!("kappa = {kappa} must lie in (0, 1/2)")));
    }
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::Config(format!("eps = {eps} must lie in (0, 2)")));
    }
    let c = find_superattracting_parameter(&CombinatoricsSpec::closest_to_chebyshev(p)?, 1e-12)?;
    let f = UnimodalQuadratic::new(c)?;
    let ds = build_domain_system(&f, p, options.rho)?;
    let diam = ds.u_prime_diameter();
    let outer = options.outer_radius.unwrap_or(options.rho);
    if !(outer > diam) {
        return Err(Error::Config(format!("outer radius {outer} must exceed diam U' = {diam}")));
    }

    let two = Complex64::new(2.0, 0.0);
    let mut cv = (f64::INFINITY, Complex64::new(0.0, 0.0));
    let circles = options.circles.max(1);
    for i in 0..circles {
        let r = if circles == 1 { diam } else { diam * (outer / diam).powf(i as f64 / (circles - 1) as f64) };
        for k in 0..options.per_circle.max(1) {
            let y = Complex64::from_polar(r, 2.0 * PI * k as f64 / options.per_circle.max(1) as f64);
            let ratio = r.powf(2.0 - kappa) / (f.eval(y) - two).norm();
            if ratio < cv.0 {
                cv = (ratio, y);
            }
        }
    }

    let (r0, _) = ds.u_prime_radii();
    let rho = options.rho;
    let g1 = 0.754_877_666_246_692_8;
    let g2 = 0.569_840_290_998_053_3;
    let mut esc = (f64::INFINITY, Complex64::new(0.0, 0.0), 0usize);
    let mut taken = 0usize;
    let mut i = 0usize;
    while taken < options.annulus_samples && i < 1000 * options.annulus_samples.max(1) {
        i += 1;
        let s = (i as f64 * g1).fract();
        let t = (i as f64 * g2).fract();
        let r = (r0 * r0 + s * (rho * rho - r0 * r0)).sqrt();
        let y = Complex64::from_polar(r, 2.0 * PI * t);
        if ds.a_prime().membership(y) != crate::dynamics::Membership::Inside {
            continue;
        }
        taken += 1;
        let mut x = y;
        let mut d = 1.0f64;
        for m in 1..=20 * p {
            d *= 2.0 * x.norm();
            x = f.eval(x);
            if m >= 2 && (x + two).norm() > 0.1 {
                let ratio = d / (2.0 - eps).powi(m as i32);
                if ratio < esc.0 {
                    esc = (ratio, y, m);
                }
                break;
            }
        }
    }
    Ok(LemmaSweepReport {
        p,
        c,
        kappa,
        eps,
        rho: options.rho,
        u_prime_diameter: diam,
        critical_value_ratio: cv.0,
        critical_value_worst: cv.1,
        critical_value_pass: cv.0 > 1.0,
        escape_ratio: esc.0,
        escape_worst: esc.1,
        escape_worst_m: esc.2,
        escape_samples: taken,
        escape_pass: taken > 0 && esc.0 >= 1.0,
    })
}

/// Expansion profile of the Chebyshev map away from the critical point, at a
/// range of depths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevExpansionReport {
    pub depths: Vec<usize>,
    pub k_est: Vec<f64>,
    pub eps_est: Vec<f64>,
    /// Largest relative deviation of `K_est` from its value at the deepest depth.
    pub k_spread: f64,
    pub stable: bool,
}

/// Profiles `Ch` on orbits avoiding `D(0, guard)` and ending in `D(0, 1.5)`
/// (distance at least 1/2 from `±2`).
pub fn chebyshev_expansion_check(depths: &[usize], guard: f64, terminals: usize) -> Result<ChebyshevExpansionReport> {
    let f = UnimodalQuadratic::chebyshev();
    let via = Region::disk(Complex64::new(0.0, 0.0), guard).complement();
    let side = (terminals as f64).sqrt().ceil() as usize * 2;
    let grid = TerminalGrid::square(1.5, side).filtered(&Region::disk(Complex64::new(0.0, 0.0), 1.5));
    let mut k_est = Vec::new();
    let mut eps_est = Vec::new();
    for &depth in depths {
        let req = ProfileRequest {
            via: &via,
            sources: &via,
            terminals: &grid,
            depth,
            samples: terminals,
            guard_radius: guard * 0.999,
            require_expansion: true,
        };
        let prof = measure_expansion_profile(&f, &req)?;
        k_est.push(prof.k_est);
        eps_est.push(prof.eps_est);
    }
    let reference = *k_est.last().ok_or_else(|| Error::Config("no depths requested".into()))?;
    let k_spread = k_est.iter().map(|k| (k / reference - 1.0).abs()).fold(0.0, f64::max);
    Ok(ChebyshevExpansionReport { depths: depths.to_vec(), k_est, eps_est: eps_est.clone(), k_spread, stable: k_spread <= 0.1 })
}
