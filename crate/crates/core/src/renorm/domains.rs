use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Region, TrackedPullback, UnimodalQuadratic};
use crate::renorm::scaling_factor_estimate;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DomainOptions {
    /// Branch-tracking tube, as a fraction of `|f^i(0)|`.
    pub tube: f64,
    /// Rays used to measure the boundary of `U'`.
    pub rays: usize,
    /// Sample points of `A'` used for the minimal return time.
    pub return_samples: usize,
    /// Forward iteration budget for return times.
    pub return_budget: usize,
}

impl Default for DomainOptions {
    fn default() -> Self {
        Self { tube: 0.5, rays: 64, return_samples: 65_536, return_budget: 1000 }
    }
}

/// Nested regions `U' ⊂ V' ⊂ U ⊂ V` for the polynomial proxy at a given period.
#[derive(Debug, Clone)]
pub struct DomainSystem {
    map: UnimodalQuadratic,
    period: usize,
    rho: f64,
    lambda: f64,
    options: DomainOptions,
    pullback: Arc<TrackedPullback>,
    u_prime: Region,
    v_prime: Region,
    u: Region,
    v: Region,
    a: Region,
    a_prime: Region,
    radius_min: f64,
    radius_max: f64,
    diameter: f64,
    nesting_margin: f64,
    clearance_margin: f64,
    return_time: Option<usize>,
    first_return: bool,
    postcritical_clearance: bool,
}

/// Serializable description of a domain system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSummary {
    pub period: usize,
    pub c: f64,
    pub rho: f64,
    pub lambda: f64,
    pub u_prime_radius_min: f64,
    pub u_prime_radius_max: f64,
    pub u_prime_diameter: f64,
    pub u_radius_min: f64,
    pub v_radius: f64,
    pub nesting_margin: f64,
    pub clearance_margin: f64,
    pub return_time: Option<usize>,
    pub first_return: bool,
    pub postcritical_clearance: bool,
}

pub fn build_domain_system(f: &UnimodalQuadratic, p: usize, rho: f64) -> Result<DomainSystem> {
    build_domain_system_with(f, p, rho, &DomainOptions::default())
}

pub fn build_domain_system_with(f: &UnimodalQuadratic, p: usize, rho: f64, options: &DomainOptions) -> Result<DomainSystem> {
    if p < 3 {
        return Err(Error::Range(format!("period {p} (need p >= 3)")));
    }
    if !(rho > 0.0 && rho <= 0.1) {
        return Err(Error::Range(format!("rho = {rho} (need 0 < rho <= 1/10)")));
    }
    let lambda = scaling_factor_estimate(f, p)?;
    let pb = Arc::new(TrackedPullback::new(*f, p, rho, options.tube)?);
    let u_prime = Region::Pullback(pb.clone());
    let v_prime = Region::disk(Complex64::new(0.0, 0.0), rho);
    let u = Region::scaled(Complex64::new(1.0 / lambda, 0.0), u_prime.clone());
    let v = Region::disk(Complex64::new(0.0, 0.0), rho / lambda.abs());
    let a = v.clone().minus(u.clone());
    let a_prime = v_prime.clone().minus(u_prime.clone());

    let rays = options.rays.max(8);
    let radii: Vec<f64> = (0..rays).map(|i| pb.radius_along(2.0 * PI * i as f64 / rays as f64)).collect();
    let radius_min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let radius_max = radii.iter().cloned().fold(0.0, f64::max);
    let diameter = if rays.is_multiple_of(2) { (0..rays / 2).map(|i| radii[i] + radii[i + rays / 2]).fold(0.0, f64::max) } else { 2.0 * radius_max };

    let mut ds = DomainSystem {
        map: *f,
        period: p,
        rho,
        lambda,
        options: *options,
        pullback: pb,
        u_prime,
        v_prime,
        u,
        v,
        a,
        a_prime,
        radius_min,
        radius_max,
        diameter,
        nesting_margin: 0.0,
        clearance_margin: 0.0,
        return_time: None,
        first_return: false,
        postcritical_clearance: false,
    };
    ds.check_nesting(&radii)?;
    ds.check_first_return()?;
    ds.check_clearance()?;
    ds.return_time = ds.return_time_scan(options.return_samples, options.return_budget).ok();
    Ok(ds)
}

impl DomainSystem {
    fn check_nesting(&mut self, radii: &[f64]) -> Result<()> {
        let rays = radii.len();
        // U' ⊂ V': the boundary of U' along each ray lies inside V'.
        for (i, &r) in radii.iter().enumerate() {
            let z = Complex64::from_polar(r, 2.0 * PI * i as f64 / rays as f64);
            if !(r < self.rho) || self.v_prime.membership(z) != crate::dynamics::Membership::Inside {
                return Err(Error::NestingViolation { what: "U' not inside V'".into(), point: z });
            }
        }
        // V' ⊂ U: every point of the circle |z| = rho lies in U.
        for i in 0..4 * rays {
            let z = Complex64::from_polar(self.rho, 2.0 * PI * i as f64 / (4 * rays) as f64);
            if self.u.membership(z) != crate::dynamics::Membership::Inside {
                return Err(Error::NestingViolation { what: "V' not inside U".into(), point: z });
            }
        }
        // U ⊂ V is U' ⊂ V' rescaled; V' ⊂ U additionally needs the rescaled U' radius to exceed rho.
        self.nesting_margin = self.radius_min / self.lambda.abs() - self.rho;
        if !(self.nesting_margin > 0.0) {
            return Err(Error::NestingViolation { what: "V' not inside U".into(), point: Complex64::new(self.rho, 0.0) });
        }
        Ok(())
    }

    fn check_first_return(&mut self) -> Result<()> {
        for z in self.u_prime_samples(12, 24) {
            let mut w = z;
            for k in 1..=self.period {
                w = self.map.eval(w);
                let inside = self.v_prime.admits(w);
                if k < self.period && inside {
                    return Err(Error::FirstReturnViolation { point: z, time: k, expected: self.period });
                }
                if k == self.period && !inside {
                    return Err(Error::FirstReturnViolation { point: z, time: 0, expected: self.period });
                }
            }
        }
        self.first_return = true;
        Ok(())
    }

    fn check_clearance(&mut self) -> Result<()> {
        let mut margin = f64::INFINITY;
        let mut x = Complex64::new(0.0, 0.0);
        for step in 1..=10 * self.period {
            x = self.map.eval(x);
            let r = x.norm();
            let m = if r > self.rho {
                r - self.rho
            } else if self.u_prime.membership(x) == crate::dynamics::Membership::Inside {
                self.radius_min - r
            } else {
                -1.0
            };
            if !(m > 0.0) {
                return Err(Error::PostcriticalCollision { point: x, step });
            }
            margin = margin.min(m);
        }
        self.clearance_margin = margin;
        self.postcritical_clearance = true;
        Ok(())
    }

    /// Points of `U'` on a polar grid inside the measured maximal radius.
    pub fn u_prime_samples(&self, radial: usize, angular: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0)];
        for i in 1..=radial {
            let r = self.radius_max * i as f64 / radial as f64;
            for j in 0..angular {
                let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / angular as f64);
                if self.u_prime.membership(z) == crate::dynamics::Membership::Inside {
                    out.push(z);
                }
            }
        }
        out
    }

    /// Least `k >= 1` with `f^k(x) ∈ V'` over a polar sample of `A'`.
    pub fn return_time_scan(&self, samples: usize, budget: usize) -> Result<usize> {
        if samples == 0 {
            return Err(Error::Config("return-time sample count must be positive".into()));
        }
        let angular = ((samples as f64).sqrt().ceil() as usize).max(2);
        let radial = samples.div_ceil(angular).max(1);
        let (r0, r1) = (self.radius_min, self.rho);
        let mut best: Option<usize> = None;
        for i in 0..radial {
            let r = r0 * (r1 / r0).powf((i as f64 + 0.5) / radial as f64);
            for j in 0..angular {
                let z = Complex64::from_polar(r, PI * (j as f64 + 0.5) / angular as f64);
                if !self.a_prime.admits(z) {
                    continue;
                }
                let cap = best.unwrap_or(budget);
                let mut w = z;
                for k in 1..=cap {
                    w = self.map.eval(w);
                    if w.norm_sqr() > 16.0 {
                        break;
                    }
                    if self.v_prime.admits(w) {
                        best = Some(best.map_or(k, |b| b.min(k)));
                        break;
                    }
                }
            }
        }
        best.ok_or(Error::NoReturn { budget })
    }

    pub fn map(&self) -> &UnimodalQuadratic {
        &self.map
    }
    pub fn period(&self) -> usize {
        self.period
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn options(&self) -> &DomainOptions {
        &self.options
    }
    pub fn pullback(&self) -> &TrackedPullback {
        &self.pullback
    }
    pub fn u_prime(&self) -> &Region {
        &self.u_prime
    }
    pub fn v_prime(&self) -> &Region {
        &self.v_prime
    }
    pub fn u(&self) -> &Region {
        &self.u
    }
    pub fn v(&self) -> &Region {
        &self.v
    }
    pub fn a(&self) -> &Region {
        &self.a
    }
    pub fn a_prime(&self) -> &Region {
        &self.a_prime
    }
    /// Smallest and largest measured radius of `U'`.
    pub fn u_prime_radii(&self) -> (f64, f64) {
        (self.radius_min, self.radius_max)
    }
    pub fn u_prime_diameter(&self) -> f64 {
        self.diameter
    }
    pub fn v_radius(&self) -> f64 {
        self.rho / self.lambda.abs()
    }
    pub fn return_time(&self) -> Option<usize> {
        self.return_time
    }
    pub fn first_return(&self) -> bool {
        self.first_return
    }
    pub fn postcritical_clearance(&self) -> bool {
        self.postcritical_clearance
    }
    pub fn nesting_margin(&self) -> f64 {
        self.nesting_margin
    }

    /// `f^i(0)` for `1 <= i < p`: the postcritical points outside `V'`.
    pub fn postcritical_outside(&self) -> Vec<Complex64> {
        self.map.critical_orbit(self.period - 1).into_iter().map(|x| Complex64::new(x, 0.0)).collect()
    }

    fn lambda_pow(&self, k: usize) -> Complex64 {
        Complex64::new(self.lambda.powi(k as i32), 0.0)
    }

    /// `U^k = lambda^k U`.
    pub fn u_k(&self, k: usize) -> Region {
        Region::scaled(self.lambda_pow(k), self.u.clone())
    }
    /// `V^k = lambda^k V`.
    pub fn v_k(&self, k: usize) -> Region {
        Region::disk(Complex64::new(0.0, 0.0), self.v_radius() * self.lambda.abs().powi(k as i32))
    }
    /// `A^k = V^k ∖ U^k`.
    pub fn a_k(&self, k: usize) -> Region {
        self.v_k(k).minus(self.u_k(k))
    }
    /// `B^k = U ∖ (A^k ∪ V^{k+1})`.
    pub fn b_k(&self, k: usize) -> Region {
        self.u.clone().minus(self.a_k(k).union(self.v_k(k + 1)))
    }

    /// Looks up a named region: `U`, `V`, `U'`, `V'`, `A`, `A'`, `C` (plane) or `0` (empty).
    pub fn named(&self, name: &str) -> Option<Region> {
        Some(match name {
            "U" => self.u.clone(),
            "V" => self.v.clone(),
            "U'" => self.u_prime.clone(),
            "V'" => self.v_prime.clone(),
            "A" => self.a.clone(),
            "A'" => self.a_prime.clone(),
            "C" => Region::Plane,
            "0" => Region::Empty,
            _ => return None,
        })
    }

    pub fn summary(&self) -> DomainSummary {
        DomainSummary {
            period: self.period,
            c: self.map.c(),
            rho: self.rho,
            lambda: self.lambda,
            u_prime_radius_min: self.radius_min,
            u_prime_radius_max: self.radius_max,
            u_prime_diameter: self.diameter,
            u_radius_min: self.radius_min / self.lambda.abs(),
            v_radius: self.v_radius(),
            nesting_margin: self.nesting_margin,
            clearance_margin: self.clearance_margin,
            return_time: self.return_time,
            first_return: self.first_return,
            postcritical_clearance: self.postcritical_clearance,
        }
    }
}
