use serde::{Deserialize, Serialize};

use crate::dynamics::UnimodalQuadratic;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn matches(self, x: f64) -> bool {
        match self {
            Sign::Plus => x > 0.0,
            Sign::Minus => x < 0.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Period together with the required signs of `f^i(0)` for `1 <= i < p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinatoricsSpec {
    pub period: usize,
    pub pattern: Vec<Sign>,
}

impl CombinatoricsSpec {
    pub fn new(period: usize, pattern: Vec<Sign>) -> Result<Self> {
        if period < 2 {
            return Err(Error::Config(format!("period {period} must be at least 2")));
        }
        if pattern.len() != period - 1 {
            return Err(Error::Config(format!("pattern length {} differs from period - 1 = {}", pattern.len(), period - 1)));
        }
        Ok(Self { period, pattern })
    }

    /// `f(0) > 0` and `f^i(0) < 0` for `1 < i < p`.
    pub fn closest_to_chebyshev(period: usize) -> Result<Self> {
        let mut pattern = vec![Sign::Minus; period.saturating_sub(1)];
        if let Some(first) = pattern.first_mut() {
            *first = Sign::Plus;
        }
        Self::new(period, pattern)
    }

    /// Itinerary of the superattracting cycle of period `2^n` in the doubling cascade.
    pub fn period_doubling(n: u32) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::Range(format!("doubling level {n}")));
        }
        let mut pattern = vec![Sign::Plus];
        for level in 1..n {
            let middle = if level % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let mut next = pattern.clone();
            next.push(middle);
            next.extend_from_slice(&pattern);
            pattern = next;
        }
        Self::new(1 << n, pattern)
    }

    pub fn pattern_string(&self) -> String {
        self.pattern.iter().map(|s| s.symbol()).collect()
    }
}

/// Whether the critical orbit of `f` follows the sign pattern of `spec`.
pub fn itinerary_matches(f: &UnimodalQuadratic, spec: &CombinatoricsSpec) -> bool {
    let mut x = 0.0;
    for s in &spec.pattern {
        x = f.eval_real(x);
        if !s.matches(x) {
            return false;
        }
    }
    true
}

/// A located superattracting parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterRoot {
    pub c: f64,
    /// `|f_c^p(0)|` at the returned parameter.
    pub residual: f64,
    /// Width of the final bisection bracket.
    pub bracket_width: f64,
}

fn return_value(c: f64, spec: &CombinatoricsSpec) -> Option<f64> {
    let f = UnimodalQuadratic::new(c).ok()?;
    if !itinerary_matches(&f, spec) {
        return None;
    }
    Some(f.iterate_real(0.0, spec.period).0)
}

/// Bisection on a bracket `hi > lo` where `f^p(0)` changes sign and the itinerary holds at both ends.
fn bisect(spec: &CombinatoricsSpec, mut lo: f64, mut hi: f64, tol: f64) -> ParameterRoot {
    let mut v_lo = return_value(lo, spec).unwrap_or(f64::NAN);
    let v_hi = return_value(hi, spec).unwrap_or(f64::NAN);
    let mut best = if v_lo.abs() <= v_hi.abs() { (lo, v_lo.abs()) } else { (hi, v_hi.abs()) };
    for _ in 0..200 {
        if best.1 == 0.0 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let Some(v) = return_value(mid, spec) else { break };
        if v.abs() < best.1 {
            best = (mid, v.abs());
        }
        if v.abs() < tol * 1e-3 {
            break;
        }
        if (v > 0.0) == (v_lo > 0.0) {
            lo = mid;
            v_lo = v;
        } else {
            hi = mid;
        }
    }
    ParameterRoot { c: best.0, residual: best.1, bracket_width: hi - lo }
}

fn scan(spec: &CombinatoricsSpec, descending: &[f64], tol: f64) -> Option<ParameterRoot> {
    let mut prev: Option<(f64, f64)> = None;
    for &c in descending {
        let Some(v) = return_value(c, spec) else {
            prev = None;
            continue;
        };
        if v == 0.0 {
            return Some(ParameterRoot { c, residual: 0.0, bracket_width: 0.0 });
        }
        if let Some((c_hi, v_hi)) = prev {
            if (v > 0.0) != (v_hi > 0.0) {
                return Some(bisect(spec, c, c_hi, tol));
            }
        }
        prev = Some((c, v));
    }
    None
}

/// Largest parameter in `[1, 2)` with the given combinatorics.
///
/// The scan combines a uniform grid of step `1e-4` with a geometric grid in `2 - c`
/// so that parameters closer to 2 than the uniform step are still bracketed.
pub fn locate_superattracting_parameter(spec: &CombinatoricsSpec, tol: f64) -> Result<ParameterRoot> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance {tol} must be positive")));
    }
    let mut hs: Vec<f64> = Vec::new();
    let ratio = 4f64.powf(1.0 / 64.0);
    let mut h = 1e-15;
    while h < 1e-4 {
        hs.push(h);
        h *= ratio;
    }
    for i in 1..=10_000 {
        hs.push(i as f64 * 1e-4);
    }
    let cs: Vec<f64> = hs.into_iter().map(|h| 2.0 - h).collect();
    scan(spec, &cs, tol).ok_or(Error::NoBracket { period: spec.period })
}

pub fn find_superattracting_parameter(spec: &CombinatoricsSpec, tol: f64) -> Result<f64> {
    locate_superattracting_parameter(spec, tol).map(|r| r.c)
}

/// Largest parameter with the given combinatorics inside `(lo, hi)`, scanned on `steps` points.
pub fn find_superattracting_parameter_in(spec: &CombinatoricsSpec, lo: f64, hi: f64, steps: usize, tol: f64) -> Result<ParameterRoot> {
    if !(lo < hi) || steps < 2 {
        return Err(Error::Config(format!("bad scan window ({lo}, {hi}) with {steps} steps")));
    }
    let cs: Vec<f64> = (0..=steps).map(|i| hi - (hi - lo) * i as f64 / steps as f64).collect();
    scan(spec, &cs, tol).ok_or(Error::NoBracket { period: spec.period })
}
