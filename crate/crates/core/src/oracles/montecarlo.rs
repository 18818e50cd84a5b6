use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::Membership;
use crate::oracles::escape::default_escape_radius;
use crate::renorm::DomainSystem;
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Smallest radius of `V^k` accepted by the sampler.
const MIN_SCALE: f64 = 1e-10;

/// Rejection attempts per sample before giving up on a region.
const MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeFraction {
    pub period: usize,
    pub c: f64,
    pub rho: f64,
    pub k: usize,
    pub samples: usize,
    pub budget: usize,
    pub seed: u64,
    /// Samples whose orbit enters `V^k` within the budget.
    pub hits: usize,
    /// Samples whose orbit leaves the escape disk first.
    pub escaped: usize,
    /// Samples with neither outcome within the budget.
    pub unresolved: usize,
    /// `hits / samples`, a lower estimate of the area fraction.
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Share of unresolved samples, the allowance for budget truncation.
    pub truncation_allowance: f64,
}

impl EscapeFraction {
    /// `fraction <= bound + interval half-width + truncation allowance`.
    pub fn consistent_with(&self, bound: f64) -> bool {
        self.fraction <= bound + (self.ci_high - self.fraction) + self.truncation_allowance
    }
}

/// Wilson score interval for `hits` successes in `n` trials at 95% confidence.
pub fn wilson_interval(hits: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Copy)]
enum Fate {
    Hit,
    Escaped,
    Unresolved,
}

/// Fraction of `A^k` whose forward orbit enters `V^k` within `budget` steps.
///
/// Sample `i` is drawn by rejection from the disk `V^k` using a ChaCha8 stream
/// keyed by `(seed, i)`, so results do not depend on scheduling. Hits with a
/// given budget remain hits with any larger budget, so the fraction is
/// nondecreasing in the budget.
pub fn escape_fraction_mc(ds: &DomainSystem, k: usize, samples: usize, budget: usize, seed: u64) -> Result<EscapeFraction> {
    if samples == 0 {
        return Err(Error::Config("sample count must be positive".into()));
    }
    let radius = ds.v_radius() * ds.lambda().abs().powi(k as i32);
    if !(radius >= MIN_SCALE) {
        return Err(Error::Range(format!("scale level k = {k} (radius of V^k is {radius:e})")));
    }
    let f = *ds.map();
    let a_k = ds.a_k(k);
    let r2 = radius * radius;
    let esc = default_escape_radius(f.c()).max(1.01 * ds.v_radius());
    let esc2 = esc * esc;

    let fates: Vec<Fate> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut z = None;
            for _ in 0..MAX_ATTEMPTS {
                let r = radius * rng.random::<f64>().sqrt();
                let w = Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>());
                if a_k.membership(w) == Membership::Inside {
                    z = Some(w);
                    break;
                }
            }
            let Some(mut z) = z else { return Err(Error::Config(format!("A^{k} rejected {MAX_ATTEMPTS} draws"))) };
            for _ in 0..budget {
                z = f.eval(z);
                if z.norm_sqr() < r2 {
                    return Ok(Fate::Hit);
                }
                if z.norm_sqr() > esc2 {
                    return Ok(Fate::Escaped);
                }
            }
            Ok(Fate::Unresolved)
        })
        .collect::<Result<_>>()?;

    let hits = fates.iter().filter(|f| matches!(f, Fate::Hit)).count();
    let escaped = fates.iter().filter(|f| matches!(f, Fate::Escaped)).count();
    let unresolved = samples - hits - escaped;
    let (ci_low, ci_high) = wilson_interval(hits, samples);
    Ok(EscapeFraction {
        period: ds.period(),
        c: f.c(),
        rho: ds.rho(),
        k,
        samples,
        budget,
        seed,
        hits,
        escaped,
        unresolved,
        fraction: hits as f64 / samples as f64,
        ci_low,
        ci_high,
        truncation_allowance: unresolved as f64 / samples as f64,
    })
}

/// Fraction table as CSV.
pub fn fraction_csv(rows: &[EscapeFraction]) -> String {
    let mut out = String::from("k,budget,samples,hits,escaped,unresolved,fraction,ci_low,ci_high\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:e},{:e},{:e}\n",
            r.k, r.budget, r.samples, r.hits, r.escaped, r.unresolved, r.fraction, r.ci_low, r.ci_high
        ));
    }
    out
}
