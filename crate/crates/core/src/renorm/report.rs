use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::UnimodalQuadratic;
use crate::renorm::{build_domain_system, find_superattracting_parameter, CombinatoricsSpec};
use crate::{Error, Result};

/// One row of the per-period geometry table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaClassRow {
    pub p: usize,
    pub c_p: f64,
    pub f0: f64,
    pub alpha: f64,
    pub eta: f64,
    pub lambda_abs: f64,
    pub diam_u_prime: f64,
    pub s1_length: f64,
    pub modulus_proxy: f64,
    pub return_time: Option<usize>,
}

impl LemmaClassRow {
    pub const CSV_HEADER: &'static str = "p,c_p,f0,alpha,eta,lambda_abs,diam_u_prime,s1_length,modulus_proxy,return_time";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.p,
            self.c_p,
            self.f0,
            self.alpha,
            self.eta,
            self.lambda_abs,
            self.diam_u_prime,
            self.s1_length,
            self.modulus_proxy,
            self.return_time.map(|m| m.to_string()).unwrap_or_default()
        )
    }
}

/// First point beyond `x0` in direction `dir` where `|f^n(x)| >= bound`.
fn exit_point(f: &UnimodalQuadratic, x0: f64, dir: f64, n: usize, bound: f64) -> f64 {
    let inside = |x: f64| f.iterate_real(x, n).0.abs() < bound;
    let mut lo = 0.0;
    let mut hi = 1e-15;
    while inside(x0 + dir * hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 8.0 {
            return x0 + dir * hi;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(x0 + dir * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    x0 + dir * 0.5 * (lo + hi)
}

/// Length of the component of `f^{-(p-1)}(-alpha, alpha)` on the real line containing `f(0)`.
pub(crate) fn s1_length(f: &UnimodalQuadratic, p: usize, alpha: f64) -> f64 {
    let c = f.c();
    exit_point(f, c, 1.0, p - 1, alpha) - exit_point(f, c, -1.0, p - 1, alpha)
}

pub fn lemma_class_report(p_lo: usize, p_hi: usize, rho: f64) -> Result<Vec<LemmaClassRow>> {
    if p_lo < 3 || p_hi > 16 || p_lo > p_hi {
        return Err(Error::Range(format!("period range {p_lo}..={p_hi} (must lie in [3, 16])")));
    }
    (p_lo..=p_hi)
        .into_par_iter()
        .map(|p| {
            let spec = CombinatoricsSpec::closest_to_chebyshev(p)?;
            let c = find_superattracting_parameter(&spec, 1e-12)?;
            let f = UnimodalQuadratic::new(c)?;
            let fp = f.fixed_points()?;
            let ds = build_domain_system(&f, p, rho)?;
            let diam = ds.u_prime_diameter();
            Ok(LemmaClassRow {
                p,
                c_p: c,
                f0: f.eval_real(0.0),
                alpha: fp.alpha.point,
                eta: fp.beta.multiplier,
                lambda_abs: ds.lambda().abs(),
                diam_u_prime: diam,
                s1_length: s1_length(&f, p, fp.alpha.point),
                modulus_proxy: (rho / (ds.lambda().abs() * diam)).ln(),
                return_time: ds.return_time(),
            })
        })
        .collect()
}

pub fn lemma_class_csv(rows: &[LemmaClassRow]) -> String {
    let mut out = String::from(LemmaClassRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}
