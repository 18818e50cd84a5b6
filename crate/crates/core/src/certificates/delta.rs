use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certificates::context::{SRC_A_PRIME_PLUS, SRC_OUTER, SRC_S};
use crate::certificates::{BaseSups, CertBudgets, CertContext, ProfileSummary, QuadraticRecursion, RecursionMode, TargetKind};
use crate::report::nonfinite_as_null;
use crate::series::{rescaling_residual, BijectionReport, SeriesBound};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DeltaStatus {
    Certified,
    NoFixedPoint,
    InputDivergent,
    /// A constituent computation failed; see `error`.
    Error,
}

impl std::fmt::Display for DeltaStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Certified => "CERTIFIED",
            Self::NoFixedPoint => "NO_FIXED_POINT",
            Self::InputDivergent => "INPUT_DIVERGENT",
            Self::Error => "ERROR",
        })
    }
}

/// Numeric certificate for `delta_cr(f_{c_p}) <= delta`.
///
/// The sups are sampled on grids and the expansion constants are measured, so
/// this is a floating-point certificate under the recorded assumptions, not a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaCertificate {
    pub kind: String,
    pub tool_version: String,
    pub period: usize,
    pub c: f64,
    pub rho: f64,
    pub delta: f64,
    pub mode: RecursionMode,
    pub status: DeltaStatus,
    #[serde(with = "nonfinite_as_null")]
    pub alpha: f64,
    #[serde(with = "nonfinite_as_null")]
    pub beta: f64,
    #[serde(with = "nonfinite_as_null")]
    pub gamma: f64,
    pub fixed_point: Option<f64>,
    pub iterate_trace: Vec<f64>,
    /// `beta < 1/3` and `P([0, 2 P(0)]) ⊂ [0, 2 P(0)]`.
    pub invariant_interval: bool,
    /// Relative residual of the rescaling bijection under the polynomial proxy.
    pub residual: Option<f64>,
    pub bijection: Option<BijectionReport>,
    pub inputs: Vec<SeriesBound>,
    pub profiles: Vec<ProfileSummary>,
    pub pruning_note: Option<String>,
    pub config: CertBudgets,
    pub error: Option<String>,
}

impl DeltaCertificate {
    fn empty(ctx: &CertContext, delta: f64) -> Self {
        Self {
            kind: "numeric".into(),
            tool_version: crate::VERSION.into(),
            period: ctx.p,
            c: ctx.map.c(),
            rho: ctx.rho,
            delta,
            mode: ctx.budgets.mode,
            status: DeltaStatus::Error,
            alpha: f64::INFINITY,
            beta: f64::INFINITY,
            gamma: f64::INFINITY,
            fixed_point: None,
            iterate_trace: Vec::new(),
            invariant_interval: false,
            residual: None,
            bijection: None,
            inputs: Vec::new(),
            profiles: ctx.profile_summaries(),
            pruning_note: ctx.prune_note.clone(),
            config: ctx.budgets,
            error: None,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.status == DeltaStatus::Certified
    }

    pub fn recursion(&self) -> Option<QuadraticRecursion> {
        let ub: Vec<f64> = self.inputs.iter().map(|b| b.upper_bound).collect();
        (ub.len() == 6).then(|| QuadraticRecursion::new(self.delta, BaseSups { a1: ub[0], a2: ub[1], a3: ub[2], b1: ub[3], b2: ub[4], b3: ub[5] }))
    }

    /// Plain-text rendering for terminals and logs.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "delta certificate ({}), version {}", self.kind, self.tool_version);
        let _ = writeln!(s, "  p = {}, c = {:.16}, rho = {}, delta = {}, mode = {:?}", self.period, self.c, self.rho, self.delta, self.mode);
        let _ = writeln!(s, "  status: {}", self.status);
        if let Some(e) = &self.error {
            let _ = writeln!(s, "  error: {e}");
        }
        for b in &self.inputs {
            let _ = writeln!(
                s,
                "  {:<22} estimate {:.6e}  upper {:.6e}  tail {:.2e}  pruned {:.2e}",
                b.family, b.point_estimate, b.upper_bound, b.tail_bound, b.pruned_mass
            );
        }
        let _ = writeln!(s, "  alpha = {:.6}, beta = {:.6}, gamma = {:.6e}", self.alpha, self.beta, self.gamma);
        match self.fixed_point {
            Some(v) => {
                let _ = writeln!(s, "  fixed point s = {v:.9}");
            }
            None => {
                let _ = writeln!(s, "  no positive fixed point");
            }
        }
        let _ = writeln!(s, "  beta < 1/3 with P([0, 2P(0)]) inside itself: {}", self.invariant_interval);
        if let Some(r) = self.residual {
            let _ = writeln!(s, "  rescaling residual: {r:.3e}");
        }
        for p in &self.profiles {
            let _ = writeln!(s, "  profile {:<8} K = {:.4}, eps = {:.4}, depth {}, {} samples", p.role, p.k_est, p.eps_est, p.depth, p.sample_count);
        }
        s
    }
}

/// Labels of the six base families, in `a1, a2, a3, b1, b2, b3` order.
pub const BASE_FAMILIES: [&str; 6] =
    ["A'<-[U\\V']-U\\V'", "A<-[U\\V']-U\\V'", "U'<-[U\\V']-U\\V'", "A'<-[U\\V']-+A'", "A<-[U\\V']-A'", "U'<-[U\\V']-A'"];

const PAPER_FAMILIES: [&str; 6] =
    ["V'<-[U\\V']-U\\V'", "A<-[U\\V']-U\\V'", "V'<-[U\\V']-U\\V'", "V'<-[U\\V']-+A'", "A<-[U\\V']-U\\U'", "V'<-[U\\V']-+A'"];

fn base_bounds(ctx: &CertContext, delta: f64) -> Result<Vec<SeriesBound>> {
    let table = ctx.evaluate(delta)?;
    let spec: [(TargetKind, usize); 6] = match ctx.budgets.mode {
        RecursionMode::Direct => [
            (TargetKind::APrime, SRC_S),
            (TargetKind::A, SRC_S),
            (TargetKind::UPrime, SRC_S),
            (TargetKind::APrime, SRC_A_PRIME_PLUS),
            (TargetKind::A, SRC_A_PRIME_PLUS),
            (TargetKind::UPrime, SRC_A_PRIME_PLUS),
        ],
        RecursionMode::PaperInequality => [
            (TargetKind::VPrime, SRC_S),
            (TargetKind::A, SRC_S),
            (TargetKind::VPrime, SRC_S),
            (TargetKind::VPrime, SRC_A_PRIME_PLUS),
            (TargetKind::A, SRC_OUTER),
            (TargetKind::VPrime, SRC_A_PRIME_PLUS),
        ],
    };
    let labels = match ctx.budgets.mode {
        RecursionMode::Direct => BASE_FAMILIES,
        RecursionMode::PaperInequality => PAPER_FAMILIES,
    };
    spec.iter().zip(labels).map(|(&(t, s), label)| ctx.bound(&table, t, s, label)).collect()
}

/// Certifies `delta` with a prepared context.
pub fn certify_delta_with(ctx: &CertContext, delta: f64) -> Result<DeltaCertificate> {
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(Error::Range(format!("delta = {delta} (need 0 < delta <= 2)")));
    }
    let mut cert = DeltaCertificate::empty(ctx, delta);
    // Every sup is at least its tail bound, and the coefficients increase with
    // each sup, so the tails alone can already rule out a fixed point.
    if let Ok((tv, ta)) = ctx.tails(delta) {
        let floor = QuadraticRecursion::new(delta, BaseSups { a1: tv, a2: ta, a3: tv, b1: tv, b2: ta, b3: tv });
        if floor.fixed_point().s.is_none() {
            cert.status = DeltaStatus::NoFixedPoint;
            cert.alpha = floor.alpha;
            cert.beta = floor.beta;
            cert.gamma = floor.gamma;
            cert.error = Some(format!("tail bounds alone give beta >= {:.4} with no positive fixed point", floor.beta));
            return Ok(cert);
        }
    }
    let inputs = match base_bounds(ctx, delta) {
        Ok(v) => v,
        Err(Error::DivergentTail { ratio }) => {
            cert.status = DeltaStatus::InputDivergent;
            cert.error = Some(format!("tail ratio {ratio} >= 1"));
            return Ok(cert);
        }
        Err(e) => {
            cert.error = Some(e.to_string());
            return Ok(cert);
        }
    };
    cert.inputs = inputs;
    let q = cert.recursion().expect("six inputs");
    cert.alpha = q.alpha;
    cert.beta = q.beta;
    cert.gamma = q.gamma;
    cert.invariant_interval = q.invariant_interval();
    let bij_point = Complex64::new(1.5 * ctx.ds.u_prime_radii().1 / ctx.ds.lambda().abs(), 0.0);
    match rescaling_residual(&ctx.ds, bij_point, delta, ctx.budgets.bijection_j) {
        Ok(b) => {
            cert.residual = Some(b.relative_residual);
            cert.bijection = Some(b);
        }
        Err(e) => cert.error = Some(format!("rescaling residual: {e}")),
    }
    if !q.sups.all_finite() {
        cert.status = DeltaStatus::InputDivergent;
        return Ok(cert);
    }
    let sol = q.fixed_point();
    cert.iterate_trace = sol.trace;
    cert.fixed_point = sol.s;
    cert.status = match sol.s {
        Some(s) if s > 0.0 => DeltaStatus::Certified,
        _ => DeltaStatus::NoFixedPoint,
    };
    Ok(cert)
}

/// Builds the context for `(p, rho)` at `c_p` and certifies `delta`.
pub fn certify_delta(p: usize, rho: f64, delta: f64, budgets: &CertBudgets) -> Result<DeltaCertificate> {
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(Error::Range(format!("delta = {delta} (need 0 < delta <= 2)")));
    }
    let ctx = CertContext::build(p, rho, *budgets)?;
    certify_delta_with(&ctx, delta)
}

/// Result of a bisection in `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaBisection {
    pub period: usize,
    pub rho: f64,
    pub delta_star: f64,
    pub tolerance: f64,
    /// Certificate at `delta_star`.
    pub certificate: DeltaCertificate,
    /// Every `(delta, status)` tried, in order.
    pub chain: Vec<(f64, DeltaStatus)>,
}

/// Smallest certified `delta` in `range`, to within `tol`, reusing one context.
pub fn bisect_delta_with(ctx: &CertContext, range: (f64, f64), tol: f64) -> Result<DeltaBisection> {
    let (lo0, hi0) = range;
    if !(lo0 >= 1.0 && lo0 < hi0 && hi0 <= 2.0 && tol > 0.0) {
        return Err(Error::Range(format!("delta range ({lo0}, {hi0}) must lie in [1, 2] with tol > 0")));
    }
    let mut chain = Vec::new();
    let mut best = certify_delta_with(ctx, hi0)?;
    chain.push((hi0, best.status));
    if !best.is_certified() {
        return Err(Error::UncertifiableRange);
    }
    let (mut lo, mut hi) = (lo0, hi0);
    if lo0 > 1.0 {
        let at_lo = certify_delta_with(ctx, lo0)?;
        chain.push((lo0, at_lo.status));
        if at_lo.is_certified() {
            return Ok(DeltaBisection { period: ctx.p, rho: ctx.rho, delta_star: lo0, tolerance: tol, certificate: at_lo, chain });
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let cert = certify_delta_with(ctx, mid)?;
        chain.push((mid, cert.status));
        if cert.is_certified() {
            hi = mid;
            best = cert;
        } else {
            lo = mid;
        }
    }
    Ok(DeltaBisection { period: ctx.p, rho: ctx.rho, delta_star: hi, tolerance: tol, certificate: best, chain })
}

pub fn bisect_delta(p: usize, rho: f64, range: (f64, f64), tol: f64, budgets: &CertBudgets) -> Result<DeltaBisection> {
    let ctx = CertContext::build(p, rho, *budgets)?;
    bisect_delta_with(&ctx, range, tol)
}
