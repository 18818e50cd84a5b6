use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::certificates::context::{SRC_A_PRIME_PLUS, SRC_S};
use crate::certificates::{CertBudgets, CertContext, ProfileSummary, TargetKind};
use crate::report::nonfinite_as_null;
use crate::series::SeriesBound;
use crate::{Error, Result};

/// The four `delta = 2` sups driving the area induction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaSups {
    /// `V' <-[U\V']-+ A'`
    #[serde(with = "nonfinite_as_null")]
    pub s_v: f64,
    /// `A <-[U\V']- A'`
    #[serde(with = "nonfinite_as_null")]
    pub s_a: f64,
    /// `V' <-[U\V']- U\V'`
    #[serde(with = "nonfinite_as_null")]
    pub s_q: f64,
    /// `A <-[U\V']- U\V'`
    #[serde(with = "nonfinite_as_null")]
    pub s_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvStep {
    /// Limit of the inner `v` recursion at this `u`.
    pub v: f64,
    pub u_next: f64,
}

/// One step of the area induction: `v = u(1+sN) / (1 - u(1+sN))` and
/// `u' = sV + u (1 + v) sA (1 + sQ)`.
pub fn uv_recursion_step(u: f64, sups: &AreaSups) -> Result<UvStep> {
    let AreaSups { s_v, s_a, s_q, s_n } = *sups;
    if [u, s_v, s_a, s_q, s_n].iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::Config("u and the sups must be nonnegative".into()));
    }
    let factor = u * (1.0 + s_n);
    if !(factor < 1.0) {
        return Err(Error::Noncontractive { step: 0, factor });
    }
    let v = factor / (1.0 - factor);
    Ok(UvStep { v, u_next: s_v + u * (1.0 + v) * s_a * (1.0 + s_q) })
}

/// The same step in exact rational arithmetic.
pub fn uv_recursion_step_exact(u: &BigRational, sups: &[BigRational; 4]) -> Option<(BigRational, BigRational)> {
    let [s_v, s_a, s_q, s_n] = sups;
    let one = BigRational::one();
    let factor = u * (&one + s_n);
    if factor >= one {
        return None;
    }
    let v = &factor / (&one - &factor);
    let u_next = s_v + u * (&one + &v) * s_a * (&one + s_q);
    Some((v, u_next))
}

/// Outcome of running the induction on the proof's own thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdClosure {
    /// `K` as a decimal string of the exact rational used.
    pub k: String,
    pub steps: usize,
    pub max_u: f64,
    pub max_v: f64,
    /// `u^k <= 1/10` and `v^k <= 1/4` for every computed `k`.
    pub closed: bool,
}

/// Runs the induction exactly with `sV = 1/100`, `sA = 1/(5K+5)`, `sQ = 2K`,
/// `sN = 1/100` from `u^0 = 0` for `steps` steps.
pub fn paper_threshold_closure(k: &BigRational, steps: usize) -> Result<ThresholdClosure> {
    if !k.is_positive_rational() {
        return Err(Error::Config("K must be positive".into()));
    }
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let five = r(5, 1);
    let sups = [r(1, 100), BigRational::one() / (&five * k + &five), r(2, 1) * k, r(1, 100)];
    let (u_cap, v_cap) = (r(1, 10), r(1, 4));
    let mut u = BigRational::zero();
    let mut closed = true;
    let (mut max_u, mut max_v) = (0.0f64, 0.0f64);
    for _ in 0..steps {
        let Some((v, next)) = uv_recursion_step_exact(&u, &sups) else {
            closed = false;
            break;
        };
        closed &= v <= v_cap && next <= u_cap;
        max_u = max_u.max(to_f64(&next));
        max_v = max_v.max(to_f64(&v));
        u = next;
    }
    Ok(ThresholdClosure { k: format!("{}", to_f64(k)), steps, max_u, max_v, closed })
}

trait PositiveRational {
    fn is_positive_rational(&self) -> bool;
}

impl PositiveRational for BigRational {
    fn is_positive_rational(&self) -> bool {
        *self > BigRational::zero()
    }
}

fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AreaStatus {
    Certified,
    Failed,
}

/// Threshold checks of the proof with `K` set to the measured `q3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChecks {
    #[serde(with = "nonfinite_as_null")]
    pub k: f64,
    /// `q1 < 1/100`.
    pub q1: bool,
    /// `q2 < 1/(5K+5)`.
    pub q2: bool,
    /// `q3 < 2K`, true by construction of `K`.
    pub q3: bool,
    /// `q4 < 1/100`.
    pub q4: bool,
}

impl ThresholdChecks {
    /// Evaluates the thresholds with `K` set to `s_q`.
    pub fn evaluate(sups: &AreaSups) -> Self {
        let k = sups.s_q;
        Self { k, q1: sups.s_v < 0.01, q2: sups.s_a < 1.0 / (5.0 * k + 5.0), q3: sups.s_q < 2.0 * k, q4: sups.s_n < 0.01 }
    }

    pub fn status(&self) -> AreaStatus {
        if self.all() {
            AreaStatus::Certified
        } else {
            AreaStatus::Failed
        }
    }

    pub fn all(&self) -> bool {
        self.q1 && self.q2 && self.q3 && self.q4
    }
}

/// Numeric area certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaCertificate {
    pub kind: String,
    pub tool_version: String,
    pub period: usize,
    pub c: f64,
    pub rho: f64,
    pub delta: f64,
    pub status: AreaStatus,
    pub sups: AreaSups,
    pub inputs: Vec<SeriesBound>,
    pub thresholds: ThresholdChecks,
    pub paper_threshold_status: AreaStatus,
    pub direct_status: AreaStatus,
    pub k_max: usize,
    pub u_trace: Vec<f64>,
    pub v_trace: Vec<f64>,
    /// `2 max(u^1..u^5)`.
    #[serde(with = "nonfinite_as_null")]
    pub u_cap: f64,
    /// `(diam U' / (2 rho))^2`, bounding `area U^k / area V^k`.
    pub area_ratio: f64,
    pub failure: Option<String>,
    pub profiles: Vec<ProfileSummary>,
    pub config: CertBudgets,
}

impl AreaCertificate {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "area certificate ({}), version {}", self.kind, self.tool_version);
        let _ = writeln!(s, "  p = {}, c = {:.16}, rho = {}", self.period, self.c, self.rho);
        let _ = writeln!(s, "  status: {:?} (thresholds {:?}, direct {:?})", self.status, self.paper_threshold_status, self.direct_status);
        for b in &self.inputs {
            let _ = writeln!(s, "  {:<22} estimate {:.6e}  upper {:.6e}", b.family, b.point_estimate, b.upper_bound);
        }
        let t = &self.thresholds;
        let _ = writeln!(s, "  K = {:.6}: q1 {} q2 {} q3 {} q4 {}", t.k, t.q1, t.q2, t.q3, t.q4);
        let last = self.u_trace.last().copied().unwrap_or(0.0);
        let _ = writeln!(s, "  u-trace: {} steps, last {:.6e}, cap {:.6e}; area ratio {:.3e}", self.u_trace.len(), last, self.u_cap, self.area_ratio);
        if let Some(f) = &self.failure {
            let _ = writeln!(s, "  failure: {f}");
        }
        s
    }
}

pub const AREA_FAMILIES: [&str; 4] = ["V'<-[U\\V']-+A'", "A<-[U\\V']-A'", "V'<-[U\\V']-U\\V'", "A<-[U\\V']-U\\V'"];

/// `Err((k, message))` names the failing step of the induction.
type TraceOutcome = std::result::Result<(), (usize, String)>;

/// Runs the induction with measured sups.
fn direct_trace(sups: &AreaSups, k_max: usize) -> (Vec<f64>, Vec<f64>, TraceOutcome) {
    let mut u_trace = vec![0.0];
    let mut v_trace = Vec::new();
    for k in 0..k_max {
        match uv_recursion_step(u_trace[k], sups) {
            Ok(step) => {
                v_trace.push(step.v);
                u_trace.push(step.u_next);
            }
            Err(Error::Noncontractive { factor, .. }) => {
                return (u_trace, v_trace, Err((k, format!("noncontractive v-recursion at k = {k}, factor {factor}"))));
            }
            Err(e) => return (u_trace, v_trace, Err((k, e.to_string()))),
        }
    }
    (u_trace, v_trace, Ok(()))
}

pub fn certify_area_with(ctx: &CertContext, k_max: usize) -> Result<AreaCertificate> {
    if k_max == 0 {
        return Err(Error::Range("k_max must be positive".into()));
    }
    let table = ctx.evaluate(2.0)?;
    let spec = [(TargetKind::VPrime, SRC_A_PRIME_PLUS), (TargetKind::A, SRC_A_PRIME_PLUS), (TargetKind::VPrime, SRC_S), (TargetKind::A, SRC_S)];
    let inputs: Vec<SeriesBound> = spec.iter().zip(AREA_FAMILIES).map(|(&(t, s), l)| ctx.bound(&table, t, s, l)).collect::<Result<_>>()?;
    let sups = AreaSups { s_v: inputs[0].upper_bound, s_a: inputs[1].upper_bound, s_q: inputs[2].upper_bound, s_n: inputs[3].upper_bound };
    let thresholds = ThresholdChecks::evaluate(&sups);
    let paper_threshold_status = thresholds.status();

    let (u_trace, v_trace, outcome) = direct_trace(&sups, k_max);
    let u_cap = 2.0 * u_trace.iter().skip(1).take(5).copied().fold(0.0, f64::max);
    let area_ratio = (ctx.ds.u_prime_diameter() / (2.0 * ctx.rho)).powi(2);
    let mut failure = None;
    if let Err((_, msg)) = &outcome {
        failure = Some(msg.clone());
    } else if let Some(k) = u_trace.iter().position(|&u| u > u_cap) {
        failure = Some(format!("u^{k} = {} exceeds the cap {u_cap}", u_trace[k]));
    } else if !(u_cap + area_ratio < 1.0) {
        failure = Some(format!("u cap {u_cap} plus area ratio {area_ratio} is not below 1"));
    }
    let direct_status = if failure.is_none() { AreaStatus::Certified } else { AreaStatus::Failed };
    Ok(AreaCertificate {
        kind: "numeric".into(),
        tool_version: crate::VERSION.into(),
        period: ctx.p,
        c: ctx.map.c(),
        rho: ctx.rho,
        delta: 2.0,
        status: direct_status,
        sups,
        inputs,
        thresholds,
        paper_threshold_status,
        direct_status,
        k_max,
        u_trace,
        v_trace,
        u_cap,
        area_ratio,
        failure,
        profiles: ctx.profile_summaries(),
        config: ctx.budgets,
    })
}

pub fn certify_area(p: usize, rho: f64, k_max: usize, budgets: &CertBudgets) -> Result<AreaCertificate> {
    let ctx = CertContext::build(p, rho, *budgets)?;
    certify_area_with(&ctx, k_max)
}
