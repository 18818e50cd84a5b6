use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Region, UnimodalQuadratic};
use crate::series::{PruneRule, TerminalGrid};
use crate::{Error, Result};

/// Measured lower envelope `|Df^k(x_0)| >= K (2 - eps)^k` over sampled orbits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionProfile {
    pub k_est: f64,
    pub eps_est: f64,
    pub depth: usize,
    pub terminals: usize,
    pub sample_count: u64,
    /// `min_k m_k (2 - eps)^-k` before the 5% slack.
    pub min_ratio: f64,
    /// `m_k`, the smallest sampled `|Df^k|` at each depth (`None` where no orbit ends).
    pub envelope: Vec<Option<f64>>,
    /// Orbit `x_0 .. x_k` attaining `min_ratio`.
    pub witness: Vec<Complex64>,
}

impl ExpansionProfile {
    pub fn prune_rule(&self, threshold: f64) -> PruneRule {
        PruneRule { threshold, k_est: self.k_est, eps_est: self.eps_est, guard: Vec::new(), guard_radius: 0.0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileRequest<'a> {
    /// Constraint on intermediate points.
    pub via: &'a Region,
    /// Where sampled orbits may start.
    pub sources: &'a Region,
    pub terminals: &'a TerminalGrid,
    pub depth: usize,
    pub samples: usize,
    /// `via` must exclude the disk of this radius around the critical point.
    pub guard_radius: f64,
    /// Reject orbits with `|Df^k| <= 1`. Profiles that only size pruning
    /// charges may relax this, since `K < 1` still gives a valid charge.
    pub require_expansion: bool,
}

/// `K^-delta r^{j+1} / (1 - r)` with `r = 2 (2 - eps)^-delta`.
pub fn geometric_tail_bound(profile: &ExpansionProfile, delta: f64, j: usize) -> Result<f64> {
    let r = 2.0 * (2.0 - profile.eps_est).powf(-delta);
    if !(r < 1.0) {
        return Err(Error::DivergentTail { ratio: r });
    }
    Ok(profile.k_est.powf(-delta) * r.powi(j as i32 + 1) / (1.0 - r))
}

fn guard_violation(via: &Region, radius: f64) -> Option<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for frac in [0.25, 0.5, 0.75, 0.99] {
        for k in 0..32 {
            pts.push(Complex64::from_polar(radius * frac, std::f64::consts::TAU * k as f64 / 32.0));
        }
    }
    pts.into_iter().find(|z| via.admits(*z))
}

#[derive(Clone)]
struct Envelope {
    min: Vec<(f64, Complex64)>,
    count: u64,
}

fn scan_terminal(f: &UnimodalQuadratic, req: &ProfileRequest<'_>, z: Complex64) -> std::result::Result<Envelope, (usize, f64, Complex64)> {
    let mut env = Envelope { min: vec![(f64::INFINITY, Complex64::new(0.0, 0.0)); req.depth + 1], count: 0 };
    let mut stack: Vec<(Complex64, f64, usize)> = Vec::new();
    let push = |stack: &mut Vec<(Complex64, f64, usize)>, w: Complex64, dmag: f64, depth: usize| {
        let r = f.preimages(w).branches[0];
        let d = 2.0 * r.norm() * dmag;
        stack.push((-r, d, depth));
        stack.push((r, d, depth));
    };
    if req.depth > 0 {
        push(&mut stack, z, 1.0, 1);
    }
    while let Some((w, dmag, depth)) = stack.pop() {
        if req.sources.admits(w) {
            env.count += 1;
            if req.require_expansion && dmag <= 1.0 {
                return Err((depth, dmag, w));
            }
            if dmag < env.min[depth].0 {
                env.min[depth] = (dmag, w);
            }
        }
        if depth < req.depth && req.via.admits(w) {
            push(&mut stack, w, dmag, depth + 1);
        }
    }
    Ok(env)
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Fits `(K_est, eps_est)` to the smallest derivatives of sampled constrained orbits.
///
/// `eps_est` comes from the growth rate of `ln m_k` over the deeper half of the
/// depths; `K_est` is then the largest constant consistent with every sample,
/// reduced by 5%.
pub fn measure_expansion_profile(f: &UnimodalQuadratic, req: &ProfileRequest<'_>) -> Result<ExpansionProfile> {
    if let Some(z) = guard_violation(req.via, req.guard_radius) {
        return Err(Error::Config(format!("via region reaches the critical neighbourhood at {z}")));
    }
    if req.terminals.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if req.depth == 0 || req.samples == 0 {
        return Err(Error::Config("profile depth and sample count must be positive".into()));
    }
    let step = req.terminals.len().div_ceil(req.samples).max(1);
    let terminals: Vec<Complex64> = req.terminals.terminals.iter().step_by(step).map(|t| t.z).collect();
    let scans: Vec<_> = terminals.par_iter().map(|&z| scan_terminal(f, req, z)).collect();
    let mut env = Envelope { min: vec![(f64::INFINITY, Complex64::new(0.0, 0.0)); req.depth + 1], count: 0 };
    for s in scans {
        match s {
            Err((k, derivative, point)) => return Err(Error::NoExpansion { k, derivative, point }),
            Ok(e) => {
                env.count += e.count;
                for (k, m) in e.min.into_iter().enumerate() {
                    if m.0 < env.min[k].0 {
                        env.min[k] = m;
                    }
                }
            }
        }
    }
    let observed: Vec<(f64, f64)> = (1..=req.depth).filter(|&k| env.min[k].0.is_finite()).map(|k| (k as f64, env.min[k].0.ln())).collect();
    if observed.is_empty() {
        return Err(Error::DegenerateFit("no constrained orbit reached a source".into()));
    }
    let half = req.depth as f64 / 2.0;
    let deep: Vec<(f64, f64)> = observed.iter().copied().filter(|p| p.0 >= half).collect();
    let rate = slope(&deep).or_else(|| slope(&observed)).unwrap_or(2f64.ln());
    let eps = (2.0 - rate.exp()).clamp(1e-6, 1.99);
    let (kmin, ratio) =
        observed
            .iter()
            .map(|&(k, lm)| (k as usize, (lm - k * (2.0 - eps).ln()).exp()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let witness_start = env.min[kmin].1;
    let mut witness = vec![witness_start];
    let mut x = witness_start;
    for _ in 0..kmin {
        x = f.eval(x);
        witness.push(x);
    }
    Ok(ExpansionProfile {
        k_est: 0.95 * ratio,
        eps_est: eps,
        depth: req.depth,
        terminals: terminals.len(),
        sample_count: env.count,
        min_ratio: ratio,
        envelope: env.min.iter().map(|m| m.0.is_finite().then_some(m.0)).collect(),
        witness,
    })
}
