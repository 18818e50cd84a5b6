use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Region, UnimodalQuadratic};
use crate::series::OrbitFamily;
use crate::{Error, Result};

/// Orbit count and weight accumulated at one depth of the backward tree.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LevelSum {
    pub depth: usize,
    pub count: u64,
    pub sum: f64,
}

/// Result of a truncated enumeration from one terminal.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FamilySum {
    pub sum: f64,
    pub pruned_mass: f64,
    pub nodes: u64,
    pub levels: Vec<LevelSum>,
}

/// Subtree cut rule derived from an expansion profile.
///
/// Nodes closer than `guard_radius` to a point of `guard` are never cut: the
/// backward branches there pass near the critical point, where the subtree
/// mass is not controlled by a uniform expansion constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneRule {
    pub threshold: f64,
    pub k_est: f64,
    pub eps_est: f64,
    pub guard: Vec<Complex64>,
    pub guard_radius: f64,
}

impl PruneRule {
    /// `K^-delta r / (1 - r)` with `r = 2 (2 - eps)^-delta`, or `None` when `r >= 1`.
    pub fn charge_factor(&self, delta: f64) -> Option<f64> {
        let r = 2.0 * (2.0 - self.eps_est).powf(-delta);
        (r < 1.0).then(|| self.k_est.powf(-delta) * r / (1.0 - r))
    }

    pub fn with_guard(mut self, guard: Vec<Complex64>, radius: f64) -> Self {
        self.guard = guard;
        self.guard_radius = radius;
        self
    }

    pub fn guarded(&self, w: Complex64) -> bool {
        let r2 = self.guard_radius * self.guard_radius;
        self.guard.iter().any(|g| (w - g).norm_sqr() < r2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumOptions {
    pub node_budget: u64,
    pub prune: Option<PruneRule>,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self { node_budget: 50_000_000, prune: None }
    }
}

/// A source region paired with its nontrivial flag.
#[derive(Debug, Clone, Copy)]
pub struct SourceSpec<'a> {
    pub region: &'a Region,
    pub nontrivial: bool,
}

fn finish(levels: Vec<LevelSum>, pruned_mass: f64, nodes: u64) -> FamilySum {
    let sum = levels.iter().map(|l| l.sum).sum();
    FamilySum { sum, pruned_mass, nodes, levels }
}

/// Forward orbit `w, f(w), .., f^m(w)`.
fn forward_orbit(f: &UnimodalQuadratic, w: Complex64, m: usize) -> Vec<Complex64> {
    let mut out = vec![w];
    let mut x = w;
    for _ in 0..m {
        x = f.eval(x);
        out.push(x);
    }
    out
}

/// Enumerates several families sharing the terminal `z` and the via region in a
/// single depth-first traversal. Pruning decisions depend only on node weights,
/// so every family sees the same tree.
pub fn enumerate_families(
    f: &UnimodalQuadratic,
    z: Complex64,
    via: &Region,
    sources: &[SourceSpec<'_>],
    delta: f64,
    j: usize,
    options: &EnumOptions,
) -> Result<Vec<FamilySum>> {
    if !(delta > 0.0) {
        return Err(Error::Config(format!("delta = {delta} must be positive")));
    }
    let active: Vec<bool> = sources.iter().map(|s| !s.region.is_trivially_empty()).collect();
    let mut levels: Vec<Vec<LevelSum>> = sources.iter().map(|_| (0..=j).map(|d| LevelSum { depth: d, count: 0, sum: 0.0 }).collect()).collect();
    for (i, s) in sources.iter().enumerate() {
        if active[i] && !s.nontrivial && s.region.admits(z) {
            levels[i][0].count += 1;
            levels[i][0].sum += 1.0;
        }
    }
    if j == 0 || !active.iter().any(|&a| a) {
        return Ok(levels.into_iter().map(|l| finish(l, 0.0, 1)).collect());
    }
    let charge = options.prune.as_ref().and_then(|p| p.charge_factor(delta).map(|c| (c, p)));
    let mut pruned = 0.0;
    let mut nodes: u64 = 1;
    let mut stack: Vec<(Complex64, f64, usize)> = Vec::with_capacity(4 * j + 8);
    let push_children = |stack: &mut Vec<(Complex64, f64, usize)>, w: Complex64, dmag: f64, depth: usize| {
        let root = f.preimages(w).branches[0];
        let scale = 2.0 * root.norm() * dmag;
        stack.push((-root, scale, depth));
        stack.push((root, scale, depth));
    };
    push_children(&mut stack, z, 1.0, 1);
    while let Some((w, dmag, depth)) = stack.pop() {
        nodes += 1;
        if nodes > options.node_budget {
            let partial: Vec<FamilySum> = levels.into_iter().map(|l| finish(l, pruned, nodes)).collect();
            return Err(Error::BudgetExceeded { budget: options.node_budget, partial: Box::new(partial[0].clone()) });
        }
        let in_via = depth < j && via.admits(w);
        if dmag == 0.0 {
            let hits = in_via || sources.iter().zip(&active).any(|(s, &a)| a && s.region.admits(w));
            if hits {
                return Err(Error::CriticalHit { orbit: forward_orbit(f, w, depth) });
            }
            continue;
        }
        let weight = dmag.powf(-delta);
        for (i, s) in sources.iter().enumerate() {
            if active[i] && s.region.admits(w) {
                levels[i][depth].count += 1;
                levels[i][depth].sum += weight;
            }
        }
        if !in_via {
            continue;
        }
        if let Some((factor, rule)) = charge {
            let bound = weight * factor;
            if bound < rule.threshold && !rule.guarded(w) {
                pruned += bound;
                continue;
            }
        }
        push_children(&mut stack, w, dmag, depth + 1);
    }
    Ok(levels.into_iter().map(|l| finish(l, pruned, nodes)).collect())
}

/// Truncated Poincaré sum of `fam` at the terminal `z`.
pub fn enumerate_family(f: &UnimodalQuadratic, fam: &OrbitFamily, z: Complex64, delta: f64, j: usize, options: &EnumOptions) -> Result<FamilySum> {
    if !fam.target.admits(z) {
        return Err(Error::Config(format!("terminal {z} is outside the target of {}", fam.label)));
    }
    let src = [SourceSpec { region: &fam.source, nontrivial: fam.nontrivial }];
    Ok(enumerate_families(f, z, &fam.via, &src, delta, j, options)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn chebyshev_first_level() {
        let f = UnimodalQuadratic::chebyshev();
        let s = enumerate_family(&f, &OrbitFamily::unconstrained(), cx(0.0, 0.0), 2.0, 1, &EnumOptions::default()).unwrap();
        assert!((s.sum - 1.25).abs() < 1e-15);
        assert_eq!(s.levels[1].count, 2);
    }

    #[test]
    fn nontrivial_at_depth_zero_is_empty() {
        let f = UnimodalQuadratic::new(1.3).unwrap();
        let fam = OrbitFamily::new(Region::Plane, Region::Plane, Region::Plane, true, "C<-+C");
        let s = enumerate_family(&f, &fam, cx(0.2, 0.1), 1.5, 0, &EnumOptions::default()).unwrap();
        assert_eq!(s.sum, 0.0);
    }

    #[test]
    fn circle_map_two_levels() {
        let f = UnimodalQuadratic::new(0.0).unwrap();
        let s = enumerate_family(&f, &OrbitFamily::unconstrained(), cx(4.0, 0.0), 1.0, 2, &EnumOptions::default()).unwrap();
        let expected = 1.0 + 0.5 + 4.0 / (8.0 * 2f64.sqrt());
        assert!((s.sum - expected).abs() < 1e-14, "{}", s.sum);
    }

    #[test]
    fn critical_hit_is_reported() {
        let f = UnimodalQuadratic::chebyshev();
        match enumerate_family(&f, &OrbitFamily::unconstrained(), cx(2.0, 0.0), 1.5, 2, &EnumOptions::default()) {
            Err(Error::CriticalHit { orbit }) => assert_eq!(orbit.len(), 2),
            other => panic!("expected a critical hit, got {other:?}"),
        }
    }

    #[test]
    fn budget_is_enforced() {
        let f = UnimodalQuadratic::chebyshev();
        let opts = EnumOptions { node_budget: 100, prune: None };
        assert!(matches!(enumerate_family(&f, &OrbitFamily::unconstrained(), cx(0.3, 0.2), 1.5, 12, &opts), Err(Error::BudgetExceeded { .. })));
    }
}
