use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Region, UnimodalQuadratic};
use crate::report::nonfinite_as_null;
use crate::series::{
    enumerate_families, geometric_tail_bound, EnumOptions, ExpansionProfile, FamilySum, LevelSum, OrbitFamily, PruneRule, SourceSpec, Terminal,
    TerminalGrid,
};
use crate::{Error, Result};

/// Truncated series evaluated as a sup over a terminal grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesBound {
    /// Arrow-syntax family descriptor.
    pub family: String,
    pub delta: f64,
    pub j: usize,
    pub point_estimate: f64,
    #[serde(with = "nonfinite_as_null")]
    pub upper_bound: f64,
    #[serde(with = "nonfinite_as_null")]
    pub tail_bound: f64,
    pub pruned_mass: f64,
    pub terminals: usize,
    pub nodes: u64,
    /// Largest distortion factor `M(h)^delta` applied.
    pub distortion: f64,
    /// Set when no tail bound is available and `upper_bound` is infinite.
    pub divergent: bool,
    /// Terminal attaining `point_estimate`.
    pub argmax: Complex64,
    /// Level sums at `argmax`.
    pub levels: Vec<LevelSum>,
}

impl SeriesBound {
    pub fn zero(family: &str, delta: f64, j: usize, terminals: usize) -> Self {
        Self {
            family: family.to_string(),
            delta,
            j,
            point_estimate: 0.0,
            upper_bound: 0.0,
            tail_bound: 0.0,
            pruned_mass: 0.0,
            terminals,
            nodes: 0,
            distortion: 1.0,
            divergent: false,
            argmax: Complex64::new(0.0, 0.0),
            levels: Vec::new(),
        }
    }
}

/// CSV export of per-depth level sums.
pub fn level_sums_csv(levels: &[LevelSum]) -> String {
    let mut out = String::from("depth,count,sum\n");
    for l in levels {
        out.push_str(&format!("{},{},{}\n", l.depth, l.count, l.sum));
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct SupOptions {
    pub node_budget: Option<u64>,
    pub prune: Option<PruneRule>,
    /// Profile supplying the geometric tail bound. Without it the bound is divergent.
    pub tail: Option<ExpansionProfile>,
    /// Postcritical points that set the distortion distance `d`.
    pub postcritical: Vec<Complex64>,
}

impl SupOptions {
    fn enum_options(&self) -> EnumOptions {
        EnumOptions { node_budget: self.node_budget.unwrap_or(EnumOptions::default().node_budget), prune: self.prune.clone() }
    }
}

fn distortion(t_z: Complex64, h: f64, postcritical: &[Complex64]) -> f64 {
    let d = postcritical.iter().map(|p| (t_z - p).norm()).fold(f64::INFINITY, f64::min);
    if d.is_infinite() {
        1.0
    } else {
        (1.0 + h / d).powi(2)
    }
}

/// Per-terminal sums of several source families sharing one traversal.
#[derive(Debug, Clone)]
pub struct TerminalSums {
    pub delta: f64,
    pub j: usize,
    pub terminals: Vec<Terminal>,
    /// `sums[t][i]` is source `i` at terminal `t`.
    pub sums: Vec<Vec<FamilySum>>,
}

/// Runs one backward traversal per terminal, in parallel over terminals.
pub fn terminal_sums(
    f: &UnimodalQuadratic,
    sources: &[SourceSpec<'_>],
    via: &Region,
    grid: &TerminalGrid,
    delta: f64,
    j: usize,
    options: &SupOptions,
) -> Result<TerminalSums> {
    let enum_opts = options.enum_options();
    let sums = grid.terminals.par_iter().map(|t| enumerate_families(f, t.z, via, sources, delta, j, &enum_opts)).collect::<Result<Vec<_>>>()?;
    Ok(TerminalSums { delta, j, terminals: grid.terminals.clone(), sums })
}

/// Sup of source `index` over the terminals admitted by `target`.
///
/// `upper_bound = max_t (sum_t M_t^delta + pruned_t) + tail`.
pub fn aggregate(ts: &TerminalSums, index: usize, label: &str, target: &Region, empty_source: bool, options: &SupOptions) -> Result<SeriesBound> {
    let picked: Vec<usize> = (0..ts.terminals.len()).filter(|&t| target.admits(ts.terminals[t].z)).collect();
    if picked.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if empty_source {
        return Ok(SeriesBound::zero(label, ts.delta, ts.j, picked.len()));
    }
    let tail = match &options.tail {
        Some(p) => Some(geometric_tail_bound(p, ts.delta, ts.j)?),
        None => None,
    };
    let mut best = (f64::NEG_INFINITY, picked[0]);
    let mut value = 0.0f64;
    let mut pruned = 0.0f64;
    let mut worst_m = 1.0f64;
    let mut nodes = 0u64;
    for &t in &picked {
        let term = &ts.terminals[t];
        let s = &ts.sums[t][index];
        let m = distortion(term.z, term.spacing, &options.postcritical).powf(ts.delta);
        worst_m = worst_m.max(m);
        value = value.max(s.sum * m + s.pruned_mass);
        pruned = pruned.max(s.pruned_mass);
        nodes += s.nodes;
        if s.sum > best.0 {
            best = (s.sum, t);
        }
    }
    let (tail_bound, upper, divergent) = match tail {
        Some(tb) => (tb, value + tb, false),
        None => (f64::INFINITY, f64::INFINITY, true),
    };
    Ok(SeriesBound {
        family: label.to_string(),
        delta: ts.delta,
        j: ts.j,
        point_estimate: best.0.max(0.0),
        upper_bound: upper,
        tail_bound,
        pruned_mass: pruned,
        terminals: picked.len(),
        nodes,
        distortion: worst_m,
        divergent,
        argmax: ts.terminals[best.1].z,
        levels: ts.sums[best.1][index].levels.clone(),
    })
}

/// Sups of several families sharing a target grid and a via region, computed
/// with one traversal per terminal.
pub fn family_sups(
    f: &UnimodalQuadratic,
    families: &[(&str, &Region, bool)],
    via: &Region,
    grid: &TerminalGrid,
    delta: f64,
    j: usize,
    options: &SupOptions,
) -> Result<Vec<SeriesBound>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(p) = &options.tail {
        geometric_tail_bound(p, delta, j)?;
    }
    let sources: Vec<SourceSpec<'_>> = families.iter().map(|(_, r, nt)| SourceSpec { region: r, nontrivial: *nt }).collect();
    let ts = terminal_sums(f, &sources, via, grid, delta, j, options)?;
    families
        .iter()
        .enumerate()
        .map(|(i, (label, region, _))| aggregate(&ts, i, label, &Region::Plane, region.is_trivially_empty(), options))
        .collect()
}

/// Sup of one family over a terminal grid. Terminals outside the target are dropped.
pub fn family_sup(f: &UnimodalQuadratic, fam: &OrbitFamily, delta: f64, grid: &TerminalGrid, j: usize, options: &SupOptions) -> Result<SeriesBound> {
    let grid = grid.clone().filtered(&fam.target);
    let mut v = family_sups(f, &[(&fam.label, &fam.source, fam.nontrivial)], &fam.via, &grid, delta, j, options)?;
    Ok(v.remove(0))
}
