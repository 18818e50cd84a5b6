use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Region, UnimodalQuadratic};
use crate::renorm::{build_domain_system, find_superattracting_parameter, CombinatoricsSpec, DomainSystem};
use crate::series::{
    aggregate, geometric_tail_bound, measure_expansion_profile, terminal_sums, ExpansionProfile, ProfileRequest, PruneRule, SeriesBound, SourceSpec,
    SupOptions, Terminal, TerminalGrid, TerminalSums,
};
use crate::{Error, Result};

/// How the six base sups are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecursionMode {
    /// Each sup evaluated on its own target and source.
    #[default]
    Direct,
    /// Each sup replaced by the dominating family used in the proof of the main estimate.
    PaperInequality,
}

/// Evaluation budgets shared by every certificate built from one context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertBudgets {
    /// Truncation depth of every series.
    pub j: usize,
    pub prune_threshold: f64,
    /// The effective threshold is raised to this fraction of the `V'` tail
    /// bound when that is larger, so that low `delta`, where the tail already
    /// dominates, does not pay for pruning far below it.
    pub prune_tail_fraction: f64,
    pub node_budget: u64,
    /// Depth of the expansion profiles.
    pub profile_depth: usize,
    /// Terminals sampled by the target profiles.
    pub profile_samples: usize,
    /// Terminals sampled by the pruning profile.
    pub prune_profile_samples: usize,
    /// Subtrees rooted this close to a postcritical point are never pruned.
    pub prune_guard: f64,
    /// `(radial, angular)` cells of the polar grids on `A'`, `U'` and `A`.
    pub grid_a_prime: (usize, usize),
    pub grid_u_prime: (usize, usize),
    pub grid_a: (usize, usize),
    /// Truncation, in return-map steps, of the rescaling-bijection residual.
    pub bijection_j: usize,
    pub mode: RecursionMode,
}

impl Default for CertBudgets {
    fn default() -> Self {
        Self {
            j: 30,
            prune_threshold: 1e-6,
            prune_tail_fraction: 1e-4,
            node_budget: 50_000_000,
            profile_depth: 14,
            profile_samples: 16,
            prune_profile_samples: 64,
            prune_guard: 0.1,
            grid_a_prime: (6, 8),
            grid_u_prime: (3, 8),
            grid_a: (8, 8),
            bijection_j: 8,
            mode: RecursionMode::Direct,
        }
    }
}

impl CertBudgets {
    pub fn validate(&self) -> Result<()> {
        let grids = [self.grid_a_prime, self.grid_u_prime, self.grid_a];
        if self.j == 0 || self.j > 60 {
            return Err(Error::Range(format!("j = {} (need 1..=60)", self.j)));
        }
        if !(self.prune_threshold >= 0.0 && self.prune_tail_fraction >= 0.0) {
            return Err(Error::Range(format!("prune_threshold = {}", self.prune_threshold)));
        }
        if self.profile_depth < 4 || self.profile_depth > 22 {
            return Err(Error::Range(format!("profile_depth = {} (need 4..=22)", self.profile_depth)));
        }
        if self.profile_samples == 0 || self.prune_profile_samples == 0 || self.node_budget == 0 {
            return Err(Error::Range("sample counts and node budget must be positive".into()));
        }
        if grids.iter().any(|g| g.0 == 0 || g.1 == 0) {
            return Err(Error::Range("grid densities must be positive".into()));
        }
        if !(self.prune_guard >= 0.0) {
            return Err(Error::Range(format!("prune_guard = {}", self.prune_guard)));
        }
        Ok(())
    }
}

/// Summary of a measured expansion profile, as stored in certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub role: String,
    pub k_est: f64,
    pub eps_est: f64,
    pub depth: usize,
    pub terminals: usize,
    pub sample_count: u64,
    pub witness: Vec<Complex64>,
}

impl ProfileSummary {
    fn new(role: &str, p: &ExpansionProfile) -> Self {
        Self {
            role: role.into(),
            k_est: p.k_est,
            eps_est: p.eps_est,
            depth: p.depth,
            terminals: p.terminals,
            sample_count: p.sample_count,
            witness: p.witness.clone(),
        }
    }
}

/// Everything that depends on `(p, rho)` but not on `delta`: the map, the
/// domain system, terminal grids and expansion profiles. Reusing one context
/// keeps certificates at different `delta` comparable.
pub struct CertContext {
    pub p: usize,
    pub rho: f64,
    pub budgets: CertBudgets,
    pub map: UnimodalQuadratic,
    pub ds: DomainSystem,
    /// `U ∖ V'`: the via region and the first source.
    pub s_region: Region,
    /// `U ∖ U'` = `S ∪ A'`.
    pub outer_source: Region,
    pub grid_a_prime: TerminalGrid,
    pub grid_u_prime: TerminalGrid,
    pub grid_a: TerminalGrid,
    /// Tail profile for targets in `V'`.
    pub profile_v: ExpansionProfile,
    /// Tail profile for targets in `A`.
    pub profile_a: ExpansionProfile,
    /// Pruning profile measured at terminals spread over the via region; `None` disables pruning.
    pub profile_prune: Option<ExpansionProfile>,
    pub prune_note: Option<String>,
}

/// Index of each source in the shared traversal.
pub(crate) const SRC_S: usize = 0;
pub(crate) const SRC_A_PRIME_PLUS: usize = 1;
pub(crate) const SRC_OUTER: usize = 2;

/// Target kinds of the shared traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    APrime,
    UPrime,
    /// `V' = A' ∪ U'`, evaluated on the union of both grids.
    VPrime,
    A,
}

/// Per-terminal sums of one `delta`, ready to be aggregated into any of the certificate families.
pub struct SupTable {
    pub delta: f64,
    v_sums: TerminalSums,
    a_sums: TerminalSums,
    pub tail_v: f64,
    pub tail_a: f64,
}

impl CertContext {
    /// Locates `c_p`, builds the domain system and measures the profiles.
    pub fn build(p: usize, rho: f64, budgets: CertBudgets) -> Result<Self> {
        let c = find_superattracting_parameter(&CombinatoricsSpec::closest_to_chebyshev(p)?, 1e-13)?;
        Self::build_for(&UnimodalQuadratic::new(c)?, p, rho, budgets)
    }

    pub fn build_for(f: &UnimodalQuadratic, p: usize, rho: f64, budgets: CertBudgets) -> Result<Self> {
        budgets.validate()?;
        let ds = build_domain_system(f, p, rho)?;
        let s_region = ds.u().clone().minus(ds.v_prime().clone());
        let outer_source = ds.u().clone().minus(ds.u_prime().clone());
        let (grid_a_prime, grid_u_prime, grid_a) = standard_grids(&ds, &budgets)?;
        let guard = rho * (1.0 - 1e-9);
        let v_grid = grid_a_prime.clone().merged(&grid_u_prime);
        let base = ProfileRequest {
            via: &s_region,
            sources: &outer_source,
            terminals: &v_grid,
            depth: budgets.profile_depth,
            samples: budgets.profile_samples,
            guard_radius: guard,
            require_expansion: true,
        };
        let profile_v = measure_expansion_profile(f, &base)?;
        let profile_a = measure_expansion_profile(f, &ProfileRequest { terminals: &grid_a, ..base })?;

        let postcritical = ds.postcritical_outside();
        let cloud = via_cloud(f, &s_region, &postcritical, budgets.prune_guard);
        let (profile_prune, prune_note) = if budgets.prune_threshold <= 0.0 {
            (None, Some("pruning disabled by budget".to_string()))
        } else if cloud.is_empty() {
            (None, Some("no via terminals away from the postcritical set".to_string()))
        } else {
            match measure_expansion_profile(
                f,
                &ProfileRequest { terminals: &cloud, samples: budgets.prune_profile_samples, require_expansion: false, ..base },
            ) {
                Ok(prof) => (Some(prof), None),
                Err(e) => (None, Some(format!("pruning profile unavailable: {e}"))),
            }
        };
        Ok(Self {
            p,
            rho,
            budgets,
            map: *f,
            ds,
            s_region,
            outer_source,
            grid_a_prime,
            grid_u_prime,
            grid_a,
            profile_v,
            profile_a,
            profile_prune,
            prune_note,
        })
    }

    pub fn profile_summaries(&self) -> Vec<ProfileSummary> {
        let mut out = vec![ProfileSummary::new("tail V'", &self.profile_v), ProfileSummary::new("tail A", &self.profile_a)];
        if let Some(p) = &self.profile_prune {
            out.push(ProfileSummary::new("pruning", p));
        }
        out
    }

    /// Pruning threshold used at `delta`.
    pub fn prune_threshold(&self, delta: f64) -> f64 {
        let tail = geometric_tail_bound(&self.profile_v, delta, self.budgets.j).unwrap_or(f64::INFINITY);
        self.budgets.prune_threshold.max(self.budgets.prune_tail_fraction * tail)
    }

    fn options(&self, tail: &ExpansionProfile, delta: f64) -> SupOptions {
        let threshold = self.prune_threshold(delta);
        let prune: Option<PruneRule> =
            self.profile_prune.as_ref().map(|p| p.prune_rule(threshold).with_guard(self.ds.postcritical_outside(), self.budgets.prune_guard));
        SupOptions { node_budget: Some(self.budgets.node_budget), prune, tail: Some(tail.clone()), postcritical: self.ds.postcritical_outside() }
    }

    /// Tail bounds for `V'`-type and `A`-type targets; `DivergentTail` when either ratio is `>= 1`.
    pub fn tails(&self, delta: f64) -> Result<(f64, f64)> {
        Ok((geometric_tail_bound(&self.profile_v, delta, self.budgets.j)?, geometric_tail_bound(&self.profile_a, delta, self.budgets.j)?))
    }

    /// Runs the backward traversals for every terminal of every grid at one `delta`.
    pub fn evaluate(&self, delta: f64) -> Result<SupTable> {
        let (tail_v, tail_a) = self.tails(delta)?;
        let a_prime = self.ds.a_prime().clone();
        let sources = [
            SourceSpec { region: &self.s_region, nontrivial: false },
            SourceSpec { region: &a_prime, nontrivial: true },
            SourceSpec { region: &self.outer_source, nontrivial: false },
        ];
        let v_grid = self.grid_a_prime.clone().merged(&self.grid_u_prime);
        let j = self.budgets.j;
        let v_sums = terminal_sums(&self.map, &sources, &self.s_region, &v_grid, delta, j, &self.options(&self.profile_v, delta))?;
        let a_sums = terminal_sums(&self.map, &sources, &self.s_region, &self.grid_a, delta, j, &self.options(&self.profile_a, delta))?;
        Ok(SupTable { delta, v_sums, a_sums, tail_v, tail_a })
    }

    /// Sup over the grid of `target` for one source of the shared traversal.
    pub fn bound(&self, table: &SupTable, target: TargetKind, source: usize, label: &str) -> Result<SeriesBound> {
        let (sums, region, tail) = match target {
            TargetKind::APrime => (&table.v_sums, self.ds.a_prime().clone(), &self.profile_v),
            TargetKind::UPrime => (&table.v_sums, self.ds.u_prime().clone(), &self.profile_v),
            TargetKind::VPrime => (&table.v_sums, self.ds.v_prime().clone(), &self.profile_v),
            TargetKind::A => (&table.a_sums, self.ds.a().clone(), &self.profile_a),
        };
        let opts = SupOptions { tail: Some(tail.clone()), postcritical: self.ds.postcritical_outside(), ..SupOptions::default() };
        aggregate(sums, source, label, &region, false, &opts)
    }
}

/// Polar terminal grids on `A'`, `U'` and `A` at the densities of `budgets`.
pub fn standard_grids(ds: &DomainSystem, budgets: &CertBudgets) -> Result<(TerminalGrid, TerminalGrid, TerminalGrid)> {
    let (rmin, rmax) = ds.u_prime_radii();
    let (ar, aa) = budgets.grid_a_prime;
    let grid_a_prime = TerminalGrid::polar(rmin, ds.rho(), ar, aa).filtered(ds.a_prime());
    let (ur, ua) = budgets.grid_u_prime;
    let grid_u_prime = TerminalGrid::polar(0.0, rmax, ur, ua).filtered(ds.u_prime());
    let (outer_r, outer_a) = budgets.grid_a;
    let inner = rmin / ds.lambda().abs();
    let grid_a = TerminalGrid::polar(inner, ds.v_radius(), outer_r, outer_a).filtered(ds.a());
    for g in [&grid_a_prime, &grid_u_prime, &grid_a] {
        if g.is_empty() {
            return Err(Error::EmptyGrid);
        }
    }
    Ok((grid_a_prime, grid_u_prime, grid_a))
}

/// Points of the backward tree of a generic seed, restricted to the via region
/// and kept away from the postcritical set. They stand in for the nodes at
/// which pruning decisions are taken.
fn via_cloud(f: &UnimodalQuadratic, via: &Region, postcritical: &[Complex64], guard: f64) -> TerminalGrid {
    let mut level = vec![Complex64::new(0.3, 0.1)];
    for _ in 0..9 {
        level = level
            .iter()
            .flat_map(|w| {
                let r = f.preimages(*w).branches[0];
                [r, -r]
            })
            .collect();
    }
    let terminals = level
        .into_iter()
        .filter(|z| z.im >= 0.0 && via.admits(*z) && postcritical.iter().all(|q| (z - q).norm() >= guard))
        .map(|z| Terminal { z, spacing: 0.0 })
        .collect();
    TerminalGrid::new(terminals)
}
