//! Orbit families in arrow notation and the truncated Poincaré-series engine.

mod bijection;
mod enumerate;
mod family;
mod grid;
mod lemmas;
mod pressure;
mod profile;
mod sup;

pub use bijection::{rescaling_residual, BijectionReport};
pub use enumerate::{enumerate_families, enumerate_family, EnumOptions, FamilySum, LevelSum, PruneRule, SourceSpec};
pub use family::{parse_family, OrbitFamily};
pub use grid::{Terminal, TerminalGrid};
pub use lemmas::{chebyshev_expansion_check, expansion_lemma_sweep, ChebyshevExpansionReport, LemmaSweepReport, SweepOptions};
pub use pressure::{pressure_critical_exponent, PressureEstimate};
pub use profile::{geometric_tail_bound, measure_expansion_profile, ExpansionProfile, ProfileRequest};
pub use sup::{aggregate, family_sup, family_sups, level_sums_csv, terminal_sums, SeriesBound, SupOptions, TerminalSums};

use crate::renorm::DomainSystem;
use crate::Result;

/// Minimal return time from `A'` to `V'` over a polar sample of `A'`.
pub fn minimal_return_time(ds: &DomainSystem, samples: usize) -> Result<usize> {
    ds.return_time_scan(samples, ds.options().return_budget)
}
