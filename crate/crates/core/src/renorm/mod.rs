//! Superattracting parameters, scaling factors, the renormalization functional
//! equation and nested domain systems.

mod domains;
mod params;
mod report;
mod scaling;
mod solver;

pub use domains::{build_domain_system, build_domain_system_with, DomainOptions, DomainSummary, DomainSystem};
pub use params::{
    find_superattracting_parameter, find_superattracting_parameter_in, itinerary_matches, locate_superattracting_parameter, CombinatoricsSpec,
    ParameterRoot, Sign,
};
pub use report::{lemma_class_csv, lemma_class_report, LemmaClassRow};
pub use scaling::{scaling_factor_estimate, scaling_fixed_point};
pub use solver::{cvitanovic_solve, JacobianMode, Precision, RenormFixedPointApprox, Seed, SolverOptions};
