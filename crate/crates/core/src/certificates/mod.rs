//! The quadratic recursive estimate behind `delta_cr <= delta` and the
//! induction behind the area-zero criterion, assembled from measured sups.
//!
//! Certificates are numeric: sups come from sampled grids with a distortion
//! margin, and the expansion constants feeding tails and pruning are measured.

mod area;
mod context;
mod delta;
mod quadratic;

pub use area::{
    certify_area, certify_area_with, paper_threshold_closure, uv_recursion_step, uv_recursion_step_exact, AreaCertificate, AreaStatus, AreaSups,
    ThresholdChecks, ThresholdClosure, UvStep, AREA_FAMILIES,
};
pub use context::{standard_grids, CertBudgets, CertContext, ProfileSummary, RecursionMode, SupTable, TargetKind};
pub use delta::{bisect_delta, bisect_delta_with, certify_delta, certify_delta_with, DeltaBisection, DeltaCertificate, DeltaStatus, BASE_FAMILIES};
pub use quadratic::{solve_quadratic_fixed_point, BaseSups, FixedPointSolution, QuadraticRecursion};
