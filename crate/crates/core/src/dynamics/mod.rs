//! The quadratic family, derivative cocycles, inverse branches, the Chebyshev
//! semi-conjugacy and region geometry.

mod chebyshev;
mod quadratic;
mod region;

pub use chebyshev::{chebyshev_semiconjugacy_check, semiconjugacy_t, SemiconjugacyReport};
pub use quadratic::{iterate_with_derivative, preimages, CocycleResult, FixedPoint, FixedPoints, Preimages, UnimodalQuadratic};
pub use region::{region_membership, Membership, Region, TrackedPullback};
