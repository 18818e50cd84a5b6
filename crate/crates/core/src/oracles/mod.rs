//! Independent validators: escape-time membership and renders, box-counting
//! dimension, the period-doubling scaling oracle and a Monte Carlo escape
//! fraction estimator.

mod boxcount;
mod cascade;
mod escape;
mod montecarlo;

pub use boxcount::{box_counting_dimension, dimension_csv, DimensionEstimate, LadderRow};
pub use cascade::{cascade_lambda_oracle, CascadeEstimate, CascadeLevel};
pub use escape::{default_escape_radius, julia_escape_membership, render_escape_time, EscapeImage, EscapeOutcome, RenderWindow};
pub use montecarlo::{escape_fraction_mc, fraction_csv, wilson_interval, EscapeFraction};
