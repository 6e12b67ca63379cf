//! Regularized solver, flow maps, fractional times and strong-solution analysis.

mod engine;
pub mod flow;
pub mod fractional;
pub mod reg;
pub mod solution;
pub mod strong;

pub(crate) use engine::{sweep, LaneRule};
pub use flow::{beta, flow_phi, flow_psi, xi, FlowMap, Provenance};
pub use fractional::eval_fractional;
pub use reg::{RegSpec, RegTable};
pub use solution::{solve_driven, solve_regularized, Driver, Solution, MAX_CELLS};
pub(crate) use solution::row_lengths;
pub use strong::{
    first_boundary_time, n_max0, nonuniqueness_witness, solve_strong, BlowupOutcome, BlowupReport,
    StaircaseStep, WitnessPair, STAIRCASE_SCALES,
};
