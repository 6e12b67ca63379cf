//! Exact lattice primitives: dyadic times, values and states, models, fields.

pub mod cantor;
pub mod dyadic;
pub mod field;
pub mod model;
pub mod problem;
pub mod value;

pub use cantor::{cantor_decode, cantor_digits, cantor_encode, cantor_value, grid_states};
pub use dyadic::{dyadic, time_decompose, DyadicTime};
pub use field::{residual_check, residual_check_within, LatticeField, LatticePoint, Residual, Violation, ViolationKind};
pub use model::{local_update, Affine, BitTable, ModelSpec, Parity, MODEL_A, MODEL_B, PHASE_MODEL};
pub use problem::ProblemSpec;
pub use value::{Space, State, Value};
