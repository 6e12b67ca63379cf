use serde::{Deserialize, Serialize};

use super::model::ModelSpec;
use super::value::{State, Value};
use crate::error::Result;

/// Initial data `u_n(0) = a_n`, boundary forcing `u_0(t) = b_t` (zero past the
/// listed values) and the model they are posed for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub initial: State,
    pub boundary: Vec<Value>,
    pub model: ModelSpec,
}

impl ProblemSpec {
    pub fn new(model: ModelSpec, initial: State, boundary: Vec<Value>) -> Result<Self> {
        let space = model.space();
        initial.validate(space)?;
        State::new(boundary.clone(), space.zero()).validate(space)?;
        Ok(Self {
            initial,
            boundary,
            model,
        })
    }

    /// Symbolic problem from 0/1 literals.
    pub fn bits(model: ModelSpec, initial: &[u8], boundary: &[u8]) -> Result<Self> {
        Self::new(
            model,
            State::bits(initial),
            boundary.iter().map(|&b| Value::bit(b)).collect(),
        )
    }

    /// The all-zero problem for `model`.
    pub fn zero(model: ModelSpec) -> Self {
        Self {
            initial: State::zero(model.space()),
            boundary: Vec::new(),
            model,
        }
    }

    /// Boundary value `b_t` at integer time `t`.
    pub fn boundary_at(&self, t: u64) -> Value {
        usize::try_from(t)
            .ok()
            .and_then(|i| self.boundary.get(i).copied())
            .unwrap_or_else(|| self.model.space().zero())
    }

    /// Initial value `a_n`, `n >= 1`.
    pub fn initial_at(&self, n: u32) -> Value {
        self.initial.get(n as usize)
    }
}
