//! Flow maps on states, the shift and coupling maps, and the regularized
//! half-time and unit-time maps.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use super::reg::RegSpec;
use super::solution::solve_regularized;
use crate::error::{Error, Result};
use crate::lattice::{DyadicTime, ModelSpec, ProblemSpec, Space, State, Value};

type EvalFn = dyn Fn(&State) -> Result<State> + Send + Sync;

/// Where a flow map came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Simulation {
        model: ModelSpec,
        level: u32,
        reg: RegSpec,
        /// `Some(b)` for the unit-time map with boundary value `b`.
        boundary: Option<Value>,
    },
    Renormalized {
        model: ModelSpec,
        base: Box<Provenance>,
    },
    FixedPointA,
    Synthetic(String),
}

struct Inner {
    space: Space,
    depth: Option<usize>,
    provenance: Provenance,
    eval: Box<EvalFn>,
    memo: RwLock<HashMap<Vec<Value>, State>>,
}

/// A map on states, lazily evaluated and memoized per input prefix.
///
/// With a finite `depth` the output depends only on the first `depth`
/// input components; inputs are truncated to that prefix before evaluation.
#[derive(Clone)]
pub struct FlowMap(Arc<Inner>);

impl fmt::Debug for FlowMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowMap")
            .field("space", &self.0.space)
            .field("depth", &self.0.depth)
            .field("provenance", &self.0.provenance)
            .finish()
    }
}

impl FlowMap {
    pub fn new(
        space: Space,
        depth: Option<usize>,
        provenance: Provenance,
        eval: impl Fn(&State) -> Result<State> + Send + Sync + 'static,
    ) -> Self {
        Self(Arc::new(Inner {
            space,
            depth,
            provenance,
            eval: Box::new(eval),
            memo: RwLock::new(HashMap::new()),
        }))
    }

    /// A map given by an explicit table on depth-`depth` prefixes.
    pub fn from_table(
        space: Space,
        depth: usize,
        label: &str,
        table: HashMap<Vec<Value>, State>,
    ) -> Self {
        Self::new(space, Some(depth), Provenance::Synthetic(label.to_string()), move |a| {
            let key = a.take(depth);
            table.get(&key).cloned().ok_or_else(|| Error::RegTableIncomplete {
                prefix: key.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
            })
        })
    }

    pub fn space(&self) -> Space {
        self.0.space
    }

    /// Number of leading input components the map reads; `None` if unbounded.
    pub fn depth(&self) -> Option<usize> {
        self.0.depth
    }

    pub fn provenance(&self) -> &Provenance {
        &self.0.provenance
    }

    pub fn cached(&self) -> usize {
        self.0.memo.read().expect("memo lock").len()
    }

    pub fn apply(&self, a: &State) -> Result<State> {
        a.validate(self.0.space)?;
        let Some(depth) = self.0.depth else {
            return (self.0.eval)(a);
        };
        let key = a.take(depth);
        if let Some(out) = self.0.memo.read().expect("memo lock").get(&key) {
            return Ok(out.clone());
        }
        let out = (self.0.eval)(&State::new(key.clone(), self.0.space.zero()))?;
        self.0
            .memo
            .write()
            .expect("memo lock")
            .entry(key)
            .or_insert_with(|| out.clone());
        Ok(out)
    }
}

/// `xi(a) = (f(a_1, a_2), g(a_1, a_2), 0, 0, ...)`.
pub fn xi(model: &ModelSpec, a: &State) -> Result<State> {
    let (a1, a2) = (a.get(1), a.get(2));
    Ok(State::new(vec![model.f(a1, a2)?, model.g(a1, a2)?], model.space().zero()))
}

/// `beta_b(a) = (g(b, a_1), 0, 0, ...)`.
pub fn beta(model: &ModelSpec, b: Value, a: &State) -> Result<State> {
    Ok(State::new(vec![model.g(b, a.get(1))?], model.space().zero()))
}

fn input_depth(level: u32, reg: &RegSpec) -> usize {
    level as usize + reg.extra_depth()
}

/// `psi^(N): a -> u^(N)(tau_1)`; independent of the boundary data.
pub fn flow_psi(model: ModelSpec, level: u32, reg: RegSpec) -> Result<FlowMap> {
    check_level(level)?;
    reg.validate(model.space())?;
    let provenance = Provenance::Simulation {
        model,
        level,
        reg: reg.clone(),
        boundary: None,
    };
    let half = DyadicTime::tau(1);
    Ok(FlowMap::new(
        model.space(),
        Some(input_depth(level, &reg)),
        provenance,
        move |a| {
            let problem = ProblemSpec::new(model, a.clone(), Vec::new())?;
            solve_regularized(&problem, level, &reg, &half)?.state_at(&half, 1)
        },
    ))
}

/// `phi^(N)_b: a -> u^(N)(1)` with boundary value `b_0 = b`.
pub fn flow_phi(model: ModelSpec, level: u32, reg: RegSpec, b: Value) -> Result<FlowMap> {
    check_level(level)?;
    reg.validate(model.space())?;
    if b.space() != model.space() {
        return Err(Error::SpaceMismatch {
            expected: model.space().name(),
            found: b.space().name(),
        });
    }
    let provenance = Provenance::Simulation {
        model,
        level,
        reg: reg.clone(),
        boundary: Some(b),
    };
    let one = DyadicTime::integer(1);
    Ok(FlowMap::new(
        model.space(),
        Some(input_depth(level, &reg)),
        provenance,
        move |a| {
            let problem = ProblemSpec::new(model, a.clone(), vec![b])?;
            solve_regularized(&problem, level, &reg, &one)?.state_at(&one, 1)
        },
    ))
}

fn check_level(level: u32) -> Result<()> {
    if level == 0 {
        Err(Error::InvalidArgument("regularization level must be at least 1".into()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{MODEL_A, MODEL_B, PHASE_MODEL};

    fn all_bits(depth: usize) -> impl Iterator<Item = State> {
        (0u32..1 << depth).map(move |c| {
            State::bits(&(0..depth).map(|i| (c >> i & 1) as u8).collect::<Vec<_>>())
        })
    }

    #[test]
    fn level_one_closed_forms() {
        let psi = flow_psi(MODEL_A, 1, RegSpec::Cutoff).unwrap();
        assert_eq!(psi.apply(&State::bits(&[1, 1, 1])).unwrap(), State::bits(&[1]));
        let psi = flow_psi(MODEL_B, 1, RegSpec::unit()).unwrap();
        for a1 in 0..2u8 {
            let out = psi.apply(&State::bits(&[a1, 0, 1])).unwrap();
            let f = MODEL_B.f(Value::bit(a1), Value::ONE_BIT).unwrap();
            assert_eq!(out, State::new(vec![f, Value::ONE_BIT], Value::ZERO_BIT));
        }
    }

    #[test]
    fn phase_level_two_cutoff() {
        let psi = flow_psi(PHASE_MODEL, 2, RegSpec::Cutoff).unwrap();
        let (a1, a2, a3) = (0x1234_5678_9abc_def1u64, 0x0fed_cba9_8765_4321u64, 0x5555_aaaa_3333_cccbu64);
        let out = psi.apply(&State::phases(&[a1, a2, a3])).unwrap();
        assert_eq!(out.get(1), Value::Phase(a1.wrapping_mul(2).wrapping_add(a2.wrapping_mul(2))));
        // a_3 is ignored by the cutoff, so component 2 is 4 a_2
        assert_eq!(out.get(2), Value::Phase(a2.wrapping_mul(4)));
    }

    #[test]
    fn unit_time_map_is_two_half_steps_plus_boundary_term() {
        for model in [MODEL_A, MODEL_B] {
            for level in 1..=5 {
                let psi = flow_psi(model, level, RegSpec::Cutoff).unwrap();
                for b in [Value::ZERO_BIT, Value::ONE_BIT] {
                    let phi = flow_phi(model, level, RegSpec::Cutoff, b).unwrap();
                    for a in all_bits(level as usize + 1) {
                        let lhs = phi.apply(&a).unwrap();
                        let twice = psi.apply(&psi.apply(&a).unwrap()).unwrap();
                        let rhs = twice.add(&beta(&model, b, &a).unwrap()).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn memo_keys_ignore_deep_components() {
        let psi = flow_psi(MODEL_A, 3, RegSpec::Cutoff).unwrap();
        let x = psi.apply(&State::bits(&[1, 0, 1])).unwrap();
        let y = psi.apply(&State::bits(&[1, 0, 1, 1, 1])).unwrap();
        assert_eq!(x, y);
        assert_eq!(psi.cached(), 1);
    }
}
