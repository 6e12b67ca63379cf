//! Lattice points, finite fields over them, and the weak-solution residual.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::dyadic::DyadicTime;
use super::model::{local_update, Parity};
use super::problem::ProblemSpec;
use super::value::Value;
use crate::error::{Error, Result};

/// A point `(n, t)` with `t` a multiple of `tau_n`; `n = 0` is the boundary row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub scale: u32,
    pub time: DyadicTime,
}

impl LatticePoint {
    pub fn new(scale: u32, time: DyadicTime) -> Result<Self> {
        if !time.on_scale(scale) {
            return Err(Error::NotOnLattice {
                scale,
                time: time.to_string(),
            });
        }
        Ok(Self { scale, time })
    }

    pub fn at_index(scale: u32, index: u64) -> Self {
        Self {
            scale,
            time: DyadicTime::from_index(index, scale),
        }
    }

    /// `t / tau_n`.
    pub fn index(&self) -> u64 {
        self.time
            .index_at(self.scale)
            .expect("lattice point index exceeds u64")
    }

    pub fn parity(&self) -> Parity {
        Parity::of_index(self.index())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, t={})", self.scale, self.time)
    }
}

/// Finite partial assignment of values to lattice points, stored row by row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LatticeField {
    rows: Vec<Vec<Option<Value>>>,
}

impl LatticeField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_index(&mut self, scale: u32, index: u64, value: Value) {
        let s = scale as usize;
        if self.rows.len() <= s {
            self.rows.resize_with(s + 1, Vec::new);
        }
        let row = &mut self.rows[s];
        let i = index as usize;
        if row.len() <= i {
            row.resize(i + 1, None);
        }
        row[i] = Some(value);
    }

    pub fn insert(&mut self, point: &LatticePoint, value: Value) {
        self.insert_index(point.scale, point.index(), value);
    }

    pub fn get_index(&self, scale: u32, index: u64) -> Option<Value> {
        self.rows
            .get(scale as usize)
            .and_then(|row| row.get(index as usize))
            .copied()
            .flatten()
    }

    pub fn get(&self, point: &LatticePoint) -> Option<Value> {
        self.get_index(point.scale, point.index())
    }

    pub fn len(&self) -> usize {
        self.rows.iter().flatten().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Highest scale with a stored row.
    pub fn max_scale(&self) -> Option<u32> {
        self.rows
            .iter()
            .rposition(|row| row.iter().any(Option::is_some))
            .map(|s| s as u32)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u64, Value)> + '_ {
        self.rows.iter().enumerate().flat_map(|(s, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(i, v)| v.map(|v| (s as u32, i as u64, v)))
        })
    }

    /// Flips a bit (or negates a phase) at one point; used for fault injection.
    pub fn perturb(&mut self, scale: u32, index: u64) {
        if let Some(v) = self.get_index(scale, index) {
            let flipped = match v {
                Value::Bit(b) => Value::Bit(!b),
                Value::Phase(u) => Value::Phase(u.wrapping_add(1 << 63)),
            };
            self.insert_index(scale, index, flipped);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Equation,
    Initial,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub point: LatticePoint,
    pub kind: ViolationKind,
    pub expected: Value,
    pub found: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Residual {
    /// No point of the field had its full stencil available.
    NothingCheckable,
    Checked {
        checked: usize,
        violations: Vec<Violation>,
    },
}

impl Residual {
    pub fn passes(&self) -> bool {
        matches!(self, Residual::Checked { violations, .. } if violations.is_empty())
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Residual::Checked { violations, .. } => violations,
            Residual::NothingCheckable => &[],
        }
    }
}

/// Checks the governing relation, initial data and boundary data wherever the
/// field holds every value a point's relation refers to.
pub fn residual_check(field: &LatticeField, problem: &ProblemSpec) -> Result<Residual> {
    residual_check_within(field, problem, u32::MAX)
}

/// As [`residual_check`], but only points with `scale <= max_scale` are
/// checked; deeper values still serve as stencil inputs.
pub fn residual_check_within(
    field: &LatticeField,
    problem: &ProblemSpec,
    max_scale: u32,
) -> Result<Residual> {
    let model = &problem.model;
    let mut checked = 0usize;
    let mut violations = Vec::new();
    let mut report = |scale: u32, index: u64, kind, expected: Value, found: Value| {
        if expected != found {
            violations.push(Violation {
                point: LatticePoint::at_index(scale, index),
                kind,
                expected,
                found,
            });
        }
    };

    for (scale, index, found) in field.iter() {
        if scale > max_scale {
            break;
        }
        if scale == 0 {
            checked += 1;
            report(0, index, ViolationKind::Boundary, problem.boundary_at(index), found);
            continue;
        }
        if index == 0 {
            checked += 1;
            report(scale, 0, ViolationKind::Initial, problem.initial_at(scale), found);
            continue;
        }
        let parity = Parity::of_index(index);
        let Some(prev_self) = field.get_index(scale, index - 1) else {
            continue;
        };
        let Some(prev_next) = field.get_index(scale + 1, 2 * (index - 1)) else {
            continue;
        };
        let zero = model.space().zero();
        let (parent, prev2) = match parity {
            Parity::Odd => (zero, zero),
            Parity::Even => {
                let parent = field.get_index(scale - 1, (index - 2) / 2);
                let prev2 = field.get_index(scale, index - 2);
                match (parent, prev2) {
                    (Some(p), Some(s)) => (p, s),
                    _ => continue,
                }
            }
        };
        checked += 1;
        let expected = local_update(model, parity, prev_self, prev_next, parent, prev2)?;
        report(scale, index, ViolationKind::Equation, expected, found);
    }

    if checked == 0 {
        Ok(Residual::NothingCheckable)
    } else {
        Ok(Residual::Checked {
            checked,
            violations,
        })
    }
}
