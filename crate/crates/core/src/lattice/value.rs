//! Lattice values and infinite-sequence states.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two supported state spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// `Z_2` with addition mod 2.
    Bit,
    /// The circle `R/Z` as 64-bit fixed point, addition mod 1.
    Phase,
}

impl Space {
    pub fn zero(self) -> Value {
        match self {
            Space::Bit => Value::Bit(false),
            Space::Phase => Value::Phase(0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Space::Bit => "bit",
            Space::Phase => "phase",
        }
    }
}

/// A single lattice value.
///
/// `Phase(u)` stands for the circle point `u / 2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Bit(bool),
    Phase(u64),
}

impl Value {
    pub const ZERO_BIT: Value = Value::Bit(false);
    pub const ONE_BIT: Value = Value::Bit(true);

    pub fn space(self) -> Space {
        match self {
            Value::Bit(_) => Space::Bit,
            Value::Phase(_) => Space::Phase,
        }
    }

    pub fn bit(b: u8) -> Value {
        Value::Bit(b != 0)
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Value::Bit(false) | Value::Phase(0))
    }

    /// Group addition (XOR for bits, wrapping for phases); fails across spaces.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Value) -> Result<Value> {
        match (self, other) {
            (Value::Bit(a), Value::Bit(b)) => Ok(Value::Bit(a ^ b)),
            (Value::Phase(a), Value::Phase(b)) => Ok(Value::Phase(a.wrapping_add(b))),
            (a, b) => Err(Error::SpaceMismatch {
                expected: a.space().name(),
                found: b.space().name(),
            }),
        }
    }

    /// Integer multiple under the group law.
    pub fn scale(self, k: i64) -> Value {
        match self {
            Value::Bit(b) => Value::Bit(b && k.rem_euclid(2) == 1),
            Value::Phase(u) => Value::Phase(u.wrapping_mul(k as u64)),
        }
    }

    pub fn as_bit(self) -> Result<u8> {
        match self {
            Value::Bit(b) => Ok(u8::from(b)),
            Value::Phase(_) => Err(Error::SpaceMismatch {
                expected: "bit",
                found: "phase",
            }),
        }
    }

    pub fn as_phase(self) -> Result<u64> {
        match self {
            Value::Phase(u) => Ok(u),
            Value::Bit(_) => Err(Error::SpaceMismatch {
                expected: "phase",
                found: "bit",
            }),
        }
    }

    /// Phase as a fraction of the circle, bits as 0.0 / 1.0.
    pub fn to_f64(self) -> f64 {
        match self {
            Value::Bit(b) => f64::from(u8::from(b)),
            Value::Phase(u) => u as f64 / 18_446_744_073_709_551_616.0,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bit(b) => write!(f, "{}", u8::from(*b)),
            Value::Phase(u) => write!(f, "{u}"),
        }
    }
}

/// A point of the sequence space: an explicit prefix followed by a constant tail.
///
/// The prefix is kept trimmed (no trailing entries equal to the tail) so
/// derived equality and hashing compare semantic sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    prefix: Vec<Value>,
    tail: Value,
}

impl State {
    pub fn new(prefix: Vec<Value>, tail: Value) -> Self {
        debug_assert!(prefix.iter().all(|v| v.space() == tail.space()));
        let mut state = Self { prefix, tail };
        state.trim();
        state
    }

    pub fn zero(space: Space) -> Self {
        Self {
            prefix: Vec::new(),
            tail: space.zero(),
        }
    }

    /// Zero-tail bit state from 0/1 entries.
    pub fn bits(bits: &[u8]) -> Self {
        Self::new(bits.iter().map(|&b| Value::bit(b)).collect(), Value::ZERO_BIT)
    }

    pub fn phases(phases: &[u64]) -> Self {
        Self::new(phases.iter().map(|&p| Value::Phase(p)).collect(), Value::Phase(0))
    }

    /// Checks that every entry lives in `space`.
    pub fn validate(&self, space: Space) -> Result<()> {
        let bad = self
            .prefix
            .iter()
            .chain(std::iter::once(&self.tail))
            .find(|v| v.space() != space);
        match bad {
            Some(v) => Err(Error::SpaceMismatch {
                expected: space.name(),
                found: v.space().name(),
            }),
            None => Ok(()),
        }
    }

    fn trim(&mut self) {
        while self.prefix.last() == Some(&self.tail) {
            self.prefix.pop();
        }
    }

    pub fn space(&self) -> Space {
        self.tail.space()
    }

    pub fn tail(&self) -> Value {
        self.tail
    }

    /// Length of the explicit (trimmed) prefix.
    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[Value] {
        &self.prefix
    }

    /// Component `a_n` with 1-based index.
    pub fn get(&self, n: usize) -> Value {
        assert!(n >= 1, "components are 1-based");
        self.prefix.get(n - 1).copied().unwrap_or(self.tail)
    }

    /// The first `d` components, tail expanded.
    pub fn take(&self, d: usize) -> Vec<Value> {
        (1..=d).map(|n| self.get(n)).collect()
    }

    /// Keeps the first `d` components and zeroes the rest.
    pub fn truncated(&self, d: usize) -> State {
        State::new(self.take(d), self.space().zero())
    }

    /// `sigma_+ : (a_1, a_2, ...) -> (a_2, a_3, ...)`.
    pub fn shift_up(&self) -> State {
        self.shift_up_by(1)
    }

    pub fn shift_up_by(&self, k: usize) -> State {
        let prefix = self.prefix.iter().skip(k).copied().collect();
        State::new(prefix, self.tail)
    }

    /// `sigma_- : (a_1, a_2, ...) -> (0, a_1, a_2, ...)`.
    pub fn shift_down(&self) -> State {
        let mut prefix = Vec::with_capacity(self.prefix.len() + 1);
        prefix.push(self.space().zero());
        prefix.extend_from_slice(&self.prefix);
        State::new(prefix, self.tail)
    }

    /// Componentwise group addition.
    pub fn add(&self, other: &State) -> Result<State> {
        let len = self.prefix.len().max(other.prefix.len());
        let prefix = (1..=len)
            .map(|n| self.get(n).add(other.get(n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(State::new(prefix, self.tail.add(other.tail)?))
    }

    /// Replaces components `n..` with the given values and a zero tail beyond.
    pub fn with_components(&self, values: &[Value]) -> State {
        let mut prefix = self.take(self.prefix.len().max(values.len()));
        for (slot, v) in prefix.iter_mut().zip(values) {
            *slot = *v;
        }
        State::new(prefix, self.tail)
    }

    /// Index of the first differing component (1-based), if any.
    pub fn first_difference(&self, other: &State) -> Option<usize> {
        let len = self.prefix.len().max(other.prefix.len());
        (1..=len)
            .find(|&n| self.get(n) != other.get(n))
            .or_else(|| (self.tail != other.tail).then_some(len + 1))
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for v in &self.prefix {
            write!(f, "{v},")?;
        }
        write!(f, "{}...)", self.tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn semantic_equality_ignores_prefix_length() {
        let a = State::new(vec![Value::ONE_BIT, Value::ZERO_BIT, Value::ZERO_BIT], Value::ZERO_BIT);
        let b = State::bits(&[1]);
        assert_eq!(a, b);
        assert_eq!(a.depth(), 1);
        let ones = State::new(vec![Value::ZERO_BIT, Value::ONE_BIT], Value::ONE_BIT);
        assert_eq!(ones.get(7), Value::ONE_BIT);
        assert_eq!(ones.first_difference(&State::bits(&[0, 1])), Some(3));
    }

    #[test]
    fn shifts() {
        let a = State::bits(&[1, 0, 1]);
        assert_eq!(a.shift_up(), State::bits(&[0, 1]));
        assert_eq!(a.shift_down(), State::bits(&[0, 1, 0, 1]));
        assert_eq!(a.shift_up_by(5), State::zero(Space::Bit));
    }

    #[test]
    fn mixed_spaces_do_not_add() {
        assert!(Value::Bit(true).add(Value::Phase(1)).is_err());
        assert!(State::bits(&[1]).validate(Space::Phase).is_err());
    }

    proptest! {
        #[test]
        fn phase_doubling_clears_in_64_steps(u in any::<u64>()) {
            let mut v = Value::Phase(u);
            for _ in 0..64 {
                v = v.scale(2);
            }
            prop_assert_eq!(v, Value::Phase(0));
        }

        #[test]
        fn bit_addition_is_an_involution(a: bool, b: bool) {
            let x = Value::Bit(a);
            let y = Value::Bit(b);
            prop_assert_eq!(x.add(y).unwrap().add(y).unwrap(), x);
        }
    }
}
