//! Ideal-system definitions: the state space and the two couplings `f`, `g`.

use serde::{Deserialize, Serialize};

use super::value::{Space, Value};
use crate::error::{Error, Result};

/// Truth table of a map `{0,1}^2 -> {0,1}`; bit `2u + v` holds the value at `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u8; 4]", into = "[u8; 4]")]
pub struct BitTable(u8);

impl BitTable {
    /// Entries in the order `(0,0), (0,1), (1,0), (1,1)`.
    pub const fn from_entries(e: [u8; 4]) -> Self {
        Self((e[0] & 1) | (e[1] & 1) << 1 | (e[2] & 1) << 2 | (e[3] & 1) << 3)
    }

    pub const fn entries(self) -> [u8; 4] {
        [self.0 & 1, self.0 >> 1 & 1, self.0 >> 2 & 1, self.0 >> 3 & 1]
    }

    #[inline]
    pub fn eval(self, u: u8, v: u8) -> u8 {
        (self.0 >> (2 * u + v)) & 1
    }

    /// Evaluates the table on 64 independent lanes at once.
    #[inline]
    pub fn eval_lanes(self, u: u64, v: u64) -> u64 {
        let mut out = 0;
        if self.0 & 1 != 0 {
            out |= !u & !v;
        }
        if self.0 & 2 != 0 {
            out |= !u & v;
        }
        if self.0 & 4 != 0 {
            out |= u & !v;
        }
        if self.0 & 8 != 0 {
            out |= u & v;
        }
        out
    }

    /// Flips the entry at `(u, v)`.
    pub fn with_flipped(self, u: u8, v: u8) -> Self {
        Self(self.0 ^ (1 << (2 * u + v)))
    }
}

impl From<[u8; 4]> for BitTable {
    fn from(e: [u8; 4]) -> Self {
        Self::from_entries(e)
    }
}

impl From<BitTable> for [u8; 4] {
    fn from(t: BitTable) -> Self {
        t.entries()
    }
}

/// `(u, v) -> alpha * u + beta * v (mod 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Affine {
    pub alpha: i64,
    pub beta: i64,
}

impl Affine {
    pub const fn new(alpha: i64, beta: i64) -> Self {
        Self { alpha, beta }
    }

    #[inline]
    pub fn eval(self, u: u64, v: u64) -> u64 {
        (self.alpha as u64)
            .wrapping_mul(u)
            .wrapping_add((self.beta as u64).wrapping_mul(v))
    }
}

impl From<[i64; 2]> for Affine {
    fn from(c: [i64; 2]) -> Self {
        Self::new(c[0], c[1])
    }
}

impl From<Affine> for [i64; 2] {
    fn from(a: Affine) -> Self {
        [a.alpha, a.beta]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "lowercase")]
pub enum ModelSpec {
    Bit { f: BitTable, g: BitTable },
    Phase { f: Affine, g: Affine },
}

/// Model A: deterministic inviscid limit.
pub const MODEL_A: ModelSpec = ModelSpec::Bit {
    f: BitTable::from_entries([0, 0, 1, 0]),
    g: BitTable::from_entries([0, 1, 1, 1]),
};

/// Model B: blowup followed by spontaneous stochasticity.
pub const MODEL_B: ModelSpec = ModelSpec::Bit {
    f: BitTable::from_entries([0, 0, 0, 1]),
    g: BitTable::from_entries([0, 1, 1, 0]),
};

/// Expanding phases: `f(u, u') = 2u + 2u' (mod 1)`, `g = 0`.
pub const PHASE_MODEL: ModelSpec = ModelSpec::Phase {
    f: Affine::new(2, 2),
    g: Affine::new(0, 0),
};

/// Parity of `t / tau_n` at a lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of_index(m: u64) -> Self {
        if m % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

impl ModelSpec {
    pub fn space(&self) -> Space {
        match self {
            ModelSpec::Bit { .. } => Space::Bit,
            ModelSpec::Phase { .. } => Space::Phase,
        }
    }

    pub fn is_bit(&self) -> bool {
        self.space() == Space::Bit
    }

    pub fn bit_tables(&self) -> Result<(BitTable, BitTable)> {
        match *self {
            ModelSpec::Bit { f, g } => Ok((f, g)),
            ModelSpec::Phase { .. } => Err(Error::Unsupported(
                "symbolic tables requested from a phase model".into(),
            )),
        }
    }

    fn check(&self, v: Value) -> Result<()> {
        if v.space() == self.space() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                expected: self.space().name(),
                found: v.space().name(),
            })
        }
    }

    /// Interaction with the smaller scale.
    pub fn f(&self, u: Value, v: Value) -> Result<Value> {
        self.check(u)?;
        self.check(v)?;
        Ok(match (*self, u, v) {
            (ModelSpec::Bit { f, .. }, Value::Bit(a), Value::Bit(b)) => {
                Value::bit(f.eval(u8::from(a), u8::from(b)))
            }
            (ModelSpec::Phase { f, .. }, Value::Phase(a), Value::Phase(b)) => {
                Value::Phase(f.eval(a, b))
            }
            _ => unreachable!("space checked above"),
        })
    }

    /// Interaction with the larger scale.
    pub fn g(&self, u: Value, v: Value) -> Result<Value> {
        self.check(u)?;
        self.check(v)?;
        Ok(match (*self, u, v) {
            (ModelSpec::Bit { g, .. }, Value::Bit(a), Value::Bit(b)) => {
                Value::bit(g.eval(u8::from(a), u8::from(b)))
            }
            (ModelSpec::Phase { g, .. }, Value::Phase(a), Value::Phase(b)) => {
                Value::Phase(g.eval(a, b))
            }
            _ => unreachable!("space checked above"),
        })
    }

    /// True when the zero field solves the equations (`f(0,0) = g(0,0) = 0`).
    pub fn zero_is_stationary(&self) -> bool {
        let z = self.space().zero();
        self.f(z, z).map(Value::is_zero).unwrap_or(false)
            && self.g(z, z).map(Value::is_zero).unwrap_or(false)
    }
}

/// The governing relation at one lattice point.
///
/// `prev_self`/`prev_next` are `u_n`, `u_{n+1}` one step `tau_n` earlier;
/// `prev2_parent`/`prev2_self` are `u_{n-1}`, `u_n` two steps earlier and only
/// enter at even `t / tau_n`.
pub fn local_update(
    model: &ModelSpec,
    parity: Parity,
    prev_self: Value,
    prev_next: Value,
    prev2_parent: Value,
    prev2_self: Value,
) -> Result<Value> {
    let f = model.f(prev_self, prev_next)?;
    match parity {
        Parity::Odd => Ok(f),
        Parity::Even => f.add(model.g(prev2_parent, prev2_self)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: Value = Value::ONE_BIT;
    const ZERO: Value = Value::ZERO_BIT;

    #[test]
    fn builtin_tables() {
        assert_eq!(MODEL_A.f(ONE, ZERO).unwrap(), ONE);
        for (u, v) in [(ZERO, ZERO), (ZERO, ONE), (ONE, ONE)] {
            assert_eq!(MODEL_A.f(u, v).unwrap(), ZERO);
        }
        for (u, v) in [(ZERO, ONE), (ONE, ZERO), (ONE, ONE)] {
            assert_eq!(MODEL_A.g(u, v).unwrap(), ONE);
        }
        assert_eq!(MODEL_B.f(ONE, ONE).unwrap(), ONE);
        assert_eq!(MODEL_B.g(ONE, ONE).unwrap(), ZERO);
        assert!(MODEL_A.zero_is_stationary() && MODEL_B.zero_is_stationary());
    }

    #[test]
    fn local_update_examples() {
        let v = local_update(&MODEL_A, Parity::Odd, ONE, ZERO, ZERO, ZERO).unwrap();
        assert_eq!(v, ONE);
        let v = local_update(&MODEL_B, Parity::Even, ONE, ONE, ONE, ONE).unwrap();
        assert_eq!(v, ONE);
        let quarter = Value::Phase(1 << 62);
        let half = Value::Phase(1 << 63);
        let v = local_update(&PHASE_MODEL, Parity::Odd, quarter, half, Value::Phase(0), Value::Phase(0));
        assert_eq!(v.unwrap(), half);
    }

    #[test]
    fn lane_evaluation_matches_scalar() {
        for mask in 0u8..16 {
            let t = BitTable(mask);
            let u = 0b1100u64;
            let v = 0b1010u64;
            let w = t.eval_lanes(u, v);
            for lane in 0..4 {
                let expect = t.eval((u >> lane & 1) as u8, (v >> lane & 1) as u8);
                assert_eq!((w >> lane & 1) as u8, expect);
            }
        }
    }

    #[test]
    fn model_json_shape() {
        let s = serde_json::to_string(&MODEL_B).unwrap();
        assert_eq!(s, r#"{"space":"bit","f":[0,0,0,1],"g":[0,1,1,0]}"#);
        let back: ModelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, MODEL_B);
    }
}
