//! Small-scale noise: distributions and index-addressable streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Space, Value};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAtom {
    /// Circle point as a 64-bit fixed-point fraction.
    pub value: u64,
    pub prob: f64,
}

/// Law of the i.i.d. variables `x_m` feeding the first unresolved scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// `P(x = 1) = num / den`.
    Bernoulli { num: u64, den: u64 },
    UniformCircle,
    DiscretePhase { atoms: Vec<PhaseAtom> },
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::Bernoulli { num: 1, den: 2 }
    }
}

impl NoiseSpec {
    pub fn bernoulli(num: u64, den: u64) -> Result<Self> {
        let spec = NoiseSpec::Bernoulli { num, den };
        spec.validate()?;
        Ok(spec)
    }

    /// The point mass at zero in either space.
    pub fn degenerate(space: Space) -> Self {
        match space {
            Space::Bit => NoiseSpec::Bernoulli { num: 0, den: 1 },
            Space::Phase => NoiseSpec::DiscretePhase {
                atoms: vec![PhaseAtom { value: 0, prob: 1.0 }],
            },
        }
    }

    pub fn space(&self) -> Space {
        match self {
            NoiseSpec::Bernoulli { .. } => Space::Bit,
            _ => Space::Phase,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseSpec::Bernoulli { num, den } if *den > 0 && num <= den => Ok(()),
            NoiseSpec::Bernoulli { num, den } => Err(Error::InvalidArgument(format!(
                "Bernoulli probability {num}/{den} outside [0, 1]"
            ))),
            NoiseSpec::UniformCircle => Ok(()),
            NoiseSpec::DiscretePhase { atoms } => {
                let total: f64 = atoms.iter().map(|a| a.prob).sum();
                if atoms.is_empty() || atoms.iter().any(|a| a.prob.is_nan() || a.prob < 0.0) || (total - 1.0).abs() > 1e-9 {
                    Err(Error::InvalidArgument(format!(
                        "phase atoms must have non-negative probabilities summing to 1, got {total}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// True when every draw is the same value.
    pub fn is_degenerate(&self) -> bool {
        match self {
            NoiseSpec::Bernoulli { num, den } => *num == 0 || num == den,
            NoiseSpec::UniformCircle => false,
            NoiseSpec::DiscretePhase { atoms } => atoms.iter().filter(|a| a.prob > 0.0).count() <= 1,
        }
    }
}

/// Maps raw random bits to draws. Dyadic Bernoulli probabilities with small
/// denominators consume only a few bits per draw; everything else one word.
#[derive(Debug, Clone)]
pub(crate) struct Decoder {
    bits: u32,
    kind: DecodeKind,
}

#[derive(Debug, Clone)]
enum DecodeKind {
    Constant(Value),
    BitBelow(u64),
    BitScaled { num: u64, den: u64 },
    Uniform,
    Atoms(Vec<(u128, u64)>),
}

impl Decoder {
    pub(crate) fn new(spec: &NoiseSpec) -> Self {
        match *spec {
            NoiseSpec::Bernoulli { num, den } => {
                let g = gcd(num, den);
                let (num, den) = (num / g, den / g);
                if num == 0 || num == den {
                    return Self {
                        bits: 0,
                        kind: DecodeKind::Constant(Value::Bit(num != 0)),
                    };
                }
                if den.is_power_of_two() && den <= 256 {
                    let b = den.trailing_zeros().next_power_of_two();
                    let threshold = num << (b - den.trailing_zeros());
                    Self {
                        bits: b,
                        kind: DecodeKind::BitBelow(threshold),
                    }
                } else {
                    Self {
                        bits: 64,
                        kind: DecodeKind::BitScaled { num, den },
                    }
                }
            }
            NoiseSpec::UniformCircle => Self {
                bits: 64,
                kind: DecodeKind::Uniform,
            },
            NoiseSpec::DiscretePhase { ref atoms } => {
                let live: Vec<_> = atoms.iter().filter(|a| a.prob > 0.0).collect();
                if live.len() == 1 {
                    return Self {
                        bits: 0,
                        kind: DecodeKind::Constant(Value::Phase(live[0].value)),
                    };
                }
                let mut cum = 0.0;
                let mut table = Vec::with_capacity(live.len());
                for (i, a) in live.iter().enumerate() {
                    cum += a.prob;
                    let bound = if i + 1 == live.len() {
                        1u128 << 64
                    } else {
                        (cum.min(1.0) * 18_446_744_073_709_551_616.0) as u128
                    };
                    table.push((bound, a.value));
                }
                Self {
                    bits: 64,
                    kind: DecodeKind::Atoms(table),
                }
            }
        }
    }

    pub(crate) fn bits(&self) -> u32 {
        self.bits
    }

    /// Decodes the low `bits` bits of `u`.
    #[inline]
    pub(crate) fn decode(&self, u: u64) -> Value {
        match &self.kind {
            DecodeKind::Constant(v) => *v,
            DecodeKind::BitBelow(t) => Value::Bit(u < *t),
            DecodeKind::BitScaled { num, den } => {
                Value::Bit(u128::from(u) * u128::from(*den) < u128::from(*num) << 64)
            }
            DecodeKind::Uniform => Value::Phase(u),
            DecodeKind::Atoms(table) => {
                let u = u128::from(u);
                let (_, v) = table.iter().find(|(b, _)| u < *b).expect("last bound is 2^64");
                Value::Phase(*v)
            }
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// The sequence `x_0, x_1, ...` for one realization, addressable by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStream {
    pub spec: NoiseSpec,
    pub seed: u64,
    pub stream: u64,
}

impl NoiseStream {
    pub fn new(spec: NoiseSpec, seed: u64, stream: u64) -> Self {
        Self { spec, seed, stream }
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// `x_m`, computed without generating its predecessors.
    pub fn value(&self, m: u64) -> Value {
        let dec = Decoder::new(&self.spec);
        let b = dec.bits();
        if b == 0 {
            return dec.decode(0);
        }
        let bit = u128::from(m) * u128::from(b);
        let word = bit / 64;
        let shift = (bit % 64) as u32;
        let mut rng = self.rng();
        rng.set_word_pos(2 * word);
        dec.decode(field(rng.next_u64(), shift, b))
    }

    /// `x_0, ..., x_{len-1}`.
    pub fn values(&self, len: usize) -> Vec<Value> {
        let dec = Decoder::new(&self.spec);
        let b = dec.bits();
        if b == 0 {
            return vec![dec.decode(0); len];
        }
        let per_word = (64 / b) as usize;
        let mut rng = self.rng();
        let mut out = Vec::with_capacity(len);
        while out.len() < len {
            let w = rng.next_u64();
            for j in 0..per_word.min(len - out.len()) {
                out.push(dec.decode(field(w, j as u32 * b, b)));
            }
        }
        out
    }
}

#[inline]
pub(crate) fn field(word: u64, shift: u32, bits: u32) -> u64 {
    if bits == 64 {
        word
    } else {
        (word >> shift) & ((1u64 << bits) - 1)
    }
}
