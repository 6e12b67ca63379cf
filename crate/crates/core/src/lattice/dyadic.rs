//! Exact dyadic rational times `t = m * 2^-n`.
//!
//! Every lattice time is a dyadic rational, so time arithmetic never touches
//! floating point. The representation is kept in normal form: either the
//! level is zero or the numerator is odd.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicTime {
    numerator: BigUint,
    level: u32,
}

/// Normal-form constructor accepting signed inputs; negative values are rejected.
pub fn dyadic(m: i64, n: i64) -> Result<DyadicTime> {
    if m < 0 || n < 0 {
        return Err(Error::InvalidArgument(format!(
            "dyadic time needs non-negative parts, got ({m}, {n})"
        )));
    }
    let level = u32::try_from(n).map_err(|_| Error::OutOfRange(format!("level {n}")))?;
    Ok(DyadicTime::from_parts(BigUint::from(m as u64), level))
}

impl DyadicTime {
    pub fn new(numerator: u64, level: u32) -> Self {
        Self::from_parts(BigUint::from(numerator), level)
    }

    pub fn from_parts(mut numerator: BigUint, mut level: u32) -> Self {
        if numerator.is_zero() {
            return Self { numerator, level: 0 };
        }
        let tz = numerator.trailing_zeros().unwrap_or(0);
        let shift = tz.min(u64::from(level)) as u32;
        numerator >>= shift;
        level -= shift;
        Self { numerator, level }
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn integer(i: u64) -> Self {
        Self::new(i, 0)
    }

    /// The turn-over time `tau_n = 2^-n`.
    pub fn tau(n: u32) -> Self {
        Self::new(1, n)
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// True when `t` is a multiple of `tau_scale`.
    pub fn on_scale(&self, scale: u32) -> bool {
        self.level <= scale
    }

    /// `t / tau_scale` when it is an integer that fits in `u64`.
    pub fn index_at(&self, scale: u32) -> Option<u64> {
        if self.level > scale {
            return None;
        }
        let shifted = &self.numerator << (scale - self.level);
        shifted.to_u64()
    }

    /// Builds `index * tau_scale`.
    pub fn from_index(index: u64, scale: u32) -> Self {
        Self::new(index, scale)
    }

    pub fn floor(&self) -> BigUint {
        &self.numerator >> self.level
    }

    /// Splits `t = i + tau_{n_1} + ... + tau_{n_c}` with `1 <= n_1 < ... < n_c`.
    pub fn decompose(&self) -> (BigUint, Vec<u32>) {
        let i = self.floor();
        let scales = (1..=self.level)
            .filter(|&k| self.numerator.bit(u64::from(self.level - k)))
            .collect();
        (i, scales)
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let level = self.level.max(other.level);
        let a = &self.numerator << (level - self.level);
        let b = &other.numerator << (level - other.level);
        if a < b {
            None
        } else {
            Some(Self::from_parts(a - b, level))
        }
    }

    pub fn to_f64(&self) -> f64 {
        let m = self.numerator.to_f64().unwrap_or(f64::INFINITY);
        m * (-(f64::from(self.level))).exp2()
    }
}

/// Splits a lattice time into its integer part and the strictly increasing
/// list of scales in its binary fractional part.
pub fn time_decompose(t: &DyadicTime) -> (BigUint, Vec<u32>) {
    t.decompose()
}

impl Ord for DyadicTime {
    fn cmp(&self, other: &Self) -> Ordering {
        let level = self.level.max(other.level);
        let a = &self.numerator << (level - self.level);
        let b = &other.numerator << (level - other.level);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicTime {
    type Output = DyadicTime;

    fn add(self, rhs: Self) -> DyadicTime {
        let level = self.level.max(rhs.level);
        let a = &self.numerator << (level - self.level);
        let b = &rhs.numerator << (level - rhs.level);
        DyadicTime::from_parts(a + b, level)
    }
}

impl Add for DyadicTime {
    type Output = DyadicTime;

    fn add(self, rhs: Self) -> DyadicTime {
        &self + &rhs
    }
}

impl fmt::Display for DyadicTime {
    /// Exact decimal rendering; `m / 2^n = m * 5^n / 10^n` always terminates.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            return write!(f, "{}", self.numerator);
        }
        let scaled = &self.numerator * BigUint::from(5u32).pow(self.level);
        let ten_n = BigUint::from(10u32).pow(self.level);
        let (int, frac) = scaled.div_rem(&ten_n);
        let digits = frac.to_string();
        let pad = self.level as usize - digits.len();
        let frac = format!("{}{}", "0".repeat(pad), digits);
        write!(f, "{}.{}", int, frac.trim_end_matches('0'))
    }
}

impl FromStr for DyadicTime {
    type Err = Error;

    /// Accepts integers, finite binary decimals (`2.625`) and `m/2^k` fractions (`21/8`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("not a dyadic time: {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: BigUint = num.trim().parse().map_err(|_| bad())?;
            let den: BigUint = den.trim().parse().map_err(|_| bad())?;
            if den.is_zero() || den.count_ones() != 1 {
                return Err(bad());
            }
            let level = den.trailing_zeros().unwrap_or(0);
            let level = u32::try_from(level).map_err(|_| bad())?;
            return Ok(Self::from_parts(num, level));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let int: BigUint = if int.is_empty() {
                BigUint::zero()
            } else {
                int.parse().map_err(|_| bad())?
            };
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let k = frac.len() as u32;
            let frac: BigUint = frac.parse().map_err(|_| bad())?;
            // frac / 10^k = frac * 2^k / (5^k * 2^(2k)) ... dyadic iff 5^k divides frac
            let five_k = BigUint::from(5u32).pow(k);
            let (q, r) = frac.div_rem(&five_k);
            if !r.is_zero() {
                return Err(bad());
            }
            // frac / 10^k = q / 2^k
            let num = (int << k) + q;
            return Ok(Self::from_parts(num, k));
        }
        let int: BigUint = s.parse().map_err(|_| bad())?;
        Ok(Self::from_parts(int, 0))
    }
}

#[derive(Serialize, Deserialize)]
struct TimeRepr {
    num: String,
    level: u32,
}

impl Serialize for DyadicTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TimeRepr {
            num: self.numerator.to_string(),
            level: self.level,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DyadicTime {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = TimeRepr::deserialize(deserializer)?;
        let num: BigUint = repr.num.parse().map_err(serde::de::Error::custom)?;
        Ok(Self::from_parts(num, repr.level))
    }
}
