//! Middle-third Cantor set coordinates for binary states.
//!
//! A bit sequence `a` maps to `x = 0.c_1 c_2 ...` in base 3 with `c_n = 2 a_n`.
//! The map is an order-preserving homeomorphism onto the Cantor set, so
//! lexicographic order on states becomes the usual order on `[0, 1]`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::value::{State, Value};
use crate::error::{Error, Result};

/// Ternary digits `c_1..c_depth` (each 0 or 2).
pub fn cantor_digits(a: &State, depth: usize) -> Result<Vec<u8>> {
    (1..=depth).map(|n| a.get(n).as_bit().map(|b| 2 * b)).collect()
}

/// `x = sum_{n <= depth} c_n 3^-n`.
pub fn cantor_encode(a: &State, depth: usize) -> Result<BigRational> {
    let digits = cantor_digits(a, depth)?;
    Ok(digits_to_ratio(&digits))
}

/// Exact coordinate of the whole sequence, tail included.
pub fn cantor_value(a: &State) -> Result<BigRational> {
    let d = a.depth();
    let mut x = cantor_encode(a, d)?;
    if a.tail().as_bit()? == 1 {
        // 2 * sum_{n > d} 3^-n = 3^-d
        x += BigRational::new(BigInt::one(), BigInt::from(3u32).pow(d as u32));
    }
    Ok(x)
}

fn digits_to_ratio(digits: &[u8]) -> BigRational {
    let mut num = BigInt::zero();
    for &c in digits {
        num = num * 3 + c;
    }
    BigRational::new(num, BigInt::from(3u32).pow(digits.len() as u32))
}

/// Inverse of [`cantor_encode`] on digit lists; the tail is zero.
pub fn cantor_decode(digits: &[u8]) -> Result<State> {
    let bits = digits
        .iter()
        .enumerate()
        .map(|(i, &c)| match c {
            0 => Ok(Value::ZERO_BIT),
            2 => Ok(Value::ONE_BIT),
            1 => Err(Error::InvalidArgument(format!(
                "ternary digit 1 at position {} is outside the Cantor set",
                i + 1
            ))),
            other => Err(Error::InvalidArgument(format!("{other} is not a ternary digit"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(State::new(bits, Value::ZERO_BIT))
}

/// All zero-tail states of the given depth in increasing Cantor order.
pub fn grid_states(depth: usize) -> impl Iterator<Item = State> {
    assert!(depth < 64, "grid depth {depth} is too large to enumerate");
    (0u64..1 << depth).map(move |code| {
        let bits: Vec<u8> = (0..depth)
            .map(|i| ((code >> (depth - 1 - i)) & 1) as u8)
            .collect();
        State::bits(&bits)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn digit_map_examples() {
        assert_eq!(cantor_encode(&State::bits(&[1]), 5).unwrap(), ratio(2, 3));
        assert_eq!(cantor_encode(&State::bits(&[0, 1]), 5).unwrap(), ratio(2, 9));
        assert!(cantor_decode(&[0, 2, 1]).is_err());
        assert!(cantor_decode(&[3]).is_err());
        assert_eq!(cantor_decode(&[2, 0, 2]).unwrap(), State::bits(&[1, 0, 1]));
    }

    #[test]
    fn infinite_tail_lands_on_the_gap_edge() {
        let a = State::new(vec![Value::ZERO_BIT], Value::ONE_BIT);
        assert_eq!(cantor_value(&a).unwrap(), ratio(1, 3));
        assert!(cantor_encode(&State::bits(&[1]), 3).is_ok());
        assert!(cantor_encode(&State::phases(&[1]), 3).is_err());
    }

    #[test]
    fn grid_is_strictly_increasing_at_depth_ten() {
        let xs: Vec<_> = grid_states(10).map(|a| cantor_encode(&a, 10).unwrap()).collect();
        assert_eq!(xs.len(), 1024);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(bits in proptest::collection::vec(0u8..2, 0..24)) {
            let a = State::bits(&bits);
            let digits = cantor_digits(&a, bits.len()).unwrap();
            prop_assert_eq!(cantor_decode(&digits).unwrap(), a);
        }
    }
}
