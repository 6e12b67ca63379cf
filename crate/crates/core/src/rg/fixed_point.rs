use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{Space, State, Value, MODEL_A};
use crate::solver::{FlowMap, Provenance};

/// The inviscid-limit half-time map of model A:
/// `(f(a_1,a_2), g(a_1,a_2), z_3, z_4, ...)` with `z_n = 1` iff some
/// `a_k != 0` for `2 <= k <= n`.
pub fn fixed_point_a(a: &State) -> Result<State> {
    if a.space() != Space::Bit {
        return Err(Error::SpaceMismatch {
            expected: "bit",
            found: a.space().name(),
        });
    }
    let (a1, a2) = (a.get(1), a.get(2));
    let head = vec![MODEL_A.f(a1, a2)?, MODEL_A.g(a1, a2)?];
    let first_on = a
        .prefix()
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, v)| !v.is_zero())
        .map(|(i, _)| i + 1)
        .or_else(|| (!a.tail().is_zero()).then_some(a.depth().max(1) + 1));
    Ok(match first_on {
        None => State::new(head, Value::ZERO_BIT),
        Some(k) => {
            let mut prefix = head;
            prefix.extend((3..k).map(|_| Value::ZERO_BIT));
            State::new(prefix, Value::ONE_BIT)
        }
    })
}

/// [`fixed_point_a`] as an (unbounded-depth) flow map.
pub fn fixed_point_a_map() -> FlowMap {
    FlowMap::new(Space::Bit, None, Provenance::FixedPointA, fixed_point_a)
}

/// A random bit map reading `in_depth` components and writing `out_depth`.
pub fn random_bit_map<R: Rng + ?Sized>(rng: &mut R, in_depth: usize, out_depth: usize) -> FlowMap {
    let mut table = HashMap::new();
    for code in 0u32..(1 << in_depth) {
        let key = (0..in_depth).map(|i| Value::bit((code >> i & 1) as u8)).collect();
        let out: Vec<u8> = (0..out_depth).map(|_| rng.random_range(0..2)).collect();
        table.insert(key, State::bits(&out));
    }
    FlowMap::from_table(Space::Bit, in_depth, "random table", table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let z = State::zero(Space::Bit);
        assert_eq!(fixed_point_a(&z).unwrap(), z);
        let out = fixed_point_a(&State::bits(&[0, 1])).unwrap();
        assert_eq!(out, State::new(vec![Value::ZERO_BIT], Value::ONE_BIT));
        assert_eq!(fixed_point_a(&State::bits(&[1])).unwrap(), State::bits(&[1, 1]));
        let out = fixed_point_a(&State::bits(&[1, 0, 0, 0, 1])).unwrap();
        assert_eq!(out.take(6), State::bits(&[1, 1, 0, 0, 1, 1]).take(6));
        assert_eq!(out.tail(), Value::ONE_BIT);
        // infinite tail of ones starting beyond the prefix
        let ones = State::new(vec![Value::ONE_BIT], Value::ONE_BIT);
        assert_eq!(fixed_point_a(&ones).unwrap().take(4), State::bits(&[0, 1, 1, 1]).take(4));
    }

    #[test]
    fn phase_input_is_rejected() {
        assert!(fixed_point_a(&State::phases(&[1])).is_err());
    }
}
