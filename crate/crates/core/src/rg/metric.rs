use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{cantor_value, grid_states, Space, State};
use crate::solver::FlowMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    /// `max |x(psi1(a)) - x(psi2(a))|` over the grid.
    pub sup_distance: BigRational,
    /// Smallest output component (1-based) where the maps differ on the grid.
    pub first_disagreement: Option<usize>,
}

fn require_bits(psi: &FlowMap) -> Result<()> {
    if psi.space() == Space::Bit {
        Ok(())
    } else {
        Err(Error::Unsupported("Cantor coordinates exist for bit maps only".into()))
    }
}

/// Compares two bit maps on every depth-`depth` grid state with zero tail.
pub fn convergence_metric(psi1: &FlowMap, psi2: &FlowMap, depth: usize) -> Result<Convergence> {
    require_bits(psi1)?;
    require_bits(psi2)?;
    let inputs: Vec<State> = grid_states(depth).collect();
    let per_input = inputs
        .par_iter()
        .map(|a| {
            let (x, y) = (psi1.apply(a)?, psi2.apply(a)?);
            let d = (cantor_value(&x)? - cantor_value(&y)?).abs();
            Ok((d, x.first_difference(&y)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sup = BigRational::zero();
    let mut first = None::<usize>;
    for (d, k) in per_input {
        if d > sup {
            sup = d;
        }
        if let Some(k) = k {
            first = Some(first.map_or(k, |f| f.min(k)));
        }
    }
    Ok(Convergence {
        sup_distance: sup,
        first_disagreement: first,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapRow {
    pub input: State,
    pub output: State,
    #[serde(serialize_with = "ratio_string")]
    pub x_in: BigRational,
    #[serde(serialize_with = "ratio_string")]
    pub x_out: BigRational,
}

fn ratio_string<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// One row per depth-`depth` grid state, in increasing `x_in`.
pub fn map_table_export(psi: &FlowMap, depth: usize) -> Result<Vec<MapRow>> {
    require_bits(psi)?;
    let inputs: Vec<State> = grid_states(depth).collect();
    inputs
        .into_par_iter()
        .map(|a| {
            let out = psi.apply(&a)?;
            Ok(MapRow {
                x_in: cantor_value(&a)?,
                x_out: cantor_value(&out)?,
                input: a,
                output: out,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::MODEL_A;
    use crate::solver::{flow_psi, Provenance, RegSpec};
    use num_bigint::BigInt;

    #[test]
    fn identical_maps_have_zero_distance() {
        let psi = flow_psi(MODEL_A, 3, RegSpec::Cutoff).unwrap();
        let c = convergence_metric(&psi, &psi, 5).unwrap();
        assert!(c.sup_distance.is_zero());
        assert_eq!(c.first_disagreement, None);
    }

    #[test]
    fn level_one_table() {
        let psi = flow_psi(MODEL_A, 1, RegSpec::Cutoff).unwrap();
        let rows = map_table_export(&psi, 3).unwrap();
        assert_eq!(rows.len(), 8);
        let two_thirds = BigRational::new(BigInt::from(2), BigInt::from(3));
        for r in rows {
            let expect = if r.x_in >= two_thirds { two_thirds.clone() } else { BigRational::zero() };
            assert_eq!(r.x_out, expect);
        }
    }

    #[test]
    fn zero_map_table() {
        let zero = FlowMap::new(Space::Bit, Some(0), Provenance::Synthetic("zero".into()), |_| {
            Ok(State::zero(Space::Bit))
        });
        let rows = map_table_export(&zero, 2).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.x_out.is_zero()));
    }
}
