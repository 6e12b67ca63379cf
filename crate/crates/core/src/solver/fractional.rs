//! States at arbitrary lattice times by composing half-time and unit-time maps.

use num_traits::ToPrimitive;

use super::flow::{flow_phi, flow_psi, FlowMap};
use super::reg::RegSpec;
use crate::error::{Error, Result};
use crate::lattice::{DyadicTime, ProblemSpec, State, Value};

/// `(u_{n_c}(t), u_{n_c+1}(t), ...)` where `t = i + tau_{n_1} + ... + tau_{n_c}`.
///
/// Integer steps use the unit-time maps with the boundary value of each unit
/// interval; each fractional part `tau_{n_k}` applies `psi^(N - n_k + 1)` to
/// the state shifted down to scale `n_k`.
pub fn eval_fractional(problem: &ProblemSpec, level: u32, reg: &RegSpec, t: &DyadicTime) -> Result<State> {
    let (whole, scales) = t.decompose();
    if let Some(&deepest) = scales.last() {
        if deepest > level {
            return Err(Error::ScaleBeyondLevel {
                needed: deepest,
                level,
            });
        }
    }
    let whole = whole
        .to_u64()
        .ok_or_else(|| Error::OutOfRange(format!("integer part of {t}")))?;
    let model = problem.model;

    let mut phis: Vec<(Value, FlowMap)> = Vec::new();
    let mut u = problem.initial.clone();
    for j in 0..whole {
        let b = problem.boundary_at(j);
        let phi = match phis.iter().find(|(v, _)| *v == b) {
            Some((_, m)) => m.clone(),
            None => {
                let m = flow_phi(model, level, reg.clone(), b)?;
                phis.push((b, m.clone()));
                m
            }
        };
        u = phi.apply(&u)?;
    }

    let mut prev = 1;
    for &n in &scales {
        let psi = flow_psi(model, level - n + 1, reg.clone())?;
        u = psi.apply(&u.shift_up_by((n - prev) as usize))?;
        prev = n;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{MODEL_A, MODEL_B};
    use crate::solver::solve_regularized;

    #[test]
    fn quarter_time_matches_simulation() {
        let p = ProblemSpec::bits(MODEL_A, &[1, 0, 1, 1, 0, 1], &[]).unwrap();
        let t: DyadicTime = "0.25".parse().unwrap();
        let s = solve_regularized(&p, 6, &RegSpec::Cutoff, &t).unwrap();
        assert_eq!(eval_fractional(&p, 6, &RegSpec::Cutoff, &t).unwrap(), s.state_at(&t, 2).unwrap());
    }

    #[test]
    fn mixed_time_matches_simulation() {
        let p = ProblemSpec::bits(MODEL_B, &[0, 1, 0, 0, 1], &[1, 0, 1]).unwrap();
        let t: DyadicTime = "2.625".parse().unwrap();
        for reg in [RegSpec::Cutoff, RegSpec::unit()] {
            let s = solve_regularized(&p, 5, &reg, &t).unwrap();
            assert_eq!(eval_fractional(&p, 5, &reg, &t).unwrap(), s.state_at(&t, 3).unwrap());
        }
    }

    #[test]
    fn scale_beyond_level_is_rejected() {
        let p = ProblemSpec::zero(MODEL_A);
        let t = DyadicTime::tau(4);
        assert_eq!(
            eval_fractional(&p, 3, &RegSpec::Cutoff, &t),
            Err(Error::ScaleBeyondLevel { needed: 4, level: 3 })
        );
    }
}
