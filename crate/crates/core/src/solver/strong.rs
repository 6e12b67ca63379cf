//! Strong solutions, blowup times and non-uniqueness of weak solutions.

use serde::{Deserialize, Serialize};

use super::reg::RegSpec;
use super::solution::{solve_driven, solve_regularized, Driver, Solution};
use crate::error::{Error, Result};
use crate::lattice::{DyadicTime, LatticePoint, ProblemSpec, Value};

/// Number of scales reported in a blowup staircase.
pub const STAIRCASE_SCALES: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlowupOutcome {
    GlobalStrong,
    BlowupAt { time: DyadicTime },
    /// No closed form applies, or the blowup lies beyond the horizon.
    HorizonReached,
}

/// Scale `n` of the self-similar cascade: zero before `first_one`, one at
/// `first_one = T - 2 tau_n`, and `next` at `T - tau_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaircaseStep {
    pub scale: u32,
    pub first_one: DyadicTime,
    pub next: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupReport {
    pub outcome: BlowupOutcome,
    /// Largest `n` with `a_n != 0`, or 0.
    pub n_max0: u32,
    /// First `t` with `b_t != 0`, if any.
    pub t_bc: Option<u64>,
    pub trace: Vec<StaircaseStep>,
    /// The bounded-support solution on the horizon for global strong solutions.
    #[serde(skip)]
    pub field: Option<Solution>,
}

/// Largest scale carrying a nonzero initial value.
pub fn n_max0(problem: &ProblemSpec) -> Result<u32> {
    if !problem.initial.tail().is_zero() {
        return Err(Error::Unsupported("initial data with infinite support".into()));
    }
    Ok(problem.initial.depth() as u32)
}

/// First boundary time with a nonzero value.
pub fn first_boundary_time(problem: &ProblemSpec) -> Option<u64> {
    problem.boundary.iter().position(|v| !v.is_zero()).map(|t| t as u64)
}

/// Strong-solution analysis for symbolic models with `f(0,0) = g(0,0) = 0`.
pub fn solve_strong(problem: &ProblemSpec, horizon: &DyadicTime) -> Result<BlowupReport> {
    let (f, g) = problem
        .model
        .bit_tables()
        .map_err(|_| Error::Unsupported("strong solutions are defined for bit models only".into()))?;
    let n_max = n_max0(problem)?;
    let t_bc = first_boundary_time(problem);
    let mut report = BlowupReport {
        outcome: BlowupOutcome::HorizonReached,
        n_max0: n_max,
        t_bc,
        trace: Vec::new(),
        field: None,
    };
    if !problem.model.zero_is_stationary() {
        return Ok(report);
    }

    let bounded = g.eval(1, 0) == 0 || (n_max == 0 && t_bc.is_none());
    if bounded {
        // no scale below the initial support can ever switch on
        let level = n_max.max(1);
        report.field = Some(solve_regularized(problem, level, &RegSpec::Cutoff, horizon)?);
        report.outcome = BlowupOutcome::GlobalStrong;
        return Ok(report);
    }

    let blowup = if n_max == 0 {
        DyadicTime::integer(t_bc.expect("checked above") + 2)
    } else {
        DyadicTime::new(2, n_max)
    };
    let start = n_max.max(1);
    let next = Value::bit(f.eval(1, 0));
    report.trace = (start..start + STAIRCASE_SCALES)
        .map(|n| StaircaseStep {
            scale: n,
            first_one: blowup.checked_sub(&DyadicTime::new(2, n)).expect("T >= 2 tau_n"),
            next,
        })
        .collect();
    report.outcome = if blowup <= *horizon {
        BlowupOutcome::BlowupAt { time: blowup }
    } else {
        BlowupOutcome::HorizonReached
    };
    Ok(report)
}

/// Two regularized solutions that agree up to the blowup time and differ after.
#[derive(Debug, Clone)]
pub struct WitnessPair {
    pub blowup: DyadicTime,
    pub n_max0: u32,
    /// Zero cutoff below scale `N`.
    pub cutoff: Solution,
    /// Scale `N + 1` switched on at `T` and `T + tau_N` only.
    pub modified: Solution,
}

impl WitnessPair {
    /// The earliest point (then smallest scale) where the two fields differ,
    /// with the cutoff and modified values.
    pub fn first_disagreement(&self) -> Option<(LatticePoint, Value, Value)> {
        let mut best: Option<(LatticePoint, Value, Value)> = None;
        for scale in 0..=self.cutoff.level() {
            for i in 0..self.cutoff.row_len(scale) as u64 {
                let (x, y) = (self.cutoff.value(scale, i)?, self.modified.value(scale, i)?);
                if x != y {
                    let p = LatticePoint::at_index(scale, i);
                    if best.as_ref().is_none_or(|(q, _, _)| (&p.time, p.scale) < (&q.time, q.scale)) {
                        best = Some((p, x, y));
                    }
                    break;
                }
            }
        }
        best
    }
}

/// Builds the cutoff solution and the modified-regularization solution of a
/// blowup problem on the window `[0, T + 2 tau_{n_max(0) + 2}]`.
pub fn nonuniqueness_witness(problem: &ProblemSpec, level: u32) -> Result<WitnessPair> {
    let far = DyadicTime::integer(u64::MAX >> 8);
    let report = solve_strong(problem, &far)?;
    let BlowupOutcome::BlowupAt { time: blowup } = report.outcome else {
        return Err(Error::InvalidArgument("problem does not blow up".into()));
    };
    let first = report.n_max0 + 2;
    if level < first {
        return Err(Error::InvalidArgument(format!(
            "level {level} too small: the witness needs N >= {first}"
        )));
    }
    let horizon = &blowup + &DyadicTime::new(2, first);
    let cutoff = solve_regularized(problem, level, &RegSpec::Cutoff, &horizon)?;
    let at = blowup.index_at(level + 1).expect("T is on every fine scale");
    let modified = solve_driven(
        problem,
        level,
        Driver::Pinned(vec![(at, Value::ONE_BIT), (at + 2, Value::ONE_BIT)]),
        &horizon,
    )?;
    Ok(WitnessPair {
        blowup,
        n_max0: report.n_max0,
        cutoff,
        modified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{MODEL_A, MODEL_B, PHASE_MODEL};

    #[test]
    fn published_blowup_times() {
        let far = DyadicTime::integer(100);
        let a = ProblemSpec::bits(MODEL_A, &[1], &[1, 0]).unwrap();
        let r = solve_strong(&a, &far).unwrap();
        assert_eq!(r.outcome, BlowupOutcome::BlowupAt { time: DyadicTime::integer(1) });
        let b = ProblemSpec::bits(MODEL_B, &[0, 1], &[1]).unwrap();
        let r = solve_strong(&b, &far).unwrap();
        assert_eq!(r.outcome, BlowupOutcome::BlowupAt { time: DyadicTime::tau(1) });
        let c = ProblemSpec::bits(MODEL_B, &[], &[0, 0, 1]).unwrap();
        let r = solve_strong(&c, &far).unwrap();
        assert_eq!(r.t_bc, Some(2));
        assert_eq!(r.outcome, BlowupOutcome::BlowupAt { time: DyadicTime::integer(4) });
        let r = solve_strong(&c, &DyadicTime::integer(3)).unwrap();
        assert_eq!(r.outcome, BlowupOutcome::HorizonReached);
    }

    #[test]
    fn phase_models_are_rejected() {
        let p = ProblemSpec::zero(PHASE_MODEL);
        assert!(solve_strong(&p, &DyadicTime::integer(1)).is_err());
    }

    #[test]
    fn zero_data_is_globally_strong() {
        let p = ProblemSpec::zero(MODEL_B);
        let r = solve_strong(&p, &DyadicTime::integer(2)).unwrap();
        assert_eq!(r.outcome, BlowupOutcome::GlobalStrong);
    }

    #[test]
    fn witness_values_follow_the_predicted_pattern() {
        let p = ProblemSpec::bits(MODEL_B, &[0, 1], &[1]).unwrap();
        let w = nonuniqueness_witness(&p, 8).unwrap();
        let t = &w.blowup;
        for n in 4..=8u32 {
            let at = |s: &Solution, k: u64| {
                s.value_at(&LatticePoint::new(n, t + &DyadicTime::new(k, n)).unwrap()).unwrap()
            };
            let expect_cut = if n < 8 { [1, 1, 0] } else { [at(&w.cutoff, 0).as_bit().unwrap(), at(&w.cutoff, 1).as_bit().unwrap(), at(&w.cutoff, 2).as_bit().unwrap()] };
            for k in 0..3 {
                assert_eq!(at(&w.cutoff, k).as_bit().unwrap(), expect_cut[k as usize], "cutoff n={n} k={k}");
                assert_eq!(at(&w.modified, k), Value::ONE_BIT, "modified n={n} k={k}");
            }
        }
        let (p, x, y) = w.first_disagreement().unwrap();
        assert!(p.time > w.blowup);
        assert_ne!(x, y);
    }
}
