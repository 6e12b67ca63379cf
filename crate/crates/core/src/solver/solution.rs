//! Regularized solutions on a finite time window.

use num_traits::ToPrimitive;

use super::engine::{row_len, sweep, BitRule, PhaseRule};
use super::reg::RegSpec;
use crate::error::{Error, Result};
use crate::lattice::{residual_check_within, DyadicTime, LatticeField, Residual, LatticePoint, ModelSpec, ProblemSpec, Space, State, Value};
use crate::stochastic::NoiseStream;

/// Upper bound on stored lattice cells for a single solution.
pub const MAX_CELLS: u64 = 1 << 28;

/// What drives the first unresolved scale `N + 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Driver {
    Reg(RegSpec),
    /// `u_{N+1}(t) = x_{t / tau_{N+1}}`; deeper scales zero.
    Noise(NoiseStream),
    /// Zero except at the listed `(index, value)` cells of scale `N + 1`.
    Pinned(Vec<(u64, Value)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Rows {
    Bit(Vec<Vec<u8>>),
    Phase(Vec<Vec<u64>>),
}

/// Values `u_n(t)` for `0 <= n <= N + 1` and `0 <= t <= horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    problem: ProblemSpec,
    level: u32,
    driver: Driver,
    horizon: DyadicTime,
    rows: Rows,
    /// For table regularizations: the state of scales `N+1, N+2, ...` at each multiple of `tau_N`.
    tails: Option<Vec<State>>,
}

/// Solves the regularized system at level `N` up to `horizon`.
pub fn solve_regularized(
    problem: &ProblemSpec,
    level: u32,
    reg: &RegSpec,
    horizon: &DyadicTime,
) -> Result<Solution> {
    solve_driven(problem, level, Driver::Reg(reg.clone()), horizon)
}

/// Solves with an arbitrary driver of scale `N + 1`.
pub fn solve_driven(
    problem: &ProblemSpec,
    level: u32,
    driver: Driver,
    horizon: &DyadicTime,
) -> Result<Solution> {
    if level == 0 {
        return Err(Error::InvalidArgument("regularization level must be at least 1".into()));
    }
    let space = problem.model.space();
    match &driver {
        Driver::Reg(reg) => reg.validate(space)?,
        Driver::Noise(noise) => {
            noise.spec.validate()?;
            if noise.spec.space() != space {
                return Err(Error::SpaceMismatch {
                    expected: space.name(),
                    found: noise.spec.space().name(),
                });
            }
        }
        Driver::Pinned(cells) => {
            if let Some((_, v)) = cells.iter().find(|(_, v)| v.space() != space) {
                return Err(Error::SpaceMismatch {
                    expected: space.name(),
                    found: v.space().name(),
                });
            }
        }
    }

    let lens = row_lengths(horizon, level)?;
    let (top_row, tails) = first_unresolved_row(problem, level, &driver, lens[level as usize + 1])?;
    let rows = match problem.model {
        ModelSpec::Bit { f, g } => {
            let mut rows = init_rows(problem, &lens, top_row, |v| v.as_bit())?;
            sweep(&BitRule { f, g }, level, &mut rows);
            Rows::Bit(rows)
        }
        ModelSpec::Phase { f, g } => {
            let mut rows = init_rows(problem, &lens, top_row, |v| v.as_phase())?;
            sweep(&PhaseRule { f, g }, level, &mut rows);
            Rows::Phase(rows)
        }
    };
    Ok(Solution {
        problem: problem.clone(),
        level,
        driver,
        horizon: horizon.clone(),
        rows,
        tails,
    })
}

pub(crate) fn row_lengths(horizon: &DyadicTime, level: u32) -> Result<Vec<usize>> {
    let too_big = || Error::OutOfRange(format!("horizon {horizon} at level {level} needs too many cells"));
    let num = horizon.numerator().to_u64().ok_or_else(too_big)?;
    let lens = (0..=level + 1)
        .map(|n| row_len(num, horizon.level(), n))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(too_big)?;
    let total: u64 = lens.iter().map(|&l| l as u64).sum();
    if total > MAX_CELLS {
        return Err(too_big());
    }
    Ok(lens)
}

fn first_unresolved_row(
    problem: &ProblemSpec,
    level: u32,
    driver: &Driver,
    len: usize,
) -> Result<(Vec<Value>, Option<Vec<State>>)> {
    let zero = problem.model.space().zero();
    Ok(match driver {
        Driver::Reg(RegSpec::Cutoff) => (vec![zero; len], None),
        Driver::Reg(RegSpec::ConstAt { value }) => (vec![*value; len], None),
        Driver::Reg(RegSpec::MapReg { table }) => {
            let steps = (len - 1) / 2;
            let mut tails = Vec::with_capacity(steps + 1);
            tails.push(problem.initial.shift_up_by(level as usize));
            for k in 1..=steps {
                let next = table.apply(&tails[k - 1])?;
                tails.push(next);
            }
            // scale N+1 changes only at multiples of tau_N; odd cells keep the last value
            let row = (0..len).map(|i| tails[i / 2].get(1)).collect();
            (row, Some(tails))
        }
        Driver::Noise(noise) => (noise.values(len), None),
        Driver::Pinned(cells) => {
            let mut row = vec![zero; len];
            for &(i, v) in cells {
                if let Some(slot) = row.get_mut(i as usize) {
                    *slot = v;
                }
            }
            (row, None)
        }
    })
}

fn init_rows<E: Copy + Default>(
    problem: &ProblemSpec,
    lens: &[usize],
    top_row: Vec<Value>,
    conv: impl Fn(Value) -> Result<E>,
) -> Result<Vec<Vec<E>>> {
    let top = lens.len() - 1;
    let mut rows: Vec<Vec<E>> = Vec::with_capacity(lens.len());
    rows.push(
        (0..lens[0])
            .map(|t| conv(problem.boundary_at(t as u64)))
            .collect::<Result<_>>()?,
    );
    for (n, &len) in lens.iter().enumerate().take(top).skip(1) {
        let mut row = vec![E::default(); len];
        row[0] = conv(problem.initial_at(n as u32))?;
        rows.push(row);
    }
    rows.push(top_row.into_iter().map(conv).collect::<Result<_>>()?);
    Ok(rows)
}

impl Solution {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn horizon(&self) -> &DyadicTime {
        &self.horizon
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn driver(&self) -> &Driver {
        &self.driver
    }

    pub fn space(&self) -> Space {
        self.problem.model.space()
    }

    /// Number of stored cells at `scale` (indices `0..len`).
    pub fn row_len(&self, scale: u32) -> usize {
        let s = scale as usize;
        match &self.rows {
            Rows::Bit(r) => r.get(s).map_or(0, Vec::len),
            Rows::Phase(r) => r.get(s).map_or(0, Vec::len),
        }
    }

    /// `u_scale(index * tau_scale)` if inside the window.
    pub fn value(&self, scale: u32, index: u64) -> Option<Value> {
        let (s, i) = (scale as usize, usize::try_from(index).ok()?);
        match &self.rows {
            Rows::Bit(r) => r.get(s)?.get(i).map(|&b| Value::bit(b)),
            Rows::Phase(r) => r.get(s)?.get(i).map(|&p| Value::Phase(p)),
        }
    }

    pub fn value_at(&self, point: &LatticePoint) -> Option<Value> {
        self.value(point.scale, point.time.index_at(point.scale)?)
    }

    /// Bit rows as raw bytes, for fast inspection.
    pub fn bit_row(&self, scale: u32) -> Option<&[u8]> {
        match &self.rows {
            Rows::Bit(r) => r.get(scale as usize).map(Vec::as_slice),
            Rows::Phase(_) => None,
        }
    }

    /// `(u_from(t), u_{from+1}(t), ...)`, including the regularized scales.
    pub fn state_at(&self, t: &DyadicTime, from: u32) -> Result<State> {
        let n = self.level;
        if from == 0 || from > n + 1 || !t.on_scale(from) || *t > self.horizon {
            return Err(Error::NotOnLattice {
                scale: from,
                time: t.to_string(),
            });
        }
        let mut prefix = Vec::with_capacity((n + 2 - from) as usize);
        for s in from..=n {
            let idx = t.index_at(s).expect("inside window");
            prefix.push(self.value(s, idx).expect("inside window"));
        }
        match &self.tails {
            Some(tails) => {
                let k = t.index_at(n + 1).expect("inside window") / 2;
                let tail = &tails[k as usize];
                prefix.extend(tail.take(tail.depth()));
                Ok(State::new(prefix, tail.tail()))
            }
            None => {
                let idx = t.index_at(n + 1).expect("inside window");
                prefix.push(self.value(n + 1, idx).expect("inside window"));
                Ok(State::new(prefix, self.space().zero()))
            }
        }
    }

    /// All stored values of scales `0..=N+1` as a lattice field.
    pub fn to_field(&self) -> LatticeField {
        let mut field = LatticeField::new();
        for scale in 0..=self.level + 1 {
            for i in 0..self.row_len(scale) as u64 {
                field.insert_index(scale, i, self.value(scale, i).expect("in range"));
            }
        }
        field
    }

    /// Residual of the governing relation on the resolved scales `0..=N`.
    pub fn residual(&self) -> Result<Residual> {
        residual_check_within(&self.to_field(), &self.problem, self.level)
    }

    /// Iterates `(scale, index, value)` over all stored cells.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u64, Value)> + '_ {
        (0..=self.level + 1).flat_map(move |s| {
            (0..self.row_len(s) as u64).map(move |i| (s, i, self.value(s, i).expect("in range")))
        })
    }
}
