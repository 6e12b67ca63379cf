//! The circle-phase model: exact noise coefficients and the limit kernel.
//!
//! With `f(u, u') = 2u + 2u'` and `g = 0` every value is an integer
//! combination of the initial data and the noise driving scale `N + 1`.
//! At `t = 0` that scale holds `x_0`, so `a_{N+1}` never enters.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::noise::{NoiseSpec, NoiseStream};
use super::sampler::sample_solution;
use super::stats::{ks_uniform, TestResult};
use crate::error::{Error, Result};
use crate::lattice::{DyadicTime, ProblemSpec, State, Value, PHASE_MODEL};

/// Largest level for which the full expansion is enumerated; the number of
/// noise terms grows like `2^N`.
pub const MAX_EXPANSION_LEVEL: u32 = 20;

/// Largest level accepted by [`p_coefficient`].
pub const MAX_P_LEVEL: u32 = 64;

/// Coefficients carry about one bit per cell of the window, so the work
/// grows like the square of the cell count.
const P_CELL_BUDGET: u64 = 1 << 16;

/// `u_n(tau_1) = sum_k initial[k-1] a_k + sum_m c_m x_m (mod 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoefficientRow {
    pub scale: u32,
    #[serde(serialize_with = "ser_biguints")]
    pub initial: Vec<BigUint>,
    /// Nonzero noise coefficients, ascending in `m`.
    #[serde(serialize_with = "ser_noise")]
    pub noise: Vec<(u64, BigUint)>,
}

fn ser_biguints<S: serde::Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}

fn ser_noise<S: serde::Serializer>(v: &[(u64, BigUint)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(m, c)| (m, c.to_string())))
}

impl CoefficientRow {
    /// Coefficient of `x_0`.
    pub fn p(&self) -> BigUint {
        match self.noise.first() {
            Some((0, c)) => c.clone(),
            _ => BigUint::zero(),
        }
    }

    /// Evaluates the row in 64-bit fixed point.
    pub fn eval(&self, a: &State, x: impl Fn(u64) -> u64) -> Result<u64> {
        let mut acc = 0u64;
        for (k, c) in self.initial.iter().enumerate() {
            acc = acc.wrapping_add(low_word(c).wrapping_mul(a.get(k + 1).as_phase()?));
        }
        for (m, c) in &self.noise {
            acc = acc.wrapping_add(low_word(c).wrapping_mul(x(*m)));
        }
        Ok(acc)
    }
}

fn low_word(c: &BigUint) -> u64 {
    c.iter_u64_digits().next().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseCoefficients {
    pub level: u32,
    /// Rows for `n = 1..=N`.
    pub rows: Vec<CoefficientRow>,
}

impl PhaseCoefficients {
    pub fn row(&self, n: u32) -> Option<&CoefficientRow> {
        self.rows.get(n.checked_sub(1)? as usize)
    }

    /// `p_n^(N)` for `n = 1..=N`.
    pub fn p(&self) -> Vec<BigUint> {
        self.rows.iter().map(CoefficientRow::p).collect()
    }
}

/// Exact expansion of `u_n^(N)(tau_1)` for every `n <= N`.
///
/// Coefficients are accumulated backwards from the target cell: each cell
/// passes twice its weight to both cells its value is computed from.
pub fn phase_coefficients(level: u32) -> Result<PhaseCoefficients> {
    if level == 0 || level > MAX_EXPANSION_LEVEL {
        return Err(Error::OutOfRange(format!(
            "full expansion at level {level} (supported: 1..={MAX_EXPANSION_LEVEL})"
        )));
    }
    let rows = (1..=level)
        .into_par_iter()
        .map(|n| expand_row(n, level))
        .collect();
    Ok(PhaseCoefficients { level, rows })
}

fn expand_row(n: u32, level: u32) -> CoefficientRow {
    let noise_scale = level + 1;
    // Keyed by (time in units of tau_{N+1}, scale) so that `pop_last`
    // always yields a cell no later cell still feeds.
    let mut pending: BTreeMap<(u64, u32), BigUint> = BTreeMap::new();
    pending.insert((1u64 << level, n), BigUint::from(1u32));
    let mut initial = vec![BigUint::zero(); level as usize];
    let mut noise = BTreeMap::new();
    while let Some(((time, k), w)) = pending.pop_last() {
        if k == noise_scale {
            noise.insert(time, w);
            continue;
        }
        if time == 0 {
            initial[k as usize - 1] = w;
            continue;
        }
        let step = 1u64 << (noise_scale - k);
        let w2 = w << 1u32;
        *pending.entry((time - step, k)).or_default() += &w2;
        *pending.entry((time - step, k + 1)).or_default() += w2;
    }
    CoefficientRow {
        scale: n,
        initial,
        noise: noise.into_iter().collect(),
    }
}

/// `p_n^(N)` alone, propagated forward from `x_0` through the window of
/// cells that can reach `u_n(tau_1)`.
pub fn p_coefficient(n: u32, level: u32) -> Result<BigUint> {
    if level == 0 || level > MAX_P_LEVEL || n == 0 || n > level {
        return Err(Error::OutOfRange(format!(
            "p_{n} at level {level} (supported: 1 <= n <= N <= {MAX_P_LEVEL})"
        )));
    }
    // Last index at scale k that still reaches the target.
    let last = |k: u32| -> i128 {
        if k == n {
            1 << (n - 1)
        } else {
            (1i128 << (k - 1)) - (1i128 << (k - n + 1)) + 2
        }
    };
    if (n..=level).any(|k| last(k) < 0) {
        return Ok(BigUint::zero());
    }
    let cells: i128 = (n..=level).map(|k| last(k) + 1).sum();
    if cells > i128::from(P_CELL_BUDGET) {
        return Err(Error::OutOfRange(format!(
            "p_{n} at level {level} needs {cells} cells"
        )));
    }
    // Row for scale k + 1, starting with the noise row: only x_0 is live.
    let mut below: Vec<BigUint> = vec![BigUint::from(1u32)];
    for k in (n..=level).rev() {
        let len = last(k) as usize + 1;
        let mut row = vec![BigUint::zero(); len];
        for m in 1..len {
            let mut c = row[m - 1].clone();
            if let Some(v) = below.get(2 * (m - 1)) {
                c += v;
            }
            row[m] = c << 1u32;
        }
        below = row;
    }
    Ok(below[1usize << (n - 1)].clone())
}

/// Observed law of one component of `Psi^(N)(. | a)` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ComponentLaw {
    Dirac { value: Value },
    Spread { ks: TestResult },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub scale: u32,
    pub law: ComponentLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitKernelReport {
    pub level: u32,
    pub time: DyadicTime,
    pub samples: usize,
    /// At `t = tau_n` the limit puts a Dirac mass at `f(a_n, a_{n+1})` on
    /// component `n`; every other component is uniform.
    pub expected_dirac: Option<(u32, Value)>,
    pub components: Vec<ComponentReport>,
}

impl LimitKernelReport {
    /// Whether the predicted Dirac component is exactly constant at the
    /// predicted value and every other component has KS below `ks_max`.
    pub fn matches_limit(&self, ks_max: f64) -> bool {
        self.components.iter().all(|c| match (&c.law, self.expected_dirac) {
            (ComponentLaw::Dirac { value }, Some((n, v))) if c.scale == n => *value == v,
            (_, Some((n, _))) if c.scale == n => false,
            (ComponentLaw::Spread { ks }, _) => ks.statistic < ks_max,
            (ComponentLaw::Dirac { .. }, _) => false,
        })
    }
}

/// Samples `u^(N)(t)` of the circle model and classifies `components`
/// components, starting at the coarsest scale on which `t` lies.
pub fn limit_kernel_check(
    a: &State,
    level: u32,
    t: &DyadicTime,
    samples: usize,
    components: usize,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<LimitKernelReport> {
    a.validate(PHASE_MODEL.space())?;
    noise.validate()?;
    if noise.space() != PHASE_MODEL.space() {
        return Err(Error::Unsupported(format!(
            "limit kernel check needs phase noise, got {}",
            noise.space().name()
        )));
    }
    if samples == 0 || components == 0 {
        return Err(Error::Empty("limit kernel check needs samples and components".into()));
    }
    if t.is_zero() {
        return Err(Error::InvalidArgument("limit kernel check needs t > 0".into()));
    }
    let from = t.level().max(1);
    let last = from + components as u32 - 1;
    if last > level + 1 {
        return Err(Error::ScaleBeyondLevel { needed: last, level });
    }
    let problem = ProblemSpec::new(PHASE_MODEL, a.truncated(level as usize), Vec::new())?;
    let draws: Vec<State> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let stream = NoiseStream::new(noise.clone(), seed, i);
            sample_solution(&problem, level, &stream, t)?.state_at(t, from)
        })
        .collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(components);
    for c in 1..=components {
        let first = draws[0].get(c);
        let law = if draws.iter().all(|d| d.get(c) == first) {
            ComponentLaw::Dirac { value: first }
        } else {
            let xs: Vec<f64> = draws.iter().map(|d| d.get(c).to_f64()).collect();
            ComponentLaw::Spread { ks: ks_uniform(&xs)? }
        };
        reports.push(ComponentReport {
            scale: from + c as u32 - 1,
            law,
        });
    }
    let expected_dirac = if *t == DyadicTime::tau(from) {
        Some((from, PHASE_MODEL.f(a.get(from as usize), a.get(from as usize + 1))?))
    } else {
        None
    };
    Ok(LimitKernelReport {
        level,
        time: t.clone(),
        samples,
        expected_dirac,
        components: reports,
    })
}

/// `p` as `f64`, saturating.
pub fn p_as_f64(p: &BigUint) -> f64 {
    p.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_two_by_hand() {
        let c = phase_coefficients(2).unwrap();
        let two = BigUint::from(2u32);
        let four = BigUint::from(4u32);
        assert_eq!(c.rows[0].initial, vec![two.clone(), two.clone()]);
        assert!(c.rows[0].noise.is_empty());
        // u_2(1/2) = 2 u_2(1/4) + 2 x_2, u_2(1/4) = 2 a_2 + 2 x_0
        assert_eq!(c.rows[1].initial, vec![BigUint::zero(), four.clone()]);
        assert_eq!(c.rows[1].noise, vec![(0, four), (2, two)]);
    }

    #[test]
    fn first_row_never_sees_noise() {
        // At N = 1 the noise value x_0 stands where a_2 would be.
        let c = phase_coefficients(1).unwrap();
        assert_eq!(c.rows[0].noise, vec![(0, BigUint::from(2u32))]);
        for n in 2..=10 {
            let c = phase_coefficients(n).unwrap();
            let r = &c.rows[0];
            assert!(r.noise.is_empty());
            assert_eq!(r.initial[..2], [BigUint::from(2u32), BigUint::from(2u32)]);
        }
    }

    #[test]
    fn rows_reproduce_simulation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let noise = NoiseSpec::UniformCircle;
        for level in 1..=7u32 {
            let coeffs = phase_coefficients(level).unwrap();
            for trial in 0..5 {
                let a = State::phases(&(0..level).map(|_| rng.random()).collect::<Vec<u64>>());
                let stream = NoiseStream::new(noise.clone(), 11, trial);
                let p = ProblemSpec::new(PHASE_MODEL, a.clone(), Vec::new()).unwrap();
                let half = DyadicTime::tau(1);
                let sol = sample_solution(&p, level, &stream, &half).unwrap();
                let u = sol.state_at(&half, 1).unwrap();
                for row in &coeffs.rows {
                    let x = |m| stream.value(m).as_phase().unwrap();
                    assert_eq!(row.eval(&a, x).unwrap(), u.get(row.scale as usize).as_phase().unwrap());
                }
            }
        }
    }

    #[test]
    fn windowed_p_matches_full_expansion() {
        for level in 1..=12 {
            let p = phase_coefficients(level).unwrap().p();
            for n in 1..=level {
                assert_eq!(p_coefficient(n, level).unwrap(), p[n as usize - 1], "n={n} N={level}");
            }
        }
    }

    #[test]
    fn out_of_range_levels() {
        assert!(phase_coefficients(0).is_err());
        assert!(phase_coefficients(MAX_EXPANSION_LEVEL + 1).is_err());
        assert!(p_coefficient(3, 2).is_err());
        assert!(p_coefficient(2, 65).is_err());
        assert!(p_coefficient(2, 64).is_ok());
    }

    #[test]
    fn degenerate_noise_is_dirac_everywhere() {
        let a = State::phases(&[1 << 62, 3 << 61, 1 << 63]);
        let noise = NoiseSpec::degenerate(crate::lattice::Space::Phase);
        let r = limit_kernel_check(&a, 6, &DyadicTime::tau(1), 20, 4, &noise, 1).unwrap();
        assert!(r.components.iter().all(|c| matches!(c.law, ComponentLaw::Dirac { .. })));
        let (n, v) = r.expected_dirac.unwrap();
        assert_eq!(n, 1);
        assert_eq!(r.components[0].law, ComponentLaw::Dirac { value: v });
    }

    #[test]
    fn bit_noise_is_rejected() {
        let a = State::phases(&[0]);
        let r = limit_kernel_check(&a, 4, &DyadicTime::tau(1), 10, 2, &NoiseSpec::default(), 1);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
