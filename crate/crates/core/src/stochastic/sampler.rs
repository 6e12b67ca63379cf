//! Kernel samplers and the stochastic renormalization-group operator.

use std::fmt;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::noise::{NoiseSpec, NoiseStream};
use crate::error::{Error, Result};
use crate::lattice::{DyadicTime, ModelSpec, ProblemSpec, Space, State};
use crate::solver::{solve_driven, xi, Driver, FlowMap, Solution};

/// Solves with scale `N + 1` carrying `x_{t / tau_{N+1}}`, deeper scales zero.
pub fn sample_solution(
    problem: &ProblemSpec,
    level: u32,
    noise: &NoiseStream,
    horizon: &DyadicTime,
) -> Result<Solution> {
    solve_driven(problem, level, Driver::Noise(noise.clone()), horizon)
}

type DrawFn = dyn Fn(&State, &mut ChaCha8Rng) -> Result<State> + Send + Sync;

/// A seeded realization of a Markov kernel: every call to [`KernelSampler::draw`]
/// consumes fresh randomness from the handle it is given.
#[derive(Clone)]
pub struct KernelSampler {
    space: Space,
    label: String,
    draw: Arc<DrawFn>,
}

impl fmt::Debug for KernelSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSampler")
            .field("space", &self.space)
            .field("label", &self.label)
            .finish()
    }
}

impl KernelSampler {
    pub fn new(
        space: Space,
        label: impl Into<String>,
        draw: impl Fn(&State, &mut ChaCha8Rng) -> Result<State> + Send + Sync + 'static,
    ) -> Self {
        Self {
            space,
            label: label.into(),
            draw: Arc::new(draw),
        }
    }

    /// The Dirac kernel of a deterministic map.
    pub fn from_map(map: FlowMap) -> Self {
        let label = format!("dirac {:?}", map.provenance());
        Self::new(map.space(), label, move |a, _| map.apply(a))
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn draw(&self, a: &State, rng: &mut ChaCha8Rng) -> Result<State> {
        (self.draw)(a, rng)
    }

    /// `count` independent draws at `a`; draw `i` uses stream `i` of `seed`,
    /// so the result does not depend on scheduling.
    pub fn draw_many(&self, a: &State, count: usize, seed: u64) -> Result<Vec<State>> {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                self.draw(a, &mut rng)
            })
            .collect()
    }
}

/// The kernel `Psi^(N)`: the state at `tau_1` under stochastic regularization.
pub fn sampler_psi(model: ModelSpec, level: u32, noise: NoiseSpec) -> Result<KernelSampler> {
    noise.validate()?;
    if noise.space() != model.space() {
        return Err(Error::SpaceMismatch {
            expected: model.space().name(),
            found: noise.space().name(),
        });
    }
    if level == 0 {
        return Err(Error::InvalidArgument("regularization level must be at least 1".into()));
    }
    let half = DyadicTime::tau(1);
    let label = format!("psi level {level}");
    Ok(KernelSampler::new(model.space(), label, move |a, rng| {
        let stream = NoiseStream::new(noise.clone(), rng.next_u64(), 0);
        let problem = ProblemSpec::new(model, a.truncated(level as usize), Vec::new())?;
        sample_solution(&problem, level, &stream, &half)?.state_at(&half, 1)
    }))
}

/// `a -> sigma_-(S(S(sigma_+(a)))) + xi(a)` with independent inner draws.
pub fn stochastic_rg_apply(sampler: &KernelSampler, model: ModelSpec) -> KernelSampler {
    let inner = sampler.clone();
    let label = format!("rg[{}]", sampler.label());
    KernelSampler::new(sampler.space(), label, move |a, rng| {
        let mut first = ChaCha8Rng::from_rng(&mut *rng);
        let mut second = ChaCha8Rng::from_rng(&mut *rng);
        let once = inner.draw(&a.shift_up(), &mut first)?;
        let twice = inner.draw(&once, &mut second)?;
        twice.shift_down().add(&xi(&model, a)?)
    })
}

/// `k`-fold [`stochastic_rg_apply`].
pub fn stochastic_rg_iterate(sampler: &KernelSampler, model: ModelSpec, k: u32) -> KernelSampler {
    (0..k).fold(sampler.clone(), |s, _| stochastic_rg_apply(&s, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Value, MODEL_A, MODEL_B, PHASE_MODEL};
    use crate::solver::{flow_psi, RegSpec};

    #[test]
    fn level_one_draw_uses_x0_and_x2() {
        let p = ProblemSpec::bits(MODEL_B, &[1, 1, 1], &[]).unwrap();
        let noise = NoiseStream::new(NoiseSpec::default(), 3, 0);
        let half = DyadicTime::tau(1);
        for seed in 0..20 {
            let noise = NoiseStream { seed, ..noise.clone() };
            let s = sample_solution(&p, 1, &noise, &half).unwrap();
            let (x0, x2) = (noise.value(0), noise.value(2));
            let expect = State::new(vec![MODEL_B.f(Value::ONE_BIT, x0).unwrap(), x2], Value::ZERO_BIT);
            assert_eq!(s.state_at(&half, 1).unwrap(), expect);
        }
    }

    #[test]
    fn degenerate_noise_reduces_to_cutoff() {
        let p = ProblemSpec::bits(MODEL_A, &[1, 0, 1, 1], &[1, 1]).unwrap();
        let h = DyadicTime::integer(2);
        let noise = NoiseStream::new(NoiseSpec::degenerate(Space::Bit), 1, 0);
        let s = sample_solution(&p, 5, &noise, &h).unwrap();
        let d = crate::solver::solve_regularized(&p, 5, &RegSpec::Cutoff, &h).unwrap();
        assert!(s.cells().zip(d.cells()).all(|(x, y)| x == y));
    }

    #[test]
    fn first_component_is_deterministic_above_level_one() {
        let a = State::bits(&[1, 1, 0, 1]);
        for model in [MODEL_A, MODEL_B] {
            let s = sampler_psi(model, 3, NoiseSpec::default()).unwrap();
            let f = model.f(a.get(1), a.get(2)).unwrap();
            for d in s.draw_many(&a, 50, 9).unwrap() {
                assert_eq!(d.get(1), f);
                assert_eq!(d.get(5), Value::ZERO_BIT);
            }
        }
    }

    #[test]
    fn phase_level_one_first_component_varies() {
        let s = sampler_psi(PHASE_MODEL, 1, NoiseSpec::UniformCircle).unwrap();
        let draws = s.draw_many(&State::phases(&[5]), 10, 1).unwrap();
        assert!(draws.windows(2).any(|w| w[0].get(1) != w[1].get(1)));
    }

    #[test]
    fn dirac_kernels_compose_as_maps() {
        let psi = flow_psi(MODEL_B, 2, RegSpec::unit()).unwrap();
        let composed = stochastic_rg_apply(&KernelSampler::from_map(psi.clone()), MODEL_B);
        let direct = crate::rg::rg_apply(&psi, MODEL_B);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for code in 0u8..16 {
            let a = State::bits(&[code & 1, code >> 1 & 1, code >> 2 & 1, code >> 3]);
            assert_eq!(composed.draw(&a, &mut rng).unwrap(), direct.apply(&a).unwrap());
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let s = sampler_psi(MODEL_B, 4, NoiseSpec::default()).unwrap();
        let a = State::bits(&[0, 1]);
        assert_eq!(s.draw_many(&a, 20, 5).unwrap(), s.draw_many(&a, 20, 5).unwrap());
    }
}
