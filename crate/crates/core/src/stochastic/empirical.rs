//! Bags of kernel samples at a fixed input and comparisons between samplers.

use serde::Serialize;

use super::sampler::KernelSampler;
use super::stats::{fisher_exact, holm, ks_two_sample, ks_uniform, TestResult};
use crate::error::{Error, Result};
use crate::lattice::{Space, State, Value};

/// Samples of `Psi(. | a)` for one input `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalKernel {
    pub input: State,
    pub space: Space,
    pub samples: Vec<State>,
}

impl EmpiricalKernel {
    pub fn collect(sampler: &KernelSampler, a: &State, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Empty("an empirical kernel needs at least one sample".into()));
        }
        Ok(Self {
            input: a.clone(),
            space: sampler.space(),
            samples: sampler.draw_many(a, count, seed)?,
        })
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    /// Component `n` (1-based) of every sample.
    pub fn component(&self, n: usize) -> Vec<Value> {
        self.samples.iter().map(|s| s.get(n)).collect()
    }

    /// Fractions for phases, 0/1 for bits.
    pub fn component_f64(&self, n: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.get(n).to_f64()).collect()
    }

    pub fn mean(&self, n: usize) -> f64 {
        let v = self.component_f64(n);
        v.iter().sum::<f64>() / v.len() as f64
    }

    /// Unbiased sample variance (0 for a single sample).
    pub fn variance(&self, n: usize) -> f64 {
        let v = self.component_f64(n);
        if v.len() < 2 {
            return 0.0;
        }
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
    }

    /// The common value if component `n` is identical across all samples.
    pub fn constant(&self, n: usize) -> Option<Value> {
        let first = self.samples[0].get(n);
        self.samples.iter().all(|s| s.get(n) == first).then_some(first)
    }

    pub fn ks_uniform(&self, n: usize) -> Result<TestResult> {
        ks_uniform(&self.component_f64(n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentComparison {
    pub component: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub adjusted_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelComparison {
    pub components: Vec<ComponentComparison>,
    /// Largest per-component statistic (proportion gap or KS distance).
    pub max_discrepancy: f64,
}

impl KernelComparison {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.components.iter().any(|c| c.adjusted_p < alpha)
    }

    pub fn min_adjusted_p(&self) -> f64 {
        self.components.iter().map(|c| c.adjusted_p).fold(1.0, f64::min)
    }
}

/// Per-component raw test of two empirical kernels (Fisher exact for bits,
/// two-sample KS for phases).
pub fn compare_kernels(e1: &EmpiricalKernel, e2: &EmpiricalKernel, components: usize) -> Result<Vec<TestResult>> {
    if e1.space != e2.space {
        return Err(Error::SpaceMismatch {
            expected: e1.space.name(),
            found: e2.space.name(),
        });
    }
    (1..=components)
        .map(|n| match e1.space {
            Space::Bit => {
                let ones = |e: &EmpiricalKernel| e.component(n).iter().filter(|v| !v.is_zero()).count() as u64;
                fisher_exact(ones(e1), e1.count() as u64, ones(e2), e2.count() as u64)
            }
            Space::Phase => ks_two_sample(&e1.component_f64(n), &e2.component_f64(n)),
        })
        .collect()
}

/// Draws `samples` from each sampler at `a` (independent seeds) and tests the
/// first `components` marginals, Holm-corrected across components.
pub fn two_sample_kernel_test(
    s1: &KernelSampler,
    s2: &KernelSampler,
    a: &State,
    samples: usize,
    components: usize,
    seed: u64,
) -> Result<KernelComparison> {
    let e1 = EmpiricalKernel::collect(s1, a, samples, seed)?;
    let e2 = EmpiricalKernel::collect(s2, a, samples, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let raw = compare_kernels(&e1, &e2, components)?;
    let adjusted = holm(&raw.iter().map(|r| r.p_value).collect::<Vec<_>>());
    let components: Vec<_> = raw
        .iter()
        .zip(adjusted)
        .enumerate()
        .map(|(i, (r, adj))| ComponentComparison {
            component: i + 1,
            statistic: r.statistic,
            p_value: r.p_value,
            adjusted_p: adj,
        })
        .collect();
    let max_discrepancy = components.iter().map(|c| c.statistic).fold(0.0, f64::max);
    Ok(KernelComparison {
        components,
        max_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::MODEL_B;
    use crate::solver::{flow_psi, RegSpec};
    use crate::stochastic::{sampler_psi, NoiseSpec};

    #[test]
    fn same_sampler_is_not_rejected() {
        let s = sampler_psi(MODEL_B, 3, NoiseSpec::default()).unwrap();
        let a = State::bits(&[0, 1, 1]);
        let c = two_sample_kernel_test(&s, &s, &a, 4000, 4, 11).unwrap();
        assert!(!c.rejects(0.01), "{c:?}");
    }

    #[test]
    fn deterministic_and_noisy_samplers_differ() {
        let noisy = sampler_psi(MODEL_B, 6, NoiseSpec::default()).unwrap();
        let det = KernelSampler::from_map(flow_psi(MODEL_B, 6, RegSpec::Cutoff).unwrap());
        let a = State::bits(&[0, 1, 1, 0, 1, 1]);
        let c = two_sample_kernel_test(&det, &noisy, &a, 2000, 7, 3).unwrap();
        assert!(c.rejects(0.01), "{c:?}");
    }

    #[test]
    fn summaries() {
        let s = sampler_psi(MODEL_B, 2, NoiseSpec::default()).unwrap();
        let e = EmpiricalKernel::collect(&s, &State::bits(&[1, 1]), 500, 1).unwrap();
        assert_eq!(e.constant(1), Some(Value::ONE_BIT));
        assert_eq!(e.variance(1), 0.0);
        assert!(e.constant(3).is_none());
        assert!((e.mean(3) - 0.5).abs() < 0.1);
    }
}
