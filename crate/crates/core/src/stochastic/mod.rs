//! Stochastic regularization, kernel samplers and Monte Carlo statistics.

pub mod empirical;
pub mod fit;
pub mod mc;
pub mod noise;
pub mod phase;
pub mod sampler;
pub mod stats;

pub use empirical::{compare_kernels, two_sample_kernel_test, ComponentComparison, EmpiricalKernel, KernelComparison};
pub use fit::{fit_convergence, fit_convergence_tail, ConvergenceFit};
pub use mc::{estimate_expectations, Expectation};
pub use noise::{NoiseSpec, NoiseStream, PhaseAtom};
pub use phase::{limit_kernel_check, p_coefficient, phase_coefficients, CoefficientRow, ComponentLaw, ComponentReport, LimitKernelReport, PhaseCoefficients};
pub use sampler::{sample_solution, sampler_psi, stochastic_rg_apply, stochastic_rg_iterate, KernelSampler};
pub use stats::{bonferroni, fisher_exact, holm, kolmogorov_tail, ks_two_sample, ks_uniform, TestResult};
