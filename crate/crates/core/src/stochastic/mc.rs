//! Monte Carlo expectations of lattice values.
//!
//! Bit models run 64 samples at once, one per bit of a machine word; sample
//! `s` always uses noise stream `s`, so results match the scalar solver
//! sample by sample and do not depend on the number of worker threads.

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use super::noise::{field, Decoder, NoiseSpec, NoiseStream};
use super::sampler::sample_solution;
use crate::error::{Error, Result};
use crate::lattice::{DyadicTime, LatticePoint, ModelSpec, ProblemSpec, Value};
use crate::solver::{row_lengths, sweep, LaneRule};

/// Normal-approximation 95% quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectation {
    pub level: u32,
    pub point: LatticePoint,
    pub mean: f64,
    /// Half-width of the 95% confidence interval.
    pub ci_half: f64,
    pub samples: usize,
}

/// `E[u_n^(N)(t)]` for every level and point, from `samples` seeded runs.
pub fn estimate_expectations(
    problem: &ProblemSpec,
    noise: &NoiseSpec,
    levels: &[u32],
    points: &[LatticePoint],
    samples: usize,
    seed: u64,
) -> Result<Vec<Expectation>> {
    if samples < 2 {
        return Err(Error::InvalidArgument("at least two samples are needed".into()));
    }
    if points.is_empty() {
        return Err(Error::Empty("no lattice points requested".into()));
    }
    noise.validate()?;
    if noise.space() != problem.model.space() {
        return Err(Error::SpaceMismatch {
            expected: problem.model.space().name(),
            found: noise.space().name(),
        });
    }
    let horizon = points.iter().map(|p| p.time.clone()).max().expect("non-empty");
    let mut out = Vec::with_capacity(levels.len() * points.len());
    for &level in levels {
        if let Some(p) = points.iter().find(|p| p.scale > level) {
            return Err(Error::ScaleBeyondLevel {
                needed: p.scale,
                level,
            });
        }
        let stats = match problem.model {
            ModelSpec::Bit { f, g } => {
                let counts = lane_counts(problem, &LaneRule { f, g }, noise, level, points, samples, seed, &horizon)?;
                counts
                    .into_iter()
                    .map(|k| bernoulli_summary(k, samples))
                    .collect::<Vec<_>>()
            }
            ModelSpec::Phase { .. } => scalar_moments(problem, noise, level, points, samples, seed, &horizon)?,
        };
        for (p, (mean, ci_half)) in points.iter().zip(stats) {
            out.push(Expectation {
                level,
                point: p.clone(),
                mean,
                ci_half,
                samples,
            });
        }
    }
    Ok(out)
}

fn bernoulli_summary(ones: u64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = ones as f64 / nf;
    let var = mean * (1.0 - mean) * nf / (nf - 1.0);
    (mean, Z95 * (var / nf).sqrt())
}

fn scalar_moments(
    problem: &ProblemSpec,
    noise: &NoiseSpec,
    level: u32,
    points: &[LatticePoint],
    samples: usize,
    seed: u64,
    horizon: &DyadicTime,
) -> Result<Vec<(f64, f64)>> {
    let per_sample = (0..samples)
        .into_par_iter()
        .map(|s| {
            let stream = NoiseStream::new(noise.clone(), seed, s as u64);
            let sol = sample_solution(problem, level, &stream, horizon)?;
            Ok(points
                .iter()
                .map(|p| sol.value_at(p).map_or(0.0, Value::to_f64))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let n = samples as f64;
    Ok((0..points.len())
        .map(|i| {
            let mean = per_sample.iter().map(|v| v[i]).sum::<f64>() / n;
            let var = per_sample.iter().map(|v| (v[i] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, Z95 * (var / n).sqrt())
        })
        .collect())
}

/// Number of samples with `u = 1` at each point.
#[allow(clippy::too_many_arguments)]
pub(crate) fn lane_counts(
    problem: &ProblemSpec,
    rule: &LaneRule,
    noise: &NoiseSpec,
    level: u32,
    points: &[LatticePoint],
    samples: usize,
    seed: u64,
    horizon: &DyadicTime,
) -> Result<Vec<u64>> {
    let lens = row_lengths(horizon, level)?;
    let cells: Vec<(usize, usize)> = points
        .iter()
        .map(|p| {
            let i = p.time.index_at(p.scale).expect("lattice point");
            (p.scale as usize, i as usize)
        })
        .collect();
    let batches = samples.div_ceil(64);
    let decoder = Decoder::new(noise);
    let totals = (0..batches)
        .into_par_iter()
        .map_init(
            || LaneBuffers::new(problem, &lens),
            |buf, b| {
                let first = b * 64;
                let lanes = (samples - first).min(64);
                let mask = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
                let rows = &mut buf.rows[..];
                fill_noise_lanes(&mut rows[level as usize + 1], &decoder, noise, seed, first as u64, lanes);
                sweep(rule, level, rows);
                cells
                    .iter()
                    .map(|&(s, i)| u64::from((rows[s][i] & mask).count_ones()))
                    .collect::<Vec<_>>()
            },
        )
        .reduce(
            || vec![0u64; cells.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(totals)
}

/// Boundary and initial cells persist between batches; every other cell is
/// overwritten by the noise fill and the sweep.
struct LaneBuffers {
    rows: Vec<Vec<u64>>,
}

impl LaneBuffers {
    fn new(problem: &ProblemSpec, lens: &[usize]) -> Self {
        let spread = |v: Value| if v.is_zero() { 0 } else { u64::MAX };
        let top = lens.len() - 1;
        let rows = lens
            .iter()
            .enumerate()
            .map(|(n, &len)| {
                let mut row = vec![0u64; len];
                if n == 0 {
                    for (t, slot) in row.iter_mut().enumerate() {
                        *slot = spread(problem.boundary_at(t as u64));
                    }
                } else if n < top {
                    row[0] = spread(problem.initial_at(n as u32));
                }
                row
            })
            .collect();
        Self { rows }
    }
}

/// Writes `x_i` of streams `first .. first + lanes` into bit `j` of `row[i]`.
fn fill_noise_lanes(row: &mut [u64], decoder: &Decoder, noise: &NoiseSpec, seed: u64, first: u64, lanes: usize) {
    let bits = decoder.bits();
    if bits == 0 {
        let v = if decoder.decode(0).is_zero() { 0 } else { u64::MAX };
        row.fill(v);
        return;
    }
    let mut rngs: Vec<_> = (0..lanes)
        .map(|j| NoiseStream::new(noise.clone(), seed, first + j as u64).rng())
        .collect();
    if bits == 1 {
        // one draw per bit: transpose 64x64 blocks
        let one_when_zero = decoder.decode(0) == Value::ONE_BIT;
        let mut block = [0u64; 64];
        for chunk in row.chunks_mut(64) {
            block.fill(0);
            for (j, rng) in rngs.iter_mut().enumerate() {
                block[j] = rng.next_u64();
            }
            transpose64(&mut block);
            for (slot, w) in chunk.iter_mut().zip(block.iter()) {
                *slot = if one_when_zero { !*w } else { *w };
            }
        }
        return;
    }
    row.fill(0);
    let per_word = (64 / bits) as usize;
    for (j, rng) in rngs.iter_mut().enumerate() {
        let lane = 1u64 << j;
        for chunk in row.chunks_mut(per_word) {
            let w = rng.next_u64();
            for (k, slot) in chunk.iter_mut().enumerate() {
                if !decoder.decode(field(w, k as u32 * bits, bits)).is_zero() {
                    *slot |= lane;
                }
            }
        }
    }
}

/// In-place transpose of a 64x64 bit matrix: afterwards bit `j` of `a[i]`
/// is the former bit `i` of `a[j]`.
pub(crate) fn transpose64(a: &mut [u64; 64]) {
    let mut width = 32;
    let mut mask: u64 = 0x0000_0000_ffff_ffff;
    while width != 0 {
        let mut k = 0;
        while k < 64 {
            for i in k..k + width {
                let t = ((a[i] >> width) ^ a[i + width]) & mask;
                a[i] ^= t << width;
                a[i + width] ^= t;
            }
            k += 2 * width;
        }
        width >>= 1;
        mask ^= mask << width;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{MODEL_A, MODEL_B, PHASE_MODEL};
    use crate::solver::{solve_regularized, RegSpec};

    #[test]
    fn transpose_is_exact() {
        let mut a = [0u64; 64];
        for (i, w) in a.iter_mut().enumerate() {
            *w = (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (i as u64) << 17;
        }
        let orig = a;
        transpose64(&mut a);
        for (i, row) in a.iter().enumerate() {
            for (j, col) in orig.iter().enumerate() {
                assert_eq!(row >> j & 1, col >> i & 1, "i={i} j={j}");
            }
        }
    }

    fn lanes_match_scalar(noise: NoiseSpec, samples: usize) {
        let p = ProblemSpec::bits(MODEL_B, &[0, 1, 0, 1], &[1, 0]).unwrap();
        let level = 7;
        let horizon = DyadicTime::new(3, 1);
        let points: Vec<_> = (0..=level)
            .flat_map(|n| (0..=(3u64 << n) / 2).map(move |i| LatticePoint::at_index(n, i)))
            .collect();
        let counts = lane_counts(&p, &LaneRule { f: [0, 0, 0, 1].into(), g: [0, 1, 1, 0].into() }, &noise, level, &points, samples, 77, &horizon).unwrap();
        let mut expect = vec![0u64; points.len()];
        for s in 0..samples {
            let sol = sample_solution(&p, level, &NoiseStream::new(noise.clone(), 77, s as u64), &horizon).unwrap();
            for (k, pt) in points.iter().enumerate() {
                expect[k] += u64::from(sol.value_at(pt).unwrap().as_bit().unwrap());
            }
        }
        assert_eq!(counts, expect);
    }

    #[test]
    fn bit_sliced_runs_match_scalar_runs() {
        lanes_match_scalar(NoiseSpec::default(), 70);
        lanes_match_scalar(NoiseSpec::bernoulli(3, 8).unwrap(), 65);
        lanes_match_scalar(NoiseSpec::bernoulli(1, 3).unwrap(), 10);
    }

    #[test]
    fn degenerate_noise_gives_deterministic_means() {
        let p = ProblemSpec::bits(MODEL_A, &[1], &[1, 0]).unwrap();
        let points = vec![LatticePoint::at_index(2, 3), LatticePoint::at_index(4, 20)];
        let est = estimate_expectations(&p, &NoiseSpec::degenerate(crate::lattice::Space::Bit), &[6], &points, 100, 1).unwrap();
        let det = solve_regularized(&p, 6, &RegSpec::Cutoff, &DyadicTime::new(5, 2)).unwrap();
        for e in est {
            assert_eq!(e.ci_half, 0.0);
            assert_eq!(e.mean, det.value_at(&e.point).unwrap().to_f64());
        }
    }

    #[test]
    fn phase_means_and_validation() {
        let p = ProblemSpec::zero(PHASE_MODEL);
        let pts = vec![LatticePoint::at_index(1, 1)];
        let est = estimate_expectations(&p, &NoiseSpec::UniformCircle, &[1], &pts, 400, 2).unwrap();
        assert!((est[0].mean - 0.5).abs() < 0.1);
        assert!(estimate_expectations(&p, &NoiseSpec::UniformCircle, &[1], &[LatticePoint::at_index(3, 1)], 10, 2).is_err());
        assert!(estimate_expectations(&p, &NoiseSpec::UniformCircle, &[1], &pts, 1, 2).is_err());
    }
}
