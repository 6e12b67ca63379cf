//! Batch property runs behind `msrg verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value as Json};

use super::config::{Fault, VerifySection};
use crate::error::Result;
use crate::lattice::{grid_states, DyadicTime, LatticePoint, ModelSpec, ProblemSpec, State, Value, MODEL_A, MODEL_B};
use crate::rg::{fixed_point_a, random_bit_map, rg_apply, rg_iterate};
use crate::solver::{
    eval_fractional, flow_psi, nonuniqueness_witness, solve_regularized, solve_strong, BlowupOutcome, FlowMap,
    RegSpec, Solution, WitnessPair,
};
use crate::stochastic::{holm, sampler_psi, stochastic_rg_apply, two_sample_kernel_test, NoiseSpec};

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub passed: bool,
    /// Number of individual comparisons made.
    pub checked: u64,
    pub counterexample: Option<Json>,
    pub detail: Json,
}

impl PropertyReport {
    fn new(name: &str, checked: u64, counterexample: Option<Json>, detail: Json) -> Self {
        Self {
            name: name.into(),
            passed: counterexample.is_none(),
            checked,
            counterexample,
            detail,
        }
    }
}

fn bits_string(s: &State, depth: usize) -> String {
    s.take(depth)
        .iter()
        .map(|v| if v.is_zero() { '0' } else { '1' })
        .collect()
}

fn with_fault(model: ModelSpec, fault: Option<&Fault>) -> ModelSpec {
    match (model, fault) {
        (ModelSpec::Bit { f, g }, Some(fault)) => ModelSpec::Bit {
            f: f.with_flipped(fault.f_flip[0], fault.f_flip[1]),
            g,
        },
        _ => model,
    }
}

/// `rg(psi^(N)) = psi^(N+1)` on every depth-`(N+1)` input. With a fault the
/// simulated model is corrupted while the RG operator keeps the original.
pub fn rg_commutation(model: ModelSpec, name: &str, max_level: u32, fault: Option<&Fault>) -> Result<PropertyReport> {
    let simulated = with_fault(model, fault);
    let mut checked = 0;
    for reg in [RegSpec::Cutoff, RegSpec::unit()] {
        for level in 1..max_level {
            let lhs = rg_apply(&flow_psi(simulated, level, reg.clone())?, model);
            let rhs = flow_psi(simulated, level + 1, reg.clone())?;
            let depth = level as usize + 1;
            let inputs: Vec<State> = grid_states(depth).collect();
            let bad = inputs
                .par_iter()
                .map(|a| Ok((a, lhs.apply(a)?, rhs.apply(a)?)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .find(|(_, l, r)| l != r);
            checked += inputs.len() as u64;
            if let Some((a, l, r)) = bad {
                let out_depth = depth + 2;
                let ce = json!({
                    "reg": reg, "level": level, "input": bits_string(a, depth),
                    "rg_of_psi": bits_string(&l, out_depth), "psi_next": bits_string(&r, out_depth),
                });
                return Ok(PropertyReport::new(name, checked, Some(ce), json!({ "fault": fault })));
            }
        }
    }
    Ok(PropertyReport::new(name, checked, None, json!({ "max_level": max_level, "fault": fault })))
}

/// Iterates of model A from `psi^(1)` and from random tables agree with the
/// closed-form fixed point on the first `k - 2` components.
pub fn fixed_point_attraction(max_iterations: u32, random_maps: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<(String, FlowMap)> = vec![("psi1_cutoff".into(), flow_psi(MODEL_A, 1, RegSpec::Cutoff)?)];
    for i in 0..random_maps {
        let depth = rng.random_range(1..=3);
        starts.push((format!("random_{i}"), random_bit_map(&mut rng, depth, depth)));
    }
    let mut checked = 0;
    for (label, start) in &starts {
        for k in 4..=max_iterations {
            let it = rg_iterate(start, MODEL_A, k);
            let keep = k as usize - 2;
            for a in grid_states(k as usize) {
                checked += 1;
                let (got, want) = (it.apply(&a)?, fixed_point_a(&a)?);
                if got.take(keep) != want.take(keep) {
                    let ce = json!({
                        "start": label, "iterations": k, "input": bits_string(&a, k as usize),
                        "iterate": bits_string(&got, keep), "fixed_point": bits_string(&want, keep),
                    });
                    return Ok(PropertyReport::new("fixed_point_attraction", checked, Some(ce), Json::Null));
                }
            }
        }
    }
    Ok(PropertyReport::new(
        "fixed_point_attraction",
        checked,
        None,
        json!({ "starts": starts.len(), "max_iterations": max_iterations }),
    ))
}

/// The composed sampler and the direct level-`(N+1)` sampler are not told
/// apart by per-component tests, Holm-corrected across the whole run.
pub fn stochastic_consistency(max_level: u32, samples: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests = Vec::new();
    for (label, model) in [("a", MODEL_A), ("b", MODEL_B)] {
        for level in 1..=max_level {
            let base = sampler_psi(model, level, NoiseSpec::default())?;
            let composed = stochastic_rg_apply(&base, model);
            let direct = sampler_psi(model, level + 1, NoiseSpec::default())?;
            let a = State::bits(&(0..level + 2).map(|_| rng.random_range(0..2)).collect::<Vec<u8>>());
            let comps = level as usize + 2;
            let c = two_sample_kernel_test(&composed, &direct, &a, samples, comps, rng.random())?;
            tests.push((label, level, a, c));
        }
    }
    let raw: Vec<f64> = tests.iter().flat_map(|t| t.3.components.iter().map(|c| c.p_value)).collect();
    let adjusted = holm(&raw);
    let min_adj = adjusted.iter().copied().fold(1.0, f64::min);
    let mut idx = 0;
    let mut ce = None;
    for (label, level, a, c) in &tests {
        for comp in &c.components {
            if adjusted[idx] < 0.01 && ce.is_none() {
                ce = Some(json!({
                    "model": label, "level": level, "input": bits_string(a, *level as usize + 2),
                    "component": comp.component, "p_value": comp.p_value, "adjusted_p": adjusted[idx],
                }));
            }
            idx += 1;
        }
    }
    Ok(PropertyReport::new(
        "stochastic_consistency",
        raw.len() as u64,
        ce,
        json!({ "samples": samples, "min_adjusted_p": min_adj, "alpha": 0.01 }),
    ))
}

/// First index at `scale` holding a one, if any.
fn first_one(sol: &Solution, scale: u32) -> Option<u64> {
    (0..sol.row_len(scale) as u64).find(|&i| sol.value(scale, i).is_some_and(|v| !v.is_zero()))
}

/// Checks the closed-form blowup time and staircase of one problem against a
/// cutoff simulation `extra` scales below the initial support.
pub fn check_staircase(problem: &ProblemSpec, extra: u32) -> Result<std::result::Result<(), Json>> {
    let far = DyadicTime::integer(64);
    let report = solve_strong(problem, &far)?;
    let level = report.n_max0.max(1) + extra;
    match &report.outcome {
        BlowupOutcome::BlowupAt { time } => {
            let sol = solve_regularized(problem, level, &RegSpec::Cutoff, time)?;
            for step in report.trace.iter().filter(|s| s.scale <= level) {
                let n = step.scale;
                let want = step.first_one.index_at(n).expect("staircase time on its scale");
                let got = first_one(&sol, n);
                let next = sol.value(n, want + 1);
                if got != Some(want) || next != Some(step.next) {
                    return Ok(Err(json!({
                        "scale": n, "predicted_first_one": step.first_one, "simulated_first_one_index": got,
                        "predicted_next": step.next, "simulated_next": next,
                    })));
                }
            }
            // the deepest resolved scale switches on at T - 2 tau_N
            let at = first_one(&sol, level).map(|i| &DyadicTime::from_index(i, level) + &DyadicTime::new(2, level));
            if at.as_ref() != Some(time) {
                return Ok(Err(json!({ "predicted_blowup": time, "simulated_blowup": at })));
            }
        }
        BlowupOutcome::GlobalStrong => {
            let sol = solve_regularized(problem, level, &RegSpec::Cutoff, &far)?;
            let support = report.n_max0.max(1);
            if let Some(n) = (support + 1..=level).find(|&n| first_one(&sol, n).is_some()) {
                return Ok(Err(json!({ "global_strong_but_scale_switched_on": n })));
            }
        }
        BlowupOutcome::HorizonReached => {}
    }
    Ok(Ok(()))
}

/// Random problems of both symbolic models with `n_max(0) <= 6`.
pub fn random_problem<R: Rng>(rng: &mut R, model: ModelSpec, max_support: usize, max_boundary: usize) -> ProblemSpec {
    let depth = rng.random_range(0..=max_support);
    let mut initial: Vec<u8> = (0..depth).map(|_| rng.random_range(0..2)).collect();
    if let Some(last) = initial.last_mut() {
        *last = 1;
    }
    let blen = rng.random_range(0..=max_boundary);
    let boundary: Vec<u8> = (0..blen).map(|_| rng.random_range(0..2)).collect();
    ProblemSpec::bits(model, &initial, &boundary).expect("bit literals")
}

pub fn staircase(problems: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for (label, model) in [("a", MODEL_A), ("b", MODEL_B)] {
        for _ in 0..problems {
            let p = random_problem(&mut rng, model, 6, 3);
            checked += 1;
            if let Err(ce) = check_staircase(&p, 6)? {
                let ce = json!({ "model": label, "initial": bits_string(&p.initial, p.initial.depth()), "boundary": p.boundary, "mismatch": ce });
                return Ok(PropertyReport::new("blowup_staircase", checked, Some(ce), Json::Null));
            }
        }
    }
    Ok(PropertyReport::new("blowup_staircase", checked, None, json!({ "problems_per_model": problems })))
}

fn field_rows(sol: &Solution) -> Vec<String> {
    (0..=sol.level())
        .map(|n| {
            (0..sol.row_len(n) as u64)
                .map(|i| if sol.value(n, i).is_some_and(|v| !v.is_zero()) { '1' } else { '0' })
                .collect()
        })
        .collect()
}

/// Both witness fields solve the ideal equations on the resolved scales,
/// agree up to `T` and differ at `(n, T + 2 tau_n)` with 0 against 1.
pub fn check_witness(w: &WitnessPair) -> Result<std::result::Result<(), Json>> {
    for (label, sol) in [("cutoff", &w.cutoff), ("modified", &w.modified)] {
        let r = sol.residual()?;
        if !r.passes() {
            return Ok(Err(json!({ "field": label, "violations": r.violations().len() })));
        }
    }
    let Some((point, _, _)) = w.first_disagreement() else {
        return Ok(Err(json!({ "first_disagreement": null })));
    };
    if point.time <= w.blowup {
        return Ok(Err(json!({ "disagreement_before_blowup": point })));
    }
    let level = w.cutoff.level();
    for n in w.n_max0 + 2..level {
        let p = LatticePoint::new(n, &w.blowup + &DyadicTime::new(2, n)).expect("on lattice");
        let (c, m) = (w.cutoff.value_at(&p), w.modified.value_at(&p));
        if c != Some(Value::ZERO_BIT) || m != Some(Value::ONE_BIT) {
            return Ok(Err(json!({ "point": p, "cutoff": c, "modified": m })));
        }
    }
    Ok(Ok(()))
}

pub fn nonuniqueness(problem: &ProblemSpec, levels: std::ops::RangeInclusive<u32>) -> Result<PropertyReport> {
    let mut checked = 0;
    let mut detail = Json::Null;
    for level in levels {
        let w = nonuniqueness_witness(problem, level)?;
        checked += 1;
        if detail.is_null() {
            let first = w.first_disagreement().map(|(p, x, y)| json!({ "point": p, "cutoff": x, "modified": y }));
            detail = json!({
                "level": level, "blowup": w.blowup, "first_disagreement": first,
                "cutoff_field": field_rows(&w.cutoff), "modified_field": field_rows(&w.modified),
            });
        }
        if let Err(ce) = check_witness(&w)? {
            return Ok(PropertyReport::new("weak_nonuniqueness", checked, Some(json!({ "level": level, "failure": ce })), detail));
        }
    }
    Ok(PropertyReport::new("weak_nonuniqueness", checked, None, detail))
}

/// Every lattice time `t <= 3` with `n_c <= N` of a random problem.
pub fn check_fractional(problem: &ProblemSpec, level: u32, reg: &RegSpec) -> Result<std::result::Result<u64, Json>> {
    let end = DyadicTime::integer(3);
    let sol = solve_regularized(problem, level, reg, &end)?;
    let mut checked = 0;
    for m in 0..=(3u64 << level) {
        let t = DyadicTime::from_index(m, level);
        let from = t.level().max(1);
        let direct = sol.state_at(&t, from)?;
        let composed = eval_fractional(problem, level, reg, &t)?;
        // the simulation is exact on scales <= N only
        let keep = (level - from + 1) as usize;
        checked += 1;
        if direct.take(keep) != composed.take(keep) {
            return Ok(Err(json!({
                "time": t, "level": level, "direct": bits_string(&direct, keep), "composed": bits_string(&composed, keep),
            })));
        }
    }
    Ok(Ok(checked))
}

pub fn fractional(max_level: u32, problems: usize, seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for (label, model) in [("a", MODEL_A), ("b", MODEL_B)] {
        for _ in 0..problems {
            let level = rng.random_range(1..=max_level);
            let initial: Vec<u8> = (0..level + 1).map(|_| rng.random_range(0..2)).collect();
            let boundary: Vec<u8> = (0..3).map(|_| rng.random_range(0..2)).collect();
            let p = ProblemSpec::bits(model, &initial, &boundary).expect("bit literals");
            let reg = if rng.random() { RegSpec::Cutoff } else { RegSpec::unit() };
            match check_fractional(&p, level, &reg)? {
                Ok(n) => checked += n,
                Err(ce) => {
                    let ce = json!({ "model": label, "initial": initial, "boundary": boundary, "reg": reg, "mismatch": ce });
                    return Ok(PropertyReport::new("fractional_composition", checked, Some(ce), Json::Null));
                }
            }
        }
    }
    Ok(PropertyReport::new("fractional_composition", checked, None, json!({ "max_level": max_level })))
}

/// All suites at the configured sizes.
pub fn run_all(cfg: &VerifySection, model: ModelSpec, problem: &ProblemSpec, seed: u64) -> Result<Vec<PropertyReport>> {
    let fault_for = |m: ModelSpec| if m == model { cfg.fault.as_ref() } else { None };
    let mut out = vec![
        rg_commutation(MODEL_A, "rg_commutation_a", cfg.max_level, fault_for(MODEL_A))?,
        rg_commutation(MODEL_B, "rg_commutation_b", cfg.max_level, fault_for(MODEL_B))?,
        fixed_point_attraction(cfg.max_iterations, cfg.random_maps, seed)?,
        stochastic_consistency(cfg.max_level.min(4), cfg.samples, seed)?,
        staircase(cfg.random_problems, seed)?,
        fractional(cfg.max_level, cfg.random_problems, seed)?,
    ];
    // the configured problem if it blows up, else the model-B example
    let witness_problem = match solve_strong(problem, &DyadicTime::integer(64)) {
        Ok(r) if matches!(r.outcome, BlowupOutcome::BlowupAt { .. }) => problem.clone(),
        _ => ProblemSpec::bits(MODEL_B, &[0, 1], &[1, 0]).expect("bit literals"),
    };
    let first = crate::solver::n_max0(&witness_problem)? + 2;
    out.push(nonuniqueness(&witness_problem, first..=first + cfg.max_level)?);
    Ok(out)
}
