//! Subcommand bodies. Each writes its inputs as `config.toml` next to its outputs.

use std::path::{Path, PathBuf};

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::RunConfig;
use super::io::{gray, gray_mean, time_cells, value_cell, write_json, write_pgm, write_text, CsvOut};
use super::verify::run_all;
use super::{CliError, Status};
use crate::lattice::{cantor_value, grid_states, DyadicTime, LatticePoint, ModelSpec, Space, State};
use crate::rg::map_table_export;
use crate::solver::{flow_psi, solve_regularized, solve_strong, Solution};
use crate::stochastic::{
    estimate_expectations, fit_convergence_tail, limit_kernel_check, p_coefficient, sample_solution, sampler_psi,
    NoiseStream,
};

/// Rasters resolve at most this many scales; finer rows are not drawn.
const RASTER_MAX_SCALE: u32 = 14;

fn prepare(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    // the persisted copy must re-run anywhere, so it carries no output path
    let mut persisted = cfg.clone();
    persisted.out_dir = None;
    write_text(&dir.join("config.toml"), &persisted.to_toml()?)?;
    Ok(dir)
}

fn require_bit(model: &ModelSpec, what: &str) -> Result<(), CliError> {
    if model.is_bit() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} needs a symbolic (bit) model")))
    }
}

fn bits(s: &State, depth: usize) -> String {
    s.take(depth).iter().map(|v| if v.is_zero() { '0' } else { '1' }).collect()
}

/// One pixel per cell of the `tau_R` grid; each scale holds its latest
/// lattice value across the columns it spans.
fn lattice_raster(path: &Path, sol: &Solution) -> Result<(), CliError> {
    let r = sol.level().min(RASTER_MAX_SCALE);
    let width = sol.row_len(r);
    let height = r as usize + 1;
    let mut px = vec![255u8; width * height];
    for n in 0..=r {
        let stride = 1usize << (r - n);
        for c in 0..width {
            let v = sol.value(n, (c / stride) as u64).expect("column inside the window");
            px[n as usize * width + c] = gray(v);
        }
    }
    write_pgm(path, width, height, &px)
}

pub fn simulate(cfg: &RunConfig) -> Result<Status, CliError> {
    let problem = cfg.problem()?;
    let horizon = cfg.horizon()?;
    let levels = cfg.levels()?;
    let reg = cfg.reg_spec()?;
    let noise = cfg.noise.as_ref().map(|_| cfg.noise_spec()).transpose()?;
    if cfg.strong {
        require_bit(&problem.model, "strong-solution analysis")?;
    }
    let dir = prepare(cfg)?;
    let space = problem.model.space().name();
    let mut summary = Vec::new();
    let mut status = Status::Ok;
    for &level in &levels {
        let sol = match &noise {
            Some(spec) => sample_solution(&problem, level, &NoiseStream::new(spec.clone(), cfg.seed, 0), &horizon)?,
            None => solve_regularized(&problem, level, &reg, &horizon)?,
        };
        let mut csv = CsvOut::create(
            &dir.join(format!("lattice_N{level}.csv")),
            "lattice",
            &format!("space={space} level={level}"),
            &["n", "t_num", "t_level", "value"],
        )?;
        for (n, i, v) in sol.cells() {
            let (num, lvl) = time_cells(&DyadicTime::from_index(i, n));
            csv.row([n.to_string(), num, lvl.to_string(), value_cell(v)])?;
        }
        csv.finish()?;
        if cfg.raster {
            lattice_raster(&dir.join(format!("lattice_N{level}.pgm")), &sol)?;
        }
        let residual = sol.residual()?;
        if !residual.passes() {
            status = Status::PropertyFailed;
        }
        summary.push(json!({
            "level": level,
            "cells": sol.cells().count(),
            "residual_passes": residual.passes(),
            "violations": residual.violations().len(),
        }));
    }
    write_json(&dir.join("simulate_summary.json"), "simulate", &summary)?;
    if cfg.strong {
        let report = solve_strong(&problem, &horizon)?;
        write_json(&dir.join("blowup.json"), "blowup", &report)?;
        println!("blowup: {}", serde_json::to_string(&report.outcome).unwrap_or_default());
    }
    println!("simulate: {} level(s) written to {}", levels.len(), dir.display());
    Ok(status)
}

fn ratio_dec(r: &num_rational::BigRational) -> String {
    format!("{:.12}", r.to_f64().unwrap_or(f64::NAN))
}

pub fn rg(cfg: &RunConfig) -> Result<Status, CliError> {
    let model = cfg.model_spec()?;
    require_bit(&model, "rg")?;
    let levels = cfg.levels()?;
    let reg = cfg.reg_spec()?;
    let depth = cfg.rg.depth;
    if depth == 0 || depth > 20 {
        return Err(CliError::Config(format!("map-table depth {depth} outside 1..=20")));
    }
    let noise = if cfg.rg.stochastic { Some(cfg.noise_spec()?) } else { None };
    let dir = prepare(cfg)?;
    let cols = ["input", "output", "x_in", "x_out", "x_in_dec", "x_out_dec"];
    for &level in &levels {
        match &noise {
            None => {
                let psi = flow_psi(model, level, reg.clone())?;
                let rows = map_table_export(&psi, depth)?;
                let mut csv = CsvOut::create(
                    &dir.join(format!("rg_N{level}.csv")),
                    "rgmap",
                    &format!("level={level} depth={depth}"),
                    &cols,
                )?;
                for r in rows {
                    csv.row([
                        bits(&r.input, depth),
                        bits(&r.output, depth),
                        r.x_in.to_string(),
                        r.x_out.to_string(),
                        ratio_dec(&r.x_in),
                        ratio_dec(&r.x_out),
                    ])?;
                }
                csv.finish()?;
            }
            Some(spec) => {
                let sampler = sampler_psi(model, level, spec.clone())?;
                let inputs: Vec<State> = grid_states(depth).collect();
                let mut all = CsvOut::create(
                    &dir.join(format!("rg_N{level}_all.csv")),
                    "rgmap_samples",
                    &format!("level={level} depth={depth} seeds={}", cfg.rg.seeds),
                    &["seed", "input", "output", "x_in", "x_out", "x_in_dec", "x_out_dec"],
                )?;
                for s in 0..cfg.rg.seeds {
                    let mut csv = CsvOut::create(
                        &dir.join(format!("rg_N{level}_seed{s}.csv")),
                        "rgmap",
                        &format!("level={level} depth={depth} seed_stream={s}"),
                        &cols,
                    )?;
                    for a in &inputs {
                        // one noise realization per seed, shared by all inputs
                        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                        rng.set_stream(s);
                        let out = sampler.draw(a, &mut rng)?;
                        let (xi, xo) = (cantor_value(a)?, cantor_value(&out)?);
                        let row = [
                            bits(a, depth),
                            bits(&out, depth),
                            xi.to_string(),
                            xo.to_string(),
                            ratio_dec(&xi),
                            ratio_dec(&xo),
                        ];
                        csv.row(row.iter())?;
                        all.row(std::iter::once(s.to_string()).chain(row))?;
                    }
                    csv.finish()?;
                }
                all.finish()?;
            }
        }
    }
    println!("rg: {} level(s) written to {}", levels.len(), dir.display());
    Ok(Status::Ok)
}

pub fn mc(cfg: &RunConfig) -> Result<Status, CliError> {
    let problem = cfg.problem()?;
    let levels = cfg.levels()?;
    let noise = cfg.noise_spec()?;
    if cfg.samples < 2 {
        return Err(CliError::Config("mc needs at least 2 samples".into()));
    }
    let tracked = cfg.mc_points()?;
    let horizon = cfg.horizon()?;
    let raster_scales = cfg.mc.raster_scales.min(*levels.iter().min().expect("non-empty"));
    let points = if tracked.is_empty() {
        if raster_scales == 0 {
            return Err(CliError::Config("mc.raster_scales must be at least 1".into()));
        }
        let end = horizon
            .index_at(raster_scales)
            .ok_or_else(|| CliError::Config("horizon is not on the raster grid".into()))?;
        (1..=raster_scales)
            .flat_map(|n| {
                let stride = 1u64 << (raster_scales - n);
                (0..=end / stride).map(move |m| LatticePoint::at_index(n, m))
            })
            .collect()
    } else {
        tracked.clone()
    };
    let dir = prepare(cfg)?;
    let table = estimate_expectations(&problem, &noise, &levels, &points, cfg.samples, cfg.seed)?;

    let mut csv = CsvOut::create(
        &dir.join("mc_expectations.csv"),
        "expectations",
        &format!("samples={} seed={}", cfg.samples, cfg.seed),
        &["N", "n", "t_num", "t_level", "mean", "ci"],
    )?;
    for e in &table {
        let (num, lvl) = time_cells(&e.point.time);
        csv.row([
            e.level.to_string(),
            e.point.scale.to_string(),
            num,
            lvl.to_string(),
            format!("{:.6}", e.mean),
            format!("{:.6}", e.ci_half),
        ])?;
    }
    csv.finish()?;

    let mut fits = Vec::new();
    if levels.len() >= 4 + cfg.mc.fit_skip {
        for (i, p) in points.iter().enumerate() {
            let series: Vec<(u32, f64)> = levels
                .iter()
                .enumerate()
                .map(|(j, &l)| (l, table[j * points.len() + i].mean))
                .collect();
            let fit = fit_convergence_tail(&series, cfg.mc.fit_skip)?;
            fits.push(json!({ "n": p.scale, "t": p.time, "limit": fit.limit, "exponent": fit.exponent, "residual": fit.residual }));
        }
    }
    write_json(&dir.join("mc_fit.json"), "fit", &fits)?;

    if tracked.is_empty() && cfg.raster {
        let r = raster_scales;
        let width = horizon.index_at(r).expect("checked above") as usize + 1;
        for (j, &level) in levels.iter().enumerate() {
            let mut px = vec![255u8; width * r as usize];
            let rows = &table[j * points.len()..(j + 1) * points.len()];
            for e in rows {
                let n = e.point.scale;
                let stride = 1usize << (r - n);
                let c0 = e.point.index() as usize * stride;
                for c in c0..(c0 + stride).min(width) {
                    px[(n as usize - 1) * width + c] = gray_mean(e.mean);
                }
            }
            write_pgm(&dir.join(format!("mc_means_N{level}.pgm")), width, r as usize, &px)?;
        }
    }
    println!("mc: {} expectations, {} fits written to {}", table.len(), fits.len(), dir.display());
    Ok(Status::Ok)
}

pub fn phase(cfg: &RunConfig) -> Result<Status, CliError> {
    let model = cfg.model_spec()?;
    if model.space() != Space::Phase {
        return Err(CliError::Config("phase needs the circle model".into()));
    }
    if model != crate::lattice::PHASE_MODEL {
        return Err(CliError::Config("coefficients are defined for f = 2u + 2u', g = 0 only".into()));
    }
    let levels = cfg.levels()?;
    let problem = cfg.problem()?;
    let noise = cfg.noise_spec()?;
    let t = cfg.phase_time()?;
    let dir = prepare(cfg)?;

    let rows: Vec<_> = levels
        .iter()
        .map(|&level| {
            let p: Vec<Option<String>> = (1..=level)
                .map(|n| p_coefficient(n, level).ok().map(|c| c.to_string()))
                .collect();
            json!({ "level": level, "p": p })
        })
        .collect();
    write_json(&dir.join("phase_coefficients.json"), "phase_coefficients", &rows)?;

    let top = *levels.iter().max().expect("non-empty");
    let report = limit_kernel_check(&problem.initial, top, &t, cfg.samples, cfg.phase.components, &noise, cfg.seed)?;
    write_json(&dir.join("limit_kernel.json"), "limit_kernel", &report)?;
    println!("phase: {} level(s); limit kernel at t={} N={top} written to {}", levels.len(), t, dir.display());
    Ok(Status::Ok)
}

pub fn verify(cfg: &RunConfig) -> Result<Status, CliError> {
    let model = cfg.model_spec()?;
    let problem = if model.is_bit() {
        cfg.problem()?
    } else {
        crate::lattice::ProblemSpec::bits(crate::lattice::MODEL_B, &[0, 1], &[1, 0]).expect("bit literals")
    };
    let dir = prepare(cfg)?;
    let reports = run_all(&cfg.verify, model, &problem, cfg.seed)?;
    write_json(&dir.join("verify_report.json"), "verify", &reports)?;
    let mut failed = false;
    for r in &reports {
        println!("{} {} ({} checks)", if r.passed { "PASS" } else { "FAIL" }, r.name, r.checked);
        if let Some(ce) = &r.counterexample {
            println!("  counterexample: {ce}");
        }
        failed |= !r.passed;
    }
    Ok(if failed { Status::PropertyFailed } else { Status::Ok })
}
