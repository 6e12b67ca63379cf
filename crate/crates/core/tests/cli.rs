//! End-to-end runs of the `msrg` binary.

use std::path::Path;
use std::process::{Command, Output};

fn msrg(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msrg"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MSRG_OUT_DIR")
        .output()
        .unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&read(p)).unwrap()
}

#[test]
fn simulate_writes_versioned_lattice_and_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let out = msrg(
        &["simulate", "--model", "b", "--initial", "0,1", "--boundary", "1", "-N", "5", "--strong"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("lattice_N5.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "# schema=msrg.lattice/1 space=bit level=5");
    assert_eq!(lines.next().unwrap(), "n,t_num,t_level,value");
    // u_2(0) = a_2 = 1
    assert!(csv.lines().any(|l| l == "2,0,0,1"));
    let blowup = json(&dir.path().join("blowup.json"));
    assert_eq!(blowup["schema"], "msrg.blowup/1");
    assert_eq!(blowup["data"]["outcome"]["kind"], "blowup_at");
    assert_eq!(blowup["data"]["outcome"]["time"]["num"], "1");
    assert_eq!(blowup["data"]["outcome"]["time"]["level"], 1);
    let pgm = std::fs::read(dir.path().join("lattice_N5.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n33 6\n255\n"));
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let out = msrg(&["simulate", "--model", "a", "--initial", "1", "--boundary", "1,0", "-N", "4,6"], &first);
    assert!(out.status.success());
    let cfg = first.join("config.toml");
    assert!(!read(&cfg).contains("out_dir"));
    let second = dir.path().join("second");
    let out = msrg(&["simulate", "--config", cfg.to_str().unwrap()], &second);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["lattice_N4.csv", "lattice_N6.csv", "config.toml"] {
        assert_eq!(read(&first.join(f)), read(&second.join(f)), "{f}");
    }
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_msrg"))
        .args(["simulate", "-N", "2", "--no-raster"])
        .env("MSRG_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("lattice_N2.csv").exists());
    assert!(!dir.path().join("lattice_N2.pgm").exists());
}

#[test]
fn rg_table_is_in_cantor_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let out = msrg(&["rg", "--model", "a", "-N", "1", "--depth", "2"], dir.path());
    assert!(out.status.success());
    let csv = read(&dir.path().join("rg_N1.csv"));
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    // psi^(1)(a) = (f(a_1, 0), 0, ...) with f(1, 0) = 1 in model A
    assert!(rows.contains(&"10,10,2/3,2/3,0.666666666667,0.666666666667"));
    assert!(rows.contains(&"01,00,2/9,0,0.222222222222,0.000000000000"));
}

#[test]
fn stochastic_rg_writes_one_file_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "model = \"a\"\nlevels = [2]\n[rg]\ndepth = 2\nstochastic = true\nseeds = 3\n").unwrap();
    let out = msrg(&["rg", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for s in 0..3 {
        assert!(dir.path().join(format!("rg_N2_seed{s}.csv")).exists());
    }
    let all = read(&dir.path().join("rg_N2_all.csv"));
    assert_eq!(all.lines().count(), 2 + 3 * 4);
}

#[test]
fn mc_tracks_points_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "model = \"b\"\ninitial = [0, 1]\nboundary = [1, 0]\nlevels = [6, 7, 8, 9]\nsamples = 640\n\
         [mc]\npoints = [[5, \"29/32\"], [1, \"0.5\"]]\n",
    )
    .unwrap();
    let out = msrg(&["mc", "--config", cfg.to_str().unwrap(), "--bernoulli", "1/2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("mc_expectations.csv"));
    assert_eq!(csv.lines().nth(1).unwrap(), "N,n,t_num,t_level,mean,ci");
    assert_eq!(csv.lines().count(), 2 + 8);
    let fit = json(&dir.path().join("mc_fit.json"));
    assert_eq!(fit["data"].as_array().unwrap().len(), 2);
    // the point before the blowup is deterministic: constant series, no exponent
    assert!(fit["data"][1]["exponent"].is_null());
}

#[test]
fn phase_reports_coefficients_and_limit_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let out = msrg(
        &["phase", "--model", "phase", "--initial", "1/4,1/8", "-N", "3,5", "--samples", "500"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p = json(&dir.path().join("phase_coefficients.json"));
    assert_eq!(p["data"][1]["level"], 5);
    assert_eq!(p["data"][1]["p"][1], "32");
    let k = json(&dir.path().join("limit_kernel.json"));
    // 2 (1/4) + 2 (1/8) = 3/4
    assert_eq!(k["data"]["components"][0]["law"]["law"], "dirac");
    assert_eq!(k["data"]["components"][0]["law"]["value"]["phase"], 3u64 << 62);
}

#[test]
fn verify_passes_and_catches_an_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(
        &cfg,
        "model = \"b\"\ninitial = [0, 1]\nboundary = [1, 0]\n\
         [verify]\nmax_level = 4\nmax_iterations = 5\nrandom_maps = 2\nrandom_problems = 5\nsamples = 400\n",
    )
    .unwrap();
    let ok = msrg(&["verify", "--config", cfg.to_str().unwrap()], &dir.path().join("ok"));
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let report = json(&dir.path().join("ok/verify_report.json"));
    assert!(report["data"].as_array().unwrap().iter().all(|r| r["passed"] == true));

    let bad = msrg(&["verify", "--config", cfg.to_str().unwrap(), "--fault-flip", "1,1"], &dir.path().join("bad"));
    assert_eq!(bad.status.code(), Some(1));
    let report = json(&dir.path().join("bad/verify_report.json"));
    let rg_b = report["data"].as_array().unwrap().iter().find(|r| r["name"] == "rg_commutation_b").unwrap();
    assert_eq!(rg_b["passed"], false);
    assert!(rg_b["counterexample"]["input"].is_string());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["simulate", "--model", "zzz"][..],
        &["simulate", "-N", "0"],
        &["simulate", "--reg", "sideways"],
        &["rg", "--model", "phase"],
        &["phase", "--model", "b"],
        &["simulate", "--model", "phase", "--strong"],
    ] {
        let out = msrg(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "modle = \"a\"\n").unwrap();
    let out = msrg(&["simulate", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
