use std::ffi::{c_char, CStr};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use msrg::lattice::{DyadicTime, ProblemSpec, State, MODEL_A, MODEL_B};
use msrg::rg::rg_apply;
use msrg::solver::{flow_psi, solve_regularized, RegSpec};
use msrg_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 512];
    unsafe { msrg_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn solution_cells_match_the_library() {
    let (a, b) = ([0u8, 1], [1u8, 0]);
    let mut p = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(msrg_problem_new(MsrgModel::B, a.as_ptr(), 2, b.as_ptr(), 2, &mut p), MsrgStatus::Ok);
        assert_eq!(msrg_solve(p, 5, MsrgReg::Unit, 3, 1, &mut s), MsrgStatus::Ok);
    }
    let problem = ProblemSpec::bits(MODEL_B, &a, &b).unwrap();
    let horizon = DyadicTime::new(3, 1);
    let want = solve_regularized(&problem, 5, &RegSpec::unit(), &horizon).unwrap();
    for n in 0..=5 {
        let mut len = 0;
        assert_eq!(unsafe { msrg_solution_row_len(s, n, &mut len) }, MsrgStatus::Ok);
        assert_eq!(len, want.row_len(n));
        for i in 0..len as u64 {
            let mut bit = 7;
            assert_eq!(unsafe { msrg_solution_value(s, n, i, &mut bit) }, MsrgStatus::Ok);
            assert_eq!(bit, want.value(n, i).unwrap().as_bit().unwrap());
        }
    }
    let mut ok = 0;
    assert_eq!(unsafe { msrg_solution_residual_ok(s, &mut ok) }, MsrgStatus::Ok);
    assert_eq!(ok, 1);
    unsafe {
        msrg_solution_free(s);
        msrg_problem_free(p);
    }
}

#[test]
fn renormalized_map_matches_the_library() {
    let mut psi = ptr::null_mut();
    let mut next = ptr::null_mut();
    unsafe {
        assert_eq!(msrg_flow_psi_new(MsrgModel::A, 3, MsrgReg::Cutoff, &mut psi), MsrgStatus::Ok);
        assert_eq!(msrg_flow_rg_apply(psi, &mut next), MsrgStatus::Ok);
    }
    let want = rg_apply(&flow_psi(MODEL_A, 3, RegSpec::Cutoff).unwrap(), MODEL_A);
    for a in msrg::lattice::grid_states(5) {
        let input: Vec<u8> = a.take(5).iter().map(|v| v.as_bit().unwrap()).collect();
        let mut output = [9u8; 5];
        let st = unsafe { msrg_flow_apply(next, input.as_ptr(), 5, output.as_mut_ptr(), 5) };
        assert_eq!(st, MsrgStatus::Ok);
        let expect = want.apply(&State::bits(&input)).unwrap();
        assert_eq!(State::bits(&output), expect.truncated(5));
    }
    unsafe {
        msrg_flow_free(next);
        msrg_flow_free(psi);
    }
}

#[test]
fn errors_set_codes_and_messages() {
    let mut p = ptr::null_mut();
    let bad = [2u8];
    let st = unsafe { msrg_problem_new(MsrgModel::A, bad.as_ptr(), 1, ptr::null(), 0, &mut p) };
    assert_eq!(st, MsrgStatus::InvalidArgument);
    assert!(p.is_null());
    assert!(last_error().contains("not a bit"));
    assert_eq!(msrg_last_error_length(), last_error().len() + 1);

    let st = unsafe { msrg_problem_new(MsrgModel::A, ptr::null(), 3, ptr::null(), 0, &mut p) };
    assert_eq!(st, MsrgStatus::NullPointer);
    assert!(last_error().contains("initial"));

    let mut needed = 0;
    let mut small = [0 as c_char; 2];
    let st = unsafe { msrg_phase_p_coefficient(3, 5, small.as_mut_ptr(), small.len(), &mut needed) };
    assert_eq!(st, MsrgStatus::BufferTooSmall);
    assert_eq!(needed, "8896".len() + 1);
    let st = unsafe { msrg_phase_p_coefficient(1, 100, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(st, MsrgStatus::OutOfRange);

    // success clears the message
    let st = unsafe { msrg_problem_new(MsrgModel::A, ptr::null(), 0, ptr::null(), 0, &mut p) };
    assert_eq!(st, MsrgStatus::Ok);
    assert_eq!(msrg_last_error_length(), 0);
    unsafe { msrg_problem_free(p) };
    unsafe { msrg_problem_free(ptr::null_mut()) };
}

#[test]
fn truncated_error_buffer_stays_terminated() {
    let st = unsafe { msrg_solution_value(ptr::null(), 0, 0, ptr::null_mut()) };
    assert_eq!(st, MsrgStatus::NullPointer);
    let mut buf = [1 as c_char; 4];
    let full = unsafe { msrg_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(full > 4);
    assert_eq!(buf[3], 0);
}

#[test]
fn blowup_time_of_the_staircase() {
    let mut p = ptr::null_mut();
    let (a, b) = ([0u8, 1], [1u8, 0]);
    unsafe { assert_eq!(msrg_problem_new(MsrgModel::B, a.as_ptr(), 2, b.as_ptr(), 2, &mut p), MsrgStatus::Ok) };
    let (mut found, mut num, mut lvl) = (0u8, 0u64, 0u32);
    let st = unsafe { msrg_blowup_time(p, 4, 0, &mut found, &mut num, &mut lvl) };
    assert_eq!(st, MsrgStatus::Ok);
    let want = msrg::solver::solve_strong(&ProblemSpec::bits(MODEL_B, &a, &b).unwrap(), &DyadicTime::integer(4)).unwrap();
    match want.outcome {
        msrg::solver::BlowupOutcome::BlowupAt { time } => {
            assert_eq!(found, 1);
            assert_eq!(DyadicTime::new(num, lvl), time);
        }
        _ => assert_eq!(found, 0),
    }
    unsafe { msrg_problem_free(p) };
}

/// The generated header compiles and links against the static library.
#[test]
fn c_program_links_against_the_header() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // tests run from target/<profile>/deps; the static library sits one level up
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libmsrg_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let bin = tempfile_path("msrg_smoke");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    let _ = std::fs::remove_file(&bin);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{stem}_{}", std::process::id()))
}
