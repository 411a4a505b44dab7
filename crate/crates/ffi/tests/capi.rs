use std::ffi::{c_char, CString};
use std::ptr;

use peer_adjoint_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { pa_last_error(buf.as_mut_ptr().cast::<c_char>(), buf.len()) };
    buf.truncate(n.min(255));
    String::from_utf8(buf).unwrap()
}

fn suite(name: &str) -> *mut PaSuite {
    let name = CString::new(name).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { pa_suite_builtin(name.as_ptr(), &mut out) },
        PaStatus::Ok
    );
    assert!(!out.is_null());
    out
}

#[test]
fn builtin_suite_reports_stages_and_angle() {
    let s = suite("BDF3o32");
    let mut stages = 0;
    let mut alpha = 0.0;
    unsafe {
        assert_eq!(pa_suite_stages(s, &mut stages), PaStatus::Ok);
        assert_eq!(pa_suite_alpha_angle(s, 2000, &mut alpha), PaStatus::Ok);
        pa_suite_free(s);
    }
    assert_eq!(stages, 3);
    assert!((alpha - 86.032).abs() < 0.05);
}

#[test]
fn unknown_names_and_null_pointers_are_reported() {
    let bogus = CString::new("RK4").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { pa_suite_builtin(bogus.as_ptr(), &mut out) },
        PaStatus::UnknownName
    );
    assert!(out.is_null());
    assert!(last_error().contains("RK4"));
    assert_eq!(
        unsafe { pa_suite_builtin(ptr::null(), &mut out) },
        PaStatus::NullPointer
    );
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { pa_problem_van_der_pol(-1.0, &mut p) },
        PaStatus::InvalidArgument
    );
    let mut stages = 0;
    assert_eq!(
        unsafe { pa_suite_stages(ptr::null(), &mut stages) },
        PaStatus::NullPointer
    );
    unsafe {
        pa_suite_free(ptr::null_mut());
        pa_problem_free(ptr::null_mut());
        pa_solution_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates_and_terminates() {
    let bogus = CString::new("no-such-method").unwrap();
    let mut out = ptr::null_mut();
    unsafe { pa_suite_builtin(bogus.as_ptr(), &mut out) };
    let mut buf = [0x7fu8; 8];
    let full = unsafe { pa_last_error(buf.as_mut_ptr().cast::<c_char>(), buf.len()) };
    assert!(full > 8);
    assert_eq!(buf[7], 0);
    assert_eq!(unsafe { pa_last_error(ptr::null_mut(), 0) }, full);
}

#[test]
fn solve_roundtrip_through_handles() {
    let s = suite("PEER3o32w");
    let name = CString::new("rayleigh").unwrap();
    let mut prob = ptr::null_mut();
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(pa_problem_by_name(name.as_ptr(), &mut prob), PaStatus::Ok);
        let mut dim = 0;
        assert_eq!(pa_problem_dim(prob, &mut dim), PaStatus::Ok);
        assert_eq!(dim, 2);
        assert_eq!(pa_solve(s, prob, 40, &mut sol), PaStatus::Ok);

        let (mut steps, mut stages, mut m) = (0, 0, 0);
        assert_eq!(
            pa_solution_shape(sol, &mut steps, &mut stages, &mut m),
            PaStatus::Ok
        );
        assert_eq!((steps, stages, m), (41, 3, 2));

        let mut y = [0.0; 2];
        let mut t = f64::NAN;
        assert_eq!(
            pa_solution_state(sol, 0, 0, &mut t, y.as_mut_ptr(), 2),
            PaStatus::Ok
        );
        assert!(t.is_finite() && y.iter().all(|v| v.is_finite()));
        let mut p = [0.0; 2];
        assert_eq!(
            pa_solution_adjoint(sol, steps - 1, 2, ptr::null_mut(), p.as_mut_ptr(), 2),
            PaStatus::Ok
        );
        assert_eq!(
            pa_solution_state(sol, steps, 0, ptr::null_mut(), y.as_mut_ptr(), 2),
            PaStatus::OutOfRange
        );
        assert_eq!(
            pa_solution_state(sol, 0, 0, ptr::null_mut(), y.as_mut_ptr(), 1),
            PaStatus::InvalidArgument
        );

        let (mut yt, mut p0) = ([0.0; 2], [0.0; 2]);
        assert_eq!(
            pa_solution_boundary(sol, yt.as_mut_ptr(), p0.as_mut_ptr(), 2),
            PaStatus::Ok
        );
        let mut res = f64::NAN;
        assert_eq!(pa_solution_residual(s, prob, sol, &mut res), PaStatus::Ok);
        assert!(res <= 1e-11 * 100.0, "{res}");

        pa_solution_free(sol);
        pa_problem_free(prob);
        pa_suite_free(s);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/peer_adjoint.h");
    let src = include_str!("../src/lib.rs");
    let exports: Vec<&str> = src
        .split("pub unsafe extern \"C\" fn ")
        .skip(1)
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    for handle in ["PaSuite", "PaProblem", "PaSolution"] {
        assert!(header.contains(&format!("typedef struct {handle} {handle};")));
    }
}

/// Compiles and runs a C client against the static library when a C
/// compiler is on the path.
#[test]
fn c_client_links_and_runs() {
    use std::path::PathBuf;
    use std::process::Command;

    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("cc not found; skipping");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .and_then(|deps| deps.parent())
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libpeer_adjoint_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let exe = tmp.join("peer_adjoint_c_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c_smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout)
            .split_whitespace()
            .count(),
        3
    );
}
