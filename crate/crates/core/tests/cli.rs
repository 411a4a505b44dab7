use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_peer-adjoint");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_ok(args: &[&str]) -> String {
    let o = run(args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn csv_twice(args: &[&str], dir: &Path) -> (String, String) {
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        let mut full = args.to_vec();
        full.extend(["--csv", path.to_str().unwrap()]);
        run_ok(&full);
    }
    (
        fs::read_to_string(a).unwrap(),
        fs::read_to_string(b).unwrap(),
    )
}

#[test]
fn verify_orders_reports_each_row() {
    let out = run_ok(&["verify-orders", "--method", "BDF3o32"]);
    assert!(out.contains("last-forward"));
    assert!(!out.contains("FAIL"));
    let out = run_ok(&["verify-orders", "--method", "BDF3o22"]);
    assert!(out.contains("not met: last-forward"));
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let o = run(&["converge", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--bogus"));
    let o = run(&["stability", "--method", "BDF3o32", "--ntheta", "many"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--ntheta"));
}

#[test]
fn computation_failures_exit_one() {
    let o = run(&["synthesize", "--d1", "0.3", "--d3", "0.3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not on the order-compatibility curve"));
    let o = run(&["verify-orders", "--method", "no/such/file.txt"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synthesized_file_feeds_back_into_stability() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("method.txt");
    let d = (0.25 + 33f64.sqrt() / 12.0).to_string();
    run_ok(&[
        "synthesize",
        "--d1",
        &d,
        "--d3",
        &d,
        "--out",
        path.to_str().unwrap(),
    ]);
    let out = run_ok(&["stability", "--method", path.to_str().unwrap()]);
    assert!(out.contains("87.87"), "{out}");
}

#[test]
fn scan_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = csv_twice(
        &["scan", "--box", "0,1,0,1", "--seeds", "60", "--rng", "42"],
        dir.path(),
    );
    assert_eq!(a, b);
    assert!(a.starts_with("d1,d3,q_residual,zero_stable,alpha_degrees,k_nonnegative\n"));
    assert!(a.lines().count() > 10);
}

#[test]
fn converge_csv_is_reproducible_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = csv_twice(
        &[
            "converge",
            "--method",
            "PEER3o32w",
            "--problem",
            "rayleigh",
            "--grids",
            "40,80",
        ],
        dir.path(),
    );
    assert_eq!(a, b);
    assert!(a.starts_with("N,var,error,order\n"));
    let rows = peer_adjoint::harness::parse_convergence_csv(&a).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().filter(|r| r.n == 80).all(|r| r.order.is_some()));
    assert!(rows.iter().filter(|r| r.n == 40).all(|r| r.order.is_none()));
}

#[test]
fn solve_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = csv_twice(
        &[
            "solve",
            "--method",
            "BDF3o22",
            "--problem",
            "vdp",
            "--N",
            "20",
        ],
        dir.path(),
    );
    assert_eq!(a, b);
    // Header plus 21 steps of 3 stages.
    assert_eq!(a.lines().count(), 1 + 21 * 3);
}

#[test]
fn converge_rejects_small_reference() {
    let o = run(&[
        "converge",
        "--method",
        "BDF3o32",
        "--problem",
        "rayleigh",
        "--grids",
        "40,80",
        "--nref",
        "320",
    ]);
    assert_eq!(o.status.code(), Some(1));
}
