//! End-to-end tests of the `sgue` binary: output shapes, decimal-string
//! round-trips, exit codes, cache behaviour, determinism.

use std::process::Command;

fn sgue() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sgue"))
}

fn run_ok(args: &[&str]) -> String {
    let out = sgue().args(args).output().expect("spawn sgue");
    assert!(
        out.status.success(),
        "sgue {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn partition_closed_form_and_roundtrip() {
    let stdout = run_ok(&[
        "partition", "--n", "2", "--z", "1", "--t", "0", "--prec", "192", "--no-cache",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let e_n = v["E_N"].as_str().unwrap();
    // 2 e^{-2} = 0.2706705664732254...
    assert!(e_n.starts_with("2.706705664732253"));
    // decimal strings re-parse to the same value
    let ctx = sgue_core::PrecisionContext::new(192);
    let parsed = ctx.parse_real(e_n).unwrap();
    assert_eq!(sgue_core::precision::decimal_string(&parsed), e_n);
    // norms serialized alongside
    assert_eq!(v["h"].as_array().unwrap().len(), 2);
}

#[test]
fn bn_csv_format() {
    let stdout = run_ok(&["--format", "csv", "bn", "--n", "1", "--prec", "128", "--no-cache"]);
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "N,B_N");
    let row = lines.next().unwrap();
    assert!(row.starts_with("1,3.6787944117144232"));
}

#[test]
fn equilibrium_reports_branch_points() {
    let stdout = run_ok(&["equilibrium", "--v2", "1", "--prec", "128"]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let lambda2 = v["lambda"][1].as_str().unwrap();
    let lambda3 = v["lambda"][2].as_str().unwrap();
    assert!(lambda2.starts_with("6.21062"));
    assert!(lambda3.starts_with("2.24669"));
    assert!(v["margins"]["off_support_max"].as_str().unwrap().starts_with('-'));
}

#[test]
fn moments_cache_is_written_and_bypassable() {
    let dir = std::env::temp_dir().join(format!("sgue-cli-cache-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let out = sgue()
        .args(["moments", "--n", "2", "--z", "1", "--t", "0", "--prec", "128"])
        .env("SGUE_CACHE_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let files: Vec<_> = std::fs::read_dir(&dir).unwrap().collect();
    assert!(!files.is_empty(), "cache file expected");

    let dir2 = std::env::temp_dir().join(format!("sgue-cli-nocache-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir2);
    let out = sgue()
        .args(["moments", "--n", "2", "--z", "1", "--t", "0", "--prec", "128", "--no-cache"])
        .env("SGUE_CACHE_DIR", &dir2)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(!dir2.exists(), "--no-cache must not create the cache dir");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn mc_is_reproducible_per_seed() {
    let args = [
        "mc", "--n", "2", "--z", "1", "--samples", "2000", "--seed", "7",
    ];
    let a = run_ok(&args);
    let b = run_ok(&args);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["samples"].as_u64().unwrap(), 2000);
    assert_eq!(v["rejected"].as_u64().unwrap(), 0);
}

#[test]
fn taylor_odd_order_vanishes() {
    let stdout = run_ok(&[
        "taylor", "--n", "1", "--z", "1", "--m", "1", "--prec", "192", "--no-cache",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let coeff: f64 = v["E_Nm"].as_str().unwrap().parse().unwrap();
    assert!(coeff.abs() < 1e-20, "odd coefficient {coeff}");
}

#[test]
fn compare_emits_sorted_csv() {
    let stdout = run_ok(&[
        "compare", "--n-list", "4,2", "--z", "1", "--t", "0", "--prec", "192", "--no-cache",
    ]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "N,z,t,exact,prediction,ratio,ratio_deviation");
    assert!(lines[1].starts_with("2,"));
    assert!(lines[2].starts_with("4,"));
}

#[test]
fn verify_smallv2_suite_exits_zero() {
    let out = sgue()
        .args(["verify", "--suite", "smallv2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn flag_errors_exit_two() {
    let out = sgue().args(["partition", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // domain errors also map to the flag-error code
    let out = sgue()
        .args(["partition", "--n", "0", "--z", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
