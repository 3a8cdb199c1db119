//! End-to-end runs of the binary: output framing, reproducibility, design
//! hand-off between commands and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn warplab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warplab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("warplab-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn csv_starts_with_hash_and_seed() {
    let d = scratch("header");
    let out = warplab(&d, &["design-profile", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    let hash = first.strip_prefix("# config_hash=").unwrap().strip_suffix(" seed=3").unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(lines.next(), Some("pulse,alpha_left,alpha_right"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn reruns_are_identical_and_overrides_change_the_hash() {
    let d = scratch("rerun");
    let a = warplab(&d, &["measure", "--metric", "papr", "--trials", "30", "--seed", "5"]);
    let b = warplab(&d, &["measure", "--metric", "papr", "--trials", "30", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = warplab(&d, &["measure", "--metric", "papr", "--trials", "31", "--seed", "5"]);
    assert_ne!(a.stdout.split(|&x| x == b'\n').next(), c.stdout.split(|&x| x == b'\n').next());
}

#[test]
fn ber_reports_gains_against_first_config() {
    let d = scratch("ber");
    std::fs::write(
        d.join("lab.toml"),
        "[[waveforms]]\nkind = \"zt\"\nz = 4\nqam_order = 16\n\n[[waveforms]]\nkind = \"cp-dfts\"\nqam_order = 16\n\n[sweep]\nsnr_db = [10.0, 20.0]\n",
    )
    .unwrap();
    let out = warplab(&d, &["ber", "--config", "lab.toml", "--bits", "10000", "--out", "ber.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(d.join("ber.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(2).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][0], "zt-dfts-ofdm-z4");
    assert_eq!(rows[0][5], "1");
    for r in &rows {
        let (ber, errors, bits): (f64, f64, f64) =
            (r[2].parse().unwrap(), r[3].parse().unwrap(), r[4].parse().unwrap());
        assert!(bits >= 10_000.0);
        assert!((ber - errors / bits).abs() < 1e-12);
    }
}

#[test]
fn warp_design_feeds_the_measurements() {
    let d = scratch("design");
    let out = warplab(&d, &["design-warp", "--out", "warp"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("max leakage"));
    for f in ["params.toml", "anchors.csv", "leakage.csv"] {
        assert!(d.join("warp").join(f).is_file(), "{f}");
    }
    let anchors = std::fs::read_to_string(d.join("warp/anchors.csv")).unwrap();
    assert_eq!(anchors.lines().count(), 2 + 14);
    std::fs::write(
        d.join("lab.toml"),
        "[[waveforms]]\nkind = \"warped\"\nqam_order = 64\ndesign = \"warp/params.toml\"\n",
    )
    .unwrap();
    let out = warplab(&d, &["measure", "--config", "lab.toml", "--metric", "leakage"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let leaks: Vec<f64> = text.lines().skip(2).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(leaks.len(), 12);
    assert!(leaks.iter().all(|&l| l <= 0.003 + 1e-9));
}

#[test]
fn validation_failures_exit_with_two() {
    let d = scratch("validation");
    std::fs::write(d.join("bad.toml"), "bogus = 1\n").unwrap();
    let cases: [&[&str]; 5] = [
        &["ber", "--bits", "100"],
        &["bench", "--config", "bad.toml"],
        &["measure", "--metric", "nonsense"],
        &["measure", "--metric", "psd", "--trials", "0"],
        &["design-profile", "--case", "4"],
    ];
    for args in cases {
        assert_eq!(warplab(&d, args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unreachable_leakage_bound_exits_with_three() {
    let d = scratch("infeasible");
    let out = warplab(&d, &["design-warp", "--xi", "1e-12", "--out", "warp"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("best point"));
    assert!(!d.join("warp/params.toml").exists());
}
