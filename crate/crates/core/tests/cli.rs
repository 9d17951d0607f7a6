//! End-to-end runs of the `adrt` binary on files in a temporary directory.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use adrt::format::square_to_text;
use adrt::grid::SquareImage;

fn adrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adrt")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_square(dir: &Path, name: &str, n: u32, seed: i64) -> std::path::PathBuf {
    let f = SquareImage::from_fn(n, |i, j| ((i as i64 * 31 + j as i64 * 17 + seed) % 255) - 127).unwrap();
    let p = dir.join(name);
    fs::write(&p, square_to_text(&f)).unwrap();
    p
}

#[test]
fn forward_then_inverse_gives_back_the_file() {
    let dir = tempfile::tempdir().unwrap();
    for n in 0..=5 {
        let img = write_square(dir.path(), "img.adrt", n, n as i64);
        let sino = dir.path().join("sino.adrt");
        let back = dir.path().join("back.adrt");
        assert!(adrt(&["forward", path(&img), "-o", path(&sino)]).status.success());
        assert!(adrt(&["inverse", path(&sino), "-o", path(&back)]).status.success());
        assert_eq!(fs::read(&img).unwrap(), fs::read(&back).unwrap(), "n={n}");
    }
}

#[test]
fn binary_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let img = write_square(dir.path(), "img.adrt", 4, 3);
    let sino = dir.path().join("sino.bin");
    let back = dir.path().join("back.adrt");
    assert!(adrt(&["forward", path(&img), "-o", path(&sino), "--binary"]).status.success());
    assert!(adrt(&["inverse", path(&sino), "-o", path(&back)]).status.success());
    assert_eq!(fs::read(&img).unwrap(), fs::read(&back).unwrap());
}

#[test]
fn oracle_output_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    for n in 0..=5 {
        let img = write_square(dir.path(), "img.adrt", n, 7);
        let fast = dir.path().join("fast.adrt");
        let slow = dir.path().join("slow.adrt");
        assert!(adrt(&["forward", path(&img), "-o", path(&fast)]).status.success());
        assert!(adrt(&["forward", path(&img), "-o", path(&slow), "--oracle"]).status.success());
        assert_eq!(fs::read(&fast).unwrap(), fs::read(&slow).unwrap(), "n={n}");
    }
}

#[test]
fn validate_json_lists_every_constraint() {
    let dir = tempfile::tempdir().unwrap();
    for n in 1..=4u32 {
        let img = write_square(dir.path(), "img.adrt", n, 1);
        let sino = dir.path().join("sino.adrt");
        assert!(adrt(&["forward", path(&img), "-o", path(&sino)]).status.success());
        let out = adrt(&["validate", path(&sino), "--json"]);
        assert_eq!(out.status.code(), Some(0));
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let size = 1u64 << n;
        let residuals = report["residuals"].as_array().unwrap();
        assert_eq!(residuals.len() as u64, size * (size - 1) / 2);
        assert_eq!(report["total"].as_u64(), Some(size * (size - 1) / 2));
        assert!(residuals.iter().all(|r| r["value"].as_i64() == Some(0)));
        assert_eq!(report["passed"], serde_json::Value::Bool(true));
    }
}

#[test]
fn bad_sinogram_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sino = dir.path().join("bad.adrt");
    fs::write(&sino, "ADRT1 sino n=1 hlo=-1 hhi=2 dtype=i64\n0 2\n3 5\n7 4\n").unwrap();
    assert_eq!(adrt(&["validate", path(&sino)]).status.code(), Some(2));
    let out = adrt(&["inverse", path(&sino)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert!(adrt(&["inverse", path(&sino), "--allow-out-of-range"]).status.success());
}

#[test]
fn overflow_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("big.adrt");
    let max = i64::MAX;
    fs::write(&img, format!("ADRT1 image n=1 hlo=0 hhi=2 dtype=i64\n{max} {max}\n{max} {max}\n")).unwrap();
    assert_eq!(adrt(&["forward", path(&img)]).status.code(), Some(3));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("bad.adrt");
    fs::write(&img, "ADRT1 image n=1 hlo=0 hhi=2 dtype=u8\n1 2\n3 4\n").unwrap();
    let out = adrt(&["forward", path(&img)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1, column 35"));
}

#[test]
fn lines_prints_the_diagonal() {
    let out = adrt(&["lines", "--n", "2", "--h", "0", "--s", "3"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0 0\n1 1\n2 2\n3 3\n");
}

#[test]
fn stdin_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let img = write_square(dir.path(), "img.adrt", 2, 0);
    let out = Command::new(env!("CARGO_BIN_EXE_adrt"))
        .args(["forward", "-"])
        .stdin(fs::File::open(&img).unwrap())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("ADRT1 sino n=2 hlo=-3 hhi=4 dtype=i64\n"));
}
