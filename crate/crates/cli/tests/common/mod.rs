use std::fs;
use std::path::Path;
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_klap");

/// Small configurations of every subcommand.
pub const SMALL_RUNS: &[(&str, &[&str])] = &[
    ("spectrum", &["spectrum", "--q", "1009", "--format", "csv"]),
    ("transform-check", &["transform-check", "--q", "31", "--format", "csv"]),
    ("voronoi-check", &["voronoi-check", "--q", "31", "--c", "0.3472", "--M", "12", "--N", "12", "--spu", "32", "--kernel", "random"]),
    ("oscint-report", &["oscint-report", "--q", "101", "--c", "1.2", "--M", "10", "--N", "10", "--Q", "3", "--per-region", "4", "--format", "csv"]),
    ("stationary-report", &["stationary-report", "--q", "1009", "--c", "3", "--M", "12", "--N", "12", "--side", "3", "--format", "csv"]),
    ("bilinear-sweep", &["bilinear-sweep", "--q", "1009", "--M", "16", "--N", "24", "--trials", "4", "--seed", "9", "--format", "csv"]),
    ("prime-sum", &["prime-sum", "--q", "1009", "--points", "5", "--format", "csv"]),
    ("hb-check", &["hb-check", "--X", "500", "--J", "3", "--format", "csv"]),
    ("exponent-certify", &["exponent-certify", "--x", "1", "--eps", "1/100", "--resolution", "120", "--samples", "500"]),
];

/// Runs the binary with outputs under `dir` and no timestamp.
pub fn klap(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .arg("--no-timestamp")
        .env_remove("KLAP_OUT_DIR")
        .output()
        .expect("binary runs")
}

/// `(file name, bytes)` of everything in `dir`, sorted.
pub fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}
