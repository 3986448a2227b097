mod common;

use std::fs;
use std::process::{Command, Output};

use common::{artifacts, klap, BIN, SMALL_RUNS};

use klap::Spectrum;
use serde_json::Value;

fn error_json(out: &Output) -> Value {
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.lines().count(), 1, "stderr: {err}");
    serde_json::from_str(err.trim()).unwrap()
}

#[test]
fn every_subcommand_reruns_byte_identically() {
    for (name, args) in SMALL_RUNS {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = klap(a.path(), args);
        let rb = klap(b.path(), args);
        assert!(ra.status.success(), "{name}: {}", String::from_utf8_lossy(&ra.stderr));
        assert!(rb.status.success(), "{name}");
        let (fa, fb) = (artifacts(a.path()), artifacts(b.path()));
        assert!(!fa.is_empty(), "{name} wrote nothing");
        assert_eq!(fa, fb, "{name} differs between runs");
    }
}

#[test]
fn reports_round_trip_and_echo_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = klap(dir.path(), &["hb-check", "--X", "300", "--J", "2", "--seed", "5"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("hb-check.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let mut again = serde_json::to_string_pretty(&v).unwrap();
    again.push('\n');
    assert_eq!(text, again);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["config"]["hb_check"]["J"], Value::Null);
    assert_eq!(v["config"]["hb_check"]["j"], 2);
    assert!(v["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    assert!(v.get("timestamp").is_none());
}

#[test]
fn timestamp_present_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .args(["hb-check", "--X", "50", "--J", "2"])
        .env("KLAP_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("hb-check.json")).unwrap()).unwrap();
    assert!(v["timestamp"].is_u64());
}

#[test]
fn csv_has_header_and_round_trips_doubles() {
    let dir = tempfile::tempdir().unwrap();
    assert!(klap(dir.path(), &["prime-sum", "--q", "101", "--points", "3", "--format", "csv"]).status.success());
    let csv = fs::read_to_string(dir.path().join("prime-sum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "q,x,sum,count,trivial_bound,envelope_main,envelope_bfkpm");
    for line in lines {
        let field = line.split(',').nth(2).unwrap();
        let sum: f64 = field.parse().unwrap();
        assert_eq!(format!("{sum:.16e}"), field);
    }
    assert!(!csv.contains('\r'));
    assert!(dir.path().join("prime-sum.json").exists());
}

#[test]
fn prime_sum_sweeps_a_list_of_moduli() {
    let dir = tempfile::tempdir().unwrap();
    let out = klap(dir.path(), &["prime-sum", "--q", "101,1009", "--v", "3", "--smooth", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("prime-sum.json")).unwrap()).unwrap();
    let runs = v["result"]["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    for (run, q) in runs.iter().zip([101, 1009]) {
        assert_eq!(run["q"], q);
        let (re, abs) = (run["sum_re"].as_f64().unwrap(), run["abs"].as_f64().unwrap());
        assert_eq!(re.abs(), abs);
        assert!(abs <= run["trivial_bound"].as_f64().unwrap());
        assert_eq!(run["in_theorem_range"], false);
        assert!(run["smoothed"].is_object());
    }
}

#[test]
fn scatter_and_decay_tables_use_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = |name: &str| fs::read_to_string(dir.path().join(name)).unwrap();
    assert!(klap(dir.path(), &["bilinear-sweep", "--q", "101", "--M", "10", "--N", "10", "--trials", "2", "--format", "csv"]).status.success());
    assert!(csv("bilinear-sweep.csv").starts_with("trial,norm_product,abs_form,bound_fkm,bound_kms\n"));
    assert!(klap(dir.path(), &["oscint-report", "--q", "101", "--c", "1.2", "--M", "10", "--N", "10", "--Q", "3", "--per-region", "1", "--format", "csv"]).status.success());
    assert!(csv("oscint-report.csv").starts_with("m,n,re,im,bound,ratio,region\n"));
}

#[test]
fn spectrum_binary_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("spec.bin");
    let out = klap(dir.path(), &["spectrum", "--q", "101", "--out", bin.to_str().unwrap()]);
    assert!(out.status.success());
    let s = Spectrum::read_binary(fs::File::open(&bin).unwrap()).unwrap();
    assert_eq!(s.q(), 101);
    assert_eq!(s.values().len(), 100);
}

#[test]
fn unknown_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = klap(dir.path(), &["spectrum", "--q", "101", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["error"]["kind"], "usage");
    assert!(e["error"]["message"].as_str().unwrap().contains("--frobnicate"));
}

#[test]
fn validation_failures_exit_nonzero_with_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = klap(dir.path(), &["spectrum", "--q", "91"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["kind"], "usage");

    let out = klap(dir.path(), &["exponent-certify", "--x", "3/4"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["kind"], "range");

    let out = klap(dir.path(), &["voronoi-check", "--q", "101", "--c", "0.0001", "--M", "2", "--N", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["kind"], "domain");

    let out = klap(dir.path(), &["exponent-certify", "--x", "1", "--format", "csv", "--resolution", "12", "--samples", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn failed_contract_exits_one_but_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = klap(dir.path(), &["oscint-report", "--q", "101", "--c", "1.2", "--M", "10", "--N", "10", "--Q", "3", "--per-region", "2", "--max-constant", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("oscint-report.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn exponent_certify_reports_rationals_as_strings() {
    let dir = tempfile::tempdir().unwrap();
    let out = klap(dir.path(), &["exponent-certify", "--x", "1", "--eps", "1/100", "--resolution", "60", "--samples", "200"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("exponent-certify.json")).unwrap()).unwrap();
    let r = &v["result"];
    assert_eq!(r["certify"]["violations"], 0);
    assert_eq!(r["crossover"], "63/92");
    assert_eq!(r["balance"]["exponent"], "191/192");
    assert_eq!(r["certify"]["kappa"], "1/192");
    assert_eq!(r["beta"], "11/18");
}
