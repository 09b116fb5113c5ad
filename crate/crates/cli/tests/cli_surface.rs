//! Black-box tests of the `goldbach` binary: flag plumbing, output formats
//! and the exit-code contract (0 pass, 1 verification failure, 2 usage).

use std::path::PathBuf;
use std::process::{Command, Output};

fn goldbach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goldbach"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("goldbach-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn construct_lists_restricted_primes() {
    let out = goldbach(&["construct", "--u", "10", "--q0", "2"]);
    assert!(out.status.success());
    let got = String::from_utf8(out.stdout).unwrap();
    assert_eq!(got, "11\n13\n17\n19\n");
}

#[test]
fn construct_dump_carries_the_system_schema() {
    let out = goldbach(&["construct", "--u", "20", "--q0", "6", "--dump"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["q0"], 6);
    assert_eq!(json["primes"], serde_json::json!([2, 3]));
    assert_eq!(json["R0"], serde_json::json!([1, 5]));
    let cover = &json["covers"][1];
    assert_eq!(cover["p"], 3);
    assert_eq!(cover["a"], 3);
    assert_eq!(cover["raw"], serde_json::json!([1, 2, 3, 6, 9, 18, 27]));
    assert_eq!(cover["units"], serde_json::json!([1, 2]));
}

#[test]
fn count_emits_the_exact_csv_header_and_blank_ratio() {
    let out = goldbach(&["count", "--u", "10", "--q0", "2", "--m-range", "40:44"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "m,unweighted,weighted,H,sigma_prime,main_term,ratio"
    );
    // even target: zero counts, vanishing density, blank ratio
    let even_row = lines.next().unwrap();
    assert!(even_row.starts_with("40,0,0,50,"));
    assert!(
        even_row.ends_with(','),
        "ratio column must be blank: {even_row}"
    );
    assert!(!text.contains('\r'), "LF endings only");
    assert_eq!(text.lines().count(), 6, "five rows plus the header");
}

#[test]
fn count_with_empty_intersection_is_header_only() {
    let out = goldbach(&["count", "--u", "10", "--q0", "2", "--m-range", "1:2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "m,unweighted,weighted,H,sigma_prime,main_term,ratio\n"
    );
}

#[test]
fn count_outside_profile_window_blanks_main_term_columns() {
    let out = goldbach(&["count", "--u", "10", "--q0", "2", "--m-range", "33:34"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("33,1,"), "m=33 is the cube of 11: {row}");
    assert!(
        row.ends_with(",,,,"),
        "profile columns blank outside [4u,5u]: {row}"
    );
}

#[test]
fn usage_errors_exit_two() {
    let out = goldbach(&["count", "--u", "10", "--q0", "12", "--m-range", "40:44"]);
    assert_eq!(out.status.code(), Some(2), "non-squarefree modulus");
    let out = goldbach(&["count"]);
    assert_eq!(out.status.code(), Some(2), "missing u");
    let out = goldbach(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2), "unknown subcommand");
    let out = goldbach(&[
        "arcs",
        "--u",
        "100000",
        "--q0",
        "30",
        "--B",
        "2",
        "--samples",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(2), "inadmissible arc cut");
}

#[test]
fn verify_lemma_passes_and_reports() {
    let out = goldbach(&["verify-lemma", "--pmax", "31"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("failures: 0"));
    assert!(text.lines().count() >= 11, "one row per prime plus header");
}

#[test]
fn quadrature_agrees_and_exits_zero() {
    let out = goldbach(&["quadrature", "--u", "50", "--q0", "2", "--m", "201"]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["rel_diff"].as_f64().unwrap() < 1e-6);
    assert!(json["convolution"].as_f64().unwrap() > 0.0);
}

#[test]
fn singular_series_check_convolution_is_clean() {
    let out = goldbach(&[
        "singular-series",
        "--q0",
        "6",
        "--m",
        "11",
        "--cutoff",
        "500",
        "--check-convolution",
        "30",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["convolution_check"]["max_abs_diff"].as_f64().unwrap() < 1e-9);
    assert_eq!(json["g_locals"][0]["p"], 2);
}

#[test]
fn report_writes_files_atomically_and_deterministically() {
    let dir = tempdir("report");
    let json_a = dir.join("a.json");
    let json_b = dir.join("b.json");
    let csv_a = dir.join("a.csv");
    let csv_b = dir.join("b.csv");

    let common = [
        "report", "--u", "600", "--q0", "6", "--cutoff", "300", "--seed", "5",
    ];
    let mut args_a: Vec<&str> = common.to_vec();
    let (json_a_s, csv_a_s) = (json_a.to_str().unwrap(), csv_a.to_str().unwrap());
    args_a.extend_from_slice(&["--out", json_a_s, "--csv", csv_a_s, "--threads", "1"]);
    let out = goldbach(&args_a);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let mut args_b: Vec<&str> = common.to_vec();
    let (json_b_s, csv_b_s) = (json_b.to_str().unwrap(), csv_b.to_str().unwrap());
    args_b.extend_from_slice(&["--out", json_b_s, "--csv", csv_b_s, "--threads", "4"]);
    let out = goldbach(&args_b);
    assert!(out.status.success());

    let (a, b) = (
        std::fs::read(&json_a).unwrap(),
        std::fs::read(&json_b).unwrap(),
    );
    assert!(!a.is_empty());
    assert_eq!(a, b, "thread count leaked into the report");
    assert_eq!(
        std::fs::read(&csv_a).unwrap(),
        std::fs::read(&csv_b).unwrap()
    );
    // no stray temp files survive
    let leftovers: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp-"))
        .collect();
    assert!(
        leftovers.is_empty(),
        "temp files left behind: {leftovers:?}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempdir("config");
    let cfg_path = dir.join("exp.conf");
    std::fs::write(
        &cfg_path,
        "# toy experiment\nu = 10\nbasis_override = 2\ncutoff = 150\n",
    )
    .unwrap();
    let out = goldbach(&["--config", cfg_path.to_str().unwrap(), "report"]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["failing_m"], serde_json::json!([]));
    assert_eq!(json["rows"].as_array().unwrap().len(), 5);
    let ms: Vec<u64> = json["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["m"].as_u64().unwrap())
        .collect();
    assert_eq!(ms, vec![41, 43, 45, 47, 49]);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn report_flags_missing_targets_with_exit_one() {
    // the restricted window [5, 10] holds only {5, 7}, whose triple sums
    // top out at 21: the odd targets 23 and 25 have no representation
    let out = goldbach(&["report", "--u", "5", "--q0", "6", "--cutoff", "100"]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["failing_m"], serde_json::json!([23, 25]));
}
