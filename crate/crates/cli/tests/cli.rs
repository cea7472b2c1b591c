use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siegel-lab")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exited normally")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&a)).unwrap()
}

#[test]
fn cf_lists_fibonacci_denominators() {
    let text = stdout(&["cf", "--alpha", "[0; 2,(1)]", "--depth", "10"]);
    assert!(text.contains("approximant n=5 a=1 p=5 q=13 gap-sandwich: OK"), "{text}");
    assert!(text.contains("good-indices: []"));
    let v = json(&["cf", "--alpha", "(3-sqrt(5))/2", "--depth", "10"]);
    let qs: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["q"].as_str().unwrap()).collect();
    assert_eq!(qs, ["1", "2", "3", "5", "8", "13", "21", "34", "55", "89", "144"]);
}

#[test]
fn cf_reports_rational_termination() {
    let text = stdout(&["cf", "--alpha", "3/7"]);
    assert!(text.contains("exact rational"), "{text}");
    let v = json(&["cf", "--alpha", "0.5"]);
    assert_eq!(v["rational"], Value::Bool(true));
}

#[test]
fn cf_good_indices_of_the_engineered_expansion() {
    let v = json(&["cf", "--alpha", "[0; 2,9,40,(1)]", "--depth", "8"]);
    assert_eq!(v["good_indices"], serde_json::json!([1, 2]));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&["cf", "--alpha", "xyz"]), 2);
    assert_eq!(code(&["explode", "--p", "2", "--q", "4"]), 2);
    assert_eq!(code(&["radius", "--alpha", "0.25"]), 2);
    assert_eq!(code(&["cf", "--alpha", "0.3", "--precision", "16"]), 2);
    assert_eq!(code(&["explode", "--p", "1", "--q", "2", "--delta-path", "sideways"]), 2);
    assert_eq!(code(&["audit", "--oracle-qmax", "9"]), 2);
}

#[test]
fn bruno_golden_matches_the_fibonacci_series() {
    let v = json(&["bruno", "--alpha", "[0; 2,(1)]", "--depth", "40"]);
    // q_n = F_n with F_0 = 1, F_1 = 2
    let mut f = (1f64, 2f64);
    let mut expected = 0.0;
    for _ in 0..=40 {
        expected += f.1.ln() / f.0;
        f = (f.1, f.0 + f.1);
    }
    let partial = v["partial"].as_f64().unwrap();
    assert!((partial - expected).abs() < 1e-15 * expected, "{partial} vs {expected}");
    assert!(v["tail_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(v["split"]["good_terms"].as_f64(), Some(0.0));
}

#[test]
fn bruno_reflection_shifts_terms() {
    let a = json(&["bruno", "--alpha", "[0; 3,(2,1)]", "--depth", "20"]);
    let b = json(&["bruno", "--alpha", "[0; 1,2,(2,1)]", "--depth", "21"]);
    let (ta, tb) = (a["terms"].as_array().unwrap(), b["terms"].as_array().unwrap());
    assert_eq!(tb[0].as_f64(), Some(0.0));
    assert_eq!(&tb[1..], &ta[..]);
}

#[test]
fn bruno_depth_zero_keeps_the_first_term() {
    let v = json(&["bruno", "--alpha", "[0; 2,(1)]", "--depth", "0"]);
    assert_eq!(v["terms"].as_array().unwrap().len(), 1);
    assert!((v["partial"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-15);
    assert!(v["split"].is_null());
}

#[test]
fn bruno_csv_header() {
    let csv = stdout(&["bruno", "--alpha", "sqrt(2)-1", "--depth", "5", "--format", "csv"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,q_n,term,partial"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn audit_passes_and_an_injected_fault_fails() {
    let text = stdout(&["audit", "--which", "all"]);
    assert!(text.trim_end().ends_with("audit: OK"), "{text}");
    assert_eq!(code(&["audit", "--which", "constants", "--inject-fault"]), 1);
}

#[test]
fn audit_json_round_trips() {
    let v = json(&["audit", "--which", "constants"]);
    let tags: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["tag"].as_str().unwrap()).collect();
    assert_eq!(tags, ["fibonacci-log-sum", "fibonacci-recip-sum", "constant-budget", "dull-lemma"]);
    assert_eq!(v["all_hold"], Value::Bool(true));
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);
}

#[test]
fn audit_schwarz_is_reproducible_under_a_seed() {
    let args = ["audit", "--which", "schwarz", "--grid", "400", "--seed", "7", "--format", "json"];
    assert_eq!(stdout(&args), stdout(&args));
    let other = stdout(&["audit", "--which", "schwarz", "--grid", "400", "--seed", "8", "--format", "json"]);
    assert_ne!(stdout(&args), other);
}

#[test]
fn explode_checks_the_cycle_relation() {
    let v = json(&["explode", "--p", "1", "--q", "3"]);
    assert!(v["max_error"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["pairwise_distinct"], Value::Bool(true));
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
    assert!((v["delta_modulus_q"].as_f64().unwrap() - 1.0 / 54.0).abs() < 1e-15);
}

#[test]
fn explode_beyond_the_collision_radius_is_numerical() {
    let out = run(&["explode", "--p", "1", "--q", "2", "--delta-path", "beyond-R"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn explode_emits_branch_csv() {
    let dir = std::env::temp_dir().join(format!("siegel-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("branches.csv");
    stdout(&["explode", "--p", "2", "--q", "5", "--steps", "8", "--emit", file.to_str().unwrap()]);
    let csv = std::fs::read_to_string(&file).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("branch,delta_re,delta_im,chi_re,chi_im,residual"));
    let branches: std::collections::BTreeSet<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(branches.len(), 5);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn radius_margin_for_golden_and_large_digit() {
    let v = json(&["radius", "--alpha", "(3-sqrt(5))/2", "--series-N", "1000", "--depth", "40"]);
    assert!(v["margin_vs_16"].as_f64().unwrap() > 0.0);
    let r = v["radius"]["r"].as_f64().unwrap();
    assert!((r - 0.3263).abs() < 5e-3, "{r}");
    let big = json(&["radius", "--alpha", "[0; 2,1000000,(1)]", "--series-N", "1000", "--depth", "40"]);
    let b = big["B_partial"].as_f64().unwrap();
    // log q_2 / q_1 = log(2000001)/2 dominates
    assert!(b > 2000001f64.ln() / 2.0);
    assert!(big["margin_vs_16"].as_f64().unwrap() > 0.0);
}

#[test]
fn radius_csv_lists_coefficients() {
    let csv = stdout(&["radius", "--alpha", "sqrt(2)-1", "--series-N", "200", "--format", "csv"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,log_abs_h"));
    assert_eq!(lines.count(), 200);
}
