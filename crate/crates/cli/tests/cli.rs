use std::path::Path;
use std::process::{Command, Output};

use binmed::model::{Contrast, CovariateProfile};
use binmed::oracle::tables_from_params;
use binmed_cli::coef::CoefficientFile;
use serde_json::Value;

fn binmed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binmed")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn effect(profile: &Value, name: &str) -> f64 {
    profile["effects"].as_array().unwrap().iter().find(|e| e["effect"] == name).unwrap()["estimate"].as_f64().unwrap()
}

const SIM_COLUMNS: [&str; 6] = ["--outcome", "bank", "--mediator", "biz", "--exposure", "loan"];

fn simulate_table1(dir: &Path, n: usize, seed: u64, name: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let (n, seed) = (n.to_string(), seed.to_string());
    let mut args = vec!["simulate", "--coef-file", "microcredit_table1", "--n", &n, "--seed", &seed];
    args.extend(SIM_COLUMNS);
    args.extend(["--output", path.to_str().unwrap()]);
    let out = binmed(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

#[test]
fn simulated_table1_data_recovers_total_effect() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate_table1(dir.path(), 5000, 42, "sim.csv");
    let report = dir.path().join("fit.json");
    let mut args = vec!["fit", "--input", data.to_str().unwrap(), "--z", "age,university,loans"];
    args.extend(SIM_COLUMNS);
    args.extend(["--profile", "age=37,university=0,loans=0", "--output", report.to_str().unwrap()]);
    let out = binmed(&args);
    assert!(out.status.success(), "{}", stderr(&out));

    let truth = binmed(&["effects", "--coef-file", "microcredit_table1", "--profile", "age=37,university=0,loans=0", "--output", dir.path().join("truth.json").to_str().unwrap()]);
    assert!(truth.status.success());
    let truth_te = effect(&read_json(&dir.path().join("truth.json"))["profiles"][0], "TE").ln();

    let fitted = &read_json(&report)["profiles"][0];
    let te = fitted["effects"].as_array().unwrap().iter().find(|e| e["effect"] == "TE").unwrap();
    let (log_te, se_log) = (te["log_estimate"].as_f64().unwrap(), te["se_log"].as_f64().unwrap());
    assert!((log_te - truth_te).abs() < 4.0 * se_log, "{log_te} vs {truth_te} (se {se_log})");
}

#[test]
fn constant_outcome_fails_to_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("const.csv");
    let mut text = String::from("y,w,x\n");
    for i in 0..50 {
        text.push_str(&format!("0,{},{}\n", i % 2, (i / 2) % 2));
    }
    std::fs::write(&path, text).unwrap();
    let out = binmed(&["fit", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("ERROR separation:"));
}

#[test]
fn missing_column_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, "y,w,x,age\n1,0,1,30\n0,1,0,40\n").unwrap();
    let out = binmed(&["fit", "--input", path.to_str().unwrap(), "--z", "age,loans"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("ERROR schema:") && err.contains("'loans'"), "{err}");
}

#[test]
fn zero_coefficients_give_unit_effects() {
    let dir = tempfile::tempdir().unwrap();
    let mut f = CoefficientFile::load("microcredit_table1").unwrap();
    f.outcome.estimates.iter_mut().for_each(|b| *b = 0.0);
    f.mediator.estimates.iter_mut().for_each(|g| *g = 0.0);
    let coef = dir.path().join("zero.json");
    std::fs::write(&coef, serde_json::to_string(&f).unwrap()).unwrap();
    let report = dir.path().join("r.json");
    let out = binmed(&["effects", "--coef-file", coef.to_str().unwrap(), "--output", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    for e in read_json(&report)["profiles"][0]["effects"].as_array().unwrap() {
        assert_eq!(e["estimate"].as_f64().unwrap(), 1.0, "{e}");
    }
}

#[test]
fn no_mediator_outcome_path_gives_direct_effect_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let mut f = CoefficientFile::load("microcredit_table1").unwrap();
    for (t, b) in f.outcome.terms.iter().zip(f.outcome.estimates.iter_mut()) {
        if t == "w" || t == "x:w" {
            *b = 0.0;
        }
    }
    let coef = dir.path().join("no_w.json");
    std::fs::write(&coef, serde_json::to_string(&f).unwrap()).unwrap();
    let report = dir.path().join("r.json");
    let mut args = vec!["effects", "--coef-file", coef.to_str().unwrap(), "--output", report.to_str().unwrap()];
    let profiles: Vec<String> = [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2)]
        .iter()
        .map(|(u, l)| format!("age=37,university={u},loans={l}"))
        .collect();
    for p in &profiles {
        args.extend(["--profile", p.as_str()]);
    }
    let out = binmed(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let r = read_json(&report);
    for p in r["profiles"].as_array().unwrap() {
        let (te, cde0) = (effect(p, "TE"), effect(p, "CDE(0)"));
        assert_eq!(te, cde0);
        assert!((te - 6.706).abs() < 5e-4, "{te}");
        assert!((te - 1.903f64.exp()).abs() < 1e-12);
    }
}

#[test]
fn empty_simulation_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate_table1(dir.path(), 0, 1, "empty.csv");
    assert_eq!(std::fs::read_to_string(path).unwrap(), "bank,biz,loan,age,university,loans\n");
}

#[test]
fn simulation_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(simulate_table1(dir.path(), 500, 7, "a.csv")).unwrap();
    let b = std::fs::read(simulate_table1(dir.path(), 500, 7, "b.csv")).unwrap();
    let c = std::fs::read(simulate_table1(dir.path(), 500, 8, "c.csv")).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn large_simulation_matches_conditional_probabilities_at_means() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate_table1(dir.path(), 200_000, 3, "big.csv");
    let f = CoefficientFile::load("microcredit_table1").unwrap();
    let model = f.model().unwrap();
    let means: Vec<f64> = f.spec.z_names().iter().map(|n| f.covariates[n].mean()).collect();
    let contrast = Contrast::binary(CovariateProfile::new(means, vec![]).unwrap());
    let tables = tables_from_params(&model.outcome, &model.mediator, &contrast).unwrap();

    let mut counts = [[[0usize; 2]; 2]; 2];
    let mut rdr = csv::Reader::from_path(path).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let y = usize::from(&rec[0] == "1");
        let w = usize::from(&rec[1] == "1");
        let x = usize::from(&rec[2] == "1");
        counts[x][w][y] += 1;
    }
    for x in 0..2 {
        for w in 0..2 {
            let c = counts[x][w];
            let freq = c[1] as f64 / (c[0] + c[1]) as f64;
            assert!((freq - tables.p_y[x][w]).abs() < 0.01, "x={x} w={w}: {freq} vs {}", tables.p_y[x][w]);
        }
    }
}

#[test]
fn verify_zero_count_passes_and_perturbation_fails() {
    let ok = binmed(&["verify", "--count", "0"]);
    assert!(ok.status.success());
    let bad = binmed(&["verify", "--count", "3", "--perturb", "1e-3"]);
    assert_eq!(bad.status.code(), Some(5));
    assert!(stderr(&bad).starts_with("ERROR verification:"));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL oracle equivalence"));
}

#[test]
fn compare_reports_gaps_along_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("c.json");
    let out = binmed(&[
        "compare", "--coef-file", "microcredit_table1", "--grid", "-2,-6,-10,-14",
        "--profile", "age=37,university=0,loans=0", "--output", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = read_json(&report)["rows"].as_array().unwrap().clone();
    let te: Vec<f64> = rows.iter().filter(|r| r["effect"] == "TE").map(|r| r["log_gap"].as_f64().unwrap()).collect();
    assert_eq!(te.len(), 4);
    assert!(te.windows(2).all(|w| w[1] < w[0]), "{te:?}");
    assert!(te[3] < 0.02);

    let published = binmed(&["compare", "--coef-file", "microcredit_table1", "--profile", "age=37,university=0,loans=0", "--output", report.to_str().unwrap()]);
    assert!(published.status.success());
    let rows = read_json(&report)["rows"].as_array().unwrap().clone();
    assert!(rows.iter().all(|r| r["beta0"].as_f64() == Some(-1.542)));
    assert!(rows.iter().find(|r| r["effect"] == "TE").unwrap()["log_gap"].as_f64().unwrap() > 0.02);
}

#[test]
fn degenerate_contrast_exits_with_numerical_code() {
    let out = binmed(&["effects", "--coef-file", "microcredit_table1", "--x", "0.5", "--x-star", "0.5"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn unknown_coefficient_file_is_reported() {
    let out = binmed(&["effects", "--coef-file", "no_such_fixture"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("ERROR io:"));
}
