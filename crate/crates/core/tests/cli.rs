use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const FUNNEL_HEADER: &str =
    "year,category,registered,submitted_to_court,convicted_persons,imprisoned_effective,synthetic_flag\n";
const SURVEY_HEADER: &str = "respondent_id,component,wtp,currency,protest_flag\n";

fn heritage(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heritage")).args(args).current_dir(cwd).output().unwrap()
}

fn error_json(o: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(stderr.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {stderr}"))
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.conf");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn funnel_reports_the_six_probabilities() {
    let tmp = tempfile::tempdir().unwrap();
    let o = heritage(&["--out", "out", "funnel"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let cats = report["funnel"]["categories"].as_array().unwrap();
    let ps: Vec<(String, f64)> = cats
        .iter()
        .map(|c| (c["category"].as_str().unwrap().to_string(), c["detection_risk"].as_f64().unwrap()))
        .collect();
    assert_eq!(
        ps,
        [("total", 0.01), ("art208", 0.001), ("art277a", 0.01), ("art278", 0.01), ("art278a", 0.001), ("art278b", 0.0)]
            .map(|(c, p)| (c.to_string(), p))
    );
    assert_eq!(report["funnel"]["records"], 84);
    assert!(report["provenance"]["input_sha256"]["funnel:bg_funnel_2000_2013.csv"].is_string());
    assert!(report["config"]["funnel.csv"].is_string());
    assert!(tmp.path().join("out/report.json").is_file());
    assert!(tmp.path().join("out/funnel.csv").is_file());
}

#[test]
fn csv_format_prints_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let o = heritage(&["--out", "out", "--format", "csv", "scenario"], tmp.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# scenario\nalternative,name,budget,"), "{text}");
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn missing_funnel_file_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "funnel.csv = nowhere.csv\n");
    let o = heritage(&["--config", &cfg, "--out", "out", "funnel"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["code"], "FILE_NOT_FOUND");
    assert!(!tmp.path().join("out").exists(), "nothing is written on error");
}

#[test]
fn missing_config_file_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = heritage(&["--config", "absent.conf", "funnel"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["code"], "FILE_NOT_FOUND");
}

#[test]
fn invariant_error_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("f.csv"), format!("{FUNNEL_HEADER}2000,total,10,5,1,0,0\n2001,total,10,12,1,0,0\n"))
        .unwrap();
    let cfg = write_config(tmp.path(), "funnel.csv = f.csv\n");
    let o = heritage(&["--config", &cfg, "funnel"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let err = error_json(&o);
    assert_eq!(err["code"], "INVARIANT_ERROR");
    assert!(err["message"].as_str().unwrap().contains("f.csv:3:"), "{err}");
}

#[test]
fn survey_with_excluded_component_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("s.csv"), format!("{SURVEY_HEADER}r1,existence,5,EUR,0\nr2,Aesthetic,5,EUR,0\n"))
        .unwrap();
    let cfg = write_config(tmp.path(), "survey.csv = s.csv\n");
    let o = heritage(&["--config", &cfg, "tev"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let err = error_json(&o);
    assert_eq!(err["code"], "PARSE_ERROR");
    let msg = err["message"].as_str().unwrap();
    assert!(msg.contains("s.csv:3:") && msg.contains("existence, option, educational, prestige, donation"), "{msg}");
}

#[test]
fn negative_wtp_is_an_invariant_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("s.csv"), format!("{SURVEY_HEADER}r1,option,-3,EUR,0\n")).unwrap();
    let cfg = write_config(tmp.path(), "survey.csv = s.csv\n");
    let o = heritage(&["--config", &cfg, "tev"], tmp.path());
    assert_eq!(error_json(&o)["code"], "INVARIANT_ERROR");
}

#[test]
fn survey_feeds_the_valuation() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("s.csv"),
        format!("{SURVEY_HEADER}r1,existence,10,EUR,0\nr2,existence,30,EUR,0\nr3,existence,99,EUR,1\n"),
    )
    .unwrap();
    let cfg = write_config(
        tmp.path(),
        "survey.csv = s.csv\nsurvey.population = 100\nsurvey.trim_fraction = 0\nvaluation.scientific = none\n",
    );
    let o = heritage(&["--config", &cfg, "--out", "out", "tev"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["tev"]["nonuse_source"], "survey");
    assert_eq!(report["tev"]["breakdown"]["indirect"].as_f64().unwrap(), 2000.0);
    assert!(report["provenance"]["input_sha256"]["survey:s.csv"].is_string());
}

#[test]
fn unknown_config_key_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "seed = 1\nsuply.slope = 2\n");
    let o = heritage(&["--config", &cfg, "funnel"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["code"], "UNKNOWN_CONFIG_KEY");
}

#[test]
fn invalid_elasticities_rejected_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "elasticity.epsilon = -1\n");
    let o = heritage(&["--config", &cfg, "--out", "out", "all"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["code"], "CONFIG_ERROR");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn no_crossing_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "demand.tolerable_at_zero_cost = 1\n");
    let o = heritage(&["--config", &cfg, "--out", "out", "market"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["code"], "NO_CROSSING");
}

#[test]
fn help_lists_every_config_key() {
    let tmp = tempfile::tempdir().unwrap();
    let o = heritage(&["--help"], tmp.path());
    assert!(o.status.success());
    let help = String::from_utf8(o.stdout).unwrap();
    for (key, _, _) in heritage_econ::app::config::KEYS {
        assert!(help.contains(key), "--help misses {key}");
    }
}

#[test]
fn seed_changes_only_the_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let o = heritage(&["--seed", seed, "--out", seed, "all"], tmp.path());
        assert!(o.status.success());
        serde_json::from_slice::<Value>(&o.stdout).unwrap()
    };
    let (a, b) = (run("1"), run("2"));
    assert_eq!(a["scenario"], b["scenario"]);
    assert_eq!(a["market"], b["market"]);
    assert_ne!(a["simulate"], b["simulate"]);
    assert_ne!(a["provenance"]["config_sha256"], b["provenance"]["config_sha256"]);
}
