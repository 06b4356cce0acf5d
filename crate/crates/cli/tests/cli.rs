use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SCHEMA: &str = r#"{"features":[
  {"name":"sepal_length","kind":"continuous"},
  {"name":"sepal_width","kind":"continuous"},
  {"name":"petal_length","kind":"continuous"},
  {"name":"petal_width","kind":"continuous"}],
 "group_column":"species"}"#;

const CONFIG: &str = r#"
[support]
alpha = 0.9
lambda0 = 0.02
lambda1 = 0.0
form = "dnf"

[overlap]
beta = 0.9
lambda0 = 0.01
lambda1 = 0.0
epsilon = 0.1

[overlap.estimator]
kind = "knn"
k = 8
inverse_k_threshold = false
"#;

fn iris() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/iris.csv")).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_overrule")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Versicolor/virginica rows plus schema and config files in a temp dir.
fn setup(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let csv: String = iris().lines().filter(|l| !l.contains("setosa")).map(|l| format!("{l}\n")).collect();
    let (data, schema, config) = (dir.join("vv.csv"), dir.join("schema.json"), dir.join("cfg.toml"));
    std::fs::write(&data, csv).unwrap();
    std::fs::write(&schema, SCHEMA).unwrap();
    std::fs::write(&config, CONFIG).unwrap();
    (data, schema, config)
}

fn fit_iris(dir: &Path) -> PathBuf {
    let (data, schema, config) = setup(dir);
    let out = dir.join("out");
    let o = run(&["fit", "--data", p(&data), "--schema", p(&schema), "--config", p(&config), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("Support rules") && stdout.contains("Overlap rules"), "{stdout}");
    out
}

#[test]
fn fit_writes_model_report_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = fit_iris(dir.path());
    for f in ["model.json", "rules.txt", "metrics.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("scope,balanced_accuracy"));
    assert_eq!(metrics.lines().count(), 2);
    // λ1 = 0 has no degree bound, so no theory report
    assert!(!out.join("theory.json").exists());
}

#[test]
fn predict_labels_every_row_and_excludes_setosa() {
    let dir = tempfile::tempdir().unwrap();
    let out = fit_iris(dir.path());
    let all = dir.path().join("iris.csv");
    std::fs::write(&all, iris()).unwrap();
    let pred = dir.path().join("pred.csv");
    let o = run(&["predict", "--model", p(&out.join("model.json")), "--data", p(&all), "--out", p(&pred)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&pred).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 150);
    let species: Vec<String> = iris().lines().skip(1).map(|l| l.rsplit(',').next().unwrap().to_string()).collect();
    let setosa_in = rows
        .iter()
        .zip(&species)
        .filter(|(r, s)| s.as_str() == "setosa" && r.ends_with("in_overlap"))
        .count();
    assert!(setosa_in <= 5, "{setosa_in} setosa rows predicted in overlap");
}

#[test]
fn evaluate_scores_against_truth_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = fit_iris(dir.path());
    // truth: the versicolor/virginica rows are the population of interest
    let mut csv = String::new();
    for (i, l) in iris().lines().enumerate() {
        let t = if i == 0 { "truth" } else if l.contains("setosa") { "0" } else { "1" };
        csv.push_str(&format!("{l},{t}\n"));
    }
    let data = dir.path().join("truth.csv");
    std::fs::write(&data, csv).unwrap();
    let o = run(&["evaluate", "--model", p(&out.join("model.json")), "--data", p(&data), "--truth", "truth"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "overlap_vs_truth");
    let fpr: f64 = row[2].parse().unwrap();
    assert!(fpr <= 0.1, "setosa false-positive rate {fpr}");
}

#[test]
fn policy_column_restricts_overlap_labels() {
    let dir = tempfile::tempdir().unwrap();
    let (_, schema, config) = setup(dir.path());
    // permitting only versicolor drops the virginica-propensity condition,
    // so every row labelled without a policy stays labelled
    let mut csv = String::new();
    for (i, l) in iris().lines().filter(|l| !l.contains("setosa")).enumerate() {
        let pol = if i == 0 { "allowed" } else { "versicolor" };
        csv.push_str(&format!("{l},{pol}\n"));
    }
    let data = dir.path().join("pol.csv");
    std::fs::write(&data, csv).unwrap();
    let with_policy = SCHEMA.replace("\"group_column\"", "\"policy_column\":\"allowed\",\"group_column\"");
    std::fs::write(&schema, with_policy).unwrap();
    let labelled = |extra: &[&str]| {
        let out = dir.path().join("out");
        let base = ["fit", "--data", p(&data), "--schema", p(&schema), "--config", p(&config), "--out", p(&out)];
        let o = run(&[&base[..], extra].concat());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = String::from_utf8(o.stdout).unwrap();
        let line = text.lines().find(|l| l.contains("labelled overlap")).unwrap().to_string();
        let words: Vec<&str> = line.split_whitespace().collect();
        let at = words.iter().position(|w| *w == "labelled").unwrap();
        words[at - 1].parse::<usize>().unwrap()
    };
    let restricted = labelled(&[]);
    let open = labelled(&["--no-policy"]);
    assert!(restricted > open, "policy {restricted} vs none {open}");
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let (data, schema, config) = setup(dir.path());
    // bad configuration value
    let o = run(&["fit", "--data", p(&data), "--schema", p(&schema), "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[config]"));
    // malformed TOML
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[support\nalpha=").unwrap();
    let o = run(&["fit", "--data", p(&data), "--schema", p(&schema), "--config", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    // missing file and unparsable cell are data errors
    let o = run(&["fit", "--data", "/nonexistent.csv", "--schema", p(&schema), "--config", p(&config)]);
    assert_eq!(o.status.code(), Some(3));
    let broken = dir.path().join("broken.csv");
    std::fs::write(&broken, "sepal_length,sepal_width,petal_length,petal_width,species\n1,2,x,4,versicolor\n").unwrap();
    let o = run(&["fit", "--data", p(&broken), "--schema", p(&schema)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[data]"));
}

#[test]
fn synth_bench_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let o = run(&[
        "synth-bench",
        "--alphas",
        "0.97",
        "--lambda0s",
        "1e-4",
        "--lambda1s",
        "1e-2",
        "--beam-widths",
        "15",
        "--seeds",
        "0",
        "--n-samples",
        "3000",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("alpha,lambda0,lambda1,beam_width,seed,recovered"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("B = 15"));
}
