//! Fits support and overlap rules on the versicolor/virginica rows of the
//! bundled iris data, then reports how many held-out setosa rows fall in the
//! learned overlap region.
use overrule_core::data::{load_csv_with, LoadOptions, Schema};
use overrule_core::estimators::EstimatorConfig;
use overrule_core::pipeline::{fit_overrule, OverRuleConfig};
use overrule_core::rules::RuleForm;

const SCHEMA: &str = r#"{"features":[
  {"name":"sepal_length","kind":"continuous"},
  {"name":"sepal_width","kind":"continuous"},
  {"name":"petal_length","kind":"continuous"},
  {"name":"petal_width","kind":"continuous"}],
 "group_column":"species"}"#;

fn main() -> overrule_core::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv");
    let text = std::fs::read_to_string(path).expect("bundled iris.csv");
    let dir = std::env::temp_dir().join("overrule-iris");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let fit_path = dir.join("versicolor_virginica.csv");
    let rows: String = text.lines().filter(|l| !l.contains("setosa")).map(|l| format!("{l}\n")).collect();
    std::fs::write(&fit_path, rows).expect("write temp csv");

    let data = load_csv_with(&fit_path, &Schema::from_json(SCHEMA)?, LoadOptions::default())?;
    let mut cfg = OverRuleConfig::default();
    cfg.support.alpha = 0.9;
    cfg.support.lambda0 = 0.02;
    cfg.support.lambda1 = 0.0;
    cfg.support.form = RuleForm::Dnf;
    cfg.overlap.lambda0 = 0.01;
    cfg.overlap.lambda1 = 0.0;
    cfg.overlap.estimator = EstimatorConfig::Knn { k: 8, inverse_k_threshold: false };
    let model = fit_overrule(&data, &cfg, None)?;
    println!("{}", model.report(Some(&data))?);

    let all = load_csv_with(path, &model.schema(), LoadOptions { lenient: true })?;
    let species = all.aux("species").expect("species column");
    let pred = model.predict(&all)?;
    let setosa: Vec<usize> = (0..all.n_rows()).filter(|&i| species[i] == "setosa").collect();
    let inside = setosa.iter().filter(|&&i| pred[i].in_overlap()).count();
    println!("setosa rows in overlap: {inside} of {}", setosa.len());
    Ok(())
}
