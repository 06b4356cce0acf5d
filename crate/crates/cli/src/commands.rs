use std::fmt::Write as _;
use std::path::Path;

use overrule_core::data::{load_csv, load_csv_with, LoadOptions, Schema};
use overrule_core::estimators::{EstimatorConfig, Policy, PolicyRules};
use overrule_core::pipeline::{evaluate as score, fit_overrule, Membership, Metrics, OverRuleConfig, OverRuleModel};
use overrule_core::rules::RuleForm;
use overrule_core::synth::{BenchGrid, BenchResult};
use overrule_core::{Error, Result};
use rayon::prelude::*;

use crate::{BenchArgs, Estimator, EvaluateArgs, FitArgs, Form, PredictArgs};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn from_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    toml::from_str(&read(path)?).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn form(f: Form) -> RuleForm {
    match f {
        Form::Dnf => RuleForm::Dnf,
        Form::Cnf => RuleForm::Cnf,
    }
}

fn fit_config(a: &FitArgs) -> Result<OverRuleConfig> {
    let mut cfg: OverRuleConfig = match &a.config {
        Some(p) => from_toml(p)?,
        None => OverRuleConfig::default(),
    };
    let (s, o) = (&mut cfg.support, &mut cfg.overlap);
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut s.alpha, a.alpha);
    set(&mut s.lambda0, a.support_lambda0);
    set(&mut s.lambda1, a.support_lambda1);
    set(&mut o.beta, a.beta);
    set(&mut o.epsilon, a.epsilon);
    set(&mut o.lambda0, a.overlap_lambda0);
    set(&mut o.lambda1, a.overlap_lambda1);
    if let Some(f) = a.support_form {
        s.form = form(f);
    }
    if let Some(f) = a.overlap_form {
        o.form = form(f);
    }
    if let Some(b) = a.beam_width {
        s.search.beam_width = b;
        o.search.beam_width = b;
    }
    if let Some(seed) = a.seed {
        s.reference.seed = seed;
        s.search.seed = seed;
        o.search.seed = seed;
    }
    match a.estimator {
        Some(Estimator::Logistic) => o.estimator = EstimatorConfig::Logistic { l2: a.l2.unwrap_or(1.0) },
        Some(Estimator::Knn) => {
            o.estimator = EstimatorConfig::Knn {
                k: a.k.unwrap_or(8),
                inverse_k_threshold: !a.fixed_epsilon,
            }
        }
        Some(Estimator::Cbb) => o.estimator = EstimatorConfig::Cbb { alpha: a.box_alpha.unwrap_or(0.1) },
        None => match &mut o.estimator {
            EstimatorConfig::Logistic { l2 } => set(l2, a.l2),
            EstimatorConfig::Knn { k, inverse_k_threshold } => {
                if let Some(v) = a.k {
                    *k = v;
                }
                if a.fixed_epsilon {
                    *inverse_k_threshold = false;
                }
            }
            EstimatorConfig::Cbb { alpha } => set(alpha, a.box_alpha),
        },
    }
    Ok(cfg)
}

fn metrics_csv(rows: &[(&str, &Metrics)]) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
    let mut s = String::from("scope,balanced_accuracy,fpr,fnr,literal_count,coverage_fraction\n");
    for (scope, m) in rows {
        let _ = writeln!(
            s,
            "{scope},{},{},{},{},{:.6}",
            opt(m.balanced_accuracy),
            opt(m.fpr),
            opt(m.fnr),
            m.literal_count,
            m.coverage_fraction
        );
    }
    s
}

pub fn fit(a: &FitArgs) -> Result<()> {
    let cfg = fit_config(a)?;
    let schema = Schema::from_file(&a.schema)?;
    let data = load_csv(&a.data, &schema)?;
    let labels = data
        .groups()
        .ok_or_else(|| Error::Schema("the schema must name a group column".into()))?
        .labels
        .clone();
    let policy = if let Some(p) = &a.policy_rules {
        Some(Policy::from_rules(&PolicyRules::load(p)?, &data, &labels)?)
    } else if let (false, Some(col)) = (a.no_policy, &schema.policy_column) {
        let values = data
            .aux(col)
            .ok_or_else(|| Error::Schema(format!("policy column `{col}` not loaded")))?;
        Some(Policy::from_column(values, &labels)?)
    } else {
        None
    };
    let model = fit_overrule(&data, &cfg, policy.as_ref())?;

    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    model.save(a.out.join("model.json"))?;
    let report = model.report(Some(&data))?;
    write(&a.out.join("rules.txt"), &report)?;
    let s = &model.summary;
    write(
        &a.out.join("metrics.csv"),
        &metrics_csv(&[("overlap_vs_base_labels", &s.overlap_vs_labels)]),
    )?;
    if let Some(t) = &model.theory {
        write(&a.out.join("theory.json"), &serde_json::to_string_pretty(t)?)?;
    }
    print!("{report}");
    println!(
        "\n{} rows, {} in support ({:.1}% of the box), {} labelled overlap by the {} estimator, {} in overlap rules",
        s.n_rows,
        s.n_support,
        100.0 * s.support_volume,
        s.n_labelled,
        model.base.name(),
        s.n_overlap
    );
    if let Some(t) = &model.theory {
        println!(
            "theory: p_max = {}, eps_m = {:.4}, eps_n = {:.4}, log|C| <= {:.2}",
            t.p_max, t.epsilon_m, t.epsilon_n, t.log_candidate_bound
        );
    }
    Ok(())
}

fn load_for(model: &OverRuleModel, path: &Path) -> Result<overrule_core::data::Dataset> {
    load_csv_with(path, &model.schema(), LoadOptions { lenient: true })
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let model = OverRuleModel::load(&a.model)?;
    let data = load_for(&model, &a.data)?;
    let pred = model.predict(&data)?;
    let mut s = String::from("row,membership\n");
    for (i, m) in pred.iter().enumerate() {
        let _ = writeln!(s, "{i},{}", m.as_str());
    }
    match &a.out {
        Some(p) => write(p, &s)?,
        None => print!("{s}"),
    }
    let count = |w: Membership| pred.iter().filter(|&&m| m == w).count();
    eprintln!(
        "{} rows: {} in overlap, {} in support only, {} out of support",
        pred.len(),
        count(Membership::InOverlap),
        count(Membership::InSupportOnly),
        count(Membership::OutOfSupport)
    );
    Ok(())
}

fn parse_truth(v: &str, row: usize, column: &str) -> Result<bool> {
    match v {
        "1" | "1.0" | "true" | "TRUE" | "True" => Ok(true),
        "0" | "0.0" | "false" | "FALSE" | "False" => Ok(false),
        _ => Err(Error::Parse {
            row: row + 1,
            column: column.into(),
            message: format!("expected a 0/1 label, got `{v}`"),
        }),
    }
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let model = OverRuleModel::load(&a.model)?;
    let data = load_for(&model, &a.data)?;
    let truth: Vec<bool> = data
        .aux(&a.truth)
        .ok_or_else(|| Error::Schema(format!("truth column `{}` not found", a.truth)))?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_truth(v, i, &a.truth))
        .collect::<Result<_>>()?;
    let pred: Vec<bool> = model.predict(&data)?.iter().map(|m| m.in_overlap()).collect();
    let literals = model.support.literal_count() + model.overlap.literal_count();
    let m = score(&pred, &truth, literals)?;
    if m.balanced_accuracy.is_none() {
        log::warn!("truth column holds a single class; balanced accuracy is undefined");
    }
    let csv = metrics_csv(&[("overlap_vs_truth", &m)]);
    match &a.out {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn bench_csv(results: &[BenchResult]) -> String {
    let mut s = String::from(
        "alpha,lambda0,lambda1,beam_width,seed,recovered,recovered_loose,n_rules,n_perfect,mean_length,data_coverage,seconds\n",
    );
    for r in results {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{:.3},{:.5},{:.2}",
            r.alpha,
            r.lambda0,
            r.lambda1,
            r.beam_width,
            r.seed,
            u8::from(r.recovered),
            u8::from(r.recovered_loose),
            r.n_rules,
            r.n_perfect,
            r.mean_length,
            r.data_coverage,
            r.seconds
        );
    }
    s
}

pub fn synth_bench(a: &BenchArgs) -> Result<()> {
    let mut grid: BenchGrid = match &a.config {
        Some(p) => from_toml(p)?,
        None => BenchGrid::default(),
    };
    if let Some(v) = &a.alphas {
        grid.alphas = v.clone();
    }
    if let Some(v) = &a.lambda0s {
        grid.lambda0s = v.clone();
    }
    if let Some(v) = &a.lambda1s {
        grid.lambda1s = v.clone();
    }
    if let Some(v) = &a.beam_widths {
        grid.beam_widths = v.clone();
    }
    if let Some(v) = &a.seeds {
        grid.seeds = v.clone();
    }
    if let Some(n) = a.n_samples {
        grid.synth.n_samples = n;
    }
    grid.synth.validate()?;
    if a.jobs == 0 {
        return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
    }
    let cells = grid.cells();
    log::info!("{} benchmark cells on {} threads", cells.len(), a.jobs);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let results: Vec<BenchResult> =
        pool.install(|| cells.par_iter().map(|c| grid.run_cell(c)).collect::<Result<_>>())?;
    write(&a.out, &bench_csv(&results))?;
    let mut widths = grid.beam_widths.clone();
    widths.sort_unstable();
    widths.dedup();
    for b in widths {
        let rs: Vec<&BenchResult> = results.iter().filter(|r| r.beam_width == b).collect();
        let rate = |f: fn(&BenchResult) -> bool| rs.iter().filter(|r| f(r)).count() as f64 / rs.len().max(1) as f64;
        println!(
            "B = {b}: recovery {:.3}, loose recovery {:.3} over {} runs",
            rate(|r| r.recovered),
            rate(|r| r.recovered_loose),
            rs.len()
        );
    }
    Ok(())
}
