use overrule_core::data::{Column, Dataset, FeatureMeta, GroupColumn};
use overrule_core::estimators::{
    overlap_labels, policy_overlap_labels, CbbModel, Condition, KnnModel, LogisticModel, Policy, PolicyRule,
    PolicyRules, PropensityModel,
};
use overrule_core::rules::Op;
use overrule_core::ErrorKind;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn labels(k: usize) -> Vec<String> {
    (0..k).map(|t| format!("g{t}")).collect()
}

fn with_groups(features: Vec<FeatureMeta>, cols: Vec<Column>, codes: Vec<u32>, k: usize) -> Dataset {
    Dataset::new(
        features,
        cols,
        Some(GroupColumn {
            name: "t".into(),
            labels: labels(k),
            codes,
        }),
    )
    .unwrap()
}

fn continuous(name: &str, v: &[f64]) -> (FeatureMeta, Column) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (FeatureMeta::continuous(name, lo, hi), Column::Numeric(v.to_vec()))
}

/// Group 1 shifted by `shift` along x1; x2 is noise.
fn two_gaussians(n: usize, shift: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    let codes: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
    let x1: Vec<f64> = codes.iter().map(|&c| z.sample(&mut rng) + shift * f64::from(c)).collect();
    let x2: Vec<f64> = (0..n).map(|_| z.sample(&mut rng)).collect();
    let (f1, c1) = continuous("x1", &x1);
    let (f2, c2) = continuous("x2", &x2);
    with_groups(vec![f1, f2], vec![c1, c2], codes, 2)
}

fn proba(m: &PropensityModel, d: &Dataset) -> Vec<Vec<f64>> {
    m.predict_proba(d).unwrap()
}

#[test]
fn logistic_identical_groups_predict_half() {
    let d = two_gaussians(2000, 0.0, 1);
    let m = PropensityModel::Logistic(LogisticModel::fit(&d, 1.0).unwrap());
    for p in proba(&m, &d) {
        assert!((p[0] - 0.5).abs() <= 0.05, "{p:?}");
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn logistic_stationarity() {
    // Unpenalised intercepts: at the optimum the mean predicted probability
    // of each group equals its empirical share.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 600;
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let codes: Vec<u32> = x
        .iter()
        .map(|&v| {
            let u: f64 = rng.gen();
            if u < 0.2 + 0.15 * v {
                0
            } else if u < 0.7 {
                1
            } else {
                2
            }
        })
        .collect();
    let (f, c) = continuous("x", &x);
    let d = with_groups(vec![f], vec![c], codes.clone(), 3);
    let lm = LogisticModel::fit(&d, 1.0).unwrap();
    assert!(lm.converged);
    let p = lm.predict_proba(&d).unwrap();
    for t in 0..3 {
        let mean = p.iter().map(|r| r[t]).sum::<f64>() / n as f64;
        let share = codes.iter().filter(|&&c| c == t as u32).count() as f64 / n as f64;
        assert!((mean - share).abs() < 1e-5, "group {t}: {mean} vs {share}");
    }
}

#[test]
fn logistic_separating_binary_feature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 400;
    let b: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
    let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let codes: Vec<u32> = b.iter().map(|&v| v as u32).collect();
    let (fn_, cn) = continuous("noise", &noise);
    let d = with_groups(
        vec![FeatureMeta::binary("b"), fn_],
        vec![Column::Numeric(b.clone()), cn],
        codes.clone(),
        2,
    );
    let m = LogisticModel::fit(&d, 50.0).unwrap();
    let p = m.predict_proba(&d).unwrap();
    let acc = p.iter().zip(&codes).filter(|(r, &c)| (r[1] > 0.5) == (c == 1)).count() as f64 / n as f64;
    assert!(acc > 0.95);
    let (on, off): (Vec<_>, Vec<_>) = p.iter().zip(&b).partition(|(_, &v)| v == 1.0);
    let min_on = on.iter().map(|(r, _)| r[1]).fold(1.0, f64::min);
    let max_off = off.iter().map(|(r, _)| r[1]).fold(0.0, f64::max);
    assert!(min_on > max_off);
}

#[test]
fn logistic_empty_group_rejected() {
    let d = with_groups(
        vec![FeatureMeta::continuous("x", 0.0, 1.0)],
        vec![Column::Numeric(vec![0.0, 0.5, 1.0])],
        vec![0, 0, 0],
        2,
    );
    let e = LogisticModel::fit(&d, 1.0).unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Data);
}

#[test]
fn logistic_labels_invariant_to_feature_rescaling() {
    let d = two_gaussians(500, 2.5, 4);
    let Column::Numeric(x1) = d.column(0).clone() else { unreachable!() };
    let scaled: Vec<f64> = x1.iter().map(|v| 37.0 * v).collect();
    let (f, c) = continuous("x1", &scaled);
    let d2 = with_groups(
        vec![f, d.features()[1].clone()],
        vec![c, d.column(1).clone()],
        d.groups().unwrap().codes.clone(),
        2,
    );
    let a = PropensityModel::Logistic(LogisticModel::fit(&d, 1.0).unwrap());
    let b = PropensityModel::Logistic(LogisticModel::fit(&d2, 1.0).unwrap());
    for eps in [0.05, 0.1, 0.2, 0.3] {
        assert_eq!(
            overlap_labels(&a, &d, eps).unwrap().labels,
            overlap_labels(&b, &d2, eps).unwrap().labels
        );
    }
}

#[test]
fn knn_k_equals_m_gives_global_frequencies() {
    let d = two_gaussians(30, 1.0, 5);
    let codes = &d.groups().unwrap().codes;
    let share = codes.iter().filter(|&&c| c == 1).count() as f64 / 30.0;
    let m = PropensityModel::Knn(KnnModel::fit(&d, 30).unwrap());
    for p in proba(&m, &d) {
        assert!((p[1] - share).abs() < 1e-12);
    }
}

#[test]
fn knn_k1_returns_own_group() {
    let d = two_gaussians(50, 1.0, 6);
    let m = PropensityModel::Knn(KnnModel::fit(&d, 1).unwrap());
    for (p, &c) in proba(&m, &d).iter().zip(&d.groups().unwrap().codes) {
        assert_eq!(p[c as usize], 1.0);
    }
}

#[test]
fn knn_ties_broken_by_row_index() {
    // identical covariates; the first row (group 1) must win at k = 1
    let d = with_groups(
        vec![FeatureMeta::continuous("x", 0.0, 1.0)],
        vec![Column::Numeric(vec![0.5, 0.5, 0.0, 1.0])],
        vec![1, 0, 0, 0],
        2,
    );
    let m = KnnModel::fit(&d, 1).unwrap();
    let q = d.subset(&[1]);
    assert_eq!(m.predict_proba(&q).unwrap()[0], vec![0.0, 1.0]);
}

#[test]
fn knn_separated_clusters() {
    let d = two_gaussians(200, 20.0, 7);
    let m = PropensityModel::Knn(KnnModel::fit(&d, 5).unwrap());
    for (p, &c) in proba(&m, &d).iter().zip(&d.groups().unwrap().codes) {
        assert!(p[c as usize] >= 0.8);
    }
}

#[test]
fn knn_k_too_large() {
    let d = two_gaussians(10, 1.0, 8);
    assert!(KnnModel::fit(&d, 11).is_err());
    assert!(KnnModel::fit(&d, 0).is_err());
}

#[test]
fn cbb_full_mass_uses_min_max() {
    let x: Vec<f64> = (0..20).map(|i| f64::from(i % 10)).collect();
    let (f, c) = continuous("x", &x);
    let d = with_groups(vec![f], vec![c], (0..20).map(|i| (i / 10) as u32).collect(), 2);
    let m = PropensityModel::Cbb(CbbModel::fit(&d, 1.0).unwrap());
    let l = overlap_labels(&m, &d, 0.1).unwrap();
    assert!(l.labels.iter().all(|&b| b));
    assert_eq!(l.epsilon, None);
    assert!(m.predict_proba(&d).is_err());
}

#[test]
fn cbb_disjoint_groups_label_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let codes: Vec<u32> = (0..100).map(|i| (i % 2) as u32).collect();
    let x: Vec<f64> = codes.iter().map(|&c| 2.0 * f64::from(c) + rng.gen_range(0.0..1.0)).collect();
    let (f, c) = continuous("x", &x);
    let d = with_groups(vec![f], vec![c], codes, 2);
    let m = PropensityModel::Cbb(CbbModel::fit(&d, 0.9).unwrap());
    assert_eq!(overlap_labels(&m, &d, 0.1).unwrap().count(), 0);
}

#[test]
fn cbb_ignores_categorical_and_binary() {
    let d = with_groups(
        vec![
            FeatureMeta::categorical("c", vec!["a".into(), "b".into()]),
            FeatureMeta::binary("b"),
        ],
        vec![Column::Categorical(vec![0, 0, 1, 1]), Column::Numeric(vec![0.0, 0.0, 1.0, 1.0])],
        vec![0, 0, 1, 1],
        2,
    );
    let m = PropensityModel::Cbb(CbbModel::fit(&d, 0.5).unwrap());
    assert_eq!(overlap_labels(&m, &d, 0.1).unwrap().count(), 4);
}

/// Groups with fixed shares so k = m kNN predicts exactly those shares.
fn shares(counts: &[usize]) -> (PropensityModel, Dataset) {
    let n: usize = counts.iter().sum();
    let codes: Vec<u32> = counts
        .iter()
        .enumerate()
        .flat_map(|(t, &c)| std::iter::repeat_n(t as u32, c))
        .collect();
    let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let (f, c) = continuous("x", &x);
    let d = with_groups(vec![f], vec![c], codes, counts.len());
    (PropensityModel::Knn(KnnModel::fit(&d, n).unwrap()), d)
}

#[test]
fn threshold_examples() {
    let (m, d) = shares(&[10, 10]);
    assert!(overlap_labels(&m, &d, 0.1).unwrap().labels.iter().all(|&b| b));
    let (m, d) = shares(&[19, 1]);
    assert!(overlap_labels(&m, &d, 0.1).unwrap().labels.iter().all(|&b| !b));
    assert!(overlap_labels(&m, &d, 0.05).unwrap().labels.iter().all(|&b| b));
}

#[test]
fn epsilon_outside_unit_interval() {
    let (m, d) = shares(&[5, 5]);
    for eps in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
        assert_eq!(overlap_labels(&m, &d, eps).unwrap_err().kind(), ErrorKind::Config);
    }
}

#[test]
fn singleton_policy_checks_only_its_treatment() {
    // shares 0.15 / 0.80 / 0.05
    let (m, d) = shares(&[3, 16, 1]);
    let full = overlap_labels(&m, &d, 0.1).unwrap();
    assert!(full.labels.iter().all(|&b| !b));
    let pol = Policy {
        allowed: vec![vec![0]; 20],
    };
    let l = policy_overlap_labels(&m, &d, &pol, 0.1).unwrap();
    assert!(l.labels.iter().all(|&b| b));
}

#[test]
fn empty_policy_set_names_row() {
    let (m, d) = shares(&[5, 5]);
    let mut pol = Policy::full(10, 2);
    pol.allowed[7].clear();
    let e = policy_overlap_labels(&m, &d, &pol, 0.1).unwrap_err();
    assert!(e.to_string().contains("row 7"), "{e}");
}

#[test]
fn policy_from_column_and_rules() {
    let names = labels(3);
    let p = Policy::from_column(&["g0;g2".into(), " g1 ".into(), "g2;g0".into()], &names).unwrap();
    assert_eq!(p.allowed, vec![vec![0, 2], vec![1], vec![0, 2]]);
    assert!(Policy::from_column(&["g9".into()], &names).is_err());

    let d = with_groups(
        vec![
            FeatureMeta::continuous("age", 0.0, 100.0),
            FeatureMeta::categorical("site", vec!["a".into(), "b".into()]),
        ],
        vec![
            Column::Numeric(vec![20.0, 70.0, 70.0, 40.0]),
            Column::Categorical(vec![0, 0, 1, 1]),
        ],
        vec![0, 1, 2, 0],
        3,
    );
    let rules: PolicyRules = serde_json::from_str(
        r#"{"rules": [
              {"when": [{"feature": "age", "op": ">", "value": 65},
                        {"feature": "site", "op": "=", "value": "a"}], "allow": ["g1"]},
              {"when": [{"feature": "age", "op": ">", "value": 65}], "allow": ["g2", "g1"]}
            ],
            "default": ["g0"]}"#,
    )
    .unwrap();
    let p = Policy::from_rules(&rules, &d, &names).unwrap();
    assert_eq!(p.allowed, vec![vec![0], vec![1], vec![1, 2], vec![0]]);

    let bad = PolicyRules {
        rules: vec![PolicyRule {
            when: vec![Condition {
                feature: "site".into(),
                op: Op::Le,
                value: serde_json::json!("a"),
            }],
            allow: vec!["g0".into()],
        }],
        default: vec![],
    };
    assert!(Policy::from_rules(&bad, &d, &names).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn labels_monotone_in_epsilon(seed in any::<u64>(), a in 0.01f64..0.5, b in 0.01f64..0.5) {
        let d = two_gaussians(200, 1.5, seed);
        let m = PropensityModel::Logistic(LogisticModel::fit(&d, 1.0).unwrap());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let l_lo = overlap_labels(&m, &d, lo).unwrap().labels;
        let l_hi = overlap_labels(&m, &d, hi).unwrap().labels;
        prop_assert!(l_hi.iter().zip(&l_lo).all(|(h, l)| !h || *l));
    }

    #[test]
    fn full_policy_reduces_to_plain_labels(seed in any::<u64>(), eps in 0.01f64..0.6, k in 1usize..20) {
        let d = two_gaussians(120, 1.0, seed);
        for m in [
            PropensityModel::Logistic(LogisticModel::fit(&d, 1.0).unwrap()),
            PropensityModel::Knn(KnnModel::fit(&d, k).unwrap()),
            PropensityModel::Cbb(CbbModel::fit(&d, 0.8).unwrap()),
        ] {
            let full = Policy::full(d.n_rows(), 2);
            prop_assert_eq!(
                overlap_labels(&m, &d, eps).unwrap(),
                policy_overlap_labels(&m, &d, &full, eps).unwrap()
            );
        }
    }
}
