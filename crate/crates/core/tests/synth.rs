use overrule_core::rules::{Conjunction, Literal, LiteralValue, Op, RuleSet};
use overrule_core::synth::{check_recovery, gen_synthetic, gen_synthetic_rows, BenchCell, BenchGrid, SynthConfig};

fn one(f: usize, v: f64) -> Literal {
    Literal::new(f, Op::Eq, LiteralValue::Number(v), 0.5)
}

#[test]
fn removes_about_a_quarter() {
    for seed in 0..4 {
        let cfg = SynthConfig {
            seed,
            ..SynthConfig::default()
        };
        let kept = gen_synthetic_rows(&cfg).unwrap().len() as f64;
        let removed = 1.0 - kept / cfg.n_samples as f64;
        assert!((removed - 0.25).abs() <= 0.02, "seed {seed}: removed {removed}");
    }
}

#[test]
fn no_common_mass_removes_nothing() {
    let cfg = SynthConfig {
        p_common: 0.0,
        n_samples: 500,
        ..SynthConfig::default()
    };
    assert_eq!(gen_synthetic_rows(&cfg).unwrap().len(), 500);
}

#[test]
fn no_row_has_the_excluded_pair() {
    let cfg = SynthConfig::default();
    let (a, b) = cfg.excluded_features();
    assert_eq!((a, b), (20, 21));
    let rows = gen_synthetic_rows(&cfg).unwrap();
    assert!(rows.iter().all(|r| !(r[a] == 1 && r[b] == 1)));
    let d = gen_synthetic(&cfg).unwrap();
    assert_eq!(d.n_features(), 22);
    assert_eq!(d.features()[a].name, "c11");
}

#[test]
fn seeded_draws_repeat() {
    let cfg = SynthConfig {
        n_samples: 300,
        seed: 42,
        ..SynthConfig::default()
    };
    assert_eq!(gen_synthetic_rows(&cfg).unwrap(), gen_synthetic_rows(&cfg).unwrap());
    let other = SynthConfig { seed: 43, ..cfg.clone() };
    assert_ne!(gen_synthetic_rows(&cfg).unwrap(), gen_synthetic_rows(&other).unwrap());
}

#[test]
fn invalid_configs() {
    for cfg in [
        SynthConfig {
            p_rare: 1.5,
            ..SynthConfig::default()
        },
        SynthConfig {
            excluded_pair: (3, 3),
            ..SynthConfig::default()
        },
        SynthConfig {
            excluded_pair: (0, 12),
            ..SynthConfig::default()
        },
    ] {
        assert!(gen_synthetic_rows(&cfg).is_err());
    }
}

#[test]
fn recovery_semantics() {
    let cfg = SynthConfig::default();
    let target = cfg.target();
    let (a, b) = cfg.excluded_features();
    let exact = RuleSet::cnf(vec![Conjunction::new(vec![one(3, 0.0)]).unwrap(), target.clone()]);
    assert!(check_recovery(&exact, &target, false).unwrap());
    let longer = RuleSet::cnf(vec![Conjunction::new(vec![one(a, 1.0), one(b, 1.0), one(2, 0.0)]).unwrap()]);
    assert!(!check_recovery(&longer, &target, false).unwrap());
    assert!(check_recovery(&longer, &target, true).unwrap());
    let half = RuleSet::cnf(vec![Conjunction::new(vec![one(a, 1.0)]).unwrap()]);
    assert!(!check_recovery(&half, &target, true).unwrap());
    assert!(check_recovery(&RuleSet::dnf(vec![target.clone()]), &target, false).is_err());
}

#[test]
fn small_cell_recovers_planted_exclusion() {
    let grid = BenchGrid {
        synth: SynthConfig {
            n_samples: 3000,
            ..SynthConfig::default()
        },
        ..BenchGrid::default()
    };
    let cell = BenchCell {
        alpha: 0.98,
        lambda0: 0.0,
        lambda1: 1e-4,
        beam_width: 15,
        seed: 0,
    };
    let r = grid.run_cell(&cell).unwrap();
    assert!(r.recovered, "{r:?}");
    assert!(r.data_coverage >= 0.98);
}

#[test]
fn grid_enumerates_every_cell() {
    let g = BenchGrid::default();
    assert_eq!(g.cells().len(), 5 * 4 * 3 * 5 * 3);
}
