use morrey_harness::config::{ExperimentConfig, Setup};
use morrey_harness::experiments::lemmas::{lemma22_scan, lemma23_scan};
use morrey_harness::experiments::{
    example36_verify, lemma22_verify, lemma23_verify, theorem31_experiment, theorem33_experiment,
};
use morrey_harness::inputs::FunctionArg;
use morrey_harness::report::Verdict;
use proptest::prelude::*;

fn setup(edit: impl FnOnce(&mut ExperimentConfig)) -> Setup {
    let mut cfg = ExperimentConfig::default();
    edit(&mut cfg);
    cfg.resolve().unwrap()
}

fn unit_weight(c: &mut ExperimentConfig) {
    c.weight = "const:1".parse().unwrap();
    c.roster = vec!["indicator:1".parse().unwrap()];
}

#[test]
fn lemma22_unit_weight_indicator_is_stable() {
    let r = lemma22_verify(&setup(unit_weight)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let f = &r.functions[0];
    assert!(f.sup_ratio.is_finite() && f.sup_ratio > 0.0);
    assert!(f.drift < 0.2, "drift {}", f.drift);
}

#[test]
fn lemma22_sup_grows_with_the_family() {
    let s = setup(unit_weight);
    let f = s.config.roster[0].sample(&s.grid).unwrap();
    let base = lemma22_scan(&s, &f, &s.family).unwrap();
    let doubled = lemma22_scan(&s, &f, &s.family.doubled()).unwrap();
    assert!(doubled.sup_ratio.is_finite());
    assert!(doubled.sup_ratio >= base.sup_ratio);
}

#[test]
fn lemma23_step_symbol_is_stable() {
    let r = lemma23_verify(&setup(|c| c.roster = vec!["indicator:1".parse().unwrap()])).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.functions[0].drift < 0.2);
    assert!((r.bmo_seminorm.unwrap() - 0.5).abs() < 0.025);
}

#[test]
fn lemma23_constant_symbol_gives_zero_ratios() {
    let r = lemma23_verify(&setup(|c| c.symbol = FunctionArg::Constant(2.0))).unwrap();
    assert_eq!(r.bmo_seminorm, Some(0.0));
    assert!(r.functions.iter().all(|f| f.sup_ratio == 0.0));
}

#[test]
fn theorem31_bounded_and_power_weights_pass() {
    let power = theorem31_experiment(&setup(|_| {})).unwrap();
    assert_eq!(power.verdict, Verdict::Pass, "{:?}", power.notes);
    let pinched = theorem31_experiment(&setup(|c| {
        c.weight = "pinched:1:2:0.5".parse().unwrap();
        c.roster = vec![
            "indicator:1".parse().unwrap(),
            "powerbump:0.1".parse().unwrap(),
            "smooth:1".parse().unwrap(),
        ];
    }))
    .unwrap();
    assert_eq!(pinched.verdict, Verdict::Pass, "{:?}", pinched.notes);
}

#[test]
fn theorem31_failure_names_the_function_and_carries_a_witness() {
    // I_α(|y|^{-0.3}) behaves like a logarithm down to scales far below h
    let r = theorem31_experiment(&setup(|c| {
        c.weight = "pinched:1:2:0.5".parse().unwrap();
        c.roster = vec!["powerbump:0.3".parse().unwrap()];
    }))
    .unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.notes.iter().any(|n| n.contains("powerbump:0.3")));
    let failing = r.operators.iter().find(|o| !o.vanishing_preserved).unwrap();
    assert!(failing.witness.radius > 0.0);
}

#[test]
fn theorem33_log_symbol_bounded_weight_ratios_are_stable() {
    let r = theorem33_experiment(&setup(|c| {
        c.weight = "pinched:1:2:0.5".parse().unwrap();
        c.symbol = FunctionArg::Log;
        c.roster = vec!["indicator:1".parse().unwrap(), "smooth:1".parse().unwrap()];
    }))
    .unwrap();
    assert!(r.hypotheses.satisfied, "{:?}", r.hypotheses.failures);
    for o in &r.operators {
        assert!(
            o.finite && o.drift < 0.25,
            "{} {}: drift {}",
            o.operator,
            o.function,
            o.drift
        );
    }
}

#[test]
fn example36_passes_on_defaults() {
    let r = example36_verify(&setup(|_| {})).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.notes);
    let fit = r.c_delta.unwrap();
    assert!((fit.fitted.unwrap() + 0.35).abs() < 0.05);
}

#[test]
fn lemma23_ratios_invariant_under_symbol_shift() {
    let s = setup(|_| {});
    let b = s.config.symbol.sample(&s.grid).unwrap();
    let f = s.config.roster[2].sample(&s.grid).unwrap();
    let (a, bmo_a) = lemma23_scan(&s, &b, &f, &s.family).unwrap();
    let (c, bmo_c) = lemma23_scan(&s, &b.map(|v| v - 3.0).unwrap(), &f, &s.family).unwrap();
    assert!((bmo_a - bmo_c).abs() <= 1e-12);
    assert!((a.sup_ratio - c.sup_ratio).abs() <= 1e-10 * a.sup_ratio);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lemma22_ratio_is_homogeneous_of_degree_zero(c in 0.1f64..20.0) {
        let s = setup(|cfg| cfg.grid = "1:4:256".parse().unwrap());
        let f = s.config.roster[0].sample(&s.grid).unwrap();
        let a = lemma22_scan(&s, &f, &s.family).unwrap().sup_ratio;
        let b = lemma22_scan(&s, &f.scaled(c), &s.family).unwrap().sup_ratio;
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn config_hash_tracks_content_not_output_dir(p in 1.2f64..3.0, dir in "[a-z]{1,8}") {
        let a = ExperimentConfig { p, ..ExperimentConfig::default() };
        let mut b = a.clone();
        b.output_dir = dir.into();
        prop_assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig { p: p + 0.01, ..a.clone() };
        prop_assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn function_specs_round_trip(r in 0.01f64..3.0, g in 0.0f64..0.45, x in -1.0f64..1.0) {
        for f in [
            FunctionArg::Indicator { radius: r, center: vec![x] },
            FunctionArg::PowerBump(g),
            FunctionArg::Smooth(r),
            FunctionArg::Constant(x),
        ] {
            let back: FunctionArg = f.to_string().parse().unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
