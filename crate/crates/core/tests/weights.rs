use approx::assert_relative_eq;
use morrey_core::{
    ap_characteristic, apq_characteristic, closed_form_power_norm, lemma21_check, weight_lq_norm, Ball, BallFamily,
    ExponentSet, Grid64, SampledFunction, WeightSpec,
};
use proptest::prelude::*;

#[test]
fn centered_power_norm_ratio_converges() {
    // ∫_{-r}^{r} |y|^β dy = 2 r^{1+β}/(1+β), so norm / r^{(1+β)/q} = (2/(1+β))^{1/q}
    let (beta, q) = (1.0f64, 4.0);
    let limit = (2.0 / (1.0 + beta)).powf(1.0 / q);
    let w = WeightSpec::Power(beta / q);
    let mut errors = Vec::new();
    for cells in [256usize, 1024] {
        let g = Grid64::new(1, 4.0, cells).unwrap();
        let b = Ball::new(&[0.0], 0.5).unwrap();
        let ratio = weight_lq_norm(&w, q, &b, &g).unwrap() / closed_form_power_norm(beta, q, 1, &b).unwrap().0;
        errors.push((ratio - limit).abs());
    }
    assert!(errors[1] < 0.02 * limit);
    assert!(errors[1] <= errors[0]);
}

#[test]
fn power_norm_envelope_is_two_sided() {
    let g = Grid64::new(1, 4.0, 1024).unwrap();
    let fam = BallFamily::default_for(&g);
    let (beta, q) = (1.0f64, 4.0);
    let w = WeightSpec::Power(beta / q);
    let (mut lo, mut hi) = (f64::MAX, 0.0f64);
    for (_, b) in fam.balls() {
        let r = weight_lq_norm(&w, q, &b, &g).unwrap() / closed_form_power_norm(beta, q, 1, &b).unwrap().0;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    assert!(lo > 0.1 && hi < 10.0, "[{lo}, {hi}]");
}

#[test]
fn power_weight_in_ap() {
    let g = Grid64::new(1, 4.0, 2048).unwrap();
    let rep = ap_characteristic(&WeightSpec::Power(0.5), 2.0, &BallFamily::default_for(&g), &g).unwrap();
    assert!(rep.characteristic.is_finite());
    assert!(rep.refinement_drift.unwrap() < 0.2);
    assert!(rep.in_class);
}

#[test]
fn reciprocal_weight_is_out_of_class() {
    let g = Grid64::new(1, 4.0, 2048).unwrap();
    let rep = ap_characteristic(&WeightSpec::Power(-1.0), 2.0, &BallFamily::default_for(&g), &g).unwrap();
    assert!(!rep.locally_integrable);
    assert!(rep.growth_detected);
    assert!(!rep.in_class);
    // characteristic grows at every refinement
    assert!(rep.history.windows(2).all(|w| w[0].1 > w[1].1));
}

#[test]
fn power_weight_in_apq() {
    // β = 1 < n q / p' = 2 for p = 2, α = 1/4
    let g = Grid64::new(1, 4.0, 1024).unwrap();
    let exps = ExponentSet::from_alpha(2.0, 0.25, 1).unwrap();
    let rep = apq_characteristic(
        &WeightSpec::Power(1.0 / exps.q),
        &exps,
        &BallFamily::default_for(&g),
        &g,
    )
    .unwrap();
    assert!(rep.in_class, "{rep:?}");
}

#[test]
fn inclusion_flag_follows_threshold() {
    let g = Grid64::new(1, 4.0, 1024).unwrap();
    let fam = BallFamily::default_for(&g);
    let exps = ExponentSet::from_alpha(2.0, 0.25, 1).unwrap();
    let threshold = exps.q / exps.p_conj;
    for (beta, expect) in [(threshold - 0.4, true), (threshold + 0.4, false)] {
        let chk = lemma21_check(&WeightSpec::Power(beta / exps.q), &exps, &fam, &g).unwrap();
        assert_eq!(chk.lhs_class.in_class, expect, "β = {beta}");
        assert_eq!(chk.rhs_class.in_class, expect, "β = {beta}");
        assert!(chk.consistent);
    }
}

#[test]
fn pinched_weight_bounded_by_ratio() {
    let g = Grid64::new(1, 4.0, 512).unwrap();
    let exps = ExponentSet::from_alpha(2.0, 0.25, 1).unwrap();
    let w = WeightSpec::Pinched {
        lower: 0.5,
        upper: 2.0,
        scale: 0.7,
    };
    let rep = apq_characteristic(&w, &exps, &BallFamily::default_for(&g), &g).unwrap();
    assert!(rep.characteristic <= 4.0 * 1.02);
    assert!(rep.in_class);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn apq_is_scale_invariant(c in 0.01f64..100.0, k in 0.5f64..3.0) {
        let g = Grid64::new(1, 4.0, 128).unwrap();
        let fam = BallFamily::default_for(&g);
        let exps = ExponentSet::from_alpha(2.0, 0.25, 1).unwrap();
        let base = SampledFunction::sample(&g, |p| 1.5 + (k * p[0]).sin()).unwrap();
        let a = apq_characteristic(&WeightSpec::Tabulated(base.clone()), &exps, &fam, &g).unwrap();
        let b = apq_characteristic(&WeightSpec::Tabulated(base.scaled(c)), &exps, &fam, &g).unwrap();
        prop_assert!((a.characteristic - b.characteristic).abs() <= 1e-12 * a.characteristic);
    }

    #[test]
    fn ap_at_least_one(lower in 0.1f64..1.0, spread in 1.0f64..5.0, scale in 0.1f64..2.0, p in 1.2f64..4.0) {
        let g = Grid64::new(1, 4.0, 128).unwrap();
        let w = WeightSpec::Pinched { lower, upper: lower * spread, scale };
        let rep = ap_characteristic(&w, p, &BallFamily::default_for(&g), &g).unwrap();
        prop_assert!(rep.characteristic >= 0.98);
    }

    #[test]
    fn lq_norm_monotone_in_radius(beta in -0.9f64..2.0, x in -2.0f64..2.0, r in 0.01f64..2.0, dr in 0.0f64..2.0) {
        let g = Grid64::new(1, 4.0, 256).unwrap();
        let w = WeightSpec::Power(beta);
        let a = weight_lq_norm(&w, 2.0, &Ball::new(&[x], r).unwrap(), &g).unwrap();
        let b = weight_lq_norm(&w, 2.0, &Ball::new(&[x], r + dr).unwrap(), &g).unwrap();
        prop_assert!(a <= b);
    }
}

#[test]
fn unit_weight_apq_is_one() {
    let g = Grid64::new(2, 2.0, 64).unwrap();
    let exps = ExponentSet::from_alpha(2.0, 0.5, 2).unwrap();
    let rep = apq_characteristic(&WeightSpec::Constant(1.0), &exps, &BallFamily::default_for(&g), &g).unwrap();
    assert_relative_eq!(rep.characteristic, 1.0, max_relative = 0.02);
}
