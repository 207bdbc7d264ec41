//! Boundedness of `I_α`, `M_α` and their commutators between vanishing
//! weighted Morrey spaces, checked as stability of quasinorm ratios under
//! refinement plus preservation of the vanishing surrogate.

use morrey_core::quad::{LogFactor, LogSamples};
use morrey_core::{
    apq_characteristic, bmo_seminorm, commutator_integral, commutator_maximal, condition_31, condition_32,
    condition_34, condition_35, envelope_class_check, fractional_maximal, morrey_quasinorm, vanishing_check_auto,
    ConditionOptions, EnvelopeSpec64, Grid64, MorreyReport, OperatorParams64, SampledFunction64,
};
use serde::Serialize;

use super::lemmas::sanitize;
use super::{
    coords, full_weight_norm, integral_field, outer_length, relative_drift, safe_ratio, BallRef, ClassSummary,
    ConditionSummary, NODES_PER_DECADE,
};
use crate::config::Setup;
use crate::report::{fmt_real, Curve, Metadata, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `I_α`, `M_α`
    Plain,
    /// `I_{α,b}`, `M_{α,b}`
    Commutator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub decay: bool,
    pub lower_bound: bool,
    pub inf_large_radii: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaValue {
    pub delta: f64,
    pub value: Option<f64>,
    pub divergent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypotheses {
    pub satisfied: bool,
    pub failures: Vec<String>,
    pub weight_class: ClassSummary,
    pub phi_admissible: Admissibility,
    pub psi_admissible: Admissibility,
    /// `c_δ` at every configured `δ`.
    pub line_condition: Vec<DeltaValue>,
    pub ball_condition: ConditionSummary,
    pub bmo_seminorm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorResult {
    pub function: String,
    pub operator: &'static str,
    pub input_quasinorm: f64,
    pub output_quasinorm: f64,
    pub ratio: f64,
    pub ratio_coarse: f64,
    pub drift: f64,
    pub finite: bool,
    pub stable: bool,
    pub input_vanishing: bool,
    pub output_vanishing: bool,
    /// Vanishing input implies vanishing output.
    pub vanishing_preserved: bool,
    pub witness: BallRef,
}

/// `M_α` ratio against `defect ·` the `I_α(|f|)` ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domination {
    pub function: String,
    pub maximal_ratio: f64,
    pub integral_abs_ratio: f64,
    pub defect: f64,
    pub holds: bool,
}

/// Near/far split of the bound at one radius, sup over centers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitRow {
    pub radius: f64,
    pub near: f64,
    pub far: f64,
    pub dominant: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub experiment: &'static str,
    pub verdict: Verdict,
    pub metadata: Metadata,
    pub hypotheses: Hypotheses,
    pub drift_tolerance: f64,
    pub operators: Vec<OperatorResult>,
    pub domination: Vec<Domination>,
    pub split_delta: Option<f64>,
    pub split: Vec<SplitRow>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub curves: Vec<Curve>,
}

fn admissibility(setup: &Setup, env: &EnvelopeSpec64, wpow: f64) -> anyhow::Result<Admissibility> {
    let c = envelope_class_check(env, &setup.weight, wpow, &setup.family, &setup.grid)?;
    Ok(Admissibility {
        decay: c.cond_23,
        lower_bound: c.cond_24,
        inf_large_radii: c.inf_24,
    })
}

pub fn hypotheses(setup: &Setup, kind: OperatorKind) -> anyhow::Result<Hypotheses> {
    let (p, q) = (setup.exps.p, setup.exps.q);
    let dim = setup.grid.dim();
    let opts = ConditionOptions::default();
    let class = apq_characteristic(&setup.weight, &setup.exps, &setup.family, &setup.grid)?;
    let weight_class = ClassSummary::new(&class, dim);
    let phi_admissible = admissibility(setup, &setup.phi, p)?;
    let psi_admissible = admissibility(setup, &setup.psi, q)?;
    let centers = setup.family.centers();
    let mut line_condition = Vec::new();
    for &delta in &setup.config.deltas {
        let r = match kind {
            OperatorKind::Plain => condition_31(&setup.phi, p, &setup.weight, q, delta, centers, dim, &opts)?,
            OperatorKind::Commutator => condition_34(&setup.phi, p, &setup.weight, q, delta, centers, dim, &opts)?,
        };
        line_condition.push(DeltaValue {
            delta,
            value: r.value(),
            divergent: r.divergent,
        });
    }
    let ball = match kind {
        OperatorKind::Plain => condition_32(&setup.phi, p, &setup.psi, q, &setup.weight, &setup.family, &opts)?,
        OperatorKind::Commutator => condition_35(&setup.phi, p, &setup.psi, q, &setup.weight, &setup.family, &opts)?,
    };
    let ball_condition = ConditionSummary::new(&ball, dim);
    let bmo_seminorm = match kind {
        OperatorKind::Plain => None,
        OperatorKind::Commutator => {
            let b = setup.config.symbol.sample(&setup.grid)?;
            Some(bmo_seminorm(&b, &setup.family)?.seminorm)
        }
    };

    let mut failures = Vec::new();
    if !weight_class.in_class {
        failures.push("weight is not in A_{p,q}".to_string());
    }
    if !(phi_admissible.decay && phi_admissible.lower_bound) {
        failures.push("phi is not admissible for w^p".to_string());
    }
    if !(psi_admissible.decay && psi_admissible.lower_bound) {
        failures.push("psi is not admissible for w^q".to_string());
    }
    for d in &line_condition {
        if d.divergent || d.value.is_none() {
            failures.push(format!("c_delta diverges at delta = {}", d.delta));
        }
    }
    if ball_condition.divergent {
        failures.push("ball condition diverges".to_string());
    } else if !ball_condition.holds {
        failures.push("ball condition constant keeps growing as r -> 0".to_string());
    }
    if let Some(b) = bmo_seminorm {
        if !b.is_finite() {
            failures.push("symbol has infinite oscillation".to_string());
        }
    }
    Ok(Hypotheses {
        satisfied: failures.is_empty(),
        failures,
        weight_class,
        phi_admissible,
        psi_admissible,
        line_condition,
        ball_condition,
        bmo_seminorm,
    })
}

/// Quasinorms and vanishing flags for one function and operator on one grid.
#[derive(Debug, Clone)]
struct Measured {
    input: MorreyReport<f64>,
    output: MorreyReport<f64>,
    ratio: f64,
    input_vanishing: bool,
    output_vanishing: bool,
}

fn output_report(setup: &Setup, out: &SampledFunction64) -> anyhow::Result<MorreyReport<f64>> {
    let q = setup.exps.q;
    Ok(morrey_quasinorm(out, &setup.psi, q, &setup.weight, q, &setup.family)?)
}

fn input_report(setup: &Setup, f: &SampledFunction64) -> anyhow::Result<MorreyReport<f64>> {
    let p = setup.exps.p;
    Ok(morrey_quasinorm(f, &setup.phi, p, &setup.weight, p, &setup.family)?)
}

fn measure(
    setup: &Setup,
    input: &MorreyReport<f64>,
    input_vanishing: bool,
    out: &SampledFunction64,
    scale: f64,
    zero_floor: f64,
) -> anyhow::Result<Measured> {
    let output = output_report(setup, out)?;
    let ratio = safe_ratio(output.quasinorm, scale * input.quasinorm, zero_floor);
    let output_vanishing = output.quasinorm <= zero_floor || vanishing_check_auto(&output)?;
    Ok(Measured {
        input: input.clone(),
        output,
        ratio,
        input_vanishing,
        output_vanishing,
    })
}

/// Per-operator measurements for `f` on `grid`, in the order
/// `[integral, maximal]`, plus the `I_α(|f|)` quasinorm ratio.
fn measure_all(
    setup: &Setup,
    kind: OperatorKind,
    f: &SampledFunction64,
    b: Option<&SampledFunction64>,
    grid: &Grid64,
) -> anyhow::Result<([Measured; 2], f64)> {
    let alpha = setup.exps.alpha;
    let params = OperatorParams64::new(alpha, grid);
    let input = input_report(setup, f)?;
    let input_vanishing = input.quasinorm == 0.0 || vanishing_check_auto(&input)?;
    let abs_integral = integral_field(&f.abs(), alpha, grid)?;
    let abs_report = output_report(setup, &abs_integral)?;
    let abs_ratio = safe_ratio(abs_report.quasinorm, input.quasinorm, 0.0);
    match kind {
        OperatorKind::Plain => {
            let i = integral_field(f, alpha, grid)?;
            let m = fractional_maximal(f, &params)?.into_field()?;
            Ok((
                [
                    measure(setup, &input, input_vanishing, &i, 1.0, 0.0)?,
                    measure(setup, &input, input_vanishing, &m, 1.0, 0.0)?,
                ],
                abs_ratio,
            ))
        }
        OperatorKind::Commutator => {
            let b = b.expect("commutator experiments carry a symbol");
            let bmo = bmo_seminorm(b, &setup.family)?.seminorm;
            let b_sup = b.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let floor = setup.config.tolerances.zero * b_sup * abs_report.quasinorm;
            let ci = commutator_integral(b, f, &params)?.into_field()?;
            let cm = commutator_maximal(b, f, &params)?.into_field()?;
            Ok((
                [
                    measure(setup, &input, input_vanishing, &ci, bmo, floor)?,
                    measure(setup, &input, input_vanishing, &cm, bmo, floor)?,
                ],
                abs_ratio,
            ))
        }
    }
}

/// Near and far parts of the bound `‖w‖(r)/ψ^{1/q}(r) ∫_r^∞ φ^{1/p}(t) S(t)/‖w‖(t) dt/t`
/// split at `δ₀`, where `S(t)` is the running sup over radii below `t` of the
/// input modulus curve.
pub fn split_rows(setup: &Setup, input: &MorreyReport<f64>, delta0: f64) -> anyhow::Result<Vec<SplitRow>> {
    let (p, q) = (setup.exps.p, setup.exps.q);
    let dim = setup.grid.dim();
    let curve = &input.modulus_curve;
    let mut running = Vec::with_capacity(curve.len());
    let mut m = 0.0f64;
    for &(r, v) in curve {
        m = m.max(v);
        running.push((r, m));
    }
    let s_at = |t: f64| -> f64 {
        let k = running.partition_point(|&(r, _)| r <= t);
        if k == 0 {
            running.first().map_or(0.0, |x| x.1)
        } else {
            running[k - 1].1
        }
    };
    let radii: Vec<f64> = curve.iter().map(|c| c.0).filter(|&r| r < delta0).collect();
    let mut rows: Vec<SplitRow> = radii
        .iter()
        .map(|&r| SplitRow {
            radius: r,
            near: 0.0,
            far: 0.0,
            dominant: "near",
        })
        .collect();
    if radii.is_empty() {
        return Ok(rows);
    }
    for (ci, x) in setup.family.centers().iter().enumerate() {
        let g = |t: f64| -> morrey_core::Result<f64> {
            Ok(setup.phi.eval(ci, t)?.powf(1.0 / p) * s_at(t) / full_weight_norm(&setup.weight, q, dim, x, t)?)
        };
        let start = radii[0];
        let upper = outer_length(&setup.weight, q, x, delta0.max(setup.family.r_max()));
        let samples = LogSamples::new(g, start, upper, NODES_PER_DECADE)?;
        let far_int = samples
            .integral_from(delta0, g(delta0)?, LogFactor::None)
            .value
            .unwrap_or(f64::INFINITY);
        for row in rows.iter_mut() {
            let r = row.radius;
            let total = samples
                .integral_from(r, g(r)?, LogFactor::None)
                .value
                .unwrap_or(f64::INFINITY);
            let pre = full_weight_norm(&setup.weight, q, dim, x, r)? / setup.psi.eval(ci, r)?.powf(1.0 / q);
            row.near = row.near.max(pre * (total - far_int).max(0.0));
            row.far = row.far.max(pre * far_int);
        }
    }
    for row in rows.iter_mut() {
        row.dominant = if row.near >= row.far { "near" } else { "far" };
    }
    Ok(rows)
}

fn operator_names(kind: OperatorKind) -> [&'static str; 2] {
    match kind {
        OperatorKind::Plain => ["I_alpha", "M_alpha"],
        OperatorKind::Commutator => ["I_alpha_b", "M_alpha_b"],
    }
}

fn run(setup: &Setup, kind: OperatorKind, experiment: &'static str) -> anyhow::Result<TheoremReport> {
    let tol = match kind {
        OperatorKind::Plain => setup.config.tolerances.drift,
        OperatorKind::Commutator => setup.config.tolerances.commutator_drift,
    };
    let hyp = hypotheses(setup, kind)?;
    let metadata = Metadata::new(setup);
    if !hyp.satisfied {
        return Ok(TheoremReport {
            experiment,
            verdict: Verdict::HypothesesNotSatisfied,
            metadata,
            hypotheses: hyp,
            drift_tolerance: tol,
            operators: Vec::new(),
            domination: Vec::new(),
            split_delta: None,
            split: Vec::new(),
            notes: vec!["no claim is made about the operator ratios".into()],
            curves: Vec::new(),
        });
    }
    let dim = setup.grid.dim();
    let coarse_grid = setup.grid.clone();
    let fine_grid = setup.grid.refined();
    let (b_coarse, b_fine) = match kind {
        OperatorKind::Plain => (None, None),
        OperatorKind::Commutator => (
            Some(setup.config.symbol.sample(&coarse_grid)?),
            Some(setup.config.symbol.sample(&fine_grid)?),
        ),
    };
    let names = operator_names(kind);
    let defect = OperatorParams64::new(setup.exps.alpha, &fine_grid).ladder_defect(dim);
    let mut operators = Vec::new();
    let mut domination = Vec::new();
    let mut curves = Vec::new();
    let mut split = Vec::new();
    let split_delta = setup.config.split_diagnostic.then_some(setup.config.split_delta);
    let mut best_split: Option<(f64, MorreyReport<f64>)> = None;
    for farg in &setup.config.roster {
        let fname = farg.to_string();
        let (coarse, _) = measure_all(
            setup,
            kind,
            &farg.sample(&coarse_grid)?,
            b_coarse.as_ref(),
            &coarse_grid,
        )?;
        let (fine, abs_ratio) = measure_all(setup, kind, &farg.sample(&fine_grid)?, b_fine.as_ref(), &fine_grid)?;
        for (k, (c, f)) in coarse.iter().zip(fine.iter()).enumerate() {
            let drift = relative_drift(f.ratio, c.ratio);
            let mut curve = Curve::new(
                &format!("modulus-{}-{}", names[k], sanitize(&fname)),
                &["radius", "input_modulus", "output_modulus"],
            );
            for (a, b) in f.input.modulus_curve.iter().zip(&f.output.modulus_curve) {
                curve.push(vec![a.0, a.1, b.1]);
            }
            curves.push(curve);
            operators.push(OperatorResult {
                function: fname.clone(),
                operator: names[k],
                input_quasinorm: f.input.quasinorm,
                output_quasinorm: f.output.quasinorm,
                ratio: f.ratio,
                ratio_coarse: c.ratio,
                drift,
                finite: f.ratio.is_finite() && c.ratio.is_finite(),
                stable: drift < tol,
                input_vanishing: f.input_vanishing,
                output_vanishing: f.output_vanishing,
                vanishing_preserved: !f.input_vanishing || f.output_vanishing,
                witness: BallRef {
                    center: coords(&f.output.witness_center, dim),
                    radius: f.output.witness_radius,
                },
            });
        }
        if kind == OperatorKind::Plain {
            let maximal_ratio = fine[1].ratio;
            domination.push(Domination {
                function: fname.clone(),
                maximal_ratio,
                integral_abs_ratio: abs_ratio,
                defect,
                holds: maximal_ratio <= defect * abs_ratio * (1.0 + 1e-12),
            });
        }
        if split_delta.is_some() && best_split.as_ref().is_none_or(|b| fine[0].ratio > b.0) {
            best_split = Some((fine[0].ratio, fine[0].input.clone()));
        }
    }
    if let (Some(d0), Some((_, input))) = (split_delta, best_split) {
        split = split_rows(setup, &input, d0)?;
    }
    let mut notes = Vec::new();
    for o in &operators {
        if !o.finite {
            notes.push(format!("{} of {}: ratio not finite", o.operator, o.function));
        } else if !o.stable {
            notes.push(format!(
                "{} of {}: drift {} exceeds {}",
                o.operator,
                o.function,
                fmt_real(o.drift),
                fmt_real(tol)
            ));
        }
        if !o.vanishing_preserved {
            notes.push(format!(
                "{} of {}: input modulus vanishes but the output modulus does not decay over the smallest decade",
                o.operator, o.function
            ));
        }
    }
    for d in domination.iter().filter(|d| !d.holds) {
        notes.push(format!(
            "M_alpha of {}: exceeds the ladder defect times the I_alpha(|f|) ratio",
            d.function
        ));
    }
    let pass = notes.is_empty();
    Ok(TheoremReport {
        experiment,
        verdict: Verdict::from_pass(pass),
        metadata,
        hypotheses: hyp,
        drift_tolerance: tol,
        operators,
        domination,
        split_delta,
        split,
        notes,
        curves,
    })
}

pub fn theorem31_experiment(setup: &Setup) -> anyhow::Result<TheoremReport> {
    run(setup, OperatorKind::Plain, "thm31")
}

pub fn theorem33_experiment(setup: &Setup) -> anyhow::Result<TheoremReport> {
    run(setup, OperatorKind::Commutator, "thm33")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::inputs::FunctionArg;

    fn setup(edit: impl FnOnce(&mut ExperimentConfig)) -> Setup {
        let mut cfg = ExperimentConfig {
            grid: "1:4:256".parse().unwrap(),
            ..ExperimentConfig::default()
        };
        edit(&mut cfg);
        cfg.resolve().unwrap()
    }

    #[test]
    fn default_instance_passes_with_domination() {
        let r = theorem31_experiment(&setup(|_| {})).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.notes);
        assert_eq!(r.domination.len(), 3);
        assert!(r.domination.iter().all(|d| d.holds));
    }

    #[test]
    fn large_lambda_is_a_hypothesis_failure() {
        // bounded weight: λ = 0.6 ≥ n − αp = 0.5
        let r = theorem31_experiment(&setup(|c| {
            c.weight = "pinched:1:2:0.5".parse().unwrap();
            c.phi = "pow:0.6".parse().unwrap();
        }))
        .unwrap();
        assert_eq!(r.verdict, Verdict::HypothesesNotSatisfied);
        assert!(r.operators.is_empty());
        assert!(r.hypotheses.ball_condition.divergent);
    }

    #[test]
    fn constant_symbol_gives_zero_ratio() {
        let mut cfg = ExperimentConfig {
            symbol: FunctionArg::Constant(3.0),
            ..ExperimentConfig::default()
        };
        let r = theorem33_experiment(&cfg.clone().resolve().unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?} {:?}", r.hypotheses.failures, r.notes);
        assert_eq!(r.hypotheses.bmo_seminorm, Some(0.0));
        assert!(r.operators.iter().all(|o| o.ratio == 0.0 && o.output_quasinorm < 1e-12));
        cfg.grid = "1:4:256".parse().unwrap();
        let s = cfg.resolve().unwrap();
        let f = s.config.roster[0].sample(&s.grid).unwrap();
        let b = s.config.symbol.sample(&s.grid).unwrap();
        let (res, _) = measure_all(&s, OperatorKind::Commutator, &f, Some(&b), &s.grid).unwrap();
        assert!(res.iter().all(|m| m.ratio == 0.0));
    }

    #[test]
    fn normalized_ratio_invariant_under_symbol_scaling() {
        let s = setup(|_| {});
        let f = s.config.roster[0].sample(&s.grid).unwrap();
        let b = s.config.symbol.sample(&s.grid).unwrap();
        let b2 = b.scaled(2.0);
        let (one, _) = measure_all(&s, OperatorKind::Commutator, &f, Some(&b), &s.grid).unwrap();
        let (two, _) = measure_all(&s, OperatorKind::Commutator, &f, Some(&b2), &s.grid).unwrap();
        for (a, c) in one.iter().zip(&two) {
            assert!(
                (a.ratio - c.ratio).abs() <= 1e-10 * a.ratio,
                "{} vs {}",
                a.ratio,
                c.ratio
            );
        }
    }
}
