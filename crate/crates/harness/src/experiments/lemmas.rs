//! Ball-wise local estimates for `I_α` and `I_{α,b}`:
//!
//! `‖T f‖_{L^{q,w^q}(B(x,r))} ≤ C K ‖w‖_{L^q(B(x,r))} ∫_{2r}^∞ L(t) ‖f‖_{L^{p,w^p}(B(x,t))} ‖w‖^{-1}_{L^q(B(x,t))} dt/t`
//!
//! with `T = I_α, K = 1, L = 1`, or `T = I_{α,b}, K = ‖b‖_*, L = ln(e + t/r)`.
//! The sup of LHS/RHS over the ball family is reported on the configured
//! grid and its refinement.

use morrey_core::grid::{distance_sq, Point};
use morrey_core::quad::{LogFactor, LogSamples};
use morrey_core::{
    apq_characteristic, bmo_seminorm, commutator_integral, weighted_lp_norm, Ball64, BallFamily64, Grid64,
    OperatorParams64, SampledFunction64,
};
use serde::Serialize;

use super::{
    coords, full_weight_norm, integral_field, outer_length, relative_drift, safe_ratio, BallRef, ClassSummary,
    NODES_PER_DECADE,
};
use crate::config::Setup;
use crate::inputs::FunctionArg;
use crate::report::{Curve, Metadata, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallRatio {
    pub ball: BallRef,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Sup of LHS/RHS over the family on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub sup_ratio: f64,
    pub witness: Option<BallRatio>,
    /// `(radius, max over centers of the ratio)`.
    pub by_radius: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionResult {
    pub function: String,
    pub sup_ratio: f64,
    pub sup_ratio_coarse: f64,
    pub drift: f64,
    pub finite: bool,
    pub stable: bool,
    pub witness: Option<BallRatio>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub experiment: &'static str,
    pub verdict: Verdict,
    pub metadata: Metadata,
    pub weight_class: ClassSummary,
    pub symbol: Option<String>,
    pub bmo_seminorm: Option<f64>,
    pub drift_tolerance: f64,
    pub sup_ratio: f64,
    pub functions: Vec<FunctionResult>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub curves: Vec<Curve>,
}

/// `(‖w‖_{L^q(B(x,r))}, ∫_{2r}^∞ L(t) F(t)/‖w‖_{L^q(B(x,t))} dt/t)` for every
/// ball, centers outer. `F(t) = ‖f‖_{L^{p,w^p}(B(x,t))}` is computed on the
/// grid and frozen once `B(x,t)` covers the support of `f`.
pub fn rhs_integrals(
    setup: &Setup,
    f: &SampledFunction64,
    family: &BallFamily64,
    log_factor: bool,
) -> anyhow::Result<Vec<Vec<(f64, f64)>>> {
    let grid = f.grid();
    let dim = grid.dim();
    let (p, q) = (setup.exps.p, setup.exps.q);
    let w = &setup.weight;
    let radii = family.radii();
    let support: Vec<Point<f64>> = (0..grid.len())
        .filter(|&i| f.value(i) != 0.0)
        .map(|i| grid.point(i))
        .collect();
    let mut out = Vec::with_capacity(family.centers().len());
    for x in family.centers() {
        let w_r = radii
            .iter()
            .map(|&r| full_weight_norm(w, q, dim, x, r))
            .collect::<morrey_core::Result<Vec<f64>>>()?;
        if support.is_empty() {
            out.push(w_r.into_iter().map(|v| (v, 0.0)).collect());
            continue;
        }
        let cover = support.iter().map(|y| distance_sq(x, y)).fold(0.0f64, f64::max).sqrt() + grid.spacing();
        let f_cover = weighted_lp_norm(f, w, p, p, &Ball64::at(*x, cover)?)?;
        let g = |t: f64| -> morrey_core::Result<f64> {
            let ft = if t >= cover {
                f_cover
            } else {
                weighted_lp_norm(f, w, p, p, &Ball64::at(*x, t)?)?
            };
            Ok(ft / full_weight_norm(w, q, dim, x, t)?)
        };
        let start = 2.0 * radii[0];
        let upper = outer_length(w, q, x, cover.max(2.0 * family.r_max()));
        let samples = LogSamples::new(g, start, upper, NODES_PER_DECADE)?;
        let mut row = Vec::with_capacity(radii.len());
        for (k, &r) in radii.iter().enumerate() {
            let factor = if log_factor {
                LogFactor::LogEPlus { r }
            } else {
                LogFactor::None
            };
            let a = 2.0 * r;
            let tail = samples.integral_from(a, g(a)?, factor);
            let value = tail.value.ok_or_else(|| {
                anyhow::anyhow!(
                    "right-hand side diverges at center {:?}, radius {r} (tail exponent {})",
                    coords(x, dim),
                    tail.tail_exponent
                )
            })?;
            row.push((w_r[k], value));
        }
        out.push(row);
    }
    Ok(out)
}

fn scan(
    out: &SampledFunction64,
    factor: f64,
    rhs: &[Vec<(f64, f64)>],
    zero_floor: &dyn Fn(&Ball64) -> anyhow::Result<f64>,
    setup: &Setup,
    family: &BallFamily64,
) -> anyhow::Result<Scan> {
    let dim = out.grid().dim();
    let q = setup.exps.q;
    let radii = family.radii();
    let mut by_radius: Vec<(f64, f64)> = radii.iter().map(|&r| (r, 0.0)).collect();
    let mut best: Option<BallRatio> = None;
    for (ci, x) in family.centers().iter().enumerate() {
        for (k, &r) in radii.iter().enumerate() {
            let ball = Ball64::at(*x, r)?;
            let lhs = weighted_lp_norm(out, &setup.weight, q, q, &ball)?;
            let (w_r, integral) = rhs[ci][k];
            let rhs_v = factor * w_r * integral;
            let floor = if rhs_v > 0.0 { 0.0 } else { zero_floor(&ball)? };
            let ratio = safe_ratio(lhs, rhs_v, floor);
            by_radius[k].1 = by_radius[k].1.max(ratio);
            if best.as_ref().is_none_or(|b| ratio > b.ratio) {
                best = Some(BallRatio {
                    ball: BallRef {
                        center: coords(x, dim),
                        radius: r,
                    },
                    lhs,
                    rhs: rhs_v,
                    ratio,
                });
            }
        }
    }
    Ok(Scan {
        sup_ratio: best.as_ref().map_or(0.0, |b| b.ratio),
        witness: best,
        by_radius,
    })
}

/// LHS/RHS of the `I_α` estimate over the family on `f`'s grid.
pub fn lemma22_scan(setup: &Setup, f: &SampledFunction64, family: &BallFamily64) -> anyhow::Result<Scan> {
    let grid = f.grid();
    let out = integral_field(f, setup.exps.alpha, grid)?;
    let rhs = rhs_integrals(setup, f, family, false)?;
    scan(&out, 1.0, &rhs, &|_| Ok(0.0), setup, family)
}

/// LHS/RHS of the `I_{α,b}` estimate. A commutator counts as zero on a ball
/// when its norm is below `zero_tol · ‖b‖_∞ · ‖I_α|f|‖` there.
pub fn lemma23_scan(
    setup: &Setup,
    b: &SampledFunction64,
    f: &SampledFunction64,
    family: &BallFamily64,
) -> anyhow::Result<(Scan, f64)> {
    let grid = f.grid();
    let params = OperatorParams64::new(setup.exps.alpha, grid);
    let out = commutator_integral(b, f, &params)?.into_field()?;
    let bmo = bmo_seminorm(b, family)?.seminorm;
    let rhs = rhs_integrals(setup, f, family, true)?;
    let b_sup = b.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let q = setup.exps.q;
    let tol = setup.config.tolerances.zero;
    let abs_out = integral_field(&f.abs(), setup.exps.alpha, grid)?;
    let floor = |ball: &Ball64| -> anyhow::Result<f64> {
        Ok(tol * b_sup * weighted_lp_norm(&abs_out, &setup.weight, q, q, ball)?)
    };
    Ok((scan(&out, bmo, &rhs, &floor, setup, family)?, bmo))
}

fn ratio_curve(name: &str, fname: &str, coarse: &Scan, fine: &Scan) -> Curve {
    let mut c = Curve::new(
        &format!("{name}-{}", sanitize(fname)),
        &["radius", "ratio_coarse", "ratio_fine"],
    );
    for (a, b) in coarse.by_radius.iter().zip(&fine.by_radius) {
        c.push(vec![a.0, a.1, b.1]);
    }
    c
}

/// File-name-safe form of a function spec.
pub fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn function_result(fname: String, coarse: &Scan, fine: Scan, tol: f64) -> FunctionResult {
    let drift = relative_drift(fine.sup_ratio, coarse.sup_ratio);
    let finite = fine.sup_ratio.is_finite() && coarse.sup_ratio.is_finite();
    FunctionResult {
        function: fname,
        sup_ratio: fine.sup_ratio,
        sup_ratio_coarse: coarse.sup_ratio,
        drift,
        finite,
        stable: drift < tol,
        witness: fine.witness,
    }
}

fn weight_class(setup: &Setup) -> anyhow::Result<ClassSummary> {
    let r = apq_characteristic(&setup.weight, &setup.exps, &setup.family, &setup.grid)?;
    Ok(ClassSummary::new(&r, setup.grid.dim()))
}

fn grids(setup: &Setup) -> (Grid64, Grid64) {
    (setup.grid.clone(), setup.grid.refined())
}

pub fn lemma22_verify(setup: &Setup) -> anyhow::Result<LemmaReport> {
    let tol = setup.config.tolerances.drift;
    let class = weight_class(setup)?;
    let (coarse_grid, fine_grid) = grids(setup);
    let mut functions = Vec::new();
    let mut curves = Vec::new();
    let mut notes = Vec::new();
    if class.in_class {
        for farg in &setup.config.roster {
            let coarse = lemma22_scan(setup, &farg.sample(&coarse_grid)?, &setup.family)?;
            let fine = lemma22_scan(setup, &farg.sample(&fine_grid)?, &setup.family)?;
            curves.push(ratio_curve("ratio", &farg.to_string(), &coarse, &fine));
            functions.push(function_result(farg.to_string(), &coarse, fine, tol));
        }
    } else {
        notes.push("weight is not in A_{p,q} on the scanned family".into());
    }
    Ok(finish(
        "lemma22", setup, class, None, None, tol, functions, notes, curves,
    ))
}

pub fn lemma23_verify(setup: &Setup) -> anyhow::Result<LemmaReport> {
    let tol = setup.config.tolerances.drift;
    let class = weight_class(setup)?;
    let (coarse_grid, fine_grid) = grids(setup);
    let symbol: &FunctionArg = &setup.config.symbol;
    let mut functions = Vec::new();
    let mut curves = Vec::new();
    let mut notes = Vec::new();
    let mut bmo = None;
    if class.in_class {
        let b_coarse = symbol.sample(&coarse_grid)?;
        let b_fine = symbol.sample(&fine_grid)?;
        for farg in &setup.config.roster {
            let (coarse, _) = lemma23_scan(setup, &b_coarse, &farg.sample(&coarse_grid)?, &setup.family)?;
            let (fine, seminorm) = lemma23_scan(setup, &b_fine, &farg.sample(&fine_grid)?, &setup.family)?;
            bmo = Some(seminorm);
            if seminorm == 0.0 && !fine.sup_ratio.is_finite() {
                notes.push(format!(
                    "symbol has zero oscillation but the commutator of `{farg}` does not vanish"
                ));
            }
            curves.push(ratio_curve("ratio", &farg.to_string(), &coarse, &fine));
            functions.push(function_result(farg.to_string(), &coarse, fine, tol));
        }
    } else {
        notes.push("weight is not in A_{p,q} on the scanned family".into());
    }
    Ok(finish(
        "lemma23",
        setup,
        class,
        Some(symbol.to_string()),
        bmo,
        tol,
        functions,
        notes,
        curves,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    experiment: &'static str,
    setup: &Setup,
    class: ClassSummary,
    symbol: Option<String>,
    bmo: Option<f64>,
    tol: f64,
    functions: Vec<FunctionResult>,
    notes: Vec<String>,
    curves: Vec<Curve>,
) -> LemmaReport {
    let verdict = if !class.in_class {
        Verdict::HypothesesNotSatisfied
    } else {
        Verdict::from_pass(functions.iter().all(|f| f.finite && f.stable))
    };
    let sup_ratio = functions.iter().map(|f| f.sup_ratio).fold(0.0, f64::max);
    LemmaReport {
        experiment,
        verdict,
        metadata: Metadata::new(setup),
        weight_class: class,
        symbol,
        bmo_seminorm: bmo,
        drift_tolerance: tol,
        sup_ratio,
        functions,
        notes,
        curves,
    }
}
