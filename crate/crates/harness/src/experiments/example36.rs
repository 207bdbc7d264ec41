//! Power weight `w = |y|^{β/q}`: two-regime ball norms, the ball condition in
//! both regimes, the `c_δ ≈ δ^{λ/p-(n+β)/q}` scaling and the far-regime
//! domination
//! `(r^{λ/p-n/q} + |x|^{λ/p-n/q}) / |x|^{β/q} ≲ r^{λ/p-n/q} / (|x|+r)^{β/q}` for `|x| ≥ 3r`.

use morrey_core::grid::norm;
use morrey_core::{
    closed_form_power_norm, condition_31, condition_32, weight_lq_norm, Ball64, ConditionOptions, Regime, WeightSpec64,
};
use serde::Serialize;

use super::{coords, BallRef, ConditionSummary};
use crate::config::Setup;
use crate::report::{Curve, Metadata, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBand {
    pub band: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lowest: BallRef,
    pub highest: BallRef,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OriginLimit {
    pub radius: f64,
    pub ratio: f64,
    pub target: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeBounds {
    pub condition: ConditionSummary,
    pub near_max: Option<f64>,
    pub near_balls: usize,
    pub far_max: Option<f64>,
    pub far_balls: usize,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub deltas: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub fitted: Option<f64>,
    pub expected: f64,
    pub tolerance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarDomination {
    pub exponent: f64,
    pub balls: usize,
    pub constant: Option<f64>,
    pub witness: Option<BallRef>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example36Report {
    pub experiment: &'static str,
    pub verdict: Verdict,
    pub metadata: Metadata,
    pub beta: Option<f64>,
    pub beta_upper: f64,
    pub norm_band: Option<NormBand>,
    pub origin_limit: Option<OriginLimit>,
    pub regimes: Option<RegimeBounds>,
    pub c_delta: Option<ExponentFit>,
    pub far_domination: Option<FarDomination>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub curves: Vec<Curve>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let den = n * sxx - sx * sx;
    if den == 0.0 {
        None
    } else {
        Some((n * sxy - sx * sy) / den)
    }
}

/// Max over `|x| ≥ 3r`, `x ≠ 0` of
/// `(r^e + |x|^e) |x|^{-β/q} / (r^e (|x|+r)^{-β/q})` with `e = λ/p - n/q`.
pub fn far_domination_constant(
    balls: &[(f64, f64)],
    lambda: f64,
    p: f64,
    q: f64,
    beta: f64,
    dim: usize,
) -> (Option<f64>, Option<(f64, f64)>) {
    let e = lambda / p - dim as f64 / q;
    let mut best: Option<(f64, (f64, f64))> = None;
    for &(x, r) in balls {
        if x == 0.0 || x < 3.0 * r {
            continue;
        }
        let lhs = (r.powf(e) + x.powf(e)) / x.powf(beta / q);
        let rhs = r.powf(e) / (x + r).powf(beta / q);
        let c = lhs / rhs;
        if best.is_none_or(|b| c > b.0) {
            best = Some((c, (x, r)));
        }
    }
    match best {
        Some((c, w)) => (Some(c), Some(w)),
        None => (None, None),
    }
}

pub fn example36_verify(setup: &Setup) -> anyhow::Result<Example36Report> {
    let dim = setup.grid.dim();
    let n = dim as f64;
    let (p, q) = (setup.exps.p, setup.exps.q);
    let tol = &setup.config.tolerances;
    let beta_upper = n * q / setup.exps.p_conj;
    let metadata = Metadata::new(setup);
    let beta = match setup.weight {
        WeightSpec64::Power(e) => Some(e * q),
        _ => None,
    };
    let mut report = Example36Report {
        experiment: "example36",
        verdict: Verdict::HypothesesNotSatisfied,
        metadata,
        beta,
        beta_upper,
        norm_band: None,
        origin_limit: None,
        regimes: None,
        c_delta: None,
        far_domination: None,
        notes: Vec::new(),
        curves: Vec::new(),
    };
    let beta = match beta {
        Some(b) if (0.0..beta_upper).contains(&b) => b,
        Some(b) => {
            report
                .notes
                .push(format!("beta = {b} lies outside [0, nq/p') = [0, {beta_upper})"));
            return Ok(report);
        }
        None => {
            report.notes.push("weight is not a power of |y|".into());
            return Ok(report);
        }
    };
    let lambda = setup.config.phi.exponent;
    let grid = &setup.grid;
    let family = &setup.family;

    // (a) numeric ball norms against the two-regime closed form
    let mut band_curve = Curve::new("norm-ratio", &["center_norm", "radius", "ratio", "far"]);
    let mut lo: Option<(f64, BallRef)> = None;
    let mut hi: Option<(f64, BallRef)> = None;
    let mut origin: Vec<(f64, f64)> = Vec::new();
    for (_, ball) in family.balls() {
        let numeric = weight_lq_norm(&setup.weight, q, &ball, grid)?;
        let (closed, regime) = closed_form_power_norm(beta, q, dim, &ball)?;
        let ratio = numeric / closed;
        let x = norm(&ball.center);
        band_curve.push(vec![x, ball.radius, ratio, (regime == Regime::Far) as u8 as f64]);
        let here = BallRef {
            center: coords(&ball.center, dim),
            radius: ball.radius,
        };
        if lo.as_ref().is_none_or(|l| ratio < l.0) {
            lo = Some((ratio, here.clone()));
        }
        if hi.as_ref().is_none_or(|h| ratio > h.0) {
            hi = Some((ratio, here));
        }
        if x == 0.0 && ball.radius <= grid.half_width() {
            origin.push((ball.radius, ratio));
        }
    }
    let (lo, hi) = (lo.expect("family is non-empty"), hi.expect("family is non-empty"));
    let band = NormBand {
        band: tol.norm_band,
        min_ratio: lo.0,
        max_ratio: hi.0,
        within: lo.0 >= 1.0 / tol.norm_band && hi.0 <= tol.norm_band,
        lowest: lo.1,
        highest: hi.1,
    };

    // Origin balls fully inside the box; the largest one has the most cells.
    let target = (2.0 / (n + beta)).powf(1.0 / q);
    let origin_limit = if dim == 1 {
        let ball = match origin.last() {
            Some(&(r, _)) => Ball64::new(&[0.0], r)?,
            None => Ball64::new(&[0.0], grid.half_width())?,
        };
        let ratio = weight_lq_norm(&setup.weight, q, &ball, grid)? / closed_form_power_norm(beta, q, dim, &ball)?.0;
        let rel = (ratio - target).abs() / target;
        Some(OriginLimit {
            radius: ball.radius,
            ratio,
            target,
            relative_error: rel,
            tolerance: tol.origin_limit,
            ok: rel < tol.origin_limit,
        })
    } else {
        report.notes.push("the origin limit is only tabulated for n = 1".into());
        None
    };

    // (b) ball condition split by regime
    let opts = ConditionOptions::default();
    let cond = condition_32(&setup.phi, p, &setup.psi, q, &setup.weight, family, &opts)?;
    let (mut near, mut far) = (None::<f64>, None::<f64>);
    let (mut near_n, mut far_n) = (0usize, 0usize);
    for s in &cond.samples {
        let x = norm(&s.center);
        let slot = if x < 3.0 * s.radius {
            near_n += 1;
            &mut near
        } else {
            far_n += 1;
            &mut far
        };
        let v = s.ratio.unwrap_or(f64::INFINITY);
        *slot = Some(slot.map_or(v, |m: f64| m.max(v)));
    }
    let regimes = RegimeBounds {
        condition: ConditionSummary::new(&cond, dim),
        bounded: cond.holds && near.is_some_and(f64::is_finite) && far.is_some_and(f64::is_finite),
        near_max: near,
        near_balls: near_n,
        far_max: far,
        far_balls: far_n,
    };

    // (c) scaling of c_δ
    let deltas = setup.config.deltas.clone();
    let mut values = Vec::with_capacity(deltas.len());
    let mut c_curve = Curve::new("c-delta", &["delta", "c_delta"]);
    for &d in &deltas {
        let r = condition_31(&setup.phi, p, &setup.weight, q, d, family.centers(), dim, &opts)?;
        let v = r.value();
        c_curve.push(vec![d, v.unwrap_or(f64::INFINITY)]);
        values.push(v);
    }
    let expected = lambda / p - (n + beta) / q;
    let pts: Option<Vec<(f64, f64)>> = deltas.iter().zip(&values).map(|(&d, v)| v.map(|v| (d, v))).collect();
    let fitted = pts.as_deref().and_then(loglog_slope);
    let c_delta = ExponentFit {
        ok: fitted.is_some_and(|s| (s - expected).abs() <= tol.exponent),
        deltas,
        values,
        fitted,
        expected,
        tolerance: tol.exponent,
    };

    // (d) far-regime domination
    let pairs: Vec<(f64, f64)> = family
        .balls()
        .iter()
        .map(|(_, b)| (norm(&b.center), b.radius))
        .collect();
    let (constant, at) = far_domination_constant(&pairs, lambda, p, q, beta, dim);
    let far_count = pairs.iter().filter(|&&(x, r)| x != 0.0 && x >= 3.0 * r).count();
    let far_domination = FarDomination {
        exponent: lambda / p - n / q,
        balls: far_count,
        ok: constant.is_some_and(f64::is_finite),
        constant,
        witness: at.map(|(x, r)| BallRef {
            center: vec![x],
            radius: r,
        }),
    };

    let pass =
        band.within && origin_limit.as_ref().is_none_or(|o| o.ok) && regimes.bounded && c_delta.ok && far_domination.ok;
    report.verdict = Verdict::from_pass(pass);
    report.norm_band = Some(band);
    report.origin_limit = origin_limit;
    report.regimes = Some(regimes);
    report.c_delta = Some(c_delta);
    report.far_domination = Some(far_domination);
    report.curves = vec![band_curve, c_curve];
    Ok(report)
}
