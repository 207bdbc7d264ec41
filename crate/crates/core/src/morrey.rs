//! Weighted Lebesgue norms on balls, generalized weighted Morrey norms with
//! their vanishing modulus, admissibility of envelopes, and the BMO seminorm.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::BallFamily;
use crate::grid::{Ball, Grid, Point, SampledFunction};
use crate::scalar::Real;
use crate::weights::{weighted_power_sum, WeightSpec};

/// Factor by which the modulus must drop across the last decade of radii
/// for the automatic vanishing surrogate.
pub const DECAY_FACTOR: f64 = 0.9;
/// Slack allowed when checking that the modulus is non-increasing as `r ↓`.
pub const MONOTONE_SLACK: f64 = 0.1;

/// Radial envelope `φ(x, r)`.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeSpec<T> {
    /// `φ(x, r) = r^λ`
    PowerRadial(T),
    /// `values[c][k] = φ(x_c, radii[k])` for the centers of a family,
    /// interpolated log-log between radii. Beyond the last radius the
    /// envelope continues as a power with `tail_exponent`, if declared.
    Tabulated {
        radii: Vec<T>,
        values: Vec<Vec<T>>,
        tail_exponent: Option<T>,
    },
}

impl<T: Real> EnvelopeSpec<T> {
    pub fn eval(&self, center: usize, r: T) -> Result<T> {
        match self {
            EnvelopeSpec::PowerRadial(l) => Ok(r.powf(*l)),
            EnvelopeSpec::Tabulated {
                radii,
                values,
                tail_exponent,
            } => {
                let row = values
                    .get(center)
                    .ok_or_else(|| Error::InvalidParameter(format!("no tabulated envelope for center {center}")))?;
                if radii.is_empty() || row.len() != radii.len() {
                    return Err(Error::InvalidParameter("envelope table is ragged".into()));
                }
                let last = radii.len() - 1;
                if r < radii[0] {
                    return Err(Error::Coverage(format!(
                        "radius {r} below the envelope table start {}",
                        radii[0]
                    )));
                }
                if r > radii[last] {
                    let s = tail_exponent.ok_or(Error::TailUndeclared("envelope"))?;
                    return Ok(row[last] * (r / radii[last]).powf(s));
                }
                let k = radii.partition_point(|&x| x <= r).min(last).max(1);
                let (r0, r1) = (radii[k - 1], radii[k]);
                let (v0, v1) = (row[k - 1], row[k]);
                let s = (r / r0).ln() / (r1 / r0).ln();
                Ok((v0.ln() + s * (v1.ln() - v0.ln())).exp())
            }
        }
    }

    /// `λ` for power envelopes.
    pub fn exponent(&self) -> Option<T> {
        match self {
            EnvelopeSpec::PowerRadial(l) => Some(*l),
            EnvelopeSpec::Tabulated { .. } => None,
        }
    }

    pub fn declares_tail(&self) -> bool {
        match self {
            EnvelopeSpec::PowerRadial(_) => true,
            EnvelopeSpec::Tabulated { tail_exponent, .. } => tail_exponent.is_some(),
        }
    }
}

/// `‖f‖_{L^{p, w^{wpow}}(B ∩ box)} = (∫ |f|^p w^{wpow})^{1/p}`.
pub fn weighted_lp_norm<T: Real>(
    f: &SampledFunction<T>,
    w: &WeightSpec<T>,
    wpow: T,
    p: T,
    ball: &Ball<T>,
) -> Result<T> {
    if p < T::one() {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    w.validate(f.grid())?;
    lp_norm_unchecked(f, w, wpow, p, ball)
}

fn lp_norm_unchecked<T: Real>(f: &SampledFunction<T>, w: &WeightSpec<T>, wpow: T, p: T, ball: &Ball<T>) -> Result<T> {
    let grid = f.grid();
    let unit_weight = matches!(w, WeightSpec::Constant(c) if *c == T::one());
    let s = grid
        .try_ball_sum(ball, |i| {
            let fv = f.value(i).abs().powf(p);
            if unit_weight {
                return Ok(fv);
            }
            let wv = w.pow_at(grid, i, wpow);
            let v = fv * wv;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Overflow {
                    what: "|f|^p w",
                    point: grid.point(i)[..grid.dim()].iter().map(|c| c.as_f64()).collect(),
                })
            }
        })?
        .value;
    Ok(s.powf(p.recip()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorreyReport<T> {
    pub quasinorm: T,
    pub witness_center: Point<T>,
    pub witness_radius: T,
    /// `(r, sup_x φ(x,r)^{-1/p} ‖f‖_{L^{p,w}(B(x,r))})` for every scanned radius.
    pub modulus_curve: Vec<(T, T)>,
}

/// Evaluates `value(center_index, ball)` over the family and returns the
/// per-radius maxima together with the overall maximum and its witness,
/// ties going to the lexicographically first center, then smallest radius.
fn scan_modulus<T, F>(family: &BallFamily<T>, value: F) -> Result<MorreyReport<T>>
where
    T: Real,
    F: Fn(usize, &Ball<T>) -> Result<T> + Sync,
{
    let balls = family.balls();
    let vals: Vec<Result<T>> = balls.par_iter().map(|(ci, b)| value(*ci, b)).collect();
    let radii = family.radii();
    let mut curve: Vec<(T, T)> = radii.iter().map(|&r| (r, T::zero())).collect();
    let mut best: Option<(T, Ball<T>)> = None;
    for (k, ((_, ball), v)) in balls.iter().zip(vals).enumerate() {
        let v = v?;
        let slot = &mut curve[k % radii.len()].1;
        *slot = slot.max(v);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, *ball));
        }
    }
    let (quasinorm, witness) = best.ok_or(Error::EmptyFamily)?;
    Ok(MorreyReport {
        quasinorm,
        witness_center: witness.center,
        witness_radius: witness.radius,
        modulus_curve: curve,
    })
}

/// `sup_{x ∈ Π, r} φ(x,r)^{-1/p} ‖f‖_{L^{p,w^{wpow}}(B̃(x,r))}` over the
/// family, with radii below `2h` dropped.
pub fn morrey_quasinorm<T: Real>(
    f: &SampledFunction<T>,
    phi: &EnvelopeSpec<T>,
    p: T,
    w: &WeightSpec<T>,
    wpow: T,
    family: &BallFamily<T>,
) -> Result<MorreyReport<T>> {
    if p < T::one() {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let grid = f.grid();
    w.validate(grid)?;
    let fam = family.with_floor(T::of(2.0) * grid.spacing())?;
    let inv_p = p.recip();
    scan_modulus(&fam, |ci, ball| {
        let phi_v = phi.eval(ci, ball.radius)?;
        if !(phi_v > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "envelope is not positive at radius {}",
                ball.radius
            )));
        }
        Ok(lp_norm_unchecked(f, w, wpow, p, ball)? / phi_v.powf(inv_p))
    })
}

fn decay_check<T: Real>(curve: &[(T, T)], threshold: T, r_knee: T) -> Result<bool> {
    let below: Vec<(T, T)> = curve.iter().copied().filter(|(r, _)| *r <= r_knee).collect();
    let (r_min, v_min) = match below.first() {
        Some(&first) => first,
        None => return Err(Error::Coverage("no radii below the knee".into())),
    };
    let r_top = below.last().unwrap().0;
    if r_top < T::of(10.0) * r_min * (T::one() - T::of(1e-9)) {
        return Err(Error::Coverage(format!(
            "radii below the knee span [{r_min}, {r_top}], less than a decade"
        )));
    }
    if !(v_min < threshold || v_min == T::zero()) {
        return Ok(false);
    }
    let decade_end = T::of(10.0) * r_min * (T::one() + T::of(1e-9));
    let slack = T::one() + T::of(MONOTONE_SLACK);
    let last_decade: Vec<(T, T)> = below.into_iter().filter(|(r, _)| *r <= decade_end).collect();
    Ok(last_decade.windows(2).all(|w| w[0].1 <= slack * w[1].1))
}

/// Numeric surrogate of `lim_{r→0} sup_x φ^{-1/p} ‖f‖ = 0`: the modulus at
/// the smallest radius is below `threshold` and, over the decade of radii
/// nearest zero, does not increase as `r` decreases (10% slack). The curve
/// must cover at least a decade below `r_knee`.
pub fn vanishing_check<T: Real>(report: &MorreyReport<T>, threshold: T, r_knee: T) -> Result<bool> {
    decay_check(&report.modulus_curve, threshold, r_knee)
}

/// Knee one decade above the smallest radius and threshold
/// `DECAY_FACTOR · v(knee)`.
pub fn auto_knee<T: Real>(curve: &[(T, T)]) -> Result<(T, T)> {
    let r_min = curve
        .first()
        .ok_or_else(|| Error::Coverage("empty modulus curve".into()))?
        .0;
    let target = T::of(10.0) * r_min * (T::one() - T::of(1e-9));
    let &(r_knee, v_knee) = curve
        .iter()
        .find(|(r, _)| *r >= target)
        .ok_or_else(|| Error::Coverage("modulus curve spans less than a decade".into()))?;
    Ok((T::of(DECAY_FACTOR) * v_knee, r_knee))
}

/// [`vanishing_check`] with the threshold and knee from [`auto_knee`].
pub fn vanishing_check_auto<T: Real>(report: &MorreyReport<T>) -> Result<bool> {
    let (threshold, knee) = auto_knee(&report.modulus_curve)?;
    vanishing_check(report, threshold, knee)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeClass<T> {
    /// `sup_x ‖w^{wpow}‖_{L¹(B̃(x,r))} / φ(x,r)` tends to zero.
    pub cond_23: bool,
    /// `inf_{r>1} sup_x φ(x,r) > 0`.
    pub cond_24: bool,
    pub curve_23: Vec<(T, T)>,
    pub inf_24: T,
}

/// Admissibility of `φ` for the weight `w^{wpow}`.
pub fn envelope_class_check<T: Real>(
    phi: &EnvelopeSpec<T>,
    w: &WeightSpec<T>,
    wpow: T,
    family: &BallFamily<T>,
    grid: &Grid<T>,
) -> Result<EnvelopeClass<T>> {
    w.validate(grid)?;
    let fam = family.with_floor(T::of(2.0) * grid.spacing())?;
    let report = scan_modulus(&fam, |ci, ball| {
        let mass = weighted_power_sum(w, wpow, ball, grid, "w")?;
        Ok(mass / phi.eval(ci, ball.radius)?)
    })?;
    let (threshold, knee) = auto_knee(&report.modulus_curve)?;
    let cond_23 = decay_check(&report.modulus_curve, threshold, knee)?;

    let big: Vec<T> = family.radii().into_iter().filter(|&r| r > T::one()).collect();
    if big.is_empty() {
        return Err(Error::Coverage("family has no radii above 1".into()));
    }
    let mut inf_24 = T::infinity();
    for r in big {
        let mut sup = T::neg_infinity();
        for ci in 0..family.centers().len() {
            sup = sup.max(phi.eval(ci, r)?);
        }
        inf_24 = inf_24.min(sup);
    }
    Ok(EnvelopeClass {
        cond_23,
        cond_24: inf_24 > T::zero(),
        curve_23: report.modulus_curve,
        inf_24,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation<T> {
    pub seminorm: T,
    pub witness: Ball<T>,
}

/// Mean oscillation over one ball; the mean is taken relative to the first
/// cell so that a constant field has exactly zero oscillation.
pub fn mean_oscillation<T: Real>(b: &SampledFunction<T>, ball: &Ball<T>) -> Option<T> {
    let idx = b.grid().ball_indices(ball);
    let &first = idx.first()?;
    let pivot = b.value(first);
    let k = T::of_usize(idx.len());
    let mut shift = T::zero();
    for &i in &idx {
        shift += b.value(i) - pivot;
    }
    let mean = pivot + shift / k;
    let mut dev = T::zero();
    for &i in &idx {
        dev += (b.value(i) - mean).abs();
    }
    Some(dev / k)
}

/// `‖b‖_* = max_B |B̃|^{-1} ∫_{B̃} |b - b_B|` over the family.
pub fn bmo_seminorm<T: Real>(b: &SampledFunction<T>, family: &BallFamily<T>) -> Result<Oscillation<T>> {
    let balls = family.balls();
    let vals: Vec<Option<T>> = balls.par_iter().map(|(_, ball)| mean_oscillation(b, ball)).collect();
    let mut best: Option<(T, Ball<T>)> = None;
    for ((_, ball), v) in balls.iter().zip(vals) {
        if let Some(v) = v {
            if best.as_ref().is_none_or(|(x, _)| v > *x) {
                best = Some((v, *ball));
            }
        }
    }
    best.map(|(seminorm, witness)| Oscillation { seminorm, witness })
        .ok_or(Error::EmptyFamily)
}
