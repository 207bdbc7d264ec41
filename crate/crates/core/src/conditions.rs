//! Zygmund-type integral conditions in the radius variable coupling the
//! envelopes `φ`, `ψ` with ball norms of the weight.
//!
//! Ball norms here are taken over full balls in `R^n` (no box truncation),
//! so `t` may run past the computational box. Tabulated weights have no
//! such extension and are refused.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::BallFamily;
use crate::grid::{norm, point_to_vec, Ball, Point};
use crate::morrey::EnvelopeSpec;
use crate::quad::{log_tail_integral, LogFactor, LogSamples, DIVERGENCE_TOL};
use crate::scalar::Real;
use crate::weights::{exact_weight_norm, WeightSpec, CLASS_DRIFT_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionOptions<T> {
    pub nodes_per_decade: usize,
    /// Numeric integration runs to `tail_factor · max(r, |x|, ℓ)` with `ℓ`
    /// the length scale of the weight, if any.
    pub tail_factor: T,
    /// Use exact power-law integrals when the integrand is a pure power.
    pub closed_form: bool,
    pub drift_tol: T,
    /// Radii `δ / inner_ratio^j`, `j = 1..=inner_rungs`, for the outer sup in
    /// the logarithmic condition on `[δ, ∞)`.
    pub inner_rungs: usize,
    pub inner_ratio: T,
}

impl<T: Real> Default for ConditionOptions<T> {
    fn default() -> Self {
        Self {
            nodes_per_decade: 64,
            tail_factor: T::of(1e3),
            closed_form: true,
            drift_tol: T::of(CLASS_DRIFT_TOL),
            inner_rungs: 8,
            inner_ratio: T::of(2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMethod {
    /// Exact power or power-log integral over the whole range.
    Analytic,
    /// Numeric integral up to a cutoff followed by a fitted power tail.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionSample<T> {
    pub center: Point<T>,
    pub radius: T,
    /// `None` when the integral diverges.
    pub lhs: Option<T>,
    pub rhs: T,
    pub ratio: Option<T>,
    pub tail_exponent: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    pub divergent: bool,
    /// Value of the integral on `[δ, ∞)` (with its outer sup for the log form).
    pub c_delta: Option<T>,
    /// Largest ratio `LHS / RHS` over the scanned balls.
    pub c0_hat: Option<T>,
    pub witness: Option<(Point<T>, T)>,
    pub tail_method: TailMethod,
    /// Tail exponent of the integrand in `t`; the largest over the scan for
    /// ball-wise conditions.
    pub tail_exponent: T,
    /// Relative change of `c0_hat` when the family is doubled.
    pub drift: Option<T>,
    /// `c0_hat` on the family and on two downward extensions of it by the
    /// family's own rung count each.
    pub history: Vec<T>,
    /// Successive increments of `history` do not contract.
    pub growth_detected: bool,
    pub holds: bool,
    /// `(r, integral)` for each inner radius of the logarithmic condition.
    pub inner_curve: Vec<(T, T)>,
    pub samples: Vec<ConditionSample<T>>,
}

impl<T: Real> ConditionReport<T> {
    /// `c_delta` or `c0_hat`, whichever the condition defines.
    pub fn value(&self) -> Option<T> {
        self.c_delta.or(self.c0_hat)
    }
}

fn check_exponents<T: Real>(p: T, q: T) -> Result<()> {
    if !(p > T::zero()) || q < T::one() {
        return Err(Error::InvalidParameter(format!(
            "need p > 0 and q >= 1, got p={p}, q={q}"
        )));
    }
    Ok(())
}

fn full_ball_norm<T: Real>(w: &WeightSpec<T>, q: T, dim: usize, ball: &Ball<T>) -> Result<T> {
    let v = exact_weight_norm(w, q, dim, ball).ok_or(Error::TailUndeclared("weight"))?;
    if !v.is_finite() {
        return Err(Error::Overflow {
            what: "‖w‖_q",
            point: point_to_vec(&ball.center, dim),
        });
    }
    if !(v > T::zero()) {
        return Err(Error::ZeroNorm {
            center: point_to_vec(&ball.center, dim),
            radius: ball.radius.as_f64(),
        });
    }
    Ok(v)
}

/// Exponent `m` with `‖w‖_{L^q(B(x,t))} ∝ t^{m/q}` exactly, when it exists.
fn norm_exponent<T: Real>(w: &WeightSpec<T>, q: T, dim: usize, center: &Point<T>) -> Option<T> {
    let n = T::of_usize(dim);
    match w {
        WeightSpec::Constant(_) => Some(n),
        WeightSpec::Power(b) if norm(center) == T::zero() => Some(n + *b * q),
        _ => None,
    }
}

/// Exponent `a` such that `φ^{1/p}(x,t)/‖w‖_{L^q(B(x,t))} = A t^a` exactly,
/// if the pair admits one at every center.
fn pure_power<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    w: &WeightSpec<T>,
    q: T,
    dim: usize,
    centers: &[Point<T>],
) -> Option<T> {
    let lambda = phi.exponent()?;
    let mut a = None;
    for c in centers {
        let m = norm_exponent(w, q, dim, c)?;
        a = Some(lambda / p - m / q);
    }
    a
}

/// `sup_{x ∈ centers} φ^{1/p}(x,t) / ‖w‖_{L^q(B(x,t))}`.
pub fn supremizing_integrand<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    w: &WeightSpec<T>,
    q: T,
    t: T,
    centers: &[Point<T>],
    dim: usize,
) -> Result<T> {
    check_exponents(p, q)?;
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if centers.is_empty() {
        return Err(Error::InvalidParameter("center set is empty".into()));
    }
    let mut best = T::neg_infinity();
    for (ci, c) in centers.iter().enumerate() {
        best = best.max(pointwise_integrand(phi, p, w, q, dim, ci, c, t)?);
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn pointwise_integrand<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    w: &WeightSpec<T>,
    q: T,
    dim: usize,
    ci: usize,
    center: &Point<T>,
    t: T,
) -> Result<T> {
    let ball = Ball::at(*center, t)?;
    let phi_v = phi.eval(ci, t)?;
    Ok(phi_v.powf(p.recip()) / full_ball_norm(w, q, dim, &ball)?)
}

fn validate_weight<T: Real>(w: &WeightSpec<T>, q: T, dim: usize) -> Result<()> {
    if w.is_tabulated() {
        return Err(Error::TailUndeclared("weight"));
    }
    if !w.locally_integrable(q, dim) {
        return Err(Error::InvalidParameter(format!(
            "w^{q} is not locally integrable in dimension {dim}"
        )));
    }
    match w {
        WeightSpec::Constant(c) if !(*c > T::zero()) => Err(Error::InvalidParameter(format!(
            "constant weight must be positive, got {c}"
        ))),
        WeightSpec::Pinched { lower, upper, scale }
            if !(*lower > T::zero() && lower <= upper && *scale > T::zero()) =>
        {
            Err(Error::InvalidParameter("invalid pinched weight".into()))
        }
        _ => Ok(()),
    }
}

/// `∫_a^∞ factor(t) g(t) dt/t` where `g(t) = A t^s` exactly.
fn power_integral<T: Real>(amp: T, s: T, a: T, factor: LogFactor<T>) -> Option<T> {
    if !(s < -T::of(DIVERGENCE_TOL)) {
        return None;
    }
    let base = amp * a.powf(s);
    match factor {
        LogFactor::None => Some(base / (-s)),
        LogFactor::EPlusLog { .. } => Some(base * (factor.at(a) / (-s) + T::one() / (s * s))),
        LogFactor::LogEPlus { .. } => None,
    }
}

struct Integral<T> {
    value: Option<T>,
    exponent: T,
    method: TailMethod,
}

#[allow(clippy::too_many_arguments)]
fn integrate<T: Real, G: Fn(T) -> Result<T>>(
    g: G,
    pure: Option<T>,
    lower: T,
    reach: T,
    factor: LogFactor<T>,
    opts: &ConditionOptions<T>,
) -> Result<Integral<T>> {
    if let (Some(s), true) = (pure, opts.closed_form) {
        if !matches!(factor, LogFactor::LogEPlus { .. }) || !(s < -T::of(DIVERGENCE_TOL)) {
            let amp = g(T::one())?;
            return Ok(Integral {
                value: power_integral(amp, s, lower, factor),
                exponent: s,
                method: TailMethod::Analytic,
            });
        }
    }
    let upper = opts.tail_factor * reach.max(lower);
    let res = log_tail_integral(g, lower, upper, opts.nodes_per_decade, factor)?;
    Ok(Integral {
        value: res.value,
        exponent: res.tail_exponent,
        method: TailMethod::Truncated,
    })
}

fn max_center_norm<T: Real>(centers: &[Point<T>]) -> T {
    centers.iter().map(norm).fold(T::zero(), |a, b| a.max(b))
}

#[allow(clippy::too_many_arguments)]
fn line_condition<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    w: &WeightSpec<T>,
    q: T,
    delta: T,
    centers: &[Point<T>],
    dim: usize,
    logarithmic: bool,
    opts: &ConditionOptions<T>,
) -> Result<ConditionReport<T>> {
    check_exponents(p, q)?;
    validate_weight(w, q, dim)?;
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("δ must be positive, got {delta}")));
    }
    if centers.is_empty() {
        return Err(Error::InvalidParameter("center set is empty".into()));
    }
    if !phi.declares_tail() {
        return Err(Error::TailUndeclared("envelope"));
    }
    let g = |t: T| supremizing_integrand(phi, p, w, q, t, centers, dim);
    let pure = pure_power(phi, p, w, q, dim, centers);
    let reach = max_center_norm(centers).max(w.length_scale(q).unwrap_or(T::zero()));

    let radii: Vec<Option<T>> = if logarithmic {
        (1..=opts.inner_rungs.max(1))
            .map(|j| Some(delta / opts.inner_ratio.powi(j as i32)))
            .collect()
    } else {
        vec![None]
    };
    let mut best: Option<(T, T)> = None;
    let mut inner_curve = Vec::new();
    let mut exponent = T::neg_infinity();
    let mut method = TailMethod::Analytic;
    for r in radii {
        let factor = match r {
            Some(r) => LogFactor::EPlusLog { r },
            None => LogFactor::None,
        };
        let res = integrate(g, pure, delta, reach, factor, opts)?;
        exponent = exponent.max(res.exponent);
        method = res.method;
        let value = match res.value {
            Some(v) => v,
            None => {
                return Ok(ConditionReport {
                    divergent: true,
                    c_delta: None,
                    c0_hat: None,
                    witness: r.map(|r| ([T::zero(); 3], r)),
                    tail_method: method,
                    tail_exponent: exponent,
                    drift: None,
                    history: Vec::new(),
                    growth_detected: false,
                    holds: false,
                    inner_curve,
                    samples: Vec::new(),
                })
            }
        };
        if let Some(r) = r {
            inner_curve.push((r, value));
        }
        if best.is_none_or(|(v, _)| value > v) {
            best = Some((value, r.unwrap_or(delta)));
        }
    }
    let (c_delta, r_star) = best.expect("at least one radius");
    Ok(ConditionReport {
        divergent: false,
        c_delta: Some(c_delta),
        c0_hat: None,
        witness: Some(([T::zero(); 3], r_star)),
        tail_method: method,
        tail_exponent: exponent,
        drift: None,
        history: Vec::new(),
        growth_detected: false,
        holds: c_delta.is_finite(),
        inner_curve,
        samples: Vec::new(),
    })
}

/// `c_δ = ∫_δ^∞ sup_x φ^{1/p}(x,t) / ‖w‖_{L^q(B(x,t))} dt/t`.
#[allow(clippy::too_many_arguments)]
pub fn condition_31<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    w: &WeightSpec<T>,
    q: T,
    delta: T,
    centers: &[Point<T>],
    dim: usize,
    opts: &ConditionOptions<T>,
) -> Result<ConditionReport<T>> {
    line_condition(phi, p, w, q, delta, centers, dim, false, opts)
}

/// `c_δ = sup_{0<r<δ} ∫_δ^∞ (e + ln(t/r)) sup_x φ^{1/p}(x,t) / ‖w‖_{L^q(B(x,t))} dt/t`,
/// with the outer sup over the finite ladder `δ / inner_ratio^j`.
#[allow(clippy::too_many_arguments)]
pub fn condition_34<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    w: &WeightSpec<T>,
    q: T,
    delta: T,
    centers: &[Point<T>],
    dim: usize,
    opts: &ConditionOptions<T>,
) -> Result<ConditionReport<T>> {
    line_condition(phi, p, w, q, delta, centers, dim, true, opts)
}

type CenterSamples<T> = Vec<(ConditionSample<T>, TailMethod)>;

/// Samples at every radius of one center. Numeric integrals share one set
/// of log-spaced samples of the integrand per center.
#[allow(clippy::too_many_arguments)]
fn center_samples<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    psi: &EnvelopeSpec<T>,
    q: T,
    w: &WeightSpec<T>,
    dim: usize,
    ci: usize,
    c: Point<T>,
    radii: &[T],
    logarithmic: bool,
    opts: &ConditionOptions<T>,
) -> Result<CenterSamples<T>> {
    let g = |t: T| pointwise_integrand(phi, p, w, q, dim, ci, &c, t);
    let pure = pure_power(phi, p, w, q, dim, std::slice::from_ref(&c));
    let factor_at = |r: T| {
        if logarithmic {
            LogFactor::LogEPlus { r }
        } else {
            LogFactor::None
        }
    };
    let analytic = match (pure, opts.closed_form) {
        (Some(s), true) => !logarithmic || !(s < -T::of(DIVERGENCE_TOL)),
        _ => false,
    };
    let samples = if analytic {
        None
    } else {
        let reach = norm(&c).max(w.length_scale(q).unwrap_or(T::zero()));
        let r_max = radii.iter().fold(T::zero(), |a, &b| a.max(b));
        Some(LogSamples::new(
            g,
            radii[0],
            opts.tail_factor * r_max.max(reach),
            opts.nodes_per_decade,
        )?)
    };
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let (value, exponent, method) = match &samples {
            None => {
                let res = integrate(g, pure, r, T::zero(), factor_at(r), opts)?;
                (res.value, res.exponent, res.method)
            }
            Some(s) => {
                let res = s.integral_from(r, g(r)?, factor_at(r));
                (res.value, res.tail_exponent, TailMethod::Truncated)
            }
        };
        let psi_v = psi.eval(ci, r)?;
        if !(psi_v > T::zero()) {
            return Err(Error::InvalidParameter(format!("ψ is not positive at radius {r}")));
        }
        let rhs = psi_v.powf(q.recip()) / full_ball_norm(w, q, dim, &Ball::at(c, r)?)?;
        out.push((
            ConditionSample {
                center: c,
                radius: r,
                lhs: value,
                rhs,
                ratio: value.map(|v| v / rhs),
                tail_exponent: exponent,
            },
            method,
        ));
    }
    Ok(out)
}

struct Scan<T> {
    samples: Vec<ConditionSample<T>>,
    method: TailMethod,
    worst: Option<usize>,
    divergent: Option<usize>,
}

#[allow(clippy::too_many_arguments)]
fn scan<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    psi: &EnvelopeSpec<T>,
    q: T,
    w: &WeightSpec<T>,
    family: &BallFamily<T>,
    logarithmic: bool,
    opts: &ConditionOptions<T>,
) -> Result<Scan<T>> {
    let dim = family.dim();
    let radii = family.radii();
    let out: Vec<Result<CenterSamples<T>>> = family
        .centers()
        .par_iter()
        .enumerate()
        .map(|(ci, c)| center_samples(phi, p, psi, q, w, dim, ci, *c, &radii, logarithmic, opts))
        .collect();
    let mut samples = Vec::with_capacity(family.len());
    let mut method = TailMethod::Analytic;
    for o in out {
        for (s, m) in o? {
            if m == TailMethod::Truncated {
                method = m;
            }
            samples.push(s);
        }
    }
    let divergent = samples.iter().position(|s| s.ratio.is_none());
    let mut worst: Option<usize> = None;
    for (k, s) in samples.iter().enumerate() {
        if let Some(v) = s.ratio {
            if worst.is_none_or(|j| v > samples[j].ratio.unwrap()) {
                worst = Some(k);
            }
        }
    }
    Ok(Scan {
        samples,
        method,
        worst,
        divergent,
    })
}

#[allow(clippy::too_many_arguments)]
fn ball_condition<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    psi: &EnvelopeSpec<T>,
    q: T,
    w: &WeightSpec<T>,
    family: &BallFamily<T>,
    logarithmic: bool,
    opts: &ConditionOptions<T>,
) -> Result<ConditionReport<T>> {
    check_exponents(p, q)?;
    validate_weight(w, q, family.dim())?;
    if !phi.declares_tail() {
        return Err(Error::TailUndeclared("envelope"));
    }
    let base = scan(phi, p, psi, q, w, family, logarithmic, opts)?;
    let tail_exponent = base
        .samples
        .iter()
        .map(|s| s.tail_exponent)
        .fold(T::neg_infinity(), |a, b| a.max(b));
    if let Some(k) = base.divergent {
        let s = base.samples[k];
        return Ok(ConditionReport {
            divergent: true,
            c_delta: None,
            c0_hat: None,
            witness: Some((s.center, s.radius)),
            tail_method: base.method,
            tail_exponent,
            drift: None,
            history: Vec::new(),
            growth_detected: false,
            holds: false,
            inner_curve: Vec::new(),
            samples: base.samples,
        });
    }
    let k = base.worst.ok_or(Error::EmptyFamily)?;
    let c0 = base.samples[k].ratio.unwrap();
    let step = family.rungs() + 1;
    let mut history = vec![c0];
    for ext in [family.extended_down(step), family.extended_down(2 * step)] {
        let s = scan(phi, p, psi, q, w, &ext, logarithmic, opts)?;
        match (s.divergent, s.worst) {
            (None, Some(j)) => history.push(s.samples[j].ratio.unwrap()),
            _ => {
                history.push(T::infinity());
                break;
            }
        }
    }
    let c1 = history[1];
    let drift = (c1 - c0).abs() / c0.abs().max(T::min_positive_value());
    let growth_detected = match history[..] {
        [a, b, c] if c.is_finite() => {
            let (d1, d2) = (b - a, c - b);
            d2 > T::of(0.01) * c && d1 > T::zero() && d2 >= T::of(0.9) * d1
        }
        _ => true,
    };
    Ok(ConditionReport {
        divergent: false,
        c_delta: None,
        c0_hat: Some(c0),
        witness: Some((base.samples[k].center, base.samples[k].radius)),
        tail_method: base.method,
        tail_exponent,
        drift: Some(drift),
        history,
        growth_detected,
        holds: c0.is_finite() && !growth_detected,
        inner_curve: Vec::new(),
        samples: base.samples,
    })
}

/// `ĉ₀ = max_{(x,r)} ∫_r^∞ φ^{1/p}(x,t)/‖w‖_{L^q(B(x,t))} dt/t · ‖w‖_{L^q(B(x,r))} / ψ^{1/q}(x,r)`.
/// Holds when finite and the maxima over the family and two equal downward
/// extensions of it do not keep growing.
pub fn condition_32<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    psi: &EnvelopeSpec<T>,
    q: T,
    w: &WeightSpec<T>,
    family: &BallFamily<T>,
    opts: &ConditionOptions<T>,
) -> Result<ConditionReport<T>> {
    ball_condition(phi, p, psi, q, w, family, false, opts)
}

/// As [`condition_32`] with the factor `ln(e + t/r)` in the integrand.
pub fn condition_35<T: Real>(
    phi: &EnvelopeSpec<T>,
    p: T,
    psi: &EnvelopeSpec<T>,
    q: T,
    w: &WeightSpec<T>,
    family: &BallFamily<T>,
    opts: &ConditionOptions<T>,
) -> Result<ConditionReport<T>> {
    ball_condition(phi, p, psi, q, w, family, true, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const ORIGIN: [f64; 3] = [0.0; 3];

    fn opts() -> ConditionOptions<f64> {
        ConditionOptions::default()
    }

    fn numeric() -> ConditionOptions<f64> {
        ConditionOptions {
            closed_form: false,
            ..ConditionOptions::default()
        }
    }

    #[test]
    fn integrand_examples() {
        let (p, q, lambda) = (2.0, 4.0, 0.3);
        let phi = EnvelopeSpec::PowerRadial(lambda);
        let c = 3.0;
        for t in [0.01, 1.0, 50.0] {
            let v =
                supremizing_integrand(&phi, p, &WeightSpec::Constant(c), q, t, &[ORIGIN, [1.0, 0.0, 0.0]], 1).unwrap();
            let exact = t.powf(lambda / p) / (c * (2.0 * t).powf(1.0 / q));
            assert_relative_eq!(v, exact, max_relative = 1e-12);
        }
        let beta = 1.0;
        let w = WeightSpec::Power(beta / q);
        for t in [0.1, 2.0] {
            let v = supremizing_integrand(&phi, p, &w, q, t, &[ORIGIN], 1).unwrap();
            let exact = t.powf(lambda / p - (1.0 + beta) / q) * ((1.0 + beta) / 2.0).powf(1.0 / q);
            assert_relative_eq!(v, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn constant_weight_c_delta_closed_form() {
        let (p, q, lambda, c) = (2.0, 4.0, 0.3, 2.0);
        let a: f64 = lambda / p - 1.0 / q;
        for delta in [0.5f64, 1.0, 3.0] {
            let exact = delta.powf(a) / ((1.0 / q - lambda / p) * c * 2f64.powf(1.0 / q));
            for o in [opts(), numeric()] {
                let rep = condition_31(
                    &EnvelopeSpec::PowerRadial(lambda),
                    p,
                    &WeightSpec::Constant(c),
                    q,
                    delta,
                    &[ORIGIN],
                    1,
                    &o,
                )
                .unwrap();
                assert_relative_eq!(rep.c_delta.unwrap(), exact, max_relative = 0.02);
                assert!(rep.holds);
            }
        }
    }

    #[test]
    fn divergence_flag() {
        let (p, q) = (2.0, 4.0);
        for o in [opts(), numeric()] {
            let rep = condition_31(
                &EnvelopeSpec::PowerRadial(2.0),
                p,
                &WeightSpec::Constant(1.0),
                q,
                1.0,
                &[ORIGIN],
                1,
                &o,
            )
            .unwrap();
            assert!(rep.divergent && !rep.holds);
            let rep = condition_34(
                &EnvelopeSpec::PowerRadial(0.5),
                p,
                &WeightSpec::Constant(1.0),
                q,
                1.0,
                &[ORIGIN],
                1,
                &o,
            )
            .unwrap();
            assert!(rep.divergent);
        }
    }

    #[test]
    fn log_condition_sup_at_smallest_radius() {
        let (p, q, lambda, beta) = (2.0, 4.0, 0.3, 1.0);
        let w = WeightSpec::Power(beta / q);
        let rep = condition_34(
            &EnvelopeSpec::PowerRadial(lambda),
            p,
            &w,
            q,
            1.0,
            &[ORIGIN],
            1,
            &numeric(),
        )
        .unwrap();
        let smallest = rep.inner_curve.last().unwrap().0;
        assert_eq!(rep.witness.unwrap().1, smallest);
        for w in rep.inner_curve.windows(2) {
            assert!(w[1].1 > w[0].1);
        }
        let a: f64 = lambda / p - (1.0 + beta) / q;
        let amp = ((1.0 + beta) / 2.0f64).powf(1.0 / q);
        let exact = amp * ((std::f64::consts::E + (1.0 / smallest).ln()) / (-a) + 1.0 / (a * a));
        assert_relative_eq!(rep.c_delta.unwrap(), exact, max_relative = 1e-3);
    }

    #[test]
    fn c0_for_constant_weight() {
        let (p, q, lambda) = (2.0, 4.0, 0.3);
        let fam = BallFamily::with_centers(1, &[&[0.0], &[1.0]], 0.01, 2.0, 8).unwrap();
        let phi = EnvelopeSpec::PowerRadial(lambda);
        let psi = EnvelopeSpec::PowerRadial(lambda * q / p);
        let exact = 1.0 / (1.0 / q - lambda / p);
        for o in [opts(), numeric()] {
            let rep = condition_32(&phi, p, &psi, q, &WeightSpec::Constant(5.0), &fam, &o).unwrap();
            assert_relative_eq!(rep.c0_hat.unwrap(), exact, max_relative = 0.03);
            assert!(rep.holds);
            for s in &rep.samples {
                assert_relative_eq!(s.ratio.unwrap(), exact, max_relative = 0.03);
            }
        }
    }

    #[test]
    fn log_factor_dominates() {
        let (p, q, lambda) = (2.0, 4.0, 0.3);
        let fam = BallFamily::with_centers(1, &[&[0.0]], 0.05, 2.0, 5).unwrap();
        let phi = EnvelopeSpec::PowerRadial(lambda);
        let psi = EnvelopeSpec::PowerRadial(lambda * q / p);
        let w = WeightSpec::Constant(1.0);
        let a = condition_32(&phi, p, &psi, q, &w, &fam, &opts()).unwrap();
        let b = condition_35(&phi, p, &psi, q, &w, &fam, &opts()).unwrap();
        assert!(b.c0_hat.unwrap() >= a.c0_hat.unwrap());
        assert!(b.holds);
        let ratios: Vec<f64> = b.samples.iter().map(|s| s.ratio.unwrap()).collect();
        for r in &ratios {
            assert_relative_eq!(*r, ratios[0], max_relative = 1e-3);
        }
    }

    #[test]
    fn divergent_ball_condition_carries_witness() {
        let fam = BallFamily::with_centers(1, &[&[0.0]], 0.05, 2.0, 3).unwrap();
        let rep = condition_35(
            &EnvelopeSpec::PowerRadial(2.0),
            2.0,
            &EnvelopeSpec::PowerRadial(4.0),
            4.0,
            &WeightSpec::Constant(1.0),
            &fam,
            &opts(),
        )
        .unwrap();
        assert!(rep.divergent && !rep.holds);
        assert!(rep.witness.is_some());
    }

    #[test]
    fn tabulated_inputs_refused() {
        let g = crate::grid::Grid::new(1, 4.0, 64).unwrap();
        let w = WeightSpec::Tabulated(crate::grid::SampledFunction::constant(&g, 1.0));
        let err = condition_31(
            &EnvelopeSpec::PowerRadial(0.3),
            2.0,
            &w,
            4.0,
            1.0,
            &[ORIGIN],
            1,
            &opts(),
        )
        .unwrap_err();
        assert_eq!(err, Error::TailUndeclared("weight"));
        let phi = EnvelopeSpec::Tabulated {
            radii: vec![0.1, 1.0],
            values: vec![vec![0.1, 1.0]],
            tail_exponent: None,
        };
        let err = condition_31(&phi, 2.0, &WeightSpec::Constant(1.0), 4.0, 0.5, &[ORIGIN], 1, &opts()).unwrap_err();
        assert_eq!(err, Error::TailUndeclared("envelope"));
    }

    #[test]
    fn power_weight_off_center_is_numeric_and_finite() {
        let (p, q, lambda, beta) = (2.0, 4.0, 0.3, 1.0);
        let centers = [ORIGIN, [2.0, 0.0, 0.0]];
        let rep = condition_31(
            &EnvelopeSpec::PowerRadial(lambda),
            p,
            &WeightSpec::Power(beta / q),
            q,
            0.5,
            &centers,
            1,
            &opts(),
        )
        .unwrap();
        assert_eq!(rep.tail_method, TailMethod::Truncated);
        assert_relative_eq!(rep.tail_exponent, lambda / p - (1.0 + beta) / q, epsilon = 0.01);
        assert!(rep.holds);
    }
}
