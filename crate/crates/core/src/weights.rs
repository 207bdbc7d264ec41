//! Weight families, weighted `L^q` ball norms and Muckenhoupt
//! characteristics (`A_p`, `A_{p,q}`) computed as maxima over a ball family.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::BallFamily;
use crate::grid::{norm, point_to_vec, Ball, Grid, Point, SampledFunction};
use crate::quad::{cosine_substitution, geometric_panels};
use crate::scalar::{sphere_area, Real};

/// Drift below which a scanned characteristic counts as refinement-stable.
pub const CLASS_DRIFT_TOL: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec<T> {
    Constant(T),
    /// `y ↦ |y|^β`
    Power(T),
    /// `lower + (upper - lower) / (1 + |y|²/scale²)`, so `lower ≤ w ≤ upper`.
    Pinched {
        lower: T,
        upper: T,
        scale: T,
    },
    Tabulated(SampledFunction<T>),
}

impl<T: Real> WeightSpec<T> {
    pub fn validate(&self, grid: &Grid<T>) -> Result<()> {
        match self {
            WeightSpec::Constant(c) if !(*c > T::zero()) || !c.is_finite() => Err(Error::InvalidParameter(format!(
                "constant weight must be positive, got {c}"
            ))),
            WeightSpec::Power(b) if !b.is_finite() => {
                Err(Error::InvalidParameter("power exponent must be finite".into()))
            }
            WeightSpec::Pinched { lower, upper, scale }
                if !(*lower > T::zero() && lower <= upper && *scale > T::zero()) =>
            {
                Err(Error::InvalidParameter(format!(
                    "pinched weight needs 0 < C <= D and scale > 0, got C={lower}, D={upper}, scale={scale}"
                )))
            }
            WeightSpec::Tabulated(f) => {
                if f.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                match f.values().iter().position(|v| !(*v > T::zero())) {
                    Some(i) => Err(Error::InvalidParameter(format!(
                        "tabulated weight is not positive at {:?}",
                        point_to_vec(&grid.point(i), grid.dim())
                    ))),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self, WeightSpec::Tabulated(_))
    }

    /// `w(y)^e` at lattice point `idx`. Powers of symbolic weights use the
    /// combined exponent rather than a pointwise power of a power.
    pub fn pow_at(&self, grid: &Grid<T>, idx: usize, e: T) -> T {
        match self {
            WeightSpec::Tabulated(f) => {
                let v = f.value(idx);
                if e == -T::one() {
                    v.recip()
                } else {
                    v.powf(e)
                }
            }
            _ => self.radial_pow(norm(&grid.point(idx)), e),
        }
    }

    /// `w^e` as a function of `|y|` for the symbolic kinds.
    fn radial_pow(&self, rho: T, e: T) -> T {
        match self {
            WeightSpec::Constant(c) => c.powf(e),
            WeightSpec::Power(b) => rho.powf(*b * e),
            WeightSpec::Pinched { lower, upper, scale } => {
                let s = rho / *scale;
                (*lower + (*upper - *lower) / (T::one() + s * s)).powf(e)
            }
            WeightSpec::Tabulated(_) => T::nan(),
        }
    }

    /// Whether `w^e` is integrable near the origin in `R^n`. Only power
    /// weights can fail.
    pub fn locally_integrable(&self, e: T, dim: usize) -> bool {
        match self {
            WeightSpec::Power(b) => *b * e > -T::of_usize(dim),
            _ => true,
        }
    }

    /// Radius beyond which ball integrals of `w^e` follow their asymptotic
    /// power law, for kinds with an intrinsic scale. For pinched weights the
    /// excess mass of `w^e` near the origin is about `scale · D^e` against
    /// growth `C^e t`.
    pub fn length_scale(&self, e: T) -> Option<T> {
        match self {
            WeightSpec::Pinched { lower, upper, scale } => Some(*scale * (*upper / *lower).powf(e).max(T::one())),
            _ => None,
        }
    }

    /// `w(x)^e` at an arbitrary point, for symbolic kinds.
    pub fn pow_at_point(&self, x: &Point<T>, e: T) -> Option<T> {
        if self.is_tabulated() {
            None
        } else {
            Some(self.radial_pow(norm(x), e))
        }
    }

    /// `∫_a^b w(ρ)^e ρ^{n-1} dρ`.
    fn radial_segment(&self, e: T, dim: usize, a: T, b: T) -> T {
        if !(b > a) {
            return T::zero();
        }
        let n = T::of_usize(dim);
        let power = |scale: T, s: T| {
            let m = s + n;
            if m <= T::zero() {
                T::infinity()
            } else {
                scale * (b.powf(m) - a.powf(m)) / m
            }
        };
        match self {
            WeightSpec::Constant(c) => power(c.powf(e), T::zero()),
            WeightSpec::Power(beta) => power(T::one(), *beta * e),
            WeightSpec::Pinched { scale, .. } => geometric_panels(
                &|rho: T| self.radial_pow(rho, e) * rho.powi(dim as i32 - 1),
                a,
                b,
                *scale / T::of(16.0),
            ),
            WeightSpec::Tabulated(_) => T::nan(),
        }
    }
}

/// `∫_{B(x,r)} w^e dy` over the full ball in `R^n` (no box truncation).
/// Uses exact antiderivatives where available and one-dimensional radial
/// quadrature otherwise; `None` for tabulated weights.
pub fn exact_ball_integral<T: Real>(w: &WeightSpec<T>, e: T, dim: usize, ball: &Ball<T>) -> Option<T> {
    if w.is_tabulated() {
        return None;
    }
    let r = ball.radius;
    if dim == 1 {
        let x = ball.center[0];
        let (lo, hi) = (x - r, x + r);
        let v = if lo >= T::zero() {
            w.radial_segment(e, 1, lo, hi)
        } else if hi <= T::zero() {
            w.radial_segment(e, 1, -hi, -lo)
        } else {
            w.radial_segment(e, 1, T::zero(), -lo) + w.radial_segment(e, 1, T::zero(), hi)
        };
        return Some(v);
    }
    let d = norm(&ball.center);
    let omega = sphere_area::<T>(dim);
    let full = omega * w.radial_segment(e, dim, T::zero(), (r - d).max(T::zero()));
    if d == T::zero() {
        return Some(full);
    }
    let two = T::of(2.0);
    let shell = |rho: T| {
        if rho <= T::zero() {
            return T::zero();
        }
        let c = ((rho * rho + d * d - r * r) / (two * rho * d))
            .max(-T::one())
            .min(T::one());
        let measure = if dim == 2 {
            two * rho * c.acos()
        } else {
            two * T::PI() * rho * rho * (T::one() - c)
        };
        w.radial_pow(rho, e) * measure
    };
    let partial = cosine_substitution(&shell, (r - d).abs(), r + d);
    Some(full + partial)
}

/// `‖w‖_{L^q(B(x,r))}` on the full ball; `None` for tabulated weights.
pub fn exact_weight_norm<T: Real>(w: &WeightSpec<T>, q: T, dim: usize, ball: &Ball<T>) -> Option<T> {
    exact_ball_integral(w, q, dim, ball).map(|v| v.powf(q.recip()))
}

/// `‖w‖_{L^q(B ∩ box)}` by midpoint quadrature on the grid.
pub fn weight_lq_norm<T: Real>(w: &WeightSpec<T>, q: T, ball: &Ball<T>, grid: &Grid<T>) -> Result<T> {
    if q < T::one() {
        return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
    }
    let s = weighted_power_sum(w, q, ball, grid, "w^q")?;
    Ok(s.powf(q.recip()))
}

/// `∫_{B ∩ box} w^e` on the grid, rejecting overflow at any contributing point.
pub(crate) fn weighted_power_sum<T: Real>(
    w: &WeightSpec<T>,
    e: T,
    ball: &Ball<T>,
    grid: &Grid<T>,
    what: &'static str,
) -> Result<T> {
    grid.try_ball_sum(ball, |i| {
        let v = w.pow_at(grid, i, e);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow {
                what,
                point: point_to_vec(&grid.point(i), grid.dim()),
            })
        }
    })
    .map(|s| s.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `|x| < 3r`
    Near,
    /// `|x| ≥ 3r`
    Far,
}

/// Two-regime envelope of `‖ |y|^{β/q} ‖_{L^q(B(x,r))}` for power weights:
/// `r^{(n+β)/q}` when `|x| < 3r`, `r^{n/q} (|x| + r)^{β/q}` otherwise.
/// Equivalence holds up to constants only.
pub fn closed_form_power_norm<T: Real>(beta: T, q: T, dim: usize, ball: &Ball<T>) -> Result<(T, Regime)> {
    let n = T::of_usize(dim);
    if !(beta > -n) {
        return Err(Error::InvalidParameter(format!(
            "|y|^{beta} is not locally integrable in dimension {dim}"
        )));
    }
    if q < T::one() {
        return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
    }
    let r = ball.radius;
    let x = norm(&ball.center);
    if x < T::of(3.0) * r {
        Ok((r.powf((n + beta) / q), Regime::Near))
    } else {
        Ok((r.powf(n / q) * (x + r).powf(beta / q), Regime::Far))
    }
}

/// Exponents `1 < p < q < ∞` tied by `1/q = 1/p - α/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSet<T> {
    pub p: T,
    pub q: T,
    pub alpha: T,
    pub p_conj: T,
}

impl<T: Real> ExponentSet<T> {
    pub fn from_alpha(p: T, alpha: T, dim: usize) -> Result<Self> {
        let n = T::of_usize(dim);
        if !(p > T::one()) {
            return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
        }
        if !(alpha > T::zero() && alpha < n) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, {dim}), got {alpha}"
            )));
        }
        let inv_q = p.recip() - alpha / n;
        if !(inv_q > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "need p < n/alpha for a finite q (p={p}, alpha={alpha}, n={dim})"
            )));
        }
        Ok(Self {
            p,
            q: inv_q.recip(),
            alpha,
            p_conj: p / (p - T::one()),
        })
    }

    pub fn new(p: T, q: T, dim: usize) -> Result<Self> {
        if !(p > T::one() && q > p && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("need 1 < p < q < ∞, got p={p}, q={q}")));
        }
        Ok(Self {
            p,
            q,
            alpha: T::of_usize(dim) * (p.recip() - q.recip()),
            p_conj: p / (p - T::one()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightClassReport<T> {
    pub characteristic: T,
    pub witness_ball: Ball<T>,
    pub ball_count: usize,
    /// `|c(h) - c(2h)| / c(2h)`; `None` when the grid cannot be coarsened or
    /// the weight is tabulated.
    pub refinement_drift: Option<T>,
    /// `(spacing, characteristic)` from finest to coarsest.
    pub history: Vec<(T, T)>,
    /// Increments under refinement stay positive and do not decay.
    pub growth_detected: bool,
    pub locally_integrable: bool,
    pub in_class: bool,
}

fn scan_family<T, F>(family: &BallFamily<T>, value: F) -> Result<(T, Ball<T>, usize)>
where
    T: Real,
    F: Fn(&Ball<T>) -> Result<Option<T>> + Sync,
{
    let balls = family.balls();
    let values: Vec<Result<Option<T>>> = balls.par_iter().map(|(_, b)| value(b)).collect();
    let mut best: Option<(T, Ball<T>)> = None;
    let mut count = 0;
    for ((_, ball), v) in balls.iter().zip(values) {
        if let Some(v) = v? {
            count += 1;
            let better = match &best {
                None => true,
                Some((b, _)) => v > *b || (v.is_nan() && !b.is_nan()),
            };
            if better {
                best = Some((v, *ball));
            }
        }
    }
    best.map(|(v, b)| (v, b, count)).ok_or(Error::EmptyFamily)
}

fn ap_value<T: Real>(w: &WeightSpec<T>, s: T, p: T, ball: &Ball<T>, grid: &Grid<T>) -> Result<Option<T>> {
    let cells = grid.ball_indices(ball).len();
    if cells == 0 {
        return Ok(None);
    }
    let measure = T::of_usize(cells) * grid.cell_volume();
    let p_conj = p / (p - T::one());
    let direct = weighted_power_sum(w, s, ball, grid, "w")?;
    let dual = weighted_power_sum(w, s * (T::one() - p_conj), ball, grid, "w^(1-p')")?;
    Ok(Some(direct * dual.powf(p - T::one()) / measure.powf(p)))
}

fn apq_value<T: Real>(w: &WeightSpec<T>, exps: &ExponentSet<T>, ball: &Ball<T>, grid: &Grid<T>) -> Result<Option<T>> {
    let cells = grid.ball_indices(ball).len();
    if cells == 0 {
        return Ok(None);
    }
    let measure = T::of_usize(cells) * grid.cell_volume();
    let lq = weighted_power_sum(w, exps.q, ball, grid, "w^q")?.powf(exps.q.recip());
    let dual = weighted_power_sum(w, -exps.p_conj, ball, grid, "w^(-p')")?.powf(exps.p_conj.recip());
    let expo = T::one() + exps.q.recip() - exps.p.recip();
    Ok(Some(lq * dual / measure.powf(expo)))
}

fn classify<T, F>(
    w: &WeightSpec<T>,
    family: &BallFamily<T>,
    grid: &Grid<T>,
    integrable: bool,
    value: F,
) -> Result<WeightClassReport<T>>
where
    T: Real,
    F: Fn(&Ball<T>, &Grid<T>) -> Result<Option<T>> + Sync,
{
    w.validate(grid)?;
    let (c, witness, count) = scan_family(family, |b| value(b, grid))?;
    let mut history = vec![(grid.spacing(), c)];
    if !w.is_tabulated() {
        let mut g = grid.clone();
        for _ in 0..2 {
            match g.coarsened() {
                Some(coarse) => {
                    if let Ok((cc, _, _)) = scan_family(family, |b| value(b, &coarse)) {
                        history.push((coarse.spacing(), cc));
                    }
                    g = coarse;
                }
                None => break,
            }
        }
    }
    let refinement_drift = history.get(1).map(|&(_, coarse)| ((c - coarse) / coarse).abs());
    let growth_detected = if history.len() == 3 {
        let d_fine = history[0].1 - history[1].1;
        let d_coarse = history[1].1 - history[2].1;
        d_fine > T::of(0.01) * c && d_coarse > T::zero() && d_fine >= T::of(0.9) * d_coarse
    } else {
        false
    };
    let stable = refinement_drift.is_none_or(|d| d < T::of(CLASS_DRIFT_TOL));
    Ok(WeightClassReport {
        characteristic: c,
        witness_ball: witness,
        ball_count: count,
        refinement_drift,
        history,
        growth_detected,
        locally_integrable: integrable,
        in_class: integrable && c.is_finite() && stable && !growth_detected,
    })
}

/// `A_p` characteristic of `w^s`:
/// `max_B (∫_B w^s)(∫_B w^{s(1-p')})^{p-1} / |B|^p` with `|B|` the truncated
/// lattice measure.
fn ap_of_power<T: Real>(
    w: &WeightSpec<T>,
    s: T,
    p: T,
    family: &BallFamily<T>,
    grid: &Grid<T>,
) -> Result<WeightClassReport<T>> {
    if !(p > T::one()) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    let p_conj = p / (p - T::one());
    let n = grid.dim();
    let integrable = w.locally_integrable(s, n) && w.locally_integrable(s * (T::one() - p_conj), n);
    classify(w, family, grid, integrable, |b, g| ap_value(w, s, p, b, g))
}

pub fn ap_characteristic<T: Real>(
    w: &WeightSpec<T>,
    p: T,
    family: &BallFamily<T>,
    grid: &Grid<T>,
) -> Result<WeightClassReport<T>> {
    ap_of_power(w, T::one(), p, family, grid)
}

/// `A_{p,q}` characteristic:
/// `max_B ‖w‖_{L^q(B)} ‖w^{-1}‖_{L^{p'}(B)} / |B|^{1 + 1/q - 1/p}`.
pub fn apq_characteristic<T: Real>(
    w: &WeightSpec<T>,
    exps: &ExponentSet<T>,
    family: &BallFamily<T>,
    grid: &Grid<T>,
) -> Result<WeightClassReport<T>> {
    let n = grid.dim();
    let integrable = w.locally_integrable(exps.q, n) && w.locally_integrable(-exps.p_conj, n);
    classify(w, family, grid, integrable, |b, g| apq_value(w, exps, b, g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionCheck<T> {
    /// `A_{1+q/p'}` report for `w^q`.
    pub lhs_class: WeightClassReport<T>,
    /// `A_{p,q}` report for `w`.
    pub rhs_class: WeightClassReport<T>,
    /// `lhs in class ⟹ rhs in class`.
    pub consistent: bool,
}

/// Checks that `w^q ∈ A_{1+q/p'}` implies `w ∈ A_{p,q}` on the scanned family.
pub fn lemma21_check<T: Real>(
    w: &WeightSpec<T>,
    exps: &ExponentSet<T>,
    family: &BallFamily<T>,
    grid: &Grid<T>,
) -> Result<InclusionCheck<T>> {
    if !(exps.p > T::one() && exps.q > exps.p) {
        return Err(Error::InvalidParameter("need 1 < p < q".into()));
    }
    let lhs_class = ap_of_power(w, exps.q, T::one() + exps.q / exps.p_conj, family, grid)?;
    let rhs_class = apq_characteristic(w, exps, family, grid)?;
    let consistent = !lhs_class.in_class || rhs_class.in_class;
    Ok(InclusionCheck {
        lhs_class,
        rhs_class,
        consistent,
    })
}
