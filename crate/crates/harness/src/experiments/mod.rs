//! Verification experiments. Each runs on the configured grid and on its
//! refinement, and reports stability evidence rather than a proof.

pub mod example36;
pub mod lemmas;
pub mod theorems;

use morrey_core::grid::{norm, Point};
use morrey_core::{
    exact_weight_norm, fractional_integral, Ball64, ConditionReport, Grid64, OperatorParams64, SampledFunction64,
    WeightClassReport, WeightSpec64,
};
use serde::Serialize;

pub use example36::{example36_verify, Example36Report};
pub use lemmas::{lemma22_verify, lemma23_verify, LemmaReport};
pub use theorems::{theorem31_experiment, theorem33_experiment, TheoremReport};

/// Nodes per decade for the radial integrals assembled here.
pub const NODES_PER_DECADE: usize = 64;
/// Numeric integrals run to this multiple of the largest relevant length.
pub const TAIL_FACTOR: f64 = 1e3;

pub fn coords(x: &Point<f64>, dim: usize) -> Vec<f64> {
    x[..dim].to_vec()
}

/// `|a - b| / |b|`, zero when both vanish and infinite when only `b` does.
pub fn relative_drift(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if b == 0.0 || !a.is_finite() || !b.is_finite() {
        f64::INFINITY
    } else {
        (a - b).abs() / b.abs()
    }
}

/// `lhs / rhs`, treating `lhs ≤ zero_floor` over a vanishing `rhs` as 0.
pub fn safe_ratio(lhs: f64, rhs: f64, zero_floor: f64) -> f64 {
    if rhs > 0.0 && rhs.is_finite() {
        lhs / rhs
    } else if lhs <= zero_floor {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `‖w‖_{L^q(B(x,t))}` over all of `R^n`.
pub fn full_weight_norm(w: &WeightSpec64, q: f64, dim: usize, x: &Point<f64>, t: f64) -> morrey_core::Result<f64> {
    let ball = Ball64::at(*x, t)?;
    match exact_weight_norm(w, q, dim, &ball) {
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(_) => Err(morrey_core::Error::ZeroNorm {
            center: coords(x, dim),
            radius: t,
        }),
        None => Err(morrey_core::Error::TailUndeclared("weight")),
    }
}

/// Largest radius relevant to integrals centred at `x`.
pub fn outer_length(w: &WeightSpec64, q: f64, x: &Point<f64>, reach: f64) -> f64 {
    let ell = w.length_scale(q).unwrap_or(0.0);
    TAIL_FACTOR * reach.max(norm(x)).max(ell)
}

pub fn integral_field(f: &SampledFunction64, alpha: f64, grid: &Grid64) -> morrey_core::Result<SampledFunction64> {
    fractional_integral(f, &OperatorParams64::new(alpha, grid))?.into_field()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallRef {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub characteristic: f64,
    pub refinement_drift: Option<f64>,
    pub growth_detected: bool,
    pub locally_integrable: bool,
    pub in_class: bool,
    pub witness: BallRef,
}

impl ClassSummary {
    pub fn new(r: &WeightClassReport<f64>, dim: usize) -> Self {
        Self {
            characteristic: r.characteristic,
            refinement_drift: r.refinement_drift,
            growth_detected: r.growth_detected,
            locally_integrable: r.locally_integrable,
            in_class: r.in_class,
            witness: BallRef {
                center: coords(&r.witness_ball.center, dim),
                radius: r.witness_ball.radius,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub holds: bool,
    pub divergent: bool,
    pub value: Option<f64>,
    pub drift: Option<f64>,
    pub growth_detected: bool,
    pub history: Vec<f64>,
    pub tail_exponent: f64,
    pub witness: Option<BallRef>,
}

impl ConditionSummary {
    pub fn new(r: &ConditionReport<f64>, dim: usize) -> Self {
        Self {
            holds: r.holds,
            divergent: r.divergent,
            value: r.value(),
            drift: r.drift,
            growth_detected: r.growth_detected,
            history: r.history.clone(),
            tail_exponent: r.tail_exponent,
            witness: r.witness.map(|(c, rad)| BallRef {
                center: coords(&c, dim),
                radius: rad,
            }),
        }
    }
}
