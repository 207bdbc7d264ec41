//! Fractional integral and maximal operators, Muckenhoupt weight
//! characteristics, weighted Morrey norms and Zygmund-type conditions on a
//! cell-centered lattice over `[-L, L]^n`, `n ≤ 3`.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! bottom fix the scalar.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod error;
pub mod family;
pub mod grid;
pub mod morrey;
pub mod operators;
pub mod quad;
pub mod scalar;
pub mod weights;

pub use conditions::{
    condition_31, condition_32, condition_34, condition_35, supremizing_integrand, ConditionOptions, ConditionReport,
    ConditionSample, TailMethod,
};
pub use error::{Error, Result};
pub use family::BallFamily;
pub use grid::{Ball, BallSum, Grid, Point, SampledFunction};
pub use morrey::{
    auto_knee, bmo_seminorm, envelope_class_check, mean_oscillation, morrey_quasinorm, vanishing_check,
    vanishing_check_auto, weighted_lp_norm, EnvelopeClass, EnvelopeSpec, MorreyReport, Oscillation,
};
pub use operators::{
    commutator_integral, commutator_maximal, fractional_integral, fractional_maximal, geometric_ladder,
    self_cell_integral, truncation_warning, OperatorParams, PointValues,
};
pub use scalar::Real;
pub use weights::{
    ap_characteristic, apq_characteristic, closed_form_power_norm, exact_weight_norm, lemma21_check, weight_lq_norm,
    ExponentSet, InclusionCheck, Regime, WeightClassReport, WeightSpec,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Grid64 = Grid<f64>;
pub type Ball64 = Ball<f64>;
pub type SampledFunction64 = SampledFunction<f64>;
pub type BallFamily64 = BallFamily<f64>;
pub type WeightSpec64 = WeightSpec<f64>;
pub type EnvelopeSpec64 = EnvelopeSpec<f64>;
pub type OperatorParams64 = OperatorParams<f64>;

pub type Grid32 = Grid<f32>;
pub type Ball32 = Ball<f32>;
pub type SampledFunction32 = SampledFunction<f32>;
pub type BallFamily32 = BallFamily<f32>;
pub type WeightSpec32 = WeightSpec<f32>;
pub type EnvelopeSpec32 = EnvelopeSpec<f32>;
pub type OperatorParams32 = OperatorParams<f32>;
