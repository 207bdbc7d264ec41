//! Experiment configuration: TOML file, command-line overrides, validation
//! and resolution into core types.

use std::path::{Path, PathBuf};

use morrey_core::{BallFamily64, EnvelopeSpec64, ExponentSet, Grid64, WeightSpec64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::inputs::{EnvelopeArg, FunctionArg, GridArg, WeightArg};

/// Largest admissible `α` as a fraction of `n/p`; keeps `q` finite with margin.
pub const ALPHA_MARGIN: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyConfig {
    /// Defaults to `2h`.
    pub r_min: Option<f64>,
    pub ratio: f64,
    /// Defaults to `L`.
    pub r_max: Option<f64>,
    /// Defaults to the origin plus a sublattice of spacing `L/4` over the
    /// inner half of the box.
    pub centers: Option<Vec<Vec<f64>>>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            r_min: None,
            ratio: std::f64::consts::SQRT_2,
            r_max: None,
            centers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Refinement drift allowed for operator and lemma ratios.
    pub drift: f64,
    /// Refinement drift allowed for commutator ratios.
    pub commutator_drift: f64,
    /// Numeric/closed-form power-norm ratios must lie in `[1/K, K]`.
    pub norm_band: f64,
    /// Relative error of the origin limit of the power-norm ratio.
    pub origin_limit: f64,
    /// Absolute error of the fitted `c_δ` exponent.
    pub exponent: f64,
    /// Relative size below which a commutator counts as zero.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            drift: 0.2,
            commutator_drift: 0.25,
            norm_band: 10.0,
            origin_limit: 0.02,
            exponent: 0.05,
            zero: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: GridArg,
    pub p: f64,
    pub alpha: f64,
    pub weight: WeightArg,
    pub phi: EnvelopeArg,
    /// Defaults to `r^{λq/p}` for `φ = r^λ`.
    pub psi: Option<EnvelopeArg>,
    pub family: FamilyConfig,
    /// Test functions `f`, compactly supported in the inner half of the box.
    pub roster: Vec<FunctionArg>,
    /// BMO symbol `b` for the commutator experiments.
    pub symbol: FunctionArg,
    /// Lower limits `δ` for the `c_δ` integrals.
    pub deltas: Vec<f64>,
    pub tolerances: Tolerances,
    /// Adds the near/far split of the boundedness bound to operator reports.
    pub split_diagnostic: bool,
    /// Radius separating the near and far parts of the split.
    pub split_delta: f64,
    /// Report directory; not part of the config hash.
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: GridArg {
                dim: 1,
                half_width: 4.0,
                cells: 1024,
            },
            p: 2.0,
            alpha: 0.25,
            weight: WeightArg::Power(0.25),
            phi: EnvelopeArg { exponent: 0.3 },
            psi: None,
            family: FamilyConfig::default(),
            roster: vec![
                FunctionArg::Indicator {
                    radius: 1.0,
                    center: Vec::new(),
                },
                FunctionArg::PowerBump(0.3),
                FunctionArg::Smooth(1.0),
            ],
            symbol: FunctionArg::Step,
            deltas: vec![0.25, 0.5, 1.0, 2.0],
            tolerances: Tolerances::default(),
            split_diagnostic: false,
            split_delta: 1.0,
            output_dir: PathBuf::from("reports"),
        }
    }
}

/// Invalid configuration or invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub grid: Option<GridArg>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub weight: Option<WeightArg>,
    pub phi: Option<EnvelopeArg>,
    pub psi: Option<EnvelopeArg>,
    pub roster: Vec<FunctionArg>,
    pub symbol: Option<FunctionArg>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(g) = o.grid {
            self.grid = g;
        }
        if let Some(p) = o.p {
            self.p = p;
        }
        if let Some(a) = o.alpha {
            self.alpha = a;
        }
        if let Some(w) = o.weight {
            self.weight = w;
        }
        if let Some(phi) = o.phi {
            self.phi = phi;
        }
        if let Some(psi) = o.psi {
            self.psi = Some(psi);
        }
        if !o.roster.is_empty() {
            self.roster = o.roster.clone();
        }
        if let Some(b) = &o.symbol {
            self.symbol = b.clone();
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
    }

    /// SHA-256 of the canonical JSON form, output directory excluded; first
    /// 12 hex digits.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        hex::encode(digest)[..12].to_string()
    }

    pub fn resolve(&self) -> Result<Setup, ConfigError> {
        Setup::new(self)
    }
}

/// A validated configuration in core types.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: ExperimentConfig,
    pub grid: Grid64,
    pub exps: ExponentSet<f64>,
    pub weight: WeightSpec64,
    pub phi: EnvelopeSpec64,
    pub psi: EnvelopeSpec64,
    pub family: BallFamily64,
}

impl Setup {
    fn new(cfg: &ExperimentConfig) -> Result<Self, ConfigError> {
        let grid = cfg.grid.build().map_err(|e| ConfigError(e.to_string()))?;
        let n = grid.dim() as f64;
        let exps = ExponentSet::from_alpha(cfg.p, cfg.alpha, grid.dim()).map_err(|e| ConfigError(e.to_string()))?;
        if cfg.alpha > ALPHA_MARGIN * n / cfg.p {
            return bad(format!(
                "alpha = {} exceeds {ALPHA_MARGIN}·n/p = {}",
                cfg.alpha,
                ALPHA_MARGIN * n / cfg.p
            ));
        }
        let half = 0.5 * grid.half_width();
        for f in &cfg.roster {
            match f.support_radius() {
                Some(s) if s <= half => {}
                _ => {
                    return bad(format!(
                        "test function `{f}` is not supported in the inner half |y| <= {half}"
                    ))
                }
            }
            if let FunctionArg::PowerBump(g) = f {
                if *g >= n / cfg.p {
                    return bad(format!("power bump `{f}` needs γ < n/p = {}", n / cfg.p));
                }
            }
            if let FunctionArg::Indicator { center, .. } = f {
                if center.len() > grid.dim() {
                    return bad(format!("indicator `{f}` has more coordinates than the grid"));
                }
            }
        }
        if cfg.deltas.iter().any(|d| !(*d > 0.0)) || !(cfg.split_delta > 0.0) {
            return bad("every delta must be positive");
        }
        let t = &cfg.tolerances;
        if [t.drift, t.commutator_drift, t.origin_limit, t.exponent, t.zero]
            .iter()
            .any(|v| !(*v > 0.0))
            || !(t.norm_band > 1.0)
        {
            return bad("tolerances must be positive and the norm band above 1");
        }
        let weight = cfg.weight.to_spec();
        weight.validate(&grid).map_err(|e| ConfigError(e.to_string()))?;
        let psi = cfg.psi.unwrap_or(EnvelopeArg {
            exponent: cfg.phi.exponent * exps.q / exps.p,
        });
        let family = family_for(&cfg.family, &grid)?;
        Ok(Self {
            config: cfg.clone(),
            grid,
            exps,
            weight,
            phi: cfg.phi.to_spec(),
            psi: psi.to_spec(),
            family,
        })
    }

    pub fn psi_arg(&self) -> EnvelopeArg {
        self.config.psi.unwrap_or(EnvelopeArg {
            exponent: self.config.phi.exponent * self.exps.q / self.exps.p,
        })
    }
}

pub fn family_for(fc: &FamilyConfig, grid: &Grid64) -> Result<BallFamily64, ConfigError> {
    let base = BallFamily64::default_for(grid);
    let centers = match &fc.centers {
        None => base.centers().to_vec(),
        Some(cs) => {
            let mut pts = Vec::with_capacity(cs.len());
            for c in cs {
                if c.len() != grid.dim() {
                    return bad(format!("family center {c:?} does not have {} coordinates", grid.dim()));
                }
                pts.push(morrey_core::grid::point_from(c).map_err(|e| ConfigError(e.to_string()))?);
            }
            pts
        }
    };
    let r_min = fc.r_min.unwrap_or(2.0 * grid.spacing());
    let r_max = fc.r_max.unwrap_or(grid.half_width());
    BallFamily64::spanning(grid.dim(), centers, r_min, fc.ratio, r_max).map_err(|e| ConfigError(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_example_values() {
        let s = ExperimentConfig::default().resolve().unwrap();
        assert!((s.exps.q - 4.0).abs() < 1e-12);
        assert_eq!(s.grid.spacing(), 1.0 / 128.0);
        assert_eq!(s.psi, EnvelopeSpec64::PowerRadial(0.6));
        assert_eq!(s.family.centers().len(), 5);
        assert!((s.family.r_min() - 2.0 / 128.0).abs() < 1e-15);
        assert!(s.family.r_max() >= 4.0);
    }

    #[test]
    fn toml_round_trip_and_overrides() {
        let text = r#"
grid = "1:2:256"
p = 1.5
alpha = 0.2
weight = "pinched:1:2:0.5"
phi = "pow:0.2"
roster = ["indicator:0.5"]
symbol = "log"

[family]
ratio = 2.0
centers = [[0.0], [0.5]]

[tolerances]
drift = 0.1
"#;
        let mut c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.tolerances.drift, 0.1);
        assert_eq!(c.tolerances.exponent, 0.05);
        let back = ExperimentConfig::from_toml(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);

        c.apply(&Overrides {
            p: Some(2.0),
            roster: vec![FunctionArg::Smooth(0.5)],
            ..Overrides::default()
        });
        assert_eq!(c.p, 2.0);
        assert_eq!(c.roster, vec![FunctionArg::Smooth(0.5)]);
        assert_eq!(c.symbol, FunctionArg::Log);
        let s = c.resolve().unwrap();
        assert_eq!(s.family.centers().len(), 2);
        assert_eq!(s.family.ratio(), 2.0);
    }

    #[test]
    fn q_follows_from_p_and_alpha() {
        let c = ExperimentConfig {
            p: 1.5,
            alpha: 0.5,
            ..ExperimentConfig::default()
        };
        let s = c.resolve().unwrap();
        assert!((1.0 / s.exps.q - (1.0 / 1.5 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs_rejected() {
        type Edit = Box<dyn Fn(&mut ExperimentConfig)>;
        let cases: Vec<Edit> = vec![
            Box::new(|c| c.alpha = 0.46),
            Box::new(|c| c.p = 1.0),
            Box::new(|c| c.roster = vec![FunctionArg::Step]),
            Box::new(|c| c.roster = vec!["indicator:1@1.5".parse().unwrap()]),
            Box::new(|c| c.roster = vec![FunctionArg::PowerBump(0.5)]),
            Box::new(|c| c.deltas = vec![0.0]),
            Box::new(|c| c.tolerances.norm_band = 1.0),
            Box::new(|c| c.family.centers = Some(vec![vec![0.0, 0.0]])),
        ];
        for (i, edit) in cases.iter().enumerate() {
            let mut c = ExperimentConfig::default();
            edit(&mut c);
            assert!(c.resolve().is_err(), "case {i} accepted");
        }
        assert!(ExperimentConfig::from_toml("grid = \"1:4:1024\"\nfoo = 1").is_err());
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 12);
        b.p = 1.9;
        assert_ne!(a.hash(), b.hash());
    }
}
