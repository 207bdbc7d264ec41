//! Compact string forms for weights, envelopes, test functions and grids,
//! shared by config files and command-line flags.
//!
//! | kind     | forms                                                        |
//! |----------|--------------------------------------------------------------|
//! | weight   | `const:c`, `power:e`, `pinched:C:D:s`                        |
//! | envelope | `pow:λ` (`φ(x,r) = r^λ`)                                     |
//! | function | `zero`, `const:c`, `indicator:s[@x1,x2,..]`, `powerbump:γ`,  |
//! |          | `smooth:s`, `step`, `log`                                    |
//! | grid     | `n:L:cells`                                                  |

use std::fmt;
use std::str::FromStr;

use morrey_core::{EnvelopeSpec64, Grid64, SampledFunction64, WeightSpec64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseError {}

fn number(kind: &str, s: &str) -> Result<f64, ParseError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| ParseError(format!("{kind}: `{s}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParseError(format!("{kind}: `{s}` is not finite")))
    }
}

fn fields<'a>(s: &'a str, kind: &str, want: usize) -> Result<Vec<&'a str>, ParseError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != want {
        return Err(ParseError(format!(
            "{kind} spec `{s}` expects {want} colon-separated fields"
        )));
    }
    Ok(parts)
}

macro_rules! string_serde {
    ($t:ty) => {
        impl TryFrom<String> for $t {
            type Error = ParseError;
            fn try_from(s: String) -> Result<Self, ParseError> {
                s.parse()
            }
        }
        impl From<$t> for String {
            fn from(v: $t) -> String {
                v.to_string()
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightArg {
    Constant(f64),
    Power(f64),
    Pinched { lower: f64, upper: f64, scale: f64 },
}

impl WeightArg {
    pub fn to_spec(self) -> WeightSpec64 {
        match self {
            WeightArg::Constant(c) => WeightSpec64::Constant(c),
            WeightArg::Power(e) => WeightSpec64::Power(e),
            WeightArg::Pinched { lower, upper, scale } => WeightSpec64::Pinched { lower, upper, scale },
        }
    }
}

impl FromStr for WeightArg {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        let kind = s.split(':').next().unwrap_or_default();
        let w = match kind {
            "const" => WeightArg::Constant(number("weight", fields(s, "weight", 2)?[1])?),
            "power" => WeightArg::Power(number("weight", fields(s, "weight", 2)?[1])?),
            "pinched" => {
                let f = fields(s, "weight", 4)?;
                WeightArg::Pinched {
                    lower: number("weight", f[1])?,
                    upper: number("weight", f[2])?,
                    scale: number("weight", f[3])?,
                }
            }
            _ => {
                return Err(ParseError(format!(
                    "unknown weight `{s}` (expected const:c, power:e or pinched:C:D:s)"
                )))
            }
        };
        match w {
            WeightArg::Constant(c) if c <= 0.0 => Err(ParseError(format!("constant weight must be positive, got {c}"))),
            WeightArg::Pinched { lower, upper, scale } if !(lower > 0.0 && lower <= upper && scale > 0.0) => Err(
                ParseError(format!("pinched weight needs 0 < C <= D and s > 0, got `{s}`")),
            ),
            w => Ok(w),
        }
    }
}

impl fmt::Display for WeightArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightArg::Constant(c) => write!(f, "const:{c}"),
            WeightArg::Power(e) => write!(f, "power:{e}"),
            WeightArg::Pinched { lower, upper, scale } => write!(f, "pinched:{lower}:{upper}:{scale}"),
        }
    }
}

string_serde!(WeightArg);

/// `φ(x, r) = r^λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EnvelopeArg {
    pub exponent: f64,
}

impl EnvelopeArg {
    pub fn to_spec(self) -> EnvelopeSpec64 {
        EnvelopeSpec64::PowerRadial(self.exponent)
    }
}

impl FromStr for EnvelopeArg {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        match s.split(':').next() {
            Some("pow") => Ok(EnvelopeArg {
                exponent: number("envelope", fields(s, "envelope", 2)?[1])?,
            }),
            _ => Err(ParseError(format!("unknown envelope `{s}` (expected pow:λ)"))),
        }
    }
}

impl fmt::Display for EnvelopeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pow:{}", self.exponent)
    }
}

string_serde!(EnvelopeArg);

/// Test functions `f` and BMO symbols `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FunctionArg {
    Zero,
    Constant(f64),
    /// `1_{|y - center| < radius}`; empty center means the origin.
    Indicator {
        radius: f64,
        center: Vec<f64>,
    },
    /// `|y|^{-γ} 1_{|y| < 1}`
    PowerBump(f64),
    /// `exp(1 - 1/(1 - |y|²/s²))` on `|y| < s`, peak value 1.
    Smooth(f64),
    /// `1_{y_1 > 0}`
    Step,
    /// `ln |y|`
    Log,
}

impl FunctionArg {
    /// Radius about the origin containing the support, `None` when the
    /// support is unbounded.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            FunctionArg::Zero => Some(0.0),
            FunctionArg::Indicator { radius, center } => {
                Some(center.iter().map(|c| c * c).sum::<f64>().sqrt() + radius)
            }
            FunctionArg::PowerBump(_) => Some(1.0),
            FunctionArg::Smooth(s) => Some(*s),
            FunctionArg::Constant(_) | FunctionArg::Step | FunctionArg::Log => None,
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let rho = y.iter().map(|c| c * c).sum::<f64>().sqrt();
        match self {
            FunctionArg::Zero => 0.0,
            FunctionArg::Constant(c) => *c,
            FunctionArg::Indicator { radius, center } => {
                let d2: f64 = y
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let c = center.get(i).copied().unwrap_or(0.0);
                        (v - c) * (v - c)
                    })
                    .sum();
                if d2 < radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionArg::PowerBump(g) => {
                if rho < 1.0 {
                    rho.powf(-g)
                } else {
                    0.0
                }
            }
            FunctionArg::Smooth(s) => {
                let u = rho * rho / (s * s);
                if u < 1.0 {
                    (1.0 - 1.0 / (1.0 - u)).exp()
                } else {
                    0.0
                }
            }
            FunctionArg::Step => {
                if y[0] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionArg::Log => rho.ln(),
        }
    }

    pub fn sample(&self, grid: &Grid64) -> morrey_core::Result<SampledFunction64> {
        let dim = grid.dim();
        SampledFunction64::sample(grid, |p| self.eval(&p[..dim]))
    }
}

impl FromStr for FunctionArg {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        let kind = s.split(':').next().unwrap_or_default();
        let f = match kind {
            "zero" => {
                fields(s, "function", 1)?;
                FunctionArg::Zero
            }
            "step" => {
                fields(s, "function", 1)?;
                FunctionArg::Step
            }
            "log" => {
                fields(s, "function", 1)?;
                FunctionArg::Log
            }
            "const" => FunctionArg::Constant(number("function", fields(s, "function", 2)?[1])?),
            "powerbump" => FunctionArg::PowerBump(number("function", fields(s, "function", 2)?[1])?),
            "smooth" => FunctionArg::Smooth(number("function", fields(s, "function", 2)?[1])?),
            "indicator" => {
                let arg = fields(s, "function", 2)?[1];
                let (r, c) = match arg.split_once('@') {
                    Some((r, c)) => (r, Some(c)),
                    None => (arg, None),
                };
                let center = match c {
                    Some(c) => c
                        .split(',')
                        .map(|v| number("function", v))
                        .collect::<Result<Vec<_>, _>>()?,
                    None => Vec::new(),
                };
                if center.len() > 3 {
                    return Err(ParseError(format!(
                        "indicator center `{s}` has more than 3 coordinates"
                    )));
                }
                FunctionArg::Indicator {
                    radius: number("function", r)?,
                    center,
                }
            }
            _ => {
                return Err(ParseError(format!(
                "unknown function `{s}` (expected zero, const:c, indicator:s[@x], powerbump:γ, smooth:s, step or log)"
            )))
            }
        };
        match &f {
            FunctionArg::Indicator { radius, .. } if *radius <= 0.0 => {
                Err(ParseError(format!("indicator radius must be positive in `{s}`")))
            }
            FunctionArg::Smooth(w) if *w <= 0.0 => Err(ParseError(format!("bump width must be positive in `{s}`"))),
            FunctionArg::PowerBump(g) if *g < 0.0 => {
                Err(ParseError(format!("power bump exponent must be non-negative in `{s}`")))
            }
            _ => Ok(f),
        }
    }
}

impl fmt::Display for FunctionArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionArg::Zero => f.write_str("zero"),
            FunctionArg::Constant(c) => write!(f, "const:{c}"),
            FunctionArg::Indicator { radius, center } => {
                write!(f, "indicator:{radius}")?;
                if !center.is_empty() {
                    let parts: Vec<String> = center.iter().map(|c| c.to_string()).collect();
                    write!(f, "@{}", parts.join(","))?;
                }
                Ok(())
            }
            FunctionArg::PowerBump(g) => write!(f, "powerbump:{g}"),
            FunctionArg::Smooth(s) => write!(f, "smooth:{s}"),
            FunctionArg::Step => f.write_str("step"),
            FunctionArg::Log => f.write_str("log"),
        }
    }
}

string_serde!(FunctionArg);

/// `[-L, L]^n` with `cells` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridArg {
    pub dim: usize,
    pub half_width: f64,
    pub cells: usize,
}

impl GridArg {
    pub fn build(&self) -> morrey_core::Result<Grid64> {
        Grid64::new(self.dim, self.half_width, self.cells)
    }
}

impl FromStr for GridArg {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        let f = fields(s, "grid", 3)?;
        let dim: usize = f[0]
            .parse()
            .map_err(|_| ParseError(format!("grid dimension `{}` is not an integer", f[0])))?;
        let half = number("grid", f[1])?;
        let cells: usize = f[2]
            .parse()
            .map_err(|_| ParseError(format!("grid cell count `{}` is not an integer", f[2])))?;
        if !(1..=3).contains(&dim) {
            return Err(ParseError(format!("grid dimension must be 1, 2 or 3, got {dim}")));
        }
        if !(half > 0.0) {
            return Err(ParseError(format!("grid half width must be positive, got {half}")));
        }
        if cells < 2 {
            return Err(ParseError(format!("grid needs at least 2 cells per axis, got {cells}")));
        }
        Ok(GridArg {
            dim,
            half_width: half,
            cells,
        })
    }
}

impl fmt::Display for GridArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.dim, self.half_width, self.cells)
    }
}

string_serde!(GridArg);
