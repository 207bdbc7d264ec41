//! Report serialization. Reals are written with 17 significant digits so a
//! report round-trips bit-exactly; nothing time-dependent is recorded.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::Setup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A hypothesis of the statement failed; no claim is made about the ratios.
    HypothesesNotSatisfied,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::HypothesesNotSatisfied => "HYPOTHESES NOT SATISFIED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridInfo {
    pub dim: usize,
    pub half_width: f64,
    pub cells: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub config_hash: String,
    pub grid: GridInfo,
    pub refined_cells: usize,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub weight: String,
    pub phi: String,
    pub psi: String,
}

impl Metadata {
    pub fn new(setup: &Setup) -> Self {
        let g = &setup.grid;
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            core_version: morrey_core::VERSION,
            config_hash: setup.config.hash(),
            grid: GridInfo {
                dim: g.dim(),
                half_width: g.half_width(),
                cells: g.cells_per_axis(),
                spacing: g.spacing(),
            },
            refined_cells: 2 * g.cells_per_axis(),
            p: setup.exps.p,
            q: setup.exps.q,
            alpha: setup.exps.alpha,
            weight: setup.config.weight.to_string(),
            phi: setup.config.phi.to_string(),
            psi: setup.psi_arg().to_string(),
        }
    }
}

/// A named table of reals for external plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Curve {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with every `f64` as `{:.16e}`. Non-finite values become
/// `null` (serde_json does this before reaching the formatter).
struct SigDigits<'a>(PrettyFormatter<'a>);

impl Formatter for SigDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_real(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        w.write_all(format!("{v:.8e}").as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

pub fn to_csv(curve: &Curve) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&curve.columns)?;
    for row in &curve.rows {
        w.write_record(row.iter().map(|v| fmt_real(*v)))?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

/// Writes `<stem>.json` and `<stem>-<curve>.csv` under `dir`, returning the
/// paths written.
pub fn write_report<T: Serialize>(dir: &Path, stem: &str, body: &T, curves: &[Curve]) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = dir.join(format!("{stem}.json"));
    std::fs::write(&json, to_json(body)?)?;
    written.push(json);
    for c in curves {
        let path = dir.join(format!("{stem}-{}.csv", c.name));
        std::fs::write(&path, to_csv(c)?)?;
        written.push(path);
    }
    Ok(written)
}
