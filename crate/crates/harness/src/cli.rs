//! `morrey-lab` command line. Exit codes: 0 when every requested check
//! passes, 1 when a check fails or cannot be completed, 2 on invalid
//! invocation or configuration.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use morrey_core::{
    ap_characteristic, apq_characteristic, bmo_seminorm, commutator_integral, commutator_maximal, condition_31,
    condition_32, condition_34, condition_35, envelope_class_check, fractional_integral, fractional_maximal,
    morrey_quasinorm, truncation_warning, vanishing_check_auto, ConditionOptions, ConditionReport, OperatorParams64,
    PointValues,
};

use crate::config::{family_for, ConfigError, ExperimentConfig, Overrides, Setup};
use crate::experiments::{
    example36_verify, lemma22_verify, lemma23_verify, theorem31_experiment, theorem33_experiment,
};
use crate::inputs::{EnvelopeArg, FunctionArg, GridArg, WeightArg};
use crate::report::{fmt_real, write_report, Curve, Verdict};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "morrey-lab",
    version,
    about = "Numerical checks for fractional operators on weighted Morrey spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Config file plus flag overrides shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct SetupArgs {
    /// TOML config; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grid as `n:L:cells`.
    #[arg(long)]
    pub grid: Option<GridArg>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Weight: `const:c`, `power:e` or `pinched:C:D:s`.
    #[arg(long = "w")]
    pub weight: Option<WeightArg>,
    /// Envelope `pow:λ`.
    #[arg(long)]
    pub phi: Option<EnvelopeArg>,
    /// Target envelope; defaults to `pow:λq/p`.
    #[arg(long)]
    pub psi: Option<EnvelopeArg>,
    /// Test function; repeat to build a roster.
    #[arg(long = "f")]
    pub functions: Vec<FunctionArg>,
    /// BMO symbol.
    #[arg(long = "b")]
    pub symbol: Option<FunctionArg>,
    /// Report directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl SetupArgs {
    pub fn config(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&Overrides {
            grid: self.grid,
            p: self.p,
            alpha: self.alpha,
            weight: self.weight,
            phi: self.phi,
            psi: self.psi,
            roster: self.functions.clone(),
            symbol: self.symbol.clone(),
            output_dir: self.out_dir.clone(),
        });
        Ok(cfg)
    }

    fn setup(&self) -> Result<Setup, ConfigError> {
        self.config()?.resolve()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightClass {
    Ap,
    Apq,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Operator {
    Ialpha,
    Malpha,
    IalphaB,
    MalphaB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Lemma22,
    Lemma23,
    Thm31,
    Thm33,
    Example36,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// A_p and A_{p,q} characteristics of the weight.
    CheckWeight {
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long, value_enum, default_value = "both")]
        class: WeightClass,
    },
    /// Admissibility of phi for w^p and psi for w^q.
    CheckEnvelope {
        #[command(flatten)]
        setup: SetupArgs,
    },
    /// The line conditions at one delta and the ball conditions over the family.
    CheckConditions {
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    /// Applies an operator to the first --f and writes the field as CSV.
    ApplyOp {
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long, value_enum)]
        op: Operator,
        /// Output CSV; the value at the origin is always printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weighted Morrey quasinorm of the first --f with envelope phi.
    MorreyNorm {
        #[command(flatten)]
        setup: SetupArgs,
        /// Fail unless the vanishing surrogate holds.
        #[arg(long)]
        require_vanishing: bool,
    },
    /// BMO seminorm of --b over the ball family.
    Bmo {
        #[command(flatten)]
        setup: SetupArgs,
    },
    /// Runs one verification experiment and writes its report.
    Verify {
        #[arg(value_enum)]
        target: Target,
        #[command(flatten)]
        setup: SetupArgs,
    },
    /// Runs every experiment.
    All {
        #[command(flatten)]
        setup: SetupArgs,
    },
}

/// Parses `argv` and runs the command, printing to stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock())
}

/// As [`run`] with command output sent to `out`; diagnostics still go to
/// stderr.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match dispatch(cli.command, out) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_FAIL
            }
        }
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn opt_real(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), fmt_real)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> anyhow::Result<bool> {
    match cmd {
        Command::CheckWeight { setup, class } => check_weight(&setup.setup()?, class, out),
        Command::CheckEnvelope { setup } => check_envelope(&setup.setup()?, out),
        Command::CheckConditions { setup, delta } => {
            if !(delta > 0.0) {
                return Err(ConfigError(format!("delta must be positive, got {delta}")).into());
            }
            check_conditions(&setup.setup()?, delta, out)
        }
        Command::ApplyOp { setup, op, out: path } => apply_op(&setup, op, path, out),
        Command::MorreyNorm {
            setup,
            require_vanishing,
        } => morrey_norm(&setup, require_vanishing, out),
        Command::Bmo { setup } => bmo(&setup, out),
        Command::Verify { target, setup } => verify(target, &setup.setup()?, out),
        Command::All { setup } => verify(Target::All, &setup.setup()?, out),
    }
}

fn check_weight(s: &Setup, class: WeightClass, out: &mut dyn Write) -> anyhow::Result<bool> {
    let mut pass = true;
    writeln!(out, "weight {} on {}", s.config.weight, s.config.grid)?;
    let mut show = |name: &str, r: &morrey_core::WeightClassReport<f64>, out: &mut dyn Write| -> anyhow::Result<()> {
        writeln!(
            out,
            "{name}: characteristic {} drift {} growth {} integrable {} in class {}",
            fmt_real(r.characteristic),
            opt_real(r.refinement_drift),
            yes(r.growth_detected),
            yes(r.locally_integrable),
            yes(r.in_class)
        )?;
        pass &= r.in_class;
        Ok(())
    };
    if matches!(class, WeightClass::Ap | WeightClass::Both) {
        let r = ap_characteristic(&s.weight, s.exps.p, &s.family, &s.grid)?;
        show("A_p", &r, out)?;
    }
    if matches!(class, WeightClass::Apq | WeightClass::Both) {
        let r = apq_characteristic(&s.weight, &s.exps, &s.family, &s.grid)?;
        show("A_{p,q}", &r, out)?;
    }
    Ok(pass)
}

fn check_envelope(s: &Setup, out: &mut dyn Write) -> anyhow::Result<bool> {
    let mut pass = true;
    for (name, env, arg, wpow) in [
        ("phi", &s.phi, s.config.phi, s.exps.p),
        ("psi", &s.psi, s.psi_arg(), s.exps.q),
    ] {
        let c = envelope_class_check(env, &s.weight, wpow, &s.family, &s.grid)?;
        writeln!(
            out,
            "{name} = {arg} against w^{}: mass/envelope vanishes {} inf over r > 1 {} admissible {}",
            fmt_real(wpow),
            yes(c.cond_23),
            fmt_real(c.inf_24),
            yes(c.cond_23 && c.cond_24)
        )?;
        pass &= c.cond_23 && c.cond_24;
    }
    Ok(pass)
}

fn print_condition(name: &str, r: &ConditionReport<f64>, out: &mut dyn Write) -> anyhow::Result<()> {
    let witness = r
        .witness
        .map(|(c, rad)| format!(" witness center {:?} radius {}", &c[..1], fmt_real(rad)))
        .unwrap_or_default();
    writeln!(
        out,
        "{name}: value {} divergent {} tail exponent {} drift {} growth {} holds {}{witness}",
        opt_real(r.value()),
        yes(r.divergent),
        fmt_real(r.tail_exponent),
        opt_real(r.drift),
        yes(r.growth_detected),
        yes(r.holds)
    )?;
    Ok(())
}

fn check_conditions(s: &Setup, delta: f64, out: &mut dyn Write) -> anyhow::Result<bool> {
    let (p, q) = (s.exps.p, s.exps.q);
    let dim = s.grid.dim();
    let opts = ConditionOptions::default();
    let centers = s.family.centers();
    writeln!(
        out,
        "phi {} psi {} weight {} p {} q {} delta {}",
        s.config.phi,
        s.psi_arg(),
        s.config.weight,
        fmt_real(p),
        fmt_real(q),
        fmt_real(delta)
    )?;
    let reports = [
        (
            "condition_31",
            condition_31(&s.phi, p, &s.weight, q, delta, centers, dim, &opts)?,
        ),
        (
            "condition_32",
            condition_32(&s.phi, p, &s.psi, q, &s.weight, &s.family, &opts)?,
        ),
        (
            "condition_34",
            condition_34(&s.phi, p, &s.weight, q, delta, centers, dim, &opts)?,
        ),
        (
            "condition_35",
            condition_35(&s.phi, p, &s.psi, q, &s.weight, &s.family, &opts)?,
        ),
    ];
    let mut pass = true;
    for (name, r) in &reports {
        print_condition(name, r, out)?;
        pass &= r.holds;
    }
    if reports.iter().any(|(_, r)| r.divergent) {
        writeln!(out, "divergence: the integrand does not decay at infinity")?;
    }
    Ok(pass)
}

fn first_function(cfg: &ExperimentConfig) -> Result<FunctionArg, ConfigError> {
    cfg.roster
        .first()
        .cloned()
        .ok_or_else(|| ConfigError("no test function given (use --f)".into()))
}

fn apply_op(args: &SetupArgs, op: Operator, path: Option<PathBuf>, out: &mut dyn Write) -> anyhow::Result<bool> {
    let cfg = args.config()?;
    let grid = cfg.grid.build().map_err(|e| ConfigError(e.to_string()))?;
    let n = grid.dim() as f64;
    if !(cfg.alpha > 0.0 && cfg.alpha < n) {
        return Err(ConfigError(format!("alpha must lie in (0, {n}), got {}", cfg.alpha)).into());
    }
    let farg = first_function(&cfg)?;
    let f = farg.sample(&grid)?;
    let params = OperatorParams64::new(cfg.alpha, &grid);
    let needs_b = matches!(op, Operator::IalphaB | Operator::MalphaB);
    let b = if needs_b { Some(cfg.symbol.sample(&grid)?) } else { None };
    if let Some(w) = truncation_warning(&f) {
        writeln!(out, "warning: {w}")?;
    }
    let values: PointValues<f64> = match op {
        Operator::Ialpha => fractional_integral(&f, &params)?,
        Operator::Malpha => fractional_maximal(&f, &params)?,
        Operator::IalphaB => commutator_integral(b.as_ref().unwrap(), &f, &params)?,
        Operator::MalphaB => commutator_maximal(b.as_ref().unwrap(), &f, &params)?,
    };
    let field = values.into_field()?;
    let origin = grid.nearest_index(&[0.0; 3]);
    let at = grid.point(origin);
    writeln!(
        out,
        "{op:?} of {farg} on {}: value at origin {} (lattice point {:?})",
        cfg.grid,
        fmt_real(field.value(origin)),
        &at[..grid.dim()]
    )?;
    if let Some(path) = path {
        let cols: Vec<String> = (1..=grid.dim())
            .map(|k| format!("x{k}"))
            .chain(["value".to_string()])
            .collect();
        let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut curve = Curve::new("field", &col_refs);
        for i in 0..grid.len() {
            let mut row: Vec<f64> = grid.point(i)[..grid.dim()].to_vec();
            row.push(field.value(i));
            curve.push(row);
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, crate::report::to_csv(&curve)?).with_context(|| format!("writing {}", path.display()))?;
        writeln!(out, "field written to {}", path.display())?;
    }
    Ok(true)
}

fn morrey_norm(args: &SetupArgs, require_vanishing: bool, out: &mut dyn Write) -> anyhow::Result<bool> {
    let cfg = args.config()?;
    let grid = cfg.grid.build().map_err(|e| ConfigError(e.to_string()))?;
    if !(cfg.p >= 1.0) {
        return Err(ConfigError(format!("p must be at least 1, got {}", cfg.p)).into());
    }
    let family = family_for(&cfg.family, &grid)?;
    let farg = first_function(&cfg)?;
    let f = farg.sample(&grid)?;
    let w = cfg.weight.to_spec();
    let r = morrey_quasinorm(&f, &cfg.phi.to_spec(), cfg.p, &w, cfg.p, &family)?;
    let vanishing = r.quasinorm == 0.0 || vanishing_check_auto(&r)?;
    writeln!(
        out,
        "quasinorm of {farg} with phi {} p {} weight {}: {} at center {:?} radius {}; vanishing {}",
        cfg.phi,
        fmt_real(cfg.p),
        cfg.weight,
        fmt_real(r.quasinorm),
        &r.witness_center[..grid.dim()],
        fmt_real(r.witness_radius),
        yes(vanishing)
    )?;
    for (rad, v) in &r.modulus_curve {
        writeln!(out, "  r {} modulus {}", fmt_real(*rad), fmt_real(*v))?;
    }
    Ok(r.quasinorm.is_finite() && (vanishing || !require_vanishing))
}

fn bmo(args: &SetupArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    let cfg = args.config()?;
    let grid = cfg.grid.build().map_err(|e| ConfigError(e.to_string()))?;
    let family = family_for(&cfg.family, &grid)?;
    let b = cfg.symbol.sample(&grid)?;
    let o = bmo_seminorm(&b, &family)?;
    writeln!(
        out,
        "BMO seminorm of {} on {}: {} at center {:?} radius {}",
        cfg.symbol,
        cfg.grid,
        fmt_real(o.seminorm),
        &o.witness.center[..grid.dim()],
        fmt_real(o.witness.radius)
    )?;
    Ok(o.seminorm.is_finite())
}

#[derive(serde::Serialize)]
struct SuiteEntry {
    experiment: &'static str,
    verdict: Verdict,
    report: String,
}

#[derive(serde::Serialize)]
struct SuiteReport {
    config_hash: String,
    all_pass: bool,
    experiments: Vec<SuiteEntry>,
}

/// Runs one experiment, writes its files and returns its verdict and stem.
pub fn run_experiment(target: Target, s: &Setup) -> anyhow::Result<(Verdict, &'static str, PathBuf)> {
    let dir = &s.config.output_dir;
    let hash = s.config.hash();
    macro_rules! emit {
        ($name:literal, $report:expr) => {{
            let r = $report;
            let stem = format!("{}-{hash}", $name);
            let paths = write_report(dir, &stem, &r, &r.curves)?;
            (r.verdict, $name, paths[0].clone())
        }};
    }
    Ok(match target {
        Target::Lemma22 => emit!("lemma22", lemma22_verify(s)?),
        Target::Lemma23 => emit!("lemma23", lemma23_verify(s)?),
        Target::Thm31 => emit!("thm31", theorem31_experiment(s)?),
        Target::Thm33 => emit!("thm33", theorem33_experiment(s)?),
        Target::Example36 => emit!("example36", example36_verify(s)?),
        Target::All => unreachable!("expanded by the caller"),
    })
}

fn verify(target: Target, s: &Setup, out: &mut dyn Write) -> anyhow::Result<bool> {
    let targets = match target {
        Target::All => vec![
            Target::Lemma22,
            Target::Lemma23,
            Target::Thm31,
            Target::Thm33,
            Target::Example36,
        ],
        t => vec![t],
    };
    let mut entries = Vec::new();
    for t in targets {
        let (verdict, name, path) = run_experiment(t, s)?;
        writeln!(out, "{name}: {} -> {}", verdict.label(), path.display())?;
        entries.push(SuiteEntry {
            experiment: name,
            verdict,
            report: path
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
        });
    }
    let all_pass = entries.iter().all(|e| e.verdict == Verdict::Pass);
    if target == Target::All {
        let hash = s.config.hash();
        let suite = SuiteReport {
            config_hash: hash.clone(),
            all_pass,
            experiments: entries,
        };
        let paths = write_report(&s.config.output_dir, &format!("suite-{hash}"), &suite, &[])?;
        writeln!(
            out,
            "suite: {} -> {}",
            if all_pass { "PASS" } else { "FAIL" },
            paths[0].display()
        )?;
    }
    Ok(all_pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["morrey-lab", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["morrey-lab", "bmo", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["morrey-lab", "bmo", "--b", "nonsense"]), EXIT_USAGE);
        assert_eq!(run(["morrey-lab", "check-weight", "--alpha", "0.49"]), EXIT_USAGE);
        assert_eq!(
            run(["morrey-lab", "verify", "lemma22", "--config", "/nonexistent.toml"]),
            EXIT_USAGE
        );
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["morrey-lab", "--help"]), EXIT_PASS);
    }

    fn capture(argv: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = run_with(argv.iter().copied(), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn bmo_of_step() {
        let (code, text) = capture(&["morrey-lab", "bmo", "--b", "step", "--grid", "1:4:256"]);
        assert_eq!(code, EXIT_PASS);
        assert!(text.contains("5.0000000000000000e-1"), "{text}");
    }

    #[test]
    fn divergent_conditions_exit_one() {
        let (code, text) = capture(&[
            "morrey-lab",
            "check-conditions",
            "--phi",
            "pow:2",
            "--w",
            "const:1",
            "--p",
            "2",
            "--alpha",
            "0.25",
        ]);
        assert_eq!(code, EXIT_FAIL);
        assert!(text.contains("divergence"), "{text}");
    }

    #[test]
    fn apply_op_reports_origin_value() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        let (code, text) = capture(&[
            "morrey-lab",
            "apply-op",
            "--op",
            "ialpha",
            "--alpha",
            "0.5",
            "--f",
            "indicator:1",
            "--grid",
            "1:4:256",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_PASS);
        assert!(text.contains("value at origin"), "{text}");
        let csv = std::fs::read_to_string(&path).unwrap();
        assert_eq!(csv.lines().next(), Some("x1,value"));
        assert_eq!(csv.lines().count(), 257);
    }

    #[test]
    fn weight_and_envelope_checks_pass_on_defaults() {
        assert_eq!(
            capture(&["morrey-lab", "check-weight", "--grid", "1:4:256"]).0,
            EXIT_PASS
        );
        assert_eq!(
            capture(&["morrey-lab", "check-envelope", "--grid", "1:4:256"]).0,
            EXIT_PASS
        );
        assert_eq!(
            capture(&["morrey-lab", "check-weight", "--w", "power:-1", "--grid", "1:4:256"]).0,
            EXIT_FAIL
        );
    }

    #[test]
    fn morrey_norm_vanishing_flag() {
        let base = [
            "morrey-lab",
            "morrey-norm",
            "--p",
            "1",
            "--w",
            "const:1",
            "--f",
            "indicator:1",
            "--require-vanishing",
        ];
        let mut half = base.to_vec();
        half.extend(["--phi", "pow:0.5"]);
        assert_eq!(capture(&half).0, EXIT_PASS);
        let mut one = base.to_vec();
        one.extend(["--phi", "pow:1"]);
        assert_eq!(capture(&one).0, EXIT_FAIL);
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from([
            "morrey-lab",
            "check-envelope",
            "--p",
            "1.5",
            "--w",
            "pinched:1:2:0.5",
            "--f",
            "smooth:1",
            "--f",
            "zero",
        ])
        .unwrap();
        let Command::CheckEnvelope { setup } = cli.command else {
            panic!("wrong subcommand")
        };
        let cfg = setup.config().unwrap();
        assert_eq!(cfg.p, 1.5);
        assert_eq!(cfg.roster, vec![FunctionArg::Smooth(1.0), FunctionArg::Zero]);
        assert_eq!(cfg.alpha, ExperimentConfig::default().alpha);
    }
}
