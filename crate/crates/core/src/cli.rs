//! Command-line front end: `bands`, `homogeneity`, `pt-run`, `verify` and
//! `norms`, each writing a JSON report (default) or a CSV table.
//!
//! Exit codes: `0` for a completed run (whatever its verdict), `2` for
//! malformed arguments or input, `3` for numerical failures. Diagnostics and
//! the one-line verdict go to standard error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cmv::{ArcBandStructure, PeriodicCmv};
use crate::error::{Error, Result};
use crate::homogeneity::{arc_homogeneity_profile, homogeneity_profile, HomogeneityReport, LatticeSpec};
use crate::pt::PtConditionReport;
use crate::verify::{self, Ensemble, QMode, StepOptions, SCHEMA_VERSION};
use crate::{
    certify_arc_homogeneity, certify_homogeneity, generate_pt_sequence, BandStructure, CircularArcSet, Interval,
    IntervalSet, PeriodicJacobi, PiecewisePotential, PtKind, PtSequence, Schedule,
};

/// Exit code for malformed arguments or input.
pub const EXIT_INPUT: i32 = 2;
/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable giving the default worker-thread count.
pub const THREADS_ENV: &str = "PTSPEC_THREADS";

/// Grid of `b` values for the PT-condition diagnostic of `pt-run`.
pub const PT_CONDITION_B_GRID: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

#[derive(Debug, Parser)]
#[command(
    name = "ptspec",
    version,
    about = "Periodic and limit-periodic spectra, homogeneity certification and estimate checks"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (standard output if omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: $PTSPEC_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band structure of a periodic operator.
    Bands(BandsArgs),
    /// Lattice certification of τ-homogeneity for a set of intervals or arcs.
    Homogeneity(HomogeneityArgs),
    /// Generate (or load) a PT sequence and run the step-by-step homogeneity budget.
    PtRun(PtRunArgs),
    /// Fit or verify a quantitative estimate over an ensemble or a sequence.
    Verify(VerifyArgs),
    /// Besicovitch, Stepanov and sup norms of a piecewise-constant potential.
    Norms(NormsArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "operator")]
pub struct OperatorArgs {
    /// Jacobi operator: inline JSON or a file path.
    #[arg(long)]
    pub jacobi: Option<String>,
    /// Piecewise-constant potential: inline JSON or a file path.
    #[arg(long)]
    pub continuum: Option<String>,
    /// CMV operator: inline JSON or a file path.
    #[arg(long)]
    pub cmv: Option<String>,
}

#[derive(Debug, Args)]
pub struct BandsArgs {
    #[command(flatten)]
    pub operator: OperatorArgs,
    /// Energy window top (required for continuum operators).
    #[arg(long)]
    pub emax: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// Interior x-samples per component.
    #[arg(long)]
    pub mesh: Option<usize>,
    /// Depth K of the scale ladder δ0·2^-k, k = 0..=K.
    #[arg(long)]
    pub ladder_depth: Option<u32>,
}

impl LatticeArgs {
    fn spec(&self) -> LatticeSpec {
        let mut spec = LatticeSpec::default();
        if let Some(m) = self.mesh {
            spec.mesh_per_band = m;
        }
        if let Some(d) = self.ladder_depth {
            spec.ladder_depth = d;
        }
        spec
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "input_set")]
pub struct SetArgs {
    /// Interval set on the line: inline JSON or a file path.
    #[arg(long)]
    pub set: Option<String>,
    /// Arc set on the circle: inline JSON or a file path.
    #[arg(long)]
    pub arcs: Option<String>,
}

#[derive(Debug, Args)]
pub struct HomogeneityArgs {
    #[command(flatten)]
    pub input: SetArgs,
    /// Homogeneity threshold τ in (0, 1).
    #[arg(long)]
    pub tau: f64,
    /// Largest scale δ0 of the certification lattice.
    #[arg(long)]
    pub delta0: f64,
    #[command(flatten)]
    pub lattice: LatticeArgs,
}

/// A PT sequence, loaded or generated.
#[derive(Debug, Args)]
pub struct SequenceArgs {
    /// Load a sequence (or a `pt-run` report) instead of generating one.
    #[arg(long, conflicts_with_all = ["kind", "levels", "seed", "schedule"])]
    pub sequence: Option<String>,
    /// Operator kind of the generated sequence.
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Number of levels N.
    #[arg(long)]
    pub levels: Option<usize>,
    /// RNG seed of the generated sequence (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// `default`, `superexp:<base>`, `exp:<rate>`, or a JSON schedule.
    #[arg(long)]
    pub schedule: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Continuum,
    Jacobi,
    Cmv,
}

impl From<KindArg> for PtKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Continuum => PtKind::Continuum,
            KindArg::Jacobi => PtKind::Jacobi,
            KindArg::Cmv => PtKind::Cmv,
        }
    }
}

impl SequenceArgs {
    fn resolve(&self) -> Result<PtSequence> {
        if let Some(src) = &self.sequence {
            let v: serde_json::Value = serde_json::from_str(&read_input(src)?)?;
            // a pt-run report carries the sequence under "sequence"
            let v = match v {
                serde_json::Value::Object(mut m) if m.contains_key("sequence") => m.remove("sequence").unwrap(),
                v => v,
            };
            return Ok(serde_json::from_value(v)?);
        }
        let kind = self
            .kind
            .ok_or_else(|| Error::invalid("give --sequence, or --kind (with optional --levels, --seed, --schedule)"))?;
        let schedule: Schedule = match &self.schedule {
            Some(s) => s.parse()?,
            None => Schedule::default(),
        };
        generate_pt_sequence(kind.into(), self.seed.unwrap_or(0), self.levels.unwrap_or(4), &schedule)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QModeArg {
    FiniteLevel,
    UpperProxy,
}

#[derive(Debug, Args)]
pub struct PtRunArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Homogeneity threshold τ.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Energy window top for continuum sequences.
    #[arg(long, default_value_t = 50.0)]
    pub emax: f64,
    /// Replace the computed δ0.
    #[arg(long)]
    pub delta0: Option<f64>,
    /// Which level-size bound enters K.
    #[arg(long, value_enum, default_value_t = QModeArg::UpperProxy)]
    pub q_mode: QModeArg,
    /// Derivative-bound constant C (fitted if omitted).
    #[arg(long)]
    pub c: Option<f64>,
    /// Edge-stability constant C1 (fitted if omitted).
    #[arg(long)]
    pub c1: Option<f64>,
    /// Level-size bound Q (computed if omitted).
    #[arg(long)]
    pub q: Option<f64>,
    #[command(flatten)]
    pub lattice: LatticeArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Derivative,
    BandLength,
    EdgeStability,
    GroundState,
    DerivativeJacobi,
    EdgeStabilityJacobi,
    DerivativeCmv,
    EdgeStabilityCmv,
    Semicontinuity,
    GapSums,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Estimate to fit or verify.
    #[arg(long, value_enum)]
    pub check: Check,
    /// Ensemble: inline JSON or a file path.
    #[arg(long)]
    pub ensemble: Option<String>,
    /// Check this constant instead of fitting one.
    #[arg(long)]
    pub constant: Option<f64>,
    /// Energy window top (continuum checks and sequences).
    #[arg(long)]
    pub emax: Option<f64>,
    /// Periodic eigenvalues per pair for edge-stability.
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    /// Semicontinuity interval `[lo, hi]` as JSON (default: first band cluster).
    #[arg(long)]
    pub interval: Option<String>,
    #[command(flatten)]
    pub sequence: SequenceArgs,
}

#[derive(Debug, Args)]
pub struct NormsArgs {
    /// Piecewise-constant potential: inline JSON or a file path.
    #[arg(long)]
    pub continuum: String,
    /// Report the norms of `continuum − minus` instead.
    #[arg(long)]
    pub minus: Option<String>,
}

/// Report of `ptspec bands`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandsOutput {
    pub schema_version: u32,
    #[serde(flatten)]
    pub result: BandsResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandsResult {
    Jacobi {
        operator: PeriodicJacobi,
        bands: BandStructure,
    },
    Continuum {
        operator: PiecewisePotential,
        window_top: f64,
        bands: BandStructure,
    },
    Cmv {
        operator: PeriodicCmv,
        bands: ArcBandStructure,
    },
}

/// Report of `ptspec homogeneity`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityOutput {
    pub schema_version: u32,
    /// `line` or `circle`.
    pub geometry: String,
    #[serde(flatten)]
    pub report: HomogeneityReport,
}

/// Report of `ptspec pt-run`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtRunOutput {
    pub schema_version: u32,
    pub sequence: PtSequence,
    pub pt_condition: PtConditionReport,
    pub budget: verify::StepHomogeneityBudget,
}

/// Report of `ptspec norms`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormsOutput {
    pub schema_version: u32,
    pub period: f64,
    pub besicovitch: f64,
    pub stepanov: f64,
    pub sup: f64,
    /// True when the norms are of a difference `V − W`.
    pub difference: bool,
}

/// Rendered output of one run.
struct Outcome {
    body: Vec<u8>,
    verdict: Option<String>,
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    match execute(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(&cli, &outcome.body) {
                eprintln!("error: {e}");
                return exit_code(&e);
            }
            if let Some(v) = outcome.verdict {
                eprintln!("{v}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point of the `ptspec` binary.
pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}

fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERICAL
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) if !s.trim().is_empty() => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("{THREADS_ENV} must be a thread count, got {s:?}")))?,
            ),
            _ => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::invalid("thread count must be at least 1"));
        }
        // fails only if the pool is already built (repeated in-process runs)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn emit(cli: &Cli, body: &[u8]) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, body)?,
        None => {
            let mut out = std::io::stdout().lock();
            // a closed downstream pipe (e.g. `| head`) is not an error
            match out.write_all(body).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

/// Inline JSON if the argument starts with `{` or `[`, otherwise a file path.
fn read_input(arg: &str) -> Result<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::invalid(format!("cannot read input file {arg:?}: {e}")))
    }
}

fn parse<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T> {
    Ok(serde_json::from_str(&read_input(arg)?)?)
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut body = serde_json::to_vec_pretty(value)?;
    body.push(b'\n');
    Ok(body)
}

fn csv_body(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut body = Vec::new();
    write(&mut body)?;
    Ok(body)
}

fn verdict(pass: bool, what: &str) -> Option<String> {
    Some(format!("{}: {what}", if pass { "PASS" } else { "FAIL" }))
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Bands(a) => cmd_bands(a, cli.format),
        Command::Homogeneity(a) => cmd_homogeneity(a, cli.format),
        Command::PtRun(a) => cmd_pt_run(a, cli.format),
        Command::Verify(a) => cmd_verify(a, cli.format),
        Command::Norms(a) => cmd_norms(a, cli.format),
    }
}

fn cmd_bands(a: &BandsArgs, format: Format) -> Result<Outcome> {
    let o = &a.operator;
    let result = if let Some(src) = &o.jacobi {
        let operator: PeriodicJacobi = parse(src)?;
        let bands = operator.band_structure()?;
        BandsResult::Jacobi { operator, bands }
    } else if let Some(src) = &o.continuum {
        let operator: PiecewisePotential = parse(src)?;
        let window_top = a
            .emax
            .ok_or_else(|| Error::invalid("--emax is required for continuum operators"))?;
        let bands = operator.band_structure_window(window_top)?;
        BandsResult::Continuum {
            operator,
            window_top,
            bands,
        }
    } else if let Some(src) = &o.cmv {
        let operator: PeriodicCmv = parse(src)?;
        let bands = operator.arc_band_structure()?;
        BandsResult::Cmv { operator, bands }
    } else {
        return Err(Error::invalid("give one of --jacobi, --continuum, --cmv"));
    };
    let body = match format {
        Format::Json => json(&BandsOutput {
            schema_version: SCHEMA_VERSION,
            result,
        })?,
        Format::Csv => csv_body(|buf| match &result {
            BandsResult::Jacobi { bands, .. } | BandsResult::Continuum { bands, .. } => bands.write_csv(buf),
            BandsResult::Cmv { bands, .. } => write_arcs_csv(&bands.arcs, buf),
        })?,
    };
    Ok(Outcome { body, verdict: None })
}

fn write_arcs_csv(arcs: &CircularArcSet, out: &mut Vec<u8>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["arc_index", "start", "end", "length"])?;
    for (i, (s, e)) in arcs.arcs().into_iter().enumerate() {
        w.write_record([(i + 1).to_string(), s.to_string(), e.to_string(), (e - s).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_homogeneity(a: &HomogeneityArgs, format: Format) -> Result<Outcome> {
    let spec = a.lattice.spec();
    let (geometry, report, rows) = if let Some(src) = &a.input.set {
        let set: IntervalSet = parse(src)?;
        let report = certify_homogeneity(&set, a.tau, a.delta0, &spec)?;
        let rows = match format {
            Format::Csv => homogeneity_profile(&set, a.delta0, &spec)?,
            Format::Json => Vec::new(),
        };
        ("line", report, rows)
    } else if let Some(src) = &a.input.arcs {
        let set: CircularArcSet = parse(src)?;
        let report = certify_arc_homogeneity(&set, a.tau, a.delta0, &spec)?;
        let rows = match format {
            Format::Csv => arc_homogeneity_profile(&set, a.delta0, &spec)?,
            Format::Json => Vec::new(),
        };
        ("circle", report, rows)
    } else {
        return Err(Error::invalid("give one of --set, --arcs"));
    };
    let v = verdict(
        report.pass,
        &format!(
            "min density {:.6} at x = {:.6e}, delta = {:.3e} (tau = {})",
            report.min_density, report.witness_x, report.witness_delta, report.tau
        ),
    );
    let body = match format {
        Format::Json => json(&HomogeneityOutput {
            schema_version: SCHEMA_VERSION,
            geometry: geometry.into(),
            report,
        })?,
        Format::Csv => csv_body(|buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["x", "delta", "density"])?;
            for r in &rows {
                w.write_record([r.x.to_string(), r.delta.to_string(), r.density.to_string()])?;
            }
            w.flush()?;
            Ok(())
        })?,
    };
    Ok(Outcome { body, verdict: v })
}

fn cmd_pt_run(a: &PtRunArgs, format: Format) -> Result<Outcome> {
    let sequence = a.sequence.resolve()?;
    let opts = StepOptions {
        tau: a.tau,
        e_max: a.emax,
        constants: verify::KInputs {
            c: a.c,
            c1: a.c1,
            q: a.q,
        },
        q_mode: match a.q_mode {
            QModeArg::FiniteLevel => QMode::FiniteLevel,
            QModeArg::UpperProxy => QMode::UpperProxy,
        },
        lattice: a.lattice.spec(),
        delta0_override: a.delta0,
        ..StepOptions::default()
    };
    let budget = verify::step_homogeneity(&sequence, &opts)?;
    let pt_condition = sequence.check_pt_condition(&PT_CONDITION_B_GRID)?;
    let what = match &budget.failure {
        Some(f) => f.clone(),
        None => format!(
            "{} {}-level sequence, K = {:.6}, delta0 = {:.6e}, tail {:.3e} <= {:.3e}",
            budget.kind,
            budget.levels_supplied,
            budget.constants.k,
            budget.delta0,
            budget.tail_sum,
            budget.tail_threshold
        ),
    };
    let v = verdict(budget.pass, &what);
    let body = match format {
        Format::Json => json(&PtRunOutput {
            schema_version: SCHEMA_VERSION,
            sequence,
            pt_condition,
            budget,
        })?,
        Format::Csv => csv_body(|buf| budget.write_replay_csv(buf))?,
    };
    Ok(Outcome { body, verdict: v })
}

fn cmd_verify(a: &VerifyArgs, format: Format) -> Result<Outcome> {
    let ensemble = || -> Result<Ensemble> {
        let src = a
            .ensemble
            .as_deref()
            .ok_or_else(|| Error::invalid("this check needs --ensemble"))?;
        parse(src)
    };
    let emax = || a.emax.ok_or_else(|| Error::invalid("this check needs --emax"));
    let fit = match a.check {
        Check::Semicontinuity | Check::GapSums => None,
        c => {
            let name = c
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
                .to_string();
            Some(verify::run_ensemble_check(
                &name,
                &ensemble()?,
                a.constant,
                a.emax,
                a.n_max,
            )?)
        }
    };
    if let Some(fit) = fit {
        let v = verdict(
            fit.pass,
            &format!(
                "{} {} = {:.9} ({} samples, {} violations)",
                fit.check, fit.constant_name, fit.constant_used, fit.samples, fit.violations
            ),
        );
        let body = match format {
            Format::Json => json(&fit)?,
            Format::Csv => csv_body(|buf| fit.write_csv(buf))?,
        };
        return Ok(Outcome { body, verdict: v });
    }
    let seq = a.sequence.resolve()?;
    let e_max = match seq.kind {
        PtKind::Continuum => emax()?,
        _ => a.emax.unwrap_or(f64::INFINITY),
    };
    if a.check == Check::Semicontinuity {
        let interval: Option<Interval> = a.interval.as_deref().map(parse).transpose()?;
        let r = verify::verify_semicontinuity(&seq, interval, e_max)?;
        let v = verdict(
            r.pass,
            &format!(
                "semicontinuity deficit {:.3e}, tolerance {:.3e}",
                r.deficit, r.tolerance
            ),
        );
        let body = match format {
            Format::Json => json(&r)?,
            Format::Csv => csv_body(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["level", "measure", "inclusion_excess", "inclusion_budget"])?;
                for (i, m) in r.measures.iter().enumerate() {
                    let budget = r
                        .inclusion_budget
                        .as_ref()
                        .map(|b| b[i].to_string())
                        .unwrap_or_default();
                    w.write_record([
                        (i + 1).to_string(),
                        m.to_string(),
                        r.inclusion_excess[i].to_string(),
                        budget,
                    ])?;
                }
                w.flush()?;
                Ok(())
            })?,
        };
        return Ok(Outcome { body, verdict: v });
    }
    let r = verify::gap_length_partial_sums(&seq, e_max)?;
    let v = Some(format!(
        "INFO: gap-length partial sums over {} levels (nondecreasing within tolerance: {})",
        r.levels.len(),
        r.nondecreasing_within_tolerance
    ));
    let body = match format {
        Format::Json => json(&r)?,
        Format::Csv => csv_body(|buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["level", "period", "gap_index", "partial_sum"])?;
            for l in &r.levels {
                for (j, s) in l.partial_sums.iter().enumerate() {
                    w.write_record([
                        l.level.to_string(),
                        l.period.to_string(),
                        (j + 1).to_string(),
                        s.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(())
        })?,
    };
    Ok(Outcome { body, verdict: v })
}

fn cmd_norms(a: &NormsArgs, format: Format) -> Result<Outcome> {
    let v: PiecewisePotential = parse(&a.continuum)?;
    let (target, difference) = match &a.minus {
        Some(src) => {
            let w: PiecewisePotential = parse(src)?;
            (v.difference(&w)?, true)
        }
        None => (v, false),
    };
    let out = NormsOutput {
        schema_version: SCHEMA_VERSION,
        period: target.period(),
        besicovitch: target.besicovitch_norm(),
        stepanov: target.stepanov_norm(),
        sup: target.sup_norm(),
        difference,
    };
    let body = match format {
        Format::Json => json(&out)?,
        Format::Csv => csv_body(|buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["period", "besicovitch", "stepanov", "sup", "difference"])?;
            w.write_record([
                out.period.to_string(),
                out.besicovitch.to_string(),
                out.stepanov.to_string(),
                out.sup.to_string(),
                out.difference.to_string(),
            ])?;
            w.flush()?;
            Ok(())
        })?,
    };
    Ok(Outcome { body, verdict: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::invalid("x")), EXIT_INPUT);
        assert_eq!(exit_code(&Error::EmptySet), EXIT_INPUT);
        assert_eq!(exit_code(&Error::Numerical("x".into())), EXIT_NUMERICAL);
    }

    #[test]
    fn inline_json_is_detected() {
        assert_eq!(read_input(" {\"a\":1}").unwrap(), " {\"a\":1}");
        assert!(read_input("/nonexistent/file.json").unwrap_err().is_input_error());
    }

    #[test]
    fn bands_output_round_trips() {
        let j = PeriodicJacobi::new(vec![1.0, 1.0], vec![1.0, -1.0]).unwrap();
        let out = BandsOutput {
            schema_version: SCHEMA_VERSION,
            result: BandsResult::Jacobi {
                bands: j.band_structure().unwrap(),
                operator: j,
            },
        };
        let text = serde_json::to_string(&out).unwrap();
        assert!(text.contains("\"kind\":\"jacobi\""));
        assert_eq!(serde_json::from_str::<BandsOutput>(&text).unwrap(), out);
    }
}
