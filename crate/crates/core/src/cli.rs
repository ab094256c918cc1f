//! Command-line front end: argument parsing, dispatch and exit codes.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::channels::{
    chi_from_kraus, photon_loss_chi, photon_loss_kraus_auto, ChiEvaluator, KrausChannel, LossParams,
};
use crate::charfunc::wigner;
use crate::ddseq::{pulse_schedule, ShiftSet};
use crate::engineering::{
    feasibility_with_margin, spectrum_sweep, CutoffPolicy, SpectrumReport,
    DEFAULT_FEASIBILITY_MARGIN,
};
use crate::error::Error;
use crate::fockspace::{gkp_codestate, magic_state, KetState, LogicalBit, MagicSign, PhasePoint};
use crate::formats::{
    fmt_float, measure_table, render_json, schedule_doc, schedule_table, write_atomic, CsvTable,
};
use crate::twirl::{filter_value, twirl_chi, twirl_measure, FilterKind, TwirlVariant};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid arguments or violated preconditions.
pub const EXIT_PRECONDITION: i32 = 2;
/// Exit status for convergence or numerical failures.
pub const EXIT_CONVERGENCE: i32 = 3;
/// Exit status for I/O failures.
pub const EXIT_IO: i32 = 4;

const DEFAULT_CUTOFF: usize = 150;

#[derive(Debug, Parser)]
#[command(
    name = "gkpdd",
    version,
    about = "GKP twirling, chi-functions and decoupling Hamiltonian engineering"
)]
pub struct Cli {
    /// Fock-space cutoff (initial cutoff for `spectrum`).
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; written atomically. Standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance override `key=value`; known keys: `spectrum`.
    #[arg(long = "tolerance", global = true, value_parser = parse_tolerance)]
    pub tolerance: Vec<(String, f64)>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Logical,
    Stabilizer,
}

impl From<VariantArg> for TwirlVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Logical => TwirlVariant::Logical,
            VariantArg::Stabilizer => TwirlVariant::Stabilizer,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShiftSetArg {
    Logical,
    Stabilizer,
    #[value(name = "pauli_x")]
    PauliX,
    #[value(name = "pauli_z")]
    PauliZ,
}

impl From<ShiftSetArg> for ShiftSet {
    fn from(v: ShiftSetArg) -> Self {
        match v {
            ShiftSetArg::Logical => ShiftSet::Logical,
            ShiftSetArg::Stabilizer => ShiftSet::Stabilizer,
            ShiftSetArg::PauliX => ShiftSet::PauliX,
            ShiftSetArg::PauliZ => ShiftSet::PauliZ,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact weights of the N-level twirl measure.
    TwirlMeasure {
        #[arg(long = "N")]
        level: u32,
        #[arg(long, value_enum, default_value = "logical")]
        variant: VariantArg,
    },
    /// Twirl filter on a square grid of displacements.
    FilterGrid {
        #[arg(long = "N")]
        level: u32,
        #[arg(long, value_enum, default_value = "logical")]
        variant: VariantArg,
        /// Half-width of the grid in both directions.
        #[arg(long, default_value_t = 3.0)]
        range: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 121)]
        points: usize,
    },
    /// Pulse schedule compiled from the N-level measure.
    Schedule {
        #[arg(long = "N")]
        level: u32,
        #[arg(long = "shift-set", value_enum, default_value = "logical")]
        shift_set: ShiftSetArg,
    },
    /// Spectra of the engineered Hamiltonian over a range of levels. Rows that
    /// fail to converge are still written; the exit status is then 3.
    Spectrum {
        /// Single level `N` or inclusive range `a..b`.
        #[arg(long = "N", value_parser = parse_level_range)]
        levels: LevelRange,
        #[arg(long = "e-j", default_value_t = 1.0)]
        e_j: f64,
        #[arg(long = "max-cutoff", default_value_t = 1200)]
        max_cutoff: usize,
    },
    /// Wigner function of a state on a square grid.
    Wigner {
        /// `vacuum`, `fock:N`, `coherent:RE,IM`, `gkp0:DELTA`, `gkp1:DELTA`, `magic+:DELTA`, `magic-:DELTA`.
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 3.0)]
        range: f64,
        #[arg(long, default_value_t = 61)]
        points: usize,
    },
    /// Chi-function of a channel along `beta = alpha + offset` on a square alpha grid.
    Chi {
        /// `identity` or `loss:GAMMA`.
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 2.0)]
        range: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// `RE,IM` offset of beta from alpha.
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        offset: String,
        /// Evaluate from Kraus operators instead of the closed form.
        #[arg(long)]
        kraus: bool,
        /// Apply the logical twirl filter of this level.
        #[arg(long)]
        twirl: Option<u32>,
    },
    /// Timing bounds for an experimental realization.
    CheckParams {
        /// Oscillator angular frequency in rad/s.
        #[arg(long, conflicts_with = "freq", required_unless_present = "freq")]
        omega: Option<f64>,
        /// Oscillator frequency in Hz.
        #[arg(long)]
        freq: Option<f64>,
        #[arg(long = "N", default_value_t = 1)]
        level: u32,
        /// Displacement pulse duration in seconds.
        #[arg(long = "t-x", default_value_t = 0.0)]
        t_x: f64,
        #[arg(long, default_value_t = DEFAULT_FEASIBILITY_MARGIN)]
        margin: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelRange {
    pub first: u32,
    pub last: u32,
}

impl LevelRange {
    pub fn levels(self) -> Vec<u32> {
        (self.first..=self.last).collect()
    }
}

fn parse_level_range(s: &str) -> Result<LevelRange, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|e| format!("bad level '{t}': {e}"))
    };
    let (first, last) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let n = parse(s)?;
            (n, n)
        }
    };
    if first < 1 || last < first {
        return Err(format!("level range '{s}' must satisfy 1 <= a <= b"));
    }
    Ok(LevelRange { first, last })
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad tolerance '{v}': {e}"))?;
    if !(v > 0.0) {
        return Err(format!("tolerance for '{k}' must be positive"));
    }
    Ok((k.to_string(), v))
}

/// Failure of a command, classified by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Convergence(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Convergence(_) => EXIT_CONVERGENCE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Convergence { .. } | Error::Numeric(_) => CliError::Convergence(e.to_string()),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

fn precondition(msg: impl Into<String>) -> CliError {
    CliError::Precondition(msg.into())
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_PRECONDITION
            } else {
                EXIT_OK
            };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cutoff = cli.cutoff.unwrap_or(DEFAULT_CUTOFF);
    if cutoff < 2 {
        return Err(precondition(format!(
            "cutoff must be at least 2, got {cutoff}"
        )));
    }
    let mut spectrum_tol = CutoffPolicy::default().tolerance;
    for (k, v) in &cli.tolerance {
        match k.as_str() {
            "spectrum" => spectrum_tol = *v,
            other => return Err(precondition(format!("unknown tolerance key '{other}'"))),
        }
    }
    // spectrum rows that failed to converge; written out, then reported
    let mut unconverged: Vec<u32> = Vec::new();
    let text = match &cli.command {
        Command::TwirlMeasure { level, variant } => {
            let m = twirl_measure::<f64>(*level, (*variant).into())?;
            render_table(measure_table(&m), cli.format.unwrap_or(Format::Csv))?
        }
        Command::FilterGrid {
            level,
            variant,
            range,
            points,
        } => {
            let kind = FilterKind::new((*variant).into(), *level)?;
            let mut t = CsvTable::new(["re_delta", "im_delta", "filter"]);
            for p in square_grid(*range, *points)? {
                t.push(vec![
                    fmt_float(p.re()),
                    fmt_float(p.im()),
                    fmt_float(filter_value(p, kind)),
                ])?;
            }
            render_table(t, cli.format.unwrap_or(Format::Csv))?
        }
        Command::Schedule { level, shift_set } => {
            let s = pulse_schedule::<f64>(*level, (*shift_set).into())?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => render_json(&schedule_doc(&s))?,
                Format::Csv => schedule_table(&s).render(),
            }
        }
        Command::Spectrum {
            levels,
            e_j,
            max_cutoff,
        } => {
            if *max_cutoff < cutoff {
                return Err(precondition(format!(
                    "max cutoff {max_cutoff} is below cutoff {cutoff}"
                )));
            }
            let policy = CutoffPolicy {
                initial: cutoff,
                max: *max_cutoff,
                tolerance: spectrum_tol,
                ..CutoffPolicy::default()
            };
            let lv = levels.levels();
            let results = spectrum_sweep::<f64>(&lv, *e_j, policy);
            let mut t = CsvTable::new(spectrum_header());
            for (n, r) in lv.iter().zip(results) {
                match r {
                    Ok(rep) => {
                        if !rep.converged {
                            eprintln!("warning: N={n} not converged at cutoff {}", rep.cutoff_used);
                            unconverged.push(*n);
                        }
                        t.push(spectrum_row(&rep))?;
                    }
                    Err(Error::Domain(msg)) => return Err(precondition(msg)),
                    Err(e) => {
                        eprintln!("warning: N={n} failed: {e}");
                        unconverged.push(*n);
                        t.push(failed_spectrum_row(*n))?;
                    }
                }
            }
            render_table(t, cli.format.unwrap_or(Format::Csv))?
        }
        Command::Wigner {
            state,
            range,
            points,
        } => {
            let ket = parse_state(state, cutoff)?;
            let grid = square_grid(*range, *points)?;
            let w = wigner(&ket.density(), &grid)?;
            let mut t = CsvTable::new(["re_alpha", "im_alpha", "wigner"]);
            for (p, v) in grid.iter().zip(w) {
                t.push(vec![fmt_float(p.re()), fmt_float(p.im()), fmt_float(v)])?;
            }
            render_table(t, cli.format.unwrap_or(Format::Csv))?
        }
        Command::Chi {
            channel,
            range,
            points,
            offset,
            kraus,
            twirl,
        } => {
            let mut chi = parse_channel(channel, *kraus, cutoff)?;
            if let Some(n) = twirl {
                chi = twirl_chi(&chi, FilterKind::logical(*n)?);
            }
            let off = parse_point(offset)?;
            let mut t = CsvTable::new([
                "re_alpha", "im_alpha", "re_beta", "im_beta", "re_chi", "im_chi",
            ]);
            for a in square_grid(*range, *points)? {
                let b = a + off;
                let v = chi.eval(a, b);
                t.push(vec![
                    fmt_float(a.re()),
                    fmt_float(a.im()),
                    fmt_float(b.re()),
                    fmt_float(b.im()),
                    fmt_float(v.re),
                    fmt_float(v.im),
                ])?;
            }
            render_table(t, cli.format.unwrap_or(Format::Csv))?
        }
        Command::CheckParams {
            omega,
            freq,
            level,
            t_x,
            margin,
        } => {
            let w = match (omega, freq) {
                (Some(w), _) => *w,
                (None, Some(f)) => 2.0 * std::f64::consts::PI * f,
                (None, None) => return Err(precondition("either --omega or --freq is required")),
            };
            let r = feasibility_with_margin(w, *level, *t_x, *margin)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => render_json(&r)?,
                Format::Csv => {
                    let mut t = CsvTable::new([
                        "N",
                        "osc_frequency",
                        "t_c_min",
                        "t_x_bound",
                        "margin",
                        "t_x",
                        "feasible",
                    ]);
                    t.push(vec![
                        r.level.to_string(),
                        fmt_float(r.osc_frequency),
                        fmt_float(r.t_c_min),
                        fmt_float(r.t_x_bound),
                        fmt_float(r.margin),
                        fmt_float(r.t_x),
                        r.feasible.to_string(),
                    ])?;
                    t.render()
                }
            }
        }
    };
    emit(cli.out.as_ref(), &text)?;
    if !unconverged.is_empty() {
        return Err(CliError::Convergence(format!(
            "levels {unconverged:?} did not converge"
        )));
    }
    Ok(())
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("standard output: {e}")))
        }
    }
}

fn render_table(t: CsvTable, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => t.render(),
        Format::Json => render_json(&t.to_json())?,
    })
}

/// `points x points` grid over `[-range, range]^2`, real part varying slowest.
pub fn square_grid(range: f64, points: usize) -> Result<Vec<PhasePoint<f64>>, CliError> {
    if !(range > 0.0) || !range.is_finite() {
        return Err(precondition("grid range must be positive"));
    }
    if points < 2 {
        return Err(precondition("grid needs at least 2 points per axis"));
    }
    let step = 2.0 * range / (points - 1) as f64;
    let axis: Vec<f64> = (0..points).map(|i| -range + step * i as f64).collect();
    Ok(axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| PhasePoint::new(x, y)))
        .collect())
}

const EIGEN_COLUMNS: usize = 10;

pub fn spectrum_header() -> Vec<String> {
    let mut h = vec!["N".to_string()];
    h.extend((0..EIGEN_COLUMNS).map(|i| format!("E{i}")));
    h.extend(
        [
            "delta_q0",
            "delta_p0",
            "delta_q1",
            "delta_p1",
            "gap",
            "splitting",
            "cutoff_used",
            "converged",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

fn spectrum_row(r: &SpectrumReport<f64>) -> Vec<String> {
    let mut row = vec![r.level.to_string()];
    row.extend(
        (0..EIGEN_COLUMNS).map(|i| r.eigenvalues.get(i).map_or("nan".into(), |&v| fmt_float(v))),
    );
    for s in r.squeezing_reports.iter().take(2) {
        match s {
            Some(s) => row.extend([fmt_float(s.delta_q), fmt_float(s.delta_p)]),
            None => row.extend(["nan".to_string(), "nan".to_string()]),
        }
    }
    row.extend([
        fmt_float(r.gap),
        fmt_float(r.ground_pair_splitting),
        r.cutoff_used.to_string(),
        r.converged.to_string(),
    ]);
    row
}

fn failed_spectrum_row(level: u32) -> Vec<String> {
    let mut row = vec![level.to_string()];
    row.extend(std::iter::repeat_n("nan".to_string(), EIGEN_COLUMNS + 6));
    row.extend(["0".to_string(), "false".to_string()]);
    row
}

fn parse_point(s: &str) -> Result<PhasePoint<f64>, CliError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| precondition(format!("expected RE,IM, got '{s}'")))?;
    let p = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| precondition(format!("bad number '{t}'")))
    };
    Ok(PhasePoint::new(p(a)?, p(b)?).ensure_finite()?)
}

fn parse_positive(s: &str, what: &str) -> Result<f64, CliError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(precondition(format!(
            "{what} must be a positive number, got '{s}'"
        ))),
    }
}

/// State specification for `wigner`.
pub fn parse_state(spec: &str, cutoff: usize) -> Result<KetState<f64>, CliError> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let ket = match kind {
        "vacuum" => KetState::vacuum(cutoff)?,
        "fock" => {
            let n: usize = arg
                .parse()
                .map_err(|_| precondition(format!("bad Fock level '{arg}'")))?;
            KetState::fock(n, cutoff)?
        }
        "coherent" => KetState::coherent(parse_point(arg)?, cutoff)?,
        "gkp0" => gkp_codestate(LogicalBit::Zero, parse_positive(arg, "delta")?, cutoff)?,
        "gkp1" => gkp_codestate(LogicalBit::One, parse_positive(arg, "delta")?, cutoff)?,
        "magic+" => magic_state(MagicSign::Plus, parse_positive(arg, "delta")?, cutoff)?,
        "magic-" => magic_state(MagicSign::Minus, parse_positive(arg, "delta")?, cutoff)?,
        other => return Err(precondition(format!("unknown state '{other}'"))),
    };
    Ok(ket)
}

fn parse_channel(spec: &str, kraus: bool, cutoff: usize) -> Result<ChiEvaluator<f64>, CliError> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "identity" => Ok(chi_from_kraus(&KrausChannel::identity(cutoff))),
        "loss" => {
            let gamma: f64 = arg
                .parse()
                .map_err(|_| precondition(format!("bad loss probability '{arg}'")))?;
            let params = LossParams::new(gamma)?;
            if kraus {
                Ok(chi_from_kraus(&photon_loss_kraus_auto(gamma, cutoff)?))
            } else {
                Ok(photon_loss_chi(params))
            }
        }
        other => Err(precondition(format!("unknown channel '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> i32 {
        main_with_args(std::iter::once("gkpdd").chain(args.iter().copied()))
    }

    #[test]
    fn level_ranges_parse() {
        assert_eq!(
            parse_level_range("1..5").unwrap(),
            LevelRange { first: 1, last: 5 }
        );
        assert_eq!(
            parse_level_range("1..=5").unwrap(),
            LevelRange { first: 1, last: 5 }
        );
        assert_eq!(parse_level_range("3").unwrap().levels(), vec![3]);
        assert!(parse_level_range("0..2").is_err());
        assert!(parse_level_range("4..2").is_err());
        assert!(parse_level_range("x").is_err());
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("m.csv");
        let o = out.to_str().unwrap();
        assert_eq!(
            run_args(&["twirl-measure", "--N", "1", "--out", o]),
            EXIT_OK
        );
        assert_eq!(
            run_args(&["twirl-measure", "--N", "0", "--out", o]),
            EXIT_PRECONDITION
        );
        assert_eq!(run_args(&["twirl-measure"]), EXIT_PRECONDITION);
        assert_eq!(
            run_args(&[
                "--tolerance",
                "bogus=1",
                "twirl-measure",
                "--N",
                "1",
                "--out",
                o
            ]),
            EXIT_PRECONDITION
        );
        assert_eq!(
            run_args(&["wigner", "--state", "gkp0:0.3", "--cutoff", "30", "--out", o]),
            EXIT_CONVERGENCE
        );
        let bad = dir.path().join("missing/x.csv");
        assert_eq!(
            run_args(&["twirl-measure", "--N", "1", "--out", bad.to_str().unwrap()]),
            EXIT_IO
        );
        assert_eq!(run_args(&["--help"]), EXIT_OK);
    }

    #[test]
    fn failed_row_has_full_width() {
        assert_eq!(failed_spectrum_row(3).len(), spectrum_header().len());
    }

    #[test]
    fn grid_is_square_and_symmetric() {
        let g = square_grid(1.0, 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], PhasePoint::new(-1.0, -1.0));
        assert_eq!(g[4], PhasePoint::new(0.0, 0.0));
        assert!(square_grid(0.0, 3).is_err());
        assert!(square_grid(1.0, 1).is_err());
    }

    #[test]
    fn state_specs() {
        assert!(parse_state("vacuum", 10).is_ok());
        assert!(parse_state("fock:3", 10).is_ok());
        assert!(parse_state("coherent:1,-0.5", 40).is_ok());
        assert!(parse_state("magic+:0.3", 200).is_ok());
        assert!(parse_state("fock:x", 10).is_err());
        assert!(parse_state("squeezed", 10).is_err());
        assert!(parse_state("gkp0:-1", 10).is_err());
    }
}
