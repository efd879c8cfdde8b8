//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a negative answer (invalid function, point outside
//! the domain, oracle contradiction), 2 bad input.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use crate::aggregate::{threshold_plq_unchecked, ThresholdReport};
use crate::domain::Membership;
use crate::error::Error;
use crate::io::read_plq;
use crate::oracle::{envelope_numeric, threshold_bracket_with, OracleConfig, OracleVerdict, VerdictKind};
use crate::plq::{PlqFunction, ValidationReport, Violation, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "plq-threshold", version, about = "Prox-thresholds and Moreau envelope domains of PLQ functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// PLQ function in JSON form.
    pub input: PathBuf,
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check interior-disjointness and continuity. Sampling is seeded by PLQ_SEED.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Overall threshold, active set and per-piece table.
    Threshold {
        #[command(flatten)]
        common: Common,
    },
    /// Is a point in the envelope domain at the threshold?
    Domain {
        #[command(flatten)]
        common: Common,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Also evaluate the envelope numerically at the threshold.
        #[arg(long)]
        oracle: bool,
    },
    /// Sample the envelope on a grid and print CSV.
    Envelope {
        #[command(flatten)]
        common: Common,
        /// Prox-parameter, at least 0.
        #[arg(long = "r", allow_hyphen_values = true)]
        r: f64,
        /// `xmin:xmax:n` per axis, axes separated by commas.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Bracket the threshold numerically and compare with the exact value.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Base point for the envelope probes (defaults to the origin).
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Bracket width at which bisection stops.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidPlq(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Seed for sampling-based checks: `PLQ_SEED` if set, else the library default.
pub fn seed_from_env() -> Result<u64, String> {
    match std::env::var("PLQ_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| format!("PLQ_SEED must be an unsigned integer, got {s:?}")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

pub fn parse_point(s: &str) -> Result<DVector<f64>, String> {
    let coords = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad coordinate {t:?} in point")))
        .collect::<Result<Vec<_>, _>>()?;
    if coords.iter().any(|v| !v.is_finite()) {
        return Err("point coordinates must be finite".into());
    }
    Ok(DVector::from_vec(coords))
}

/// One grid axis: `min:max:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + step * i as f64).collect()
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<Axis>, String> {
    s.split(',')
        .map(|axis| {
            let parts: Vec<&str> = axis.split(':').collect();
            let [lo, hi, n] = parts.as_slice() else {
                return Err(format!("grid axis {axis:?} is not min:max:count"));
            };
            let min: f64 = lo.trim().parse().map_err(|_| format!("bad grid bound {lo:?}"))?;
            let max: f64 = hi.trim().parse().map_err(|_| format!("bad grid bound {hi:?}"))?;
            let count: usize = n.trim().parse().map_err(|_| format!("bad grid count {n:?}"))?;
            if count == 0 || !min.is_finite() || !max.is_finite() || max < min {
                return Err(format!("grid axis {axis:?} is empty or reversed"));
            }
            Ok(Axis { min, max, count })
        })
        .collect()
}

fn fmt_vec(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn fmt_num(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn describe_violation(v: &Violation) -> String {
    match v {
        Violation::Discontinuity { i, j, witness, gap } => {
            format!("pieces {i} and {j} disagree by {gap:.3e} at {witness:?}")
        }
        Violation::InteriorOverlap { i, j, witness } => {
            format!("pieces {i} and {j} overlap in their interiors near {witness:?}")
        }
    }
}

fn load(path: &Path) -> Result<PlqFunction, Failure> {
    Ok(read_plq(path)?)
}

fn validated(f: &PlqFunction) -> Result<ValidationReport, Failure> {
    let seed = seed_from_env().map_err(input_error)?;
    Ok(f.validate_with_seed(seed))
}

fn analyzed(f: &PlqFunction) -> Result<ThresholdReport, Failure> {
    let report = validated(f)?;
    if !report.is_valid() {
        let mut msg = format!("input is not a valid PLQ function ({} violation(s))", report.violations.len());
        for v in &report.violations {
            let _ = write!(msg, "\n  {}", describe_violation(v));
        }
        return Err(Failure { code: 1, message: msg });
    }
    Ok(threshold_plq_unchecked(f)?)
}

/// Serializable oracle verdict; `-∞` becomes `null` value with kind `DivergentNegInf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictJson {
    pub kind: &'static str,
    pub value: Option<f64>,
    pub point: Option<Vec<f64>>,
    pub radius_used: f64,
}

impl From<&OracleVerdict> for VerdictJson {
    fn from(v: &OracleVerdict) -> Self {
        let (kind, value, point) = match &v.kind {
            VerdictKind::Finite { value, argmin } => ("Finite", Some(*value), Some(argmin.iter().copied().collect())),
            VerdictKind::DivergentNegInf { ray } => ("DivergentNegInf", None, Some(ray.iter().copied().collect())),
            VerdictKind::Inconclusive => ("Inconclusive", None, None),
        };
        Self {
            kind,
            value,
            point,
            radius_used: v.radius_used,
        }
    }
}

fn describe_verdict(v: &OracleVerdict) -> String {
    match &v.kind {
        VerdictKind::Finite { value, argmin } => format!("Finite {value:.9} attained near {}", fmt_vec(argmin)),
        VerdictKind::DivergentNegInf { ray } => format!("DivergentNegInf along {}", fmt_vec(ray)),
        VerdictKind::Inconclusive => format!("Inconclusive up to radius {}", v.radius_used),
    }
}

fn cmd_validate(common: &Common, out: &mut dyn Write) -> Result<i32, Failure> {
    let f = load(&common.input)?;
    let report = validated(&f)?;
    if common.json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else if report.is_valid() {
        let _ = writeln!(out, "valid: {} piece(s) in dimension {}", f.pieces().len(), f.dim());
    } else {
        let _ = writeln!(out, "invalid: {} violation(s)", report.violations.len());
        for v in &report.violations {
            let _ = writeln!(out, "  {}", describe_violation(v));
        }
    }
    Ok(if report.is_valid() { 0 } else { 1 })
}

/// Text rendering of a threshold report.
pub fn render_threshold(report: &ThresholdReport) -> String {
    let mut s = String::new();
    let active: Vec<String> = report.active_set.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(s, "r_bar = {:.9}", report.r_bar);
    let _ = writeln!(s, "active set: {{{}}}", active.join(", "));
    let _ = writeln!(s, "domain: {}", report.overall_domain.class());
    let _ = writeln!(s, "{:>5}  {:>14}  {:>9}  domain", "piece", "r_bar", "rounded");
    for p in &report.pieces {
        let _ = writeln!(s, "{:>5}  {:>14.9}  {:>9.3}  {}", p.index, p.r_bar, p.r_bar, p.domain);
    }
    for w in &report.flags {
        let _ = writeln!(s, "note: {w:?}");
    }
    s
}

fn cmd_threshold(common: &Common, out: &mut dyn Write) -> Result<i32, Failure> {
    let f = load(&common.input)?;
    let report = analyzed(&f)?;
    if common.json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report.to_json()).expect("serializable"));
    } else {
        let _ = write!(out, "{}", render_threshold(&report));
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct PieceVerdictJson {
    index: usize,
    membership: Membership,
    phi: Vec<Vec<f64>>,
    h: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct DomainJson {
    point: Vec<f64>,
    r_bar: f64,
    membership: Membership,
    deciding_piece: Option<usize>,
    pieces: Vec<PieceVerdictJson>,
    oracle: Option<VerdictJson>,
}

fn cmd_domain(common: &Common, point: &str, oracle: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let f = load(&common.input)?;
    let x = parse_point(point).map_err(input_error)?;
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: x.len(),
        }
        .into());
    }
    let report = analyzed(&f)?;
    let mut pieces = Vec::new();
    let mut overall = Membership::Member;
    let mut deciding = None;
    for &index in &report.active_set {
        let verdict = report.classify_piece(index, &x)?;
        let (phi, h) = match report.analysis(index).and_then(|a| a.conic.as_ref().map(|c| (a, c))) {
            Some((an, conic)) => {
                let shift = an.apex.clone().unwrap_or_else(|| DVector::zeros(f.dim()));
                let w = &conic.linear - (&x - &shift) * conic.r_bar;
                let dirs = conic.phi.directions();
                (
                    dirs.iter().map(|u| u.iter().copied().collect()).collect(),
                    dirs.iter().map(|u| w.dot(u)).collect(),
                )
            }
            None => (Vec::new(), Vec::new()),
        };
        let rank = |m: Membership| match m {
            Membership::NonMember => 2,
            Membership::Indeterminate => 1,
            Membership::Member => 0,
        };
        if rank(verdict) > rank(overall) {
            overall = verdict;
            deciding = Some(index);
        }
        pieces.push(PieceVerdictJson {
            index,
            membership: verdict,
            phi,
            h,
        });
    }
    let numeric = if oracle {
        Some(envelope_numeric(&f, report.r_bar, &x, &OracleConfig::default())?)
    } else {
        None
    };
    if common.json {
        let doc = DomainJson {
            point: x.iter().copied().collect(),
            r_bar: report.r_bar,
            membership: overall,
            deciding_piece: deciding,
            pieces,
            oracle: numeric.as_ref().map(VerdictJson::from),
        };
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    } else {
        let _ = writeln!(out, "{overall}");
        let _ = writeln!(out, "point {} at r_bar = {:.9}", fmt_vec(&x), report.r_bar);
        if let Some(i) = deciding {
            let _ = writeln!(out, "decided by piece {i}");
        }
        for p in &pieces {
            let _ = writeln!(out, "piece {}: {}", p.index, p.membership);
            for (u, h) in p.phi.iter().zip(&p.h) {
                let sign = if *h > crate::tol::SIGN {
                    "+"
                } else if *h < -crate::tol::SIGN {
                    "-"
                } else {
                    "0"
                };
                let u = DVector::from_column_slice(u);
                let _ = writeln!(out, "  direction {}  h = {h:+.6} ({sign})", fmt_vec(&u));
            }
        }
        if let Some(v) = &numeric {
            let _ = writeln!(out, "oracle: {}", describe_verdict(v));
        }
    }
    Ok(if overall == Membership::NonMember { 1 } else { 0 })
}

fn cmd_envelope(
    common: &Common,
    r: f64,
    grid: &str,
    output: Option<&PathBuf>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let f = load(&common.input)?;
    if r.is_nan() || r < 0.0 {
        return Err(Error::NegativeProxParameter(r).into());
    }
    let axes = parse_grid(grid).map_err(input_error)?;
    if axes.len() != f.dim() {
        return Err(input_error(format!(
            "grid has {} axes but the function has dimension {}",
            axes.len(),
            f.dim()
        )));
    }
    let cfg = OracleConfig::default();
    let mut csv = String::new();
    let header: Vec<String> = (1..=f.dim()).map(|k| format!("x{k}")).collect();
    let _ = writeln!(csv, "{},e_rf", header.join(","));
    let values: Vec<Vec<f64>> = axes.iter().map(Axis::values).collect();
    let total: usize = axes.iter().map(|a| a.count).product();
    for flat in 0..total {
        // Row-major: the last axis varies fastest.
        let mut rest = flat;
        let mut x = DVector::zeros(axes.len());
        for k in (0..axes.len()).rev() {
            x[k] = values[k][rest % axes[k].count];
            rest /= axes[k].count;
        }
        let v = envelope_numeric(&f, r, &x, &cfg)?;
        let cell = match v.kind {
            VerdictKind::Finite { value, .. } => fmt_num(value),
            VerdictKind::DivergentNegInf { .. } => "-inf".into(),
            VerdictKind::Inconclusive => "inconclusive".into(),
        };
        let coords: Vec<String> = x.iter().map(|c| fmt_num(*c)).collect();
        let _ = writeln!(csv, "{},{cell}", coords.join(","));
    }
    match output {
        Some(path) => std::fs::write(path, csv).map_err(|e| input_error(format!("{}: {e}", path.display())))?,
        None => {
            let _ = write!(out, "{csv}");
        }
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct OracleCheckJson {
    r_bar: f64,
    lo: f64,
    hi: Option<f64>,
    converged: bool,
    inconclusive: bool,
    probes: usize,
    verdict: &'static str,
}

fn cmd_oracle_check(common: &Common, point: Option<&str>, tol: f64, out: &mut dyn Write) -> Result<i32, Failure> {
    let f = load(&common.input)?;
    let x = match point {
        Some(p) => parse_point(p).map_err(input_error)?,
        None => DVector::zeros(f.dim()),
    };
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: x.len(),
        }
        .into());
    }
    let report = analyzed(&f)?;
    let bracket = threshold_bracket_with(&f, &x, tol, &OracleConfig::bracketing())?;
    let slack = 1e-6 * (1.0 + report.r_bar);
    let verdict = if bracket.contains(report.r_bar, slack) {
        "agree"
    } else if bracket.inconclusive || bracket.hi.is_infinite() {
        "inconclusive"
    } else {
        "disagree"
    };
    if common.json {
        let doc = OracleCheckJson {
            r_bar: report.r_bar,
            lo: bracket.lo,
            hi: bracket.hi.is_finite().then_some(bracket.hi),
            converged: bracket.converged,
            inconclusive: bracket.inconclusive,
            probes: bracket.probes,
            verdict,
        };
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    } else {
        let _ = writeln!(out, "exact r_bar = {:.9}", report.r_bar);
        let _ = writeln!(
            out,
            "oracle bracket = [{:.6}, {}] after {} probes",
            bracket.lo,
            if bracket.hi.is_finite() { format!("{:.6}", bracket.hi) } else { "inf".into() },
            bracket.probes
        );
        let _ = writeln!(out, "{verdict}");
    }
    Ok(if verdict == "disagree" { 1 } else { 0 })
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Validate { common } => cmd_validate(common, out),
        Command::Threshold { common } => cmd_threshold(common, out),
        Command::Domain { common, point, oracle } => cmd_domain(common, point, *oracle, out),
        Command::Envelope {
            common,
            r,
            grid,
            output,
        } => cmd_envelope(common, *r, grid, output.as_ref(), out),
        Command::OracleCheck { common, point, tol } => cmd_oracle_check(common, point.as_deref(), *tol, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
