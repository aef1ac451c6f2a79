//! mub: search for, build and verify complete sets of cyclic mutually unbiased bases in
//! dimension 2^m.
//!
//! Exit codes: 0 pass, 1 verification failed, 2 usage error, 3 nothing found,
//! 4 build precondition failed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use mub_core::certificate::{certify, verify_certificate, Level, MubCertificate, VerifyReport};
use mub_core::search::{
    ansatz_b, enumerate_all, known_corner, parse_corner, search_ansatz, staircase, SearchResult, Strategy,
};
use mub_core::symplectic::{check_conditions, ConditionReport};
use mub_core::{BitMatrix, Error};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_FOUND: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;

/// Largest `m` accepted without `--force`.
const M_CAP: usize = 24;
/// Above this `m`, searches need an explicit `--budget`.
const DEFAULT_BUDGET_MAX_M: usize = 16;
const DEFAULT_BUDGET_SECS: f64 = 60.0;

#[derive(Parser)]
#[command(name = "mub", version, about = "Cyclic mutually unbiased bases in dimension 2^m")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy, Default)]
struct Format {
    /// Machine-readable JSON output
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Human-readable text output
    #[arg(long)]
    text: bool,
}

impl Format {
    fn is_json(self, default_json: bool) -> bool {
        if self.json {
            true
        } else if self.text {
            false
        } else {
            default_json
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Search staircase-plus-corner candidates (exhaustive below m = 4)
    Search {
        #[arg(short = 'm')]
        m: usize,
        /// Largest corner size to try
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=4))]
        max_corner: u8,
        /// Wall-clock budget in seconds (required above m = 16)
        #[arg(long)]
        budget: Option<f64>,
        /// Allow m above 24
        #[arg(long)]
        force: bool,
        /// Include elapsed time in the output
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and check a certificate for one B
    Build {
        #[arg(short = 'm')]
        m: Option<usize>,
        /// Corner as row-major entries ("1,0,0,1") or rows ("10/01")
        #[arg(long, conflicts_with = "from_cert")]
        corner: Option<String>,
        /// Rebuild from the B recorded in an existing certificate
        #[arg(long)]
        from_cert: Option<PathBuf>,
        /// symplectic, dense or spectrum
        #[arg(long, default_value = "dense")]
        level: Level,
        /// Include the exact unitary (JSON) or its rendering (text)
        #[arg(long)]
        emit_u: bool,
        /// Leave the creation time out of the certificate
        #[arg(long)]
        no_timestamp: bool,
        #[command(flatten)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute every check in a certificate from its B
    Verify {
        cert: PathBuf,
        /// symplectic, dense or spectrum
        #[arg(long, default_value = "dense")]
        level: Level,
        #[command(flatten)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Confirm the known corner table against fresh searches
    Table {
        #[arg(long, default_value_t = 4)]
        from: usize,
        #[arg(long, default_value_t = 16)]
        to: usize,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=4))]
        max_corner: u8,
        /// Per-m budget in seconds (required above m = 16)
        #[arg(long)]
        budget: Option<f64>,
        #[command(flatten)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test every symmetric B (m <= 4 unless forced)
    Enumerate {
        #[arg(short = 'm')]
        m: usize,
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// An exit code plus a message for stderr.
struct Exit {
    code: u8,
    message: String,
}

impl Exit {
    fn usage(message: impl Into<String>) -> Self {
        Exit { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Overflow | Error::NotUnimodular | Error::Reducible(_) => EXIT_FAIL,
            _ => EXIT_USAGE,
        };
        Exit { code, message: e.to_string() }
    }
}

impl From<anyhow::Error> for Exit {
    fn from(e: anyhow::Error) -> Self {
        Exit::usage(format!("{e:#}"))
    }
}

type CmdResult = Result<u8, Exit>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Search { m, max_corner, budget, force, timing, format, out } => {
            cmd_search(m, max_corner as usize, budget, force, timing, format, out.as_deref())
        }
        Command::Build { m, corner, from_cert, level, emit_u, no_timestamp, format, out } => {
            let opts = BuildOpts { level, emit_u, timestamp: !no_timestamp, format };
            cmd_build(m, corner.as_deref(), from_cert.as_deref(), opts, out.as_deref())
        }
        Command::Verify { cert, level, format, out } => cmd_verify(&cert, level, format, out.as_deref()),
        Command::Table { from, to, max_corner, budget, format, out } => {
            cmd_table(from, to, max_corner as usize, budget, format, out.as_deref())
        }
        Command::Enumerate { m, force, format, out } => cmd_enumerate(m, force, format, out.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Exit { code, message }) => {
            eprintln!("mub: {message}");
            ExitCode::from(code)
        }
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Exit> {
    match out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = stdout.write_all(body.as_bytes());
        }
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Exit> {
    let mut s = serde_json::to_string_pretty(value).context("serializing output")?;
    s.push('\n');
    Ok(s)
}

fn rows(b: &BitMatrix) -> String {
    b.to_row_strings().join("/")
}

fn budget_for(m: usize, budget: Option<f64>) -> Result<Duration, Exit> {
    match budget {
        Some(secs) if secs.is_finite() && secs > 0.0 => Ok(Duration::from_secs_f64(secs)),
        Some(_) => Err(Exit::usage("--budget must be a positive number of seconds")),
        None if m > DEFAULT_BUDGET_MAX_M => {
            Err(Exit::usage(format!("m = {m} needs an explicit --budget (seconds)")))
        }
        None => Ok(Duration::from_secs_f64(DEFAULT_BUDGET_SECS)),
    }
}

fn check_m(m: usize, force: bool) -> Result<(), Exit> {
    if m == 0 {
        return Err(Exit::usage("m must be at least 1"));
    }
    if m > M_CAP && !force {
        return Err(Exit::usage(format!("m = {m} exceeds {M_CAP}; pass --force to override")));
    }
    Ok(())
}

fn search_text(r: &SearchResult) -> String {
    let mut s = format!(
        "m = {}  strategy = {}  candidates = {}  solutions = {}\n",
        r.m,
        match r.strategy {
            Strategy::Ansatz => "ansatz",
            Strategy::Exhaustive => "exhaustive",
        },
        r.candidates_checked,
        r.solutions.len()
    );
    if r.strategy == Strategy::Ansatz {
        let sizes: Vec<String> = r.corner_sizes_tried.iter().map(|c| format!("{c}x{c}")).collect();
        s.push_str(&format!("corner sizes searched: {}\n", sizes.join(", ")));
    }
    if r.budget_exhausted {
        s.push_str("budget exhausted before the search finished\n");
    }
    for (i, sol) in r.solutions.iter().enumerate() {
        let tag = if i == 0 { "*" } else { " " };
        match &sol.corner {
            Some(c) => s.push_str(&format!("{tag} corner {}  B {}\n", rows(c), rows(&sol.b))),
            None => s.push_str(&format!("{tag} B {}\n", rows(&sol.b))),
        }
    }
    if let Some(ms) = r.elapsed_ms {
        s.push_str(&format!("elapsed: {ms} ms\n"));
    }
    s
}

fn cmd_search(
    m: usize,
    max_corner: usize,
    budget: Option<f64>,
    force: bool,
    timing: bool,
    format: Format,
    out: Option<&Path>,
) -> CmdResult {
    check_m(m, force)?;
    let mut result = if m < 4 {
        enumerate_all(m, false)?
    } else {
        search_ansatz(m, max_corner, Some(budget_for(m, budget)?))?
    };
    if !timing {
        result.elapsed_ms = None;
    }
    let body = if format.is_json(true) { to_json(&result)? } else { search_text(&result) };
    emit(out, &body)?;
    Ok(if result.solutions.is_empty() { EXIT_NOT_FOUND } else { 0 })
}

fn cmd_enumerate(m: usize, force: bool, format: Format, out: Option<&Path>) -> CmdResult {
    check_m(m, force)?;
    let mut result = enumerate_all(m, force)?;
    result.elapsed_ms = None;
    let body = if format.is_json(true) { to_json(&result)? } else { search_text(&result) };
    emit(out, &body)?;
    Ok(if result.solutions.is_empty() { EXIT_NOT_FOUND } else { 0 })
}

struct BuildOpts {
    level: Level,
    emit_u: bool,
    timestamp: bool,
    format: Format,
}

fn read_cert(path: &Path) -> Result<MubCertificate, Exit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    MubCertificate::from_json(&text).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))
}

/// Picks `B`: from a certificate, from an explicit corner, the staircase for `m < 4`,
/// the known corner, or else the canonical search result.
fn choose_b(
    m: Option<usize>,
    corner: Option<&str>,
    from_cert: Option<&Path>,
) -> Result<(BitMatrix, Option<BitMatrix>), Exit> {
    if let Some(path) = from_cert {
        let cert = read_cert(path)?;
        if m.is_some_and(|m| m != cert.m) {
            return Err(Exit::usage(format!("-m disagrees with the certificate's m = {}", cert.m)));
        }
        return Ok((cert.b, cert.corner));
    }
    let m = m.ok_or_else(|| Exit::usage("build needs -m or --from-cert"))?;
    check_m(m, false)?;
    if let Some(spec) = corner {
        let c = parse_corner(spec)?;
        return Ok((ansatz_b(m, &c)?, Some(c)));
    }
    if m < 4 {
        return Ok((staircase(m), None));
    }
    if let Some(c) = known_corner(m) {
        return Ok((ansatz_b(m, &c)?, Some(c)));
    }
    let result = search_ansatz(m, 3, Some(budget_for(m, None)?))?;
    match result.canonical() {
        Some(sol) => Ok((sol.b.clone(), sol.corner.clone())),
        None => Err(Exit { code: EXIT_NOT_FOUND, message: format!("no corner found for m = {m}") }),
    }
}

fn describe_conditions(r: &ConditionReport) -> String {
    let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
    let mut s = format!(
        "conditions: symmetric {}, symplectic {}, ii {}, iii {}, order {}",
        flag(r.symmetric_ok),
        flag(r.symplectic_ok),
        flag(r.cond_ii_ok),
        flag(r.cond_iii_ok),
        flag(r.order_ok)
    );
    if let Some(j) = r.first_failing_j {
        s.push_str(&format!(" (f_{j}(B) singular)"));
    }
    if !r.consistent {
        s.push_str(" [cross-checks disagree]");
    }
    s
}

fn check_line(name: &str, v: Option<bool>) -> String {
    let state = match v {
        Some(true) => "pass",
        Some(false) => "FAIL",
        None => "not run",
    };
    format!("  {name:<14} {state}\n")
}

fn cert_text(cert: &MubCertificate) -> String {
    let v = &cert.verification;
    let mut s = format!("m = {}\nB = {}\n", cert.m, rows(&cert.b));
    if let Some(c) = &cert.corner {
        s.push_str(&format!("corner = {}\n", rows(c)));
    }
    s.push_str(&describe_conditions(&cert.condition_report));
    s.push('\n');
    if let Some(g) = &cert.global_phase {
        s.push_str(&format!("global phase = {g}\n"));
    }
    s.push_str(&format!("level = {} (power sweeps up to m = {})\n", v.level, v.dense_bound_m));
    for (name, val) in [
        ("partition", v.partition_ok),
        ("global phase", v.global_phase_match),
        ("unitary", v.unitary_ok),
        ("cyclic", v.cyclic_ok),
        ("unbiased", v.unbiased_ok),
        ("trace", v.trace_ok),
        ("spectrum", v.spectrum_ok),
    ] {
        s.push_str(&check_line(name, val));
    }
    s.push_str(&format!("fully verified: {}\n", cert.fully_verified));
    s
}

fn cmd_build(
    m: Option<usize>,
    corner: Option<&str>,
    from_cert: Option<&Path>,
    opts: BuildOpts,
    out: Option<&Path>,
) -> CmdResult {
    let (b, corner) = choose_b(m, corner, from_cert)?;
    let report = check_conditions(&b)?;
    if !report.all_ok() {
        return Err(Exit { code: EXIT_PRECONDITION, message: format!("B = {}: {}", rows(&b), describe_conditions(&report)) });
    }
    let mut cert = certify(&b, corner.as_ref(), opts.level)?;
    if opts.timestamp {
        cert.metadata.created_unix = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    let unitary = if opts.emit_u { cert.unitary_matrix()? } else { None };
    let body = if opts.format.is_json(true) {
        cert.unitary = unitary;
        to_json(&cert)?
    } else {
        let mut s = cert_text(&cert);
        if let Some(u) = unitary {
            s.push_str("U =\n");
            s.push_str(&u.render());
        }
        s
    };
    emit(out, &body)?;
    Ok(if cert.fully_verified { 0 } else { EXIT_FAIL })
}

fn verify_text(r: &VerifyReport) -> String {
    let mut s = match &r.first_failure {
        None => format!("PASS m = {} level = {}\n", r.m, r.level),
        Some(f) => format!("FAIL m = {} level = {}: {f}\n", r.m, r.level),
    };
    s.push_str(&describe_conditions(&r.condition_report));
    s.push('\n');
    let v = &r.recomputed;
    for (name, val) in [
        ("partition", v.partition_ok),
        ("global phase", v.global_phase_match),
        ("unitary", v.unitary_ok),
        ("cyclic", v.cyclic_ok),
        ("unbiased", v.unbiased_ok),
        ("trace", v.trace_ok),
        ("spectrum", v.spectrum_ok),
    ] {
        s.push_str(&check_line(name, val));
    }
    s
}

fn cmd_verify(path: &Path, level: Level, format: Format, out: Option<&Path>) -> CmdResult {
    let cert = read_cert(path)?;
    let report = verify_certificate(&cert, level)?;
    let body = if format.is_json(false) { to_json(&report)? } else { verify_text(&report) };
    emit(out, &body)?;
    Ok(if report.passed { 0 } else { EXIT_FAIL })
}

#[derive(serde::Serialize)]
struct TableRow {
    m: usize,
    corner_sizes_tried: Vec<usize>,
    solutions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    canonical_corner: Option<BitMatrix>,
    known_corner: BitMatrix,
    known_corner_in_solutions: bool,
    budget_exhausted: bool,
}

fn cmd_table(
    from: usize,
    to: usize,
    max_corner: usize,
    budget: Option<f64>,
    format: Format,
    out: Option<&Path>,
) -> CmdResult {
    if from < 4 || to > M_CAP || from > to {
        return Err(Exit::usage(format!("table range must lie within 4..={M_CAP}")));
    }
    let mut table = Vec::new();
    for m in from..=to {
        let known = known_corner(m).expect("table covers 4..=24");
        let result = search_ansatz(m, max_corner, Some(budget_for(m, budget)?))?;
        table.push(TableRow {
            m,
            corner_sizes_tried: result.corner_sizes_tried.clone(),
            solutions: result.solutions.len(),
            canonical_corner: result.canonical().and_then(|s| s.corner.clone()),
            known_corner_in_solutions: result.contains_corner(&known),
            known_corner: known,
            budget_exhausted: result.budget_exhausted,
        });
    }
    let body = if format.is_json(false) {
        to_json(&table)?
    } else {
        let mut s = format!("{:>3}  {:>8}  {:>9}  {:<14}  {:<14}  {}\n", "m", "sizes", "solutions", "canonical", "known", "confirmed");
        for r in &table {
            let sizes: Vec<String> = r.corner_sizes_tried.iter().map(|c| c.to_string()).collect();
            let canonical = r.canonical_corner.as_ref().map(rows).unwrap_or_else(|| "-".into());
            let confirmed = if r.known_corner_in_solutions {
                "yes"
            } else if r.budget_exhausted {
                "budget"
            } else {
                "NO"
            };
            s.push_str(&format!(
                "{:>3}  {:>8}  {:>9}  {:<14}  {:<14}  {}\n",
                r.m,
                sizes.join(","),
                r.solutions,
                canonical,
                rows(&r.known_corner),
                confirmed
            ));
        }
        s
    };
    emit(out, &body)?;
    Ok(if table.iter().all(|r| r.known_corner_in_solutions) { 0 } else { EXIT_FAIL })
}
