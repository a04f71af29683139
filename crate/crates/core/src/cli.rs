//! Command-line front end.
//!
//! Exit codes: 1 usage, 2 unreadable or invalid input, 3 inference,
//! generation or output failure, 4 `--check` mismatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::engine::{Session, SessionOptions};
use crate::generator::{
    gen_demo, gen_demo_of_length, GenConfig, WorldModel, DEFAULT_MAX_REJECTIONS,
};
use crate::kb::{has_errors, parse_kb, validate_kb, KnowledgeBase, Severity};
use crate::metrics::{
    lifespans, linear_fit, living_curve, summarize, write_curve_csv, write_lifespans_csv,
    RunSummary,
};
use crate::oracle::{self, DEFAULT_MAX_LEN};
use crate::timeline::Explanation;
use crate::transcript::{Step, Transcript};
use crate::worldstate::EnvObject;

/// Peak living / total created at or below this passes.
pub const PEAK_RATIO_THRESHOLD: f64 = 0.35;

#[derive(Debug, Parser)]
#[command(
    name = "planrec",
    version,
    about = "Online plan recognition over demonstration transcripts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Sexp,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explain a demonstration with a minimum set of top-level intentions.
    Explain {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        demo: PathBuf,
        /// Write curve.csv and lifespans.csv here.
        #[arg(long, value_name = "DIR")]
        metrics: Option<PathBuf>,
        /// Cross-check against the brute-force oracle (demos up to 20 actions).
        #[arg(long)]
        check: bool,
        #[arg(long, value_enum, default_value = "sexp")]
        format: Format,
    },
    /// Parse and validate a knowledge base.
    ValidateKb {
        #[arg(long)]
        kb: PathBuf,
    },
    /// Generate a random demonstration and its ground-truth sidecar (OUT.truth).
    GenDemo {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long = "n-top")]
        n_top: usize,
        #[arg(long)]
        out: PathBuf,
        /// World model; defaults to the KB path with a `.world` extension.
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_REJECTIONS)]
        max_rejections: usize,
    },
    /// Explain generated demos across a range of lengths and summarize memory use.
    Bench {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        min: usize,
        #[arg(long)]
        max: usize,
        #[arg(long)]
        step: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        seeds_per_length: u64,
        /// Add a wall_ms column (makes the summary non-reproducible).
        #[arg(long)]
        wall_time: bool,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Run(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Run(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))
}

/// Loads a KB, printing warnings to `err`; any validation error fails.
fn load_kb(path: &Path, err: &mut dyn Write) -> Result<Arc<KnowledgeBase>, CliError> {
    let kb =
        parse_kb(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let diags = validate_kb(&kb);
    for d in diags.iter().filter(|d| d.severity == Severity::Warning) {
        let _ = writeln!(err, "{}: {d}", path.display());
    }
    if has_errors(&diags) {
        let mut msg = String::new();
        for d in diags.iter().filter(|d| d.severity == Severity::Error) {
            let _ = writeln!(msg, "{}: {d}", path.display());
        }
        return Err(CliError::Input(msg.trim_end().to_string()));
    }
    Ok(Arc::new(kb))
}

fn load_demo(path: &Path, kb: &KnowledgeBase) -> Result<Transcript, CliError> {
    let t = Transcript::parse(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    t.check(kb)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(t)
}

fn load_world(
    kb_path: &Path,
    world: Option<&Path>,
    kb: &KnowledgeBase,
) -> Result<Arc<WorldModel>, CliError> {
    let path = world
        .map(Path::to_path_buf)
        .unwrap_or_else(|| kb_path.with_extension("world"));
    let w = WorldModel::parse(&read(&path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    w.check(kb)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Arc::new(w))
}

/// Result of one instrumented run.
pub struct Run {
    pub explanation: Explanation,
    pub session: Session,
}

pub fn run_session(
    kb: Arc<KnowledgeBase>,
    init: Vec<EnvObject>,
    steps: &[Step],
    metrics: bool,
) -> Result<Run, CliError> {
    let opts = SessionOptions {
        record_metrics: metrics,
        ..SessionOptions::default()
    };
    let fail = |e: crate::engine::EngineError| CliError::Run(e.to_string());
    let mut session = Session::new(kb, init, opts).map_err(fail)?;
    for step in steps {
        session
            .push_step(&step.action, &step.changes)
            .map_err(fail)?;
    }
    let explanation = session.finish().map_err(fail)?;
    Ok(Run {
        explanation,
        session,
    })
}

fn write_metrics(dir: &Path, session: &Session) -> Result<RunSummary, CliError> {
    create_dir(dir)?;
    let events = session.recorder().events();
    let curve = living_curve(events);
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, &curve).expect("in-memory write");
    write_file(
        &dir.join("curve.csv"),
        &String::from_utf8(buf).expect("ascii"),
    )?;
    let mut buf = Vec::new();
    write_lifespans_csv(&mut buf, &lifespans(events)).expect("in-memory write");
    write_file(
        &dir.join("lifespans.csv"),
        &String::from_utf8(buf).expect("ascii"),
    )?;
    Ok(summarize(&curve))
}

fn cmd_explain(
    kb_path: &Path,
    demo: &Path,
    metrics: Option<&Path>,
    check: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let kb = load_kb(kb_path, err)?;
    let t = load_demo(demo, &kb)?;
    let run = run_session(Arc::clone(&kb), t.init.clone(), &t.steps, metrics.is_some())?;
    for d in run.session.diagnostics() {
        let _ = writeln!(err, "note: {d}");
    }
    let _ = writeln!(out, "{}", run.explanation.to_sexp());
    if let Some(dir) = metrics {
        write_metrics(dir, &run.session)?;
    }
    if check {
        if t.steps.len() > DEFAULT_MAX_LEN {
            let _ = writeln!(
                err,
                "check skipped: {} actions exceeds the oracle limit of {DEFAULT_MAX_LEN}",
                t.steps.len()
            );
            return Ok(());
        }
        check_explanation(&kb, &t.steps, &t.init, &run.explanation)?;
    }
    Ok(())
}

/// Compares an explanation with the oracle: it must be a valid cover of
/// minimum cardinality.
pub fn check_explanation(
    kb: &KnowledgeBase,
    steps: &[Step],
    init: &[EnvObject],
    explanation: &Explanation,
) -> Result<(), CliError> {
    if !oracle::validate_cover(kb, steps, init, explanation) {
        return Err(CliError::Mismatch(
            "check failed: explanation is not a valid cover".into(),
        ));
    }
    let min = oracle::min_cover_cardinality(kb, steps, init)
        .map_err(|e| CliError::Run(e.to_string()))?
        .unwrap_or(0);
    let got = explanation.intents.len();
    if min != got {
        return Err(CliError::Mismatch(format!(
            "check failed: explanation has {got} intentions, minimum cover has {min}"
        )));
    }
    Ok(())
}

fn cmd_validate_kb(
    kb_path: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let kb = parse_kb(&read(kb_path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", kb_path.display())))?;
    let diags = validate_kb(&kb);
    for d in &diags {
        let _ = writeln!(err, "{}: {d}", kb_path.display());
    }
    let errors = diags
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .count();
    let warnings = diags.len() - errors;
    if errors > 0 {
        return Err(CliError::Input(format!(
            "{errors} error(s), {warnings} warning(s)"
        )));
    }
    let _ = writeln!(
        out,
        "ok: {} types, {} schemas, {warnings} warning(s)",
        kb.signatures().len(),
        kb.schemas().len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen_demo(
    kb_path: &Path,
    seed: u64,
    n_top: usize,
    out_path: &Path,
    world: Option<&Path>,
    max_rejections: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let kb = load_kb(kb_path, err)?;
    let world = load_world(kb_path, world, &kb)?;
    let cfg = GenConfig {
        max_rejections,
        ..GenConfig::new(seed, n_top, world)
    };
    let demo = gen_demo(&kb, &cfg).map_err(|e| CliError::Run(e.to_string()))?;
    write_file(out_path, &demo.transcript().to_sexp())?;
    let truth = truth_path(out_path);
    write_file(&truth, &demo.truth().to_sexp())?;
    let _ = writeln!(
        out,
        "{} steps, {} top-level intentions",
        demo.steps.len(),
        demo.ground_truth.len()
    );
    Ok(())
}

/// Ground-truth sidecar path for a generated transcript.
pub fn truth_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".truth");
    PathBuf::from(s)
}

/// Seed for the `i`-th run at `length` in a bench family.
pub fn bench_seed(base: u64, length: usize, i: u64) -> u64 {
    base.wrapping_mul(1_000_003)
        .wrapping_add(length as u64 * 1000 + i)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    kb_path: &Path,
    range: (usize, usize, usize),
    seed: u64,
    out_dir: &Path,
    world: Option<&Path>,
    seeds_per_length: u64,
    wall_time: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let (min, max, step) = range;
    if step == 0 || min > max {
        return Err(CliError::Usage(
            "--step must be positive and --min <= --max".into(),
        ));
    }
    let kb = load_kb(kb_path, err)?;
    let world = load_world(kb_path, world, &kb)?;
    create_dir(&out_dir.join("curves"))?;

    let mut summary = String::from("length,seed,total_created,peak_living,peak_ratio,pass");
    if wall_time {
        summary.push_str(",wall_ms");
    }
    summary.push('\n');
    let mut points = Vec::new();
    let mut failures = 0;
    for length in (min..=max).step_by(step) {
        for i in 0..seeds_per_length {
            let s = bench_seed(seed, length, i);
            let demo = gen_demo_of_length(&kb, &GenConfig::new(s, 0, Arc::clone(&world)), length)
                .map_err(|e| CliError::Run(format!("length {length}, seed {s}: {e}")))?;
            let started = Instant::now();
            let run = run_session(Arc::clone(&kb), demo.init, &demo.steps, true)?;
            let elapsed = started.elapsed();
            let curve = living_curve(run.session.recorder().events());
            let mut buf = Vec::new();
            write_curve_csv(&mut buf, &curve).expect("in-memory write");
            write_file(
                &out_dir
                    .join("curves")
                    .join(format!("len{length}-seed{s}.csv")),
                &String::from_utf8(buf).expect("ascii"),
            )?;
            let sum = summarize(&curve);
            let ratio = sum.peak_ratio();
            let pass = ratio <= PEAK_RATIO_THRESHOLD;
            failures += usize::from(!pass);
            let _ = write!(
                summary,
                "{length},{s},{},{},{ratio:.4},{}",
                sum.total_created,
                sum.peak_living,
                if pass { "pass" } else { "fail" }
            );
            if wall_time {
                let _ = write!(summary, ",{:.3}", elapsed.as_secs_f64() * 1000.0);
            }
            summary.push('\n');
            points.push((length as f64, sum.total_created as f64));
        }
    }
    write_file(&out_dir.join("summary.csv"), &summary)?;
    let (slope, intercept, r2) = linear_fit(&points);
    let _ = writeln!(
        out,
        "runs={} slope={slope:.4} intercept={intercept:.4} r2={r2:.6} peak_failures={failures}",
        points.len()
    );
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Explain {
            kb,
            demo,
            metrics,
            check,
            format: Format::Sexp,
        } => cmd_explain(&kb, &demo, metrics.as_deref(), check, out, err),
        Command::ValidateKb { kb } => cmd_validate_kb(&kb, out, err),
        Command::GenDemo {
            kb,
            seed,
            n_top,
            out: path,
            world,
            max_rejections,
        } => cmd_gen_demo(
            &kb,
            seed,
            n_top,
            &path,
            world.as_deref(),
            max_rejections,
            out,
            err,
        ),
        Command::Bench {
            kb,
            min,
            max,
            step,
            seed,
            out: dir,
            world,
            seeds_per_length,
            wall_time,
        } => cmd_bench(
            &kb,
            (min, max, step),
            seed,
            &dir,
            world.as_deref(),
            seeds_per_length,
            wall_time,
            out,
            err,
        ),
    }
}

/// Runs the CLI with the given arguments (including the program name) and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::Intent;

    const XYZ: &str = "(primitive A 0) (primitive B 0) (primitive C 0)
        (abstract X 0) (abstract Y 0) (abstract Z 0)
        (schema (cause X ()) (vars) (effects (A) (B)))
        (schema (cause Y ()) (vars) (effects (C)))
        (schema (cause Z ()) (vars) (effects (A) (B) (C)))";

    fn steps() -> Vec<Step> {
        vec![
            Step::bare("A", &[]),
            Step::bare("B", &[]),
            Step::bare("C", &[]),
        ]
    }

    #[test]
    fn non_minimal_explanation_is_a_mismatch() {
        let kb = parse_kb(XYZ).unwrap();
        let ex = Explanation {
            intents: vec![Intent::new("X", &[], 0, 2), Intent::new("Y", &[], 2, 3)],
            covered_actions: 3,
        };
        let err = check_explanation(&kb, &steps(), &[], &ex).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(err.to_string().contains("minimum cover has 1"));
    }

    #[test]
    fn invalid_cover_is_a_mismatch() {
        let kb = parse_kb(XYZ).unwrap();
        let ex = Explanation {
            intents: vec![Intent::new("Y", &[], 0, 3)],
            covered_actions: 3,
        };
        assert_eq!(
            check_explanation(&kb, &steps(), &[], &ex)
                .unwrap_err()
                .exit_code(),
            4
        );
    }

    #[test]
    fn minimal_explanation_passes() {
        let kb = parse_kb(XYZ).unwrap();
        let ex = Explanation {
            intents: vec![Intent::new("Z", &[], 0, 3)],
            covered_actions: 3,
        };
        assert!(check_explanation(&kb, &steps(), &[], &ex).is_ok());
    }

    #[test]
    fn truth_sidecar_appends_suffix() {
        assert_eq!(
            truth_path(Path::new("out/a.demo")),
            PathBuf::from("out/a.demo.truth")
        );
    }
}
