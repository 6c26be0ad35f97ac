//! Command-line front end: problem files, rendering, and subcommands.

pub mod corpus;
pub mod render;
pub mod sexp;
pub mod syntax;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use lsf_core::rewrite::RewriteError;
use lsf_core::rewrite::{normalize_traced, normalize_with, RuleSet, Strategy, DEFAULT_FUEL};
use lsf_core::solver::{self, SearchConfig, SearchOutcome, SolverError};
use lsf_core::sorts::{validate_problem, Mode};
use lsf_core::term::{free_metavars, MetaSubst};
use lsf_core::transform::{self, TransformError};

use crate::render::{render_binding, render_problem, render_term, Style};
use crate::sexp::ParseError;
use crate::syntax::{parse_problem, parse_subst, parse_term, ProblemFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("invalid LSF_FUEL value `{0}`")]
    BadFuelVar(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("write failed: {0}")]
    Output(#[from] std::io::Error),
}

#[derive(Parser, Debug)]
#[command(
    name = "lsf",
    version,
    about = "Explicit substitutions and second-order unification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Sigma,
    Lambdasigma,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Sigma => Mode::SigmaOnly,
            ModeArg::Lambdasigma => Mode::LambdaSigma,
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Rewrite step budget; defaults to $LSF_FUEL, then 1000000.
    #[arg(long)]
    fuel: Option<u64>,
    /// Print terms with raw de Bruijn indices.
    #[arg(long)]
    debruijn: bool,
}

impl Common {
    fn style(&self) -> Style {
        if self.debruijn {
            Style::DeBruijn
        } else {
            Style::Named
        }
    }

    fn fuel(&self) -> Result<u64, CliError> {
        if let Some(f) = self.fuel {
            return Ok(f);
        }
        match std::env::var("LSF_FUEL") {
            Ok(v) => v.trim().parse().map_err(|_| CliError::BadFuelVar(v)),
            Err(_) => Ok(DEFAULT_FUEL),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a problem and print one PASS/FAIL line per condition.
    Check { file: PathBuf },
    /// Rewrite a λ-calculus problem into λσ form.
    Precook {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Emit the σ-unification counterpart of a problem, with its certificate.
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Bounded search for solutions.
    Solve {
        file: PathBuf,
        /// Largest candidate size.
        #[arg(long, default_value_t = 4)]
        bound: usize,
        /// Largest candidate depth.
        #[arg(long, default_value_t = 64)]
        depth: usize,
        /// Report up to --max-solutions solutions instead of the first.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 16)]
        max_solutions: usize,
        /// Override the mode declared in the file.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Enumerate λ-terms directly instead of going through the σ problem.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check a substitution file against a problem.
    Verify {
        problem: PathBuf,
        subst: PathBuf,
        /// Rewrite step budget; defaults to $LSF_FUEL, then 1000000.
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// Normalize a closed expression.
    Normalize {
        expr: String,
        #[arg(long, value_enum, default_value = "lambdasigma")]
        mode: ModeArg,
        /// Print one `position  rule  term` line per step.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Work with annotated problem collections.
    Corpus {
        #[command(subcommand)]
        action: CorpusCommand,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusCommand {
    /// Check every annotated problem; the bundled corpus when DIR is omitted.
    Run { dir: Option<PathBuf> },
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_problem(path: &Path) -> Result<ProblemFile, CliError> {
    parse_problem(&read_file(path)?).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

/// Runs one invocation. `argv[0]` is the program name. Returns the exit
/// status: 0 for success or a true verdict, 1 for a false verdict or no
/// solution within bounds, 2 for errors.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Check { file } => {
            let pf = load_problem(&file)?;
            let report = validate_problem(&pf.problem);
            write!(out, "{report}")?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Precook { file, common } => {
            let pf = load_problem(&file)?;
            let cooked = ProblemFile {
                problem: transform::precook(&pf.problem)?,
                ..pf
            };
            write!(out, "{}", render_problem(&cooked, common.style()))?;
            Ok(0)
        }
        Command::Reduce { file, common } => {
            let pf = load_problem(&file)?;
            let cert = transform::reduce_problem(&pf.problem, common.fuel()?)?;
            let target = ProblemFile {
                problem: cert.target.clone(),
                ctx_names: pf.ctx_names.clone(),
                expect: None,
                certificate: Some(cert.var_map.clone()),
            };
            let style = common.style();
            writeln!(
                out,
                "; {} = {}",
                render_term(&target.problem.lhs, style, &target.ctx_names),
                render_term(&target.problem.rhs, style, &target.ctx_names)
            )?;
            write!(out, "{}", render_problem(&target, style))?;
            Ok(0)
        }
        Command::Solve {
            file,
            bound,
            depth,
            all,
            max_solutions,
            mode,
            oracle,
            common,
        } => {
            let mut pf = load_problem(&file)?;
            if let Some(m) = mode {
                pf.problem.mode = m.into();
            }
            let cfg = SearchConfig {
                size_bound: bound,
                depth_bound: depth,
                fuel: common.fuel()?,
                find_all: all,
                max_solutions,
            };
            let outcome = solve_file(&pf, &cfg, oracle)?;
            report_outcome(&pf, &outcome, all, common.style(), out, err)
        }
        Command::Verify {
            problem,
            subst,
            fuel,
        } => {
            let pf = load_problem(&problem)?;
            let theta =
                parse_subst(&read_file(&subst)?, &pf).map_err(|source| CliError::Parse {
                    path: subst.display().to_string(),
                    source,
                })?;
            let fuel = Common {
                fuel,
                debruijn: false,
            }
            .fuel()?;
            for w in solver::solution_warnings(&pf.problem, &theta) {
                writeln!(err, "warning: {w}")?;
            }
            if solver::check_solution(&pf.problem, &theta, fuel)? {
                writeln!(out, "solution holds")?;
                Ok(0)
            } else {
                writeln!(out, "not a solution")?;
                Ok(1)
            }
        }
        Command::Normalize {
            expr,
            mode,
            trace,
            common,
        } => {
            let t = parse_term(&expr, &[]).map_err(|source| CliError::Parse {
                path: "<expr>".into(),
                source,
            })?;
            let rules = RuleSet::from(Mode::from(mode));
            let style = common.style();
            let fuel = common.fuel()?;
            let nf = if trace {
                let (nf, tr) = normalize_traced(&t, rules, Strategy::LeftmostOutermost, fuel)?;
                for s in &tr.steps {
                    writeln!(
                        out,
                        "{}  {}  {}",
                        s.path,
                        s.rule,
                        render_term(&s.term, style, &[])
                    )?;
                }
                nf
            } else {
                normalize_with(&t, rules, Strategy::LeftmostOutermost, fuel)?
            };
            writeln!(out, "{}", render_term(&nf, style, &[]))?;
            Ok(0)
        }
        Command::Corpus {
            action: CorpusCommand::Run { dir },
        } => {
            let files = match dir {
                None => corpus::bundled()
                    .map_err(|(name, source)| CliError::Parse { path: name, source })?,
                Some(d) => corpus::load_dir(&d)?,
            };
            let mut failures = 0;
            for (name, pf) in &files {
                let line = match corpus::check_expectation(pf, DEFAULT_FUEL) {
                    Ok(None) => format!("SKIP  {name}  no annotation"),
                    Ok(Some(r)) if r.passed() => format!("PASS  {name}  {r}"),
                    Ok(Some(r)) => {
                        failures += 1;
                        format!("FAIL  {name}  {r}")
                    }
                    Err(e) => {
                        failures += 1;
                        format!("FAIL  {name}  error: {e}")
                    }
                };
                writeln!(out, "{line}")?;
            }
            writeln!(out, "{} problems, {} failed", files.len(), failures)?;
            Ok(if failures == 0 { 0 } else { 1 })
        }
    }
}

/// Runs the solver appropriate to the problem's mode. Solutions are always
/// for the metavariables of `pf` itself.
pub fn solve_file(
    pf: &ProblemFile,
    cfg: &SearchConfig,
    oracle: bool,
) -> Result<SearchOutcome, CliError> {
    let p = &pf.problem;
    if oracle {
        return Ok(solver::decide_small_lambda(p, cfg)?);
    }
    match p.mode {
        Mode::SigmaOnly if free_metavars(&p.rhs).is_empty() => Ok(solver::match_sigma(p, cfg)?),
        Mode::SigmaOnly => Ok(solver::solve_sigma(p, cfg)?),
        Mode::LambdaSigma => {
            let r = solver::solve_via_reduction(p, cfg)?;
            Ok(match r.target_outcome {
                SearchOutcome::Solved(_) => SearchOutcome::Solved(r.lifted),
                other => other,
            })
        }
    }
}

fn report_outcome(
    pf: &ProblemFile,
    outcome: &SearchOutcome,
    all: bool,
    style: Style,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    match outcome {
        SearchOutcome::Solved(sols) => {
            for (i, theta) in sols.iter().enumerate() {
                if all {
                    writeln!(out, "; solution {}", i + 1)?;
                }
                write_solution(pf, theta, style, out)?;
            }
            Ok(0)
        }
        SearchOutcome::ExhaustedNoSolution(bounds) => {
            writeln!(out, "no solution within {bounds}")?;
            Ok(1)
        }
        SearchOutcome::Aborted(e) => {
            writeln!(err, "error: search aborted: {e}")?;
            Ok(2)
        }
    }
}

fn write_solution(
    pf: &ProblemFile,
    theta: &MetaSubst,
    style: Style,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    if theta.is_empty() {
        return writeln!(out, "solved with the empty substitution");
    }
    for (x, t) in theta.iter() {
        writeln!(out, "{}", render_binding(pf, x, t, style))?;
    }
    Ok(())
}
