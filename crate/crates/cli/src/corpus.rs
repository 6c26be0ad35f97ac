//! The bundled problem corpus and its self-check.

use std::fmt;
use std::path::Path;

use lsf_core::solver::{self, SearchConfig, SearchOutcome, SolverError};
use lsf_core::sorts::Mode;

use crate::sexp::ParseError;
use crate::syntax::{parse_problem, Expectation, Expected, ProblemFile};
use crate::CliError;

macro_rules! corpus_files {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name)))),*]
    };
}

pub const BUNDLED: &[(&str, &str)] = corpus_files![
    "ground_refl.sig",
    "ground_beta.sig",
    "ground_mismatch.sig",
    "sigma_ground.sig",
    "xc_eq_c.sig",
    "xc_eq_c.reduced.sig",
    "xc_eq_d.sig",
    "xc_eq_fc.sig",
    "xc_eq_ffc.sig",
    "xxc_eq_ffc.sig",
    "xfc_eq_fxc.sig",
    "xcd_eq_d.sig",
    "xcd_eq_gdc.sig",
    "beta_in_problem.sig",
    "two_var_chain.sig",
    "two_var_pair.sig",
    "flex_flex.sig",
    "flex_flex_same.sig",
    "x_eq_fx.sig",
    "head_mismatch.sig",
    "arity_mismatch.sig",
    "xc_eq_fxc.sig",
];

pub fn bundled() -> Result<Vec<(String, ProblemFile)>, (String, ParseError)> {
    BUNDLED
        .iter()
        .map(|(name, text)| {
            parse_problem(text)
                .map(|pf| (name.to_string(), pf))
                .map_err(|e| (name.to_string(), e))
        })
        .collect()
}

/// Every `*.sig` file in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<(String, ProblemFile)>, CliError> {
    let io = |source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "sig"));
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            Ok((name, crate::load_problem(&p)?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observed {
    Solvable,
    NoSolution,
    Aborted(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectationResult {
    pub expected: Expectation,
    pub observed: Observed,
}

impl ExpectationResult {
    pub fn passed(&self) -> bool {
        matches!(
            (self.expected.outcome, &self.observed),
            (Expected::Solvable, Observed::Solvable) | (Expected::NoSolution, Observed::NoSolution)
        )
    }
}

impl fmt::Display for ExpectationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let want = match self.expected.outcome {
            Expected::Solvable => "solvable",
            Expected::NoSolution => "no solution",
        };
        let got = match &self.observed {
            Observed::Solvable => "solvable".to_string(),
            Observed::NoSolution => "no solution".to_string(),
            Observed::Aborted(e) => format!("aborted ({e})"),
        };
        if self.passed() {
            write!(f, "{got} at bound {}", self.expected.bound)
        } else {
            write!(
                f,
                "expected {want} at bound {}, got {got}",
                self.expected.bound
            )
        }
    }
}

/// Re-establishes a file's annotation: λσ problems with the direct λ-term
/// search, σ problems with the σ solver.
pub fn check_expectation(
    pf: &ProblemFile,
    fuel: u64,
) -> Result<Option<ExpectationResult>, SolverError> {
    let Some(expected) = pf.expect else {
        return Ok(None);
    };
    let cfg = SearchConfig {
        fuel,
        ..SearchConfig::with_bound(expected.bound)
    };
    let outcome = match pf.problem.mode {
        Mode::LambdaSigma => solver::decide_small_lambda(&pf.problem, &cfg)?,
        Mode::SigmaOnly => solver::solve_sigma(&pf.problem, &cfg)?,
    };
    let observed = match outcome {
        SearchOutcome::Solved(_) => Observed::Solvable,
        SearchOutcome::ExhaustedNoSolution(_) => Observed::NoSolution,
        SearchOutcome::Aborted(e) => Observed::Aborted(e.to_string()),
    };
    Ok(Some(ExpectationResult { expected, observed }))
}
