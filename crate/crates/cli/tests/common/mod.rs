//! Golden CLI cases shared by the golden test and the acceptance gate.
//!
//! Each case is stored as `tests/golden/NAME.out` holding the exit status,
//! standard output and standard error. Set `LSF_UPDATE_GOLDEN=1` to rewrite
//! them.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus(name: &str) -> String {
    crate_dir().join("corpus").join(name).display().to_string()
}

pub fn input(name: &str) -> String {
    crate_dir()
        .join("tests/golden/inputs")
        .join(name)
        .display()
        .to_string()
}

pub struct Case {
    pub name: &'static str,
    pub args: Vec<String>,
}

fn case(name: &'static str, args: &[&str]) -> Case {
    Case {
        name,
        args: args.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn golden_cases() -> Vec<Case> {
    vec![
        case(
            "reduce_xc_eq_c",
            &["reduce", "--debruijn", &corpus("xc_eq_c.sig")],
        ),
        case(
            "reduce_xcd_eq_gdc",
            &["reduce", "--debruijn", &corpus("xcd_eq_gdc.sig")],
        ),
        case(
            "reduce_beta_in_problem",
            &["reduce", "--debruijn", &corpus("beta_in_problem.sig")],
        ),
        case(
            "solve_xc_eq_c_reduced",
            &[
                "solve",
                &corpus("xc_eq_c.reduced.sig"),
                "--bound",
                "2",
                "--debruijn",
            ],
        ),
        case(
            "solve_xc_eq_fc_all",
            &[
                "solve",
                &corpus("xc_eq_fc.sig"),
                "--all",
                "--bound",
                "4",
                "--debruijn",
            ],
        ),
        case(
            "solve_xc_eq_fc_oracle",
            &[
                "solve",
                &corpus("xc_eq_fc.sig"),
                "--oracle",
                "--all",
                "--bound",
                "4",
                "--debruijn",
            ],
        ),
        case(
            "solve_xcd_eq_gdc",
            &[
                "solve",
                &corpus("xcd_eq_gdc.sig"),
                "--bound",
                "7",
                "--debruijn",
            ],
        ),
        case(
            "solve_two_var_pair",
            &[
                "solve",
                &corpus("two_var_pair.sig"),
                "--bound",
                "2",
                "--debruijn",
            ],
        ),
        case(
            "solve_no_solution",
            &[
                "solve",
                &corpus("head_mismatch.sig"),
                "--bound",
                "4",
                "--debruijn",
            ],
        ),
        case(
            "verify_holds",
            &[
                "verify",
                &corpus("xc_eq_c.sig"),
                &input("xc_eq_c.good.subst"),
            ],
        ),
        case(
            "verify_eta_short",
            &[
                "verify",
                &corpus("xc_eq_fc.sig"),
                &input("xc_eq_fc.eta_short.subst"),
            ],
        ),
        case(
            "verify_wrong",
            &[
                "verify",
                &corpus("xc_eq_fc.sig"),
                &input("xc_eq_fc.wrong.subst"),
            ],
        ),
        case(
            "verify_ill_typed",
            &[
                "verify",
                &corpus("xc_eq_c.sig"),
                &input("xc_eq_c.illtyped.subst"),
            ],
        ),
        case(
            "verify_inert_redex",
            &[
                "verify",
                &corpus("xc_eq_c.reduced.sig"),
                &input("xc_eq_c.reduced.redex.subst"),
            ],
        ),
        case(
            "normalize_trace_abs",
            &[
                "normalize",
                "--trace",
                "--debruijn",
                "(clo (lam 1) (shift 1))",
            ],
        ),
        case(
            "normalize_trace_shifts",
            &[
                "normalize",
                "--trace",
                "--debruijn",
                "--mode",
                "sigma",
                "(clo (clo 2 (shift 1)) (shift 2))",
            ],
        ),
        case(
            "normalize_trace_beta",
            &[
                "normalize",
                "--trace",
                "--debruijn",
                "(app (lam (app 1 ?X)) (lam 1))",
            ],
        ),
        case(
            "normalize_trace_sigma_inert",
            &[
                "normalize",
                "--trace",
                "--debruijn",
                "--mode",
                "sigma",
                "(clo (app (lam 1) 2) (cons ?Y id))",
            ],
        ),
    ]
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[String]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lsf".to_string()).chain(args.iter().cloned());
    let code = lsf_cli::run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn transcript(o: &Output) -> String {
    format!(
        "exit: {}\n--- stdout\n{}--- stderr\n{}",
        o.code, o.stdout, o.stderr
    )
}

fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("tests/golden").join(format!("{name}.out"))
}

/// Compares a case against its golden file; `Err` carries a diff summary.
pub fn check_golden(case: &Case) -> Result<(), String> {
    let actual = transcript(&run_cli(&case.args));
    let path = golden_path(case.name);
    if std::env::var_os("LSF_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &actual).unwrap();
        return Ok(());
    }
    let expected = read(&path)?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!(
            "{}: expected\n{expected}\ngot\n{actual}",
            case.name
        ))
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}
