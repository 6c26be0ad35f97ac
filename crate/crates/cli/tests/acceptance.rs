//! Acceptance gate. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

mod common;

use std::time::{Duration, Instant};

use lsf_cli::corpus;
use lsf_cli::render::{render_problem, render_term, Style};
use lsf_cli::syntax::{parse_problem, Expected, ProblemFile};
use lsf_core::rewrite::{normalize, normalize_traced, RewriteError, RuleSet, Strategy};
use lsf_core::solver::{
    check_solution, corresponding_sigma_bound, decide_small_lambda, solve_sigma, SearchConfig,
    SearchOutcome,
};
use lsf_core::sorts::{check_term, Mode};
use lsf_core::term::canonicalize_term;
use lsf_core::transform::{
    lift_solution, project_solution, reduce_problem, substituted_instance, validate_reduced_problem,
};
use lsf_testkit::pure::normalize_via_encoding;
use lsf_testkit::{second_order_problem, sorted_terms, substituted_case, SortedTerm};

const FUEL: u64 = 1_000_000;
const TERM_SEED: u64 = 0x5eed_0001;
const TERMS: usize = 10_000;
const NORMALIZE_TIME_LIMIT: Duration = Duration::from_secs(60);
const PROP4_SEED: u64 = 0x5eed_0004;
const PROP4_CASES: u64 = 1_000;
const PROBLEM_SEED: u64 = 0x5eed_0005;
const GENERATED_PROBLEMS: u64 = 500;
const TRANSFER_TIME_LIMIT: Duration = Duration::from_secs(120);
const MAX_SOLUTIONS: usize = 16;
const ENCODING_SEED: u64 = 0x5eed_0008;
const ENCODING_TERMS: usize = 2_000;

struct Gate {
    failed: Vec<usize>,
}

impl Gate {
    fn report(&mut self, n: usize, title: &str, ok: bool, detail: String) {
        println!(
            "{} {n}. {title}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            self.failed.push(n);
        }
    }
}

struct Normalized {
    exhausted: usize,
    strategy_mismatches: Vec<String>,
    sort_violations: Vec<String>,
    elapsed: Duration,
}

fn normalize_all(terms: &[SortedTerm]) -> Normalized {
    let mut r = Normalized {
        exhausted: 0,
        strategy_mismatches: Vec::new(),
        sort_violations: Vec::new(),
        elapsed: Duration::ZERO,
    };
    let start = Instant::now();
    for (i, st) in terms.iter().enumerate() {
        let (nf, trace) = match normalize_traced(
            &st.term,
            RuleSet::SigmaOnly,
            Strategy::LeftmostOutermost,
            FUEL,
        ) {
            Ok(x) => x,
            Err(RewriteError::FuelExhausted { .. }) => {
                r.exhausted += 1;
                continue;
            }
        };
        for step in &trace.steps {
            if let Err(e) = check_term(&st.ctx, &st.metas, &step.term, &st.ty) {
                r.sort_violations.push(format!(
                    "term {i}, step at {} ({}): {e}",
                    step.path, step.rule
                ));
            }
        }
        let random = normalize_traced(
            &st.term,
            RuleSet::SigmaOnly,
            Strategy::Random(i as u64),
            FUEL,
        );
        let same = match &random {
            Ok((other, _)) => {
                render_term(other, Style::DeBruijn, &[]) == render_term(&nf, Style::DeBruijn, &[])
            }
            Err(_) => false,
        };
        if !same {
            r.strategy_mismatches.push(format!("term {i}"));
        }
    }
    r.elapsed = start.elapsed();
    r
}

fn lambda_corpus() -> Vec<(String, ProblemFile)> {
    corpus::bundled()
        .expect("bundled corpus parses")
        .into_iter()
        .filter(|(_, pf)| pf.problem.mode == Mode::LambdaSigma)
        .collect()
}

struct Transfer {
    checked: usize,
    lifted_ok: usize,
    lifted_total: usize,
    failures: Vec<String>,
    negatives: Vec<String>,
    round_trip_checked: usize,
    round_trip_failures: Vec<String>,
    elapsed: Duration,
}

fn transfer(files: &[(String, ProblemFile)]) -> Transfer {
    let mut t = Transfer {
        checked: 0,
        lifted_ok: 0,
        lifted_total: 0,
        failures: Vec::new(),
        negatives: Vec::new(),
        round_trip_checked: 0,
        round_trip_failures: Vec::new(),
        elapsed: Duration::ZERO,
    };
    let start = Instant::now();
    for (name, pf) in files {
        let Some(expect) = pf.expect else { continue };
        let p = &pf.problem;
        let all = |bound| SearchConfig {
            find_all: true,
            max_solutions: MAX_SOLUTIONS,
            ..SearchConfig::with_bound(bound)
        };
        let source = decide_small_lambda(p, &all(expect.bound)).expect("corpus problems are valid");
        let cert = reduce_problem(p, FUEL).expect("corpus problems reduce");
        let target_bound = corresponding_sigma_bound(p, expect.bound);
        let target =
            solve_sigma(&cert.target, &all(target_bound)).expect("reduced problems are valid");
        match (expect.outcome, source.is_solved()) {
            (Expected::Solvable, true) => {
                t.checked += 1;
                if !target.is_solved() {
                    t.failures.push(format!(
                        "{name}: σ side found nothing at bound {target_bound}"
                    ));
                }
                for theta in target.solutions() {
                    t.lifted_total += 1;
                    let lifted = lift_solution(&cert, theta).unwrap();
                    if check_solution(p, &lifted, FUEL) == Ok(true) {
                        t.lifted_ok += 1;
                    } else {
                        t.failures
                            .push(format!("{name}: lifted solution {lifted:?} fails"));
                    }
                    t.round_trip_checked += 1;
                    if project_solution(&cert, &lifted).as_ref() != Ok(theta) {
                        t.round_trip_failures
                            .push(format!("{name}: project(lift(θ′)) ≠ θ′"));
                    }
                }
                for theta in source.solutions() {
                    // only η-long bindings have a projection
                    let Ok(projected) = project_solution(&cert, theta) else {
                        continue;
                    };
                    t.round_trip_checked += 1;
                    if lift_solution(&cert, &projected).as_ref() != Ok(theta) {
                        t.round_trip_failures
                            .push(format!("{name}: lift(project(θ)) ≠ θ"));
                    }
                }
            }
            (Expected::NoSolution, false) => {
                let verdict = match target {
                    SearchOutcome::ExhaustedNoSolution(_) => "σ side also exhausts",
                    SearchOutcome::Solved(_) => "σ side finds a solution",
                    SearchOutcome::Aborted(_) => "σ side aborts",
                };
                t.negatives
                    .push(format!("{name}: {verdict} at bound {target_bound}"));
            }
            _ => t.failures.push(format!("{name}: annotation does not hold")),
        }
    }
    t.elapsed = start.elapsed();
    t
}

fn main() {
    let mut gate = Gate { failed: Vec::new() };

    let terms = sorted_terms(TERM_SEED, TERMS);
    let n = normalize_all(&terms);
    gate.report(
        1,
        "σ normalization of generated terms",
        n.exhausted == 0 && n.elapsed < NORMALIZE_TIME_LIMIT,
        format!(
            "{} terms, {} fuel exhaustions, {:.1}s (limit {}s)",
            terms.len(),
            n.exhausted,
            n.elapsed.as_secs_f64(),
            NORMALIZE_TIME_LIMIT.as_secs()
        ),
    );
    gate.report(
        2,
        "leftmost-outermost and random strategies agree",
        n.strategy_mismatches.is_empty() && n.exhausted == 0,
        format!(
            "{} of {} differ {:?}",
            n.strategy_mismatches.len(),
            terms.len(),
            n.strategy_mismatches.iter().take(3).collect::<Vec<_>>()
        ),
    );
    gate.report(
        3,
        "subject reduction along every trace",
        n.sort_violations.is_empty() && n.exhausted == 0,
        format!(
            "{} violations {:?}",
            n.sort_violations.len(),
            n.sort_violations.iter().take(3).collect::<Vec<_>>()
        ),
    );

    let mut agree = 0;
    let mut beta_steps = 0;
    let mut problems4 = Vec::new();
    for seed in 0..PROP4_CASES {
        let c = substituted_case(PROP4_SEED.wrapping_add(seed));
        match substituted_instance(&c.ctx, &c.metavars, &c.a, &c.theta, FUEL) {
            Ok(check) => {
                beta_steps += check.sigma_beta_steps();
                if check.agrees {
                    agree += 1;
                } else {
                    problems4.push(format!(
                        "seed {seed}: {:?} vs {:?}",
                        check.lambda_sigma_nf, check.sigma_nf
                    ));
                }
            }
            Err(e) => problems4.push(format!("seed {seed}: {e}")),
        }
    }
    gate.report(
        4,
        "σ and λσ normal forms agree on substituted second-order terms",
        agree == PROP4_CASES as usize && beta_steps == 0,
        format!(
            "{agree}/{PROP4_CASES} agree, {beta_steps} β steps on the σ side {:?}",
            problems4.iter().take(2).collect::<Vec<_>>()
        ),
    );

    let corpus_files = lambda_corpus();
    let mut reduced = 0;
    let mut invalid = Vec::new();
    let generated = (0..GENERATED_PROBLEMS).map(|s| {
        (
            format!("generated #{s}"),
            second_order_problem(PROBLEM_SEED + s),
        )
    });
    let all_problems = corpus_files
        .iter()
        .map(|(n, pf)| (n.clone(), pf.problem.clone()))
        .chain(generated);
    for (name, p) in all_problems {
        match reduce_problem(&p, FUEL) {
            Ok(cert) => {
                reduced += 1;
                let report = validate_reduced_problem(&cert);
                if !report.passed() {
                    invalid.push(format!("{name}:\n{report}"));
                }
            }
            Err(e) => invalid.push(format!("{name}: {e}")),
        }
    }
    gate.report(
        5,
        "reduced problems pass validation",
        invalid.is_empty(),
        format!(
            "{reduced} reduced, {} invalid {:?}",
            invalid.len(),
            invalid.iter().take(2).collect::<Vec<_>>()
        ),
    );

    let t = transfer(&corpus_files);
    gate.report(
        6,
        "solutions transfer from the σ side back to the source",
        t.failures.is_empty() && t.checked > 0 && t.elapsed < TRANSFER_TIME_LIMIT,
        format!(
            "{} solvable problems, {}/{} lifted solutions check, {:.1}s (limit {}s) {:?}",
            t.checked,
            t.lifted_ok,
            t.lifted_total,
            t.elapsed.as_secs_f64(),
            TRANSFER_TIME_LIMIT.as_secs(),
            t.failures
        ),
    );
    for line in &t.negatives {
        println!("      recorded: {line}");
    }
    gate.report(
        7,
        "lift and project are inverse",
        t.round_trip_failures.is_empty() && t.round_trip_checked > 0,
        format!(
            "{} pairs checked, {} failures {:?}",
            t.round_trip_checked,
            t.round_trip_failures.len(),
            t.round_trip_failures
        ),
    );

    let mut mismatches = Vec::new();
    for (i, st) in sorted_terms(ENCODING_SEED, ENCODING_TERMS)
        .iter()
        .enumerate()
    {
        for (rules, beta) in [(RuleSet::SigmaOnly, false), (RuleSet::LambdaSigma, true)] {
            let direct = normalize(&st.term, rules, FUEL).map(|t| canonicalize_term(&t));
            if direct.as_ref() != Ok(&normalize_via_encoding(&st.term, beta)) {
                mismatches.push(format!("term {i} under {rules:?}"));
            }
        }
    }
    gate.report(
        8,
        "primitive indices agree with the 1/↑ encoding",
        mismatches.is_empty(),
        format!(
            "{ENCODING_TERMS} terms under σ and λσ, {} mismatches {:?}",
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>()
        ),
    );

    let cases = common::golden_cases();
    let golden_failures: Vec<String> = cases
        .iter()
        .filter_map(|c| common::check_golden(c).err())
        .collect();
    let mut round_trip_failures = Vec::new();
    for (name, pf) in corpus::bundled().unwrap() {
        for style in [Style::Named, Style::DeBruijn] {
            if parse_problem(&render_problem(&pf, style)).as_ref() != Ok(&pf) {
                round_trip_failures.push(format!("{name} ({style:?})"));
            }
        }
    }
    gate.report(
        9,
        "CLI goldens and file round-trip",
        golden_failures.is_empty() && round_trip_failures.is_empty(),
        format!(
            "{}/{} goldens match, {} round-trip failures {:?}",
            cases.len() - golden_failures.len(),
            cases.len(),
            round_trip_failures.len(),
            round_trip_failures
        ),
    );
    for f in &golden_failures {
        println!("{f}");
    }

    if !gate.failed.is_empty() {
        println!("failed criteria: {:?}", gate.failed);
        std::process::exit(1);
    }
}
