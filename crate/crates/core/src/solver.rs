//! Bounded search over simple terms.
//!
//! Every search is a plain enumeration of total assignments; nothing here is
//! a unification procedure. A negative answer only ever means "no solution
//! within these bounds".

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::rewrite::{equal_under, normalize_sigma, RewriteError, RuleSet, DEFAULT_FUEL};
use crate::sorts::{
    check_term, validate_problem, Context, MetaDecls, Mode, SimpleType, Sort, UnifProblem,
    ValidationReport,
};
use crate::term::{free_metavars, graft, is_simple, MetaSubst, Term};
use crate::transform::{self, TransformError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub size_bound: usize,
    pub depth_bound: usize,
    pub fuel: u64,
    /// Collect up to `max_solutions` instead of stopping at the first.
    pub find_all: bool,
    pub max_solutions: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            size_bound: 4,
            depth_bound: 64,
            fuel: DEFAULT_FUEL,
            find_all: false,
            max_solutions: 16,
        }
    }
}

impl SearchConfig {
    pub fn with_bound(size_bound: usize) -> Self {
        SearchConfig {
            size_bound,
            ..Self::default()
        }
    }

    fn bounds(&self) -> SearchBounds {
        SearchBounds {
            size_bound: self.size_bound,
            depth_bound: self.depth_bound,
        }
    }

    fn limit(&self) -> usize {
        if self.find_all {
            self.max_solutions.max(1)
        } else {
            1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub size_bound: usize,
    pub depth_bound: usize,
}

impl fmt::Display for SearchBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "size ≤ {}, depth ≤ {}",
            self.size_bound, self.depth_bound
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Solved(Vec<MetaSubst>),
    ExhaustedNoSolution(SearchBounds),
    Aborted(RewriteError),
}

impl SearchOutcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, SearchOutcome::Solved(_))
    }

    pub fn solutions(&self) -> &[MetaSubst] {
        match self {
            SearchOutcome::Solved(v) => v,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("expected a problem in {expected} mode")]
    WrongMode { expected: Mode },
    #[error("not a valid problem:\n{0}")]
    InvalidProblem(ValidationReport),
    #[error("matching needs a right-hand side without metavariables")]
    NotMatching,
    #[error("no binding for ?{0}")]
    MissingBinding(String),
    #[error("?{0} is not declared by the problem")]
    UnknownMeta(String),
    #[error("binding for ?{name} is ill-typed: {error}")]
    IllTyped {
        name: String,
        error: crate::sorts::SortError,
    },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// Simple, β-normal terms of a given sort, memoized by `(context, type, size)`.
///
/// Within one size the order is: bare indices, index-headed applications,
/// abstractions, then metavariables of `pool` under a shift.
pub struct TermEnumerator<'a> {
    pool: &'a MetaDecls,
    memo: HashMap<(Context, SimpleType, usize), Rc<Vec<Term>>>,
}

impl<'a> TermEnumerator<'a> {
    pub fn new(pool: &'a MetaDecls) -> Self {
        TermEnumerator {
            pool,
            memo: HashMap::new(),
        }
    }

    /// All terms of exactly `size` constructors.
    pub fn of_size(&mut self, ctx: &Context, ty: &SimpleType, size: usize) -> Rc<Vec<Term>> {
        let key = (ctx.clone(), ty.clone(), size);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let out = Rc::new(self.build(ctx, ty, size));
        self.memo.insert(key, out.clone());
        out
    }

    fn build(&mut self, ctx: &Context, ty: &SimpleType, size: usize) -> Vec<Term> {
        let mut out = Vec::new();
        if size == 0 {
            return out;
        }
        if size == 1 {
            for (i, t) in ctx.iter().enumerate() {
                if t == ty {
                    out.push(Term::Index(i as u32 + 1));
                }
            }
        }
        // (i e1 ... ej) has size 1 + j + Σ|ek|
        for (i, head_ty) in ctx.iter().enumerate() {
            let (args, result) = head_ty.uncurry();
            for j in 1..=args.len() {
                if size < 1 + 2 * j {
                    break;
                }
                let rest =
                    SimpleType::arrows(args[j..].iter().map(|a| (*a).clone()), result.clone());
                if &rest != ty {
                    continue;
                }
                let arg_tys: Vec<SimpleType> = args[..j].iter().map(|a| (*a).clone()).collect();
                for split in compositions(size - 1 - j, j) {
                    let lists: Vec<Rc<Vec<Term>>> = arg_tys
                        .iter()
                        .zip(&split)
                        .map(|(a, &n)| self.of_size(ctx, a, n))
                        .collect();
                    for_each_product(&lists, |choice| {
                        out.push(Term::apps(
                            Term::Index(i as u32 + 1),
                            choice.iter().cloned(),
                        ));
                    });
                }
            }
        }
        if let SimpleType::Arrow(dom, cod) = ty {
            if size >= 2 {
                let inner = ctx.push((**dom).clone());
                for body in self.of_size(&inner, cod, size - 1).iter() {
                    out.push(Term::lam(body.clone()));
                }
            }
        }
        for (name, sort) in self.pool {
            if &sort.ty != ty || sort.ctx.len() > ctx.len() {
                continue;
            }
            let k = ctx.len() - sort.ctx.len();
            if ctx.drop_front(k).as_ref() != Some(&sort.ctx) {
                continue;
            }
            match (k, size) {
                (0, 1) => out.push(Term::meta(name.clone())),
                (k, 3) if k > 0 => out.push(Term::shifted_meta(name.clone(), k as u32)),
                _ => {}
            }
        }
        out
    }
}

/// Ordered ways to write `total` as `parts` positive summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if total < parts {
        return vec![];
    }
    let mut out = Vec::new();
    for first in 1..=total - (parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn for_each_product(lists: &[Rc<Vec<Term>>], mut f: impl FnMut(&[Term])) {
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; lists.len()];
    let mut choice: Vec<Term> = lists.iter().map(|l| l[0].clone()).collect();
    loop {
        f(&choice);
        // odometer, last position fastest
        let mut k = lists.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                choice[k] = lists[k][idx[k]].clone();
                break;
            }
            idx[k] = 0;
            choice[k] = lists[k][0].clone();
        }
    }
}

/// Simple terms of `sort` in nondecreasing size, up to the configured bounds.
pub fn enumerate_simple_terms(sort: &Sort, pool: &MetaDecls, cfg: &SearchConfig) -> Vec<Term> {
    let mut gen = TermEnumerator::new(pool);
    let mut out = Vec::new();
    for size in 1..=cfg.size_bound {
        out.extend(
            gen.of_size(&sort.ctx, &sort.ty, size)
                .iter()
                .filter(|t| t.depth() <= cfg.depth_bound)
                .cloned(),
        );
    }
    out
}

struct Search<'p> {
    names: Vec<String>,
    candidates: Vec<Vec<Term>>,
    problem: &'p UnifProblem,
    cfg: &'p SearchConfig,
    found: Vec<MetaSubst>,
}

impl<'p> Search<'p> {
    fn new(problem: &'p UnifProblem, cfg: &'p SearchConfig) -> Self {
        let pool = MetaDecls::new();
        let mut names = Vec::new();
        let mut candidates = Vec::new();
        for (name, sort) in &problem.metavars {
            names.push(name.clone());
            candidates.push(enumerate_simple_terms(sort, &pool, cfg));
        }
        Search {
            names,
            candidates,
            problem,
            cfg,
            found: Vec::new(),
        }
    }

    fn assignment(&self, chosen: &[usize]) -> MetaSubst {
        let bindings = chosen
            .iter()
            .enumerate()
            .map(|(v, &c)| (self.names[v].clone(), self.candidates[v][c].clone()));
        MetaSubst::new(bindings).expect("candidates are closed terms")
    }

    fn is_solution(&self, theta: &MetaSubst, rules: RuleSet) -> Result<bool, RewriteError> {
        equal_under(
            &graft(theta, &self.problem.lhs),
            &graft(theta, &self.problem.rhs),
            rules,
            self.cfg.fuel,
        )
    }

    fn done(&self) -> bool {
        self.found.len() >= self.cfg.limit()
    }

    /// Depth-first over assignments in product order; `prune` may reject a
    /// partial assignment of the first `level` variables.
    fn run(
        &mut self,
        rules: RuleSet,
        prune: &mut dyn FnMut(&MetaSubst) -> Result<bool, RewriteError>,
    ) -> Result<(), RewriteError> {
        let mut chosen = Vec::with_capacity(self.names.len());
        if prune(&MetaSubst::empty())? {
            return Ok(());
        }
        self.descend(&mut chosen, rules, prune)
    }

    fn descend(
        &mut self,
        chosen: &mut Vec<usize>,
        rules: RuleSet,
        prune: &mut dyn FnMut(&MetaSubst) -> Result<bool, RewriteError>,
    ) -> Result<(), RewriteError> {
        let level = chosen.len();
        if level == self.names.len() {
            let theta = self.assignment(chosen);
            if self.is_solution(&theta, rules)? {
                self.found.push(theta);
            }
            return Ok(());
        }
        for c in 0..self.candidates[level].len() {
            chosen.push(c);
            let skip = level + 1 < self.names.len() && prune(&self.assignment(chosen))?;
            if !skip {
                self.descend(chosen, rules, prune)?;
            }
            chosen.pop();
            if self.done() {
                break;
            }
        }
        Ok(())
    }

    fn outcome(self, result: Result<(), RewriteError>) -> SearchOutcome {
        match result {
            Err(e) => SearchOutcome::Aborted(e),
            Ok(()) if self.found.is_empty() => {
                SearchOutcome::ExhaustedNoSolution(self.cfg.bounds())
            }
            Ok(()) => SearchOutcome::Solved(self.found),
        }
    }
}

fn require_valid(p: &UnifProblem, mode: Mode) -> Result<(), SolverError> {
    if p.mode != mode {
        return Err(SolverError::WrongMode { expected: mode });
    }
    let report = validate_problem(p);
    if !report.passed() {
        return Err(SolverError::InvalidProblem(report));
    }
    Ok(())
}

/// Bounded σ-unification: every declared metavariable ranges over closed
/// simple terms of its sort.
pub fn solve_sigma(p: &UnifProblem, cfg: &SearchConfig) -> Result<SearchOutcome, SolverError> {
    require_valid(p, Mode::SigmaOnly)?;
    let mut search = Search::new(p, cfg);
    let result = search.run(RuleSet::SigmaOnly, &mut |_| Ok(false));
    Ok(search.outcome(result))
}

/// Shape of a normal form's head: leading abstractions, then either a rigid
/// index applied to some arguments or something flexible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadShape {
    Rigid { lams: usize, head: u32, args: usize },
    Flex,
}

pub fn head_shape(t: &Term) -> HeadShape {
    let mut lams = 0;
    let mut t = t;
    while let Term::Lam(b) = t {
        lams += 1;
        t = b;
    }
    let mut args = 0;
    while let Term::App(f, _) = t {
        args += 1;
        t = f;
    }
    match t {
        Term::Index(i) => HeadShape::Rigid {
            lams,
            head: *i,
            args,
        },
        _ => HeadShape::Flex,
    }
}

/// Bounded σ-matching. Same results as [`solve_sigma`], but a partial
/// assignment is abandoned as soon as the σ-normal left side has a rigid
/// head that differs from the right side's.
pub fn match_sigma(p: &UnifProblem, cfg: &SearchConfig) -> Result<SearchOutcome, SolverError> {
    require_valid(p, Mode::SigmaOnly)?;
    if !free_metavars(&p.rhs).is_empty() {
        return Err(SolverError::NotMatching);
    }
    let rhs = match normalize_sigma(&p.rhs, cfg.fuel) {
        Ok(t) => t,
        Err(e) => return Ok(SearchOutcome::Aborted(e)),
    };
    let target = head_shape(&rhs);
    let lhs = p.lhs.clone();
    let fuel = cfg.fuel;
    let mut prune = move |partial: &MetaSubst| -> Result<bool, RewriteError> {
        if target == HeadShape::Flex {
            return Ok(false);
        }
        let nf = normalize_sigma(&graft(partial, &lhs), fuel)?;
        Ok(matches!(head_shape(&nf), HeadShape::Rigid { .. } if head_shape(&nf) != target))
    };
    let mut search = Search::new(p, cfg);
    let result = search.run(RuleSet::SigmaOnly, &mut prune);
    Ok(search.outcome(result))
}

fn check_bindings(p: &UnifProblem, theta: &MetaSubst) -> Result<(), SolverError> {
    for x in free_metavars(&p.lhs)
        .into_iter()
        .chain(free_metavars(&p.rhs))
    {
        if !theta.contains(&x) {
            return Err(SolverError::MissingBinding(x));
        }
    }
    for (x, t) in theta.iter() {
        let sort = p
            .metavars
            .get(x)
            .ok_or_else(|| SolverError::UnknownMeta(x.clone()))?;
        check_term(&sort.ctx, &p.metavars, t, &sort.ty).map_err(|error| SolverError::IllTyped {
            name: x.clone(),
            error,
        })?;
    }
    Ok(())
}

/// Whether `θ` solves `p` under the equality of `p.mode`. λ-calculus form
/// problems are pre-cooked first, and bindings are sort-checked.
pub fn check_solution(p: &UnifProblem, theta: &MetaSubst, fuel: u64) -> Result<bool, SolverError> {
    let p = transform::to_lambda_sigma_form(p)?;
    check_bindings(&p, theta)?;
    Ok(equal_under(
        &graft(theta, &p.lhs),
        &graft(theta, &p.rhs),
        p.mode.into(),
        fuel,
    )?)
}

/// Remarks about a user-supplied solution that do not affect the verdict.
pub fn solution_warnings(p: &UnifProblem, theta: &MetaSubst) -> Vec<String> {
    let mut out = Vec::new();
    for (x, t) in theta.iter() {
        if !is_simple(t) {
            out.push(format!("binding for ?{x} is not simple"));
        }
        if p.mode == Mode::SigmaOnly && t.has_beta_redex() {
            out.push(format!(
                "binding for ?{x} contains a β-redex, which σ leaves inert"
            ));
        }
    }
    out
}

/// Brute-force λ-side oracle: closed β-normal λ-terms for every unknown,
/// checked under λσ equality.
pub fn decide_small_lambda(
    p: &UnifProblem,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SolverError> {
    if p.mode != Mode::LambdaSigma {
        return Err(SolverError::WrongMode {
            expected: Mode::LambdaSigma,
        });
    }
    let cooked = transform::to_lambda_sigma_form(p)?;
    require_valid(&cooked, Mode::LambdaSigma)?;
    let mut search = Search::new(&cooked, cfg);
    let result = search.run(RuleSet::LambdaSigma, &mut |_| Ok(false));
    Ok(search.outcome(result))
}

/// Size bound on the σ side that covers every source solution of size at
/// most `source_bound`: η-expanding a head of arity `n` adds at most `2n`
/// constructors to the body below the `n` abstractions.
pub fn corresponding_sigma_bound(p: &UnifProblem, source_bound: usize) -> usize {
    let max_arity = p.metavars.values().map(|s| s.ty.arity()).max().unwrap_or(0);
    source_bound + 2 * max_arity
}

/// Result of solving a λσ problem through its σ-unification counterpart.
#[derive(Clone, Debug)]
pub struct ReducedSolve {
    pub certificate: transform::ReductionCertificate,
    pub target_outcome: SearchOutcome,
    /// Lifted solutions of the source, in the order they were found.
    pub lifted: Vec<MetaSubst>,
}

/// Reduces `p`, solves the σ problem, and lifts every solution back.
pub fn solve_via_reduction(
    p: &UnifProblem,
    cfg: &SearchConfig,
) -> Result<ReducedSolve, SolverError> {
    let certificate = transform::reduce_problem(p, cfg.fuel)?;
    let target_outcome = solve_sigma(&certificate.target, cfg)?;
    let lifted = target_outcome
        .solutions()
        .iter()
        .map(|theta| transform::lift_solution(&certificate, theta))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReducedSolve {
        certificate,
        target_outcome,
        lifted,
    })
}
