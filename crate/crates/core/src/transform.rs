//! From second-order unification to unification modulo σ.
//!
//! [`precook`] moves a λ-calculus problem into λσ, [`reduce_problem`]
//! replaces every unknown `X : A1 → ... → An → B` by `λ...λ Y` with a fresh
//! `Y` of atomic type and normalizes, and [`lift_solution`] /
//! [`project_solution`] carry solutions across the two problems.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::rewrite::{
    self, normalize_lambda_sigma, normalize_traced, RewriteError, RewriteTrace, RuleId, RuleSet,
    Strategy,
};
use crate::sorts::{
    self, check_second_order_context, check_term, metavar_occurrences, order_of_type,
    sort_check_term, Context, MetaDecls, Mode, Sort, SortError, UnifProblem, ValidationReport,
};
use crate::term::{
    canonicalize_term, free_metavars, graft, is_simple_subst, MetaSubst, MetaSubstError, Term,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error(transparent)]
    IllTyped(#[from] SortError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("?{0} has a type of order greater than 2")]
    OrderTooHigh(String),
    #[error("expected a problem in λ-calculus form: {0}")]
    NotLambdaForm(String),
    #[error("not a second-order unification problem:\n{0}")]
    InvalidProblem(ValidationReport),
    #[error("?{0} is not covered by the reduction certificate")]
    UnknownMeta(String),
    #[error("binding for ?{name} does not start with {arity} abstraction(s)")]
    ShapeMismatch { name: String, arity: usize },
    #[error(transparent)]
    InvalidSubst(#[from] MetaSubstError),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// Links a source problem to its σ-unification counterpart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionCertificate {
    /// `X ↦ (Y, n)` where `X` had `n` arrow arguments.
    pub var_map: BTreeMap<String, (String, usize)>,
    pub source: UnifProblem,
    pub target: UnifProblem,
}

fn precook_term(t: &Term, depth: u32) -> Term {
    match t {
        Term::Index(_) => t.clone(),
        Term::Meta(x) => Term::shifted_meta(x.clone(), depth),
        Term::App(f, a) => Term::app(precook_term(f, depth), precook_term(a, depth)),
        Term::Lam(b) => Term::lam(precook_term(b, depth + 1)),
        Term::Closure(..) => unreachable!("precook runs on closure-free terms"),
    }
}

/// Tags each metavariable occurring under `k` binders with `↑^k`.
pub fn precook(p: &UnifProblem) -> Result<UnifProblem, TransformError> {
    if p.mode != Mode::LambdaSigma {
        return Err(TransformError::NotLambdaForm(
            "pre-cooking applies to λσ problems".into(),
        ));
    }
    if !p.lhs.is_closure_free() || !p.rhs.is_closure_free() {
        return Err(TransformError::NotLambdaForm(
            "the equation contains explicit substitutions".into(),
        ));
    }
    let out = UnifProblem {
        lhs: precook_term(&p.lhs, 0),
        rhs: precook_term(&p.rhs, 0),
        ..p.clone()
    };
    let a = sort_check_term(&out.ctx, &out.metavars, &out.lhs)?;
    check_term(&out.ctx, &out.metavars, &out.rhs, &a)?;
    Ok(out)
}

/// `precook` when `p` is a closure-free λσ problem, `p` itself otherwise.
pub fn to_lambda_sigma_form(p: &UnifProblem) -> Result<UnifProblem, TransformError> {
    if p.mode == Mode::LambdaSigma && p.lhs.is_closure_free() && p.rhs.is_closure_free() {
        precook(p)
    } else {
        Ok(p.clone())
    }
}

/// The lifting substitution `X ↦ λ...λ Y` and its fresh metavariables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lifting {
    pub subst: MetaSubst,
    pub var_map: BTreeMap<String, (String, usize)>,
    pub fresh: MetaDecls,
}

/// Binds every declared `X : (Γ, A1 → ... → An → B)` to `Lam^n(Y)` with `Y`
/// fresh of sort `(An . ... . A1 . Γ, B)`.
pub fn build_lifting_subst(p: &UnifProblem) -> Result<Lifting, TransformError> {
    let mut used: BTreeSet<String> = p.metavars.keys().cloned().collect();
    used.extend(free_metavars(&p.lhs));
    used.extend(free_metavars(&p.rhs));

    let mut counter = 1usize;
    let mut bindings = Vec::new();
    let mut var_map = BTreeMap::new();
    let mut fresh = MetaDecls::new();
    for (x, sort) in &p.metavars {
        if order_of_type(&sort.ty) > 2 {
            return Err(TransformError::OrderTooHigh(x.clone()));
        }
        let y = loop {
            let candidate = format!("{x}'{counter}");
            counter += 1;
            if !used.contains(&candidate) {
                break candidate;
            }
        };
        used.insert(y.clone());

        let arity = sort.ty.arity();
        fresh.insert(y.clone(), lifted_sort(sort));
        bindings.push((x.clone(), Term::lams(arity, Term::meta(y.clone()))));
        var_map.insert(x.clone(), (y, arity));
    }
    Ok(Lifting {
        subst: MetaSubst::new(bindings)?,
        var_map,
        fresh,
    })
}

/// Builds the σ-unification problem `ã = b̃` for a second-order problem.
pub fn reduce_problem(p: &UnifProblem, fuel: u64) -> Result<ReductionCertificate, TransformError> {
    let cooked = precook(p)?;
    let report = sorts::validate_problem(&cooked);
    if !report.passed() {
        return Err(TransformError::InvalidProblem(report));
    }
    let lifting = build_lifting_subst(&cooked)?;
    let lhs = normalize_lambda_sigma(&graft(&lifting.subst, &cooked.lhs), fuel)?;
    let rhs = normalize_lambda_sigma(&graft(&lifting.subst, &cooked.rhs), fuel)?;
    let target = UnifProblem {
        base_types: p.base_types.clone(),
        ctx: p.ctx.clone(),
        metavars: lifting.fresh,
        lhs: canonicalize_term(&lhs),
        rhs: canonicalize_term(&rhs),
        mode: Mode::SigmaOnly,
    };
    Ok(ReductionCertificate {
        var_map: lifting.var_map,
        source: p.clone(),
        target,
    })
}

pub const FLAG_REDUCED_SIDES: &str = "sides sort-check with equal type";
pub const FLAG_REDUCED_CONTEXT: &str = "context second order";
pub const FLAG_REDUCED_ATOMIC: &str = "metavariable occurrences atomic";
pub const FLAG_REDUCED_ARGS: &str = "explicit arguments first order";

/// Checks the shape the reduced problem is expected to have: second-order
/// context, atomic unknowns, and `Y[c1 · ... · cp · ↑^n]` occurrences whose
/// `ci` are first order.
pub fn validate_reduced_problem(cert: &ReductionCertificate) -> ValidationReport {
    let target = &cert.target;
    let mut report = ValidationReport::default();

    let mut typing = Vec::new();
    let mut occurrences = Vec::new();
    match sort_check_term(&target.ctx, &target.metavars, &target.lhs) {
        Ok(ty) => {
            for (side, t) in [("left", &target.lhs), ("right", &target.rhs)] {
                match metavar_occurrences(&target.ctx, &target.metavars, t, &ty) {
                    Ok(occ) => occurrences.extend(occ.into_iter().map(|o| (side, o))),
                    Err(e) => typing.push(format!("{side} side: {e}")),
                }
            }
        }
        Err(e) => typing.push(format!("left side: {e}")),
    }
    report.push(FLAG_REDUCED_SIDES, typing);

    let ctx_violations = if check_second_order_context(&target.ctx) {
        vec![]
    } else {
        vec![format!("context {} is not second order", target.ctx)]
    };
    report.push(FLAG_REDUCED_CONTEXT, ctx_violations);

    let atomic = occurrences
        .iter()
        .filter(|(_, o)| !o.ty.is_atomic())
        .map(|(side, o)| format!("{side} side, {}: ?{} has type {}", o.path, o.name, o.ty))
        .collect();
    report.push(FLAG_REDUCED_ATOMIC, atomic);

    let mut args = Vec::new();
    for (side, o) in &occurrences {
        match &o.arg_types {
            None => args.push(format!(
                "{side} side, {}: substitution on ?{} is not of the form c1 · ... · cp · ↑^n",
                o.path, o.name
            )),
            Some(types) => {
                for (i, t) in types.iter().enumerate() {
                    match t {
                        Some(t) if order_of_type(t) == 1 => {}
                        Some(t) => args.push(format!(
                            "{side} side, {}: argument {} of ?{} has type {t} of order {}",
                            o.path,
                            i + 1,
                            o.name,
                            order_of_type(t)
                        )),
                        None => args.push(format!(
                            "{side} side, {}: type of argument {} of ?{} is undetermined",
                            o.path,
                            i + 1,
                            o.name
                        )),
                    }
                }
            }
        }
    }
    report.push(FLAG_REDUCED_ARGS, args);
    report
}

fn source_for<'a>(
    cert: &'a ReductionCertificate,
    y: &str,
) -> Result<(&'a String, usize), TransformError> {
    cert.var_map
        .iter()
        .find(|(_, (fresh, _))| fresh == y)
        .map(|(x, (_, n))| (x, *n))
        .ok_or_else(|| TransformError::UnknownMeta(y.to_string()))
}

/// `Y_i ↦ c_i` becomes `X_i ↦ λ...λ c_i`.
pub fn lift_solution(
    cert: &ReductionCertificate,
    theta: &MetaSubst,
) -> Result<MetaSubst, TransformError> {
    let mut out = Vec::new();
    for (y, t) in theta.iter() {
        let (x, n) = source_for(cert, y)?;
        out.push((x.clone(), Term::lams(n, t.clone())));
    }
    Ok(MetaSubst::new(out)?)
}

/// `X_i ↦ λ...λ c_i` becomes `Y_i ↦ c_i`.
pub fn project_solution(
    cert: &ReductionCertificate,
    theta: &MetaSubst,
) -> Result<MetaSubst, TransformError> {
    let mut out = Vec::new();
    for (x, t) in theta.iter() {
        let (y, n) = cert
            .var_map
            .get(x)
            .ok_or_else(|| TransformError::UnknownMeta(x.clone()))?;
        let body = t
            .strip_lams(*n)
            .ok_or_else(|| TransformError::ShapeMismatch {
                name: x.clone(),
                arity: *n,
            })?;
        out.push((y.clone(), body.clone()));
    }
    Ok(MetaSubst::new(out)?)
}

/// Both normal forms of `θ a` and the σ-side trace.
#[derive(Clone, Debug)]
pub struct AgreementCheck {
    pub agrees: bool,
    pub lambda_sigma_nf: Term,
    pub sigma_nf: Term,
    pub sigma_trace: RewriteTrace,
}

impl AgreementCheck {
    pub fn sigma_beta_steps(&self) -> usize {
        self.sigma_trace
            .steps
            .iter()
            .filter(|s| s.rule == RuleId::Beta)
            .count()
    }
}

fn precondition(ok: bool, detail: impl FnOnce() -> String) -> Result<(), TransformError> {
    if ok {
        Ok(())
    } else {
        Err(TransformError::PreconditionViolated(detail()))
    }
}

/// Checks the hypotheses under which `(θa)↓λσ = (θa)↓σ` is claimed, then
/// computes both sides.
pub fn substituted_instance(
    ctx: &Context,
    metavars: &MetaDecls,
    a: &Term,
    theta: &MetaSubst,
    fuel: u64,
) -> Result<AgreementCheck, TransformError> {
    precondition(check_second_order_context(ctx), || {
        format!("context {ctx} is not second order")
    })?;
    let ty = sort_check_term(ctx, metavars, a)
        .map_err(|e| TransformError::PreconditionViolated(format!("term is ill-typed: {e}")))?;
    precondition(ty.is_atomic(), || format!("term has non-atomic type {ty}"))?;
    precondition(rewrite::is_normal(a, RuleSet::LambdaSigma), || {
        "term is not λσ-normal".to_string()
    })?;
    for x in free_metavars(a) {
        let sort = &metavars[&x];
        precondition(sort.ty.is_atomic(), || {
            format!("?{x} has non-atomic type {}", sort.ty)
        })?;
        precondition(check_second_order_context(&sort.ctx), || {
            format!("?{x} lives in a context that is not second order")
        })?;
    }
    let occurrences = metavar_occurrences(ctx, metavars, a, &ty)?;
    for o in &occurrences {
        let first_order = o.arg_types.as_ref().is_some_and(|types| {
            types
                .iter()
                .all(|t| matches!(t, Some(t) if order_of_type(t) == 1))
        });
        precondition(first_order, || {
            format!(
                "arguments of ?{} at {} are not all first order",
                o.name, o.path
            )
        })?;
    }
    precondition(is_simple_subst(theta), || {
        "substitution is not simple".to_string()
    })?;
    for (y, t) in theta.iter() {
        precondition(rewrite::is_normal(t, RuleSet::LambdaSigma), || {
            format!("binding for ?{y} is not λσ-normal")
        })?;
        if let Some(sort) = metavars.get(y) {
            check_term(&sort.ctx, metavars, t, &sort.ty).map_err(|e| {
                TransformError::PreconditionViolated(format!("binding for ?{y} is ill-typed: {e}"))
            })?;
        }
    }

    let grafted = graft(theta, a);
    let lambda_sigma_nf = canonicalize_term(&normalize_lambda_sigma(&grafted, fuel)?);
    let (sigma_nf, sigma_trace) =
        normalize_traced(&grafted, RuleSet::SigmaOnly, Strategy::default(), fuel)?;
    let sigma_nf = canonicalize_term(&sigma_nf);
    Ok(AgreementCheck {
        agrees: lambda_sigma_nf == sigma_nf,
        lambda_sigma_nf,
        sigma_nf,
        sigma_trace,
    })
}

/// Whether `θ a` has the same λσ- and σ-normal forms.
pub fn check_prop4_agreement(
    ctx: &Context,
    metavars: &MetaDecls,
    a: &Term,
    theta: &MetaSubst,
    fuel: u64,
) -> Result<bool, TransformError> {
    substituted_instance(ctx, metavars, a, theta, fuel).map(|c| c.agrees)
}

/// `(Γ, A1 → ... → An → B)` becomes `(An . ... . A1 . Γ, B)`.
pub fn lifted_sort(sort: &Sort) -> Sort {
    let (args, result) = sort.ty.uncurry();
    let mut ctx = sort.ctx.clone();
    for a in &args {
        ctx = ctx.push((*a).clone());
    }
    Sort::new(ctx, result.clone())
}
