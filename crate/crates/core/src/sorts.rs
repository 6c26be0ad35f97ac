//! Simple types, contexts, sorts and sort checking of λσ terms.
//!
//! Abstractions carry no domain annotation, so checking runs a small
//! first-order unification over type variables. A term whose type is only
//! determined up to such variables is reported as ambiguous by
//! [`sort_check_term`], while [`check_term`] accepts it against an expected
//! type.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::term::{Path, Subst, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimpleType {
    Base(String),
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn base(name: impl Into<String>) -> SimpleType {
        SimpleType::Base(name.into())
    }

    pub fn arrow(dom: SimpleType, cod: SimpleType) -> SimpleType {
        SimpleType::Arrow(Box::new(dom), Box::new(cod))
    }

    /// `A1 → ... → An → B`, right-nested.
    pub fn arrows(args: impl IntoIterator<Item = SimpleType>, result: SimpleType) -> SimpleType {
        let args: Vec<_> = args.into_iter().collect();
        args.into_iter()
            .rev()
            .fold(result, |acc, a| SimpleType::arrow(a, acc))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, SimpleType::Base(_))
    }

    /// Splits `A1 → ... → An → B` into `([A1..An], B)` with `B` atomic.
    pub fn uncurry(&self) -> (Vec<&SimpleType>, &SimpleType) {
        let mut args = Vec::new();
        let mut t = self;
        while let SimpleType::Arrow(a, b) = t {
            args.push(&**a);
            t = b;
        }
        (args, t)
    }

    pub fn arity(&self) -> usize {
        self.uncurry().0.len()
    }

    pub fn base_names(&self, out: &mut BTreeSet<String>) {
        match self {
            SimpleType::Base(n) => {
                out.insert(n.clone());
            }
            SimpleType::Arrow(a, b) => {
                a.base_names(out);
                b.base_names(out);
            }
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base(n) => write!(f, "{n}"),
            SimpleType::Arrow(a, b) => match **a {
                SimpleType::Arrow(..) => write!(f, "({a}) → {b}"),
                _ => write!(f, "{a} → {b}"),
            },
        }
    }
}

/// A typing context. Entry 0 is the type of `Index 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context(pub Vec<SimpleType>);

impl Context {
    pub fn empty() -> Context {
        Context(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Type of `Index n`.
    pub fn lookup(&self, n: u32) -> Option<&SimpleType> {
        (n as usize).checked_sub(1).and_then(|i| self.0.get(i))
    }

    /// `ty . self`
    pub fn push(&self, ty: SimpleType) -> Context {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(ty);
        v.extend(self.0.iter().cloned());
        Context(v)
    }

    /// The context with its `k` most recent entries dropped.
    pub fn drop_front(&self, k: usize) -> Option<Context> {
        self.0.get(k..).map(|rest| Context(rest.to_vec()))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SimpleType> {
        self.0.iter()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "]")
    }
}

/// Binding site of a metavariable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sort {
    pub ctx: Context,
    pub ty: SimpleType,
}

impl Sort {
    pub fn new(ctx: Context, ty: SimpleType) -> Sort {
        Sort { ctx, ty }
    }
}

pub type MetaDecls = BTreeMap<String, Sort>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    SigmaOnly,
    LambdaSigma,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::SigmaOnly => write!(f, "sigma"),
            Mode::LambdaSigma => write!(f, "lambdasigma"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnifProblem {
    pub base_types: BTreeSet<String>,
    pub ctx: Context,
    pub metavars: MetaDecls,
    pub lhs: Term,
    pub rhs: Term,
    pub mode: Mode,
}

/// Order of a type: base types are 1, `A → B` is `max(order A + 1, order B)`.
pub fn order_of_type(ty: &SimpleType) -> usize {
    match ty {
        SimpleType::Base(_) => 1,
        SimpleType::Arrow(a, b) => (order_of_type(a) + 1).max(order_of_type(b)),
    }
}

pub fn check_second_order_context(ctx: &Context) -> bool {
    ctx.iter().all(|t| order_of_type(t) <= 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ill-typed at {path}: {reason}")]
pub struct SortError {
    pub reason: String,
    pub path: Path,
}

impl SortError {
    fn at(path: &Path, reason: impl Into<String>) -> SortError {
        SortError {
            reason: reason.into(),
            path: path.clone(),
        }
    }
}

/// Types with unification variables, used while checking.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    Base(String),
    Arrow(Box<Ty>, Box<Ty>),
    Var(usize),
}

impl Ty {
    fn from_simple(t: &SimpleType) -> Ty {
        match t {
            SimpleType::Base(n) => Ty::Base(n.clone()),
            SimpleType::Arrow(a, b) => {
                Ty::Arrow(Box::new(Ty::from_simple(a)), Box::new(Ty::from_simple(b)))
            }
        }
    }
}

/// The arguments of a `Meta[c1 · ... · cp · ↑^n]` occurrence as seen by the
/// checker, together with the metavariable's declared type.
#[derive(Clone, Debug)]
pub struct MetaOccurrence {
    pub name: String,
    pub path: Path,
    /// `None` when the substitution is not of the form `c1 · ... · cp · ↑^n`.
    pub arg_types: Option<Vec<Option<SimpleType>>>,
    pub ty: SimpleType,
}

struct Checker<'a> {
    metas: &'a MetaDecls,
    vars: Vec<Option<Ty>>,
    occurrences: Vec<(String, Path, Option<Vec<Ty>>, SimpleType)>,
}

type Ctx = Vec<Ty>;

impl<'a> Checker<'a> {
    fn new(metas: &'a MetaDecls) -> Self {
        Checker {
            metas,
            vars: Vec::new(),
            occurrences: Vec::new(),
        }
    }

    fn fresh(&mut self) -> Ty {
        self.vars.push(None);
        Ty::Var(self.vars.len() - 1)
    }

    fn resolve(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Var(v) = t {
            match &self.vars[v] {
                Some(b) => t = b.clone(),
                None => return Ty::Var(v),
            }
        }
        t
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.resolve(t) {
            Ty::Var(w) => v == w,
            Ty::Base(_) => false,
            Ty::Arrow(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> bool {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (a, b) {
            (Ty::Var(v), Ty::Var(w)) if v == w => true,
            (Ty::Var(v), t) | (t, Ty::Var(v)) => {
                if self.occurs(v, &t) {
                    return false;
                }
                self.vars[v] = Some(t);
                true
            }
            (Ty::Base(x), Ty::Base(y)) => x == y,
            (Ty::Arrow(a1, b1), Ty::Arrow(a2, b2)) => self.unify(&a1, &a2) && self.unify(&b1, &b2),
            _ => false,
        }
    }

    /// Fully resolved type, or `None` if a variable remains.
    fn zonk(&self, t: &Ty) -> Option<SimpleType> {
        match self.resolve(t) {
            Ty::Var(_) => None,
            Ty::Base(n) => Some(SimpleType::Base(n)),
            Ty::Arrow(a, b) => Some(SimpleType::arrow(self.zonk(&a)?, self.zonk(&b)?)),
        }
    }

    fn show(&self, t: &Ty) -> String {
        match self.resolve(t) {
            Ty::Var(v) => format!("?t{v}"),
            Ty::Base(n) => n,
            Ty::Arrow(a, b) => format!("({} → {})", self.show(&a), self.show(&b)),
        }
    }

    fn term(&mut self, ctx: &Ctx, t: &Term, path: &Path) -> Result<Ty, SortError> {
        match t {
            Term::Index(n) => {
                let i = (*n as usize)
                    .checked_sub(1)
                    .ok_or_else(|| SortError::at(path, "index 0 is not a de Bruijn index"))?;
                ctx.get(i).cloned().ok_or_else(|| {
                    SortError::at(
                        path,
                        format!(
                            "index {n} out of range in a context of length {}",
                            ctx.len()
                        ),
                    )
                })
            }
            Term::Meta(x) => {
                let sort = self
                    .metas
                    .get(x)
                    .ok_or_else(|| SortError::at(path, format!("undeclared metavariable ?{x}")))?;
                self.meta_in_ctx(x, sort, ctx, path)?;
                self.occurrences
                    .push((x.clone(), path.clone(), Some(Vec::new()), sort.ty.clone()));
                Ok(Ty::from_simple(&sort.ty))
            }
            Term::App(f, a) => {
                // Synthesize the argument first so that (λ. b) a needs no annotation.
                let arg = self.term(ctx, a, &path.child(2))?;
                let fun = match &**f {
                    Term::Lam(body) => {
                        let mut inner = Vec::with_capacity(ctx.len() + 1);
                        inner.push(arg.clone());
                        inner.extend(ctx.iter().cloned());
                        let cod = self.term(&inner, body, &path.child(1).child(1))?;
                        Ty::Arrow(Box::new(arg.clone()), Box::new(cod))
                    }
                    _ => self.term(ctx, f, &path.child(1))?,
                };
                let cod = self.fresh();
                let expected = Ty::Arrow(Box::new(arg.clone()), Box::new(cod.clone()));
                if !self.unify(&fun, &expected) {
                    return Err(SortError::at(
                        path,
                        format!(
                            "cannot apply a term of type {} to an argument of type {}",
                            self.show(&fun),
                            self.show(&arg)
                        ),
                    ));
                }
                Ok(cod)
            }
            Term::Lam(body) => {
                let dom = self.fresh();
                let mut inner = Vec::with_capacity(ctx.len() + 1);
                inner.push(dom.clone());
                inner.extend(ctx.iter().cloned());
                let cod = self.term(&inner, body, &path.child(1))?;
                Ok(Ty::Arrow(Box::new(dom), Box::new(cod)))
            }
            Term::Closure(body, s) => {
                let target = self.subst(ctx, s, &path.child(2))?;
                match &**body {
                    Term::Meta(x) => {
                        let sort = self.metas.get(x).ok_or_else(|| {
                            SortError::at(&path.child(1), format!("undeclared metavariable ?{x}"))
                        })?;
                        self.meta_in_ctx(x, sort, &target, &path.child(1))?;
                        let args = s
                            .as_parts()
                            .map(|(heads, _)| target[..heads.len()].to_vec());
                        self.occurrences
                            .push((x.clone(), path.clone(), args, sort.ty.clone()));
                        Ok(Ty::from_simple(&sort.ty))
                    }
                    _ => self.term(&target, body, &path.child(1)),
                }
            }
        }
    }

    fn meta_in_ctx(
        &mut self,
        x: &str,
        sort: &Sort,
        ctx: &Ctx,
        path: &Path,
    ) -> Result<(), SortError> {
        let declared: Ctx = sort.ctx.iter().map(Ty::from_simple).collect();
        let ok =
            declared.len() == ctx.len() && declared.iter().zip(ctx).all(|(d, c)| self.unify(d, c));
        if ok {
            Ok(())
        } else {
            let shown: Vec<String> = ctx.iter().map(|t| self.show(t)).collect();
            Err(SortError::at(
                path,
                format!(
                    "metavariable ?{x} is declared in context {} but used in [{}]",
                    sort.ctx,
                    shown.join(", ")
                ),
            ))
        }
    }

    /// Target context of `s` when applied in `ctx`.
    fn subst(&mut self, ctx: &Ctx, s: &Subst, path: &Path) -> Result<Ctx, SortError> {
        match s {
            Subst::Shift(k) => ctx.get(*k as usize..).map(|r| r.to_vec()).ok_or_else(|| {
                SortError::at(
                    path,
                    format!("shift by {k} in a context of length {}", ctx.len()),
                )
            }),
            Subst::Cons(h, tail) => {
                let hty = self.term(ctx, h, &path.child(1))?;
                let mut rest = self.subst(ctx, tail, &path.child(2))?;
                rest.insert(0, hty);
                Ok(rest)
            }
            Subst::Comp(first, second) => {
                let mid = self.subst(ctx, second, &path.child(2))?;
                self.subst(&mid, first, &path.child(1))
            }
        }
    }
}

fn to_ctx(ctx: &Context) -> Ctx {
    ctx.iter().map(Ty::from_simple).collect()
}

/// The unique type of `t` in `ctx`.
pub fn sort_check_term(
    ctx: &Context,
    metas: &MetaDecls,
    t: &Term,
) -> Result<SimpleType, SortError> {
    let mut ck = Checker::new(metas);
    let ty = ck.term(&to_ctx(ctx), t, &Path::root())?;
    ck.zonk(&ty).ok_or_else(|| {
        SortError::at(
            &Path::root(),
            format!("type {} is not determined by the term", ck.show(&ty)),
        )
    })
}

/// Checks `t` against an expected type.
pub fn check_term(
    ctx: &Context,
    metas: &MetaDecls,
    t: &Term,
    expected: &SimpleType,
) -> Result<(), SortError> {
    let mut ck = Checker::new(metas);
    let ty = ck.term(&to_ctx(ctx), t, &Path::root())?;
    if ck.unify(&ty, &Ty::from_simple(expected)) {
        Ok(())
    } else {
        Err(SortError::at(
            &Path::root(),
            format!("expected type {expected}, found {}", ck.show(&ty)),
        ))
    }
}

/// The context `Γ'` such that `a[s]` is typed in `ctx` whenever `a` is typed
/// in `Γ'`.
pub fn sort_check_subst(ctx: &Context, metas: &MetaDecls, s: &Subst) -> Result<Context, SortError> {
    let mut ck = Checker::new(metas);
    let target = ck.subst(&to_ctx(ctx), s, &Path::root())?;
    let mut out = Vec::with_capacity(target.len());
    for (i, t) in target.iter().enumerate() {
        out.push(ck.zonk(t).ok_or_else(|| {
            SortError::at(
                &Path::root(),
                format!("type of target entry {} is not determined", i + 1),
            )
        })?);
    }
    Ok(Context(out))
}

/// Checks `t` at `expected` and reports every metavariable occurrence with
/// the types of the explicit arguments in front of its shift.
pub fn metavar_occurrences(
    ctx: &Context,
    metas: &MetaDecls,
    t: &Term,
    expected: &SimpleType,
) -> Result<Vec<MetaOccurrence>, SortError> {
    let mut ck = Checker::new(metas);
    let ty = ck.term(&to_ctx(ctx), t, &Path::root())?;
    if !ck.unify(&ty, &Ty::from_simple(expected)) {
        return Err(SortError::at(
            &Path::root(),
            format!("expected type {expected}, found {}", ck.show(&ty)),
        ));
    }
    let occurrences = std::mem::take(&mut ck.occurrences);
    Ok(occurrences
        .into_iter()
        .map(|(name, path, args, ty)| MetaOccurrence {
            name,
            path,
            arg_types: args.map(|v| v.iter().map(|t| ck.zonk(t)).collect()),
            ty,
        })
        .collect())
}

/// One named check of a [`ValidationReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flag {
    pub name: &'static str,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub flags: Vec<Flag>,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.flags.iter().all(|f| f.passed)
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        self.flags.iter().find(|f| f.name == name).map(|f| f.passed)
    }

    pub(crate) fn push(&mut self, name: &'static str, violations: Vec<String>) {
        self.flags.push(Flag {
            name,
            passed: violations.is_empty(),
        });
        self.violations.extend(violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for flag in &self.flags {
            let verdict = if flag.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{verdict}  {}", flag.name)?;
        }
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

pub const FLAG_SIDES_TYPED: &str = "sides sort-check with equal type";
pub const FLAG_ATOMIC: &str = "common type atomic";
pub const FLAG_CONTEXT_ORDER: &str = "context second order";
pub const FLAG_META_ORDER: &str = "metavariable types of order at most 2";
pub const FLAG_BASE_TYPES: &str = "base types declared";

/// Checks that `p` is a second-order unification problem.
pub fn validate_problem(p: &UnifProblem) -> ValidationReport {
    let mut report = ValidationReport::default();

    let lhs = sort_check_term(&p.ctx, &p.metavars, &p.lhs);
    let rhs = sort_check_term(&p.ctx, &p.metavars, &p.rhs);
    let mut typing = Vec::new();
    let mut common = None;
    match (&lhs, &rhs) {
        (Ok(a), Ok(b)) if a == b => common = Some(a.clone()),
        (Ok(a), Ok(b)) => typing.push(format!("left side has type {a}, right side has type {b}")),
        _ => {
            if let Err(e) = &lhs {
                typing.push(format!("left side: {e}"));
            }
            if let Err(e) = &rhs {
                typing.push(format!("right side: {e}"));
            }
        }
    }
    report.push(FLAG_SIDES_TYPED, typing);

    let atomic = match &common {
        Some(t) if t.is_atomic() => vec![],
        Some(t) => vec![format!("common type {t} is not atomic")],
        None => vec!["no common type".to_string()],
    };
    report.push(FLAG_ATOMIC, atomic);

    let ctx_violations = p
        .ctx
        .iter()
        .enumerate()
        .filter(|(_, t)| order_of_type(t) > 2)
        .map(|(i, t)| {
            format!(
                "context entry {} has type {t} of order {}",
                i + 1,
                order_of_type(t)
            )
        })
        .collect();
    report.push(FLAG_CONTEXT_ORDER, ctx_violations);

    let meta_violations = p
        .metavars
        .iter()
        .filter(|(_, s)| order_of_type(&s.ty) > 2)
        .map(|(x, s)| format!("?{x} has type {} of order {}", s.ty, order_of_type(&s.ty)))
        .collect();
    report.push(FLAG_META_ORDER, meta_violations);

    let mut used = BTreeSet::new();
    for t in p.ctx.iter() {
        t.base_names(&mut used);
    }
    for s in p.metavars.values() {
        s.ty.base_names(&mut used);
        for t in s.ctx.iter() {
            t.base_names(&mut used);
        }
    }
    let undeclared = used
        .difference(&p.base_types)
        .map(|b| format!("base type {b} is not declared"))
        .collect();
    report.push(FLAG_BASE_TYPES, undeclared);

    report
}
