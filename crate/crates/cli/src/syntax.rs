//! Problem files, named terms, and their elaboration to de Bruijn form.
//!
//! Context blocks list their deepest entry first, so the last entry listed
//! is index 1. Inside the body of a `clo` form no names are in scope; only
//! raw indices and metavariables may appear there.

use std::collections::{BTreeMap, BTreeSet};

use lsf_core::sorts::{Context, MetaDecls, Mode, SimpleType, Sort, UnifProblem};
use lsf_core::term::{MetaSubst, Subst, Term};

use crate::sexp::{read_one, ParseError, Pos, Sexp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NamedTerm {
    Var(String, Pos),
    /// A raw de Bruijn index, written as a bare number.
    Raw(u32),
    Meta(String),
    App(Box<NamedTerm>, Box<NamedTerm>),
    Lam {
        binder: Option<(String, Pos)>,
        /// Parsed for the reader's benefit; terms carry no annotations.
        ty: Option<SimpleType>,
        body: Box<NamedTerm>,
    },
    Closure(Box<NamedTerm>, Box<NamedSubst>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NamedSubst {
    Shift(u32),
    Cons(Box<NamedTerm>, Box<NamedSubst>),
    Comp(Box<NamedSubst>, Box<NamedSubst>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    Solvable,
    NoSolution,
}

/// A corpus annotation: the outcome established at a given size bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub outcome: Expected,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub problem: UnifProblem,
    /// Context names, most recent first (position 0 is index 1).
    pub ctx_names: Vec<String>,
    pub expect: Option<Expectation>,
    pub certificate: Option<BTreeMap<String, (String, usize)>>,
}

impl ProblemFile {
    /// Names usable in terms of the given sort: the problem's context names
    /// when the sort lives in the problem context, none otherwise.
    pub fn names_for(&self, sort: &Sort) -> &[String] {
        if sort.ctx == self.problem.ctx {
            &self.ctx_names
        } else {
            &[]
        }
    }
}

fn expect_list<'a>(e: &'a Sexp, what: &str) -> Result<&'a [Sexp], ParseError> {
    e.as_list()
        .ok_or_else(|| ParseError::at(e.pos(), what.to_string()))
}

fn expect_atom<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, ParseError> {
    e.as_atom()
        .ok_or_else(|| ParseError::at(e.pos(), what.to_string()))
}

fn arity(items: &[Sexp], pos: Pos, n: usize, form: &str) -> Result<(), ParseError> {
    if items.len() != n {
        return Err(ParseError::at(
            pos,
            format!("{form} with {} operand(s)", n - 1),
        ));
    }
    Ok(())
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'' || c == '-')
}

fn parse_name(e: &Sexp, what: &str) -> Result<String, ParseError> {
    let s = expect_atom(e, what)?;
    if !is_identifier(s) || RESERVED.contains(&s) {
        return Err(ParseError::at(e.pos(), what.to_string()));
    }
    Ok(s.to_string())
}

fn parse_number(e: &Sexp, what: &str) -> Result<u32, ParseError> {
    expect_atom(e, what)?
        .parse()
        .map_err(|_| ParseError::at(e.pos(), what.to_string()))
}

const RESERVED: &[&str] = &[
    "lam", "app", "clo", "shift", "cons", "comp", "id", "->", ":",
];

pub fn parse_type(e: &Sexp) -> Result<SimpleType, ParseError> {
    match e {
        Sexp::Atom(..) => Ok(SimpleType::base(parse_name(e, "a base type name")?)),
        Sexp::List(items, pos) => {
            if e.head() != Some("->") || items.len() < 3 {
                return Err(ParseError::at(*pos, "a type `(-> A B ...)`"));
            }
            let mut tys = items[1..]
                .iter()
                .map(parse_type)
                .collect::<Result<Vec<_>, _>>()?;
            let result = tys.pop().expect("at least two components");
            Ok(SimpleType::arrows(tys, result))
        }
    }
}

pub fn parse_named_term(e: &Sexp) -> Result<NamedTerm, ParseError> {
    match e {
        Sexp::Atom(s, pos) => {
            if let Some(m) = s.strip_prefix('?') {
                if !is_identifier(m) {
                    return Err(ParseError::at(*pos, "a metavariable name after `?`"));
                }
                Ok(NamedTerm::Meta(m.to_string()))
            } else if s.chars().all(|c| c.is_ascii_digit()) {
                match s.parse::<u32>() {
                    Ok(n) if n >= 1 => Ok(NamedTerm::Raw(n)),
                    _ => Err(ParseError::at(*pos, "an index of at least 1")),
                }
            } else {
                Ok(NamedTerm::Var(parse_name(e, "a term")?, *pos))
            }
        }
        Sexp::List(items, pos) => match e.head() {
            Some("lam") => parse_lam(items, *pos),
            Some("app") => {
                if items.len() < 3 {
                    return Err(ParseError::at(
                        *pos,
                        "`(app f a ...)` with at least one argument",
                    ));
                }
                parse_spine(&items[1], &items[2..])
            }
            Some("clo") => {
                arity(items, *pos, 3, "`(clo t s)`")?;
                Ok(NamedTerm::Closure(
                    Box::new(parse_named_term(&items[1])?),
                    Box::new(parse_named_subst(&items[2])?),
                ))
            }
            Some(h) if RESERVED.contains(&h) => Err(ParseError::at(*pos, "a term")),
            _ if items.len() >= 2 => parse_spine(&items[0], &items[1..]),
            _ => Err(ParseError::at(*pos, "a term")),
        },
    }
}

fn parse_spine(head: &Sexp, args: &[Sexp]) -> Result<NamedTerm, ParseError> {
    let mut t = parse_named_term(head)?;
    for a in args {
        t = NamedTerm::App(Box::new(t), Box::new(parse_named_term(a)?));
    }
    Ok(t)
}

fn parse_lam(items: &[Sexp], pos: Pos) -> Result<NamedTerm, ParseError> {
    let (binder, ty, body) = match items.len() {
        2 => (None, None, &items[1]),
        3 => match &items[1] {
            Sexp::Atom(..) => (
                Some((parse_name(&items[1], "a binder name")?, items[1].pos())),
                None,
                &items[2],
            ),
            Sexp::List(b, bpos) => {
                let ty = match b.len() {
                    2 => &b[1],
                    3 if b[1].as_atom() == Some(":") => &b[2],
                    _ => return Err(ParseError::at(*bpos, "a binder `(x T)`")),
                };
                (
                    Some((parse_name(&b[0], "a binder name")?, b[0].pos())),
                    Some(parse_type(ty)?),
                    &items[2],
                )
            }
        },
        _ => return Err(ParseError::at(pos, "`(lam (x T) body)`")),
    };
    Ok(NamedTerm::Lam {
        binder,
        ty,
        body: Box::new(parse_named_term(body)?),
    })
}

pub fn parse_named_subst(e: &Sexp) -> Result<NamedSubst, ParseError> {
    match e {
        Sexp::Atom(s, _) if s == "id" => Ok(NamedSubst::Shift(0)),
        Sexp::List(items, pos) => match e.head() {
            Some("shift") => {
                arity(items, *pos, 2, "`(shift k)`")?;
                Ok(NamedSubst::Shift(parse_number(
                    &items[1],
                    "a shift amount",
                )?))
            }
            Some("cons") => {
                arity(items, *pos, 3, "`(cons t s)`")?;
                Ok(NamedSubst::Cons(
                    Box::new(parse_named_term(&items[1])?),
                    Box::new(parse_named_subst(&items[2])?),
                ))
            }
            Some("comp") => {
                arity(items, *pos, 3, "`(comp s t)`")?;
                Ok(NamedSubst::Comp(
                    Box::new(parse_named_subst(&items[1])?),
                    Box::new(parse_named_subst(&items[2])?),
                ))
            }
            _ => Err(ParseError::at(*pos, "a substitution")),
        },
        Sexp::Atom(_, pos) => Err(ParseError::at(*pos, "a substitution")),
    }
}

struct Scope<'a> {
    ctx: &'a [String],
    binders: Vec<String>,
}

impl Scope<'_> {
    fn lookup(&self, name: &str) -> Option<u32> {
        if let Some(i) = self.binders.iter().rev().position(|b| b == name) {
            return Some(i as u32 + 1);
        }
        self.ctx
            .iter()
            .position(|c| c == name)
            .map(|j| (self.binders.len() + j) as u32 + 1)
    }
}

/// Elaborates against `ctx_names`, most recent first: the innermost binder
/// is index 1 and context names are numbered after all binders.
pub fn to_de_bruijn(nt: &NamedTerm, ctx_names: &[String]) -> Result<Term, ParseError> {
    elab_term(
        nt,
        &mut Scope {
            ctx: ctx_names,
            binders: Vec::new(),
        },
    )
}

fn elab_term(nt: &NamedTerm, scope: &mut Scope<'_>) -> Result<Term, ParseError> {
    Ok(match nt {
        NamedTerm::Var(x, pos) => Term::Index(scope.lookup(x).ok_or_else(|| {
            ParseError::at(*pos, format!("a bound name, found unbound name `{x}`"))
        })?),
        NamedTerm::Raw(n) => Term::Index(*n),
        NamedTerm::Meta(x) => Term::meta(x.clone()),
        NamedTerm::App(f, a) => Term::app(elab_term(f, scope)?, elab_term(a, scope)?),
        NamedTerm::Lam { binder, body, .. } => {
            if let Some((x, pos)) = binder {
                if scope.lookup(x).is_some() {
                    return Err(ParseError::at(
                        *pos,
                        format!("a fresh binder name, `{x}` is already in scope"),
                    ));
                }
            }
            scope
                .binders
                .push(binder.as_ref().map(|b| b.0.clone()).unwrap_or_default());
            let body = elab_term(body, scope);
            scope.binders.pop();
            Term::lam(body?)
        }
        NamedTerm::Closure(t, s) => {
            let body = elab_term(
                t,
                &mut Scope {
                    ctx: &[],
                    binders: Vec::new(),
                },
            )?;
            Term::closure(body, elab_subst(s, scope)?)
        }
    })
}

fn elab_subst(ns: &NamedSubst, scope: &mut Scope<'_>) -> Result<Subst, ParseError> {
    Ok(match ns {
        NamedSubst::Shift(k) => Subst::Shift(*k),
        NamedSubst::Cons(t, s) => Subst::cons(elab_term(t, scope)?, elab_subst(s, scope)?),
        NamedSubst::Comp(a, b) => Subst::comp(elab_subst(a, scope)?, elab_subst(b, scope)?),
    })
}

/// Parses one term in the given context (names most recent first).
pub fn parse_term(text: &str, ctx_names: &[String]) -> Result<Term, ParseError> {
    to_de_bruijn(&parse_named_term(&read_one(text)?)?, ctx_names)
}

fn parse_context_block(items: &[Sexp]) -> Result<(Vec<String>, Vec<SimpleType>), ParseError> {
    let mut names: Vec<String> = Vec::new();
    let mut tys = Vec::new();
    for entry in items {
        let pair = expect_list(entry, "a context entry `(x T)`")?;
        arity(pair, entry.pos(), 2, "a context entry `(x T)`")?;
        let name = parse_name(&pair[0], "a variable name")?;
        if names.contains(&name) {
            return Err(ParseError::at(
                pair[0].pos(),
                format!("a fresh name, `{name}` is declared twice"),
            ));
        }
        names.push(name);
        tys.push(parse_type(&pair[1])?);
    }
    names.reverse();
    tys.reverse();
    Ok((names, tys))
}

fn parse_meta_decl(entry: &Sexp, problem_ctx: &Context) -> Result<(String, Sort), ParseError> {
    let items = expect_list(entry, "a metavariable declaration `(X T)`")?;
    if items.len() != 2 && items.len() != 3 {
        return Err(ParseError::at(
            entry.pos(),
            "a metavariable declaration `(X T)` or `(X T (ctx ...))`",
        ));
    }
    let name = parse_name(&items[0], "a metavariable name")?;
    let ty = parse_type(&items[1])?;
    let ctx = match items.get(2) {
        None => problem_ctx.clone(),
        Some(c) => {
            if c.head() != Some("ctx") {
                return Err(ParseError::at(c.pos(), "`(ctx T ...)`"));
            }
            let mut tys = c.as_list().unwrap()[1..]
                .iter()
                .map(parse_type)
                .collect::<Result<Vec<_>, _>>()?;
            tys.reverse();
            Context(tys)
        }
    };
    Ok((name, Sort::new(ctx, ty)))
}

fn parse_expect(items: &[Sexp], pos: Pos) -> Result<Expectation, ParseError> {
    let shape = "`(expect solvable|no-solution :bound k)`";
    arity(items, pos, 4, shape)?;
    let outcome = match items[1].as_atom() {
        Some("solvable") => Expected::Solvable,
        Some("no-solution") => Expected::NoSolution,
        _ => {
            return Err(ParseError::at(
                items[1].pos(),
                "`solvable` or `no-solution`",
            ))
        }
    };
    if items[2].as_atom() != Some(":bound") {
        return Err(ParseError::at(items[2].pos(), "`:bound`"));
    }
    let bound = parse_number(&items[3], "a size bound")? as usize;
    Ok(Expectation { outcome, bound })
}

fn parse_certificate(
    items: &[Sexp],
    pos: Pos,
) -> Result<BTreeMap<String, (String, usize)>, ParseError> {
    arity(items, pos, 2, "`(certificate (map ...))`")?;
    let map = &items[1];
    if map.head() != Some("map") {
        return Err(ParseError::at(map.pos(), "`(map (X Y n) ...)`"));
    }
    let mut out = BTreeMap::new();
    for entry in &map.as_list().unwrap()[1..] {
        let t = expect_list(entry, "`(X Y n)`")?;
        arity(t, entry.pos(), 3, "`(X Y n)`")?;
        out.insert(
            parse_name(&t[0], "a metavariable name")?,
            (
                parse_name(&t[1], "a metavariable name")?,
                parse_number(&t[2], "an arity")? as usize,
            ),
        );
    }
    Ok(out)
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let top = read_one(text)?;
    if top.head() != Some("problem") {
        return Err(ParseError::at(top.pos(), "`(problem ...)`"));
    }
    let mut base_types = BTreeSet::new();
    let mut ctx_names = Vec::new();
    let mut ctx = Context::empty();
    let mut meta_entries: &[Sexp] = &[];
    let mut mode = Mode::LambdaSigma;
    let mut equation = None;
    let mut expect = None;
    let mut certificate = None;
    let mut seen = BTreeSet::new();
    for block in &top.as_list().unwrap()[1..] {
        let items = expect_list(block, "a `(block ...)`")?;
        let head = block
            .head()
            .ok_or_else(|| ParseError::at(block.pos(), "a block name"))?;
        if !seen.insert(head.to_string()) {
            return Err(ParseError::at(
                block.pos(),
                format!("at most one `{head}` block"),
            ));
        }
        match head {
            "base-types" => {
                for b in &items[1..] {
                    base_types.insert(parse_name(b, "a base type name")?);
                }
            }
            "context" => {
                let (names, tys) = parse_context_block(&items[1..])?;
                ctx_names = names;
                ctx = Context(tys);
            }
            "metavars" => meta_entries = &items[1..],
            "mode" => {
                arity(items, block.pos(), 2, "`(mode sigma|lambdasigma)`")?;
                mode = match items[1].as_atom() {
                    Some("sigma") => Mode::SigmaOnly,
                    Some("lambdasigma") => Mode::LambdaSigma,
                    _ => return Err(ParseError::at(items[1].pos(), "`sigma` or `lambdasigma`")),
                };
            }
            "equation" => {
                arity(items, block.pos(), 3, "`(equation lhs rhs)`")?;
                equation = Some((&items[1], &items[2]));
            }
            "expect" => expect = Some(parse_expect(items, block.pos())?),
            "certificate" => certificate = Some(parse_certificate(items, block.pos())?),
            _ => {
                return Err(ParseError::at(
                    block.pos(),
                    "one of base-types, context, metavars, mode, equation, expect, certificate",
                ))
            }
        }
    }
    let mut metavars = MetaDecls::new();
    for entry in meta_entries {
        let (name, sort) = parse_meta_decl(entry, &ctx)?;
        if metavars.insert(name.clone(), sort).is_some() {
            return Err(ParseError::at(
                entry.pos(),
                format!("a fresh metavariable, `{name}` is declared twice"),
            ));
        }
    }
    let (lhs, rhs) =
        equation.ok_or_else(|| ParseError::at(top.pos(), "an `(equation lhs rhs)` block"))?;
    let lhs = to_de_bruijn(&parse_named_term(lhs)?, &ctx_names)?;
    let rhs = to_de_bruijn(&parse_named_term(rhs)?, &ctx_names)?;
    Ok(ProblemFile {
        problem: UnifProblem {
            base_types,
            ctx,
            metavars,
            lhs,
            rhs,
            mode,
        },
        ctx_names,
        expect,
        certificate,
    })
}

/// Parses `(subst (?X t) ...)` against a problem: each binding is read in
/// its metavariable's context.
pub fn parse_subst(text: &str, pf: &ProblemFile) -> Result<MetaSubst, ParseError> {
    let top = read_one(text)?;
    if top.head() != Some("subst") {
        return Err(ParseError::at(top.pos(), "`(subst (?X t) ...)`"));
    }
    let mut bindings = Vec::new();
    for entry in &top.as_list().unwrap()[1..] {
        let pair = expect_list(entry, "a binding `(?X t)`")?;
        arity(pair, entry.pos(), 2, "a binding `(?X t)`")?;
        let name = match parse_named_term(&pair[0])? {
            NamedTerm::Meta(x) => x,
            _ => return Err(ParseError::at(pair[0].pos(), "a metavariable `?X`")),
        };
        let names = pf
            .problem
            .metavars
            .get(&name)
            .map(|s| pf.names_for(s))
            .unwrap_or(&[]);
        bindings.push((name, to_de_bruijn(&parse_named_term(&pair[1])?, names)?));
    }
    MetaSubst::new(bindings)
        .map_err(|e| ParseError::at(top.pos(), format!("a valid substitution: {e}")))
}
