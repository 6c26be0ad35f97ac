//! Text output: a compact display notation and the problem-file syntax.
//!
//! In named style, binders get fresh names `x1`, `x2`, ... that avoid the
//! context names; indices with no name in scope are printed as numbers.

use std::fmt::Write as _;

use lsf_core::sorts::{Mode, SimpleType};
use lsf_core::term::{MetaSubst, Subst, Term};

use crate::syntax::{Expected, ProblemFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Style {
    #[default]
    Named,
    DeBruijn,
}

struct Names<'a> {
    style: Style,
    ctx: &'a [String],
    binders: Vec<String>,
}

impl<'a> Names<'a> {
    fn new(style: Style, ctx: &'a [String]) -> Self {
        Names {
            style,
            ctx: if style == Style::Named { ctx } else { &[] },
            binders: Vec::new(),
        }
    }

    /// Scope for the body of a closure, where no names are visible.
    fn reset(&self) -> Names<'a> {
        Names {
            style: self.style,
            ctx: &[],
            binders: Vec::new(),
        }
    }

    fn index(&self, n: u32) -> String {
        let n = n as usize;
        if self.style == Style::Named {
            if n <= self.binders.len() {
                return self.binders[self.binders.len() - n].clone();
            }
            if let Some(name) = self.ctx.get(n - 1 - self.binders.len()) {
                return name.clone();
            }
        }
        n.to_string()
    }

    /// Pushes a binder and returns its printed name, if any.
    fn bind(&mut self) -> Option<String> {
        if self.style == Style::DeBruijn {
            self.binders.push(String::new());
            return None;
        }
        let name = (1..)
            .map(|i| format!("x{i}"))
            .find(|x| !self.binders.contains(x) && !self.ctx.contains(x))
            .expect("unbounded supply");
        self.binders.push(name.clone());
        Some(name)
    }
}

fn spine(t: &Term) -> (&Term, Vec<&Term>) {
    let mut args = Vec::new();
    let mut t = t;
    while let Term::App(f, a) = t {
        args.push(&**a);
        t = f;
    }
    args.reverse();
    (t, args)
}

/// Compact display: `(f a)`, `λx1.b` or `λ.b`, `t[s]`, `^k`, `a . s`, `s ∘ t`.
pub fn render_term(t: &Term, style: Style, ctx_names: &[String]) -> String {
    let mut out = String::new();
    compact_term(t, &mut Names::new(style, ctx_names), &mut out);
    out
}

pub fn render_subst(s: &Subst, style: Style, ctx_names: &[String]) -> String {
    let mut out = String::new();
    compact_subst(s, &mut Names::new(style, ctx_names), &mut out);
    out
}

fn compact_atomic(t: &Term, n: &mut Names<'_>, out: &mut String) {
    if matches!(t, Term::Lam(_)) {
        out.push('(');
        compact_term(t, n, out);
        out.push(')');
    } else {
        compact_term(t, n, out);
    }
}

fn compact_term(t: &Term, n: &mut Names<'_>, out: &mut String) {
    match t {
        Term::Index(i) => out.push_str(&n.index(*i)),
        Term::Meta(x) => {
            out.push('?');
            out.push_str(x);
        }
        Term::App(..) => {
            let (head, args) = spine(t);
            out.push('(');
            compact_atomic(head, n, out);
            for a in args {
                out.push(' ');
                compact_atomic(a, n, out);
            }
            out.push(')');
        }
        Term::Lam(body) => {
            out.push('λ');
            if let Some(x) = n.bind() {
                out.push_str(&x);
            }
            out.push('.');
            compact_term(body, n, out);
            n.binders.pop();
        }
        Term::Closure(body, s) => {
            compact_atomic(body, &mut n.reset(), out);
            out.push('[');
            compact_subst(s, n, out);
            out.push(']');
        }
    }
}

fn compact_subst_operand(s: &Subst, n: &mut Names<'_>, out: &mut String) {
    if matches!(s, Subst::Shift(_)) {
        compact_subst(s, n, out);
    } else {
        out.push('(');
        compact_subst(s, n, out);
        out.push(')');
    }
}

fn compact_subst(s: &Subst, n: &mut Names<'_>, out: &mut String) {
    match s {
        Subst::Shift(k) => {
            let _ = write!(out, "^{k}");
        }
        Subst::Cons(a, rest) => {
            compact_atomic(a, n, out);
            out.push_str(" . ");
            if matches!(**rest, Subst::Comp(..)) {
                compact_subst_operand(rest, n, out);
            } else {
                compact_subst(rest, n, out);
            }
        }
        Subst::Comp(a, b) => {
            compact_subst_operand(a, n, out);
            out.push_str(" ∘ ");
            compact_subst_operand(b, n, out);
        }
    }
}

pub fn render_type(ty: &SimpleType) -> String {
    match ty {
        SimpleType::Base(b) => b.clone(),
        SimpleType::Arrow(..) => {
            let (args, result) = ty.uncurry();
            let mut parts: Vec<String> = args.into_iter().map(render_type).collect();
            parts.push(render_type(result));
            format!("(-> {})", parts.join(" "))
        }
    }
}

/// A term in problem-file syntax.
pub fn sexp_term(t: &Term, style: Style, ctx_names: &[String]) -> String {
    let mut out = String::new();
    file_term(t, &mut Names::new(style, ctx_names), &mut out);
    out
}

fn file_term(t: &Term, n: &mut Names<'_>, out: &mut String) {
    match t {
        Term::Index(i) => out.push_str(&n.index(*i)),
        Term::Meta(x) => {
            out.push('?');
            out.push_str(x);
        }
        Term::App(..) => {
            let (head, args) = spine(t);
            out.push_str("(app ");
            file_term(head, n, out);
            for a in args {
                out.push(' ');
                file_term(a, n, out);
            }
            out.push(')');
        }
        Term::Lam(body) => {
            out.push_str("(lam ");
            if let Some(x) = n.bind() {
                out.push_str(&x);
                out.push(' ');
            }
            file_term(body, n, out);
            n.binders.pop();
            out.push(')');
        }
        Term::Closure(body, s) => {
            out.push_str("(clo ");
            file_term(body, &mut n.reset(), out);
            out.push(' ');
            file_subst(s, n, out);
            out.push(')');
        }
    }
}

fn file_subst(s: &Subst, n: &mut Names<'_>, out: &mut String) {
    match s {
        Subst::Shift(k) => {
            let _ = write!(out, "(shift {k})");
        }
        Subst::Cons(a, rest) => {
            out.push_str("(cons ");
            file_term(a, n, out);
            out.push(' ');
            file_subst(rest, n, out);
            out.push(')');
        }
        Subst::Comp(a, b) => {
            out.push_str("(comp ");
            file_subst(a, n, out);
            out.push(' ');
            file_subst(b, n, out);
            out.push(')');
        }
    }
}

/// The whole problem file. Contexts are written deepest entry first.
pub fn render_problem(pf: &ProblemFile, style: Style) -> String {
    let p = &pf.problem;
    let mut out = String::from("(problem\n");
    let bases: Vec<&str> = p.base_types.iter().map(String::as_str).collect();
    let _ = writeln!(out, "  (base-types{})", prefixed(&bases));
    let ctx: Vec<String> = pf
        .ctx_names
        .iter()
        .zip(p.ctx.iter())
        .rev()
        .map(|(x, ty)| format!("({x} {})", render_type(ty)))
        .collect();
    let _ = writeln!(out, "  (context{})", prefixed(&ctx));
    let metas: Vec<String> = p
        .metavars
        .iter()
        .map(|(x, sort)| {
            if sort.ctx == p.ctx {
                format!("({x} {})", render_type(&sort.ty))
            } else {
                let tys: Vec<String> = sort.ctx.iter().rev().map(render_type).collect();
                format!("({x} {} (ctx{}))", render_type(&sort.ty), prefixed(&tys))
            }
        })
        .collect();
    let _ = writeln!(out, "  (metavars{})", prefixed(&metas));
    let mode = match p.mode {
        Mode::SigmaOnly => "sigma",
        Mode::LambdaSigma => "lambdasigma",
    };
    let _ = writeln!(out, "  (mode {mode})");
    let _ = write!(
        out,
        "  (equation {} {})",
        sexp_term(&p.lhs, style, &pf.ctx_names),
        sexp_term(&p.rhs, style, &pf.ctx_names)
    );
    if let Some(e) = &pf.expect {
        let what = match e.outcome {
            Expected::Solvable => "solvable",
            Expected::NoSolution => "no-solution",
        };
        let _ = write!(out, "\n  (expect {what} :bound {})", e.bound);
    }
    if let Some(map) = &pf.certificate {
        let entries: Vec<String> = map
            .iter()
            .map(|(x, (y, n))| format!("({x} {y} {n})"))
            .collect();
        let _ = write!(out, "\n  (certificate (map{}))", prefixed(&entries));
    }
    out.push_str(")\n");
    out
}

fn prefixed<S: AsRef<str>>(items: &[S]) -> String {
    items.iter().map(|s| format!(" {}", s.as_ref())).collect()
}

/// `?X := t` for one binding, with `t` shown in its metavariable's context.
pub fn render_binding(pf: &ProblemFile, name: &str, t: &Term, style: Style) -> String {
    let names = pf
        .problem
        .metavars
        .get(name)
        .map(|s| pf.names_for(s))
        .unwrap_or(&[]);
    format!("?{name} := {}", render_term(t, style, names))
}

/// A substitution in file syntax, readable by `parse_subst`.
pub fn render_subst_file(pf: &ProblemFile, theta: &MetaSubst, style: Style) -> String {
    let entries: Vec<String> = theta
        .iter()
        .map(|(x, t)| {
            let names = pf
                .problem
                .metavars
                .get(x)
                .map(|s| pf.names_for(s))
                .unwrap_or(&[]);
            format!("(?{x} {})", sexp_term(t, style, names))
        })
        .collect();
    format!("(subst{})\n", prefixed(&entries))
}
