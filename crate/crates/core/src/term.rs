//! Terms and explicit substitutions of the λσ-calculus with metavariables.
//!
//! De Bruijn indices are primitive and start at 1. The identity substitution
//! is `Shift(0)`; there is no separate `id` constructor.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// A λσ term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// De Bruijn index, always `>= 1`.
    Index(u32),
    /// Metavariable, identified by name only.
    Meta(String),
    App(Box<Term>, Box<Term>),
    Lam(Box<Term>),
    /// `a[s]`
    Closure(Box<Term>, Box<Subst>),
}

/// An explicit substitution.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subst {
    /// `↑^k`; `Shift(0)` is the identity.
    Shift(u32),
    /// `a · s`
    Cons(Box<Term>, Box<Subst>),
    /// `s ∘ t`, apply `s` first then `t`.
    Comp(Box<Subst>, Box<Subst>),
}

impl Term {
    pub fn index(n: u32) -> Term {
        assert!(n >= 1, "de Bruijn indices start at 1");
        Term::Index(n)
    }

    pub fn meta(name: impl Into<String>) -> Term {
        Term::Meta(name.into())
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    /// Left-nested application `(head a1 ... an)`.
    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn lam(body: Term) -> Term {
        Term::Lam(Box::new(body))
    }

    /// `n` nested abstractions around `body`.
    pub fn lams(n: usize, body: Term) -> Term {
        (0..n).fold(body, |t, _| Term::lam(t))
    }

    pub fn closure(body: Term, s: Subst) -> Term {
        Term::Closure(Box::new(body), Box::new(s))
    }

    /// `X[↑^k]`, written as the bare metavariable when `k = 0`.
    pub fn shifted_meta(name: impl Into<String>, k: u32) -> Term {
        if k == 0 {
            Term::meta(name)
        } else {
            Term::closure(Term::meta(name), Subst::Shift(k))
        }
    }

    pub fn is_meta(&self) -> bool {
        matches!(self, Term::Meta(_))
    }

    /// Strips up to `n` leading abstractions, returning the body only when
    /// exactly `n` were present.
    pub fn strip_lams(&self, n: usize) -> Option<&Term> {
        let mut t = self;
        for _ in 0..n {
            match t {
                Term::Lam(body) => t = body,
                _ => return None,
            }
        }
        Some(t)
    }

    /// Whether the term contains no `Closure` node (plain λ-calculus form).
    pub fn is_closure_free(&self) -> bool {
        match self {
            Term::Index(_) | Term::Meta(_) => true,
            Term::App(f, a) => f.is_closure_free() && a.is_closure_free(),
            Term::Lam(b) => b.is_closure_free(),
            Term::Closure(..) => false,
        }
    }

    /// Whether the term contains a β-redex `(λa) b` anywhere, including
    /// inside substitutions.
    pub fn has_beta_redex(&self) -> bool {
        match self {
            Term::Index(_) | Term::Meta(_) => false,
            Term::App(f, a) => {
                matches!(**f, Term::Lam(_)) || f.has_beta_redex() || a.has_beta_redex()
            }
            Term::Lam(b) => b.has_beta_redex(),
            Term::Closure(b, s) => b.has_beta_redex() || s.has_beta_redex(),
        }
    }

    /// Height of the term tree, counting substitution nodes.
    pub fn depth(&self) -> usize {
        match self {
            Term::Index(_) | Term::Meta(_) => 1,
            Term::App(f, a) => 1 + f.depth().max(a.depth()),
            Term::Lam(b) => 1 + b.depth(),
            Term::Closure(b, s) => 1 + b.depth().max(s.depth()),
        }
    }
}

impl Subst {
    pub fn id() -> Subst {
        Subst::Shift(0)
    }

    pub fn cons(head: Term, tail: Subst) -> Subst {
        Subst::Cons(Box::new(head), Box::new(tail))
    }

    pub fn comp(first: Subst, second: Subst) -> Subst {
        Subst::Comp(Box::new(first), Box::new(second))
    }

    /// `c1 · ... · cp · ↑^n`
    pub fn from_parts(heads: impl IntoIterator<Item = Term>, shift: u32) -> Subst {
        let heads: Vec<Term> = heads.into_iter().collect();
        heads
            .into_iter()
            .rev()
            .fold(Subst::Shift(shift), |s, h| Subst::cons(h, s))
    }

    /// Splits `c1 · ... · cp · ↑^n` into its heads and `n`. Returns `None` if
    /// a composition occurs along the spine.
    pub fn as_parts(&self) -> Option<(Vec<&Term>, u32)> {
        let mut heads = Vec::new();
        let mut s = self;
        loop {
            match s {
                Subst::Shift(k) => return Some((heads, *k)),
                Subst::Cons(h, tail) => {
                    heads.push(&**h);
                    s = tail;
                }
                Subst::Comp(..) => return None,
            }
        }
    }

    fn has_beta_redex(&self) -> bool {
        match self {
            Subst::Shift(_) => false,
            Subst::Cons(h, t) => h.has_beta_redex() || t.has_beta_redex(),
            Subst::Comp(a, b) => a.has_beta_redex() || b.has_beta_redex(),
        }
    }

    fn depth(&self) -> usize {
        match self {
            Subst::Shift(_) => 1,
            Subst::Cons(h, t) => 1 + h.depth().max(t.depth()),
            Subst::Comp(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

/// Every `X[s]` has `s = ↑^n`. Bare metavariables count as `X[↑^0]`.
pub fn is_simple(t: &Term) -> bool {
    match t {
        Term::Index(_) | Term::Meta(_) => true,
        Term::App(f, a) => is_simple(f) && is_simple(a),
        Term::Lam(b) => is_simple(b),
        Term::Closure(body, s) => match (&**body, &**s) {
            (Term::Meta(_), Subst::Shift(_)) => true,
            (Term::Meta(_), _) => false,
            _ => is_simple(body) && subst_is_simple(s),
        },
    }
}

fn subst_is_simple(s: &Subst) -> bool {
    match s {
        Subst::Shift(_) => true,
        Subst::Cons(h, t) => is_simple(h) && subst_is_simple(t),
        Subst::Comp(a, b) => subst_is_simple(a) && subst_is_simple(b),
    }
}

pub fn is_simple_subst(theta: &MetaSubst) -> bool {
    theta.iter().all(|(_, t)| is_simple(t))
}

/// Replaces metavariables by their bindings literally. No index adjustment
/// happens here; that is left to σ-rewriting.
pub fn graft(theta: &MetaSubst, t: &Term) -> Term {
    if theta.is_empty() {
        return t.clone();
    }
    graft_term(theta, t)
}

fn graft_term(theta: &MetaSubst, t: &Term) -> Term {
    match t {
        Term::Index(_) => t.clone(),
        Term::Meta(x) => match theta.get(x) {
            Some(bound) => bound.clone(),
            None => t.clone(),
        },
        Term::App(f, a) => Term::app(graft_term(theta, f), graft_term(theta, a)),
        Term::Lam(b) => Term::lam(graft_term(theta, b)),
        Term::Closure(b, s) => Term::closure(graft_term(theta, b), graft_subst(theta, s)),
    }
}

fn graft_subst(theta: &MetaSubst, s: &Subst) -> Subst {
    match s {
        Subst::Shift(_) => s.clone(),
        Subst::Cons(h, t) => Subst::cons(graft_term(theta, h), graft_subst(theta, t)),
        Subst::Comp(a, b) => Subst::comp(graft_subst(theta, a), graft_subst(theta, b)),
    }
}

/// Collapses every `↑^i ∘ ↑^j` into `↑^(i+j)`, bottom-up.
pub fn canonicalize_shifts(s: &Subst) -> Subst {
    match s {
        Subst::Shift(_) => s.clone(),
        Subst::Cons(h, t) => Subst::cons(canonicalize_term(h), canonicalize_shifts(t)),
        Subst::Comp(a, b) => match (canonicalize_shifts(a), canonicalize_shifts(b)) {
            (Subst::Shift(i), Subst::Shift(j)) => Subst::Shift(i + j),
            (a, b) => Subst::comp(a, b),
        },
    }
}

/// [`canonicalize_shifts`] applied to every substitution inside a term.
pub fn canonicalize_term(t: &Term) -> Term {
    match t {
        Term::Index(_) | Term::Meta(_) => t.clone(),
        Term::App(f, a) => Term::app(canonicalize_term(f), canonicalize_term(a)),
        Term::Lam(b) => Term::lam(canonicalize_term(b)),
        Term::Closure(b, s) => Term::closure(canonicalize_term(b), canonicalize_shifts(s)),
    }
}

pub fn free_metavars(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_metas(t, &mut out);
    out
}

fn collect_metas(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Index(_) => {}
        Term::Meta(x) => {
            out.insert(x.clone());
        }
        Term::App(f, a) => {
            collect_metas(f, out);
            collect_metas(a, out);
        }
        Term::Lam(b) => collect_metas(b, out),
        Term::Closure(b, s) => {
            collect_metas(b, out);
            collect_subst_metas(s, out);
        }
    }
}

fn collect_subst_metas(s: &Subst, out: &mut BTreeSet<String>) {
    match s {
        Subst::Shift(_) => {}
        Subst::Cons(h, t) => {
            collect_metas(h, out);
            collect_subst_metas(t, out);
        }
        Subst::Comp(a, b) => {
            collect_subst_metas(a, out);
            collect_subst_metas(b, out);
        }
    }
}

/// Number of `Term` and `Subst` constructors.
pub fn term_size(t: &Term) -> usize {
    match t {
        Term::Index(_) | Term::Meta(_) => 1,
        Term::App(f, a) => 1 + term_size(f) + term_size(a),
        Term::Lam(b) => 1 + term_size(b),
        Term::Closure(b, s) => 1 + term_size(b) + subst_size(s),
    }
}

pub fn subst_size(s: &Subst) -> usize {
    match s {
        Subst::Shift(_) => 1,
        Subst::Cons(h, t) => 1 + term_size(h) + subst_size(t),
        Subst::Comp(a, b) => 1 + subst_size(a) + subst_size(b),
    }
}

/// Path to a node: 1-based child numbers from the root.
///
/// Children are numbered `App: 1 fun, 2 arg`, `Lam: 1 body`,
/// `Closure: 1 body, 2 subst`, `Cons: 1 head, 2 tail`,
/// `Comp: 1 first, 2 second`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Path(pub Vec<u8>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn child(&self, i: u8) -> Path {
        let mut v = self.0.clone();
        v.push(i);
        Path(v)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Either kind of node, for walking positions uniformly.
#[derive(Clone, Copy, Debug)]
pub enum NodeRef<'a> {
    Term(&'a Term),
    Subst(&'a Subst),
}

impl<'a> NodeRef<'a> {
    pub fn get(self, path: &Path) -> Option<NodeRef<'a>> {
        let mut node = self;
        for &c in &path.0 {
            node = match (node, c) {
                (NodeRef::Term(Term::App(f, _)), 1) => NodeRef::Term(f),
                (NodeRef::Term(Term::App(_, a)), 2) => NodeRef::Term(a),
                (NodeRef::Term(Term::Lam(b)), 1) => NodeRef::Term(b),
                (NodeRef::Term(Term::Closure(b, _)), 1) => NodeRef::Term(b),
                (NodeRef::Term(Term::Closure(_, s)), 2) => NodeRef::Subst(s),
                (NodeRef::Subst(Subst::Cons(h, _)), 1) => NodeRef::Term(h),
                (NodeRef::Subst(Subst::Cons(_, t)), 2) => NodeRef::Subst(t),
                (NodeRef::Subst(Subst::Comp(a, _)), 1) => NodeRef::Subst(a),
                (NodeRef::Subst(Subst::Comp(_, b)), 2) => NodeRef::Subst(b),
                _ => return None,
            };
        }
        Some(node)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetaSubstError {
    #[error("metavariable ?{0} is bound twice")]
    DuplicateBinding(String),
    #[error("binding for ?{bound} mentions ?{mentioned}, which the substitution also binds")]
    NotIdempotent { bound: String, mentioned: String },
}

/// A finite map from metavariables to terms, applied by [`graft`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MetaSubst {
    bindings: BTreeMap<String, Term>,
}

impl MetaSubst {
    pub fn empty() -> MetaSubst {
        MetaSubst::default()
    }

    pub fn new(
        bindings: impl IntoIterator<Item = (String, Term)>,
    ) -> Result<MetaSubst, MetaSubstError> {
        let mut map = BTreeMap::new();
        for (name, t) in bindings {
            if map.contains_key(&name) {
                return Err(MetaSubstError::DuplicateBinding(name));
            }
            map.insert(name, t);
        }
        for (name, t) in &map {
            if let Some(m) = free_metavars(t).into_iter().find(|m| map.contains_key(m)) {
                return Err(MetaSubstError::NotIdempotent {
                    bound: name.clone(),
                    mentioned: m,
                });
            }
        }
        Ok(MetaSubst { bindings: map })
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.bindings.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    /// Bindings in name order.
    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.bindings.keys()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::meta("X")
    }

    fn subst(pairs: &[(&str, Term)]) -> MetaSubst {
        MetaSubst::new(pairs.iter().map(|(n, t)| (n.to_string(), t.clone()))).unwrap()
    }

    #[test]
    fn simple_closures() {
        assert!(is_simple(&Term::closure(x(), Subst::Shift(2))));
        assert!(!is_simple(&Term::closure(
            x(),
            Subst::cons(Term::index(1), Subst::id())
        )));
        assert!(is_simple(&Term::lam(Term::app(
            Term::index(2),
            Term::closure(x(), Subst::Shift(1))
        ))));
        // bare metavariable is X[↑^0]
        assert!(is_simple(&x()));
        // a non-shift closure nested inside a substitution
        let inner = Term::closure(
            Term::meta("Y"),
            Subst::comp(Subst::Shift(1), Subst::Shift(1)),
        );
        assert!(!is_simple(&Term::closure(
            Term::index(1),
            Subst::cons(inner, Subst::id())
        )));
    }

    #[test]
    fn simple_substitutions() {
        assert!(is_simple_subst(&MetaSubst::empty()));
        assert!(is_simple_subst(&subst(&[("X", Term::index(1))])));
        let bad = Term::closure(Term::meta("Y"), Subst::cons(Term::index(1), Subst::id()));
        assert!(!is_simple_subst(&subst(&[("X", bad)])));
    }

    #[test]
    fn grafting() {
        let theta = subst(&[("X", Term::index(1))]);
        assert_eq!(
            graft(&theta, &Term::closure(x(), Subst::Shift(3))),
            Term::closure(Term::index(1), Subst::Shift(3))
        );
        let t = Term::lam(Term::app(x(), Term::meta("Z")));
        assert_eq!(graft(&MetaSubst::empty(), &t), t);
        let theta = subst(&[("X", Term::app(Term::index(2), Term::index(1)))]);
        assert_eq!(
            graft(&theta, &Term::lam(x())),
            Term::lam(Term::app(Term::index(2), Term::index(1)))
        );
    }

    #[test]
    fn grafting_reaches_into_substitutions() {
        let theta = subst(&[("Y", Term::index(4))]);
        let t = Term::closure(x(), Subst::cons(Term::meta("Y"), Subst::Shift(1)));
        assert_eq!(
            graft(&theta, &t),
            Term::closure(x(), Subst::cons(Term::index(4), Subst::Shift(1)))
        );
    }

    #[test]
    fn shift_canonicalization() {
        assert_eq!(
            canonicalize_shifts(&Subst::comp(Subst::Shift(1), Subst::Shift(2))),
            Subst::Shift(3)
        );
        assert_eq!(canonicalize_shifts(&Subst::id()), Subst::id());
        assert_eq!(
            canonicalize_shifts(&Subst::cons(
                Term::index(1),
                Subst::comp(Subst::Shift(2), Subst::Shift(0))
            )),
            Subst::cons(Term::index(1), Subst::Shift(2))
        );
        let nested = Subst::comp(
            Subst::comp(Subst::Shift(1), Subst::Shift(1)),
            Subst::comp(Subst::Shift(2), Subst::Shift(3)),
        );
        assert_eq!(canonicalize_shifts(&nested), Subst::Shift(7));
    }

    #[test]
    fn metavariable_sets() {
        assert!(free_metavars(&Term::index(3)).is_empty());
        let t = Term::closure(x(), Subst::cons(Term::meta("Y"), Subst::id()));
        let names: Vec<_> = free_metavars(&t).into_iter().collect();
        assert_eq!(names, vec!["X".to_string(), "Y".to_string()]);
        assert_eq!(
            free_metavars(&Term::lam(x()))
                .into_iter()
                .collect::<Vec<_>>(),
            vec!["X".to_string()]
        );
    }

    #[test]
    fn sizes() {
        assert_eq!(term_size(&Term::index(1)), 1);
        assert_eq!(term_size(&Term::app(Term::index(1), Term::index(2))), 3);
        assert_eq!(term_size(&Term::closure(x(), Subst::Shift(2))), 3);
    }

    #[test]
    fn meta_subst_construction() {
        let dup = MetaSubst::new(vec![
            ("X".to_string(), Term::index(1)),
            ("X".to_string(), Term::index(2)),
        ]);
        assert_eq!(dup, Err(MetaSubstError::DuplicateBinding("X".into())));
        let cyclic = MetaSubst::new(vec![
            ("X".to_string(), Term::meta("Y")),
            ("Y".to_string(), Term::index(1)),
        ]);
        assert!(matches!(cyclic, Err(MetaSubstError::NotIdempotent { .. })));
    }

    #[test]
    fn parts_of_substitutions() {
        let s = Subst::from_parts(vec![Term::index(1), Term::index(3)], 2);
        let (heads, n) = s.as_parts().unwrap();
        assert_eq!(heads, vec![&Term::index(1), &Term::index(3)]);
        assert_eq!(n, 2);
        assert!(Subst::comp(Subst::Shift(1), Subst::Shift(1))
            .as_parts()
            .is_none());
    }

    #[test]
    fn node_paths() {
        let t = Term::closure(
            Term::app(Term::index(1), Term::index(2)),
            Subst::cons(Term::meta("A"), Subst::id()),
        );
        let p = Path(vec![2, 1]);
        assert!(matches!(
            NodeRef::Term(&t).get(&p),
            Some(NodeRef::Term(Term::Meta(_)))
        ));
        assert_eq!(p.to_string(), "2.1");
        assert_eq!(Path::root().to_string(), "ε");
        assert!(NodeRef::Term(&t).get(&Path(vec![3])).is_none());
    }
}
