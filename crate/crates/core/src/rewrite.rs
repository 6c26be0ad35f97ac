//! The σ rewrite rules, Beta, and fuelled normalization.
//!
//! Indices are primitive, so `VarConsSkip` and `VarShift` stand in for
//! chains of the textbook `1`/`↑` rules. Two rules complete the system for
//! this representation: `ShiftShift` merges `↑^i ∘ ↑^j`, and
//! `EtaConsShift` also fires on its primitive-index instance
//! `(m+1) · ↑^(m+1) → ↑^m`. Without them `n[↑^i ∘ ↑^j]` and
//! `X[1 · ↑^1]` would be stuck, and normal forms would depend on the
//! strategy.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::term::{canonicalize_term, Path, Subst, Term};

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleId {
    Beta,
    App,
    Abs,
    Clos,
    VarConsHit,
    VarConsSkip,
    VarShift,
    IdSub,
    ShiftCons,
    ShiftShift,
    MapCons,
    AssocComp,
    IdL,
    IdR,
    EtaConsShift,
}

impl RuleId {
    pub fn is_sigma(self) -> bool {
        self != RuleId::Beta
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Which rules may fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleSet {
    SigmaOnly,
    LambdaSigma,
}

impl From<crate::sorts::Mode> for RuleSet {
    fn from(m: crate::sorts::Mode) -> RuleSet {
        match m {
            crate::sorts::Mode::SigmaOnly => RuleSet::SigmaOnly,
            crate::sorts::Mode::LambdaSigma => RuleSet::LambdaSigma,
        }
    }
}

/// Redex selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    #[default]
    LeftmostOutermost,
    LeftmostInnermost,
    /// Uniformly random redex, reproducible from the seed.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub path: Path,
    pub rule: RuleId,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteTrace {
    pub initial: Term,
    pub steps: Vec<TraceStep>,
    pub fuel_spent: u64,
}

impl RewriteTrace {
    pub fn result(&self) -> &Term {
        self.steps.last().map(|s| &s.term).unwrap_or(&self.initial)
    }

    /// Re-applies each recorded rule at its recorded position and checks the
    /// recorded term comes out.
    pub fn replay(&self, rules: RuleSet) -> bool {
        let mut current = self.initial.clone();
        for step in &self.steps {
            match rewrite_at(&current, &step.path, rules) {
                Some((next, rule)) if rule == step.rule && next == step.term => current = next,
                _ => return false,
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("fuel exhausted after {fuel} rewrite steps")]
    FuelExhausted {
        fuel: u64,
        partial: Box<Term>,
        trace: Option<Box<RewriteTrace>>,
    },
}

// Root rules.

fn term_rule(t: &Term, rules: RuleSet) -> Option<(Term, RuleId)> {
    match t {
        Term::App(f, b) if rules == RuleSet::LambdaSigma => match &**f {
            Term::Lam(a) => Some((
                Term::closure((**a).clone(), Subst::cons((**b).clone(), Subst::id())),
                RuleId::Beta,
            )),
            _ => None,
        },
        Term::Closure(a, s) => closure_rule(a, s),
        _ => None,
    }
}

fn closure_rule(a: &Term, s: &Subst) -> Option<(Term, RuleId)> {
    if let Subst::Shift(0) = s {
        return Some((a.clone(), RuleId::IdSub));
    }
    match (a, s) {
        (Term::App(f, x), _) => Some((
            Term::app(
                Term::closure((**f).clone(), s.clone()),
                Term::closure((**x).clone(), s.clone()),
            ),
            RuleId::App,
        )),
        (Term::Lam(body), _) => Some((
            Term::lam(Term::closure(
                (**body).clone(),
                Subst::cons(Term::Index(1), Subst::comp(s.clone(), Subst::Shift(1))),
            )),
            RuleId::Abs,
        )),
        (Term::Closure(b, s0), _) => Some((
            Term::closure((**b).clone(), Subst::comp((**s0).clone(), s.clone())),
            RuleId::Clos,
        )),
        (Term::Index(1), Subst::Cons(h, _)) => Some(((**h).clone(), RuleId::VarConsHit)),
        (Term::Index(n), Subst::Cons(_, rest)) => Some((
            Term::closure(Term::Index(n - 1), (**rest).clone()),
            RuleId::VarConsSkip,
        )),
        (Term::Index(n), Subst::Shift(k)) => Some((Term::Index(n + k), RuleId::VarShift)),
        _ => None,
    }
}

fn subst_rule(s: &Subst) -> Option<(Subst, RuleId)> {
    match s {
        Subst::Comp(first, second) => match (&**first, &**second) {
            (Subst::Shift(0), _) => Some(((**second).clone(), RuleId::IdL)),
            (_, Subst::Shift(0)) => Some(((**first).clone(), RuleId::IdR)),
            (Subst::Shift(i), Subst::Shift(j)) => Some((Subst::Shift(i + j), RuleId::ShiftShift)),
            (Subst::Shift(k), Subst::Cons(_, rest)) => {
                let out = if *k == 1 {
                    (**rest).clone()
                } else {
                    Subst::comp(Subst::Shift(k - 1), (**rest).clone())
                };
                Some((out, RuleId::ShiftCons))
            }
            (Subst::Cons(h, rest), t) => Some((
                Subst::cons(
                    Term::closure((**h).clone(), t.clone()),
                    Subst::comp((**rest).clone(), t.clone()),
                ),
                RuleId::MapCons,
            )),
            (Subst::Comp(s1, s2), s3) => Some((
                Subst::comp((**s1).clone(), Subst::comp((**s2).clone(), s3.clone())),
                RuleId::AssocComp,
            )),
            _ => None,
        },
        Subst::Cons(h, tail) => match (&**h, &**tail) {
            // 1[s] · (↑ ∘ s) → s
            (Term::Closure(one, s1), Subst::Comp(up, s2))
                if **one == Term::Index(1) && **up == Subst::Shift(1) && s1 == s2 =>
            {
                Some(((**s1).clone(), RuleId::EtaConsShift))
            }
            // (m+1) · ↑^(m+1) → ↑^m, the instance s = ↑^m
            (Term::Index(m), Subst::Shift(k)) if m == k => {
                Some((Subst::Shift(k - 1), RuleId::EtaConsShift))
            }
            _ => None,
        },
        Subst::Shift(_) => None,
    }
}

// Positions.

#[derive(Clone, Copy)]
enum Node<'a> {
    T(&'a Term),
    S(&'a Subst),
}

enum Owned {
    T(Term),
    S(Subst),
}

fn root_rule(n: Node<'_>, rules: RuleSet) -> Option<(Owned, RuleId)> {
    match n {
        Node::T(t) => term_rule(t, rules).map(|(t, r)| (Owned::T(t), r)),
        Node::S(s) => subst_rule(s).map(|(s, r)| (Owned::S(s), r)),
    }
}

fn children(n: Node<'_>) -> Vec<Node<'_>> {
    match n {
        Node::T(Term::App(f, a)) => vec![Node::T(f), Node::T(a)],
        Node::T(Term::Lam(b)) => vec![Node::T(b)],
        Node::T(Term::Closure(b, s)) => vec![Node::T(b), Node::S(s)],
        Node::T(_) => vec![],
        Node::S(Subst::Cons(h, t)) => vec![Node::T(h), Node::S(t)],
        Node::S(Subst::Comp(a, b)) => vec![Node::S(a), Node::S(b)],
        Node::S(Subst::Shift(_)) => vec![],
    }
}

/// Rebuilds `n` with child `i` (1-based) replaced.
fn replace_child(n: Node<'_>, i: u8, new: Owned) -> Owned {
    match (n, i, new) {
        (Node::T(Term::App(_, a)), 1, Owned::T(f)) => Owned::T(Term::app(f, (**a).clone())),
        (Node::T(Term::App(f, _)), 2, Owned::T(a)) => Owned::T(Term::app((**f).clone(), a)),
        (Node::T(Term::Lam(_)), 1, Owned::T(b)) => Owned::T(Term::lam(b)),
        (Node::T(Term::Closure(_, s)), 1, Owned::T(b)) => Owned::T(Term::closure(b, (**s).clone())),
        (Node::T(Term::Closure(b, _)), 2, Owned::S(s)) => Owned::T(Term::closure((**b).clone(), s)),
        (Node::S(Subst::Cons(_, t)), 1, Owned::T(h)) => Owned::S(Subst::cons(h, (**t).clone())),
        (Node::S(Subst::Cons(h, _)), 2, Owned::S(t)) => Owned::S(Subst::cons((**h).clone(), t)),
        (Node::S(Subst::Comp(_, b)), 1, Owned::S(a)) => Owned::S(Subst::comp(a, (**b).clone())),
        (Node::S(Subst::Comp(a, _)), 2, Owned::S(b)) => Owned::S(Subst::comp((**a).clone(), b)),
        _ => unreachable!("child kind mismatch"),
    }
}

fn outermost(n: Node<'_>, rules: RuleSet, path: &mut Vec<u8>) -> Option<(Owned, RuleId)> {
    if let Some(hit) = root_rule(n, rules) {
        return Some(hit);
    }
    for (i, c) in children(n).into_iter().enumerate() {
        let i = i as u8 + 1;
        path.push(i);
        if let Some((new, rule)) = outermost(c, rules, path) {
            return Some((replace_child(n, i, new), rule));
        }
        path.pop();
    }
    None
}

fn innermost(n: Node<'_>, rules: RuleSet, path: &mut Vec<u8>) -> Option<(Owned, RuleId)> {
    for (i, c) in children(n).into_iter().enumerate() {
        let i = i as u8 + 1;
        path.push(i);
        if let Some((new, rule)) = innermost(c, rules, path) {
            return Some((replace_child(n, i, new), rule));
        }
        path.pop();
    }
    root_rule(n, rules)
}

fn collect_redexes(n: Node<'_>, rules: RuleSet, path: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if root_rule(n, rules).is_some() {
        out.push(path.clone());
    }
    for (i, c) in children(n).into_iter().enumerate() {
        path.push(i as u8 + 1);
        collect_redexes(c, rules, path, out);
        path.pop();
    }
}

fn rewrite_node_at(n: Node<'_>, path: &[u8], rules: RuleSet) -> Option<(Owned, RuleId)> {
    match path.split_first() {
        None => root_rule(n, rules),
        Some((&i, rest)) => {
            let c = *children(n).get(i as usize - 1)?;
            let (new, rule) = rewrite_node_at(c, rest, rules)?;
            Some((replace_child(n, i, new), rule))
        }
    }
}

/// Contracts the redex at `path`, if there is one.
pub fn rewrite_at(t: &Term, path: &Path, rules: RuleSet) -> Option<(Term, RuleId)> {
    match rewrite_node_at(Node::T(t), &path.0, rules)? {
        (Owned::T(t), r) => Some((t, r)),
        (Owned::S(_), _) => None,
    }
}

/// All redex positions in pre-order.
pub fn redex_positions(t: &Term, rules: RuleSet) -> Vec<Path> {
    let mut out = Vec::new();
    collect_redexes(Node::T(t), rules, &mut Vec::new(), &mut out);
    out.into_iter().map(Path).collect()
}

/// A stateful redex selector; `Random` keeps its generator between steps.
pub struct Stepper {
    rules: RuleSet,
    strategy: Strategy,
    rng: Option<ChaCha8Rng>,
}

impl Stepper {
    pub fn new(rules: RuleSet, strategy: Strategy) -> Stepper {
        let rng = match strategy {
            Strategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Stepper {
            rules,
            strategy,
            rng,
        }
    }

    pub fn step(&mut self, t: &Term) -> Option<(Term, Path, RuleId)> {
        let mut path = Vec::new();
        let found = match self.strategy {
            Strategy::LeftmostOutermost => outermost(Node::T(t), self.rules, &mut path),
            Strategy::LeftmostInnermost => innermost(Node::T(t), self.rules, &mut path),
            Strategy::Random(_) => {
                let positions = redex_positions(t, self.rules);
                let rng = self.rng.as_mut().expect("random stepper has a generator");
                let chosen = positions.choose(rng)?;
                path = chosen.0.clone();
                rewrite_node_at(Node::T(t), &path, self.rules)
            }
        };
        match found? {
            (Owned::T(next), rule) => Some((next, Path(path), rule)),
            (Owned::S(_), _) => unreachable!("a term rewrites to a term"),
        }
    }
}

/// One rewrite step, or `None` at a normal form.
pub fn step(t: &Term, rules: RuleSet, strategy: Strategy) -> Option<(Term, Path, RuleId)> {
    Stepper::new(rules, strategy).step(t)
}

pub fn is_normal(t: &Term, rules: RuleSet) -> bool {
    outermost(Node::T(t), rules, &mut Vec::new()).is_none()
}

pub fn normalize_with(
    t: &Term,
    rules: RuleSet,
    strategy: Strategy,
    fuel: u64,
) -> Result<Term, RewriteError> {
    let mut stepper = Stepper::new(rules, strategy);
    let mut current = t.clone();
    let mut spent = 0;
    while let Some((next, _, _)) = stepper.step(&current) {
        if spent == fuel {
            return Err(RewriteError::FuelExhausted {
                fuel,
                partial: Box::new(current),
                trace: None,
            });
        }
        spent += 1;
        current = next;
    }
    Ok(current)
}

/// σ-normal form under the default strategy.
pub fn normalize_sigma(t: &Term, fuel: u64) -> Result<Term, RewriteError> {
    normalize_with(t, RuleSet::SigmaOnly, Strategy::default(), fuel)
}

/// λσ-normal form (no Beta and no σ redex).
pub fn normalize_lambda_sigma(t: &Term, fuel: u64) -> Result<Term, RewriteError> {
    normalize_with(t, RuleSet::LambdaSigma, Strategy::default(), fuel)
}

pub fn normalize(t: &Term, rules: RuleSet, fuel: u64) -> Result<Term, RewriteError> {
    normalize_with(t, rules, Strategy::default(), fuel)
}

pub fn normalize_traced(
    t: &Term,
    rules: RuleSet,
    strategy: Strategy,
    fuel: u64,
) -> Result<(Term, RewriteTrace), RewriteError> {
    let mut stepper = Stepper::new(rules, strategy);
    let mut trace = RewriteTrace {
        initial: t.clone(),
        steps: Vec::new(),
        fuel_spent: 0,
    };
    let mut current = t.clone();
    while let Some((next, path, rule)) = stepper.step(&current) {
        if trace.fuel_spent == fuel {
            return Err(RewriteError::FuelExhausted {
                fuel,
                partial: Box::new(current),
                trace: Some(Box::new(trace)),
            });
        }
        trace.fuel_spent += 1;
        trace.steps.push(TraceStep {
            path,
            rule,
            term: next.clone(),
        });
        current = next;
    }
    Ok((current, trace))
}

/// Equality modulo σ: identical σ-normal forms after shift canonicalization.
pub fn sigma_equal(a: &Term, b: &Term, fuel: u64) -> Result<bool, RewriteError> {
    equal_under(a, b, RuleSet::SigmaOnly, fuel)
}

pub fn equal_under(a: &Term, b: &Term, rules: RuleSet, fuel: u64) -> Result<bool, RewriteError> {
    if a == b {
        return Ok(true);
    }
    let na = canonicalize_term(&normalize(a, rules, fuel)?);
    let nb = canonicalize_term(&normalize(b, rules, fuel)?);
    Ok(na == nb)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(n: u32) -> Term {
        Term::index(n)
    }

    #[test]
    fn identity_substitution_is_erased() {
        let t = Term::closure(i(1), Subst::id());
        let (next, path, rule) = step(&t, RuleSet::SigmaOnly, Strategy::default()).unwrap();
        assert_eq!((next, path, rule), (i(1), Path::root(), RuleId::IdSub));
    }

    #[test]
    fn beta_only_in_lambda_sigma() {
        let t = Term::app(Term::lam(i(1)), i(2));
        assert!(step(&t, RuleSet::SigmaOnly, Strategy::default()).is_none());
        let (next, _, rule) = step(&t, RuleSet::LambdaSigma, Strategy::default()).unwrap();
        assert_eq!(rule, RuleId::Beta);
        assert_eq!(next, Term::closure(i(1), Subst::cons(i(2), Subst::id())));
    }

    #[test]
    fn sigma_normal_forms() {
        let t = Term::closure(Term::lam(i(1)), Subst::Shift(1));
        assert_eq!(normalize_sigma(&t, DEFAULT_FUEL).unwrap(), Term::lam(i(1)));

        let t = Term::closure(
            Term::app(i(1), i(2)),
            Subst::cons(Term::meta("A"), Subst::id()),
        );
        assert_eq!(
            normalize_sigma(&t, DEFAULT_FUEL).unwrap(),
            Term::app(Term::meta("A"), i(1))
        );
        assert_eq!(normalize_sigma(&i(5), DEFAULT_FUEL).unwrap(), i(5));
    }

    #[test]
    fn lambda_sigma_normal_forms() {
        let t = Term::app(Term::lam(i(1)), i(3));
        assert_eq!(normalize_lambda_sigma(&t, DEFAULT_FUEL).unwrap(), i(3));
        let t = Term::app(Term::lam(Term::lam(i(2))), i(1));
        assert_eq!(
            normalize_lambda_sigma(&t, DEFAULT_FUEL).unwrap(),
            Term::lam(i(2))
        );
        let t = Term::lam(i(1));
        assert_eq!(normalize_lambda_sigma(&t, DEFAULT_FUEL).unwrap(), t);
    }

    #[test]
    fn traces() {
        let (nf, trace) =
            normalize_traced(&i(1), RuleSet::SigmaOnly, Strategy::default(), 10).unwrap();
        assert_eq!(nf, i(1));
        assert!(trace.steps.is_empty());

        let t = Term::closure(i(1), Subst::id());
        let (_, trace) = normalize_traced(&t, RuleSet::SigmaOnly, Strategy::default(), 10).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].rule, RuleId::IdSub);

        let t = Term::closure(Term::lam(i(1)), Subst::Shift(1));
        let (nf, trace) =
            normalize_traced(&t, RuleSet::SigmaOnly, Strategy::default(), 10).unwrap();
        assert_eq!(nf, Term::lam(i(1)));
        let rules: Vec<_> = trace.steps.iter().map(|s| s.rule).collect();
        assert_eq!(rules, vec![RuleId::Abs, RuleId::VarConsHit]);
        assert!(trace.replay(RuleSet::SigmaOnly));
        assert_eq!(trace.result(), &nf);
    }

    #[test]
    fn sigma_equality() {
        let f = DEFAULT_FUEL;
        assert!(sigma_equal(&i(1), &Term::closure(i(1), Subst::id()), f).unwrap());
        assert!(!sigma_equal(&i(1), &i(2), f).unwrap());
        let a = Term::closure(
            Term::meta("X"),
            Subst::comp(Subst::Shift(1), Subst::Shift(2)),
        );
        let b = Term::closure(Term::meta("X"), Subst::Shift(3));
        assert!(sigma_equal(&a, &b, f).unwrap());
    }

    #[test]
    fn shifted_indices_through_compositions() {
        // both orders of contraction must meet at 5
        let t = Term::closure(Term::closure(i(2), Subst::Shift(1)), Subst::Shift(2));
        for s in [
            Strategy::LeftmostOutermost,
            Strategy::LeftmostInnermost,
            Strategy::Random(7),
        ] {
            assert_eq!(
                normalize_with(&t, RuleSet::SigmaOnly, s, 100).unwrap(),
                i(5)
            );
        }
    }

    #[test]
    fn eta_collapses_identity_lifts() {
        // (λ X)[id] and λ X agree
        let t = Term::closure(Term::lam(Term::meta("X")), Subst::id());
        assert_eq!(
            normalize_sigma(&t, 100).unwrap(),
            Term::lam(Term::meta("X"))
        );
        let t = Term::closure(Term::lam(Term::meta("X")), Subst::Shift(0));
        let (nf, _) =
            normalize_traced(&t, RuleSet::SigmaOnly, Strategy::LeftmostInnermost, 100).unwrap();
        assert_eq!(nf, Term::lam(Term::meta("X")));
        // X[1 · ↑^1] is X
        let t = Term::closure(Term::meta("X"), Subst::cons(i(1), Subst::Shift(1)));
        assert_eq!(normalize_sigma(&t, 100).unwrap(), Term::meta("X"));
        // literal form 1[s] · (↑ ∘ s)
        let s = Subst::cons(Term::meta("A"), Subst::Shift(2));
        let lit = Subst::cons(
            Term::closure(i(1), s.clone()),
            Subst::comp(Subst::Shift(1), s.clone()),
        );
        let t = Term::closure(Term::meta("X"), lit);
        let (nf, trace) =
            normalize_traced(&t, RuleSet::SigmaOnly, Strategy::default(), 100).unwrap();
        assert_eq!(trace.steps[0].rule, RuleId::EtaConsShift);
        assert_eq!(nf, Term::closure(Term::meta("X"), s));
    }

    #[test]
    fn fuel_runs_out() {
        let omega = Term::lam(Term::app(i(1), i(1)));
        let t = Term::app(omega.clone(), omega);
        match normalize_lambda_sigma(&t, 50) {
            Err(RewriteError::FuelExhausted { fuel, .. }) => assert_eq!(fuel, 50),
            other => panic!("expected fuel exhaustion, got {other:?}"),
        }
        let err = normalize_traced(&t, RuleSet::LambdaSigma, Strategy::default(), 5).unwrap_err();
        let RewriteError::FuelExhausted { trace, .. } = err;
        assert_eq!(trace.unwrap().steps.len(), 5);
    }

    #[test]
    fn redex_positions_are_preorder() {
        let inner = Term::closure(i(1), Subst::id());
        let t = Term::app(inner.clone(), Term::lam(inner));
        let ps: Vec<String> = redex_positions(&t, RuleSet::SigmaOnly)
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(ps, vec!["1", "2.1"]);
    }
}
