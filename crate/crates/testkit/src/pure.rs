//! Reference normalizer over the textbook encoding, where the only index
//! is `1` and `n + 1` is written `1[↑ ∘ ... ∘ ↑]`.
//!
//! It evaluates eagerly: subterms are normalized first, then substitutions
//! are pushed through normal terms by structural recursion. Rules are the
//! ones of λσ with surjective pairing (`1·↑ → id`, `1[s]·(↑∘s) → s`).

use lsf_core::term::{Subst, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PTerm {
    One,
    Meta(String),
    App(Box<PTerm>, Box<PTerm>),
    Lam(Box<PTerm>),
    Clo(Box<PTerm>, Box<PSubst>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PSubst {
    Id,
    Up,
    Cons(Box<PTerm>, Box<PSubst>),
    Comp(Box<PSubst>, Box<PSubst>),
}

/// `↑ ∘ (↑ ∘ ... ↑)` with `k` arrows, or `id`.
fn ups(k: u32) -> PSubst {
    match k {
        0 => PSubst::Id,
        1 => PSubst::Up,
        k => PSubst::Comp(Box::new(PSubst::Up), Box::new(ups(k - 1))),
    }
}

pub fn encode(t: &Term) -> PTerm {
    match t {
        Term::Index(1) => PTerm::One,
        Term::Index(n) => PTerm::Clo(Box::new(PTerm::One), Box::new(ups(n - 1))),
        Term::Meta(x) => PTerm::Meta(x.clone()),
        Term::App(f, a) => PTerm::App(Box::new(encode(f)), Box::new(encode(a))),
        Term::Lam(b) => PTerm::Lam(Box::new(encode(b))),
        Term::Closure(b, s) => PTerm::Clo(Box::new(encode(b)), Box::new(encode_subst(s))),
    }
}

pub fn encode_subst(s: &Subst) -> PSubst {
    match s {
        Subst::Shift(k) => ups(*k),
        Subst::Cons(a, s) => PSubst::Cons(Box::new(encode(a)), Box::new(encode_subst(s))),
        Subst::Comp(a, b) => PSubst::Comp(Box::new(encode_subst(a)), Box::new(encode_subst(b))),
    }
}

/// Length of a chain `↑ ∘ (↑ ∘ ... ↑)`, if `s` is one.
fn chain_len(s: &PSubst) -> Option<u32> {
    match s {
        PSubst::Id => Some(0),
        PSubst::Up => Some(1),
        PSubst::Comp(a, b) if **a == PSubst::Up => chain_len(b).filter(|&n| n > 0).map(|n| n + 1),
        _ => None,
    }
}

pub fn decode(t: &PTerm) -> Term {
    match t {
        PTerm::One => Term::Index(1),
        PTerm::Clo(b, s) if **b == PTerm::One && chain_len(s).is_some_and(|n| n > 0) => {
            Term::Index(chain_len(s).unwrap() + 1)
        }
        PTerm::Meta(x) => Term::meta(x.clone()),
        PTerm::App(f, a) => Term::app(decode(f), decode(a)),
        PTerm::Lam(b) => Term::lam(decode(b)),
        PTerm::Clo(b, s) => Term::closure(decode(b), decode_subst(s)),
    }
}

pub fn decode_subst(s: &PSubst) -> Subst {
    if let Some(n) = chain_len(s) {
        return Subst::Shift(n);
    }
    match s {
        PSubst::Cons(a, s) => Subst::cons(decode(a), decode_subst(s)),
        PSubst::Comp(a, b) => Subst::comp(decode_subst(a), decode_subst(b)),
        PSubst::Id | PSubst::Up => unreachable!("chains handled above"),
    }
}

pub struct Normalizer {
    pub beta: bool,
}

impl Normalizer {
    pub fn term(&self, t: &PTerm) -> PTerm {
        match t {
            PTerm::One | PTerm::Meta(_) => t.clone(),
            PTerm::App(f, a) => self.app(self.term(f), self.term(a)),
            PTerm::Lam(b) => PTerm::Lam(Box::new(self.term(b))),
            PTerm::Clo(b, s) => self.apply(&self.term(b), &self.subst(s)),
        }
    }

    pub fn subst(&self, s: &PSubst) -> PSubst {
        match s {
            PSubst::Id | PSubst::Up => s.clone(),
            PSubst::Cons(a, s) => self.cons(self.term(a), self.subst(s)),
            PSubst::Comp(a, b) => self.compose(&self.subst(a), &self.subst(b)),
        }
    }

    fn app(&self, f: PTerm, a: PTerm) -> PTerm {
        match f {
            PTerm::Lam(body) if self.beta => self.apply(&body, &self.cons(a, PSubst::Id)),
            f => PTerm::App(Box::new(f), Box::new(a)),
        }
    }

    /// Builds `a · s` from normal parts, contracting surjective pairs.
    fn cons(&self, a: PTerm, s: PSubst) -> PSubst {
        if a == PTerm::One && s == PSubst::Up {
            return PSubst::Id;
        }
        if let PTerm::Clo(b, inner) = &a {
            if **b == PTerm::One && self.compose(&PSubst::Up, inner) == s {
                return (**inner).clone();
            }
        }
        PSubst::Cons(Box::new(a), Box::new(s))
    }

    /// `t[s]` for normal `t` and `s`.
    fn apply(&self, t: &PTerm, s: &PSubst) -> PTerm {
        match t {
            PTerm::One => match s {
                PSubst::Id => PTerm::One,
                PSubst::Cons(a, _) => (**a).clone(),
                PSubst::Up | PSubst::Comp(..) => {
                    PTerm::Clo(Box::new(PTerm::One), Box::new(s.clone()))
                }
            },
            PTerm::Meta(_) => match s {
                PSubst::Id => t.clone(),
                _ => PTerm::Clo(Box::new(t.clone()), Box::new(s.clone())),
            },
            PTerm::Clo(b, inner) => {
                let s = self.compose(inner, s);
                self.apply(b, &s)
            }
            PTerm::App(f, a) => self.app(self.apply(f, s), self.apply(a, s)),
            PTerm::Lam(b) => {
                let lifted = self.cons(PTerm::One, self.compose(s, &PSubst::Up));
                PTerm::Lam(Box::new(self.apply(b, &lifted)))
            }
        }
    }

    /// `s ∘ t` for normal `s` and `t`.
    fn compose(&self, s: &PSubst, t: &PSubst) -> PSubst {
        match s {
            PSubst::Id => t.clone(),
            PSubst::Up => match t {
                PSubst::Id => PSubst::Up,
                PSubst::Cons(_, rest) => (**rest).clone(),
                PSubst::Up | PSubst::Comp(..) => {
                    PSubst::Comp(Box::new(PSubst::Up), Box::new(t.clone()))
                }
            },
            PSubst::Comp(a, b) => {
                let bt = self.compose(b, t);
                self.compose(a, &bt)
            }
            PSubst::Cons(a, rest) => self.cons(self.apply(a, t), self.compose(rest, t)),
        }
    }
}

/// Normalizes `t` through the encoding and converts the result back.
pub fn normalize_via_encoding(t: &Term, beta: bool) -> Term {
    decode(&Normalizer { beta }.term(&encode(t)))
}
