//! Random well-sorted λσ-terms, with metavariables declared as needed.

use lsf_core::sorts::{check_term, Context, MetaDecls, SimpleType, Sort};
use lsf_core::term::{term_size, Subst, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_SIZE: usize = 60;

#[derive(Clone, Debug)]
pub struct SortedTerm {
    pub ctx: Context,
    pub metas: MetaDecls,
    pub term: Term,
    pub ty: SimpleType,
}

fn iota() -> SimpleType {
    SimpleType::base("iota")
}

fn kappa() -> SimpleType {
    SimpleType::base("kappa")
}

/// The types terms are drawn from.
pub fn type_universe() -> Vec<SimpleType> {
    vec![
        iota(),
        kappa(),
        SimpleType::arrow(iota(), iota()),
        SimpleType::arrow(kappa(), iota()),
        SimpleType::arrows([iota(), kappa()], iota()),
        SimpleType::arrow(SimpleType::arrow(iota(), iota()), iota()),
    ]
}

pub struct TermGen {
    pub rng: ChaCha8Rng,
    pub metas: MetaDecls,
    universe: Vec<SimpleType>,
    next_meta: usize,
}

impl TermGen {
    pub fn new(seed: u64) -> TermGen {
        TermGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            metas: MetaDecls::new(),
            universe: type_universe(),
            next_meta: 0,
        }
    }

    pub fn pick_type(&mut self) -> SimpleType {
        self.universe.choose(&mut self.rng).unwrap().clone()
    }

    pub fn context(&mut self, max_len: usize) -> Context {
        let n = self.rng.gen_range(0..=max_len);
        Context((0..n).map(|_| self.pick_type()).collect())
    }

    /// A metavariable of sort `(ctx, ty)`, reusing a declared one sometimes.
    pub fn meta(&mut self, ctx: &Context, ty: &SimpleType) -> Term {
        let existing: Vec<String> = self
            .metas
            .iter()
            .filter(|(_, s)| &s.ctx == ctx && &s.ty == ty)
            .map(|(x, _)| x.clone())
            .collect();
        if !existing.is_empty() && self.rng.gen_bool(0.5) {
            return Term::meta(existing.choose(&mut self.rng).unwrap().clone());
        }
        self.next_meta += 1;
        let name = format!("M{}", self.next_meta);
        self.metas
            .insert(name.clone(), Sort::new(ctx.clone(), ty.clone()));
        Term::meta(name)
    }

    fn indices_of(ctx: &Context, ty: &SimpleType) -> Vec<u32> {
        ctx.iter()
            .enumerate()
            .filter(|(_, t)| *t == ty)
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }

    pub fn term(&mut self, ctx: &Context, ty: &SimpleType, budget: usize) -> Term {
        let vars = Self::indices_of(ctx, ty);
        if budget <= 1 {
            return match vars.choose(&mut self.rng) {
                Some(&i) if self.rng.gen_bool(0.85) => Term::Index(i),
                _ => self.meta(ctx, ty),
            };
        }
        loop {
            match self.rng.gen_range(0..100) {
                0..=14 if !vars.is_empty() => {
                    return Term::Index(*vars.choose(&mut self.rng).unwrap());
                }
                15..=19 => return self.meta(ctx, ty),
                20..=39 => {
                    if let SimpleType::Arrow(a, b) = ty {
                        let inner = ctx.push((**a).clone());
                        return Term::lam(self.term(&inner, b, budget - 1));
                    }
                }
                40..=69 => {
                    let a = self.pick_type();
                    let f_ty = SimpleType::arrow(a.clone(), ty.clone());
                    let split = self.rng.gen_range(1..budget.max(2));
                    let f = self.term(ctx, &f_ty, split);
                    let x = self.term(ctx, &a, (budget - 1).saturating_sub(split).max(1));
                    return Term::app(f, x);
                }
                70..=99 => {
                    let split = self.rng.gen_range(1..budget.max(2));
                    let (s, target) = self.subst(ctx, split);
                    let body = self.term(&target, ty, (budget - 1).saturating_sub(split).max(1));
                    return Term::closure(body, s);
                }
                _ => {}
            }
        }
    }

    /// A substitution `s` from `ctx` and the context `Δ` it provides, so
    /// that `t[s]` is typed in `ctx` when `t` is typed in `Δ`.
    pub fn subst(&mut self, ctx: &Context, budget: usize) -> (Subst, Context) {
        let choice = if budget <= 2 {
            0
        } else {
            self.rng.gen_range(0..3)
        };
        match choice {
            0 => {
                let k = self.rng.gen_range(0..=ctx.len().min(3));
                (Subst::Shift(k as u32), ctx.drop_front(k).unwrap())
            }
            1 => {
                let half = budget / 2;
                let (rest, target) = self.subst(ctx, half);
                let a = self.pick_type();
                let head = self.term(ctx, &a, budget - half);
                (Subst::cons(head, rest), target.push(a))
            }
            _ => {
                let half = budget / 2;
                let (second, mid) = self.subst(ctx, half);
                let (first, target) = self.subst(&mid, budget - half);
                (Subst::comp(first, second), target)
            }
        }
    }
}

/// One well-sorted term of size at most [`MAX_SIZE`], determined by `seed`.
pub fn sorted_term(seed: u64) -> SortedTerm {
    let mut attempt = 0u64;
    loop {
        let mut g = TermGen::new(
            seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(attempt),
        );
        let ctx = g.context(4);
        let ty = g.pick_type();
        let budget = g.rng.gen_range(4..=40);
        let term = g.term(&ctx, &ty, budget);
        if term_size(&term) <= MAX_SIZE {
            debug_assert!(check_term(&ctx, &g.metas, &term, &ty).is_ok());
            return SortedTerm {
                ctx,
                metas: g.metas,
                term,
                ty,
            };
        }
        attempt += 1;
    }
}

pub fn sorted_terms(seed: u64, n: usize) -> Vec<SortedTerm> {
    (0..n as u64)
        .map(|i| sorted_term(seed.wrapping_add(i)))
        .collect()
}
