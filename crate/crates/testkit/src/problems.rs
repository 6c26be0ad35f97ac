//! Random second-order problems and instances of the σ/λσ agreement claim.

use std::collections::BTreeSet;

use lsf_core::rewrite::{normalize_lambda_sigma, DEFAULT_FUEL};
use lsf_core::sorts::{validate_problem, Context, MetaDecls, Mode, SimpleType, Sort, UnifProblem};
use lsf_core::term::{MetaSubst, Subst, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn iota() -> SimpleType {
    SimpleType::base("iota")
}

/// Types of order at most 2 over a single base type.
fn second_order_types() -> Vec<SimpleType> {
    vec![
        iota(),
        iota(),
        SimpleType::arrow(iota(), iota()),
        SimpleType::arrows([iota(), iota()], iota()),
    ]
}

struct ProblemGen {
    rng: ChaCha8Rng,
    gamma: Context,
    metas: MetaDecls,
}

impl ProblemGen {
    fn meta_of_type(&mut self, ty: &SimpleType) -> Term {
        let existing: Vec<String> = self
            .metas
            .iter()
            .filter(|(_, s)| &s.ty == ty)
            .map(|(x, _)| x.clone())
            .collect();
        if !existing.is_empty() && self.rng.gen_bool(0.6) {
            return Term::meta(existing.choose(&mut self.rng).unwrap().clone());
        }
        let name = ["X", "Y", "Z", "W", "V", "U"][self.metas.len() % 6].to_string()
            + &"'".repeat(self.metas.len() / 6);
        self.metas
            .insert(name.clone(), Sort::new(self.gamma.clone(), ty.clone()));
        Term::meta(name)
    }

    /// A closure-free term in λ-calculus form; metavariables are bare at
    /// any binder depth.
    fn term(&mut self, ctx: &Context, ty: &SimpleType, budget: usize) -> Term {
        let vars: Vec<u32> = ctx
            .iter()
            .enumerate()
            .filter(|(_, t)| *t == ty)
            .map(|(i, _)| i as u32 + 1)
            .collect();
        let meta_ok = ty.arity() <= 2 && ty.uncurry().0.iter().all(|a| a.is_atomic());
        if budget <= 1 {
            if let Some(&i) = vars.choose(&mut self.rng) {
                if !meta_ok || self.rng.gen_bool(0.7) {
                    return Term::Index(i);
                }
            }
            if meta_ok {
                return self.meta_of_type(ty);
            }
            if let SimpleType::Arrow(a, b) = ty {
                return Term::lam(self.term(&ctx.push((**a).clone()), b, 1));
            }
        }
        loop {
            match self.rng.gen_range(0..100) {
                0..=19 if !vars.is_empty() => {
                    return Term::Index(*vars.choose(&mut self.rng).unwrap())
                }
                20..=34 if meta_ok => return self.meta_of_type(ty),
                35..=49 => {
                    if let SimpleType::Arrow(a, b) = ty {
                        let inner = ctx.push((**a).clone());
                        return Term::lam(self.term(&inner, b, budget.saturating_sub(1)));
                    }
                }
                50..=89 => {
                    let a = if self.rng.gen_bool(0.8) {
                        iota()
                    } else {
                        SimpleType::arrow(iota(), iota())
                    };
                    let f_ty = SimpleType::arrow(a.clone(), ty.clone());
                    let split = self.rng.gen_range(1..budget.max(2));
                    let f = self.term(ctx, &f_ty, split);
                    let x = self.term(ctx, &a, budget.saturating_sub(split + 1).max(1));
                    return Term::app(f, x);
                }
                90..=99 => {
                    // an explicit β-redex
                    let a = iota();
                    let inner = ctx.push(a.clone());
                    let half = (budget / 2).max(1);
                    let body = self.term(&inner, ty, half);
                    let arg = self.term(ctx, &a, half);
                    return Term::app(Term::lam(body), arg);
                }
                _ => {}
            }
        }
    }
}

/// A valid second-order problem in λ-calculus form, determined by `seed`.
/// Some contain β-redexes; all have at least one metavariable.
pub fn second_order_problem(seed: u64) -> UnifProblem {
    let mut attempt = 0u64;
    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_mul(0x2545_f491_4f6c_dd1d)
                .wrapping_add(attempt),
        );
        attempt += 1;
        let types = second_order_types();
        let n = rng.gen_range(1..=4);
        let gamma = Context(
            (0..n)
                .map(|_| types.choose(&mut rng).unwrap().clone())
                .collect(),
        );
        let mut g = ProblemGen {
            rng,
            gamma: gamma.clone(),
            metas: MetaDecls::new(),
        };
        let lb = g.rng.gen_range(1..=10);
        let rb = g.rng.gen_range(1..=10);
        let lhs = g.term(&gamma, &iota(), lb);
        let rhs = g.term(&gamma, &iota(), rb);
        if g.metas.is_empty() {
            continue;
        }
        let p = UnifProblem {
            base_types: BTreeSet::from(["iota".to_string()]),
            ctx: gamma,
            metavars: g.metas,
            lhs,
            rhs,
            mode: Mode::LambdaSigma,
        };
        if validate_problem(&p).passed() {
            return p;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SubstitutedCase {
    pub ctx: Context,
    pub metavars: MetaDecls,
    pub a: Term,
    pub theta: MetaSubst,
}

/// Indices of type ι, and of function types ending in ι with their arity.
fn iota_heads(ctx: &Context) -> (Vec<u32>, Vec<(u32, usize)>) {
    let mut atoms = Vec::new();
    let mut funcs = Vec::new();
    for (i, t) in ctx.iter().enumerate() {
        let i = i as u32 + 1;
        if t == &iota() {
            atoms.push(i);
        } else if t.uncurry().1 == &iota() {
            funcs.push((i, t.arity()));
        }
    }
    (atoms, funcs)
}

struct FoGen {
    rng: ChaCha8Rng,
    metas: MetaDecls,
    allow_metas: bool,
}

impl FoGen {
    /// A first-order term of type ι in `ctx`: applications of context
    /// functions to atomic arguments, and metavariables under explicit
    /// arguments `a1 . ... . an . ^k`.
    fn term(&mut self, ctx: &Context, budget: usize) -> Term {
        let (atoms, funcs) = iota_heads(ctx);
        let stuck = atoms.is_empty() && (budget <= 1 || funcs.is_empty());
        if self.allow_metas && (stuck || self.rng.gen_bool(0.25)) {
            return self.meta_occurrence(ctx, budget, !atoms.is_empty());
        }
        if budget <= 1 || funcs.is_empty() {
            return Term::Index(*atoms.choose(&mut self.rng).expect("context has an atom"));
        }
        let &(head, arity) = funcs.choose(&mut self.rng).unwrap();
        let per = (budget - 1) / arity;
        let args: Vec<Term> = (0..arity).map(|_| self.term(ctx, per.max(1))).collect();
        Term::apps(Term::Index(head), args)
    }

    fn meta_occurrence(&mut self, ctx: &Context, budget: usize, has_atoms: bool) -> Term {
        let k = self.rng.gen_range(0..=ctx.len().min(2));
        let n = self.rng.gen_range(0..=2usize);
        let heads: Vec<Term> = (0..n)
            .map(|_| {
                let saved = self.allow_metas;
                self.allow_metas = saved && (!has_atoms || self.rng.gen_bool(0.3));
                let t = self.term(ctx, budget / 3);
                self.allow_metas = saved;
                t
            })
            .collect();
        let mut delta = ctx.drop_front(k).unwrap();
        for _ in 0..n {
            delta = delta.push(iota());
        }
        let name = format!("Y{}", self.metas.len() + 1);
        self.metas.insert(name.clone(), Sort::new(delta, iota()));
        let s = Subst::from_parts(heads, k as u32);
        if s == Subst::id() {
            Term::meta(name)
        } else {
            Term::closure(Term::meta(name), s)
        }
    }
}

/// An instance `(Γ, metavariables, a, θ)` meeting the hypotheses of
/// `lsf_core::transform::substituted_instance`.
pub fn substituted_case(seed: u64) -> SubstitutedCase {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x5851_f42d_4c95_7f2d).wrapping_add(11));
    let types = second_order_types();
    let n = rng.gen_range(1..=4);
    let mut gamma: Vec<SimpleType> = (0..n)
        .map(|_| types.choose(&mut rng).unwrap().clone())
        .collect();
    if !gamma.iter().any(|t| t.is_atomic()) {
        gamma.push(iota());
    }
    let gamma = Context(gamma);
    let mut g = FoGen {
        rng,
        metas: MetaDecls::new(),
        allow_metas: true,
    };
    let budget = g.rng.gen_range(1..=12);
    let raw = g.term(&gamma, budget);
    let a = normalize_lambda_sigma(&raw, DEFAULT_FUEL).expect("first-order terms normalize");

    // bindings: closed first-order terms, sometimes using an unbound
    // function-typed metavariable of the binding's own context
    let mut metavars = g.metas.clone();
    let mut bindings = Vec::new();
    let mut extra = 0;
    for (y, sort) in g.metas.clone() {
        if iota_heads(&sort.ctx).0.is_empty() || !g.rng.gen_bool(0.8) {
            continue;
        }
        g.allow_metas = false;
        let size = g.rng.gen_range(1..=6);
        let mut t = g.term(&sort.ctx, size);
        if g.rng.gen_bool(0.2) {
            extra += 1;
            let z = format!("Z{extra}");
            metavars.insert(
                z.clone(),
                Sort::new(sort.ctx.clone(), SimpleType::arrow(iota(), iota())),
            );
            t = Term::app(Term::meta(z), t);
        }
        bindings.push((y, t));
    }
    SubstitutedCase {
        ctx: gamma,
        metavars,
        a,
        theta: MetaSubst::new(bindings).expect("bindings avoid the domain"),
    }
}
