use std::collections::BTreeSet;

use lsf_core::rewrite::{
    is_normal, normalize, normalize_traced, normalize_with, RuleId, RuleSet, Stepper, Strategy,
};
use lsf_core::solver::{enumerate_simple_terms, SearchConfig};
use lsf_core::sorts::{check_term, order_of_type, sort_check_term, MetaDecls, SimpleType, Sort};
use lsf_core::term::{
    canonicalize_shifts, canonicalize_term, free_metavars, graft, is_simple, MetaSubst, Subst, Term,
};
use lsf_core::transform::{lift_solution, project_solution, reduce_problem};
use lsf_testkit::{second_order_problem, sorted_term};
use proptest::prelude::*;
use proptest::strategy::Strategy as PropStrategy;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FUEL: u64 = 1_000_000;

/// Closed simple candidates for `sort`, or none if the sort is empty at
/// this bound.
fn candidates(sort: &Sort, bound: usize) -> Vec<Term> {
    enumerate_simple_terms(sort, &MetaDecls::new(), &SearchConfig::with_bound(bound))
}

/// Binds a random subset of `metas` to closed simple terms of their sorts.
fn random_theta(metas: &MetaDecls, seed: u64) -> MetaSubst {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bindings = Vec::new();
    for (x, sort) in metas {
        if rng.gen_bool(0.7) {
            if let Some(t) = candidates(sort, 4).choose(&mut rng) {
                bindings.push((x.clone(), t.clone()));
            }
        }
    }
    MetaSubst::new(bindings).unwrap()
}

fn subterms(t: &Term, out: &mut Vec<Term>) {
    out.push(t.clone());
    match t {
        Term::Index(_) | Term::Meta(_) => {}
        Term::App(f, a) => {
            subterms(f, out);
            subterms(a, out);
        }
        Term::Lam(b) => subterms(b, out),
        Term::Closure(b, s) => {
            subterms(b, out);
            subst_subterms(s, out);
        }
    }
}

fn subst_subterms(s: &Subst, out: &mut Vec<Term>) {
    match s {
        Subst::Shift(_) => {}
        Subst::Cons(a, s) => {
            subterms(a, out);
            subst_subterms(s, out);
        }
        Subst::Comp(a, b) => {
            subst_subterms(a, out);
            subst_subterms(b, out);
        }
    }
}

fn has_shift_shift(s: &Subst) -> bool {
    match s {
        Subst::Shift(_) => false,
        Subst::Comp(a, b) if matches!((&**a, &**b), (Subst::Shift(_), Subst::Shift(_))) => true,
        Subst::Cons(a, s) => term_has_shift_shift(a) || has_shift_shift(s),
        Subst::Comp(a, b) => has_shift_shift(a) || has_shift_shift(b),
    }
}

fn term_has_shift_shift(t: &Term) -> bool {
    match t {
        Term::Index(_) | Term::Meta(_) => false,
        Term::App(f, a) => term_has_shift_shift(f) || term_has_shift_shift(a),
        Term::Lam(b) => term_has_shift_shift(b),
        Term::Closure(b, s) => term_has_shift_shift(b) || has_shift_shift(s),
    }
}

fn arb_type() -> impl PropStrategy<Value = SimpleType> {
    let leaf = prop_oneof![
        Just(SimpleType::base("iota")),
        Just(SimpleType::base("kappa"))
    ];
    leaf.prop_recursive(4, 16, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| SimpleType::arrow(a, b))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn graft_is_idempotent(seed in any::<u64>()) {
        let st = sorted_term(seed);
        let theta = random_theta(&st.metas, seed);
        let once = graft(&theta, &st.term);
        prop_assert_eq!(graft(&theta, &once), once);
    }

    #[test]
    fn graft_metavariables(seed in any::<u64>()) {
        let st = sorted_term(seed);
        let theta = random_theta(&st.metas, seed ^ 1);
        let after = free_metavars(&graft(&theta, &st.term));
        let mut allowed: BTreeSet<String> = free_metavars(&st.term)
            .into_iter()
            .filter(|x| !theta.contains(x))
            .collect();
        for (_, t) in theta.iter() {
            allowed.extend(free_metavars(t));
        }
        prop_assert!(after.is_subset(&allowed));
    }

    #[test]
    fn grafting_preserves_sorts(seed in any::<u64>()) {
        let st = sorted_term(seed);
        let theta = random_theta(&st.metas, seed ^ 2);
        prop_assert!(check_term(&st.ctx, &st.metas, &graft(&theta, &st.term), &st.ty).is_ok());
    }

    #[test]
    fn simplicity_is_closed_under_subterms(seed in any::<u64>()) {
        let st = sorted_term(seed);
        let nf = normalize(&st.term, RuleSet::SigmaOnly, FUEL).unwrap();
        for t in [st.term, nf] {
            let mut subs = Vec::new();
            subterms(&t, &mut subs);
            if is_simple(&t) {
                prop_assert!(subs.iter().all(is_simple));
            }
        }
    }

    #[test]
    fn canonical_shifts(seed in any::<u64>()) {
        let st = sorted_term(seed);
        let canon = canonicalize_term(&st.term);
        prop_assert!(!term_has_shift_shift(&canon));
        prop_assert_eq!(
            normalize(&canon, RuleSet::SigmaOnly, FUEL).unwrap(),
            normalize(&st.term, RuleSet::SigmaOnly, FUEL).unwrap()
        );
        prop_assert_eq!(canonicalize_shifts(&Subst::comp(Subst::Shift(2), Subst::Shift(3))), Subst::Shift(5));
    }

    #[test]
    fn types_are_unique(seed in any::<u64>()) {
        let st = sorted_term(seed);
        if let Ok(ty) = sort_check_term(&st.ctx, &st.metas, &st.term) {
            prop_assert_eq!(ty, st.ty);
        }
    }

    #[test]
    fn lambda_sigma_steps_preserve_sorts(seed in any::<u64>()) {
        let st = sorted_term(seed);
        let (_, trace) = normalize_traced(&st.term, RuleSet::LambdaSigma, Strategy::Random(seed), FUEL).unwrap();
        for step in &trace.steps {
            prop_assert!(check_term(&st.ctx, &st.metas, &step.term, &st.ty).is_ok(), "{:?} at {}", step.rule, step.path);
        }
        prop_assert!(trace.replay(RuleSet::LambdaSigma));
    }

    #[test]
    fn order_of_arrows(a in arb_type(), b in arb_type()) {
        let ab = SimpleType::arrow(a.clone(), b.clone());
        prop_assert!(order_of_type(&ab) >= order_of_type(&b));
        prop_assert!(order_of_type(&ab) + 1 > order_of_type(&a));
        prop_assert_eq!(order_of_type(&ab) == 1, false);
    }

    #[test]
    fn strategies_agree_under_lambda_sigma(seed in any::<u64>()) {
        let st = sorted_term(seed);
        let lo = normalize_with(&st.term, RuleSet::LambdaSigma, Strategy::LeftmostOutermost, FUEL).unwrap();
        let li = normalize_with(&st.term, RuleSet::LambdaSigma, Strategy::LeftmostInnermost, FUEL).unwrap();
        let rnd = normalize_with(&st.term, RuleSet::LambdaSigma, Strategy::Random(seed), FUEL).unwrap();
        prop_assert_eq!(&lo, &li);
        prop_assert_eq!(&lo, &rnd);
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>()) {
        let st = sorted_term(seed);
        for rules in [RuleSet::SigmaOnly, RuleSet::LambdaSigma] {
            let nf = normalize(&st.term, rules, FUEL).unwrap();
            prop_assert!(is_normal(&nf, rules));
            prop_assert_eq!(normalize(&nf, rules, FUEL).unwrap(), nf.clone());
            prop_assert_eq!(Stepper::new(rules, Strategy::default()).step(&nf), None);
        }
    }

    #[test]
    fn sigma_never_contracts_beta(seed in any::<u64>()) {
        let st = sorted_term(seed);
        let (nf, trace) = normalize_traced(&st.term, RuleSet::SigmaOnly, Strategy::Random(seed), FUEL).unwrap();
        prop_assert!(trace.steps.iter().all(|s| s.rule != RuleId::Beta));
        if st.term.has_beta_redex() && st.term.is_closure_free() {
            prop_assert!(nf.has_beta_redex());
        }
    }

    #[test]
    fn project_inverts_lift(seed in any::<u64>()) {
        let p = second_order_problem(seed);
        let cert = reduce_problem(&p, FUEL).unwrap();
        let theta = random_theta(&cert.target.metavars, seed);
        let lifted = lift_solution(&cert, &theta).unwrap();
        prop_assert_eq!(project_solution(&cert, &lifted).unwrap(), theta);
    }
}

#[test]
fn sigma_normal_forms_can_keep_redexes() {
    let redexes = (0..200)
        .map(sorted_term)
        .filter(|st| {
            normalize(&st.term, RuleSet::SigmaOnly, FUEL)
                .unwrap()
                .has_beta_redex()
        })
        .count();
    assert!(redexes > 0);
}
