//! Random well-typed terms for property tests.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SimpleType, Term, TypingContext};

pub fn small_type(rng: &mut ChaCha8Rng, depth: usize) -> SimpleType {
    match if depth == 0 { 0 } else { rng.gen_range(0..4) } {
        0 => SimpleType::Base,
        1 => SimpleType::Unit,
        2 => SimpleType::arrow(small_type(rng, depth - 1), small_type(rng, depth - 1)),
        _ => SimpleType::product(vec![small_type(rng, depth - 1), small_type(rng, depth - 1)]),
    }
}

/// A random term of type `ty` in `ctx`, which must bind some `o`.
/// Elimination forms appear while `fuel` lasts; after that only
/// variables and introduction forms.
pub fn term_of(rng: &mut ChaCha8Rng, ctx: &TypingContext, ty: &SimpleType, fuel: usize) -> Term {
    let vars: Vec<usize> = (0..ctx.len()).filter(|&i| ctx.lookup(i) == Some(ty)).collect();
    if fuel > 0 {
        match rng.gen_range(0..5) {
            0 => {
                let a = small_type(rng, 1);
                let f = term_of(rng, ctx, &SimpleType::arrow(a.clone(), ty.clone()), fuel - 1);
                return Term::app(f, term_of(rng, ctx, &a, fuel - 1));
            }
            1 => {
                let other = small_type(rng, 1);
                let (pair, i) = if rng.gen() { (vec![ty.clone(), other], 1) } else { (vec![other, ty.clone()], 2) };
                return Term::proj(term_of(rng, ctx, &SimpleType::product(pair), fuel - 1), i);
            }
            2 if !vars.is_empty() => return Term::Var(vars[rng.gen_range(0..vars.len())]),
            _ => {}
        }
    }
    match ty {
        SimpleType::Arrow(a, b) => {
            Term::lam((**a).clone(), term_of(rng, &ctx.extended((**a).clone()), b, fuel.saturating_sub(1)))
        }
        SimpleType::Product(cs) => Term::tuple(cs.iter().map(|c| term_of(rng, ctx, c, fuel.saturating_sub(1))).collect()),
        SimpleType::Unit => Term::Unit,
        SimpleType::Base => Term::Var(vars[rng.gen_range(0..vars.len())]),
    }
}

pub fn typed_term() -> impl Strategy<Value = (TypingContext, Term, SimpleType)> {
    (any::<u64>(), 0usize..5).prop_map(|(seed, fuel)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = TypingContext::from_types(vec![SimpleType::Base, SimpleType::arrow(SimpleType::Base, SimpleType::Base)]);
        let ty = small_type(&mut rng, 2);
        let t = term_of(&mut rng, &ctx, &ty, fuel);
        (ctx, t, ty)
    })
}

/// A closed term: a generated open term abstracted over its context.
pub fn closed_term() -> impl Strategy<Value = (Term, SimpleType)> {
    typed_term().prop_map(|(ctx, t, ty)| {
        let types = ctx.types().to_vec();
        let mut term = t;
        let mut full = ty;
        for a in types.into_iter().rev() {
            full = SimpleType::arrow(a.clone(), full);
            term = Term::lam(a, term);
        }
        (term, full)
    })
}
