//! Normalization to β-normal η-long form.
//!
//! Terms are evaluated into a semantic domain of closures and neutral spines,
//! then read back along their type: arrows become abstractions, products
//! tuples, unit the unit value, and base-typed neutrals fully applied spines.

use std::rc::Rc;

use super::term::Term;
use super::types::SimpleType;
use super::typing::{typecheck, TypingContext};
use super::StlcError;

/// Default bound on the number of β/projection steps taken while evaluating.
pub const DEFAULT_STEP_BUDGET: usize = 10_000_000;

#[derive(Clone)]
enum Val {
    Closure(Rc<Env>, Rc<Term>),
    Tuple(Rc<[Val]>),
    Unit,
    Neutral(Rc<Neutral>),
}

enum Neutral {
    /// de Bruijn level
    Var(usize),
    App(Rc<Neutral>, Val),
    Proj(Rc<Neutral>, usize),
}

enum Env {
    Nil,
    Cons(Val, Rc<Env>),
}

impl Env {
    fn lookup(&self, mut k: usize) -> Option<&Val> {
        let mut cur = self;
        loop {
            match cur {
                Env::Nil => return None,
                Env::Cons(v, rest) => {
                    if k == 0 {
                        return Some(v);
                    }
                    k -= 1;
                    cur = rest;
                }
            }
        }
    }
}

struct Machine {
    steps: usize,
    budget: usize,
}

impl Machine {
    fn tick(&mut self) -> Result<(), StlcError> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(StlcError::GuardExceeded { steps: self.steps })
        } else {
            Ok(())
        }
    }

    fn eval(&mut self, env: &Rc<Env>, t: &Term) -> Result<Val, StlcError> {
        Ok(match t {
            Term::Var(k) => env.lookup(*k).cloned().ok_or(StlcError::Scope {
                index: *k,
                context_len: 0,
            })?,
            Term::Unit => Val::Unit,
            Term::Lam(_, body) => Val::Closure(env.clone(), Rc::new((**body).clone())),
            Term::App(f, a) => {
                let fv = self.eval(env, f)?;
                let av = self.eval(env, a)?;
                self.apply(fv, av)?
            }
            Term::Tuple(cs) => {
                let vs = cs
                    .iter()
                    .map(|c| self.eval(env, c))
                    .collect::<Result<Vec<_>, _>>()?;
                Val::Tuple(vs.into())
            }
            Term::Proj(s, i) => {
                let sv = self.eval(env, s)?;
                self.project(sv, *i)?
            }
        })
    }

    fn apply(&mut self, f: Val, a: Val) -> Result<Val, StlcError> {
        match f {
            Val::Closure(env, body) => {
                self.tick()?;
                let env = Rc::new(Env::Cons(a, env));
                self.eval(&env, &body)
            }
            Val::Neutral(n) => Ok(Val::Neutral(Rc::new(Neutral::App(n, a)))),
            _ => Err(StlcError::Internal(
                "application of a non-function value".into(),
            )),
        }
    }

    fn project(&mut self, v: Val, i: usize) -> Result<Val, StlcError> {
        match v {
            Val::Tuple(vs) => {
                self.tick()?;
                vs.get(i.wrapping_sub(1))
                    .cloned()
                    .ok_or_else(|| StlcError::Internal(format!("projection .{} out of range", i)))
            }
            Val::Neutral(n) => Ok(Val::Neutral(Rc::new(Neutral::Proj(n, i)))),
            _ => Err(StlcError::Internal(
                "projection from a non-tuple value".into(),
            )),
        }
    }

    /// Reads `v` back as a long normal form of type `ty`. `levels` holds the
    /// types of the variables bound so far, outermost first.
    fn reify(
        &mut self,
        ty: &SimpleType,
        v: Val,
        levels: &mut Vec<SimpleType>,
    ) -> Result<Term, StlcError> {
        match ty {
            SimpleType::Unit => Ok(Term::Unit),
            SimpleType::Arrow(dom, cod) => {
                let level = levels.len();
                let fresh = Val::Neutral(Rc::new(Neutral::Var(level)));
                let body_val = self.apply(v, fresh)?;
                levels.push((**dom).clone());
                let body = self.reify(cod, body_val, levels);
                levels.pop();
                Ok(Term::lam((**dom).clone(), body?))
            }
            SimpleType::Product(cs) => {
                let mut out = Vec::with_capacity(cs.len());
                for (i, c) in cs.iter().enumerate() {
                    let ci = self.project(v.clone(), i + 1)?;
                    out.push(self.reify(c, ci, levels)?);
                }
                Ok(Term::Tuple(out))
            }
            SimpleType::Base => match v {
                Val::Neutral(n) => Ok(self.reify_neutral(&n, levels)?.0),
                _ => Err(StlcError::Internal("non-neutral value at base type".into())),
            },
        }
    }

    fn reify_neutral(
        &mut self,
        n: &Neutral,
        levels: &mut Vec<SimpleType>,
    ) -> Result<(Term, SimpleType), StlcError> {
        match n {
            Neutral::Var(level) => {
                let ty = levels
                    .get(*level)
                    .cloned()
                    .ok_or_else(|| StlcError::Internal("dangling level".into()))?;
                Ok((Term::Var(levels.len() - 1 - level), ty))
            }
            Neutral::App(head, arg) => {
                let (h, hty) = self.reify_neutral(head, levels)?;
                match hty {
                    SimpleType::Arrow(dom, cod) => {
                        let a = self.reify(&dom, arg.clone(), levels)?;
                        Ok((Term::app(h, a), (*cod).clone()))
                    }
                    _ => Err(StlcError::Internal("neutral head is not a function".into())),
                }
            }
            Neutral::Proj(head, i) => {
                let (h, hty) = self.reify_neutral(head, levels)?;
                let c = hty
                    .components()
                    .and_then(|cs| cs.get(i.wrapping_sub(1)))
                    .cloned()
                    .ok_or_else(|| StlcError::Internal("neutral projection out of range".into()))?;
                Ok((Term::proj(h, *i), c))
            }
        }
    }
}

/// β-normal η-long form of `t` in `ctx`.
pub fn normalize(ctx: &TypingContext, t: &Term) -> Result<Term, StlcError> {
    normalize_with_budget(ctx, t, DEFAULT_STEP_BUDGET)
}

pub fn normalize_with_budget(
    ctx: &TypingContext,
    t: &Term,
    budget: usize,
) -> Result<Term, StlcError> {
    let ty = typecheck(ctx, t)?;
    let mut machine = Machine { steps: 0, budget };
    let mut levels: Vec<SimpleType> = ctx.types().to_vec();
    let mut env = Rc::new(Env::Nil);
    for level in 0..levels.len() {
        env = Rc::new(Env::Cons(Val::Neutral(Rc::new(Neutral::Var(level))), env));
    }
    let v = machine.eval(&env, t)?;
    machine.reify(&ty, v, &mut levels)
}

/// Whether two terms of the same type are βη-convertible in `ctx`.
pub fn beta_eta_eq(ctx: &TypingContext, t: &Term, u: &Term) -> Result<bool, StlcError> {
    if typecheck(ctx, t)? != typecheck(ctx, u)? {
        return Ok(false);
    }
    Ok(normalize(ctx, t)? == normalize(ctx, u)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o() -> SimpleType {
        SimpleType::Base
    }

    fn oo() -> SimpleType {
        SimpleType::arrow(o(), o())
    }

    #[test]
    fn applied_identity_collapses() {
        // (λf:o⇒o. λx:o. f x) (λy:o. y)  ~>  λx:o. x
        let t = Term::app(
            Term::lam(oo(), Term::lam(o(), Term::app(Term::Var(1), Term::Var(0)))),
            Term::lam(o(), Term::Var(0)),
        );
        let n = normalize(&TypingContext::new(), &t).unwrap();
        assert_eq!(n, Term::lam(o(), Term::Var(0)));
    }

    #[test]
    fn unit_typed_terms_normalize_to_unit() {
        let ctx = TypingContext::from_types(vec![SimpleType::Unit]);
        assert_eq!(normalize(&ctx, &Term::Var(0)).unwrap(), Term::Unit);
        let t = Term::proj(Term::Tuple(vec![Term::Unit, Term::Var(0)]), 2);
        assert_eq!(normalize(&ctx, &t).unwrap(), Term::Unit);
    }

    #[test]
    fn eta_expansion_of_variables() {
        let ctx = TypingContext::from_types(vec![oo()]);
        let n = normalize(&ctx, &Term::Var(0)).unwrap();
        assert_eq!(n, Term::lam(o(), Term::app(Term::Var(1), Term::Var(0))));

        let pair = SimpleType::product(vec![o(), oo()]);
        let ctx = TypingContext::from_types(vec![pair]);
        let n = normalize(&ctx, &Term::Var(0)).unwrap();
        let expected = Term::Tuple(vec![
            Term::proj(Term::Var(0), 1),
            Term::lam(o(), Term::app(Term::proj(Term::Var(1), 2), Term::Var(0))),
        ]);
        assert_eq!(n, expected);
    }

    #[test]
    fn budget_is_enforced() {
        // (λf. f (f (f x))) (λy. y) needs several β-steps
        let ctx = TypingContext::from_types(vec![o()]);
        let body = Term::app(
            Term::Var(0),
            Term::app(Term::Var(0), Term::app(Term::Var(0), Term::Var(1))),
        );
        let t = Term::app(Term::lam(oo(), body), Term::lam(o(), Term::Var(0)));
        assert!(matches!(
            normalize_with_budget(&ctx, &t, 2),
            Err(StlcError::GuardExceeded { .. })
        ));
        assert_eq!(normalize_with_budget(&ctx, &t, 100).unwrap(), Term::Var(0));
    }

    #[test]
    fn ill_typed_terms_are_refused() {
        let t = Term::lam(o(), Term::app(Term::Var(0), Term::Var(0)));
        assert!(normalize(&TypingContext::new(), &t).is_err());
    }

    mod generated {
        use super::*;
        use crate::stlc::alpha_eq;
        use crate::stlc::testgen::typed_term;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn generated_terms_have_their_type((ctx, t, ty) in typed_term()) {
                prop_assert_eq!(typecheck(&ctx, &t).unwrap(), ty);
            }

            #[test]
            fn normal_forms_keep_the_type((ctx, t, ty) in typed_term()) {
                let n = normalize(&ctx, &t).unwrap();
                prop_assert_eq!(typecheck(&ctx, &n).unwrap(), ty);
                prop_assert!(beta_eta_eq(&ctx, &t, &n).unwrap());
            }

            #[test]
            fn normalization_is_idempotent((ctx, t, _ty) in typed_term()) {
                let n = normalize(&ctx, &t).unwrap();
                prop_assert!(alpha_eq(&normalize(&ctx, &n).unwrap(), &n));
            }

            #[test]
            fn one_step_reducts_share_the_normal_form((ctx, t, ty) in typed_term()) {
                let n = normalize(&ctx, &t).unwrap();
                for r in t.reducts() {
                    prop_assert_eq!(typecheck(&ctx, &r).unwrap(), ty.clone());
                    prop_assert!(alpha_eq(&normalize(&ctx, &r).unwrap(), &n));
                }
            }
        }
    }
}
