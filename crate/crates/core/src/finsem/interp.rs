use std::sync::Arc;

use super::domain::{Fin, SemDomain};
use super::value::{SemFn, SemValue};
use super::SemError;
use crate::stlc::{typecheck, SimpleType, StlcError, Term, TypingContext};

/// A term annotated with the semantic domains of its binders, ready to run
/// over one fixed base set.
enum Code {
    Var(usize),
    Lam {
        dom: SemDomain,
        cod: SemDomain,
        body: Arc<Code>,
    },
    App(Box<Code>, Box<Code>),
    Tuple(Vec<Code>),
    Proj(Box<Code>, usize),
    Unit,
}

#[derive(Clone)]
struct Env(Option<Arc<(SemValue, Env)>>);

impl Env {
    fn get(&self, mut k: usize) -> Option<&SemValue> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if k == 0 {
                return Some(&node.0);
            }
            k -= 1;
            cur = &node.1;
        }
        None
    }

    fn push(&self, v: SemValue) -> Env {
        Env(Some(Arc::new((v, self.clone()))))
    }
}

fn compile(
    ctx: &mut Vec<SimpleType>,
    t: &Term,
    base: Fin,
    guard: u64,
) -> Result<(Code, SimpleType), SemError> {
    Ok(match t {
        Term::Var(k) => {
            let ty = ctx
                .len()
                .checked_sub(k + 1)
                .map(|p| ctx[p].clone())
                .ok_or(SemError::Type(StlcError::Scope {
                    index: *k,
                    context_len: ctx.len(),
                }))?;
            (Code::Var(*k), ty)
        }
        Term::Unit => (Code::Unit, SimpleType::Unit),
        Term::Lam(dom_ty, body) => {
            ctx.push(dom_ty.clone());
            let r = compile(ctx, body, base, guard);
            ctx.pop();
            let (body, cod_ty) = r?;
            let dom = SemDomain::new(dom_ty, base, guard);
            let cod = SemDomain::new(&cod_ty, base, guard);
            (
                Code::Lam {
                    dom,
                    cod,
                    body: Arc::new(body),
                },
                SimpleType::arrow(dom_ty.clone(), cod_ty),
            )
        }
        Term::App(f, a) => {
            let (fc, fty) = compile(ctx, f, base, guard)?;
            let (ac, _) = compile(ctx, a, base, guard)?;
            let cod = match fty {
                SimpleType::Arrow(_, cod) => (*cod).clone(),
                other => {
                    return Err(SemError::Type(StlcError::Type {
                        location: "application".into(),
                        expected: "an arrow type".into(),
                        found: other.to_string(),
                    }))
                }
            };
            (Code::App(Box::new(fc), Box::new(ac)), cod)
        }
        Term::Tuple(cs) => {
            let mut codes = Vec::with_capacity(cs.len());
            let mut tys = Vec::with_capacity(cs.len());
            for c in cs {
                let (cc, ct) = compile(ctx, c, base, guard)?;
                codes.push(cc);
                tys.push(ct);
            }
            (Code::Tuple(codes), SimpleType::product(tys))
        }
        Term::Proj(s, i) => {
            let (sc, sty) = compile(ctx, s, base, guard)?;
            let c = sty
                .components()
                .and_then(|cs| cs.get(i.wrapping_sub(1)))
                .cloned()
                .ok_or_else(|| {
                    SemError::Type(StlcError::Type {
                        location: "projection".into(),
                        expected: format!("a product with component {}", i),
                        found: sty.to_string(),
                    })
                })?;
            (Code::Proj(Box::new(sc), *i), c)
        }
    })
}

fn eval(code: &Arc<Code>, env: &Env) -> Result<SemValue, SemError> {
    eval_ref(code, env)
}

fn eval_ref(code: &Code, env: &Env) -> Result<SemValue, SemError> {
    match code {
        Code::Var(k) => env
            .get(*k)
            .cloned()
            .ok_or_else(|| SemError::Mismatch(format!("environment has no entry #{}", k))),
        Code::Unit => Ok(SemValue::Unit),
        Code::Lam { dom, cod, body } => {
            let body = body.clone();
            let env = env.clone();
            Ok(SemValue::Func(SemFn::rule(
                dom.clone(),
                cod.clone(),
                move |x| eval(&body, &env.push(x.clone())),
            )))
        }
        Code::App(f, a) => {
            let fv = eval_ref(f, env)?;
            let av = eval_ref(a, env)?;
            fv.apply(&av)
        }
        Code::Tuple(cs) => {
            let vs = cs
                .iter()
                .map(|c| eval_ref(c, env))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SemValue::Tuple(vs.into()))
        }
        Code::Proj(s, i) => {
            let v = eval_ref(s, env)?;
            Ok(v.component(i - 1)?.clone())
        }
    }
}

/// `⟦t⟧_Q(env)` for `ctx ⊢ t`. `env` lists values for the context entries,
/// outermost first.
pub fn interp_term(
    ctx: &TypingContext,
    t: &Term,
    base: Fin,
    env: &[SemValue],
    guard: u64,
) -> Result<SemValue, SemError> {
    typecheck(ctx, t)?;
    if env.len() != ctx.len() {
        return Err(SemError::Mismatch(format!(
            "environment has {} values for a context of {}",
            env.len(),
            ctx.len()
        )));
    }
    let mut tys = ctx.types().to_vec();
    let (code, _) = compile(&mut tys, t, base, guard)?;
    let env = env.iter().fold(Env(None), |e, v| e.push(v.clone()));
    eval_ref(&code, &env)
}

/// Denotation of a closed term.
pub fn interp_closed(t: &Term, base: Fin, guard: u64) -> Result<SemValue, SemError> {
    interp_term(&TypingContext::new(), t, base, &[], guard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsem::{interp_type, sem_equal};
    use crate::stlc::parse_term;
    use crate::DEFAULT_GUARD;

    #[test]
    fn identity_denotes_identity() {
        let id = parse_term("\\x:o. x").unwrap();
        let v = interp_closed(&id, Fin(3), DEFAULT_GUARD).unwrap();
        for q in 0..3 {
            assert_eq!(v.apply(&SemValue::Base(q)).unwrap().as_base(), Some(q));
        }
        let oo = SimpleType::arrow(SimpleType::Base, SimpleType::Base);
        let dom = interp_type(&oo, Fin(3), DEFAULT_GUARD);
        let table = dom.element_at(5).unwrap(); // [0 1 2] in base 3 = 0*9+1*3+2
        assert!(sem_equal(&oo, Fin(3), &v, &table, DEFAULT_GUARD).unwrap());
    }

    #[test]
    fn open_terms_use_the_environment() {
        let ctx = TypingContext::from_types(vec![SimpleType::Base, SimpleType::Base]);
        // #1 is the outer variable
        let v = interp_term(
            &ctx,
            &Term::Var(1),
            Fin(4),
            &[SemValue::Base(3), SemValue::Base(1)],
            DEFAULT_GUARD,
        )
        .unwrap();
        assert_eq!(v.as_base(), Some(3));
    }

    #[test]
    fn projections_and_tuples() {
        let t = parse_term("\\p:(o * o). <p.2, p.1>").unwrap();
        let v = interp_closed(&t, Fin(2), DEFAULT_GUARD).unwrap();
        let swapped = v
            .apply(&SemValue::Tuple(
                vec![SemValue::Base(0), SemValue::Base(1)].into(),
            ))
            .unwrap();
        assert_eq!(swapped.to_string(), "(1, 0)");
    }
}
