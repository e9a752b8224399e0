use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;

use crate::church::{alphabet_type, curry_table, generator, ChurchContext};
use crate::clone::{RankedAlphabet, TreeEnumerator};
use crate::finsem::{
    all_relations, interp_closed, interp_type, sem_equal_in, Fin, RelationChecker, SemDomain,
    SemError, SemFn, SemValue,
};
use crate::stlc::{typecheck, SimpleType, Term, TypingContext};

use super::family::Definability;
use super::ProfiniteError;

type RuleFn = dyn Fn(Fin, u64) -> Result<SemValue, SemError> + Send + Sync;

/// A family `ρ_Q ∈ ⟦A⟧_Q` given by a rule evaluable at any finite `Q`,
/// with the base sizes it is checked on.
#[derive(Clone)]
pub struct ParametricFamily {
    pub ty: SimpleType,
    pub label: String,
    pub roster: Vec<usize>,
    rule: Arc<RuleFn>,
}

impl std::fmt::Debug for ParametricFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ParametricFamily({} : {} on {:?})",
            self.label, self.ty, self.roster
        )
    }
}

impl ParametricFamily {
    pub fn custom(
        ty: SimpleType,
        label: impl Into<String>,
        roster: Vec<usize>,
        rule: impl Fn(Fin, u64) -> Result<SemValue, SemError> + Send + Sync + 'static,
    ) -> ParametricFamily {
        ParametricFamily {
            ty,
            label: label.into(),
            roster,
            rule: Arc::new(rule),
        }
    }

    /// `ρ_Q = ⟦M⟧_Q` for a closed term.
    pub fn from_term(m: &Term, roster: Vec<usize>) -> Result<ParametricFamily, ProfiniteError> {
        let ty = typecheck(&TypingContext::new(), m)?;
        let term = m.clone();
        Ok(Self::custom(ty, m.to_string(), roster, move |q, guard| {
            interp_closed(&term, q, guard)
        }))
    }

    pub fn from_tree(
        alpha: &RankedAlphabet,
        n: usize,
        t: &crate::clone::Tree,
        roster: Vec<usize>,
    ) -> Result<ParametricFamily, ProfiniteError> {
        let m = ChurchContext::new(alpha, n).encode(t)?;
        let mut f = Self::from_term(&m, roster)?;
        f.label = t.to_string();
        Ok(f)
    }

    pub fn at(&self, q: usize, guard: u64) -> Result<SemValue, ProfiniteError> {
        Ok((self.rule)(Fin(q), guard)?)
    }

    /// The component families `ρʲ = λσ. (ρ σ).j` of a family of type `Σ ⇒ Γ`.
    pub fn components(
        &self,
        alpha: &RankedAlphabet,
        gamma: &RankedAlphabet,
    ) -> Result<Vec<ParametricFamily>, ProfiniteError> {
        let expected = SimpleType::arrow(alphabet_type(alpha), alphabet_type(gamma));
        if self.ty != expected {
            return Err(ProfiniteError::Mismatch(format!(
                "family of type {}, expected {}",
                self.ty, expected
            )));
        }
        Ok(gamma
            .letters()
            .map(|(j, k)| {
                let parent = self.clone();
                let sig = alphabet_type(alpha);
                let cod = SimpleType::base_arrows(k, SimpleType::Base);
                let ty = SimpleType::arrow(sig.clone(), cod.clone());
                Self::custom(
                    ty,
                    format!("{}.{}", self.label, j),
                    self.roster.clone(),
                    move |q, guard| {
                        let v = (parent.rule)(q, guard)?;
                        let dom = interp_type(&sig, q, guard);
                        let cd = interp_type(&cod, q, guard);
                        Ok(SemValue::Func(SemFn::rule(dom, cd, move |s| {
                            let out = v.apply(s)?;
                            Ok(out.component(j - 1)?.clone())
                        })))
                    },
                )
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RelationPairCheck {
    pub left: usize,
    pub right: usize,
    pub relations: u64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ParametricityReport {
    pub family: String,
    pub passed: bool,
    pub pairs: Vec<RelationPairCheck>,
}

/// `(ρ_Q, ρ_{Q'}) ∈ ⟦A⟧_R` for every relation `R` between roster sizes,
/// including unary predicates from the one-element set.
pub fn parametricity_check(
    rho: &ParametricFamily,
    guard: u64,
) -> Result<ParametricityReport, ProfiniteError> {
    let sizes: BTreeSet<usize> = rho
        .roster
        .iter()
        .copied()
        .chain(std::iter::once(1))
        .collect();
    let values: Vec<(usize, SemValue)> = sizes
        .iter()
        .map(|&q| Ok((q, rho.at(q, guard)?)))
        .collect::<Result<_, ProfiniteError>>()?;
    let mut pairs = Vec::new();
    for (q, v) in &values {
        for (q2, w) in &values {
            let rels = all_relations(Fin(*q), Fin(*q2))?;
            let failure = rels
                .par_iter()
                .map(|rel| -> Result<Option<String>, SemError> {
                    let mut ck = RelationChecker::new(rel.clone(), guard);
                    Ok((!ck.member(&rho.ty, v, w)?).then(|| rel.to_string()))
                })
                .find_map_first(|x| match x {
                    Ok(None) => None,
                    Ok(Some(w)) => Some(Ok(w)),
                    Err(e) => Some(Err(e)),
                })
                .transpose()?;
            pairs.push(RelationPairCheck {
                left: *q,
                right: *q2,
                relations: rels.len() as u64,
                failure,
            });
        }
    }
    let passed = pairs.iter().all(|p| p.failure.is_none());
    Ok(ParametricityReport {
        family: rho.label.clone(),
        passed,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct FixedPointReport {
    pub family: String,
    pub q: usize,
    /// `|⟦Σ ⇒ o⟧_Q|`.
    pub q_star: u64,
    pub passed: bool,
    pub witness: Option<String>,
}

/// `⟦g_i⟧_Q` as an element of `⟦o^{n_i} ⇒ o⟧_{Q*}` with `Q* = ⟦Σ ⇒ o⟧_Q`.
fn generator_at_star(
    alpha: &RankedAlphabet,
    i: usize,
    star: &SemDomain,
    q: usize,
    guard: u64,
) -> Result<SemValue, ProfiniteError> {
    let k = alpha.arity(i).unwrap_or(0);
    let qs = star
        .cardinality()
        .filter(|&c| c <= guard as u128)
        .ok_or_else(|| {
            ProfiniteError::GuardExceeded(format!(
                "Q* = ⟦{}⟧ over {} has more than {} elements",
                star.ty(),
                q,
                guard
            ))
        })? as usize;
    let rows = qs
        .checked_pow(k as u32)
        .filter(|&r| r as u64 <= guard)
        .ok_or_else(|| {
            ProfiniteError::GuardExceeded(format!("table of g{} over Q* has {}^{} rows", i, qs, k))
        })?;
    let g = interp_closed(&generator(alpha, i)?, Fin(q), guard)?;
    let elems = star.enumerate()?;
    let table = (0..rows)
        .into_par_iter()
        .map(|r| -> Result<u32, ProfiniteError> {
            let mut rest = r;
            let mut args = vec![SemValue::Unit; k];
            for a in args.iter_mut().rev() {
                *a = elems[rest % qs].clone();
                rest /= qs;
            }
            let y = g.apply(&SemValue::Tuple(args.into()))?;
            Ok(star.index_of(&y)? as u32)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(curry_table(qs, k, &table, guard)?)
}

/// The fixed-point equation `ρ_Q = ρ_{Q*}(⟦g₁⟧_Q, …, ⟦g_l⟧_Q)` for `ρ` of type `Σ ⇒ o`.
pub fn fixed_point_check(
    rho: &ParametricFamily,
    alpha: &RankedAlphabet,
    q: usize,
    guard: u64,
) -> Result<FixedPointReport, ProfiniteError> {
    let cc = ChurchContext::new(alpha, 0);
    if rho.ty != cc.church_type() {
        return Err(ProfiniteError::Mismatch(format!(
            "family of type {}, expected {}",
            rho.ty,
            cc.church_type()
        )));
    }
    let star = interp_type(&cc.church_type(), Fin(q), guard);
    let gens = alpha
        .letters()
        .map(|(i, _)| generator_at_star(alpha, i, &star, q, guard))
        .collect::<Result<Vec<_>, _>>()?;
    let qs = star.cardinality().unwrap_or(0) as usize;
    let at_star = rho.at(qs, guard)?;
    let out = at_star.apply(&SemValue::Tuple(gens.into()))?;
    let idx = out
        .as_base()
        .ok_or_else(|| ProfiniteError::Mismatch(format!("{} is not an element of Q*", out)))?;
    let rhs = star.element_at(idx as u128)?;
    let lhs = rho.at(q, guard)?;
    let passed = sem_equal_in(&star, &lhs, &rhs)?;
    let witness = if passed {
        None
    } else {
        let sigma = interp_type(&alphabet_type(alpha), Fin(q), guard);
        let mut w = None;
        for s in sigma.enumerate()?.iter() {
            let (a, b) = (lhs.apply(s)?, rhs.apply(s)?);
            if a.as_base() != b.as_base() {
                w = Some(format!(
                    "sigma = {}: rho_Q gives {}, right-hand side gives {}",
                    s, a, b
                ));
                break;
            }
        }
        w
    };
    Ok(FixedPointReport {
        family: rho.label.clone(),
        q,
        q_star: qs as u64,
        passed,
        witness,
    })
}

/// The least tree `t` of size `≤ size_bound` with `⟦encode t⟧_Q = ρ_Q` for
/// every roster size.
pub fn parametric_to_tree(
    rho: &ParametricFamily,
    alpha: &RankedAlphabet,
    n: usize,
    size_bound: usize,
    guard: u64,
) -> Result<Definability, ProfiniteError> {
    let cc = ChurchContext::new(alpha, n);
    if rho.ty != cc.church_type() {
        return Err(ProfiniteError::Mismatch(format!(
            "family of type {}, expected {}",
            rho.ty,
            cc.church_type()
        )));
    }
    let targets: Vec<(SemDomain, SemValue)> = rho
        .roster
        .iter()
        .map(|&q| {
            let dom = interp_type(&rho.ty, Fin(q), guard);
            let v = rho.at(q, guard)?.tabulate(&dom)?;
            Ok((dom, v))
        })
        .collect::<Result<_, ProfiniteError>>()?;
    let mut en = TreeEnumerator::new(alpha, n);
    for s in 1..=size_bound {
        let found = en
            .of_size(s)
            .par_iter()
            .map(|t| -> Result<Option<crate::clone::Tree>, ProfiniteError> {
                let m = cc.encode(t)?;
                for (dom, v) in &targets {
                    let w = interp_closed(&m, dom.base(), guard)?;
                    if !sem_equal_in(dom, &w, v)? {
                        return Ok(None);
                    }
                }
                Ok(Some(t.clone()))
            })
            .find_map_first(|x| match x {
                Ok(None) => None,
                Ok(Some(t)) => Some(Ok(t)),
                Err(e) => Some(Err(e)),
            })
            .transpose()?;
        if let Some(t) = found {
            return Ok(Definability::Defined(t));
        }
    }
    Ok(Definability::Inconclusive(size_bound))
}

/// Splits a family of type `Σ ⇒ Γ` into its components and searches each.
pub fn parametric_to_trees(
    rho: &ParametricFamily,
    alpha: &RankedAlphabet,
    gamma: &RankedAlphabet,
    size_bound: usize,
    guard: u64,
) -> Result<Vec<Definability>, ProfiniteError> {
    rho.components(alpha, gamma)?
        .iter()
        .zip(gamma.arities())
        .map(|(c, &k)| parametric_to_tree(c, alpha, k, size_bound, guard))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::{parse_tree, Tree};
    use crate::stlc::parse_term;
    use crate::DEFAULT_GUARD;

    fn a(v: &[usize]) -> RankedAlphabet {
        RankedAlphabet::new(v.to_vec())
    }

    #[test]
    fn term_families_are_parametric() {
        let alpha = a(&[0, 1]);
        for t in TreeEnumerator::new(&alpha, 1).up_to(3) {
            let rho = ParametricFamily::from_tree(&alpha, 1, &t, vec![1, 2, 3]).unwrap();
            assert!(
                parametricity_check(&rho, DEFAULT_GUARD).unwrap().passed,
                "{}",
                t
            );
        }
    }

    #[test]
    fn mismatched_family_fails() {
        let alpha = a(&[1]);
        let one = ChurchContext::new(&alpha, 1)
            .encode(&parse_tree("(a1 x1)").unwrap())
            .unwrap();
        let two = ChurchContext::new(&alpha, 1)
            .encode(&parse_tree("(a1 (a1 x1))").unwrap())
            .unwrap();
        let ty = ChurchContext::new(&alpha, 1).church_type();
        let rho = ParametricFamily::custom(ty, "mixed", vec![2, 3], move |q, g| {
            interp_closed(if q.0 == 3 { &two } else { &one }, q, g)
        });
        let rep = parametricity_check(&rho, DEFAULT_GUARD).unwrap();
        assert!(!rep.passed);
        assert!(rep
            .pairs
            .iter()
            .any(|p| p.left == 2 && p.right == 3 && p.failure.is_some()));
    }

    #[test]
    fn unit_type_always_passes() {
        let rho = ParametricFamily::custom(SimpleType::Unit, "unit", vec![2, 3], |_, _| {
            Ok(SemValue::Unit)
        });
        assert!(parametricity_check(&rho, DEFAULT_GUARD).unwrap().passed);
    }

    #[test]
    fn fixed_point_for_a_a_e() {
        let alpha = a(&[0, 1]);
        let rho =
            ParametricFamily::from_tree(&alpha, 0, &parse_tree("(a2 (a2 a1))").unwrap(), vec![2])
                .unwrap();
        let rep = fixed_point_check(&rho, &alpha, 2, DEFAULT_GUARD).unwrap();
        assert_eq!(rep.q_star, 256);
        assert!(rep.passed);
        let rho =
            ParametricFamily::from_tree(&alpha, 0, &parse_tree("a1").unwrap(), vec![2]).unwrap();
        assert!(
            fixed_point_check(&rho, &alpha, 2, DEFAULT_GUARD)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn generators_by_brute_force() {
        // ⟦g₁⟧ = (q, f) ↦ q and ⟦g₂⟧(t) = (q, f) ↦ f(t(q, f)) at |Q| = 2
        let alpha = a(&[0, 1]);
        let star = interp_type(
            &ChurchContext::new(&alpha, 0).church_type(),
            Fin(2),
            DEFAULT_GUARD,
        );
        let sigma = interp_type(&alphabet_type(&alpha), Fin(2), DEFAULT_GUARD);
        let g1 = generator_at_star(&alpha, 1, &star, 2, DEFAULT_GUARD).unwrap();
        let g2 = generator_at_star(&alpha, 2, &star, 2, DEFAULT_GUARD).unwrap();
        let e1 = star.element_at(g1.as_base().unwrap() as u128).unwrap();
        for s in sigma.enumerate().unwrap().iter() {
            assert_eq!(
                e1.apply(s).unwrap().as_base(),
                s.component(0).unwrap().as_base()
            );
        }
        for x in 0..256u128 {
            let t = star.element_at(x).unwrap();
            let y = star
                .element_at(
                    g2.apply(&SemValue::Base(x as usize))
                        .unwrap()
                        .as_base()
                        .unwrap() as u128,
                )
                .unwrap();
            for s in sigma.enumerate().unwrap().iter() {
                let inner = t.apply(s).unwrap();
                let expect = s.component(1).unwrap().apply(&inner).unwrap();
                assert_eq!(y.apply(s).unwrap().as_base(), expect.as_base());
            }
        }
    }

    #[test]
    fn non_parametric_family_fails_g() {
        let alpha = a(&[0, 1]);
        let cc = ChurchContext::new(&alpha, 0);
        let good = cc.encode(&parse_tree("(a2 (a2 a1))").unwrap()).unwrap();
        let other = cc.encode(&parse_tree("(a2 a1)").unwrap()).unwrap();
        let rho = ParametricFamily::custom(cc.church_type(), "switch", vec![2], move |q, g| {
            interp_closed(if q.0 == 2 { &good } else { &other }, q, g)
        });
        let rep = fixed_point_check(&rho, &alpha, 2, DEFAULT_GUARD).unwrap();
        assert!(!rep.passed);
        assert!(rep.witness.is_some());
    }

    #[test]
    fn search_recovers_trees() {
        let alpha = a(&[1, 1]);
        let t = parse_tree("(a2 (a1 x1))").unwrap();
        let rho = ParametricFamily::from_tree(&alpha, 1, &t, vec![2, 3]).unwrap();
        assert_eq!(
            parametric_to_tree(&rho, &alpha, 1, 4, DEFAULT_GUARD).unwrap(),
            Definability::Defined(t)
        );
        let rho = ParametricFamily::from_tree(&alpha, 1, &Tree::Var(1), vec![2, 3]).unwrap();
        assert_eq!(
            parametric_to_tree(&rho, &alpha, 1, 4, DEFAULT_GUARD).unwrap(),
            Definability::Defined(Tree::Var(1))
        );
    }

    #[test]
    fn product_codomain_splits() {
        // Σ ⇒ Γ with Γ = [1]: λσ. ⟨λx. σ.2 (σ.1 x)⟩
        let alpha = a(&[1, 1]);
        let m = parse_term("\\s:((o -> o) * (o -> o)). <\\x:o. s.2 (s.1 x)>").unwrap();
        let rho = ParametricFamily::from_term(&m, vec![2, 3]).unwrap();
        let got = parametric_to_trees(&rho, &alpha, &a(&[1]), 4, DEFAULT_GUARD).unwrap();
        assert_eq!(
            got,
            vec![Definability::Defined(parse_tree("(a2 (a1 x1))").unwrap())]
        );
    }
}
