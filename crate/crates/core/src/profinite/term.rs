use rayon::prelude::*;

use crate::church::{curry_table, uncurry_value, ChurchContext, SubstitutionBijection};
use crate::clone::{appvar, cay_tabulated, Elem, RankedAlphabet, Tree, TreeEnumerator};
use crate::finsem::{interp_closed, interp_type, sem_equal_in, Fin, SemDomain, SemFn, SemValue};
use crate::stlc::Term;

use super::family::{Definability, NaturalFamily};
use super::parametric::ParametricFamily;
use super::roster::{CloneRoster, Recipe};
use super::ProfiniteError;

/// A profinite term seen through its components `θ_Q ∈ ⟦Σ ⇒ oⁿ ⇒ o⟧_Q` at
/// the roster's `Endo` sizes, optionally with a rule valid at every `Q`.
#[derive(Clone, Debug)]
pub struct ProfiniteTermApprox {
    pub alpha: RankedAlphabet,
    pub n: usize,
    pub components: Vec<(usize, SemValue)>,
    pub rule: Option<ParametricFamily>,
    pub guard: u64,
}

impl ProfiniteTermApprox {
    /// Components `⟦M⟧_Q` of a closed Church-typed term, with the term as rule.
    pub fn from_term(
        alpha: &RankedAlphabet,
        n: usize,
        m: &Term,
        sizes: &[usize],
        guard: u64,
    ) -> Result<Self, ProfiniteError> {
        let rho = ParametricFamily::from_term(m, sizes.to_vec())?;
        let cc = ChurchContext::new(alpha, n);
        if rho.ty != cc.church_type() {
            return Err(ProfiniteError::Mismatch(format!(
                "term of type {}, expected {}",
                rho.ty,
                cc.church_type()
            )));
        }
        Self::from_parametric(alpha, n, rho, guard)
    }

    pub fn from_parametric(
        alpha: &RankedAlphabet,
        n: usize,
        rho: ParametricFamily,
        guard: u64,
    ) -> Result<Self, ProfiniteError> {
        let components = rho
            .roster
            .iter()
            .map(|&q| Ok((q, rho.at(q, guard)?)))
            .collect::<Result<_, ProfiniteError>>()?;
        Ok(ProfiniteTermApprox {
            alpha: alpha.clone(),
            n,
            components,
            rule: Some(rho),
            guard,
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(|(q, _)| *q).collect()
    }

    pub fn component(&self, q: usize) -> Option<&SemValue> {
        self.components
            .iter()
            .find(|(s, _)| *s == q)
            .map(|(_, v)| v)
    }

    fn domain(&self, q: usize) -> SemDomain {
        interp_type(
            &ChurchContext::new(&self.alpha, self.n).church_type(),
            Fin(q),
            self.guard,
        )
    }

    /// Componentwise extensional equality on the shared sizes.
    pub fn same_components(&self, other: &ProfiniteTermApprox) -> Result<bool, ProfiniteError> {
        if self.sizes() != other.sizes() || self.n != other.n || self.alpha != other.alpha {
            return Ok(false);
        }
        for ((q, v), (_, w)) in self.components.iter().zip(&other.components) {
            if !sem_equal_in(&self.domain(*q), v, w)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn matches_tree(&self, t: &Tree) -> Result<bool, ProfiniteError> {
        let m = ChurchContext::new(&self.alpha, self.n).encode(t)?;
        for (q, v) in &self.components {
            let dom = self.domain(*q);
            if !sem_equal_in(&dom, &interp_closed(&m, Fin(*q), self.guard)?, v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The least tree of size `≤ size_bound` whose encoding has these components.
    pub fn witness_search(&self, size_bound: usize) -> Result<Definability, ProfiniteError> {
        let mut en = TreeEnumerator::new(&self.alpha, self.n);
        for s in 1..=size_bound {
            let found = en
                .of_size(s)
                .par_iter()
                .map(|t| self.matches_tree(t).map(|ok| ok.then(|| t.clone())))
                .find_map_first(|x| x.transpose())
                .transpose()?;
            if let Some(t) = found {
                return Ok(Definability::Defined(t));
            }
        }
        Ok(Definability::Inconclusive(size_bound))
    }

    /// Attaches `⟦encode t⟧` as rule for the least matching tree `t`.
    pub fn with_witness_rule(mut self, size_bound: usize) -> Result<Self, ProfiniteError> {
        match self.witness_search(size_bound)? {
            Definability::Defined(t) => {
                self.rule = Some(ParametricFamily::from_tree(
                    &self.alpha,
                    self.n,
                    &t,
                    self.sizes(),
                )?);
                Ok(self)
            }
            Definability::Inconclusive(b) => Err(ProfiniteError::NeedsRule(format!(
                "no tree of size at most {} matches",
                b
            ))),
        }
    }

    /// `θ[θ₁, …, θ_n]` computed pointwise: `σ ↦ θ(σ)(θ₁(σ), …, θ_n(σ))`.
    pub fn kleisli(
        &self,
        args: &[ProfiniteTermApprox],
    ) -> Result<ProfiniteTermApprox, ProfiniteError> {
        if args.len() != self.n {
            return Err(ProfiniteError::Mismatch(format!(
                "{} arguments for a term over {} variables",
                args.len(),
                self.n
            )));
        }
        let m = args.first().map(|a| a.n).unwrap_or(0);
        if args
            .iter()
            .any(|a| a.n != m || a.alpha != self.alpha || a.sizes() != self.sizes())
        {
            return Err(ProfiniteError::Mismatch(
                "arguments with different shapes".into(),
            ));
        }
        let out_ty = ChurchContext::new(&self.alpha, m).church_type();
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(c, (q, theta))| {
                let q = *q;
                let dom = interp_type(&out_ty, Fin(q), self.guard);
                let (sig, cod) = dom.arrow_parts().expect("arrow type");
                let values = sig
                    .enumerate()?
                    .par_iter()
                    .map(|s| -> Result<SemValue, ProfiniteError> {
                        let f = uncurry_value(q, self.n, &theta.apply(s)?)?;
                        let gs = args
                            .iter()
                            .map(|a| Ok(uncurry_value(q, m, &a.components[c].1.apply(s)?)?))
                            .collect::<Result<Vec<_>, ProfiniteError>>()?;
                        let rows = q.pow(m as u32);
                        let table: Vec<u32> = (0..rows)
                            .map(|r| f[gs.iter().fold(0usize, |acc, g| acc * q + g[r] as usize)])
                            .collect();
                        Ok(curry_table(q, m, &table, self.guard)?)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((
                    q,
                    SemValue::Func(SemFn::table(sig.clone(), cod.clone(), values)),
                ))
            })
            .collect::<Result<_, ProfiniteError>>()?;
        Ok(ProfiniteTermApprox {
            alpha: self.alpha.clone(),
            n: m,
            components,
            rule: None,
            guard: self.guard,
        })
    }
}

/// Reads off `θ_Q` from the values of `u` on `Endo(Q)` through the
/// substitution bijection.
pub fn restrict(u: &NaturalFamily, guard: u64) -> Result<ProfiniteTermApprox, ProfiniteError> {
    let sizes = u.roster.endo_sizes();
    if sizes.is_empty() {
        return Err(ProfiniteError::MissingRosterMember(
            "the roster has no Endo(Q) member".into(),
        ));
    }
    let ty = ChurchContext::new(&u.alpha, u.n).church_type();
    let components = sizes
        .iter()
        .map(|&q| {
            let i = u.roster.find_endo(q).expect("listed size");
            let dom = interp_type(&ty, Fin(q), guard);
            let (sig, cod) = dom.arrow_parts().expect("arrow type");
            let table = &u.tables[i];
            if sig.cardinality() != Some(table.len() as u128) {
                return Err(ProfiniteError::Mismatch(format!(
                    "{} morphisms into Endo({}), expected {:?}",
                    table.len(),
                    q,
                    sig.cardinality()
                )));
            }
            let values = table
                .iter()
                .map(|e| {
                    let t = e
                        .as_table()
                        .ok_or_else(|| ProfiniteError::Mismatch(format!("{} is not a table", e)))?;
                    Ok(curry_table(q, u.n, t, guard)?)
                })
                .collect::<Result<Vec<_>, ProfiniteError>>()?;
            Ok((
                q,
                SemValue::Func(SemFn::table(sig.clone(), cod.clone(), values)),
            ))
        })
        .collect::<Result<_, ProfiniteError>>()?;
    Ok(ProfiniteTermApprox {
        alpha: u.alpha.clone(),
        n: u.n,
        components,
        rule: None,
        guard,
    })
}

/// `u_C(p) = appvar(θ_{C_n}(cay ∘ p))` on every roster member, using the rule.
pub fn lift(
    theta: &ProfiniteTermApprox,
    roster: &CloneRoster,
) -> Result<NaturalFamily, ProfiniteError> {
    let rule = theta.rule.as_ref().ok_or_else(|| {
        ProfiniteError::NeedsRule("lifting needs a rule valid at every size".into())
    })?;
    let (alpha, n) = (&theta.alpha, theta.n);
    let mut tables = Vec::with_capacity(roster.len());
    for (i, m) in roster.members().iter().enumerate() {
        let c = &m.clone;
        let endo = match m.recipe {
            Recipe::Endo(q) => theta.component(q).map(|v| (q, v)),
            _ => None,
        };
        let tab = if let Some((q, v)) = endo {
            let b = SubstitutionBijection::new(alpha, q, theta.guard);
            roster
                .morphisms(i, alpha)?
                .par_iter()
                .map(|p| {
                    Ok(Elem::table(uncurry_value(
                        q,
                        n,
                        &v.apply(&b.to_semantic(p)?)?,
                    )?))
                })
                .collect::<Result<Vec<_>, ProfiniteError>>()?
        } else {
            let cay = cay_tabulated(c, n)?;
            let k = c.carrier(n)?.len();
            let b = SubstitutionBijection::new(alpha, k, theta.guard);
            let at_k = rule.at(k, theta.guard)?;
            roster
                .morphisms(i, alpha)?
                .par_iter()
                .map(|p| {
                    let sigma = b.to_semantic(&p.then(&cay)?)?;
                    let t = uncurry_value(k, n, &at_k.apply(&sigma)?)?;
                    Ok(appvar(c, n, &Elem::table(t))?)
                })
                .collect::<Result<Vec<_>, ProfiniteError>>()?
        };
        tables.push(tab);
    }
    Ok(NaturalFamily {
        alpha: alpha.clone(),
        n,
        roster: roster.clone(),
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::parse_tree;
    use crate::profinite::family::family_of_tree;
    use crate::DEFAULT_GUARD;

    fn a(v: &[usize]) -> RankedAlphabet {
        RankedAlphabet::new(v.to_vec())
    }

    #[test]
    fn restriction_of_a_tree_is_its_encoding() {
        let alpha = a(&[0, 1]);
        let r = CloneRoster::small();
        for t in TreeEnumerator::new(&alpha, 1).up_to(4) {
            let theta =
                restrict(&family_of_tree(&alpha, 1, &t, &r).unwrap(), DEFAULT_GUARD).unwrap();
            assert_eq!(theta.sizes(), vec![2, 3]);
            assert!(theta.matches_tree(&t).unwrap(), "{}", t);
        }
    }

    #[test]
    fn restriction_needs_an_endo() {
        let mut r = CloneRoster::new();
        r.push_action(&crate::clone::MonoidAction::flip()).unwrap();
        let u = family_of_tree(&a(&[1]), 1, &Tree::Var(1), &r).unwrap();
        assert!(matches!(
            restrict(&u, DEFAULT_GUARD),
            Err(ProfiniteError::MissingRosterMember(_))
        ));
    }

    #[test]
    fn lift_inverts_restrict() {
        let alpha = a(&[0, 1]);
        let r = CloneRoster::small();
        for t in TreeEnumerator::new(&alpha, 1).up_to(3) {
            let u = family_of_tree(&alpha, 1, &t, &r).unwrap();
            let theta = restrict(&u, DEFAULT_GUARD)
                .unwrap()
                .with_witness_rule(4)
                .unwrap();
            let back = lift(&theta, &r).unwrap();
            assert!(back.same_tables(&u).unwrap(), "{}", t);
            assert!(restrict(&back, DEFAULT_GUARD)
                .unwrap()
                .same_components(&theta)
                .unwrap());
        }
    }

    #[test]
    fn lift_needs_a_rule() {
        let alpha = a(&[1]);
        let r = CloneRoster::endos(&[2]);
        let theta = restrict(
            &family_of_tree(&alpha, 1, &Tree::Var(1), &r).unwrap(),
            DEFAULT_GUARD,
        )
        .unwrap();
        assert!(matches!(
            lift(&theta, &r),
            Err(ProfiniteError::NeedsRule(_))
        ));
    }

    #[test]
    fn kleisli_matches_grafting() {
        let alpha = a(&[0, 2]);
        let r = CloneRoster::endos(&[2]);
        let t = parse_tree("(a2 x1 x2)").unwrap();
        let s1 = parse_tree("(a2 x1 a1)").unwrap();
        let s2 = Tree::Var(1);
        let th = |t: &Tree, n| {
            restrict(&family_of_tree(&alpha, n, t, &r).unwrap(), DEFAULT_GUARD).unwrap()
        };
        let got = th(&t, 2).kleisli(&[th(&s1, 1), th(&s2, 1)]).unwrap();
        let want = th(&t.subst(&[s1.clone(), s2.clone()]), 1);
        assert!(got.same_components(&want).unwrap());
    }

    #[test]
    fn restriction_respects_substitution() {
        let alpha = a(&[0, 1]);
        let r = CloneRoster::small();
        let u = family_of_tree(&alpha, 1, &parse_tree("(a2 x1)").unwrap(), &r).unwrap();
        let v = family_of_tree(&alpha, 1, &parse_tree("(a2 (a2 a1))").unwrap(), &r).unwrap();
        let lhs = restrict(&u.substitute(std::slice::from_ref(&v)).unwrap(), DEFAULT_GUARD).unwrap();
        let rhs = restrict(&u, DEFAULT_GUARD)
            .unwrap()
            .kleisli(&[restrict(&v, DEFAULT_GUARD).unwrap()])
            .unwrap();
        assert!(lhs.same_components(&rhs).unwrap());
    }

    #[test]
    fn from_term_components() {
        let alpha = a(&[1]);
        let cc = ChurchContext::new(&alpha, 1);
        let t = parse_tree("(a1 (a1 x1))").unwrap();
        let theta = ProfiniteTermApprox::from_term(
            &alpha,
            1,
            &cc.encode(&t).unwrap(),
            &[2, 3],
            DEFAULT_GUARD,
        )
        .unwrap();
        assert!(theta.matches_tree(&t).unwrap());
        assert_eq!(theta.witness_search(3).unwrap(), Definability::Defined(t));
    }
}
