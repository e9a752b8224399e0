use crate::clone::{enumerate_morphisms, Elem, FiniteClone, FreeMorphism, RankedAlphabet, Tree};
use crate::finsem::{interp_closed, interp_type, Fin, SemDomain, SemError, SemFn, SemValue};
use crate::stlc::SimpleType;

use super::{alphabet_type, ChurchContext, ChurchError};

/// The curried form in `⟦oᵏ ⇒ o⟧_Q` of a `k`-ary table on `q` states.
pub fn curry_table(q: usize, k: usize, table: &[u32], guard: u64) -> Result<SemValue, ChurchError> {
    if q.checked_pow(k as u32) != Some(table.len()) {
        return Err(ChurchError::ArityMismatch(format!(
            "table of {} entries for arity {} on {} states",
            table.len(),
            k,
            q
        )));
    }
    if let Some(v) = table.iter().find(|&&v| v as usize >= q) {
        return Err(ChurchError::ArityMismatch(format!(
            "table entry {} outside {} states",
            v, q
        )));
    }
    let base = interp_type(&SimpleType::Base, Fin(q), guard);
    let doms: Vec<SemDomain> = (0..k)
        .map(|j| interp_type(&SimpleType::base_arrows(j, SimpleType::Base), Fin(q), guard))
        .collect();
    Ok(curry_rec(q, k, table, &base, &doms))
}

fn curry_rec(q: usize, k: usize, table: &[u32], base: &SemDomain, doms: &[SemDomain]) -> SemValue {
    if k == 0 {
        return SemValue::Base(table[0] as usize);
    }
    let stride = table.len() / q;
    let values = (0..q)
        .map(|x| curry_rec(q, k - 1, &table[x * stride..(x + 1) * stride], base, doms))
        .collect();
    SemValue::Func(SemFn::table(base.clone(), doms[k - 1].clone(), values))
}

/// The table of a curried `k`-ary function, first argument most significant.
pub fn uncurry_value(q: usize, k: usize, v: &SemValue) -> Result<Vec<u32>, ChurchError> {
    let rows = q
        .checked_pow(k as u32)
        .ok_or_else(|| ChurchError::ArityMismatch(format!("{}^{} rows", q, k)))?;
    let mut out = Vec::with_capacity(rows);
    let mut args = vec![SemValue::Base(0); k];
    for r in 0..rows {
        let mut rest = r;
        for a in args.iter_mut().rev() {
            *a = SemValue::Base(rest % q);
            rest /= q;
        }
        let y = v.apply_all(&args)?;
        let b = y
            .as_base()
            .ok_or_else(|| SemError::Mismatch(format!("{} is not a state", y)))?;
        out.push(b as u32);
    }
    Ok(out)
}

/// `Clone(𝔽Σ, Endo(Q)) ≅ ⟦Σ⟧_Q`: a morphism is its tuple of letter tables.
#[derive(Debug, Clone)]
pub struct SubstitutionBijection {
    alpha: RankedAlphabet,
    q: usize,
    sigma: SemDomain,
    endo: FiniteClone,
}

impl SubstitutionBijection {
    pub fn new(alpha: &RankedAlphabet, q: usize, guard: u64) -> SubstitutionBijection {
        SubstitutionBijection {
            alpha: alpha.clone(),
            q,
            sigma: interp_type(&alphabet_type(alpha), Fin(q), guard),
            endo: FiniteClone::endo_with_guard(q, guard),
        }
    }

    /// `⟦Σ⟧_Q`.
    pub fn sigma_domain(&self) -> &SemDomain {
        &self.sigma
    }

    pub fn endo(&self) -> &FiniteClone {
        &self.endo
    }

    pub fn to_semantic(&self, p: &FreeMorphism) -> Result<SemValue, ChurchError> {
        let comps = self
            .alpha
            .letters()
            .zip(p.letters())
            .map(|((_, k), e)| {
                let t = e.as_table().ok_or_else(|| {
                    ChurchError::ArityMismatch(format!("letter image {} is not a table", e))
                })?;
                curry_table(self.q, k, t, self.sigma.guard())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SemValue::Tuple(comps.into()))
    }

    pub fn from_semantic(&self, v: &SemValue) -> Result<FreeMorphism, ChurchError> {
        let letters = self
            .alpha
            .letters()
            .map(|(j, k)| Ok(Elem::table(uncurry_value(self.q, k, v.component(j - 1)?)?)))
            .collect::<Result<Vec<_>, ChurchError>>()?;
        Ok(FreeMorphism::new(&self.alpha, &self.endo, letters)?)
    }

    /// Canonical index of `p` in `⟦Σ⟧_Q`.
    pub fn index(&self, p: &FreeMorphism) -> Result<u128, ChurchError> {
        Ok(self.sigma.index_of(&self.to_semantic(p)?)?)
    }

    /// Every morphism, in the order of the morphism enumeration.
    pub fn morphisms(&self) -> Result<Vec<FreeMorphism>, ChurchError> {
        Ok(enumerate_morphisms(&self.alpha, &self.endo)?)
    }

    /// The table of `⟦encode t⟧(σ_p)` on `n` arguments.
    pub fn church_table(
        &self,
        n: usize,
        t: &Tree,
        p: &FreeMorphism,
    ) -> Result<Vec<u32>, ChurchError> {
        let m = ChurchContext::new(&self.alpha, n).encode(t)?;
        let v = interp_closed(&m, Fin(self.q), self.sigma.guard())?;
        let applied = v.apply(&self.to_semantic(p)?)?;
        uncurry_value(self.q, n, &applied)
    }

    /// The table of `p(t)` computed in `Endo(Q)`.
    pub fn clone_table(
        &self,
        n: usize,
        t: &Tree,
        p: &FreeMorphism,
    ) -> Result<Vec<u32>, ChurchError> {
        let e = p.eval(n, t)?;
        e.as_table()
            .map(|t| t.to_vec())
            .ok_or_else(|| ChurchError::ArityMismatch(format!("{} is not a table", e)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::{parse_tree, TreeEnumerator};
    use crate::DEFAULT_GUARD;

    #[test]
    fn curry_round_trip() {
        for q in 1usize..=3 {
            for k in 0..=2 {
                let rows = q.pow(k as u32);
                let total = (q as u64).pow(rows as u32).min(500);
                for idx in 0..total {
                    let mut t = vec![0u32; rows];
                    let mut rest = idx as usize;
                    for c in t.iter_mut().rev() {
                        *c = (rest % q) as u32;
                        rest /= q;
                    }
                    let v = curry_table(q, k, &t, DEFAULT_GUARD).unwrap();
                    assert_eq!(uncurry_value(q, k, &v).unwrap(), t);
                    let dom = interp_type(
                        &SimpleType::base_arrows(k, SimpleType::Base),
                        Fin(q),
                        DEFAULT_GUARD,
                    );
                    assert_eq!(dom.index_of(&v).unwrap(), idx as u128);
                }
            }
        }
    }

    #[test]
    fn large_bases_stay_intensional() {
        let t: Vec<u32> = (0..27).map(|i| (i * 7 % 27) as u32).collect();
        let v = curry_table(27, 1, &t, DEFAULT_GUARD).unwrap();
        assert_eq!(uncurry_value(27, 1, &v).unwrap(), t);
    }

    #[test]
    fn bad_tables_rejected() {
        assert!(curry_table(2, 1, &[0, 1, 0], DEFAULT_GUARD).is_err());
        assert!(curry_table(2, 1, &[0, 2], DEFAULT_GUARD).is_err());
    }

    #[test]
    fn indices_follow_morphism_order() {
        for alpha in [
            RankedAlphabet::new(vec![0, 1]),
            RankedAlphabet::new(vec![2]),
            RankedAlphabet::new(vec![1, 1]),
        ] {
            let b = SubstitutionBijection::new(&alpha, 2, DEFAULT_GUARD);
            let ms = b.morphisms().unwrap();
            assert_eq!(ms.len() as u128, b.sigma_domain().cardinality().unwrap());
            for (i, p) in ms.iter().enumerate() {
                assert_eq!(b.index(p).unwrap(), i as u128);
                let back = b.from_semantic(&b.to_semantic(p).unwrap()).unwrap();
                assert_eq!(back.letters(), p.letters());
            }
        }
    }

    #[test]
    fn semantic_fold_agrees_with_evaluation() {
        let alpha = RankedAlphabet::new(vec![0, 2]);
        let b = SubstitutionBijection::new(&alpha, 2, DEFAULT_GUARD);
        let trees = TreeEnumerator::new(&alpha, 2).up_to(4);
        for p in b.morphisms().unwrap() {
            for t in &trees {
                assert_eq!(
                    b.church_table(2, t, &p).unwrap(),
                    b.clone_table(2, t, &p).unwrap(),
                    "{}",
                    t
                );
            }
        }
    }

    #[test]
    fn xor_example() {
        // a1 = 1, a2 = xor: a2 (a2 x1 a1) x1 is constantly 1
        let alpha = RankedAlphabet::new(vec![0, 2]);
        let b = SubstitutionBijection::new(&alpha, 2, DEFAULT_GUARD);
        let p = FreeMorphism::new(
            &alpha,
            b.endo(),
            vec![Elem::table(vec![1]), Elem::table(vec![0, 1, 1, 0])],
        )
        .unwrap();
        let t = parse_tree("(a2 (a2 x1 a1) x1)").unwrap();
        assert_eq!(b.church_table(1, &t, &p).unwrap(), vec![1, 1]);
    }
}
