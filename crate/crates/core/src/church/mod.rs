//! Church encoding of trees over a ranked alphabet as closed terms of type
//! `Σ ⇒ oⁿ ⇒ o`, the generator terms, and the substitution bijection.

mod bijection;

pub use bijection::{curry_table, uncurry_value, SubstitutionBijection};

use crate::clone::{CloneError, RankedAlphabet, Tree};
use crate::finsem::SemError;
use crate::stlc::{normalize, typecheck, SimpleType, StlcError, Term, TypingContext};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChurchError {
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("term has type {found}, expected the Church type {expected}")]
    NotChurchTyped { expected: String, found: String },
    #[error("letter {index} outside an alphabet of {letters}")]
    IndexOutOfRange { index: usize, letters: usize },
    #[error(transparent)]
    Stlc(#[from] StlcError),
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error(transparent)]
    Clone(#[from] CloneError),
}

/// `(o^{n₁} ⇒ o) × … × (o^{n_l} ⇒ o)`.
pub fn alphabet_type(alpha: &RankedAlphabet) -> SimpleType {
    SimpleType::product(
        alpha
            .arities()
            .iter()
            .map(|&k| SimpleType::base_arrows(k, SimpleType::Base))
            .collect(),
    )
}

/// An alphabet together with a number of variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChurchContext {
    pub alpha: RankedAlphabet,
    pub n: usize,
}

impl ChurchContext {
    pub fn new(alpha: &RankedAlphabet, n: usize) -> ChurchContext {
        ChurchContext {
            alpha: alpha.clone(),
            n,
        }
    }

    pub fn sigma_type(&self) -> SimpleType {
        alphabet_type(&self.alpha)
    }

    /// `Σ ⇒ oⁿ ⇒ o`.
    pub fn church_type(&self) -> SimpleType {
        SimpleType::arrow(
            self.sigma_type(),
            SimpleType::base_arrows(self.n, SimpleType::Base),
        )
    }

    /// `λσ. λx₁…xₙ. fold(t)`; the result is already in long normal form.
    pub fn encode(&self, t: &Tree) -> Result<Term, ChurchError> {
        t.validate(&self.alpha, self.n)
            .map_err(|e| ChurchError::ArityMismatch(e.to_string()))?;
        let n = self.n;
        fn fold(t: &Tree, n: usize) -> Term {
            match t {
                Tree::Var(i) => Term::Var(n - i),
                Tree::Node(j, cs) => {
                    Term::apps(Term::proj(Term::Var(n), *j), cs.iter().map(|c| fold(c, n)))
                }
            }
        }
        let mut body = fold(t, n);
        for _ in 0..n {
            body = Term::lam(SimpleType::Base, body);
        }
        Ok(Term::lam(self.sigma_type(), body))
    }

    /// Reads a tree off the long normal form of a closed Church-typed term.
    pub fn decode(&self, m: &Term) -> Result<Tree, ChurchError> {
        let ctx = TypingContext::new();
        let found = typecheck(&ctx, m)?;
        let expected = self.church_type();
        if found != expected {
            return Err(ChurchError::NotChurchTyped {
                expected: expected.to_string(),
                found: found.to_string(),
            });
        }
        let nf = normalize(&ctx, m)?;
        let mut body = &nf;
        for _ in 0..=self.n {
            body = match body {
                Term::Lam(_, b) => b,
                other => unreachable!("long normal form of a Church term is not a λ: {}", other),
            };
        }
        Ok(self.read(body))
    }

    fn read(&self, body: &Term) -> Tree {
        let n = self.n;
        let mut args = Vec::new();
        let mut head = body;
        while let Term::App(f, a) = head {
            args.push(a.as_ref());
            head = f;
        }
        args.reverse();
        match head {
            Term::Var(k) if *k < n && args.is_empty() => Tree::Var(n - k),
            Term::Proj(s, j) if matches!(**s, Term::Var(k) if k == n) => Tree::node(
                *j,
                args.into_iter().map(|a| self.read(a)).collect::<Vec<_>>(),
            ),
            other => unreachable!("unexpected head {} in a Church body", other),
        }
    }

    /// Substitution in the Church clone:
    /// `λσ. λx̄. M σ (N₁ σ x̄) … (N_m σ x̄)`, normalized. `m` is over
    /// `self.alpha` with `args.len()` variables, each `args[i]` over `n`.
    pub fn kleisli_subst(
        alpha: &RankedAlphabet,
        m: &Term,
        args: &[Term],
        n: usize,
    ) -> Result<Term, ChurchError> {
        let sigma = Term::Var(n);
        let xs: Vec<Term> = (1..=n).map(|i| Term::Var(n - i)).collect();
        let inner: Vec<Term> = args
            .iter()
            .map(|a| Term::apps(Term::app(a.clone(), sigma.clone()), xs.iter().cloned()))
            .collect();
        let mut body = Term::apps(Term::app(m.clone(), sigma), inner);
        for _ in 0..n {
            body = Term::lam(SimpleType::Base, body);
        }
        let term = Term::lam(alphabet_type(alpha), body);
        Ok(normalize(&TypingContext::new(), &term)?)
    }
}

/// `g_i = λt:(Σ⇒o)^{n_i}. λσ:Σ. σ.i (t.1 σ) … (t.n_i σ)`, exactly as
/// displayed, before η-expansion.
pub fn generator_displayed(alpha: &RankedAlphabet, i: usize) -> Result<Term, ChurchError> {
    let k = alpha.arity(i).ok_or(ChurchError::IndexOutOfRange {
        index: i,
        letters: alpha.len(),
    })?;
    let sigma_ty = alphabet_type(alpha);
    let t_ty = SimpleType::product(vec![
        SimpleType::arrow(sigma_ty.clone(), SimpleType::Base);
        k
    ]);
    let body = Term::apps(
        Term::proj(Term::Var(0), i),
        (1..=k).map(|c| Term::app(Term::proj(Term::Var(1), c), Term::Var(0))),
    );
    Ok(Term::lam(t_ty, Term::lam(sigma_ty, body)))
}

/// The generator `g_i` in long normal form.
pub fn generator(alpha: &RankedAlphabet, i: usize) -> Result<Term, ChurchError> {
    Ok(normalize(
        &TypingContext::new(),
        &generator_displayed(alpha, i)?,
    )?)
}

/// `(Σ⇒o)^{n_i} ⇒ Σ ⇒ o`.
pub fn generator_type(alpha: &RankedAlphabet, i: usize) -> Result<SimpleType, ChurchError> {
    let k = alpha.arity(i).ok_or(ChurchError::IndexOutOfRange {
        index: i,
        letters: alpha.len(),
    })?;
    let so = SimpleType::arrow(alphabet_type(alpha), SimpleType::Base);
    Ok(SimpleType::arrow(
        SimpleType::product(vec![so.clone(); k]),
        so,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::{parse_tree, TreeEnumerator};
    use crate::stlc::{alpha_eq, beta_eta_eq, parse_term};

    fn a(v: &[usize]) -> RankedAlphabet {
        RankedAlphabet::new(v.to_vec())
    }

    #[test]
    fn variable_encoding() {
        let cc = ChurchContext::new(&a(&[0, 1]), 1);
        let m = cc.encode(&Tree::Var(1)).unwrap();
        assert_eq!(
            m.to_string(),
            parse_term("\\s:(o * (o -> o)). \\x:o. x")
                .unwrap()
                .to_string()
        );
        assert_eq!(cc.decode(&m).unwrap(), Tree::Var(1));
    }

    #[test]
    fn root_is_outermost() {
        let cc = ChurchContext::new(&a(&[1, 1]), 1);
        let m = cc.encode(&parse_tree("(a2 (a1 x1))").unwrap()).unwrap();
        let expected = parse_term("\\s:((o -> o) * (o -> o)). \\x:o. s.2 (s.1 x)").unwrap();
        assert!(alpha_eq(&m, &expected));
    }

    #[test]
    fn encodings_are_normal_and_typed() {
        for al in [a(&[0, 1]), a(&[1, 1]), a(&[0, 2])] {
            for n in 0..=2 {
                let cc = ChurchContext::new(&al, n);
                for t in TreeEnumerator::new(&al, n).up_to(5) {
                    let m = cc.encode(&t).unwrap();
                    assert_eq!(
                        typecheck(&TypingContext::new(), &m).unwrap(),
                        cc.church_type()
                    );
                    assert_eq!(normalize(&TypingContext::new(), &m).unwrap(), m);
                    assert_eq!(cc.decode(&m).unwrap(), t);
                }
            }
        }
    }

    #[test]
    fn decode_rejects_wrong_type() {
        let cc = ChurchContext::new(&a(&[0, 1]), 1);
        let m = parse_term("\\x:o. x").unwrap();
        assert!(matches!(
            cc.decode(&m),
            Err(ChurchError::NotChurchTyped { .. })
        ));
    }

    #[test]
    fn decode_normalizes_first() {
        let cc = ChurchContext::new(&a(&[0, 1]), 1);
        // (λy. s.2 (s.2 y)) x, written with a redex
        let m = parse_term("\\s:(o * (o -> o)). \\x:o. (\\y:o. s.2 (s.2 y)) x").unwrap();
        assert_eq!(cc.decode(&m).unwrap(), parse_tree("(a2 (a2 x1))").unwrap());
        let m = parse_term("\\s:(o * (o -> o)). (\\f:o -> o. f) (s.2)").unwrap();
        assert_eq!(cc.decode(&m).unwrap(), parse_tree("(a2 x1)").unwrap());
    }

    #[test]
    fn generators_have_their_type() {
        let al = a(&[0, 1]);
        for i in 1..=2 {
            let g = generator_displayed(&al, i).unwrap();
            assert_eq!(
                typecheck(&TypingContext::new(), &g).unwrap(),
                generator_type(&al, i).unwrap()
            );
            assert!(beta_eta_eq(&TypingContext::new(), &g, &generator(&al, i).unwrap()).unwrap());
        }
        assert!(generator(&al, 3).is_err());
    }

    #[test]
    fn generator_builds_nodes() {
        let al = a(&[0, 1]);
        let cc = ChurchContext::new(&al, 0);
        let g2 = generator_displayed(&al, 2).unwrap();
        for t in TreeEnumerator::new(&al, 0).up_to(4) {
            let arg = Term::tuple(vec![cc.encode(&t).unwrap()]);
            let applied = Term::app(g2.clone(), arg);
            let node = cc.encode(&Tree::node(2, vec![t.clone()])).unwrap();
            assert_eq!(normalize(&TypingContext::new(), &applied).unwrap(), node);
        }
    }

    #[test]
    fn kleisli_substitution_matches_grafting() {
        let al = a(&[0, 2]);
        let c2 = ChurchContext::new(&al, 2);
        let c1 = ChurchContext::new(&al, 1);
        let t = parse_tree("(a2 x2 x1)").unwrap();
        let u = [parse_tree("(a2 x1 a1)").unwrap(), parse_tree("x1").unwrap()];
        let m = c2.encode(&t).unwrap();
        let ns: Vec<Term> = u.iter().map(|x| c1.encode(x).unwrap()).collect();
        let r = ChurchContext::kleisli_subst(&al, &m, &ns, 1).unwrap();
        assert_eq!(c1.decode(&r).unwrap(), t.subst(&u));
    }

    mod generated {
        use super::*;
        use proptest::prelude::*;

        /// Trees over `[0, 1, 2]` in two variables.
        fn arb_tree() -> impl Strategy<Value = Tree> {
            let leaf = prop_oneof![Just(Tree::Var(1)), Just(Tree::Var(2)), Just(Tree::node(1, vec![]))];
            leaf.prop_recursive(3, 12, 2, |inner| {
                prop_oneof![
                    inner.clone().prop_map(|c| Tree::node(2, vec![c])),
                    (inner.clone(), inner).prop_map(|(a, b)| Tree::node(3, vec![a, b])),
                ]
            })
        }

        fn alpha() -> RankedAlphabet {
            RankedAlphabet::new(vec![0, 1, 2])
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn decode_inverts_encode(t in arb_tree()) {
                let cc = ChurchContext::new(&alpha(), 2);
                let m = cc.encode(&t).unwrap();
                prop_assert_eq!(typecheck(&TypingContext::new(), &m).unwrap(), cc.church_type());
                prop_assert_eq!(cc.decode(&m).unwrap(), t);
            }

            #[test]
            fn encoding_is_injective(t in arb_tree(), u in arb_tree()) {
                let cc = ChurchContext::new(&alpha(), 2);
                let same = alpha_eq(&cc.encode(&t).unwrap(), &cc.encode(&u).unwrap());
                prop_assert_eq!(same, t == u);
            }

            #[test]
            fn encoding_commutes_with_substitution(t in arb_tree(), u1 in arb_tree(), u2 in arb_tree()) {
                let cc = ChurchContext::new(&alpha(), 2);
                let us = [u1, u2];
                let ns: Vec<Term> = us.iter().map(|u| cc.encode(u).unwrap()).collect();
                let r = ChurchContext::kleisli_subst(&alpha(), &cc.encode(&t).unwrap(), &ns, 2).unwrap();
                prop_assert!(alpha_eq(&r, &cc.encode(&t.subst(&us)).unwrap()));
            }
        }
    }
}
