use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clone::{CloneError, Elem, FreeMorphism, RankedAlphabet, Tree, TreeEnumerator};

use super::roster::CloneRoster;
use super::ProfiniteError;

/// `u_C : Clone(𝔽Σ, C) → C_n` for every roster member `C`, stored against
/// the canonical morphism enumeration.
#[derive(Clone, Debug)]
pub struct NaturalFamily {
    pub alpha: RankedAlphabet,
    pub n: usize,
    pub roster: CloneRoster,
    pub tables: Vec<Vec<Elem>>,
}

impl NaturalFamily {
    pub fn from_fn(
        alpha: &RankedAlphabet,
        n: usize,
        roster: &CloneRoster,
        f: impl Fn(usize, &FreeMorphism) -> Result<Elem, CloneError> + Sync,
    ) -> Result<NaturalFamily, ProfiniteError> {
        let tables = (0..roster.len())
            .map(|i| {
                let ms = roster.morphisms(i, alpha)?;
                ms.par_iter()
                    .map(|p| f(i, p))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, CloneError>>()?;
        Ok(NaturalFamily {
            alpha: alpha.clone(),
            n,
            roster: roster.clone(),
            tables,
        })
    }

    /// `u[v₁, …, v_m]`: pointwise substitution in each member.
    pub fn substitute(&self, args: &[NaturalFamily]) -> Result<NaturalFamily, ProfiniteError> {
        if args.len() != self.n {
            return Err(ProfiniteError::Mismatch(format!(
                "{} arguments for a family over {} variables",
                args.len(),
                self.n
            )));
        }
        let n = args.first().map(|a| a.n).unwrap_or(0);
        if args.iter().any(|a| a.n != n) {
            return Err(ProfiniteError::Mismatch(
                "arguments over different numbers of variables".into(),
            ));
        }
        let tables = (0..self.roster.len())
            .map(|i| {
                let c = &self.roster.member(i).clone;
                (0..self.tables[i].len())
                    .map(|k| {
                        let xs: Vec<Elem> = args.iter().map(|a| a.tables[i][k].clone()).collect();
                        c.subst(self.n, n, &self.tables[i][k], &xs)
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NaturalFamily {
            alpha: self.alpha.clone(),
            n,
            roster: self.roster.clone(),
            tables,
        })
    }

    /// Table-exact equality, through each member's equality.
    pub fn same_tables(&self, other: &NaturalFamily) -> Result<bool, ProfiniteError> {
        if self.tables.len() != other.tables.len() || self.n != other.n {
            return Ok(false);
        }
        for (i, (a, b)) in self.tables.iter().zip(&other.tables).enumerate() {
            if a.len() != b.len() {
                return Ok(false);
            }
            let c = &self.roster.member(i).clone;
            for (x, y) in a.iter().zip(b) {
                if !c.equal(self.n, x, y)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Whether `t` defines this family on every member.
    pub fn defined_by(&self, t: &Tree) -> Result<bool, ProfiniteError> {
        for i in 0..self.roster.len() {
            let c = &self.roster.member(i).clone;
            for (p, e) in self
                .roster
                .morphisms(i, &self.alpha)?
                .iter()
                .zip(&self.tables[i])
            {
                if !c.equal(self.n, &p.eval(self.n, t)?, e)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// `u_C(p) = p(t)`.
pub fn family_of_tree(
    alpha: &RankedAlphabet,
    n: usize,
    t: &Tree,
    roster: &CloneRoster,
) -> Result<NaturalFamily, ProfiniteError> {
    t.validate(alpha, n)
        .map_err(|e| ProfiniteError::Mismatch(e.to_string()))?;
    NaturalFamily::from_fn(alpha, n, roster, |_, p| p.eval(n, t))
}

/// One commuting square or pairing check, with its first failure.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SquareCheck {
    pub morphism: String,
    pub source: String,
    pub target: String,
    pub tested: u64,
    pub exhaustive: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct NaturalityReport {
    pub passed: bool,
    pub checks: Vec<SquareCheck>,
}

#[derive(Debug, Clone, Copy)]
pub struct NaturalityOptions {
    /// Arities `m` for which `cay^m` is generated.
    pub max_cay_arity: usize,
    /// Whether to test pairings `C × C'` through their images.
    pub pairings: bool,
    /// Pairs of morphisms per pairing before sampling takes over.
    pub max_pairs: usize,
    pub seed: u64,
}

impl Default for NaturalityOptions {
    fn default() -> Self {
        NaturalityOptions {
            max_cay_arity: 1,
            pairings: true,
            max_pairs: 4096,
            seed: 0,
        }
    }
}

/// Checks `φ_n(u_C(p)) = u_{C'}(φ ∘ p)` for every generated `φ`, and that
/// `(u_C(p), u_{C'}(p'))` lies in the image of `⟨p, p'⟩` for every pair of
/// members.
pub fn naturality_check(
    u: &NaturalFamily,
    opts: &NaturalityOptions,
) -> Result<NaturalityReport, ProfiniteError> {
    let r = &u.roster;
    let mut checks = Vec::new();
    for (i, j, phi) in r.generated_morphisms(opts.max_cay_arity) {
        let ms = r.morphisms(i, &u.alpha)?;
        let tgt = &r.member(j).clone;
        let failure = ms
            .par_iter()
            .zip(u.tables[i].par_iter())
            .map(|(p, e)| -> Result<Option<String>, ProfiniteError> {
                let lhs = phi.apply(u.n, e)?;
                let k = r.morphism_index(j, &p.then(&phi)?)?;
                let rhs = &u.tables[j][k];
                Ok((!tgt.equal(u.n, &lhs, rhs)?)
                    .then(|| format!("p = {:?}: {} against {}", p.indices().ok(), lhs, rhs)))
            })
            .find_map_first(|x| match x {
                Ok(None) => None,
                Ok(Some(w)) => Some(Ok(w)),
                Err(e) => Some(Err(e)),
            })
            .transpose()?;
        checks.push(SquareCheck {
            morphism: phi.name().to_string(),
            source: r.member(i).name.clone(),
            target: r.member(j).name.clone(),
            tested: ms.len() as u64,
            exhaustive: true,
            failure,
        });
    }
    if opts.pairings {
        for i in 0..r.len() {
            for j in i..r.len() {
                checks.push(pairing_check(u, i, j, opts)?);
            }
        }
    }
    let passed = checks.iter().all(|c| c.failure.is_none());
    Ok(NaturalityReport { passed, checks })
}

fn pairing_check(
    u: &NaturalFamily,
    i: usize,
    j: usize,
    opts: &NaturalityOptions,
) -> Result<SquareCheck, ProfiniteError> {
    let r = &u.roster;
    let (mi, mj) = (r.morphisms(i, &u.alpha)?, r.morphisms(j, &u.alpha)?);
    let mut pairs: Vec<(usize, usize)> = (0..mi.len())
        .flat_map(|a| (0..mj.len()).map(move |b| (a, b)))
        .collect();
    let exhaustive = pairs.len() <= opts.max_pairs;
    if !exhaustive {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((i as u64) << 32 | j as u64));
        pairs.shuffle(&mut rng);
        pairs.truncate(opts.max_pairs);
        pairs.sort_unstable();
    }
    let failure = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<Option<String>, ProfiniteError> {
            let e = Elem::tuple(vec![u.tables[i][a].clone(), u.tables[j][b].clone()]);
            Ok((!r.pair_in_image(i, j, &mi[a], &mj[b], u.n, &e)?).then(|| {
                format!(
                    "p = {:?}, p' = {:?}: {} outside the image",
                    mi[a].indices().ok(),
                    mj[b].indices().ok(),
                    e
                )
            }))
        })
        .find_map_first(|x| match x {
            Ok(None) => None,
            Ok(Some(w)) => Some(Ok(w)),
            Err(e) => Some(Err(e)),
        })
        .transpose()?;
    Ok(SquareCheck {
        morphism: "pairing".into(),
        source: r.member(i).name.clone(),
        target: r.member(j).name.clone(),
        tested: pairs.len() as u64,
        exhaustive,
        failure,
    })
}

/// A tree found by search, or the bound that was exhausted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Definability {
    Defined(Tree),
    Inconclusive(usize),
}

impl serde::Serialize for Definability {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(1))?;
        match self {
            Definability::Defined(t) => m.serialize_entry("defined", &t.to_string())?,
            Definability::Inconclusive(b) => m.serialize_entry("inconclusive_up_to_size", b)?,
        }
        m.end()
    }
}

impl Definability {
    pub fn tree(&self) -> Option<&Tree> {
        match self {
            Definability::Defined(t) => Some(t),
            Definability::Inconclusive(_) => None,
        }
    }
}

/// The least tree of size `≤ size_bound` defining `u` on the whole roster.
pub fn definability_search(
    u: &NaturalFamily,
    size_bound: usize,
) -> Result<Definability, ProfiniteError> {
    let mut en = TreeEnumerator::new(&u.alpha, u.n);
    for s in 1..=size_bound {
        let found = en
            .of_size(s)
            .par_iter()
            .map(|t| u.defined_by(t).map(|ok| ok.then(|| t.clone())))
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

/// Every tree of size `≤ size_bound` defining `u`, in canonical order.
pub fn definers(u: &NaturalFamily, size_bound: usize) -> Result<Vec<Tree>, ProfiniteError> {
    let trees = TreeEnumerator::new(&u.alpha, u.n).up_to(size_bound);
    let ok = trees
        .par_iter()
        .map(|t| u.defined_by(t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(trees
        .into_iter()
        .zip(ok)
        .filter_map(|(t, b)| b.then_some(t))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::parse_tree;

    fn a1() -> RankedAlphabet {
        RankedAlphabet::new(vec![1])
    }

    #[test]
    fn variable_family_is_variables() {
        let r = CloneRoster::small();
        let u = family_of_tree(&a1(), 1, &Tree::Var(1), &r).unwrap();
        for (i, t) in u.tables.iter().enumerate() {
            let v = r.member(i).clone.var(1, 1);
            assert!(t.iter().all(|e| *e == v));
        }
    }

    #[test]
    fn double_application_on_endo2() {
        let r = CloneRoster::endos(&[2]);
        let u = family_of_tree(&a1(), 1, &parse_tree("(a1 (a1 x1))").unwrap(), &r).unwrap();
        // p(a) ranges over const0, identity, negation, const1 in table order
        let got: Vec<Vec<u32>> = u.tables[0]
            .iter()
            .map(|e| e.as_table().unwrap().to_vec())
            .collect();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn tree_families_are_natural() {
        let r = CloneRoster::default_roster();
        let alpha = RankedAlphabet::new(vec![0, 1]);
        for t in TreeEnumerator::new(&alpha, 1).up_to(4) {
            let u = family_of_tree(&alpha, 1, &t, &r).unwrap();
            let rep = naturality_check(&u, &NaturalityOptions::default()).unwrap();
            assert!(
                rep.passed,
                "{}: {:?}",
                t,
                rep.checks.iter().find(|c| c.failure.is_some())
            );
        }
    }

    #[test]
    fn mixed_family_fails_through_the_product() {
        let r = CloneRoster::endos(&[2, 3]);
        let alpha = a1();
        let ax = family_of_tree(&alpha, 1, &parse_tree("(a1 x1)").unwrap(), &r).unwrap();
        let x = family_of_tree(&alpha, 1, &Tree::Var(1), &r).unwrap();
        let mixed = NaturalFamily {
            tables: vec![ax.tables[0].clone(), x.tables[1].clone()],
            ..ax.clone()
        };
        let rep = naturality_check(&mixed, &NaturalityOptions::default()).unwrap();
        assert!(!rep.passed);
        let bad: Vec<&SquareCheck> = rep.checks.iter().filter(|c| c.failure.is_some()).collect();
        assert!(bad.iter().all(|c| c.morphism == "pairing"));
        assert!(bad
            .iter()
            .any(|c| c.source == "Endo(2)" && c.target == "Endo(3)"));
        assert!(rep
            .checks
            .iter()
            .filter(|c| c.morphism.starts_with("id"))
            .all(|c| c.failure.is_none()));
    }

    #[test]
    fn search_examples() {
        let alpha = a1();
        let r = CloneRoster::endos(&[2, 3]);
        let x = family_of_tree(&alpha, 1, &Tree::Var(1), &r).unwrap();
        assert_eq!(
            definability_search(&x, 4).unwrap(),
            Definability::Defined(Tree::Var(1))
        );
        let t = parse_tree("(a1 (a1 x1))").unwrap();
        let u = family_of_tree(&alpha, 1, &t, &r).unwrap();
        assert_eq!(
            definability_search(&u, 6).unwrap(),
            Definability::Defined(t)
        );
        let deep = (0..11).fold(Tree::Var(1), |acc, _| Tree::node(1, vec![acc]));
        let u = family_of_tree(&alpha, 1, &deep, &r).unwrap();
        assert_eq!(deep.size(), 12);
        // on sets of size at most 3, f^11 = f^5 since both exponents pass the
        // index and agree modulo 6
        let five = (0..5).fold(Tree::Var(1), |acc, _| Tree::node(1, vec![acc]));
        assert_eq!(
            definability_search(&u, 8).unwrap(),
            Definability::Defined(five)
        );
        assert_eq!(
            definability_search(&u, 5).unwrap(),
            Definability::Inconclusive(5)
        );
    }

    #[test]
    fn substitution_of_families_is_grafting() {
        let alpha = RankedAlphabet::new(vec![0, 2]);
        let r = CloneRoster::endos(&[2]);
        let t = parse_tree("(a2 x1 x2)").unwrap();
        let us = [parse_tree("a1").unwrap(), parse_tree("(a2 x1 x1)").unwrap()];
        let u = family_of_tree(&alpha, 2, &t, &r).unwrap();
        let vs: Vec<NaturalFamily> = us
            .iter()
            .map(|x| family_of_tree(&alpha, 1, x, &r).unwrap())
            .collect();
        let lhs = u.substitute(&vs).unwrap();
        let rhs = family_of_tree(&alpha, 1, &t.subst(&us), &r).unwrap();
        assert!(lhs.same_tables(&rhs).unwrap());
    }
}
