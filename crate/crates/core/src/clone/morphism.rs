use std::sync::Arc;

use super::clones::{guard_error, CloneShape};
use super::tree::for_each_product;
use super::{CloneError, Elem, FiniteClone, IntFn, RankedAlphabet, Tree};

type MapFn = dyn Fn(usize, &Elem) -> Result<Elem, CloneError> + Send + Sync;

/// A family of maps `φ_n : C_n → D_n`.
#[derive(Clone)]
pub struct CloneMorphism {
    name: String,
    source: FiniteClone,
    target: FiniteClone,
    map: Arc<MapFn>,
}

impl CloneMorphism {
    pub fn new(
        name: impl Into<String>,
        source: &FiniteClone,
        target: &FiniteClone,
        map: impl Fn(usize, &Elem) -> Result<Elem, CloneError> + Send + Sync + 'static,
    ) -> CloneMorphism {
        CloneMorphism {
            name: name.into(),
            source: source.clone(),
            target: target.clone(),
            map: Arc::new(map),
        }
    }

    pub fn identity(c: &FiniteClone) -> CloneMorphism {
        Self::new(format!("id {}", c.describe()), c, c, |_, e| Ok(e.clone()))
    }

    /// `self` after `first`.
    pub fn after(&self, first: &CloneMorphism) -> CloneMorphism {
        let (f, g) = (first.map.clone(), self.map.clone());
        Self::new(
            format!("{} . {}", self.name, first.name),
            &first.source,
            &self.target,
            move |n, e| g(n, &f(n, e)?),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &FiniteClone {
        &self.source
    }

    pub fn target(&self) -> &FiniteClone {
        &self.target
    }

    pub fn apply(&self, n: usize, e: &Elem) -> Result<Elem, CloneError> {
        (self.map)(n, e)
    }
}

impl std::fmt::Debug for CloneMorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} -> {}",
            self.name,
            self.source.describe(),
            self.target.describe()
        )
    }
}

/// A morphism `𝔽Σ → C`, stored as its letter assignment.
#[derive(Clone)]
pub struct FreeMorphism {
    alpha: RankedAlphabet,
    target: FiniteClone,
    letters: Arc<[Elem]>,
}

impl FreeMorphism {
    pub fn new(
        alpha: &RankedAlphabet,
        target: &FiniteClone,
        letters: Vec<Elem>,
    ) -> Result<FreeMorphism, CloneError> {
        if letters.len() != alpha.len() {
            return Err(CloneError::ArityMismatch(format!(
                "{} letter images for the alphabet {}",
                letters.len(),
                alpha
            )));
        }
        Ok(FreeMorphism {
            alpha: alpha.clone(),
            target: target.clone(),
            letters: letters.into(),
        })
    }

    /// Builds the assignment from canonical carrier indices.
    pub fn from_indices(
        alpha: &RankedAlphabet,
        target: &FiniteClone,
        indices: &[usize],
    ) -> Result<FreeMorphism, CloneError> {
        if indices.len() != alpha.len() {
            return Err(CloneError::ArityMismatch(format!(
                "{} indices for the alphabet {}",
                indices.len(),
                alpha
            )));
        }
        let letters = alpha
            .letters()
            .zip(indices)
            .map(|((_, k), &i)| {
                target.carrier(k)?.elems().get(i).cloned().ok_or_else(|| {
                    CloneError::NotInCarrier(format!(
                        "index {} outside {}_{}",
                        i,
                        target.describe(),
                        k
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(alpha, target, letters)
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alpha
    }

    pub fn target(&self) -> &FiniteClone {
        &self.target
    }

    pub fn letters(&self) -> &[Elem] {
        &self.letters
    }

    /// Canonical carrier indices of the letter images.
    pub fn indices(&self) -> Result<Vec<usize>, CloneError> {
        self.alpha
            .letters()
            .zip(self.letters.iter())
            .map(|((_, k), e)| self.target.index_of(k, e))
            .collect()
    }

    /// The unique extension to trees over `n` variables.
    pub fn eval(&self, n: usize, t: &Tree) -> Result<Elem, CloneError> {
        match t {
            Tree::Var(i) if (1..=n).contains(i) => Ok(self.target.var(n, *i)),
            Tree::Var(i) => Err(CloneError::ArityMismatch(format!(
                "variable x{} outside 1..{}",
                i, n
            ))),
            Tree::Node(j, cs) => {
                let k = self.alpha.arity(*j).ok_or_else(|| {
                    CloneError::ArityMismatch(format!("no letter a{} in {}", j, self.alpha))
                })?;
                if k != cs.len() {
                    return Err(CloneError::ArityMismatch(format!(
                        "letter a{} given {} children",
                        j,
                        cs.len()
                    )));
                }
                let args = cs
                    .iter()
                    .map(|c| self.eval(n, c))
                    .collect::<Result<Vec<_>, _>>()?;
                self.target.subst(k, n, &self.letters[j - 1], &args)
            }
        }
    }

    /// `φ ∘ p`.
    pub fn then(&self, phi: &CloneMorphism) -> Result<FreeMorphism, CloneError> {
        let letters = self
            .alpha
            .letters()
            .zip(self.letters.iter())
            .map(|((_, k), e)| phi.apply(k, e))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(&self.alpha, phi.target(), letters)
    }

    /// The same assignment seen as a morphism out of `𝔽Σ`.
    pub fn to_morphism(&self) -> CloneMorphism {
        let p = self.clone();
        let name = format!("p: F{} -> {}", self.alpha, self.target.describe());
        CloneMorphism::new(
            name,
            &FiniteClone::free(&self.alpha),
            &self.target,
            move |n, e| {
                let t = e
                    .as_tree()
                    .ok_or_else(|| CloneError::NotInCarrier(format!("{} is not a tree", e)))?;
                p.eval(n, t)
            },
        )
    }
}

impl std::fmt::Debug for FreeMorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -> {} [", self.alpha, self.target.describe())?;
        for (k, e) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "a{} := {}", k + 1, e)?;
        }
        write!(f, "]")
    }
}

/// `|Clone(𝔽Σ, C)| = ∏_j |C_{n_j}|`.
pub fn morphism_count(alpha: &RankedAlphabet, target: &FiniteClone) -> Option<u128> {
    alpha.arities().iter().try_fold(1u128, |acc, &k| {
        target.carrier_size(k).and_then(|s| acc.checked_mul(s))
    })
}

/// Every morphism `𝔽Σ → C`, lexicographic in the carrier orders with the
/// first letter most significant.
pub fn enumerate_morphisms(
    alpha: &RankedAlphabet,
    target: &FiniteClone,
) -> Result<Vec<FreeMorphism>, CloneError> {
    let pools = alpha
        .arities()
        .iter()
        .map(|&k| target.carrier(k).map(|c| c.elems().to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    let count = pools
        .iter()
        .try_fold(1u128, |acc, p| acc.checked_mul(p.len() as u128));
    match count {
        Some(c) if c <= target.guard() as u128 => {}
        _ => {
            return Err(guard_error(
                format!("Clone(F{}, {})", alpha, target.describe()),
                count,
                target.guard(),
            ))
        }
    }
    let mut out = Vec::new();
    if pools.is_empty() {
        out.push(FreeMorphism::new(alpha, target, Vec::new())?);
        return Ok(out);
    }
    for_each_product(&pools, |ls| {
        out.push(FreeMorphism {
            alpha: alpha.clone(),
            target: target.clone(),
            letters: ls.to_vec().into(),
        })
    });
    Ok(out)
}

/// `cay^m : C → Endo(C_m)`, currying substitution into `C_m`.
pub fn cay(c: &FiniteClone, m: usize) -> CloneMorphism {
    let target = FiniteClone::endo_of_carrier(c, m);
    let src = c.clone();
    CloneMorphism::new(
        format!("cay^{} {}", m, c.describe()),
        c,
        &target,
        move |n, x| {
            let (src, x) = (src.clone(), x.clone());
            Ok(Elem::Func(IntFn::new(n, move |ys| src.subst(n, m, &x, ys))))
        },
    )
}

/// `cay^m` landing in `Endo(q)` with `q = |C_m|`, through the canonical
/// carrier order of `C_m`.
pub fn cay_tabulated(c: &FiniteClone, m: usize) -> Result<CloneMorphism, CloneError> {
    let carrier = c.carrier(m)?;
    let q = carrier.len();
    let target = FiniteClone::endo(q);
    let src = c.clone();
    Ok(CloneMorphism::new(
        format!("cay^{} {} (tabulated)", m, c.describe()),
        c,
        &target,
        move |n, x| {
            let rows = q
                .checked_pow(n as u32)
                .filter(|r| *r as u64 <= src.guard())
                .ok_or_else(|| {
                    guard_error(
                        format!("table of {}_{}^{}", src.describe(), m, n),
                        None,
                        src.guard(),
                    )
                })?;
            let mut out = vec![0u32; rows];
            for (r, slot) in out.iter_mut().enumerate() {
                let mut rest = r;
                let mut ys = vec![Elem::Const(0); n];
                for k in (0..n).rev() {
                    ys[k] = carrier.elems()[rest % q].clone();
                    rest /= q;
                }
                let y = src.subst(n, m, x, &ys)?;
                *slot = carrier.position(&y).ok_or_else(|| {
                    CloneError::NotInCarrier(format!("{} outside {}_{}", y, src.describe(), m))
                })? as u32;
            }
            Ok(Elem::table(out))
        },
    ))
}

/// Applies an element of `Endo(C_n)_n` to the variables of `C_n`.
pub fn appvar(c: &FiniteClone, n: usize, f: &Elem) -> Result<Elem, CloneError> {
    match f {
        Elem::Func(g) => g.call(&c.vars(n)),
        Elem::Table(t) => {
            let carrier = c.carrier(n)?;
            let q = carrier.len();
            let row = c.vars(n).iter().try_fold(0usize, |acc, v| {
                carrier.position(v).map(|p| acc * q + p).ok_or_else(|| {
                    CloneError::NotInCarrier(format!("variable {} outside the carrier", v))
                })
            })?;
            let k = *t.get(row).ok_or_else(|| {
                CloneError::ArityMismatch(format!("table of length {} has no row {}", t.len(), row))
            })?;
            Ok(carrier.elems()[k as usize].clone())
        }
        other => Err(CloneError::NotInCarrier(format!(
            "{} is not an operation on a carrier",
            other
        ))),
    }
}

/// The isomorphism `δEndo(Q) → ∏_{q∈Q} Endo(Q)`, `f ↦ (q ↦ f(−, q))`, and
/// its inverse.
pub fn delta_endo_iso(q: usize) -> (CloneMorphism, CloneMorphism) {
    let endo = FiniteClone::endo(q);
    let delta = FiniteClone::delta(&endo);
    let power = FiniteClone::power(&endo, q);
    let fwd = CloneMorphism::new(format!("drop {}", q), &delta, &power, move |n, f| {
        let t = f
            .as_table()
            .filter(|t| t.len() == q.pow(n as u32 + 1))
            .ok_or_else(|| {
                CloneError::NotInCarrier(format!("{} is not in delta Endo({})_{}", f, q, n))
            })?;
        // row r of f(−, p) is row r·q + p of f
        let parts = (0..q)
            .map(|p| {
                Elem::table(
                    (0..q.pow(n as u32))
                        .map(|r| t[r * q + p])
                        .collect::<Vec<_>>(),
                )
            })
            .collect::<Vec<_>>();
        Ok(Elem::tuple(parts))
    });
    let inv = CloneMorphism::new(format!("undrop {}", q), &power, &delta, move |n, e| {
        let parts = e
            .as_tuple()
            .filter(|p| p.len() == q)
            .ok_or_else(|| CloneError::NotInCarrier(format!("{} is not a {}-tuple", e, q)))?;
        let tabs = parts
            .iter()
            .map(|p| {
                p.as_table()
                    .ok_or_else(|| CloneError::NotInCarrier(format!("{} is not a table", p)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rows = q.pow(n as u32);
        Ok(Elem::table(
            (0..rows * q)
                .map(|r| tabs[r % q][r / q])
                .collect::<Vec<_>>(),
        ))
    });
    (fwd, inv)
}

/// Whether `c` is a free clone, and over which alphabet.
pub fn free_alphabet(c: &FiniteClone) -> Option<RankedAlphabet> {
    match c.shape() {
        CloneShape::Free(a) => Some(a.clone()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::{parse_tree, MonoidAction};

    fn neg() -> Elem {
        Elem::table(vec![1, 0])
    }

    #[test]
    fn morphism_counts() {
        let e2 = FiniteClone::endo(2);
        assert_eq!(
            enumerate_morphisms(&RankedAlphabet::new(vec![1, 1]), &e2)
                .unwrap()
                .len(),
            16
        );
        assert_eq!(
            enumerate_morphisms(&RankedAlphabet::new(vec![0]), &e2)
                .unwrap()
                .len(),
            2
        );
        assert_eq!(
            enumerate_morphisms(&RankedAlphabet::new(vec![]), &e2)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            morphism_count(&RankedAlphabet::new(vec![1, 1]), &e2),
            Some(16)
        );
    }

    #[test]
    fn enumeration_is_lexicographic_and_indexed() {
        let alpha = RankedAlphabet::new(vec![1, 1]);
        let ms = enumerate_morphisms(&alpha, &FiniteClone::endo(2)).unwrap();
        for (k, p) in ms.iter().enumerate() {
            let idx = p.indices().unwrap();
            assert_eq!(idx[0] * 4 + idx[1], k);
        }
    }

    #[test]
    fn double_negation_is_identity() {
        let alpha = RankedAlphabet::new(vec![1]);
        let p = FreeMorphism::new(&alpha, &FiniteClone::endo(2), vec![neg()]).unwrap();
        let t = parse_tree("(a1 (a1 x1))").unwrap();
        assert_eq!(p.eval(1, &t).unwrap(), Elem::table(vec![0, 1]));
        assert_eq!(
            p.eval(1, &Tree::Var(1)).unwrap(),
            FiniteClone::endo(2).var(1, 1)
        );
    }

    #[test]
    fn appvar_retracts_cay_on_endo2() {
        let e2 = FiniteClone::endo(2);
        let c1 = cay(&e2, 1);
        for g in e2.carrier(1).unwrap().elems() {
            assert_eq!(&appvar(&e2, 1, &c1.apply(1, g).unwrap()).unwrap(), g);
        }
        let c0 = cay(&e2, 0);
        for g in e2.carrier(0).unwrap().elems() {
            assert_eq!(&appvar(&e2, 0, &c0.apply(0, g).unwrap()).unwrap(), g);
        }
    }

    #[test]
    fn appvar_on_action_clone() {
        let c = FiniteClone::action(&MonoidAction::flip()).unwrap();
        let s = Elem::Act(1, 1);
        assert_eq!(appvar(&c, 1, &cay(&c, 1).apply(1, &s).unwrap()).unwrap(), s);
        let tab = cay_tabulated(&c, 1).unwrap();
        assert_eq!(appvar(&c, 1, &tab.apply(1, &s).unwrap()).unwrap(), s);
    }

    #[test]
    fn cay_on_free_clone_grafts() {
        let alpha = RankedAlphabet::new(vec![1]);
        let f = FiniteClone::free(&alpha);
        let a = Elem::Tree(parse_tree("(a1 x1)").unwrap());
        let g = cay(&f, 1).apply(1, &a).unwrap();
        let g = g.as_func().unwrap();
        for (input, expected) in [
            ("x1", "(a1 x1)"),
            ("(a1 x1)", "(a1 (a1 x1))"),
            ("(a1 (a1 x1))", "(a1 (a1 (a1 x1)))"),
        ] {
            let out = g.call(&[Elem::Tree(parse_tree(input).unwrap())]).unwrap();
            assert_eq!(out, Elem::Tree(parse_tree(expected).unwrap()));
        }
    }

    #[test]
    fn delta_iso_is_bijective() {
        let (fwd, inv) = delta_endo_iso(2);
        for n in 0..=2 {
            let src = fwd.source().carrier(n).unwrap();
            let mut images = std::collections::HashSet::new();
            for f in src.elems() {
                let g = fwd.apply(n, f).unwrap();
                assert_eq!(&inv.apply(n, &g).unwrap(), f);
                images.insert(g);
            }
            assert_eq!(images.len() as u128, fwd.target().carrier_size(n).unwrap());
        }
    }
}
