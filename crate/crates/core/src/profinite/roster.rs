use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::clone::{
    cay_tabulated, delta_endo_iso, enumerate_morphisms, CloneError, CloneMorphism, CloneShape,
    Elem, FiniteClone, FreeMorphism, MonoidAction, RankedAlphabet,
};

/// How a roster member was built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recipe {
    Endo(usize),
    Action(MonoidAction),
    /// The image of a letter assignment into another member.
    Image {
        alpha: RankedAlphabet,
        target: usize,
        letters: Vec<usize>,
    },
    Product(Vec<usize>),
    Delta(usize),
}

#[derive(Clone)]
pub struct RosterMember {
    pub name: String,
    pub clone: FiniteClone,
    pub recipe: Recipe,
}

type MorphismCache = HashMap<(usize, RankedAlphabet), Arc<Vec<FreeMorphism>>>;

/// A finite list of locally finite clones standing in for all of them.
#[derive(Clone, Default)]
pub struct CloneRoster {
    members: Vec<RosterMember>,
    morphisms: Arc<Mutex<MorphismCache>>,
}

impl std::fmt::Debug for CloneRoster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list()
            .entries(self.members.iter().map(|m| &m.name))
            .finish()
    }
}

impl CloneRoster {
    pub fn new() -> CloneRoster {
        CloneRoster::default()
    }

    /// `Endo(1)`, `Endo(2)`, `Endo(3)`, the `Z/2` flip action and the image
    /// of `a₁ ↦ 1, a₂ ↦ xor` in `Endo(2)`.
    pub fn default_roster() -> CloneRoster {
        let mut r = CloneRoster::new();
        for q in 1..=3 {
            r.push_endo(q);
        }
        r.push_action(&MonoidAction::flip())
            .expect("flip is an action");
        let e2 = r.find_endo(2).expect("Endo(2) present");
        // a₁ ↦ const 1 (index 1), a₂ ↦ xor (table 0110, index 6)
        r.push_image(&RankedAlphabet::new(vec![0, 2]), e2, &[1, 6])
            .expect("letters in range");
        r
    }

    /// `Endo(2)`, `Endo(3)` and the `Z/2` flip action.
    pub fn small() -> CloneRoster {
        let mut r = CloneRoster::new();
        r.push_endo(2);
        r.push_endo(3);
        r.push_action(&MonoidAction::flip())
            .expect("flip is an action");
        r
    }

    pub fn endos(sizes: &[usize]) -> CloneRoster {
        let mut r = CloneRoster::new();
        for &q in sizes {
            r.push_endo(q);
        }
        r
    }

    fn push(&mut self, name: String, clone: FiniteClone, recipe: Recipe) -> usize {
        self.members.push(RosterMember {
            name,
            clone,
            recipe,
        });
        self.morphisms.lock().expect("morphism cache").clear();
        self.members.len() - 1
    }

    pub fn push_endo(&mut self, q: usize) -> usize {
        self.push(
            format!("Endo({})", q),
            FiniteClone::endo(q),
            Recipe::Endo(q),
        )
    }

    pub fn push_action(&mut self, ma: &MonoidAction) -> Result<usize, CloneError> {
        let c = FiniteClone::action(ma)?;
        let name = format!("Act[{:?}]", ma.table());
        Ok(self.push(name, c, Recipe::Action(ma.clone())))
    }

    pub fn push_image(
        &mut self,
        alpha: &RankedAlphabet,
        target: usize,
        letters: &[usize],
    ) -> Result<usize, CloneError> {
        let t = self.member(target).clone.clone();
        let p = FreeMorphism::from_indices(alpha, &t, letters)?;
        let name = format!(
            "Im({} {:?} -> {})",
            alpha, letters, self.members[target].name
        );
        Ok(self.push(
            name,
            FiniteClone::image(&p),
            Recipe::Image {
                alpha: alpha.clone(),
                target,
                letters: letters.to_vec(),
            },
        ))
    }

    pub fn push_product(&mut self, parts: &[usize]) -> usize {
        let cs = parts
            .iter()
            .map(|&i| self.members[i].clone.clone())
            .collect();
        let name = format!(
            "({})",
            parts
                .iter()
                .map(|&i| self.members[i].name.as_str())
                .collect::<Vec<_>>()
                .join(" x ")
        );
        self.push(
            name,
            FiniteClone::product(cs),
            Recipe::Product(parts.to_vec()),
        )
    }

    /// `δ Endo(q)`.
    pub fn push_delta_endo(&mut self, q: usize) -> usize {
        self.push(
            format!("delta Endo({})", q),
            FiniteClone::delta(&FiniteClone::endo(q)),
            Recipe::Delta(q),
        )
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[RosterMember] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &RosterMember {
        &self.members[i]
    }

    pub fn find_endo(&self, q: usize) -> Option<usize> {
        self.members
            .iter()
            .position(|m| m.recipe == Recipe::Endo(q))
    }

    /// The sizes `q` with `Endo(q)` in the roster, ascending.
    pub fn endo_sizes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .members
            .iter()
            .filter_map(|m| match m.recipe {
                Recipe::Endo(q) => Some(q),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn describe(&self) -> Vec<String> {
        self.members.iter().map(|m| m.name.clone()).collect()
    }

    /// `Clone(𝔽Σ, C)` for member `i`, in canonical order, cached.
    pub fn morphisms(
        &self,
        i: usize,
        alpha: &RankedAlphabet,
    ) -> Result<Arc<Vec<FreeMorphism>>, CloneError> {
        let key = (i, alpha.clone());
        if let Some(v) = self.morphisms.lock().expect("morphism cache").get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(enumerate_morphisms(alpha, &self.members[i].clone)?);
        self.morphisms
            .lock()
            .expect("morphism cache")
            .insert(key, v.clone());
        Ok(v)
    }

    /// Position of `p`, a letter assignment into something with the same
    /// elements as member `i`, in the canonical enumeration.
    pub fn morphism_index(&self, i: usize, p: &FreeMorphism) -> Result<usize, CloneError> {
        let c = &self.members[i].clone;
        let mut idx = 0usize;
        for ((_, k), e) in p.alphabet().letters().zip(p.letters()) {
            let size = c.carrier(k)?.len();
            idx = idx * size + c.index_of(k, e)?;
        }
        Ok(idx)
    }

    /// The morphisms between members used for naturality: identities,
    /// tabulated Cayley maps into `Endo` members, product projections, image
    /// inclusions and the components of `δ Endo(q) ≅ Endo(q)^q`.
    pub fn generated_morphisms(&self, max_cay_arity: usize) -> Vec<(usize, usize, CloneMorphism)> {
        let mut out = Vec::new();
        for (i, m) in self.members.iter().enumerate() {
            out.push((i, i, CloneMorphism::identity(&m.clone)));
            for k in 0..=max_cay_arity {
                let Some(size) = m.clone.carrier_size(k) else {
                    continue;
                };
                if let Some(j) = usize::try_from(size).ok().and_then(|s| self.find_endo(s)) {
                    if let Ok(phi) = cay_tabulated(&m.clone, k) {
                        out.push((i, j, phi));
                    }
                }
            }
            match &m.recipe {
                Recipe::Product(parts) => {
                    for (pos, &j) in parts.iter().enumerate() {
                        let name = format!("pi{} {}", pos + 1, m.name);
                        let phi = CloneMorphism::new(
                            name,
                            &m.clone,
                            &self.members[j].clone,
                            move |_, e| {
                                e.as_tuple()
                                    .and_then(|t| t.get(pos).cloned())
                                    .ok_or_else(|| {
                                        CloneError::NotInCarrier(format!(
                                            "{} has no component {}",
                                            e,
                                            pos + 1
                                        ))
                                    })
                            },
                        );
                        out.push((i, j, phi));
                    }
                }
                Recipe::Image { target, .. } => {
                    let name = format!("incl {}", m.name);
                    let phi =
                        CloneMorphism::new(name, &m.clone, &self.members[*target].clone, |_, e| {
                            Ok(e.clone())
                        });
                    out.push((i, *target, phi));
                }
                Recipe::Delta(q) => {
                    let power = self.members.iter().position(|o| {
                        matches!(&o.recipe, Recipe::Product(ps) if ps.len() == *q && ps.iter().all(|&p| self.members[p].recipe == Recipe::Endo(*q)))
                    });
                    if let Some(j) = power {
                        let (fwd, inv) = delta_endo_iso(*q);
                        out.push((i, j, fwd));
                        out.push((j, i, inv));
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Whether `e` lies in the image of the pairing of `p` and `p2`, by
    /// closing the generated subclone of the product.
    pub fn pair_in_image(
        &self,
        i: usize,
        j: usize,
        p: &FreeMorphism,
        p2: &FreeMorphism,
        n: usize,
        e: &Elem,
    ) -> Result<bool, CloneError> {
        let prod = FiniteClone::product(vec![
            self.members[i].clone.clone(),
            self.members[j].clone.clone(),
        ]);
        let letters = p
            .letters()
            .iter()
            .zip(p2.letters())
            .map(|(a, b)| Elem::tuple(vec![a.clone(), b.clone()]))
            .collect();
        let pair = FreeMorphism::new(p.alphabet(), &prod, letters)?;
        let img = FiniteClone::image(&pair);
        Ok(img.carrier(n)?.position(e).is_some())
    }
}

impl RosterMember {
    pub fn shape(&self) -> &'static str {
        match self.clone.shape() {
            CloneShape::Free(_) => "free",
            CloneShape::Endo(_) => "endo",
            CloneShape::Action(_) => "action",
            CloneShape::Product(_) => "product",
            CloneShape::Image(_) => "image",
            CloneShape::Delta(_) => "delta",
            CloneShape::EndoOfCarrier(..) => "endo-of-carrier",
            CloneShape::Other => "other",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_roster_is_enumerable() {
        let r = CloneRoster::default_roster();
        assert_eq!(r.len(), 5);
        for m in r.members() {
            for n in 0..=2 {
                assert!(m.clone.carrier(n).is_ok(), "{} at {}", m.name, n);
            }
        }
        assert_eq!(r.endo_sizes(), vec![1, 2, 3]);
        assert_eq!(r.member(4).shape(), "image");
    }

    #[test]
    fn morphism_indices_match_enumeration() {
        let r = CloneRoster::small();
        let alpha = RankedAlphabet::new(vec![0, 1]);
        for i in 0..r.len() {
            for (k, p) in r.morphisms(i, &alpha).unwrap().iter().enumerate() {
                assert_eq!(r.morphism_index(i, p).unwrap(), k);
            }
        }
    }

    #[test]
    fn generated_morphisms_include_cayley_maps() {
        let r = CloneRoster::small();
        let gens = r.generated_morphisms(1);
        // the flip action has two constants, so cay^0 lands in Endo(2)
        assert!(gens.iter().any(|(i, j, _)| *i == 2 && *j == 0));
        let mut r2 = CloneRoster::endos(&[2]);
        let p = r2.push_product(&[0, 0]);
        let d = r2.push_delta_endo(2);
        let gens = r2.generated_morphisms(0);
        assert!(gens.iter().any(|(i, j, _)| *i == p && *j == 0));
        assert!(gens.iter().any(|(i, j, _)| *i == d && *j == p));
        assert!(gens.iter().any(|(i, j, _)| *i == p && *j == d));
    }
}
