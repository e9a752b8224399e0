use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::domain::{Fin, SemDomain};
use super::interp::interp_closed;
use super::value::SemValue;
use super::SemError;
use crate::stlc::{typecheck, SimpleType, Term, TypingContext};

/// Largest `|Q|·|Q′|` for which every relation is enumerated.
pub const RELATION_ENUM_LIMIT: usize = 12;

/// Largest `|⟦A⟧_Q|·|⟦A⟧_Q′|` for which the related pairs at `A` are tabulated.
const PAIR_TABLE_LIMIT: u128 = 1 << 22;

/// A relation `R ⊆ Q × Q′`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinRelation {
    pub left: Fin,
    pub right: Fin,
    pairs: BTreeSet<(usize, usize)>,
}

impl FinRelation {
    pub fn new(
        left: Fin,
        right: Fin,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<FinRelation, SemError> {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a >= left.0 || b >= right.0) {
            return Err(SemError::Relation(format!(
                "pair ({}, {}) outside {} x {}",
                a, b, left.0, right.0
            )));
        }
        Ok(FinRelation { left, right, pairs })
    }

    pub fn diagonal(q: Fin) -> FinRelation {
        FinRelation {
            left: q,
            right: q,
            pairs: (0..q.0).map(|i| (i, i)).collect(),
        }
    }

    pub fn empty(left: Fin, right: Fin) -> FinRelation {
        FinRelation {
            left,
            right,
            pairs: BTreeSet::new(),
        }
    }

    pub fn full(left: Fin, right: Fin) -> FinRelation {
        FinRelation {
            left,
            right,
            pairs: (0..left.0)
                .flat_map(|a| (0..right.0).map(move |b| (a, b)))
                .collect(),
        }
    }

    /// The relation whose pair `(a, b)` is present iff bit `a·|Q′| + b` of
    /// `bits` is set.
    pub fn from_bits(left: Fin, right: Fin, bits: u64) -> FinRelation {
        let pairs = (0..left.0)
            .flat_map(|a| (0..right.0).map(move |b| (a, b)))
            .filter(|&(a, b)| bits >> (a * right.0 + b) & 1 == 1)
            .collect();
        FinRelation { left, right, pairs }
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl std::fmt::Display for FinRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}{{", self.left.0, self.right.0)?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({},{})", a, b)?;
        }
        write!(f, "}}")
    }
}

/// Every relation between `left` and `right`, ordered by bit pattern.
pub fn all_relations(left: Fin, right: Fin) -> Result<Vec<FinRelation>, SemError> {
    let cells = left.0 * right.0;
    if cells > RELATION_ENUM_LIMIT {
        return Err(SemError::GuardExceeded {
            what: format!("relations between {} and {} elements", left.0, right.0),
            cardinality: 1u128.checked_shl(cells as u32),
            guard: 1 << RELATION_ENUM_LIMIT,
        });
    }
    Ok((0..1u64 << cells)
        .map(|bits| FinRelation::from_bits(left, right, bits))
        .collect())
}

/// The related pairs of `⟦A⟧_R`, as canonical indices on each side.
pub struct RelTable {
    pub left_card: u128,
    pub right_card: u128,
    pairs: Vec<(u128, u128)>,
    /// Dense membership bits, row-major; tables never exceed the pair limit.
    bits: Vec<u64>,
}

impl RelTable {
    fn new(left_card: u128, right_card: u128, pairs: Vec<(u128, u128)>) -> RelTable {
        let cells = (left_card * right_card) as usize;
        let mut bits = vec![0u64; cells.div_ceil(64)];
        for &(i, j) in &pairs {
            let c = (i * right_card + j) as usize;
            bits[c / 64] |= 1 << (c % 64);
        }
        RelTable {
            left_card,
            right_card,
            pairs,
            bits,
        }
    }

    pub fn pairs(&self) -> &[(u128, u128)] {
        &self.pairs
    }

    pub fn contains(&self, i: u128, j: u128) -> bool {
        if i >= self.left_card || j >= self.right_card {
            return false;
        }
        let c = (i * self.right_card + j) as usize;
        self.bits[c / 64] >> (c % 64) & 1 == 1
    }
}

/// Decides membership in `⟦A⟧_R` for a fixed relation, caching the related
/// pairs at every type small enough to tabulate.
pub struct RelationChecker {
    rel: FinRelation,
    guard: u64,
    tables: HashMap<SimpleType, Option<Arc<RelTable>>>,
    domains: HashMap<SimpleType, (SemDomain, SemDomain)>,
}

impl RelationChecker {
    pub fn new(rel: FinRelation, guard: u64) -> RelationChecker {
        RelationChecker {
            rel,
            guard,
            tables: HashMap::new(),
            domains: HashMap::new(),
        }
    }

    pub fn relation(&self) -> &FinRelation {
        &self.rel
    }

    fn domains(&mut self, ty: &SimpleType) -> (SemDomain, SemDomain) {
        let (l, r, g) = (self.rel.left, self.rel.right, self.guard);
        self.domains
            .entry(ty.clone())
            .or_insert_with(|| (SemDomain::new(ty, l, g), SemDomain::new(ty, r, g)))
            .clone()
    }

    /// Related pairs at `ty`, or `None` when the type is too large to tabulate.
    pub fn related_pairs(&mut self, ty: &SimpleType) -> Option<Arc<RelTable>> {
        if let Some(t) = self.tables.get(ty) {
            return t.clone();
        }
        let t = self.build_table(ty).map(Arc::new);
        self.tables.insert(ty.clone(), t.clone());
        t
    }

    fn build_table(&mut self, ty: &SimpleType) -> Option<RelTable> {
        let (dl, dr) = self.domains(ty);
        let (cl, cr) = (dl.cardinality()?, dr.cardinality()?);
        if cl.checked_mul(cr)? > PAIR_TABLE_LIMIT {
            return None;
        }
        match ty {
            SimpleType::Base => Some(RelTable::new(
                cl,
                cr,
                self.rel
                    .pairs()
                    .map(|(a, b)| (a as u128, b as u128))
                    .collect(),
            )),
            SimpleType::Unit => Some(RelTable::new(1, 1, vec![(0, 0)])),
            SimpleType::Product(cs) => {
                let mut pairs = vec![(0u128, 0u128)];
                for c in cs.iter() {
                    let t = self.related_pairs(c)?;
                    let mut next = Vec::with_capacity(pairs.len() * t.pairs.len());
                    for &(i, j) in &pairs {
                        for &(a, b) in &t.pairs {
                            next.push((i * t.left_card + a, j * t.right_card + b));
                        }
                    }
                    pairs = next;
                }
                Some(RelTable::new(cl, cr, pairs))
            }
            SimpleType::Arrow(d, c) => {
                let dt = self.related_pairs(d)?;
                let ct = self.related_pairs(c)?;
                let (nl, nr) = (dt.left_card as usize, dt.right_card as usize);
                let (kl, kr) = (ct.left_card.max(1), ct.right_card);
                // Left points related to each right point.
                let mut preimages: Vec<Vec<usize>> = vec![Vec::new(); nr];
                for &(x, y) in dt.pairs() {
                    preimages[y as usize].push(x as usize);
                }
                let mut pairs = Vec::new();
                let mut ft = vec![0u128; nl];
                for f in 0..cl {
                    let mut idx = f;
                    for k in (0..nl).rev() {
                        ft[k] = idx % kl;
                        idx /= kl;
                    }
                    // The values each g may take at every right point.
                    let allowed: Vec<Vec<u128>> = preimages
                        .iter()
                        .map(|xs| (0..kr).filter(|&b| xs.iter().all(|&x| ct.contains(ft[x], b))).collect())
                        .collect();
                    if allowed.iter().any(|a| a.is_empty()) {
                        continue;
                    }
                    let mut pos = vec![0usize; nr];
                    loop {
                        let g = pos.iter().zip(&allowed).fold(0u128, |acc, (&p, a)| acc * kr + a[p]);
                        pairs.push((f, g));
                        let mut k = nr;
                        loop {
                            if k == 0 {
                                break;
                            }
                            k -= 1;
                            pos[k] += 1;
                            if pos[k] < allowed[k].len() {
                                break;
                            }
                            pos[k] = 0;
                        }
                        if pos.iter().all(|&p| p == 0) {
                            break;
                        }
                    }
                }
                Some(RelTable::new(cl, cr, pairs))
            }
        }
    }

    /// `(v, w) ∈ ⟦A⟧_R`.
    pub fn member(
        &mut self,
        ty: &SimpleType,
        v: &SemValue,
        w: &SemValue,
    ) -> Result<bool, SemError> {
        if let Some(t) = self.related_pairs(ty) {
            let (dl, dr) = self.domains(ty);
            return Ok(t.contains(dl.index_of(v)?, dr.index_of(w)?));
        }
        match ty {
            SimpleType::Base => Ok(
                matches!((v, w), (SemValue::Base(a), SemValue::Base(b)) if self.rel.contains(*a, *b)),
            ),
            SimpleType::Unit => Ok(true),
            SimpleType::Product(cs) => {
                for (k, c) in cs.iter().enumerate() {
                    if !self.member(c, v.component(k)?, w.component(k)?)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            SimpleType::Arrow(d, c) => {
                let dt = self.related_pairs(d).ok_or_else(|| {
                    let (dl, dr) = self.domains(d);
                    SemError::GuardExceeded {
                        what: format!(
                            "related pairs at {} over {} x {}",
                            d, self.rel.left.0, self.rel.right.0
                        ),
                        cardinality: dl
                            .cardinality()
                            .zip(dr.cardinality())
                            .and_then(|(a, b)| a.checked_mul(b)),
                        guard: PAIR_TABLE_LIMIT as u64,
                    }
                })?;
                let (dl, dr) = self.domains(d);
                let (vt, wt) = (tabled(v, &dl), tabled(w, &dr));
                let xs = if vt { None } else { Some(dl.enumerate()?) };
                let ys = if wt { None } else { Some(dr.enumerate()?) };
                let at = |f: &SemValue, i: u128, all: &Option<Arc<[SemValue]>>| match all {
                    Some(all) => f.apply(&all[i as usize]),
                    None => f
                        .as_func()
                        .and_then(|f| f.table_value(i))
                        .cloned()
                        .ok_or_else(|| SemError::Mismatch("table shorter than its domain".into())),
                };
                for &(x, y) in dt.pairs() {
                    let fx = at(v, x, &xs)?;
                    let gy = at(w, y, &ys)?;
                    if !self.member(c, &fx, &gy)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// Whether `v` is a table over `dom`, so it can be read by canonical index.
fn tabled(v: &SemValue, dom: &SemDomain) -> bool {
    v.as_func().is_some_and(|f| f.is_table() && f.domain().same_as(dom))
}

/// One-shot membership test `(v, w) ∈ ⟦A⟧_R`.
pub fn rel_member(
    ty: &SimpleType,
    rel: &FinRelation,
    v: &SemValue,
    w: &SemValue,
    guard: u64,
) -> Result<bool, SemError> {
    RelationChecker::new(rel.clone(), guard).member(ty, v, w)
}

/// Whether the two denotations of the closed term `t : A` are related by
/// `⟦A⟧_R`.
pub fn fundamental_lemma_check(
    t: &Term,
    ty: &SimpleType,
    rel: &FinRelation,
    guard: u64,
) -> Result<bool, SemError> {
    let found = typecheck(&TypingContext::new(), t)?;
    if &found != ty {
        return Err(SemError::Type(crate::stlc::StlcError::Type {
            location: "root".into(),
            expected: ty.to_string(),
            found: found.to_string(),
        }));
    }
    let v = interp_closed(t, rel.left, guard)?;
    let w = interp_closed(t, rel.right, guard)?;
    rel_member(ty, rel, &v, &w, guard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsem::{interp_type, sem_equal};
    use crate::stlc::parse_term;
    use crate::DEFAULT_GUARD;

    fn o() -> SimpleType {
        SimpleType::Base
    }

    fn depth_two_types() -> Vec<SimpleType> {
        let base = vec![o(), SimpleType::Unit];
        let mut out = base.clone();
        for a in &base {
            for b in &base {
                out.push(SimpleType::arrow(a.clone(), b.clone()));
                out.push(SimpleType::product(vec![a.clone(), b.clone()]));
            }
        }
        let oo = SimpleType::arrow(o(), o());
        out.push(SimpleType::arrow(oo.clone(), o()));
        out.push(SimpleType::arrow(o(), oo.clone()));
        out.push(SimpleType::product(vec![o(), oo]));
        out
    }

    #[test]
    fn relation_count() {
        assert_eq!(all_relations(Fin(2), Fin(2)).unwrap().len(), 16);
        assert_eq!(all_relations(Fin(2), Fin(3)).unwrap().len(), 64);
        assert!(all_relations(Fin(4), Fin(4)).is_err());
    }

    #[test]
    fn diagonal_lifts_to_equality() {
        for ty in depth_two_types() {
            let d = interp_type(&ty, Fin(2), DEFAULT_GUARD);
            let elems = d.enumerate().unwrap();
            let mut checker = RelationChecker::new(FinRelation::diagonal(Fin(2)), DEFAULT_GUARD);
            for v in elems.iter() {
                for w in elems.iter() {
                    let eq = sem_equal(&ty, Fin(2), v, w, DEFAULT_GUARD).unwrap();
                    assert_eq!(checker.member(&ty, v, w).unwrap(), eq, "type {}", ty);
                }
            }
        }
    }

    #[test]
    fn empty_relation_relates_all_functions() {
        let oo = SimpleType::arrow(o(), o());
        let rel = FinRelation::empty(Fin(2), Fin(3));
        let (l, r) = (
            interp_type(&oo, Fin(2), DEFAULT_GUARD),
            interp_type(&oo, Fin(3), DEFAULT_GUARD),
        );
        let mut checker = RelationChecker::new(rel, DEFAULT_GUARD);
        for v in l.enumerate().unwrap().iter() {
            for w in r.enumerate().unwrap().iter() {
                assert!(checker.member(&oo, v, w).unwrap());
            }
        }
    }

    #[test]
    fn full_relation_at_base() {
        let rel = FinRelation::full(Fin(2), Fin(3));
        for a in 0..2 {
            for b in 0..3 {
                assert!(rel_member(
                    &o(),
                    &rel,
                    &SemValue::Base(a),
                    &SemValue::Base(b),
                    DEFAULT_GUARD
                )
                .unwrap());
            }
        }
    }

    #[test]
    fn identity_and_unit_are_parametric() {
        let id = parse_term("\\x:o. x").unwrap();
        let unit = parse_term("()").unwrap();
        let oo = SimpleType::arrow(o(), o());
        for rel in all_relations(Fin(2), Fin(3)).unwrap() {
            assert!(fundamental_lemma_check(&id, &oo, &rel, DEFAULT_GUARD).unwrap());
            assert!(
                fundamental_lemma_check(&unit, &SimpleType::Unit, &rel, DEFAULT_GUARD).unwrap()
            );
        }
    }

    #[test]
    fn tabulated_and_structural_membership_agree() {
        let ty = SimpleType::arrow(SimpleType::arrow(o(), o()), o());
        let d = interp_type(&ty, Fin(2), DEFAULT_GUARD);
        let elems = d.enumerate().unwrap();
        for rel in all_relations(Fin(2), Fin(2)).unwrap() {
            let mut checker = RelationChecker::new(rel.clone(), DEFAULT_GUARD);
            let table = checker.related_pairs(&ty).unwrap();
            for (i, v) in elems.iter().enumerate() {
                for (j, w) in elems.iter().enumerate() {
                    // structural definition, written out directly
                    let oo = interp_type(&SimpleType::arrow(o(), o()), Fin(2), DEFAULT_GUARD);
                    let fs = oo.enumerate().unwrap();
                    let mut expected = true;
                    for f in fs.iter() {
                        for g in fs.iter() {
                            let related_args = (0..2).all(|x| {
                                (0..2).all(|y| {
                                    !rel.contains(x, y)
                                        || rel.contains(
                                            f.apply(&SemValue::Base(x)).unwrap().as_base().unwrap(),
                                            g.apply(&SemValue::Base(y)).unwrap().as_base().unwrap(),
                                        )
                                })
                            });
                            if related_args {
                                let a = v.apply(f).unwrap().as_base().unwrap();
                                let b = w.apply(g).unwrap().as_base().unwrap();
                                expected &= rel.contains(a, b);
                            }
                        }
                    }
                    assert_eq!(table.contains(i as u128, j as u128), expected);
                }
            }
        }
    }
}
