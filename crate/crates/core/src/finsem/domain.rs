use std::fmt;
use std::sync::{Arc, OnceLock};

use super::value::{SemFn, SemValue};
use super::SemError;
use crate::stlc::SimpleType;

/// A finite base set `{0, …, size-1}`.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub struct Fin(pub usize);

impl Fin {
    pub fn size(self) -> usize {
        self.0
    }
}

/// The finite set `⟦A⟧_Q`, with a cached cardinality and a guarded
/// enumerator.
///
/// Enumeration order: base numerals ascending, products lexicographic (first
/// component most significant), functions as codomain tuples over the domain
/// order (first domain element most significant). The position of a value in
/// this order is its canonical index.
#[derive(Clone)]
pub struct SemDomain(Arc<DomainInner>);

struct DomainInner {
    ty: SimpleType,
    base: Fin,
    guard: u64,
    card: Option<u128>,
    parts: Vec<SemDomain>,
    elems: OnceLock<Arc<[SemValue]>>,
}

fn checked_pow(b: u128, e: u128) -> Option<u128> {
    if b <= 1 {
        return Some(if e == 0 { 1 } else { b });
    }
    let e = u32::try_from(e).ok()?;
    b.checked_pow(e)
}

/// Builds `⟦A⟧_Q`. Never fails: enumeration is what the guard restricts.
pub fn interp_type(ty: &SimpleType, base: Fin, guard: u64) -> SemDomain {
    SemDomain::new(ty, base, guard)
}

impl SemDomain {
    pub fn new(ty: &SimpleType, base: Fin, guard: u64) -> SemDomain {
        let (parts, card) = match ty {
            SimpleType::Base => (Vec::new(), Some(base.0 as u128)),
            SimpleType::Unit => (Vec::new(), Some(1)),
            SimpleType::Arrow(a, b) => {
                let d = SemDomain::new(a, base, guard);
                let c = SemDomain::new(b, base, guard);
                let card = match (c.cardinality(), d.cardinality()) {
                    (Some(cb), Some(ca)) => checked_pow(cb, ca),
                    (Some(0), None) => Some(0),
                    (Some(1), None) => Some(1),
                    _ => None,
                };
                (vec![d, c], card)
            }
            SimpleType::Product(cs) => {
                let parts: Vec<_> = cs.iter().map(|c| SemDomain::new(c, base, guard)).collect();
                let card = parts.iter().try_fold(1u128, |acc, p| {
                    p.cardinality().and_then(|c| acc.checked_mul(c))
                });
                let card = if parts.iter().any(|p| p.cardinality() == Some(0)) {
                    Some(0)
                } else {
                    card
                };
                (parts, card)
            }
        };
        SemDomain(Arc::new(DomainInner {
            ty: ty.clone(),
            base,
            guard,
            card,
            parts,
            elems: OnceLock::new(),
        }))
    }

    pub fn ty(&self) -> &SimpleType {
        &self.0.ty
    }

    pub fn base(&self) -> Fin {
        self.0.base
    }

    pub fn guard(&self) -> u64 {
        self.0.guard
    }

    /// `None` when the cardinality does not fit in 128 bits.
    pub fn cardinality(&self) -> Option<u128> {
        self.0.card
    }

    pub fn is_enumerable(&self) -> bool {
        matches!(self.0.card, Some(c) if c <= self.0.guard as u128)
    }

    fn guard_error(&self) -> SemError {
        SemError::GuardExceeded {
            what: format!("⟦{}⟧ over {} elements", self.0.ty, self.0.base.0),
            cardinality: self.0.card,
            guard: self.0.guard,
        }
    }

    pub(crate) fn check_enumerable(&self) -> Result<usize, SemError> {
        match self.0.card {
            Some(c) if c <= self.0.guard as u128 => Ok(c as usize),
            _ => Err(self.guard_error()),
        }
    }

    /// Domain and codomain of an arrow domain.
    pub fn arrow_parts(&self) -> Option<(&SemDomain, &SemDomain)> {
        match self.0.ty {
            SimpleType::Arrow(..) => Some((&self.0.parts[0], &self.0.parts[1])),
            _ => None,
        }
    }

    pub fn product_parts(&self) -> Option<&[SemDomain]> {
        match self.0.ty {
            SimpleType::Product(_) => Some(&self.0.parts),
            SimpleType::Unit => Some(&[]),
            _ => None,
        }
    }

    /// Every element, in canonical order, or `GuardExceeded`.
    pub fn enumerate(&self) -> Result<Arc<[SemValue]>, SemError> {
        if let Some(e) = self.0.elems.get() {
            return Ok(e.clone());
        }
        let n = self.check_enumerable()?;
        let elems: Vec<SemValue> = (0..n as u128)
            .map(|i| self.element_at_unchecked(i))
            .collect::<Result<_, _>>()?;
        let elems: Arc<[SemValue]> = elems.into();
        Ok(self.0.elems.get_or_init(|| elems).clone())
    }

    /// Element with canonical index `index`.
    pub fn element_at(&self, index: u128) -> Result<SemValue, SemError> {
        match self.0.card {
            Some(c) if index < c => {}
            _ => {
                return Err(SemError::Mismatch(format!(
                    "index {} outside ⟦{}⟧ over {} elements",
                    index, self.0.ty, self.0.base.0
                )))
            }
        }
        if let Some(e) = self.0.elems.get() {
            return Ok(e[index as usize].clone());
        }
        self.element_at_unchecked(index)
    }

    fn element_at_unchecked(&self, index: u128) -> Result<SemValue, SemError> {
        match &self.0.ty {
            SimpleType::Base => Ok(SemValue::Base(index as usize)),
            SimpleType::Unit => Ok(SemValue::Unit),
            SimpleType::Product(_) => {
                let mut rest = index;
                let mut comps = vec![SemValue::Unit; self.0.parts.len()];
                for (k, p) in self.0.parts.iter().enumerate().rev() {
                    let c = p.cardinality().ok_or_else(|| self.guard_error())?;
                    comps[k] = p.element_at(rest % c)?;
                    rest /= c;
                }
                Ok(SemValue::Tuple(comps.into()))
            }
            SimpleType::Arrow(..) => {
                let (dom, cod) = (&self.0.parts[0], &self.0.parts[1]);
                let n = dom.check_enumerable()?;
                let c = cod.cardinality().ok_or_else(|| self.guard_error())?;
                let mut values = vec![SemValue::Unit; n];
                let mut rest = index;
                for k in (0..n).rev() {
                    values[k] = cod.element_at(rest % c.max(1))?;
                    rest /= c.max(1);
                }
                Ok(SemValue::Func(SemFn::table_with_index(
                    dom.clone(),
                    cod.clone(),
                    values,
                    Some(index),
                )))
            }
        }
    }

    /// Canonical index of `v`, which must inhabit this domain.
    pub fn index_of(&self, v: &SemValue) -> Result<u128, SemError> {
        match (&self.0.ty, v) {
            (SimpleType::Base, SemValue::Base(q)) if *q < self.0.base.0 => Ok(*q as u128),
            (SimpleType::Unit, SemValue::Unit) => Ok(0),
            (SimpleType::Product(_), SemValue::Tuple(cs)) if cs.len() == self.0.parts.len() => {
                let mut idx: u128 = 0;
                for (p, c) in self.0.parts.iter().zip(cs.iter()) {
                    let card = p.cardinality().ok_or_else(|| self.guard_error())?;
                    idx = idx
                        .checked_mul(card)
                        .and_then(|x| x.checked_add(p.index_of(c).ok()?))
                        .ok_or_else(|| self.guard_error())?;
                }
                Ok(idx)
            }
            (SimpleType::Arrow(..), SemValue::Func(f)) => {
                if let Some(i) = f.known_index(self) {
                    return Ok(i);
                }
                let (dom, cod) = (&self.0.parts[0], &self.0.parts[1]);
                if self.0.card.is_none() {
                    return Err(self.guard_error());
                }
                let c = cod.cardinality().ok_or_else(|| self.guard_error())?;
                let mut idx: u128 = 0;
                for x in dom.enumerate()?.iter() {
                    let y = f.apply(x)?;
                    idx = idx * c + cod.index_of(&y)?;
                }
                f.remember_index(self, idx);
                Ok(idx)
            }
            _ => Err(SemError::Mismatch(format!(
                "value {} does not inhabit ⟦{}⟧ over {} elements",
                v, self.0.ty, self.0.base.0
            ))),
        }
    }

    /// Same type and base.
    pub fn same_as(&self, other: &SemDomain) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.base == other.0.base && self.0.ty == other.0.ty)
    }
}

impl fmt::Debug for SemDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟦{}⟧_{}", self.0.ty, self.0.base.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_GUARD;

    fn o() -> SimpleType {
        SimpleType::Base
    }

    #[test]
    fn base_cardinality() {
        assert_eq!(
            interp_type(&o(), Fin(5), DEFAULT_GUARD).cardinality(),
            Some(5)
        );
    }

    #[test]
    fn arrow_cardinality() {
        let d = interp_type(&SimpleType::arrow(o(), o()), Fin(2), DEFAULT_GUARD);
        assert_eq!(d.cardinality(), Some(4));
    }

    #[test]
    fn alphabet_cardinality() {
        let oo = SimpleType::arrow(o(), o());
        let sigma = SimpleType::product(vec![oo.clone(), oo]);
        assert_eq!(
            interp_type(&sigma, Fin(2), DEFAULT_GUARD).cardinality(),
            Some(16)
        );
    }

    #[test]
    fn enumeration_is_indexed_and_exhaustive() {
        let ty = SimpleType::arrow(SimpleType::product(vec![o(), o()]), o());
        let d = interp_type(&ty, Fin(2), DEFAULT_GUARD);
        let elems = d.enumerate().unwrap();
        assert_eq!(elems.len(), 16);
        for (i, e) in elems.iter().enumerate() {
            assert_eq!(d.index_of(e).unwrap(), i as u128);
        }
    }

    #[test]
    fn guard_refuses_enumeration_but_keeps_domain() {
        let ty = SimpleType::arrow(SimpleType::arrow(o(), o()), o());
        let d = interp_type(&ty, Fin(3), 100);
        assert_eq!(d.cardinality(), Some(3u128.pow(27)));
        assert!(matches!(d.enumerate(), Err(SemError::GuardExceeded { .. })));
    }

    #[test]
    fn empty_base() {
        let d = interp_type(&SimpleType::arrow(o(), o()), Fin(0), DEFAULT_GUARD);
        assert_eq!(d.cardinality(), Some(1));
        let d = interp_type(&o(), Fin(0), DEFAULT_GUARD);
        assert_eq!(d.enumerate().unwrap().len(), 0);
    }
}
