//! Finite-set semantics of types and terms, and logical relations between
//! finite base sets.

mod domain;
mod interp;
mod relation;
mod value;

pub use domain::{interp_type, Fin, SemDomain};
pub use interp::{interp_closed, interp_term};
pub use relation::{
    all_relations, fundamental_lemma_check, rel_member, FinRelation, RelTable, RelationChecker,
    RELATION_ENUM_LIMIT,
};
pub use value::{SemFn, SemValue};

use crate::stlc::{SimpleType, StlcError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemError {
    #[error("guard exceeded: {what} has {} elements, guard is {guard}", fmt_card(.cardinality))]
    GuardExceeded {
        what: String,
        cardinality: Option<u128>,
        guard: u64,
    },
    #[error("semantic mismatch: {0}")]
    Mismatch(String),
    #[error("invalid relation: {0}")]
    Relation(String),
    #[error(transparent)]
    Type(#[from] StlcError),
}

fn fmt_card(c: &Option<u128>) -> String {
    match c {
        Some(c) => c.to_string(),
        None => "more than 2^128".into(),
    }
}

/// Extensional equality in `⟦A⟧_Q`.
pub fn sem_equal(
    ty: &SimpleType,
    base: Fin,
    v: &SemValue,
    w: &SemValue,
    guard: u64,
) -> Result<bool, SemError> {
    sem_equal_in(&SemDomain::new(ty, base, guard), v, w)
}

/// Extensional equality against an already built domain.
pub fn sem_equal_in(dom: &SemDomain, v: &SemValue, w: &SemValue) -> Result<bool, SemError> {
    match (v, w) {
        (SemValue::Base(a), SemValue::Base(b)) => Ok(a == b),
        (SemValue::Unit, SemValue::Unit) => Ok(true),
        (SemValue::Tuple(xs), SemValue::Tuple(ys)) => {
            let parts = dom.product_parts().ok_or_else(|| {
                SemError::Mismatch(format!("tuple in non-product domain {:?}", dom))
            })?;
            if xs.len() != parts.len() || ys.len() != parts.len() {
                return Err(SemError::Mismatch(
                    "tuple length differs from its type".into(),
                ));
            }
            for ((x, y), p) in xs.iter().zip(ys.iter()).zip(parts) {
                if !sem_equal_in(p, x, y)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        (SemValue::Func(f), SemValue::Func(g)) => {
            if let (Some(i), Some(j)) = (f.known_index(dom), g.known_index(dom)) {
                return Ok(i == j);
            }
            let (d, c) = dom.arrow_parts().ok_or_else(|| {
                SemError::Mismatch(format!("function in non-arrow domain {:?}", dom))
            })?;
            for x in d.enumerate()?.iter() {
                if !sem_equal_in(c, &f.apply(x)?, &g.apply(x)?)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Err(SemError::Mismatch(format!(
            "{} and {} have different shapes",
            v, w
        ))),
    }
}

/// Report form of a semantic value: its canonical index when the domain is
/// small enough, otherwise the graph observed so far.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SerializedValue {
    pub ty: String,
    pub base: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensional: Option<Vec<(String, String)>>,
}

pub fn serialize_value(dom: &SemDomain, v: &SemValue) -> SerializedValue {
    let index = if dom.cardinality().is_some() {
        dom.index_of(v).ok()
    } else {
        None
    };
    let intensional = match (index, v) {
        (None, SemValue::Func(f)) => Some(f.observed_graph()),
        _ => None,
    };
    SerializedValue {
        ty: dom.ty().to_string(),
        base: dom.base().0,
        index: index.map(|i| i.to_string()),
        intensional,
    }
}

/// Inverse of [`serialize_value`] for indexed values.
pub fn deserialize_value(
    s: &SerializedValue,
    guard: u64,
) -> Result<(SemDomain, SemValue), SemError> {
    let ty = crate::stlc::parse_type(&s.ty)?;
    let dom = SemDomain::new(&ty, Fin(s.base), guard);
    let idx: u128 = s
        .index
        .as_deref()
        .ok_or_else(|| SemError::Mismatch("intensional values cannot be read back".into()))?
        .parse()
        .map_err(|e| SemError::Mismatch(format!("bad index: {}", e)))?;
    let v = dom.element_at(idx)?;
    Ok((dom, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_GUARD;
    use proptest::prelude::*;

    fn small_type() -> impl Strategy<Value = SimpleType> {
        let leaf = prop_oneof![Just(SimpleType::Base), Just(SimpleType::Unit)];
        leaf.prop_recursive(2, 6, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SimpleType::arrow(a, b)),
                proptest::collection::vec(inner, 0..3).prop_map(SimpleType::product),
            ]
        })
    }

    proptest! {
        #[test]
        fn cardinality_of_arrows_is_a_power(a in small_type(), b in small_type(), q in 0usize..3) {
            let da = interp_type(&a, Fin(q), DEFAULT_GUARD);
            let db = interp_type(&b, Fin(q), DEFAULT_GUARD);
            let dab = interp_type(&SimpleType::arrow(a, b), Fin(q), DEFAULT_GUARD);
            if let (Some(ca), Some(cb)) = (da.cardinality(), db.cardinality()) {
                if let Some(cab) = dab.cardinality() {
                    prop_assert_eq!(Some(cab), u32::try_from(ca).ok().and_then(|e| cb.checked_pow(e)).or(if cb <= 1 { Some(cb) } else { None }));
                }
            }
        }

        #[test]
        fn denotation_is_invariant_under_normalization((t, ty) in crate::stlc::testgen::closed_term(), q in 1usize..3) {
            let n = crate::stlc::normalize(&crate::stlc::TypingContext::new(), &t).unwrap();
            if let (Ok(v), Ok(w)) = (interp_closed(&t, Fin(q), DEFAULT_GUARD), interp_closed(&n, Fin(q), DEFAULT_GUARD)) {
                if let Ok(eq) = sem_equal(&ty, Fin(q), &v, &w, DEFAULT_GUARD) {
                    prop_assert!(eq);
                }
            }
        }

        #[test]
        fn serialization_round_trips(a in small_type(), q in 1usize..3, seed in any::<u64>()) {
            let d = interp_type(&a, Fin(q), DEFAULT_GUARD);
            if let Some(c) = d.cardinality().filter(|c| *c > 0) {
                let i = seed as u128 % c;
                let v = d.element_at(i).unwrap();
                let s = serialize_value(&d, &v);
                let (d2, v2) = deserialize_value(&s, DEFAULT_GUARD).unwrap();
                prop_assert_eq!(d2.index_of(&v2).unwrap(), i);
            }
        }
    }

    #[test]
    fn constant_functions_differ() {
        let oo = SimpleType::arrow(SimpleType::Base, SimpleType::Base);
        let d = interp_type(&oo, Fin(2), DEFAULT_GUARD);
        let c0 = d.element_at(0).unwrap();
        let c1 = d.element_at(3).unwrap();
        assert!(!sem_equal(&oo, Fin(2), &c0, &c1, DEFAULT_GUARD).unwrap());
        assert!(sem_equal(&oo, Fin(2), &c0, &c0, DEFAULT_GUARD).unwrap());
    }
}
