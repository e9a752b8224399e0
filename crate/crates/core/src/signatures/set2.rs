use std::fmt;

use super::{
    check_bijection, compose_signatures, functions, CompElem, SigElem, Signature, SignatureError,
};

/// An object `(Q, A)` of `Set²`, both finite.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub struct PointedPair {
    pub q: usize,
    pub a: usize,
}

impl PointedPair {
    pub fn new(q: usize, a: usize) -> PointedPair {
        PointedPair { q, a }
    }

    /// The monoidal unit `(0, 1)`.
    pub fn unit() -> PointedPair {
        PointedPair { q: 0, a: 1 }
    }
}

impl fmt::Display for PointedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.a)
    }
}

/// `(Q, A) ⋉ (R, B) = (Q + A × R, A × B)`.
pub fn semidirect(p: PointedPair, r: PointedPair) -> PointedPair {
    PointedPair {
        q: p.q + p.a * r.q,
        a: p.a * r.a,
    }
}

/// A state of `(Q, A) ⋉ (R, B)`: an element of `Q` or a pair in `A × R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemidirectState {
    Left(usize),
    Pair(usize, usize),
}

impl SemidirectState {
    pub fn index(self, p: PointedPair, r: PointedPair) -> usize {
        match self {
            SemidirectState::Left(q) => q,
            SemidirectState::Pair(a, x) => p.q + a * r.q + x,
        }
    }

    pub fn from_index(p: PointedPair, r: PointedPair, i: usize) -> SemidirectState {
        if i < p.q {
            SemidirectState::Left(i)
        } else {
            let k = i - p.q;
            SemidirectState::Pair(k / r.q, k % r.q)
        }
    }
}

/// An element `(a, b)` of `A × B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SemidirectAction(pub usize, pub usize);

impl SemidirectAction {
    pub fn index(self, _p: PointedPair, r: PointedPair) -> usize {
        self.0 * r.a + self.1
    }

    pub fn from_index(_p: PointedPair, r: PointedPair, i: usize) -> SemidirectAction {
        SemidirectAction(i / r.a, i % r.a)
    }
}

/// A morphism of `Set²`: a pair of functions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairMap {
    pub source: PointedPair,
    pub target: PointedPair,
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
}

impl PairMap {
    pub fn new(
        source: PointedPair,
        target: PointedPair,
        states: Vec<usize>,
        actions: Vec<usize>,
    ) -> Result<PairMap, SignatureError> {
        let ok = states.len() == source.q
            && actions.len() == source.a
            && states.iter().all(|&s| s < target.q)
            && actions.iter().all(|&a| a < target.a);
        if !ok {
            return Err(SignatureError::NotAnElement(format!(
                "pair of tables {:?} {:?} from {} to {}",
                states, actions, source, target
            )));
        }
        Ok(PairMap {
            source,
            target,
            states,
            actions,
        })
    }

    pub fn identity(p: PointedPair) -> PairMap {
        PairMap {
            source: p,
            target: p,
            states: (0..p.q).collect(),
            actions: (0..p.a).collect(),
        }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &PairMap) -> PairMap {
        PairMap {
            source: first.source,
            target: self.target,
            states: first.states.iter().map(|&s| self.states[s]).collect(),
            actions: first.actions.iter().map(|&a| self.actions[a]).collect(),
        }
    }

    pub fn inverse(&self) -> Option<PairMap> {
        if self.source != self.target
            && (self.source.q != self.target.q || self.source.a != self.target.a)
        {
            return None;
        }
        let mut states = vec![usize::MAX; self.target.q];
        for (i, &s) in self.states.iter().enumerate() {
            if states[s] != usize::MAX {
                return None;
            }
            states[s] = i;
        }
        let mut actions = vec![usize::MAX; self.target.a];
        for (i, &a) in self.actions.iter().enumerate() {
            if actions[a] != usize::MAX {
                return None;
            }
            actions[a] = i;
        }
        Some(PairMap {
            source: self.target,
            target: self.source,
            states,
            actions,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self.states.iter().enumerate().all(|(i, &s)| i == s)
            && self.actions.iter().enumerate().all(|(i, &a)| i == a)
    }
}

/// `φ ⋉ ψ`: `q ↦ φ(q)`, `(a, r) ↦ (φ(a), ψ(r))`, `(a, b) ↦ (φ(a), ψ(b))`.
pub fn semidirect_map(phi: &PairMap, psi: &PairMap) -> PairMap {
    let (p, r) = (phi.source, psi.source);
    let (p2, r2) = (phi.target, psi.target);
    let src = semidirect(p, r);
    let states = (0..src.q)
        .map(|i| match SemidirectState::from_index(p, r, i) {
            SemidirectState::Left(q) => SemidirectState::Left(phi.states[q]),
            SemidirectState::Pair(a, x) => SemidirectState::Pair(phi.actions[a], psi.states[x]),
        })
        .map(|s| s.index(p2, r2))
        .collect();
    let actions = (0..src.a)
        .map(|i| {
            let SemidirectAction(a, b) = SemidirectAction::from_index(p, r, i);
            SemidirectAction(phi.actions[a], psi.actions[b]).index(p2, r2)
        })
        .collect();
    PairMap {
        source: src,
        target: semidirect(p2, r2),
        states,
        actions,
    }
}

/// `((P ⋉ R) ⋉ S) → (P ⋉ (R ⋉ S))`.
pub fn associator(p: PointedPair, r: PointedPair, s: PointedPair) -> PairMap {
    let pr = semidirect(p, r);
    let rs = semidirect(r, s);
    let src = semidirect(pr, s);
    let tgt = semidirect(p, rs);
    let states = (0..src.q)
        .map(|i| match SemidirectState::from_index(pr, s, i) {
            SemidirectState::Left(j) => match SemidirectState::from_index(p, r, j) {
                SemidirectState::Left(q) => SemidirectState::Left(q),
                SemidirectState::Pair(a, x) => {
                    SemidirectState::Pair(a, SemidirectState::Left(x).index(r, s))
                }
            },
            SemidirectState::Pair(ab, z) => {
                let SemidirectAction(a, b) = SemidirectAction::from_index(p, r, ab);
                SemidirectState::Pair(a, SemidirectState::Pair(b, z).index(r, s))
            }
        })
        .map(|st| st.index(p, rs))
        .collect();
    let actions = (0..src.a)
        .map(|i| {
            let SemidirectAction(ab, c) = SemidirectAction::from_index(pr, s, i);
            let SemidirectAction(a, b) = SemidirectAction::from_index(p, r, ab);
            SemidirectAction(a, SemidirectAction(b, c).index(r, s)).index(p, rs)
        })
        .collect();
    PairMap {
        source: src,
        target: tgt,
        states,
        actions,
    }
}

/// `(0, 1) ⋉ P → P`.
pub fn left_unitor_pair(p: PointedPair) -> PairMap {
    let u = PointedPair::unit();
    let src = semidirect(u, p);
    let states = (0..src.q)
        .map(|i| match SemidirectState::from_index(u, p, i) {
            SemidirectState::Pair(_, x) => x,
            SemidirectState::Left(_) => unreachable!("the unit has no states"),
        })
        .collect();
    let actions = (0..src.a)
        .map(|i| SemidirectAction::from_index(u, p, i).1)
        .collect();
    PairMap {
        source: src,
        target: p,
        states,
        actions,
    }
}

/// `P ⋉ (0, 1) → P`.
pub fn right_unitor_pair(p: PointedPair) -> PairMap {
    let u = PointedPair::unit();
    let src = semidirect(p, u);
    let states = (0..src.q)
        .map(|i| match SemidirectState::from_index(p, u, i) {
            SemidirectState::Left(q) => q,
            SemidirectState::Pair(..) => unreachable!("the unit has no states"),
        })
        .collect();
    let actions = (0..src.a)
        .map(|i| SemidirectAction::from_index(p, u, i).0)
        .collect();
    PairMap {
        source: src,
        target: p,
        states,
        actions,
    }
}

/// `∐_{q∈Q} y₀ + ∐_{a∈A} y₁`, constants first.
pub fn setsig(p: PointedPair) -> Signature {
    let mut s = vec![0; p.q];
    s.extend(std::iter::repeat_n(1, p.a));
    Signature::Coproduct(s)
}

/// `(X₀, X₁)`, the right adjoint of `setsig`.
pub fn sigset(x: &Signature) -> Result<PointedPair, SignatureError> {
    let size = |n| {
        x.size(n)
            .and_then(|s| usize::try_from(s).ok())
            .ok_or_else(|| {
                SignatureError::Unsupported(format!("{} is not tabulated at arity {}", x, n))
            })
    };
    Ok(PointedPair {
        q: size(0)?,
        a: size(1)?,
    })
}

/// `setsig(0, 1) = y₁` as signatures, with the identity bijection checked.
pub fn setsig_unit_iso(bound: usize) -> Result<(), SignatureError> {
    let s = setsig(PointedPair::unit());
    let y1 = Signature::representable(1);
    if s != y1 {
        return Err(SignatureError::Law(format!("setsig(0, 1) is {}", s)));
    }
    for n in 0..=bound {
        check_bijection(
            &s.elements(n)?,
            &y1.elements(n)?,
            |e| Ok(e.clone()),
            |e| Ok(e.clone()),
        )?;
    }
    Ok(())
}

/// Intermediate stages of the monoidality bijection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Mid {
    /// `q` tagging an element of `y₀ ∘ S` or `y₀`.
    Const(usize, Option<CompElem>),
    /// `a` tagging an element of `y₁ ∘ S` or of `S`.
    Unary(usize, Result<CompElem, SigElem>),
}

impl fmt::Display for Mid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mid::Const(q, Some(e)) => write!(f, "q{}:{}", q, e),
            Mid::Const(q, None) => write!(f, "q{}", q),
            Mid::Unary(a, Ok(e)) => write!(f, "a{}:{}", a, e),
            Mid::Unary(a, Err(e)) => write!(f, "a{}:{}", a, e),
        }
    }
}

/// The chain
/// `setsig(P) ∘ setsig(R) ≅ ∐_q y₀∘setsig(R) + ∐_a y₁∘setsig(R) ≅ ∐_q y₀ + ∐_a setsig(R) ≅ setsig(P ⋉ R)`,
/// each step checked bijective and natural at arities `≤ bound`.
pub fn setsig_coherence(
    p: PointedPair,
    r: PointedPair,
    bound: usize,
) -> Result<(), SignatureError> {
    let sp = setsig(p);
    let sr = setsig(r);
    let comp = compose_signatures(&sp, &sr)?;
    let y0s = compose_signatures(&Signature::representable(0), &sr)?;
    let y1s = compose_signatures(&Signature::representable(1), &sr)?;
    let target = setsig(semidirect(p, r));
    let pr = semidirect(p, r);

    let step1 = |e: &CompElem| -> Result<Mid, SignatureError> {
        let inner = CompElem {
            outer: 0,
            inner: e.inner.clone(),
        };
        Ok(if e.outer < p.q {
            Mid::Const(e.outer, Some(inner))
        } else {
            Mid::Unary(e.outer - p.q, Ok(inner))
        })
    };
    let step1_inv = |m: &Mid| -> Result<CompElem, SignatureError> {
        match m {
            Mid::Const(q, Some(e)) => Ok(CompElem {
                outer: *q,
                inner: e.inner.clone(),
            }),
            Mid::Unary(a, Ok(e)) => Ok(CompElem {
                outer: p.q + a,
                inner: e.inner.clone(),
            }),
            other => Err(SignatureError::NotAnElement(other.to_string())),
        }
    };
    let step2 = |m: &Mid| -> Result<Mid, SignatureError> {
        match m {
            Mid::Const(q, Some(_)) => Ok(Mid::Const(*q, None)),
            Mid::Unary(a, Ok(e)) => Ok(Mid::Unary(*a, Err(super::left_unit(e)))),
            other => Err(SignatureError::NotAnElement(other.to_string())),
        }
    };
    let step2_inv = |m: &Mid| -> Result<Mid, SignatureError> {
        match m {
            Mid::Const(q, None) => Ok(Mid::Const(
                *q,
                Some(super::left_absorb_inv(&SigElem::new(0, Vec::new()))),
            )),
            Mid::Unary(a, Err(x)) => Ok(Mid::Unary(*a, Ok(super::left_unit_inv(x)))),
            other => Err(SignatureError::NotAnElement(other.to_string())),
        }
    };
    let step3 = |m: &Mid| -> Result<SigElem, SignatureError> {
        match m {
            Mid::Const(q, None) => Ok(SigElem::new(*q, Vec::new())),
            Mid::Unary(a, Err(x)) if x.summand < r.q => Ok(SigElem::new(
                SemidirectState::Pair(*a, x.summand).index(p, r),
                Vec::new(),
            )),
            Mid::Unary(a, Err(x)) => {
                let b = x.summand - r.q;
                Ok(SigElem::new(
                    pr.q + SemidirectAction(*a, b).index(p, r),
                    x.map.clone(),
                ))
            }
            other => Err(SignatureError::NotAnElement(other.to_string())),
        }
    };
    let step3_inv = |e: &SigElem| -> Result<Mid, SignatureError> {
        if e.summand < pr.q {
            match SemidirectState::from_index(p, r, e.summand) {
                SemidirectState::Left(q) => Ok(Mid::Const(q, None)),
                SemidirectState::Pair(a, x) => Ok(Mid::Unary(a, Err(SigElem::new(x, Vec::new())))),
            }
        } else {
            let SemidirectAction(a, b) = SemidirectAction::from_index(p, r, e.summand - pr.q);
            Ok(Mid::Unary(a, Err(SigElem::new(r.q + b, e.map.clone()))))
        }
    };

    for n in 0..=bound {
        let src = comp.comp_elements(n);
        let mid1: Vec<Mid> = (0..p.q)
            .flat_map(|q| {
                y0s.comp_elements(n)
                    .into_iter()
                    .map(move |e| Mid::Const(q, Some(e)))
            })
            .chain((0..p.a).flat_map(|a| {
                y1s.comp_elements(n)
                    .into_iter()
                    .map(move |e| Mid::Unary(a, Ok(e)))
            }))
            .collect();
        let sr_n = sr.elements(n)?;
        let mid2: Vec<Mid> = (0..p.q)
            .map(|q| Mid::Const(q, None))
            .chain((0..p.a).flat_map(|a| sr_n.iter().cloned().map(move |x| Mid::Unary(a, Err(x)))))
            .collect();
        let tgt = target.elements(n)?;
        check_bijection(&src, &mid1, step1, step1_inv)?;
        check_bijection(&mid1, &mid2, step2, step2_inv)?;
        check_bijection(&mid2, &tgt, step3, step3_inv)?;
        for m in 0..=bound {
            for f in functions(n, m) {
                for e in &src {
                    let lhs = step3(&step2(&step1(&e.act(&f))?)?)?;
                    let rhs = step3(&step2(&step1(e)?)?)?.act(&f);
                    if lhs != rhs {
                        return Err(SignatureError::Law(format!(
                            "monoidality iso is not natural at {} under {:?}",
                            e, f
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Both sides of the adjunction `setsig ⊣ sigset` at `(P, X)`, counted by
/// brute force, with the count for `(X₀, X₀ + X₁)` alongside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct AdjunctionCounts {
    pub sig_homs: u128,
    pub set2_homs: u128,
    pub displayed_formula: u128,
}

/// Natural transformations `setsig(P) → X` on arities `≤ bound`, and pair
/// maps `P → sigset(X)`, both enumerated.
pub fn adjunction_counts(
    p: PointedPair,
    x: &Signature,
    bound: usize,
    guard: u64,
) -> Result<AdjunctionCounts, SignatureError> {
    let s = setsig(p).tabulate(bound)?;
    let t = x.tabulate(bound)?;
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut count = 0u128;
    let mut budget = guard;
    nat_search(&s, &t, bound, &mut comps, &mut count, &mut budget)?;
    let target = sigset(x)?;
    let enumerate = |dom: usize, cod: usize| functions(dom, cod).len() as u128;
    let set2 = enumerate(p.q, target.q) * enumerate(p.a, target.a);
    let wide = (target.q as u128).pow(p.q as u32) * ((target.q + target.a) as u128).pow(p.a as u32);
    Ok(AdjunctionCounts {
        sig_homs: count,
        set2_homs: set2,
        displayed_formula: wide,
    })
}

fn nat_search(
    s: &super::TabulatedSignature,
    t: &super::TabulatedSignature,
    bound: usize,
    comps: &mut Vec<Vec<usize>>,
    count: &mut u128,
    budget: &mut u64,
) -> Result<(), SignatureError> {
    let n = comps.len();
    if n > bound {
        *count += 1;
        return Ok(());
    }
    let (sn, tn) = (s.size(n).unwrap_or(0), t.size(n).unwrap_or(0));
    for alpha in functions(sn, tn) {
        if *budget == 0 {
            return Err(SignatureError::GuardExceeded {
                what: "natural transformation search".into(),
                size: u128::MAX,
                guard: 0,
            });
        }
        *budget -= 1;
        let consistent = (0..=n).all(|m| {
            let am: &[usize] = if m == n { &alpha } else { &comps[m] };
            let forward = functions(m, n).into_iter().all(|f| {
                (0..s.size(m).unwrap_or(0))
                    .all(|x| s.act(n, &f, x).map(|y| alpha[y]) == t.act(n, &f, am[x]))
            });
            let backward = functions(n, m)
                .into_iter()
                .all(|f| (0..sn).all(|x| s.act(m, &f, x).map(|y| am[y]) == t.act(m, &f, alpha[x])));
            forward && backward
        });
        if consistent {
            comps.push(alpha);
            nat_search(s, t, bound, comps, count, budget)?;
            comps.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(max: usize) -> Vec<PointedPair> {
        (0..=max)
            .flat_map(|q| (0..=max).map(move |a| PointedPair::new(q, a)))
            .collect()
    }

    #[test]
    fn semidirect_units() {
        for p in pairs(3) {
            assert_eq!(semidirect(p, PointedPair::unit()), p);
            assert_eq!(semidirect(PointedPair::unit(), p), p);
            assert!(left_unitor_pair(p).inverse().is_some());
            assert!(right_unitor_pair(p).inverse().is_some());
        }
    }

    #[test]
    fn associator_is_bijective() {
        for p in pairs(2) {
            for r in pairs(2) {
                for s in pairs(2) {
                    let l = semidirect(semidirect(p, r), s);
                    let rr = semidirect(p, semidirect(r, s));
                    assert_eq!(l, rr);
                    let a = associator(p, r, s);
                    let inv = a.inverse().unwrap();
                    assert!(inv.after(&a).is_identity());
                }
            }
        }
    }

    #[test]
    fn state_labels_round_trip() {
        let (p, r) = (PointedPair::new(2, 3), PointedPair::new(2, 2));
        let s = semidirect(p, r);
        for i in 0..s.q {
            assert_eq!(SemidirectState::from_index(p, r, i).index(p, r), i);
        }
        for i in 0..s.a {
            assert_eq!(SemidirectAction::from_index(p, r, i).index(p, r), i);
        }
    }

    #[test]
    fn semidirect_map_is_functorial() {
        let p = PointedPair::new(2, 2);
        let phi = PairMap::new(p, p, vec![1, 0], vec![0, 0]).unwrap();
        let psi = PairMap::new(p, p, vec![0, 0], vec![1, 0]).unwrap();
        let lhs = semidirect_map(&phi.after(&psi), &psi.after(&phi));
        let rhs = semidirect_map(&phi, &psi).after(&semidirect_map(&psi, &phi));
        assert_eq!(lhs, rhs);
        assert!(semidirect_map(&PairMap::identity(p), &PairMap::identity(p)).is_identity());
    }

    #[test]
    fn setsig_examples() {
        assert_eq!(setsig(PointedPair::new(0, 1)), Signature::representable(1));
        setsig_unit_iso(3).unwrap();
        assert_eq!(
            sigset(&Signature::representable(1)).unwrap(),
            PointedPair::new(0, 1)
        );
    }

    #[test]
    fn setsig_is_monoidal() {
        for p in pairs(2) {
            for r in pairs(2) {
                setsig_coherence(p, r, 3).unwrap_or_else(|e| panic!("{} {}: {}", p, r, e));
                let comp = compose_signatures(&setsig(p), &setsig(r)).unwrap();
                let target = setsig(semidirect(p, r));
                for n in 0..=3 {
                    assert_eq!(comp.result().size(n), target.size(n));
                }
            }
        }
    }

    #[test]
    fn adjunction_counts_agree() {
        let targets = [
            Signature::representable(0),
            Signature::representable(1),
            Signature::Coproduct(vec![0, 1]),
            Signature::Coproduct(vec![0, 0, 1]),
            Signature::representable(2),
        ];
        for p in pairs(2) {
            for x in &targets {
                let c = adjunction_counts(p, x, 2, 1 << 24).unwrap();
                assert_eq!(c.sig_homs, c.set2_homs, "{} {}", p, x);
            }
        }
    }

    #[test]
    fn displayed_right_adjoint_overcounts() {
        // X = y0 at (1, 1): one natural transformation, but 1 · 2 pairs of
        // maps into (X0, X0 + X1)
        let c = adjunction_counts(
            PointedPair::new(1, 1),
            &Signature::representable(0),
            2,
            1 << 20,
        )
        .unwrap();
        assert_eq!(c.sig_homs, 1);
        assert_eq!(c.set2_homs, 1);
        assert_eq!(c.displayed_formula, 2);
    }
}
