use crate::clone::{check_clone_laws, FiniteClone, LawOptions, LawReport, Monoid, MonoidAction};

use super::set2::{
    associator, left_unitor_pair, right_unitor_pair, semidirect, semidirect_map, PairMap,
    PointedPair,
};
use super::SignatureError;

/// A monoid `(u, n)` on `(Q, A)` in `(Set², ⋉, (0, 1))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoidObject {
    pub pair: PointedPair,
    /// `(0, 1) → (Q, A)`.
    pub u: PairMap,
    /// `(Q, A) ⋉ (Q, A) → (Q, A)`.
    pub n: PairMap,
}

/// Corruptions of a monoid object built from an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectMutation {
    /// The unit no longer acts as the identity on the first state.
    UnitActs,
    /// One action entry of a non-unit element is changed.
    ActionEntry,
    /// `f : Q → Q` is no longer the identity.
    StatePart,
    /// One product of two non-unit elements is changed.
    Multiplication,
}

impl ObjectMutation {
    pub const ALL: [ObjectMutation; 4] = [
        ObjectMutation::UnitActs,
        ObjectMutation::ActionEntry,
        ObjectMutation::StatePart,
        ObjectMutation::Multiplication,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectMutation::UnitActs => "unit-acts",
            ObjectMutation::ActionEntry => "action-entry",
            ObjectMutation::StatePart => "state-part",
            ObjectMutation::Multiplication => "multiplication",
        }
    }
}

/// The maps `(e, f, g, m)` as tables; binary maps are indexed `[a][x]`.
pub type Decomposition = (usize, Vec<usize>, Vec<Vec<usize>>, Vec<Vec<usize>>);

impl MonoidObject {
    /// `u = (∅, e)`, `n = ([id, g], m)`.
    pub fn from_action(ma: &MonoidAction) -> MonoidObject {
        let m = ma.monoid();
        let pair = PointedPair::new(ma.states(), m.size());
        let u = PairMap {
            source: PointedPair::unit(),
            target: pair,
            states: Vec::new(),
            actions: vec![m.unit()],
        };
        let sq = semidirect(pair, pair);
        let mut states: Vec<usize> = (0..pair.q).collect();
        for a in 0..pair.a {
            for q in 0..pair.q {
                states.push(ma.act(a, q));
            }
        }
        let actions = (0..sq.a).map(|i| m.mul(i / pair.a, i % pair.a)).collect();
        let n = PairMap {
            source: sq,
            target: pair,
            states,
            actions,
        };
        MonoidObject { pair, u, n }
    }

    /// The left unit, right unit and associativity diagrams, with the first
    /// disagreement of each failing law.
    pub fn check_laws(&self) -> Vec<(&'static str, Option<String>)> {
        let p = self.pair;
        let id = PairMap::identity(p);
        let mut out = Vec::new();
        let right = self
            .n
            .after(&semidirect_map(&id, &self.u))
            .after(&right_unitor_pair(p).inverse().expect("unitor"));
        out.push(("right unit", diff(&right, &id)));
        let left = self
            .n
            .after(&semidirect_map(&self.u, &id))
            .after(&left_unitor_pair(p).inverse().expect("unitor"));
        out.push(("left unit", diff(&left, &id)));
        let lhs = self.n.after(&semidirect_map(&self.n, &id));
        let rhs = self
            .n
            .after(&semidirect_map(&id, &self.n))
            .after(&associator(p, p, p));
        out.push(("associativity", diff(&lhs, &rhs)));
        out
    }

    pub fn laws_hold(&self) -> bool {
        self.check_laws().iter().all(|(_, w)| w.is_none())
    }

    /// `e : 1 → A`, `f : Q → Q`, `g : A × Q → Q`, `m : A × A → A`.
    pub fn decompose(&self) -> Decomposition {
        let p = self.pair;
        let e = self.u.actions[0];
        let f = self.n.states[..p.q].to_vec();
        let g = (0..p.a)
            .map(|a| (0..p.q).map(|q| self.n.states[p.q + a * p.q + q]).collect())
            .collect();
        let m = (0..p.a)
            .map(|a| (0..p.a).map(|b| self.n.actions[a * p.a + b]).collect())
            .collect();
        (e, f, g, m)
    }

    /// Reads the action back, checking the recovered laws.
    pub fn to_action(&self) -> Result<MonoidAction, SignatureError> {
        let (e, _, g, m) = self.decompose();
        let monoid = Monoid::new(self.pair.a, e, m)?;
        Ok(MonoidAction::new(monoid, self.pair.q, g)?)
    }

    pub fn mutate(&self, which: ObjectMutation) -> MonoidObject {
        let mut o = self.clone();
        let p = self.pair;
        let e = self.u.actions[0];
        let bump = |v: usize, k: usize| (v + 1) % k.max(1);
        match which {
            ObjectMutation::UnitActs => {
                let i = p.q + e * p.q;
                o.n.states[i] = bump(o.n.states[i], p.q);
            }
            ObjectMutation::ActionEntry => {
                if let Some(a) = (0..p.a).find(|&a| a != e) {
                    let i = p.q + a * p.q;
                    o.n.states[i] = bump(o.n.states[i], p.q);
                }
            }
            ObjectMutation::StatePart => {
                o.n.states[0] = bump(o.n.states[0], p.q);
            }
            ObjectMutation::Multiplication => {
                if let Some(a) = (0..p.a).find(|&a| a != e) {
                    let i = a * p.a + a;
                    o.n.actions[i] = bump(o.n.actions[i], p.a);
                }
            }
        }
        o
    }
}

fn diff(a: &PairMap, b: &PairMap) -> Option<String> {
    if let Some(i) = (0..a.states.len()).find(|&i| a.states[i] != b.states[i]) {
        return Some(format!(
            "state {}: {} against {}",
            i, a.states[i], b.states[i]
        ));
    }
    (0..a.actions.len())
        .find(|&i| a.actions[i] != b.actions[i])
        .map(|i| format!("element {}: {} against {}", i, a.actions[i], b.actions[i]))
}

/// The round trip action → monoid object → `(e, f, g, m)` → action.
#[derive(Debug, Clone)]
pub struct ActionReport {
    pub laws: Vec<(String, Option<String>)>,
    pub f_is_identity: bool,
    pub action_recovered: bool,
    pub monoid_recovered: bool,
    pub clone_laws: LawReport,
    pub passed: bool,
}

pub fn action_roundtrip(
    ma: &MonoidAction,
    opts: &LawOptions,
) -> Result<ActionReport, SignatureError> {
    ma.check()?;
    let obj = MonoidObject::from_action(ma);
    let laws: Vec<(String, Option<String>)> = obj
        .check_laws()
        .into_iter()
        .map(|(l, w)| (l.to_string(), w))
        .collect();
    let (e, f, g, m) = obj.decompose();
    let f_is_identity = f.iter().enumerate().all(|(i, &x)| i == x);
    let action_recovered = g.as_slice() == ma.table();
    let monoid_recovered = e == ma.monoid().unit() && m.as_slice() == ma.monoid().table();
    let clone_laws = check_clone_laws(&FiniteClone::action(ma)?, opts);
    let passed = laws.iter().all(|(_, w)| w.is_none())
        && f_is_identity
        && action_recovered
        && monoid_recovered
        && clone_laws.passed;
    Ok(ActionReport {
        laws,
        f_is_identity,
        action_recovered,
        monoid_recovered,
        clone_laws,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::CloneError;

    fn corpus() -> Vec<MonoidAction> {
        let absorbing = Monoid::new(2, 0, vec![vec![0, 1], vec![1, 1]]).unwrap();
        let rot3 = MonoidAction::new(
            Monoid::cyclic(3),
            3,
            (0..3)
                .map(|k| (0..3).map(|q| (q + k) % 3).collect())
                .collect(),
        )
        .unwrap();
        vec![
            MonoidAction::flip(),
            rot3,
            MonoidAction::new(absorbing, 2, vec![vec![0, 1], vec![0, 0]]).unwrap(),
            MonoidAction::new(Monoid::cyclic(2), 3, vec![vec![0, 1, 2], vec![1, 0, 2]]).unwrap(),
        ]
    }

    fn opts() -> LawOptions {
        LawOptions {
            arity_bound: 2,
            ..LawOptions::default()
        }
    }

    #[test]
    fn trivial_action_round_trips() {
        for q in 0..=3 {
            let r = action_roundtrip(&MonoidAction::trivial(q), &opts()).unwrap();
            assert!(r.passed, "{:?}", r.laws);
        }
    }

    #[test]
    fn corpus_round_trips_exactly() {
        for ma in corpus() {
            let r = action_roundtrip(&ma, &opts()).unwrap();
            assert!(r.passed);
            let back = MonoidObject::from_action(&ma).to_action().unwrap();
            assert_eq!(back, ma);
        }
    }

    #[test]
    fn every_mutation_breaks_a_law() {
        for ma in corpus() {
            let obj = MonoidObject::from_action(&ma);
            assert!(obj.laws_hold());
            for m in ObjectMutation::ALL {
                let bad = obj.mutate(m);
                assert!(!bad.laws_hold(), "{} survived on {:?}", m.name(), ma);
            }
        }
    }

    #[test]
    fn broken_unit_is_named() {
        let bad = MonoidAction::unchecked(Monoid::cyclic(2), 2, vec![vec![1, 0], vec![1, 0]]);
        match action_roundtrip(&bad, &opts()) {
            Err(SignatureError::Clone(CloneError::ActionLawViolation(w))) => {
                assert!(w.contains("unit law"))
            }
            other => panic!("{:?}", other.map(|r| r.passed)),
        }
    }
}
