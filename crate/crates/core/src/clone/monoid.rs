use super::CloneError;

/// A finite monoid given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Monoid {
    size: usize,
    unit: usize,
    mul: Vec<Vec<usize>>,
}

impl Monoid {
    pub fn new(size: usize, unit: usize, mul: Vec<Vec<usize>>) -> Result<Monoid, CloneError> {
        let m = Monoid { size, unit, mul };
        m.check()?;
        Ok(m)
    }

    pub fn trivial() -> Monoid {
        Monoid {
            size: 1,
            unit: 0,
            mul: vec![vec![0]],
        }
    }

    /// `Z/k` under addition.
    pub fn cyclic(k: usize) -> Monoid {
        Monoid {
            size: k,
            unit: 0,
            mul: (0..k)
                .map(|a| (0..k).map(|b| (a + b) % k).collect())
                .collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn check(&self) -> Result<(), CloneError> {
        let bad = |law: &str, w: String| {
            Err(CloneError::ActionLawViolation(format!(
                "monoid {}: {}",
                law, w
            )))
        };
        if self.unit >= self.size
            || self.mul.len() != self.size
            || self.mul.iter().any(|r| r.len() != self.size)
        {
            return bad(
                "shape",
                format!(
                    "table is not {}x{} with unit in range",
                    self.size, self.size
                ),
            );
        }
        if let Some(v) = self.mul.iter().flatten().find(|&&v| v >= self.size) {
            return bad("closure", format!("entry {} out of range", v));
        }
        for a in 0..self.size {
            if self.mul(self.unit, a) != a || self.mul(a, self.unit) != a {
                return bad("unit", format!("unit fails at {}", a));
            }
            for b in 0..self.size {
                for c in 0..self.size {
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return bad(
                            "associativity",
                            format!("({}{}){} differs from {}({}{})", a, b, c, a, b, c),
                        );
                    }
                }
            }
        }
        Ok(())
    }
}

/// A left action `M × Q → Q`, stored as `act[m][q]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct MonoidAction {
    monoid: Monoid,
    states: usize,
    act: Vec<Vec<usize>>,
}

impl MonoidAction {
    pub fn new(
        monoid: Monoid,
        states: usize,
        act: Vec<Vec<usize>>,
    ) -> Result<MonoidAction, CloneError> {
        let a = Self::unchecked(monoid, states, act);
        a.check()?;
        Ok(a)
    }

    /// Builds the tables without checking the action laws.
    pub fn unchecked(monoid: Monoid, states: usize, act: Vec<Vec<usize>>) -> MonoidAction {
        MonoidAction {
            monoid,
            states,
            act,
        }
    }

    /// `Z/2` flipping `{0, 1}`.
    pub fn flip() -> MonoidAction {
        MonoidAction {
            monoid: Monoid::cyclic(2),
            states: 2,
            act: vec![vec![0, 1], vec![1, 0]],
        }
    }

    pub fn trivial(states: usize) -> MonoidAction {
        MonoidAction {
            monoid: Monoid::trivial(),
            states,
            act: vec![(0..states).collect()],
        }
    }

    pub fn monoid(&self) -> &Monoid {
        &self.monoid
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn act(&self, m: usize, q: usize) -> usize {
        self.act[m][q]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.act
    }

    pub fn check(&self) -> Result<(), CloneError> {
        self.monoid.check()?;
        let m = &self.monoid;
        if self.act.len() != m.size() || self.act.iter().any(|r| r.len() != self.states) {
            return Err(CloneError::ActionLawViolation(format!(
                "action table is not {}x{}",
                m.size(),
                self.states
            )));
        }
        if let Some(v) = self.act.iter().flatten().find(|&&v| v >= self.states) {
            return Err(CloneError::ActionLawViolation(format!(
                "action entry {} out of range",
                v
            )));
        }
        for q in 0..self.states {
            if self.act(m.unit(), q) != q {
                return Err(CloneError::ActionLawViolation(format!(
                    "unit law: e.{} = {}",
                    q,
                    self.act(m.unit(), q)
                )));
            }
            for a in 0..m.size() {
                for b in 0..m.size() {
                    if self.act(a, self.act(b, q)) != self.act(m.mul(a, b), q) {
                        return Err(CloneError::ActionLawViolation(format!(
                            "compatibility law: {}.({}.{}) differs from ({}{}).{}",
                            a, b, q, a, b, q
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_examples_pass() {
        Monoid::cyclic(3).check().unwrap();
        MonoidAction::flip().check().unwrap();
        MonoidAction::trivial(3).check().unwrap();
    }

    #[test]
    fn broken_unit_is_named() {
        let bad = MonoidAction::unchecked(Monoid::cyclic(2), 2, vec![vec![1, 0], vec![1, 0]]);
        let err = bad.check().unwrap_err().to_string();
        assert!(err.contains("unit law"), "{}", err);
    }

    #[test]
    fn broken_compatibility_is_named() {
        // constant maps under Z/2 violate s.(s.q) = q
        let bad = MonoidAction::unchecked(Monoid::cyclic(2), 2, vec![vec![0, 1], vec![0, 0]]);
        let err = bad.check().unwrap_err().to_string();
        assert!(err.contains("compatibility"), "{}", err);
    }
}
