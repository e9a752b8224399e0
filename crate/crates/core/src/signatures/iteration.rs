use std::sync::Arc;

use crate::clone::{RankedAlphabet, Tree};

use super::{functions, SignatureError};

/// An element of some `S⁽ᵏ⁾_n`: a variable, or a letter applied to a tuple of
/// indices into the previous stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IterElem {
    Var(usize),
    Op { letter: usize, args: usize },
}

/// The stages `S⁽⁰⁾ = ∅, S⁽ᵏ⁺¹⁾ = V + X ∘ S⁽ᵏ⁾` at a fixed arity `n`, with
/// argument tuples stored in a shared arena.
#[derive(Debug, Clone)]
pub struct Iteration {
    pub alpha: RankedAlphabet,
    pub n: usize,
    stages: Vec<Vec<IterElem>>,
    tuples: Vec<Arc<[u32]>>,
}

/// Computes `S⁽ᵈᵉᵖᵗʰ⁾_n`, refusing once a stage would exceed `guard` elements.
pub fn free_iteration(
    alpha: &RankedAlphabet,
    depth: usize,
    n: usize,
    guard: u64,
) -> Result<Iteration, SignatureError> {
    let mut stages: Vec<Vec<IterElem>> = vec![Vec::new()];
    let mut tuples: Vec<Arc<[u32]>> = Vec::new();
    for k in 0..depth {
        let prev = stages[k].len();
        let size = alpha.arities().iter().try_fold(n as u128, |acc, &a| {
            (prev as u128)
                .checked_pow(a as u32)
                .and_then(|p| acc.checked_add(p))
        });
        match size {
            Some(s) if s <= guard as u128 => {}
            _ => {
                return Err(SignatureError::GuardExceeded {
                    what: format!("S({}) over {} with {} variables", k + 1, alpha, n),
                    size: size.unwrap_or(u128::MAX),
                    guard,
                })
            }
        }
        let mut next: Vec<IterElem> = (1..=n).map(IterElem::Var).collect();
        for (j, a) in alpha.letters() {
            for pick in functions(a, prev) {
                tuples.push(pick.iter().map(|&i| i as u32).collect());
                next.push(IterElem::Op {
                    letter: j,
                    args: tuples.len() - 1,
                });
            }
        }
        stages.push(next);
    }
    Ok(Iteration {
        alpha: alpha.clone(),
        n,
        stages,
        tuples,
    })
}

impl Iteration {
    pub fn depth(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn stage(&self, k: usize) -> &[IterElem] {
        &self.stages[k]
    }

    pub fn len(&self) -> usize {
        self.stages[self.depth()].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The tree named by element `i` of stage `k`.
    pub fn to_tree(&self, k: usize, i: usize) -> Tree {
        self.trees_at(k)[i].clone()
    }

    /// Every stage-`k` element as a tree, sharing subtrees.
    pub fn trees_at(&self, k: usize) -> Vec<Tree> {
        let mut prev: Vec<Tree> = Vec::new();
        for s in 1..=k {
            let cur: Vec<Tree> = self.stages[s]
                .iter()
                .map(|e| match *e {
                    IterElem::Var(i) => Tree::Var(i),
                    IterElem::Op { letter, args } => Tree::node(
                        letter,
                        self.tuples[args]
                            .iter()
                            .map(|&c| prev[c as usize].clone())
                            .collect::<Vec<_>>(),
                    ),
                })
                .collect();
            prev = cur;
        }
        prev
    }

    /// The inclusion `S⁽ᵏ⁾ → S⁽ᵏ⁺¹⁾` as an index map.
    pub fn embedding(&self, k: usize) -> Vec<usize> {
        let mut emb: Vec<usize> = Vec::new();
        for s in 1..=k {
            let prev_emb = emb;
            let next = &self.stages[s + 1];
            let mut pos = std::collections::HashMap::new();
            for (i, e) in next.iter().enumerate() {
                let key = match *e {
                    IterElem::Var(v) => (0, v, Vec::new()),
                    IterElem::Op { letter, args } => (1, letter, self.tuples[args].to_vec()),
                };
                pos.insert(key, i);
            }
            emb = self.stages[s]
                .iter()
                .map(|e| {
                    let key = match *e {
                        IterElem::Var(v) => (0, v, Vec::new()),
                        IterElem::Op { letter, args } => (
                            1,
                            letter,
                            self.tuples[args]
                                .iter()
                                .map(|&c| prev_emb[c as usize] as u32)
                                .collect(),
                        ),
                    };
                    pos[&key]
                })
                .collect();
        }
        emb
    }
}
