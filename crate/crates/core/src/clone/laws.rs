use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::clones::{CloneOps, CloneShape};
use super::tree::TreeEnumerator;
use super::{CloneError, CloneMorphism, Elem, FiniteClone, MonoidAction, RankedAlphabet};

/// Bounds for the law checker.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LawOptions {
    /// Largest arity `m, n, k` visited.
    pub arity_bound: usize,
    /// Trees up to this size stand in for the carriers of free clones.
    pub tree_size: usize,
    /// Points drawn when a grid is too large to sweep.
    pub samples: usize,
    pub seed: u64,
    /// Largest grid swept exhaustively.
    pub exhaustive_limit: u64,
}

impl Default for LawOptions {
    fn default() -> Self {
        LawOptions {
            arity_bound: 2,
            tree_size: 4,
            samples: 2000,
            seed: 0,
            exhaustive_limit: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct LawCheck {
    pub law: String,
    pub arities: Vec<usize>,
    /// Grid size, as a decimal string (it may exceed 64 bits).
    pub grid: String,
    pub tested: u64,
    pub exhaustive: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Counterexample {
    pub law: String,
    pub arities: Vec<usize>,
    pub inputs: Vec<String>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct LawReport {
    pub subject: String,
    pub passed: bool,
    pub exhaustive: bool,
    pub checks: Vec<LawCheck>,
    pub counterexample: Option<Counterexample>,
}

impl LawReport {
    fn new(subject: String) -> LawReport {
        LawReport {
            subject,
            passed: true,
            exhaustive: true,
            checks: Vec::new(),
            counterexample: None,
        }
    }

    fn record(&mut self, check: LawCheck, cx: Option<Counterexample>) {
        self.passed &= check.passed;
        self.exhaustive &= check.exhaustive;
        self.checks.push(check);
        if self.counterexample.is_none() {
            self.counterexample = cx;
        }
    }

    pub fn tested(&self) -> u64 {
        self.checks.iter().map(|c| c.tested).sum()
    }
}

/// Elements standing in for `C_n`: the whole carrier when enumerable, trees
/// up to the size bound for free clones, otherwise a seeded sample.
pub fn test_pool(
    c: &FiniteClone,
    n: usize,
    opts: &LawOptions,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Elem>, bool), CloneError> {
    if let CloneShape::Free(alpha) = c.shape() {
        let trees = TreeEnumerator::new(alpha, n).up_to(opts.tree_size);
        return Ok((trees.into_iter().map(Elem::Tree).collect(), true));
    }
    if c.is_enumerable(n) {
        return Ok((c.carrier(n)?.elems().to_vec(), true));
    }
    let sample: Vec<Elem> = (0..opts.samples)
        .filter_map(|_| c.random_elem(n, rng))
        .collect();
    if sample.is_empty() {
        return Err(CloneError::GuardExceeded {
            what: format!(
                "{}_{} can neither be enumerated nor sampled",
                c.describe(),
                n
            ),
            size: c.carrier_size(n),
            guard: c.guard(),
        });
    }
    Ok((sample, false))
}

type Verdict = Result<Option<(String, String)>, CloneError>;

/// Sweeps (or samples) the product of `pools` and returns the first failing
/// point in sweep order.
fn run_grid(
    law: &str,
    arities: Vec<usize>,
    pools: &[&[Elem]],
    pools_complete: bool,
    opts: &LawOptions,
    rng: &mut ChaCha8Rng,
    point: impl Fn(&[&Elem]) -> Verdict + Sync,
) -> (LawCheck, Option<Counterexample>) {
    let grid: Option<u128> = pools
        .iter()
        .try_fold(1u128, |acc, p| acc.checked_mul(p.len() as u128));
    let grid_str = grid
        .map(|g| g.to_string())
        .unwrap_or_else(|| "overflow".into());
    let exhaustive =
        pools_complete && matches!(grid, Some(g) if g <= opts.exhaustive_limit as u128);
    let decode = |mut idx: u128| -> Vec<&Elem> {
        let mut picks = vec![pools[0].first(); pools.len()];
        for k in (0..pools.len()).rev() {
            let len = pools[k].len() as u128;
            picks[k] = pools[k].get((idx % len) as usize);
            idx /= len;
        }
        picks
            .into_iter()
            .map(|e| e.expect("non-empty pool"))
            .collect()
    };
    let fails_at = |picks: Vec<&Elem>| -> Option<Counterexample> {
        let (lhs, rhs) = match point(&picks) {
            Ok(None) => return None,
            Ok(Some(pair)) => pair,
            Err(e) => (format!("error: {}", e), "a value".into()),
        };
        Some(Counterexample {
            law: law.to_string(),
            arities: arities.clone(),
            inputs: picks.iter().map(|e| e.to_string()).collect(),
            lhs,
            rhs,
        })
    };
    let (tested, cx) = match grid {
        Some(0) => (0u64, None),
        _ if pools.is_empty() => (1, fails_at(Vec::new())),
        Some(g) if exhaustive => {
            let cx = (0..g as u64)
                .into_par_iter()
                .find_map_first(|i| fails_at(decode(i as u128)));
            (g as u64, cx)
        }
        _ => {
            let points: Vec<Vec<usize>> = (0..opts.samples)
                .map(|_| pools.iter().map(|p| rng.gen_range(0..p.len())).collect())
                .collect();
            let cx = points
                .par_iter()
                .find_map_first(|pt| fails_at(pt.iter().zip(pools).map(|(&k, p)| &p[k]).collect()));
            (opts.samples as u64, cx)
        }
    };
    let check = LawCheck {
        law: law.to_string(),
        arities,
        grid: grid_str,
        tested,
        exhaustive: exhaustive || grid == Some(0),
        passed: cx.is_none(),
    };
    (check, cx)
}

fn eq_or_show(c: &FiniteClone, n: usize, lhs: &Elem, rhs: &Elem) -> Verdict {
    Ok(if c.equal(n, lhs, rhs)? {
        None
    } else {
        Some((lhs.to_string(), rhs.to_string()))
    })
}

fn seeded(opts: &LawOptions, salt: &str) -> ChaCha8Rng {
    let h = salt.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    });
    ChaCha8Rng::seed_from_u64(opts.seed ^ h)
}

/// Checks the unit, projection and associativity laws of a clone, stopping
/// at the first failing law.
pub fn check_clone_laws(c: &FiniteClone, opts: &LawOptions) -> LawReport {
    let mut report = LawReport::new(c.describe());
    let mut rng = seeded(opts, &c.describe());
    let bound = opts.arity_bound;
    let mut pools: Vec<(Vec<Elem>, bool)> = Vec::new();
    for n in 0..=bound {
        match test_pool(c, n, opts, &mut rng) {
            Ok(p) => pools.push(p),
            Err(e) => {
                report.record(
                    LawCheck {
                        law: "carrier".into(),
                        arities: vec![n],
                        grid: "unavailable".into(),
                        tested: 0,
                        exhaustive: false,
                        passed: false,
                    },
                    Some(Counterexample {
                        law: "carrier".into(),
                        arities: vec![n],
                        inputs: Vec::new(),
                        lhs: e.to_string(),
                        rhs: String::new(),
                    }),
                );
                return report;
            }
        }
    }
    for (n, (pool, complete)) in pools.iter().enumerate() {
        let vars = c.vars(n);
        let (check, cx) = run_grid(
            "left unit",
            vec![n],
            &[pool],
            *complete,
            opts,
            &mut rng,
            |xs| {
                let lhs = c.subst(n, n, xs[0], &vars)?;
                eq_or_show(c, n, &lhs, xs[0])
            },
        );
        report.record(check, cx);
        if !report.passed {
            return report;
        }
    }
    for m in 0..=bound {
        for (n, (pool, complete)) in pools.iter().enumerate() {
            let grid: Vec<&[Elem]> = vec![pool.as_slice(); m];
            let (check, cx) = run_grid(
                "projection",
                vec![m, n],
                &grid,
                *complete,
                opts,
                &mut rng,
                |ys| {
                    let args: Vec<Elem> = ys.iter().map(|&y| y.clone()).collect();
                    for i in 1..=m {
                        let lhs = c.subst(m, n, &c.var(m, i), &args)?;
                        if let Some(bad) = eq_or_show(c, n, &lhs, ys[i - 1])? {
                            return Ok(Some((format!("i={}: {}", i, bad.0), bad.1)));
                        }
                    }
                    Ok(None)
                },
            );
            report.record(check, cx);
            if !report.passed {
                return report;
            }
        if !report.passed {
            return report;
        }
        }
    }
    for m in 0..=bound {
        for n in 0..=bound {
            for k in 0..=bound {
                let mut grid: Vec<&[Elem]> = vec![pools[m].0.as_slice()];
                grid.extend(std::iter::repeat_n(pools[n].0.as_slice(), m));
                grid.extend(std::iter::repeat_n(pools[k].0.as_slice(), n));
                let complete = pools[m].1 && pools[n].1 && pools[k].1;
                let (check, cx) = run_grid(
                    "associativity",
                    vec![m, n, k],
                    &grid,
                    complete,
                    opts,
                    &mut rng,
                    |pt| {
                        let x = pt[0];
                        let ys: Vec<Elem> = pt[1..1 + m].iter().map(|&e| e.clone()).collect();
                        let zs: Vec<Elem> = pt[1 + m..].iter().map(|&e| e.clone()).collect();
                        let lhs = c.subst(n, k, &c.subst(m, n, x, &ys)?, &zs)?;
                        let inner = ys
                            .iter()
                            .map(|y| c.subst(n, k, y, &zs))
                            .collect::<Result<Vec<_>, _>>()?;
                        let rhs = c.subst(m, k, x, &inner)?;
                        eq_or_show(c, k, &lhs, &rhs)
                    },
                );
                report.record(check, cx);
                if !report.passed {
                    return report;
                }
            if !report.passed {
                return report;
            }
        if !report.passed {
            return report;
        }
            }
        }
    }
    report
}

/// Checks that a morphism preserves variables and substitution.
pub fn check_morphism(phi: &CloneMorphism, opts: &LawOptions) -> LawReport {
    let mut report = LawReport::new(format!("{:?}", phi));
    let src = phi.source();
    let tgt = phi.target();
    let mut rng = seeded(opts, phi.name());
    let bound = opts.arity_bound;
    let mut pools = Vec::new();
    for n in 0..=bound {
        match test_pool(src, n, opts, &mut rng) {
            Ok(p) => pools.push(p),
            Err(e) => {
                report.record(
                    LawCheck {
                        law: "carrier".into(),
                        arities: vec![n],
                        grid: "unavailable".into(),
                        tested: 0,
                        exhaustive: false,
                        passed: false,
                    },
                    Some(Counterexample {
                        law: "carrier".into(),
                        arities: vec![n],
                        inputs: Vec::new(),
                        lhs: e.to_string(),
                        rhs: String::new(),
                    }),
                );
                return report;
            }
        }
    }
    for n in 0..=bound {
        let (check, cx) = run_grid("variables", vec![n], &[], true, opts, &mut rng, |_| {
            for i in 1..=n {
                let lhs = phi.apply(n, &src.var(n, i))?;
                if let Some(bad) = eq_or_show(tgt, n, &lhs, &tgt.var(n, i))? {
                    return Ok(Some((format!("i={}: {}", i, bad.0), bad.1)));
                }
            }
            Ok(None)
        });
        report.record(check, cx);
    }
    for m in 0..=bound {
        for n in 0..=bound {
            let mut grid: Vec<&[Elem]> = vec![pools[m].0.as_slice()];
            grid.extend(std::iter::repeat_n(pools[n].0.as_slice(), m));
            let complete = pools[m].1 && pools[n].1;
            let (check, cx) = run_grid(
                "substitution",
                vec![m, n],
                &grid,
                complete,
                opts,
                &mut rng,
                |pt| {
                    let ys: Vec<Elem> = pt[1..].iter().map(|&e| e.clone()).collect();
                    let lhs = phi.apply(n, &src.subst(m, n, pt[0], &ys)?)?;
                    let img = ys
                        .iter()
                        .map(|y| phi.apply(n, y))
                        .collect::<Result<Vec<_>, _>>()?;
                    let rhs = tgt.subst(m, n, &phi.apply(m, pt[0])?, &img)?;
                    eq_or_show(tgt, n, &lhs, &rhs)
                },
            );
            report.record(check, cx);
        }
    }
    report
}

/// Deliberately broken clone structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Mutation {
    /// `Endo(Q)` whose substitution swaps the first two entries of its result.
    SwapSubstEntries,
    /// Variables rotated by one position.
    CorruptVariable,
    /// Action clone whose substitution forgets the outer monoid element.
    IgnoreMultiplication,
    /// Free clone substituting its arguments in reverse order.
    ReverseArgs,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [
        Mutation::SwapSubstEntries,
        Mutation::CorruptVariable,
        Mutation::IgnoreMultiplication,
        Mutation::ReverseArgs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::SwapSubstEntries => "swap-subst-entries",
            Mutation::CorruptVariable => "corrupt-variable",
            Mutation::IgnoreMultiplication => "ignore-multiplication",
            Mutation::ReverseArgs => "reverse-args",
        }
    }

    /// The mutated clone, built over its standard base.
    pub fn build(self) -> FiniteClone {
        let base = match self {
            Mutation::SwapSubstEntries | Mutation::CorruptVariable => FiniteClone::endo(2),
            Mutation::IgnoreMultiplication => {
                FiniteClone::action(&MonoidAction::flip()).expect("flip is an action")
            }
            Mutation::ReverseArgs => FiniteClone::free(&RankedAlphabet::new(vec![0, 2])),
        };
        FiniteClone::new(Mutant { kind: self, base })
    }
}

struct Mutant {
    kind: Mutation,
    base: FiniteClone,
}

impl CloneOps for Mutant {
    fn describe(&self) -> String {
        format!("mutant[{}] {}", self.kind.name(), self.base.describe())
    }

    fn carrier_size(&self, n: usize) -> Option<u128> {
        self.base.carrier_size(n)
    }

    fn enumerate(&self, n: usize, _guard: u64) -> Result<Vec<Elem>, CloneError> {
        Ok(self.base.carrier(n)?.elems().to_vec())
    }

    fn var(&self, n: usize, i: usize) -> Elem {
        match self.kind {
            Mutation::CorruptVariable if n >= 2 => self.base.var(n, i % n + 1),
            _ => self.base.var(n, i),
        }
    }

    fn subst(&self, m: usize, n: usize, head: &Elem, args: &[Elem]) -> Result<Elem, CloneError> {
        match self.kind {
            Mutation::SwapSubstEntries => {
                let r = self.base.subst(m, n, head, args)?;
                match r.as_table() {
                    Some(t) if t.len() >= 2 => {
                        let mut t = t.to_vec();
                        t.swap(0, 1);
                        Ok(Elem::table(t))
                    }
                    _ => Ok(r),
                }
            }
            Mutation::IgnoreMultiplication => match (head, args) {
                (Elem::Act(_, i), _) => match args.get(i - 1) {
                    Some(Elem::Act(b, j)) => Ok(Elem::Act(*b, *j)),
                    _ => self.base.subst(m, n, head, args),
                },
                _ => self.base.subst(m, n, head, args),
            },
            Mutation::ReverseArgs => {
                let rev: Vec<Elem> = args.iter().rev().cloned().collect();
                self.base.subst(m, n, head, &rev)
            }
            Mutation::CorruptVariable => self.base.subst(m, n, head, args),
        }
    }

    fn equal(&self, n: usize, a: &Elem, b: &Elem, _guard: u64) -> Result<bool, CloneError> {
        self.base.equal(n, a, b)
    }

    fn random_elem(&self, n: usize, rng: &mut ChaCha8Rng, _guard: u64) -> Option<Elem> {
        self.base.random_elem(n, rng)
    }

    fn shape(&self) -> CloneShape<'_> {
        match self.base.shape() {
            CloneShape::Free(a) => CloneShape::Free(a),
            _ => CloneShape::Other,
        }
    }
}

/// Runs the law checker on every mutation; each entry should fail.
pub fn check_mutations(opts: &LawOptions) -> Vec<(Mutation, LawReport)> {
    Mutation::ALL
        .iter()
        .map(|&m| (m, check_clone_laws(&m.build(), opts)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::{cay, delta_endo_iso, enumerate_morphisms};

    fn opts(bound: usize) -> LawOptions {
        LawOptions {
            arity_bound: bound,
            ..LawOptions::default()
        }
    }

    #[test]
    fn endo2_passes_exhaustively() {
        let r = check_clone_laws(&FiniteClone::endo(2), &opts(2));
        assert!(r.passed, "{:?}", r.counterexample);
        assert!(r.exhaustive);
    }

    #[test]
    fn free_clone_passes_at_small_bounds() {
        let f = FiniteClone::free(&RankedAlphabet::new(vec![0, 1]));
        let r = check_clone_laws(
            &f,
            &LawOptions {
                arity_bound: 2,
                tree_size: 4,
                ..LawOptions::default()
            },
        );
        assert!(r.passed, "{:?}", r.counterexample);
        assert!(r.exhaustive);
    }

    #[test]
    fn action_and_delta_pass() {
        let a = FiniteClone::action(&MonoidAction::flip()).unwrap();
        assert!(check_clone_laws(&a, &opts(3)).passed);
        assert!(check_clone_laws(&FiniteClone::delta(&a), &opts(2)).passed);
        assert!(check_clone_laws(&FiniteClone::delta(&FiniteClone::endo(2)), &opts(1)).passed);
    }

    #[test]
    fn every_mutation_is_detected() {
        for (m, r) in check_mutations(&opts(2)) {
            assert!(!r.passed, "{} not detected", m.name());
            let cx = r.counterexample.expect("failing report carries a witness");
            assert!(!cx.law.is_empty());
        }
    }

    #[test]
    fn morphisms_pass() {
        let e2 = FiniteClone::endo(2);
        assert!(check_morphism(&CloneMorphism::identity(&e2), &opts(2)).passed);
        assert!(check_morphism(&cay(&e2, 1), &opts(2)).passed);
        let (fwd, inv) = delta_endo_iso(2);
        assert!(check_morphism(&fwd, &opts(2)).passed);
        assert!(check_morphism(&inv, &opts(2)).passed);
        let alpha = RankedAlphabet::new(vec![1, 1]);
        for p in enumerate_morphisms(&alpha, &e2).unwrap() {
            let r = check_morphism(
                &p.to_morphism(),
                &LawOptions {
                    arity_bound: 1,
                    tree_size: 3,
                    ..LawOptions::default()
                },
            );
            assert!(r.passed);
        }
    }

    #[test]
    fn broken_morphism_fails() {
        let e2 = FiniteClone::endo(2);
        let neg_all = CloneMorphism::new("negate", &e2, &e2, |_, e| {
            Ok(Elem::table(
                e.as_table()
                    .unwrap()
                    .iter()
                    .map(|v| 1 - v)
                    .collect::<Vec<_>>(),
            ))
        });
        assert!(!check_morphism(&neg_all, &opts(1)).passed);
    }
}
