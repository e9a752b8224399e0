//! Signatures as functors out of finite ordinals, their composition, the
//! free-clone iteration, and the `Set²` encoding of monoid actions.

mod action;
mod iteration;
mod set2;

pub use action::{action_roundtrip, ActionReport, MonoidObject, ObjectMutation};
pub use iteration::{free_iteration, IterElem, Iteration};
pub use set2::{
    adjunction_counts, associator, left_unitor_pair, right_unitor_pair, semidirect, semidirect_map,
    setsig, setsig_coherence, setsig_unit_iso, sigset, AdjunctionCounts, PairMap, PointedPair,
    SemidirectAction, SemidirectState,
};

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::clone::{CloneError, RankedAlphabet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("guard exceeded: {what} has {size} elements, guard is {guard}")]
    GuardExceeded {
        what: String,
        size: u128,
        guard: u64,
    },
    #[error("not an element: {0}")]
    NotAnElement(String),
    #[error("law violation: {0}")]
    Law(String),
    #[error(transparent)]
    Clone(#[from] CloneError),
}

/// All functions `[m] → [n]`, lexicographic with the first value most significant.
pub fn functions(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > 0 && n == 0 {
        return out;
    }
    let mut cur = vec![0usize; m];
    loop {
        out.push(cur.clone());
        let mut k = m;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < n {
                break;
            }
            cur[k] = 0;
        }
    }
}

/// An element of a coproduct of representables at some arity `n`: a summand
/// `y_k` and a map `[k] → [n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SigElem {
    pub summand: usize,
    pub map: Vec<usize>,
}

impl SigElem {
    pub fn new(summand: usize, map: Vec<usize>) -> SigElem {
        SigElem { summand, map }
    }

    /// `X_f` for `f : [n] → [n']`.
    pub fn act(&self, f: &[usize]) -> SigElem {
        SigElem {
            summand: self.summand,
            map: self.map.iter().map(|&i| f[i]).collect(),
        }
    }
}

impl fmt::Display for SigElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}<", self.summand)?;
        for (k, v) in self.map.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v)?;
        }
        write!(f, ">")
    }
}

/// A functor tabulated on arities `≤ bound`, elements named by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabulatedSignature {
    bound: usize,
    sizes: Vec<usize>,
    action: HashMap<(usize, Vec<usize>), Vec<usize>>,
}

impl TabulatedSignature {
    /// Tabulates `act(n, f, x)` for every `f : [m] → [n]` with `m, n ≤ bound`.
    pub fn from_fn(
        bound: usize,
        sizes: Vec<usize>,
        act: impl Fn(usize, &[usize], usize) -> usize,
    ) -> TabulatedSignature {
        let mut action = HashMap::new();
        for (m, &size) in sizes.iter().enumerate().take(bound + 1) {
            for n in 0..=bound {
                for f in functions(m, n) {
                    let row = (0..size).map(|x| act(n, &f, x)).collect();
                    action.insert((n, f), row);
                }
            }
        }
        TabulatedSignature {
            bound,
            sizes,
            action,
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn size(&self, n: usize) -> Option<usize> {
        self.sizes.get(n).copied()
    }

    /// `X_f(x)` for `f : [f.len()] → [n]`.
    pub fn act(&self, n: usize, f: &[usize], x: usize) -> Option<usize> {
        self.action
            .get(&(n, f.to_vec()))
            .and_then(|r| r.get(x))
            .copied()
    }

    /// `X_id = id` and `X_{g∘f} = X_g ∘ X_f` on the bounded grid.
    pub fn check_functoriality(&self) -> Result<(), SignatureError> {
        let b = self.bound;
        for m in 0..=b {
            let id: Vec<usize> = (0..m).collect();
            for x in 0..self.sizes[m] {
                if self.act(m, &id, x) != Some(x) {
                    return Err(SignatureError::Law(format!(
                        "X_id moves element {} at arity {}",
                        x, m
                    )));
                }
            }
        }
        for l in 0..=b {
            for m in 0..=b {
                for f in functions(l, m) {
                    for n in 0..=b {
                        for g in functions(m, n) {
                            let gf: Vec<usize> = f.iter().map(|&i| g[i]).collect();
                            for x in 0..self.sizes[l] {
                                let lhs = self.act(n, &gf, x);
                                let rhs = self.act(m, &f, x).and_then(|y| self.act(n, &g, y));
                                if lhs != rhs {
                                    return Err(SignatureError::Law(format!(
                                        "X_(g.f) differs from X_g . X_f at f={:?}, g={:?}, x={}",
                                        f, g, x
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A signature: a finite coproduct of representables `y_{k₁} + … + y_{k_s}`
/// or a bounded tabulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Signature {
    Coproduct(Vec<usize>),
    Tabulated(TabulatedSignature),
}

impl Signature {
    pub fn representable(k: usize) -> Signature {
        Signature::Coproduct(vec![k])
    }

    pub fn from_alphabet(alpha: &RankedAlphabet) -> Signature {
        Signature::Coproduct(alpha.arities().to_vec())
    }

    pub fn sum(parts: &[Signature]) -> Result<Signature, SignatureError> {
        let mut out = Vec::new();
        for p in parts {
            out.extend_from_slice(p.summands()?);
        }
        Ok(Signature::Coproduct(out))
    }

    pub fn summands(&self) -> Result<&[usize], SignatureError> {
        match self {
            Signature::Coproduct(s) => Ok(s),
            Signature::Tabulated(_) => Err(SignatureError::Unsupported(
                "tabulated signature has no summands".into(),
            )),
        }
    }

    /// `|X_n|`.
    pub fn size(&self, n: usize) -> Option<u128> {
        match self {
            Signature::Coproduct(s) => s.iter().try_fold(0u128, |acc, &k| {
                (n as u128)
                    .checked_pow(k as u32)
                    .and_then(|p| acc.checked_add(p))
            }),
            Signature::Tabulated(t) => t.size(n).map(|s| s as u128),
        }
    }

    /// The elements of `X_n`, summand-major.
    pub fn elements(&self, n: usize) -> Result<Vec<SigElem>, SignatureError> {
        let s = self.summands()?;
        Ok(s.iter()
            .enumerate()
            .flat_map(|(c, &k)| functions(k, n).into_iter().map(move |f| SigElem::new(c, f)))
            .collect())
    }

    pub fn contains(&self, n: usize, e: &SigElem) -> bool {
        match self {
            Signature::Coproduct(s) => s
                .get(e.summand)
                .is_some_and(|&k| e.map.len() == k && e.map.iter().all(|&v| v < n)),
            Signature::Tabulated(_) => false,
        }
    }

    pub fn tabulate(&self, bound: usize) -> Result<TabulatedSignature, SignatureError> {
        if let Signature::Tabulated(t) = self {
            if t.bound >= bound {
                return Ok(t.clone());
            }
            return Err(SignatureError::Unsupported(format!(
                "tabulated up to {}, asked for {}",
                t.bound, bound
            )));
        }
        let elems: Vec<Vec<SigElem>> = (0..=bound)
            .map(|n| self.elements(n))
            .collect::<Result<_, _>>()?;
        let pos: Vec<HashMap<SigElem, usize>> = elems
            .iter()
            .map(|es| {
                es.iter()
                    .cloned()
                    .enumerate()
                    .map(|(i, e)| (e, i))
                    .collect()
            })
            .collect();
        let sizes = elems.iter().map(Vec::len).collect();
        Ok(TabulatedSignature::from_fn(bound, sizes, |n, f, x| {
            pos[n][&elems[f.len()][x].act(f)]
        }))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signature::Coproduct(s) if s.is_empty() => write!(f, "0"),
            Signature::Coproduct(s) => {
                let parts: Vec<String> = s.iter().map(|k| format!("y{}", k)).collect();
                write!(f, "{}", parts.join(" + "))
            }
            Signature::Tabulated(t) => write!(f, "tabulated{:?}", t.sizes),
        }
    }
}

/// A formal substitution `x⟨x'₁, …, x'_k⟩` with `x` the generic element of
/// its summand: the Yoneda representative of a coend class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompElem {
    pub outer: usize,
    pub inner: Vec<SigElem>,
}

impl CompElem {
    pub fn act(&self, f: &[usize]) -> CompElem {
        CompElem {
            outer: self.outer,
            inner: self.inner.iter().map(|e| e.act(f)).collect(),
        }
    }
}

impl fmt::Display for CompElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.inner.iter().map(|e| e.to_string()).collect();
        write!(f, "{}[{}]", self.outer, parts.join(" "))
    }
}

/// `X ∘ X'` for coproducts of representables, with the flattening bijection
/// onto the closed form `∐_c ∐_{d̄} y_{k'_{d₁} + … + k'_{d_{k_c}}}`.
#[derive(Debug, Clone)]
pub struct Composite {
    outer: Vec<usize>,
    inner: Vec<usize>,
    result: Signature,
    labels: Vec<(usize, Vec<usize>)>,
    lookup: HashMap<(usize, Vec<usize>), usize>,
}

pub fn compose_signatures(x: &Signature, xp: &Signature) -> Result<Composite, SignatureError> {
    let outer = match x {
        Signature::Coproduct(s) => s.clone(),
        Signature::Tabulated(_) => {
            return Err(SignatureError::Unsupported(
                "general coend of tabulated signatures".into(),
            ))
        }
    };
    let inner = match xp {
        Signature::Coproduct(s) => s.clone(),
        Signature::Tabulated(_) => {
            return Err(SignatureError::Unsupported(
                "general coend of tabulated signatures".into(),
            ))
        }
    };
    let mut labels = Vec::new();
    let mut arities = Vec::new();
    for (c, &k) in outer.iter().enumerate() {
        for ds in functions(k, inner.len()) {
            arities.push(ds.iter().map(|&d| inner[d]).sum());
            labels.push((c, ds));
        }
    }
    let lookup = labels
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    Ok(Composite {
        outer,
        inner,
        result: Signature::Coproduct(arities),
        labels,
        lookup,
    })
}

impl Composite {
    pub fn result(&self) -> &Signature {
        &self.result
    }

    pub fn outer(&self) -> Signature {
        Signature::Coproduct(self.outer.clone())
    }

    pub fn inner(&self) -> Signature {
        Signature::Coproduct(self.inner.clone())
    }

    /// `(c, f)⟨a₁…a_m⟩ = (c, id)⟨a_{f(1)}…a_{f(k)}⟩`.
    pub fn collapse(&self, x: &SigElem, args: &[SigElem]) -> Result<CompElem, SignatureError> {
        if x.map.iter().any(|&i| i >= args.len()) {
            return Err(SignatureError::NotAnElement(format!(
                "{} with {} arguments",
                x,
                args.len()
            )));
        }
        Ok(CompElem {
            outer: x.summand,
            inner: x.map.iter().map(|&i| args[i].clone()).collect(),
        })
    }

    /// Representatives of `(X ∘ X')_n`.
    pub fn comp_elements(&self, n: usize) -> Vec<CompElem> {
        let pool = self.inner().elements(n).unwrap_or_default();
        let mut out = Vec::new();
        for (c, &k) in self.outer.iter().enumerate() {
            for pick in functions(k, pool.len()) {
                out.push(CompElem {
                    outer: c,
                    inner: pick.iter().map(|&i| pool[i].clone()).collect(),
                });
            }
        }
        out
    }

    pub fn flatten(&self, e: &CompElem) -> Result<SigElem, SignatureError> {
        let ds: Vec<usize> = e.inner.iter().map(|a| a.summand).collect();
        let idx = self
            .lookup
            .get(&(e.outer, ds))
            .ok_or_else(|| SignatureError::NotAnElement(e.to_string()))?;
        Ok(SigElem::new(
            *idx,
            e.inner.iter().flat_map(|a| a.map.iter().copied()).collect(),
        ))
    }

    pub fn split(&self, e: &SigElem) -> Result<CompElem, SignatureError> {
        let (c, ds) = self
            .labels
            .get(e.summand)
            .ok_or_else(|| SignatureError::NotAnElement(e.to_string()))?;
        let mut rest = e.map.as_slice();
        let mut inner = Vec::with_capacity(ds.len());
        for &d in ds {
            let k = self.inner[d];
            if rest.len() < k {
                return Err(SignatureError::NotAnElement(e.to_string()));
            }
            inner.push(SigElem::new(d, rest[..k].to_vec()));
            rest = &rest[k..];
        }
        if !rest.is_empty() {
            return Err(SignatureError::NotAnElement(e.to_string()));
        }
        Ok(CompElem { outer: *c, inner })
    }
}

/// `y₁ ∘ X → X`, `x⟨a⟩ ↦ a`.
pub fn left_unit(e: &CompElem) -> SigElem {
    e.inner[0].clone()
}

pub fn left_unit_inv(a: &SigElem) -> CompElem {
    CompElem {
        outer: 0,
        inner: vec![a.clone()],
    }
}

/// `X ∘ y₁ → X`, `(c, id)⟨(0, i₁), …⟩ ↦ (c, i₁…)`.
pub fn right_unit(e: &CompElem) -> SigElem {
    SigElem::new(e.outer, e.inner.iter().map(|a| a.map[0]).collect())
}

pub fn right_unit_inv(a: &SigElem) -> CompElem {
    CompElem {
        outer: a.summand,
        inner: a.map.iter().map(|&i| SigElem::new(0, vec![i])).collect(),
    }
}

/// `y₀ ∘ X → y₀`.
pub fn left_absorb(_: &CompElem) -> SigElem {
    SigElem::new(0, Vec::new())
}

pub fn left_absorb_inv(_: &SigElem) -> CompElem {
    CompElem {
        outer: 0,
        inner: Vec::new(),
    }
}

/// Checks that `fwd` and `inv` are mutually inverse between two finite sets.
pub fn check_bijection<A, B>(
    src: &[A],
    tgt: &[B],
    fwd: impl Fn(&A) -> Result<B, SignatureError>,
    inv: impl Fn(&B) -> Result<A, SignatureError>,
) -> Result<(), SignatureError>
where
    A: Clone + Ord + fmt::Display,
    B: Clone + Ord + fmt::Display,
{
    let tset: BTreeSet<&B> = tgt.iter().collect();
    let mut image = BTreeSet::new();
    for a in src {
        let b = fwd(a)?;
        if !tset.contains(&b) {
            return Err(SignatureError::Law(format!(
                "{} maps outside the target to {}",
                a, b
            )));
        }
        if inv(&b)? != *a {
            return Err(SignatureError::Law(format!(
                "{} is not recovered from {}",
                a, b
            )));
        }
        image.insert(b);
    }
    if image.len() != tset.len() || src.len() != tgt.len() {
        return Err(SignatureError::Law(format!(
            "{} sources against {} targets",
            src.len(),
            tgt.len()
        )));
    }
    Ok(())
}

/// The unit and absorption isomorphisms of `∘` at arities `≤ bound`, each
/// checked invertible and natural.
pub fn check_unit_laws(x: &Signature, bound: usize) -> Result<(), SignatureError> {
    let y0 = Signature::representable(0);
    let y1 = Signature::representable(1);
    let l = compose_signatures(&y1, x)?;
    let r = compose_signatures(x, &y1)?;
    let z = compose_signatures(&y0, x)?;
    for n in 0..=bound {
        check_bijection(
            &l.comp_elements(n),
            &x.elements(n)?,
            |e| Ok(left_unit(e)),
            |a| Ok(left_unit_inv(a)),
        )?;
        check_bijection(
            &r.comp_elements(n),
            &x.elements(n)?,
            |e| Ok(right_unit(e)),
            |a| Ok(right_unit_inv(a)),
        )?;
        check_bijection(
            &z.comp_elements(n),
            &y0.elements(n)?,
            |e| Ok(left_absorb(e)),
            |a| Ok(left_absorb_inv(a)),
        )?;
        for comp in [&l, &r, &z] {
            let flat = comp.result().elements(n)?;
            check_bijection(
                &comp.comp_elements(n),
                &flat,
                |e| comp.flatten(e),
                |a| comp.split(a),
            )?;
        }
        for m in 0..=bound {
            for f in functions(n, m) {
                for e in l.comp_elements(n) {
                    natural(&left_unit(&e.act(&f)), &left_unit(&e).act(&f), "left unit")?;
                }
                for e in r.comp_elements(n) {
                    natural(
                        &right_unit(&e.act(&f)),
                        &right_unit(&e).act(&f),
                        "right unit",
                    )?;
                }
                for e in z.comp_elements(n) {
                    natural(
                        &left_absorb(&e.act(&f)),
                        &left_absorb(&e).act(&f),
                        "absorption",
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn natural(a: &SigElem, b: &SigElem, what: &str) -> Result<(), SignatureError> {
    if a == b {
        Ok(())
    } else {
        Err(SignatureError::Law(format!(
            "{} is not natural: {} against {}",
            what, a, b
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_counts() {
        assert_eq!(functions(0, 0).len(), 1);
        assert_eq!(functions(2, 0).len(), 0);
        assert_eq!(functions(2, 3).len(), 9);
        assert_eq!(functions(2, 3)[1], vec![0, 1]);
    }

    #[test]
    fn representable_sizes() {
        let y2 = Signature::representable(2);
        assert_eq!(y2.size(3), Some(9));
        assert_eq!(y2.elements(3).unwrap().len(), 9);
        assert_eq!(Signature::representable(0).size(0), Some(1));
    }

    #[test]
    fn tabulated_coproducts_are_functors() {
        for s in [vec![0, 1], vec![2], vec![0, 0, 1, 2]] {
            let t = Signature::Coproduct(s).tabulate(3).unwrap();
            t.check_functoriality().unwrap();
        }
    }

    #[test]
    fn broken_tabulation_detected() {
        let mut t = Signature::representable(1).tabulate(2).unwrap();
        t.action.insert((1, vec![0]), vec![0]);
        t.action.insert((2, vec![1]), vec![0]);
        assert!(t.check_functoriality().is_err());
    }

    #[test]
    fn composition_of_representables() {
        // y2 ∘ (y0 + y1) has summands y0, y1, y1, y2
        let c = compose_signatures(
            &Signature::representable(2),
            &Signature::Coproduct(vec![0, 1]),
        )
        .unwrap();
        assert_eq!(c.result(), &Signature::Coproduct(vec![0, 1, 1, 2]));
        for n in 0..=3 {
            assert_eq!(
                c.comp_elements(n).len() as u128,
                c.result().size(n).unwrap()
            );
        }
    }

    #[test]
    fn collapse_uses_the_map() {
        let c =
            compose_signatures(&Signature::representable(2), &Signature::representable(1)).unwrap();
        let x = SigElem::new(0, vec![1, 1]);
        let args = [SigElem::new(0, vec![0]), SigElem::new(0, vec![2])];
        let e = c.collapse(&x, &args).unwrap();
        assert_eq!(e.inner, vec![args[1].clone(), args[1].clone()]);
        assert_eq!(c.flatten(&e).unwrap(), SigElem::new(0, vec![2, 2]));
    }

    #[test]
    fn unit_and_absorption_for_small_alphabets() {
        let mut alphabets = vec![Vec::new()];
        for l in 1..=3 {
            for f in functions(l, 3) {
                alphabets.push(f);
            }
        }
        for s in alphabets {
            check_unit_laws(&Signature::Coproduct(s.clone()), 3)
                .unwrap_or_else(|e| panic!("{:?}: {}", s, e));
        }
    }

    #[test]
    fn tabulated_composition_refused() {
        let t = Signature::Tabulated(Signature::representable(1).tabulate(1).unwrap());
        assert!(matches!(
            compose_signatures(&t, &t),
            Err(SignatureError::Unsupported(_))
        ));
    }
}
