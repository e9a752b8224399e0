use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::morphism::FreeMorphism;
use super::tree::for_each_product;
use super::{CloneError, Elem, IntFn, MonoidAction, RankedAlphabet, Tree};
use crate::DEFAULT_GUARD;

/// Structural description of a clone, used by checks that treat some
/// constructions specially.
pub enum CloneShape<'a> {
    Free(&'a RankedAlphabet),
    Endo(usize),
    Action(&'a MonoidAction),
    Product(&'a [FiniteClone]),
    Image(&'a FreeMorphism),
    Delta(&'a FiniteClone),
    EndoOfCarrier(&'a FiniteClone, usize),
    Other,
}

/// The operations of a clone: carriers, variables `v_n(i)` and substitution
/// `s_{m,n}`.
pub trait CloneOps: Send + Sync {
    fn describe(&self) -> String;

    /// `|C_n|`, or `None` when infinite or not known in advance.
    fn carrier_size(&self, n: usize) -> Option<u128>;

    /// Every element of `C_n` in canonical order.
    fn enumerate(&self, n: usize, guard: u64) -> Result<Vec<Elem>, CloneError>;

    fn var(&self, n: usize, i: usize) -> Elem;

    fn subst(&self, m: usize, n: usize, head: &Elem, args: &[Elem]) -> Result<Elem, CloneError>;

    fn equal(&self, _n: usize, a: &Elem, b: &Elem, _guard: u64) -> Result<bool, CloneError> {
        Ok(a == b)
    }

    /// A random element of `C_n`, when the clone supports sampling.
    fn random_elem(&self, _n: usize, _rng: &mut ChaCha8Rng, _guard: u64) -> Option<Elem> {
        None
    }

    fn shape(&self) -> CloneShape<'_> {
        CloneShape::Other
    }
}

/// A carrier `C_n` listed in canonical order, with positions.
pub struct Carrier {
    elems: Vec<Elem>,
    index: HashMap<Elem, usize>,
}

impl Carrier {
    fn new(elems: Vec<Elem>) -> Carrier {
        let index = elems
            .iter()
            .enumerate()
            .map(|(k, e)| (e.clone(), k))
            .collect();
        Carrier { elems, index }
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn position(&self, e: &Elem) -> Option<usize> {
        self.index.get(e).copied()
    }
}

/// Shared handle on a clone, with an enumeration guard and a per-arity
/// carrier cache.
#[derive(Clone)]
pub struct FiniteClone(Arc<Handle>);

struct Handle {
    ops: Box<dyn CloneOps>,
    guard: u64,
    carriers: Mutex<HashMap<usize, Arc<Carrier>>>,
}

impl FiniteClone {
    pub fn new(ops: impl CloneOps + 'static) -> FiniteClone {
        Self::with_guard(ops, DEFAULT_GUARD)
    }

    pub fn with_guard(ops: impl CloneOps + 'static, guard: u64) -> FiniteClone {
        FiniteClone(Arc::new(Handle {
            ops: Box::new(ops),
            guard,
            carriers: Mutex::new(HashMap::new()),
        }))
    }

    pub fn free(alpha: &RankedAlphabet) -> FiniteClone {
        Self::new(FreeClone {
            alpha: alpha.clone(),
        })
    }

    pub fn endo(q: usize) -> FiniteClone {
        Self::new(EndoClone { q })
    }

    pub fn endo_with_guard(q: usize, guard: u64) -> FiniteClone {
        Self::with_guard(EndoClone { q }, guard)
    }

    pub fn action(ma: &MonoidAction) -> Result<FiniteClone, CloneError> {
        ma.check()?;
        Ok(Self::new(ActionClone { ma: ma.clone() }))
    }

    pub fn product(parts: Vec<FiniteClone>) -> FiniteClone {
        let label = format!(
            "({})",
            parts
                .iter()
                .map(|p| p.describe())
                .collect::<Vec<_>>()
                .join(" x ")
        );
        Self::new(ProductClone { parts, label })
    }

    pub fn power(base: &FiniteClone, k: usize) -> FiniteClone {
        let label = format!("{}^{}", base.describe(), k);
        Self::new(ProductClone {
            parts: vec![base.clone(); k],
            label,
        })
    }

    /// The subclone of `p`'s target generated by the images of the letters.
    pub fn image(p: &FreeMorphism) -> FiniteClone {
        Self::new(ImageClone {
            p: p.clone(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn delta(inner: &FiniteClone) -> FiniteClone {
        Self::new(DeltaClone {
            inner: inner.clone(),
        })
    }

    /// `Endo(C_m)`, with intensional elements.
    pub fn endo_of_carrier(base: &FiniteClone, m: usize) -> FiniteClone {
        Self::new(EndoOfCarrier {
            base: base.clone(),
            m,
        })
    }

    pub fn ops(&self) -> &dyn CloneOps {
        &*self.0.ops
    }

    pub fn shape(&self) -> CloneShape<'_> {
        self.0.ops.shape()
    }

    pub fn describe(&self) -> String {
        self.0.ops.describe()
    }

    pub fn guard(&self) -> u64 {
        self.0.guard
    }

    pub fn ptr_eq(&self, other: &FiniteClone) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn carrier_size(&self, n: usize) -> Option<u128> {
        if let Some(c) = self
            .0
            .carriers
            .lock()
            .expect("carrier cache poisoned")
            .get(&n)
        {
            return Some(c.len() as u128);
        }
        self.0.ops.carrier_size(n)
    }

    pub fn is_enumerable(&self, n: usize) -> bool {
        match self.0.ops.shape() {
            CloneShape::Free(_) => false,
            CloneShape::Image(_) => self.carrier(n).is_ok(),
            _ => matches!(self.carrier_size(n), Some(s) if s <= self.0.guard as u128),
        }
    }

    /// `C_n` in canonical order, or `GuardExceeded`.
    pub fn carrier(&self, n: usize) -> Result<Arc<Carrier>, CloneError> {
        if let Some(c) = self
            .0
            .carriers
            .lock()
            .expect("carrier cache poisoned")
            .get(&n)
        {
            return Ok(c.clone());
        }
        let elems = self.0.ops.enumerate(n, self.0.guard)?;
        let c = Arc::new(Carrier::new(elems));
        Ok(self
            .0
            .carriers
            .lock()
            .expect("carrier cache poisoned")
            .entry(n)
            .or_insert(c)
            .clone())
    }

    pub fn index_of(&self, n: usize, e: &Elem) -> Result<usize, CloneError> {
        self.carrier(n)?.position(e).ok_or_else(|| {
            CloneError::NotInCarrier(format!("{} is not in {}_{}", e, self.describe(), n))
        })
    }

    pub fn var(&self, n: usize, i: usize) -> Elem {
        self.0.ops.var(n, i)
    }

    pub fn vars(&self, n: usize) -> Vec<Elem> {
        (1..=n).map(|i| self.var(n, i)).collect()
    }

    pub fn subst(
        &self,
        m: usize,
        n: usize,
        head: &Elem,
        args: &[Elem],
    ) -> Result<Elem, CloneError> {
        if args.len() != m {
            return Err(CloneError::ArityMismatch(format!(
                "s_{{{},{}}} given {} arguments",
                m,
                n,
                args.len()
            )));
        }
        self.0.ops.subst(m, n, head, args)
    }

    pub fn equal(&self, n: usize, a: &Elem, b: &Elem) -> Result<bool, CloneError> {
        self.0.ops.equal(n, a, b, self.0.guard)
    }

    pub fn random_elem(&self, n: usize, rng: &mut ChaCha8Rng) -> Option<Elem> {
        self.0.ops.random_elem(n, rng, self.0.guard)
    }
}

impl std::fmt::Debug for FiniteClone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.describe())
    }
}

pub(crate) fn guard_error(what: String, size: Option<u128>, guard: u64) -> CloneError {
    CloneError::GuardExceeded { what, size, guard }
}

fn checked_pow(b: u128, e: u128) -> Option<u128> {
    if b <= 1 {
        return Some(if e == 0 { 1 } else { b });
    }
    b.checked_pow(u32::try_from(e).ok()?)
}

fn check_size(
    what: impl FnOnce() -> String,
    size: Option<u128>,
    guard: u64,
) -> Result<usize, CloneError> {
    match size {
        Some(s) if s <= guard as u128 => Ok(s as usize),
        _ => Err(guard_error(what(), size, guard)),
    }
}

/// Random tree of height at most 3, used for sampling the free clone.
fn random_tree(
    alpha: &RankedAlphabet,
    n: usize,
    height: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Tree> {
    let leaves: Vec<Tree> = (1..=n)
        .map(Tree::Var)
        .chain(
            alpha
                .letters()
                .filter(|&(_, k)| k == 0)
                .map(|(j, _)| Tree::node(j, Vec::new())),
        )
        .collect();
    let inner: Vec<(usize, usize)> = alpha.letters().filter(|&(_, k)| k > 0).collect();
    if height == 0 || inner.is_empty() || (!leaves.is_empty() && rng.gen_bool(0.4)) {
        return leaves.get(rng.gen_range(0..leaves.len().max(1))).cloned();
    }
    let (j, k) = inner[rng.gen_range(0..inner.len())];
    let cs = (0..k)
        .map(|_| random_tree(alpha, n, height - 1, rng))
        .collect::<Option<Vec<_>>>()?;
    Some(Tree::node(j, cs))
}

/// `𝔽Σ`: trees with grafting.
pub struct FreeClone {
    alpha: RankedAlphabet,
}

impl CloneOps for FreeClone {
    fn describe(&self) -> String {
        format!("F{}", self.alpha)
    }

    fn carrier_size(&self, _n: usize) -> Option<u128> {
        None
    }

    fn enumerate(&self, n: usize, guard: u64) -> Result<Vec<Elem>, CloneError> {
        Err(guard_error(
            format!("carrier {} of the free clone {}", n, self.describe()),
            None,
            guard,
        ))
    }

    fn var(&self, _n: usize, i: usize) -> Elem {
        Elem::Tree(Tree::Var(i))
    }

    fn subst(&self, m: usize, n: usize, head: &Elem, args: &[Elem]) -> Result<Elem, CloneError> {
        let t = head
            .as_tree()
            .ok_or_else(|| CloneError::NotInCarrier(format!("{} is not a tree", head)))?;
        let args = args
            .iter()
            .map(|a| {
                a.as_tree()
                    .cloned()
                    .ok_or_else(|| CloneError::NotInCarrier(format!("{} is not a tree", a)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        super::tree_subst(&self.alpha, m, n, t, &args).map(Elem::Tree)
    }

    fn random_elem(&self, n: usize, rng: &mut ChaCha8Rng, _guard: u64) -> Option<Elem> {
        random_tree(&self.alpha, n, 3, rng).map(Elem::Tree)
    }

    fn shape(&self) -> CloneShape<'_> {
        CloneShape::Free(&self.alpha)
    }
}

/// `Endo(Q)`: all functions `Qⁿ → Q` as tables.
pub struct EndoClone {
    q: usize,
}

impl EndoClone {
    fn rows(&self, n: usize) -> usize {
        self.q.pow(n as u32)
    }

    fn check_table<'a>(&self, n: usize, e: &'a Elem) -> Result<&'a [u32], CloneError> {
        match e.as_table() {
            Some(t) if t.len() == self.rows(n) => Ok(t),
            _ => Err(CloneError::NotInCarrier(format!(
                "{} is not in Endo({})_{}",
                e, self.q, n
            ))),
        }
    }
}

impl CloneOps for EndoClone {
    fn describe(&self) -> String {
        format!("Endo({})", self.q)
    }

    fn carrier_size(&self, n: usize) -> Option<u128> {
        checked_pow(self.q as u128, checked_pow(self.q as u128, n as u128)?)
    }

    fn enumerate(&self, n: usize, guard: u64) -> Result<Vec<Elem>, CloneError> {
        let size = check_size(
            || format!("Endo({})_{}", self.q, n),
            self.carrier_size(n),
            guard,
        )?;
        let rows = self.rows(n);
        Ok((0..size)
            .map(|mut idx| {
                let mut t = vec![0u32; rows];
                for r in (0..rows).rev() {
                    t[r] = (idx % self.q) as u32;
                    idx /= self.q;
                }
                Elem::table(t)
            })
            .collect())
    }

    fn var(&self, n: usize, i: usize) -> Elem {
        let stride = self.q.pow((n - i) as u32);
        Elem::table(
            (0..self.rows(n))
                .map(|r| ((r / stride) % self.q) as u32)
                .collect::<Vec<_>>(),
        )
    }

    fn subst(&self, m: usize, n: usize, head: &Elem, args: &[Elem]) -> Result<Elem, CloneError> {
        let h = self.check_table(m, head)?;
        let gs = args
            .iter()
            .map(|a| self.check_table(n, a))
            .collect::<Result<Vec<_>, _>>()?;
        let q = self.q;
        let out: Vec<u32> = (0..self.rows(n))
            .map(|r| {
                let hi = gs.iter().fold(0usize, |acc, g| acc * q + g[r] as usize);
                h[hi]
            })
            .collect();
        Ok(Elem::table(out))
    }

    fn random_elem(&self, n: usize, rng: &mut ChaCha8Rng, _guard: u64) -> Option<Elem> {
        if self.q == 0 {
            return None;
        }
        Some(Elem::table(
            (0..self.rows(n))
                .map(|_| rng.gen_range(0..self.q) as u32)
                .collect::<Vec<_>>(),
        ))
    }

    fn shape(&self) -> CloneShape<'_> {
        CloneShape::Endo(self.q)
    }
}

/// The clone of a monoid action: `C_n = Q ⊎ (M × {1..n})`.
pub struct ActionClone {
    ma: MonoidAction,
}

impl CloneOps for ActionClone {
    fn describe(&self) -> String {
        format!("Act({}|{})", self.ma.monoid().size(), self.ma.states())
    }

    fn carrier_size(&self, n: usize) -> Option<u128> {
        Some((self.ma.states() + self.ma.monoid().size() * n) as u128)
    }

    fn enumerate(&self, n: usize, _guard: u64) -> Result<Vec<Elem>, CloneError> {
        let mut out: Vec<Elem> = (0..self.ma.states()).map(Elem::Const).collect();
        for m in 0..self.ma.monoid().size() {
            out.extend((1..=n).map(|i| Elem::Act(m, i)));
        }
        Ok(out)
    }

    fn var(&self, _n: usize, i: usize) -> Elem {
        Elem::Act(self.ma.monoid().unit(), i)
    }

    fn subst(&self, m: usize, n: usize, head: &Elem, args: &[Elem]) -> Result<Elem, CloneError> {
        let bad = |e: &Elem, k: usize| {
            CloneError::NotInCarrier(format!("{} is not in {}_{}", e, self.describe(), k))
        };
        let check = |e: &Elem, k: usize| match e {
            Elem::Const(q) if *q < self.ma.states() => Ok(()),
            Elem::Act(a, i) if *a < self.ma.monoid().size() && (1..=k).contains(i) => Ok(()),
            _ => Err(bad(e, k)),
        };
        check(head, m)?;
        for a in args {
            check(a, n)?;
        }
        Ok(match head {
            Elem::Const(q) => Elem::Const(*q),
            Elem::Act(a, i) => match &args[*i - 1] {
                Elem::Act(b, j) => Elem::Act(self.ma.monoid().mul(*a, *b), *j),
                Elem::Const(q) => Elem::Const(self.ma.act(*a, *q)),
                other => return Err(bad(other, n)),
            },
            other => return Err(bad(other, m)),
        })
    }

    fn random_elem(&self, n: usize, rng: &mut ChaCha8Rng, guard: u64) -> Option<Elem> {
        let all = self.enumerate(n, guard).ok()?;
        (!all.is_empty()).then(|| all[rng.gen_range(0..all.len())].clone())
    }

    fn shape(&self) -> CloneShape<'_> {
        CloneShape::Action(&self.ma)
    }
}

/// Finite products and powers, componentwise.
pub struct ProductClone {
    parts: Vec<FiniteClone>,
    label: String,
}

fn components(e: &Elem, k: usize) -> Result<&[Elem], CloneError> {
    match e.as_tuple() {
        Some(cs) if cs.len() == k => Ok(cs),
        _ => Err(CloneError::NotInCarrier(format!(
            "{} is not a {}-tuple",
            e, k
        ))),
    }
}

impl CloneOps for ProductClone {
    fn describe(&self) -> String {
        self.label.clone()
    }

    fn carrier_size(&self, n: usize) -> Option<u128> {
        self.parts.iter().try_fold(1u128, |acc, p| {
            p.carrier_size(n).and_then(|s| acc.checked_mul(s))
        })
    }

    fn enumerate(&self, n: usize, guard: u64) -> Result<Vec<Elem>, CloneError> {
        check_size(
            || format!("{}_{}", self.label, n),
            self.carrier_size(n),
            guard,
        )?;
        let pools = self
            .parts
            .iter()
            .map(|p| p.carrier(n).map(|c| c.elems().to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = Vec::new();
        for_each_product(&pools, |cs| out.push(Elem::tuple(cs.to_vec())));
        Ok(out)
    }

    fn var(&self, n: usize, i: usize) -> Elem {
        Elem::tuple(self.parts.iter().map(|p| p.var(n, i)).collect::<Vec<_>>())
    }

    fn subst(&self, m: usize, n: usize, head: &Elem, args: &[Elem]) -> Result<Elem, CloneError> {
        let k = self.parts.len();
        let h = components(head, k)?;
        let a = args
            .iter()
            .map(|x| components(x, k))
            .collect::<Result<Vec<_>, _>>()?;
        let out = self
            .parts
            .iter()
            .enumerate()
            .map(|(c, p)| {
                let col: Vec<Elem> = a.iter().map(|x| x[c].clone()).collect();
                p.subst(m, n, &h[c], &col)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Elem::tuple(out))
    }

    fn equal(&self, n: usize, a: &Elem, b: &Elem, _guard: u64) -> Result<bool, CloneError> {
        let k = self.parts.len();
        let (x, y) = (components(a, k)?, components(b, k)?);
        for (p, (u, v)) in self.parts.iter().zip(x.iter().zip(y.iter())) {
            if !p.equal(n, u, v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn random_elem(&self, n: usize, rng: &mut ChaCha8Rng, _guard: u64) -> Option<Elem> {
        let cs = self
            .parts
            .iter()
            .map(|p| p.random_elem(n, rng))
            .collect::<Option<Vec<_>>>()?;
        Some(Elem::tuple(cs))
    }

    fn shape(&self) -> CloneShape<'_> {
        CloneShape::Product(&self.parts)
    }
}

/// The image of a morphism out of a free clone: at each arity, the closure
/// of the variables under the letter images. Elements are listed in order
/// of discovery.
pub struct ImageClone {
    p: FreeMorphism,
    cache: Mutex<HashMap<usize, Arc<Vec<Elem>>>>,
}

impl ImageClone {
    fn generate(&self, n: usize, guard: u64) -> Result<Arc<Vec<Elem>>, CloneError> {
        if let Some(c) = self.cache.lock().expect("image cache poisoned").get(&n) {
            return Ok(c.clone());
        }
        fn add(e: Elem, elems: &mut Vec<Elem>, pos: &mut HashMap<Elem, usize>) {
            if !pos.contains_key(&e) {
                pos.insert(e.clone(), elems.len());
                elems.push(e);
            }
        }
        let target = self.p.target();
        let alpha = self.p.alphabet();
        let mut elems: Vec<Elem> = Vec::new();
        let mut pos: HashMap<Elem, usize> = HashMap::new();
        for v in target.vars(n) {
            add(v, &mut elems, &mut pos);
        }
        for (j, _) in alpha.letters().filter(|&(_, k)| k == 0) {
            let e = target.subst(0, n, &self.p.letters()[j - 1], &[])?;
            add(e, &mut elems, &mut pos);
        }
        // semi-naive closure: each round only combines tuples touching the
        // elements found in the previous round
        let mut done = 0usize;
        loop {
            let before = elems.len();
            let mut fresh: Vec<Elem> = Vec::new();
            let mut fresh_set: HashSet<Elem> = HashSet::new();
            for (j, k) in alpha.letters().filter(|&(_, k)| k > 0) {
                let pools = vec![elems[..before].to_vec(); k];
                let mut err = None;
                for_each_product(&pools, |cs| {
                    if err.is_some() || cs.iter().all(|c| pos[c] < done) {
                        return;
                    }
                    match target.subst(k, n, &self.p.letters()[j - 1], cs) {
                        Ok(e) => {
                            if !pos.contains_key(&e) && fresh_set.insert(e.clone()) {
                                fresh.push(e);
                            }
                        }
                        Err(e) => err = Some(e),
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                if (before + fresh.len()) as u64 > guard {
                    return Err(guard_error(
                        format!("image carrier {}_{}", self.describe(), n),
                        None,
                        guard,
                    ));
                }
            }
            for e in fresh {
                add(e, &mut elems, &mut pos);
            }
            done = before;
            if elems.len() == before {
                break;
            }
        }
        let out = Arc::new(elems);
        self.cache
            .lock()
            .expect("image cache poisoned")
            .insert(n, out.clone());
        Ok(out)
    }
}

impl CloneOps for ImageClone {
    fn describe(&self) -> String {
        format!(
            "Im({} -> {})",
            self.p.alphabet(),
            self.p.target().describe()
        )
    }

    fn carrier_size(&self, n: usize) -> Option<u128> {
        self.cache
            .lock()
            .expect("image cache poisoned")
            .get(&n)
            .map(|c| c.len() as u128)
    }

    fn enumerate(&self, n: usize, guard: u64) -> Result<Vec<Elem>, CloneError> {
        Ok(self.generate(n, guard)?.to_vec())
    }

    fn var(&self, n: usize, i: usize) -> Elem {
        self.p.target().var(n, i)
    }

    fn subst(&self, m: usize, n: usize, head: &Elem, args: &[Elem]) -> Result<Elem, CloneError> {
        self.p.target().subst(m, n, head, args)
    }

    fn equal(&self, n: usize, a: &Elem, b: &Elem, _guard: u64) -> Result<bool, CloneError> {
        self.p.target().equal(n, a, b)
    }

    fn random_elem(&self, n: usize, rng: &mut ChaCha8Rng, guard: u64) -> Option<Elem> {
        let all = self.generate(n, guard).ok()?;
        (!all.is_empty()).then(|| all[rng.gen_range(0..all.len())].clone())
    }

    fn shape(&self) -> CloneShape<'_> {
        CloneShape::Image(&self.p)
    }
}

/// `δC`: `(δC)_n = C_{n+1}`, the last variable acting as a new constant.
pub struct DeltaClone {
    inner: FiniteClone,
}

impl CloneOps for DeltaClone {
    fn describe(&self) -> String {
        format!("delta {}", self.inner.describe())
    }

    fn carrier_size(&self, n: usize) -> Option<u128> {
        self.inner.carrier_size(n + 1)
    }

    fn enumerate(&self, n: usize, _guard: u64) -> Result<Vec<Elem>, CloneError> {
        Ok(self.inner.carrier(n + 1)?.elems().to_vec())
    }

    fn var(&self, n: usize, i: usize) -> Elem {
        self.inner.var(n + 1, i)
    }

    fn subst(&self, m: usize, n: usize, head: &Elem, args: &[Elem]) -> Result<Elem, CloneError> {
        let mut ext = args.to_vec();
        ext.push(self.inner.var(n + 1, n + 1));
        self.inner.subst(m + 1, n + 1, head, &ext)
    }

    fn equal(&self, n: usize, a: &Elem, b: &Elem, _guard: u64) -> Result<bool, CloneError> {
        self.inner.equal(n + 1, a, b)
    }

    fn random_elem(&self, n: usize, rng: &mut ChaCha8Rng, _guard: u64) -> Option<Elem> {
        self.inner.random_elem(n + 1, rng)
    }

    fn shape(&self) -> CloneShape<'_> {
        CloneShape::Delta(&self.inner)
    }
}

/// `Endo(C_m)` for a clone `C`: operations on the carrier `C_m`, kept as
/// closures and compared pointwise under the guard.
pub struct EndoOfCarrier {
    base: FiniteClone,
    m: usize,
}

impl EndoOfCarrier {
    fn func<'a>(&self, e: &'a Elem, n: usize) -> Result<&'a IntFn, CloneError> {
        match e.as_func() {
            Some(f) if f.arity() == n => Ok(f),
            _ => Err(CloneError::NotInCarrier(format!(
                "{} is not an {}-ary operation",
                e, n
            ))),
        }
    }
}

impl CloneOps for EndoOfCarrier {
    fn describe(&self) -> String {
        format!("Endo({}_{})", self.base.describe(), self.m)
    }

    fn carrier_size(&self, n: usize) -> Option<u128> {
        let c = self.base.carrier_size(self.m)?;
        checked_pow(c, checked_pow(c, n as u128)?)
    }

    fn enumerate(&self, n: usize, guard: u64) -> Result<Vec<Elem>, CloneError> {
        let size = check_size(
            || self.describe() + &format!("_{}", n),
            self.carrier_size(n),
            guard,
        )?;
        let carrier = self.base.carrier(self.m)?;
        let q = carrier.len();
        let rows = q.pow(n as u32);
        Ok((0..size)
            .map(|mut idx| {
                let mut t = vec![0usize; rows];
                for r in (0..rows).rev() {
                    t[r] = idx % q;
                    idx /= q;
                }
                let carrier = carrier.clone();
                Elem::Func(IntFn::new(n, move |args| {
                    let r = args.iter().try_fold(0usize, |acc, a| {
                        carrier.position(a).map(|p| acc * q + p).ok_or_else(|| {
                            CloneError::NotInCarrier(format!("{} outside the carrier", a))
                        })
                    })?;
                    Ok(carrier.elems()[t[r]].clone())
                }))
            })
            .collect())
    }

    fn var(&self, n: usize, i: usize) -> Elem {
        Elem::Func(IntFn::new(n, move |args| Ok(args[i - 1].clone())))
    }

    fn subst(&self, m: usize, n: usize, head: &Elem, args: &[Elem]) -> Result<Elem, CloneError> {
        let f = self.func(head, m)?.clone();
        let gs = args
            .iter()
            .map(|a| self.func(a, n).cloned())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Elem::Func(IntFn::new(n, move |ys| {
            let inner = gs
                .iter()
                .map(|g| g.call(ys))
                .collect::<Result<Vec<_>, _>>()?;
            f.call(&inner)
        })))
    }

    fn equal(&self, n: usize, a: &Elem, b: &Elem, guard: u64) -> Result<bool, CloneError> {
        if a == b {
            return Ok(true);
        }
        let (f, g) = (self.func(a, n)?, self.func(b, n)?);
        let carrier = self.base.carrier(self.m)?;
        let points = checked_pow(carrier.len() as u128, n as u128);
        check_size(|| format!("{}^{}", self.describe(), n), points, guard)?;
        let pools = vec![carrier.elems().to_vec(); n];
        let mut result = Ok(true);
        if n == 0 {
            return self.base.equal(self.m, &f.call(&[])?, &g.call(&[])?);
        }
        for_each_product(&pools, |ys| {
            if !matches!(result, Ok(true)) {
                return;
            }
            result = (|| self.base.equal(self.m, &f.call(ys)?, &g.call(ys)?))();
        });
        result
    }

    fn random_elem(&self, n: usize, rng: &mut ChaCha8Rng, _guard: u64) -> Option<Elem> {
        let carrier = self.base.carrier(self.m).ok()?;
        let q = carrier.len();
        if q == 0 {
            return None;
        }
        let rows = q.checked_pow(n as u32)?;
        let t: Vec<usize> = (0..rows).map(|_| rng.gen_range(0..q)).collect();
        Some(Elem::Func(IntFn::new(n, move |args| {
            let r = args.iter().try_fold(0usize, |acc, a| {
                carrier
                    .position(a)
                    .map(|p| acc * q + p)
                    .ok_or_else(|| CloneError::NotInCarrier(format!("{} outside the carrier", a)))
            })?;
            Ok(carrier.elems()[t[r]].clone())
        })))
    }

    fn shape(&self) -> CloneShape<'_> {
        CloneShape::EndoOfCarrier(&self.base, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone::{parse_tree, Monoid};

    #[test]
    fn endo_projection_and_sizes() {
        let e = FiniteClone::endo(2);
        assert_eq!(e.var(2, 1), Elem::table(vec![0, 0, 1, 1]));
        assert_eq!(e.var(2, 2), Elem::table(vec![0, 1, 0, 1]));
        assert_eq!(e.carrier(1).unwrap().len(), 4);
        assert_eq!(e.carrier_size(2), Some(16));
    }

    #[test]
    fn xor_of_negation_and_identity_is_constant_one() {
        let e = FiniteClone::endo(2);
        let xor = Elem::table(vec![0, 1, 1, 0]);
        let neg = Elem::table(vec![1, 0]);
        let id = Elem::table(vec![0, 1]);
        assert_eq!(
            e.subst(2, 1, &xor, &[neg, id]).unwrap(),
            Elem::table(vec![1, 1])
        );
    }

    #[test]
    fn z2_action_substitution() {
        let ma = MonoidAction::flip();
        let c = FiniteClone::action(&ma).unwrap();
        let s = Elem::Act(1, 1);
        assert_eq!(c.subst(1, 1, &s, std::slice::from_ref(&s)).unwrap(), Elem::Act(0, 1));
        assert_eq!(
            c.subst(1, 0, &s, &[Elem::Const(0)]).unwrap(),
            Elem::Const(1)
        );
        assert_eq!(c.carrier_size(2), Some(2 + 2 * 2));
        let trivial = MonoidAction::new(Monoid::trivial(), 3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(
            FiniteClone::action(&trivial)
                .unwrap()
                .carrier(2)
                .unwrap()
                .len(),
            5
        );
    }

    #[test]
    fn empty_product_is_terminal() {
        let t = FiniteClone::product(Vec::new());
        for n in 0..3 {
            assert_eq!(t.carrier(n).unwrap().len(), 1);
        }
    }

    #[test]
    fn image_of_identity_letter() {
        let alpha = RankedAlphabet::new(vec![1]);
        let p = FreeMorphism::new(&alpha, &FiniteClone::endo(2), vec![Elem::table(vec![0, 1])])
            .unwrap();
        let im = FiniteClone::image(&p);
        assert_eq!(im.carrier(1).unwrap().elems(), &[Elem::table(vec![0, 1])]);
    }

    #[test]
    fn image_of_negation_has_two_unary_elements() {
        let alpha = RankedAlphabet::new(vec![1]);
        let p = FreeMorphism::new(&alpha, &FiniteClone::endo(2), vec![Elem::table(vec![1, 0])])
            .unwrap();
        let im = FiniteClone::image(&p);
        assert_eq!(im.carrier(1).unwrap().len(), 2);
        assert_eq!(im.carrier(0).unwrap().len(), 0);
    }

    #[test]
    fn large_power_is_refused_but_usable() {
        let p = FiniteClone::power(&FiniteClone::endo(2), 16);
        assert_eq!(p.carrier_size(1), Some(4u128.pow(16)));
        assert!(matches!(
            p.carrier(1),
            Err(CloneError::GuardExceeded { .. })
        ));
        let v = p.var(1, 1);
        let r = p.subst(1, 1, &v, std::slice::from_ref(&v)).unwrap();
        assert!(p.equal(1, &r, &v).unwrap());
    }

    #[test]
    fn delta_reindexes() {
        let d = FiniteClone::delta(&FiniteClone::endo(2));
        assert_eq!(d.carrier(0).unwrap().len(), 4);
        assert_eq!(d.var(1, 1), FiniteClone::endo(2).var(2, 1));
    }

    #[test]
    fn free_substitution_through_handle() {
        let f = FiniteClone::free(&RankedAlphabet::new(vec![1, 1]));
        let a = Elem::Tree(parse_tree("(a1 x1)").unwrap());
        let b = Elem::Tree(parse_tree("(a2 x1)").unwrap());
        assert_eq!(
            f.subst(1, 1, &a, &[b]).unwrap(),
            Elem::Tree(parse_tree("(a1 (a2 x1))").unwrap())
        );
        assert!(!f.is_enumerable(0));
    }

    #[test]
    fn endo_of_carrier_compares_pointwise() {
        let e = FiniteClone::endo_of_carrier(&FiniteClone::endo(2), 1);
        let v = e.var(1, 1);
        let w = e.subst(1, 1, &v, &[e.var(1, 1)]).unwrap();
        assert_ne!(v, w);
        assert!(e.equal(1, &v, &w).unwrap());
        assert_eq!(e.carrier(1).unwrap().len(), 256);
    }
}
