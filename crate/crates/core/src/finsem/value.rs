use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use super::domain::SemDomain;
use super::SemError;

/// An element of some `⟦A⟧_Q`.
#[derive(Clone)]
pub enum SemValue {
    Base(usize),
    Unit,
    Tuple(Arc<[SemValue]>),
    Func(SemFn),
}

type Rule = dyn Fn(&SemValue) -> Result<SemValue, SemError> + Send + Sync;

/// A function value: either a finite table over the domain enumeration or an
/// intensional rule with a memo table.
#[derive(Clone)]
pub struct SemFn(Arc<FnRepr>);

enum FnRepr {
    Table {
        dom: SemDomain,
        cod: SemDomain,
        values: Vec<SemValue>,
        index: OnceLock<u128>,
    },
    Rule {
        dom: SemDomain,
        cod: SemDomain,
        rule: Box<Rule>,
        memo: Mutex<HashMap<ValKey, SemValue>>,
        index: OnceLock<u128>,
    },
}

/// Memo key for first-order (or indexed) arguments.
#[derive(Clone, PartialEq, Eq, Hash)]
enum ValKey {
    Base(usize),
    Unit,
    Tuple(Vec<ValKey>),
    Indexed(u128),
}

fn key_of(v: &SemValue) -> Option<ValKey> {
    Some(match v {
        SemValue::Base(q) => ValKey::Base(*q),
        SemValue::Unit => ValKey::Unit,
        SemValue::Tuple(cs) => ValKey::Tuple(cs.iter().map(key_of).collect::<Option<_>>()?),
        SemValue::Func(f) => ValKey::Indexed(*f.index_cell().get()?),
    })
}

impl SemFn {
    pub fn table(dom: SemDomain, cod: SemDomain, values: Vec<SemValue>) -> SemFn {
        Self::table_with_index(dom, cod, values, None)
    }

    pub(crate) fn table_with_index(
        dom: SemDomain,
        cod: SemDomain,
        values: Vec<SemValue>,
        index: Option<u128>,
    ) -> SemFn {
        let cell = OnceLock::new();
        if let Some(i) = index {
            let _ = cell.set(i);
        }
        SemFn(Arc::new(FnRepr::Table {
            dom,
            cod,
            values,
            index: cell,
        }))
    }

    pub fn rule(
        dom: SemDomain,
        cod: SemDomain,
        rule: impl Fn(&SemValue) -> Result<SemValue, SemError> + Send + Sync + 'static,
    ) -> SemFn {
        SemFn(Arc::new(FnRepr::Rule {
            dom,
            cod,
            rule: Box::new(rule),
            memo: Mutex::new(HashMap::new()),
            index: OnceLock::new(),
        }))
    }

    pub fn domain(&self) -> &SemDomain {
        match &*self.0 {
            FnRepr::Table { dom, .. } | FnRepr::Rule { dom, .. } => dom,
        }
    }

    pub fn codomain(&self) -> &SemDomain {
        match &*self.0 {
            FnRepr::Table { cod, .. } | FnRepr::Rule { cod, .. } => cod,
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(&*self.0, FnRepr::Table { .. })
    }

    fn index_cell(&self) -> &OnceLock<u128> {
        match &*self.0 {
            FnRepr::Table { index, .. } | FnRepr::Rule { index, .. } => index,
        }
    }

    pub(crate) fn known_index(&self, dom: &SemDomain) -> Option<u128> {
        let (d, c) = dom.arrow_parts()?;
        if self.domain().same_as(d) && self.codomain().same_as(c) {
            self.index_cell().get().copied()
        } else {
            None
        }
    }

    pub(crate) fn remember_index(&self, dom: &SemDomain, idx: u128) {
        if let Some((d, c)) = dom.arrow_parts() {
            if self.domain().same_as(d) && self.codomain().same_as(c) {
                let _ = self.index_cell().set(idx);
            }
        }
    }

    /// The entry at canonical index `i`, when `self` is a table.
    pub fn table_value(&self, i: u128) -> Option<&SemValue> {
        match &*self.0 {
            FnRepr::Table { values, .. } => values.get(usize::try_from(i).ok()?),
            FnRepr::Rule { .. } => None,
        }
    }

    pub fn apply(&self, x: &SemValue) -> Result<SemValue, SemError> {
        match &*self.0 {
            FnRepr::Table { dom, values, .. } => {
                let i = dom.index_of(x)?;
                values
                    .get(i as usize)
                    .cloned()
                    .ok_or_else(|| SemError::Mismatch("table shorter than its domain".into()))
            }
            FnRepr::Rule { rule, memo, .. } => {
                let key = key_of(x);
                if let Some(k) = &key {
                    if let Some(v) = memo.lock().expect("memo poisoned").get(k) {
                        return Ok(v.clone());
                    }
                }
                let v = rule(x)?;
                if let Some(k) = key {
                    memo.lock().expect("memo poisoned").insert(k, v.clone());
                }
                Ok(v)
            }
        }
    }

    /// Points at which an intensional function has been evaluated so far,
    /// sorted by the printed argument. Tables report every point.
    pub fn observed_graph(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = match &*self.0 {
            FnRepr::Table { dom, values, .. } => match dom.enumerate() {
                Ok(xs) => xs
                    .iter()
                    .zip(values.iter())
                    .map(|(x, y)| (x.to_string(), y.to_string()))
                    .collect(),
                Err(_) => Vec::new(),
            },
            FnRepr::Rule { memo, .. } => {
                fn show(k: &ValKey) -> String {
                    match k {
                        ValKey::Base(q) => q.to_string(),
                        ValKey::Unit => "*".into(),
                        ValKey::Tuple(cs) => {
                            format!("({})", cs.iter().map(show).collect::<Vec<_>>().join(", "))
                        }
                        ValKey::Indexed(i) => format!("fn#{}", i),
                    }
                }
                memo.lock()
                    .expect("memo poisoned")
                    .iter()
                    .map(|(k, v)| (show(k), v.to_string()))
                    .collect()
            }
        };
        out.sort();
        out
    }
}

impl SemValue {
    pub fn as_base(&self) -> Option<usize> {
        match self {
            SemValue::Base(q) => Some(*q),
            _ => None,
        }
    }

    pub fn as_func(&self) -> Option<&SemFn> {
        match self {
            SemValue::Func(f) => Some(f),
            _ => None,
        }
    }

    pub fn component(&self, i: usize) -> Result<&SemValue, SemError> {
        match self {
            SemValue::Tuple(cs) => cs
                .get(i)
                .ok_or_else(|| SemError::Mismatch(format!("tuple has no component {}", i + 1))),
            _ => Err(SemError::Mismatch(format!("{} is not a tuple", self))),
        }
    }

    pub fn apply(&self, x: &SemValue) -> Result<SemValue, SemError> {
        match self {
            SemValue::Func(f) => f.apply(x),
            _ => Err(SemError::Mismatch(format!("{} is not a function", self))),
        }
    }

    /// Applies a curried function to each argument in turn.
    pub fn apply_all(&self, args: &[SemValue]) -> Result<SemValue, SemError> {
        let mut v = self.clone();
        for a in args {
            v = v.apply(a)?;
        }
        Ok(v)
    }

    /// Converts every enumerable function inside `self` into a table. Values
    /// whose function domains exceed the guard are returned unchanged.
    pub fn tabulate(&self, dom: &SemDomain) -> Result<SemValue, SemError> {
        match self {
            SemValue::Base(_) | SemValue::Unit => Ok(self.clone()),
            SemValue::Tuple(cs) => {
                let parts = dom.product_parts().ok_or_else(|| {
                    SemError::Mismatch(format!("{} is not a tuple domain", dom.ty()))
                })?;
                let cs = cs
                    .iter()
                    .zip(parts)
                    .map(|(c, p)| c.tabulate(p))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SemValue::Tuple(cs.into()))
            }
            SemValue::Func(f) => {
                let (d, c) = dom.arrow_parts().ok_or_else(|| {
                    SemError::Mismatch(format!("{} is not a function domain", dom.ty()))
                })?;
                if f.is_table() || !d.is_enumerable() {
                    return Ok(self.clone());
                }
                let values = d
                    .enumerate()?
                    .iter()
                    .map(|x| f.apply(x).and_then(|y| y.tabulate(c)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SemValue::Func(SemFn::table(d.clone(), c.clone(), values)))
            }
        }
    }
}

impl fmt::Display for SemValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemValue::Base(q) => write!(f, "{}", q),
            SemValue::Unit => write!(f, "*"),
            SemValue::Tuple(cs) => {
                write!(f, "(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", c)?;
                }
                write!(f, ")")
            }
            SemValue::Func(func) => match &*func.0 {
                FnRepr::Table { values, .. } => {
                    write!(f, "[")?;
                    for (i, v) in values.iter().enumerate() {
                        if i > 0 {
                            write!(f, " ")?;
                        }
                        write!(f, "{}", v)?;
                    }
                    write!(f, "]")
                }
                FnRepr::Rule {
                    dom, cod, index, ..
                } => match index.get() {
                    Some(i) => write!(f, "fn#{}", i),
                    None => write!(f, "<fn {:?} -> {:?}>", dom, cod),
                },
            },
        }
    }
}

impl fmt::Debug for SemValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
