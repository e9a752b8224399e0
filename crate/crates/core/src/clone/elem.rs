use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::{CloneError, Tree};

type FnBody = dyn Fn(&[Elem]) -> Result<Elem, CloneError> + Send + Sync;

/// An intensional n-ary operation on the elements of some carrier. Two
/// handles are equal only when they share the same closure.
#[derive(Clone)]
pub struct IntFn {
    arity: usize,
    body: Arc<FnBody>,
}

impl IntFn {
    pub fn new(
        arity: usize,
        body: impl Fn(&[Elem]) -> Result<Elem, CloneError> + Send + Sync + 'static,
    ) -> IntFn {
        IntFn {
            arity,
            body: Arc::new(body),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn call(&self, args: &[Elem]) -> Result<Elem, CloneError> {
        if args.len() != self.arity {
            return Err(CloneError::ArityMismatch(format!(
                "{}-ary operation applied to {} arguments",
                self.arity,
                args.len()
            )));
        }
        (self.body)(args)
    }
}

impl PartialEq for IntFn {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && Arc::ptr_eq(&self.body, &other.body)
    }
}

impl Eq for IntFn {}

impl Hash for IntFn {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        (Arc::as_ptr(&self.body) as *const () as usize).hash(state);
    }
}

/// An element of some clone carrier.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Elem {
    /// Free clone.
    Tree(Tree),
    /// `Endo(Q)`: the values of `Qⁿ → Q` in row-major order, first argument
    /// most significant.
    Table(Arc<[u32]>),
    /// Action clone constant `q ∈ Q`.
    Const(usize),
    /// Action clone element `m · x_i`.
    Act(usize, usize),
    /// Products and powers.
    Tuple(Arc<[Elem]>),
    /// Intensional operation on a carrier.
    Func(IntFn),
}

impl Elem {
    pub fn table(values: impl Into<Vec<u32>>) -> Elem {
        Elem::Table(values.into().into())
    }

    pub fn tuple(parts: impl Into<Vec<Elem>>) -> Elem {
        Elem::Tuple(parts.into().into())
    }

    pub fn as_tree(&self) -> Option<&Tree> {
        match self {
            Elem::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_table(&self) -> Option<&[u32]> {
        match self {
            Elem::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Elem]> {
        match self {
            Elem::Tuple(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_func(&self) -> Option<&IntFn> {
        match self {
            Elem::Func(f) => Some(f),
            _ => None,
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Tree(t) => write!(f, "{}", t),
            Elem::Table(vs) => {
                write!(f, "[")?;
                for (k, v) in vs.iter().enumerate() {
                    if k > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", v)?;
                }
                write!(f, "]")
            }
            Elem::Const(q) => write!(f, "{}", q),
            Elem::Act(m, i) => write!(f, "m{}.x{}", m, i),
            Elem::Tuple(cs) => {
                write!(f, "<")?;
                for (k, c) in cs.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", c)?;
                }
                write!(f, ">")
            }
            Elem::Func(g) => write!(f, "<{}-ary operation>", g.arity()),
        }
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
