use std::fmt;
use std::sync::Arc;

/// Simple types over the single base type `o`.
///
/// Products are n-ary. The empty product is normalized to [`SimpleType::Unit`]
/// by [`SimpleType::product`], so structural equality is type equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimpleType {
    Base,
    Arrow(Arc<SimpleType>, Arc<SimpleType>),
    Product(Arc<[SimpleType]>),
    Unit,
}

impl SimpleType {
    pub fn arrow(dom: SimpleType, cod: SimpleType) -> SimpleType {
        SimpleType::Arrow(Arc::new(dom), Arc::new(cod))
    }

    pub fn product(components: Vec<SimpleType>) -> SimpleType {
        if components.is_empty() {
            SimpleType::Unit
        } else {
            SimpleType::Product(components.into())
        }
    }

    /// `o ⇒ … ⇒ o ⇒ cod` with `n` curried base arguments.
    pub fn base_arrows(n: usize, cod: SimpleType) -> SimpleType {
        (0..n).fold(cod, |acc, _| SimpleType::arrow(SimpleType::Base, acc))
    }

    /// `A ⇒ cod` curried over every element of `args`.
    pub fn arrows(args: &[SimpleType], cod: SimpleType) -> SimpleType {
        args.iter()
            .rev()
            .fold(cod, |acc, a| SimpleType::arrow(a.clone(), acc))
    }

    /// Components of a product; unit has none. `None` for base and arrows.
    pub fn components(&self) -> Option<&[SimpleType]> {
        match self {
            SimpleType::Product(cs) => Some(cs),
            SimpleType::Unit => Some(&[]),
            _ => None,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SimpleType::Base | SimpleType::Unit => 0,
            SimpleType::Arrow(a, b) => 1 + a.depth().max(b.depth()),
            SimpleType::Product(cs) => 1 + cs.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, left_of_arrow: bool) -> fmt::Result {
        match self {
            SimpleType::Base => write!(f, "o"),
            SimpleType::Unit => write!(f, "1"),
            SimpleType::Arrow(a, b) => {
                if left_of_arrow {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, true)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, false)?;
                if left_of_arrow {
                    write!(f, ")")?;
                }
                Ok(())
            }
            SimpleType::Product(cs) => {
                write!(f, "(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    c.fmt_prec(f, false)?;
                }
                if cs.len() == 1 {
                    write!(f, " *")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

impl fmt::Debug for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_product_is_unit() {
        assert_eq!(SimpleType::product(vec![]), SimpleType::Unit);
    }

    #[test]
    fn display_round_brackets() {
        let t = SimpleType::arrow(
            SimpleType::arrow(SimpleType::Base, SimpleType::Base),
            SimpleType::product(vec![SimpleType::Base, SimpleType::Unit]),
        );
        assert_eq!(t.to_string(), "(o -> o) -> (o * 1)");
        let one = SimpleType::product(vec![SimpleType::Base]);
        assert_eq!(one.to_string(), "(o *)");
    }
}
