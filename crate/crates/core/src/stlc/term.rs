use std::fmt;

use super::types::SimpleType;

/// Nameless λ-terms. `Var(0)` is the innermost binder; binders carry their
/// domain type. Projections are 1-based, as in `M.1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Lam(SimpleType, Box<Term>),
    App(Box<Term>, Box<Term>),
    Tuple(Vec<Term>),
    Proj(Box<Term>, usize),
    Unit,
}

impl Term {
    pub fn lam(ty: SimpleType, body: Term) -> Term {
        Term::Lam(ty, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    /// Applies `head` to each argument in turn.
    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    /// Empty tuples are the unit value.
    pub fn tuple(components: Vec<Term>) -> Term {
        if components.is_empty() {
            Term::Unit
        } else {
            Term::Tuple(components)
        }
    }

    pub fn proj(subject: Term, index: usize) -> Term {
        Term::Proj(Box::new(subject), index)
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Unit => 1,
            Term::Lam(_, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Tuple(cs) => 1 + cs.iter().map(Term::size).sum::<usize>(),
            Term::Proj(s, _) => 1 + s.size(),
        }
    }

    /// Number of free variables needed to scope the term, i.e. one more than
    /// the largest free index (0 for closed terms).
    pub fn free_bound(&self) -> usize {
        fn go(t: &Term, depth: usize) -> usize {
            match t {
                Term::Var(k) => (k + 1).saturating_sub(depth),
                Term::Unit => 0,
                Term::Lam(_, b) => go(b, depth + 1),
                Term::App(f, a) => go(f, depth).max(go(a, depth)),
                Term::Tuple(cs) => cs.iter().map(|c| go(c, depth)).max().unwrap_or(0),
                Term::Proj(s, _) => go(s, depth),
            }
        }
        go(self, 0)
    }

    pub fn is_closed(&self) -> bool {
        self.free_bound() == 0
    }

    /// Adds `by` to every free index `>= cutoff`.
    pub fn shift(&self, by: usize, cutoff: usize) -> Term {
        match self {
            Term::Var(k) if *k >= cutoff => Term::Var(k + by),
            Term::Var(k) => Term::Var(*k),
            Term::Unit => Term::Unit,
            Term::Lam(ty, b) => Term::lam(ty.clone(), b.shift(by, cutoff + 1)),
            Term::App(f, a) => Term::app(f.shift(by, cutoff), a.shift(by, cutoff)),
            Term::Tuple(cs) => Term::Tuple(cs.iter().map(|c| c.shift(by, cutoff)).collect()),
            Term::Proj(s, i) => Term::proj(s.shift(by, cutoff), *i),
        }
    }

    /// Replaces the free variable with index `depth` by `s`, removing it from
    /// scope.
    ///
    /// `self` lives in a context `Γ, x, Δ` with `|Δ| = depth`; `s` lives in
    /// `Γ, Δ`. Variables of `Δ` are untouched, those of `Γ` move down by one,
    /// and `s` is shifted past every binder it is pushed under.
    pub fn substitute(&self, depth: usize, s: &Term) -> Term {
        fn go(t: &Term, depth: usize, s: &Term, under: usize) -> Term {
            match t {
                Term::Var(k) => {
                    let target = depth + under;
                    if *k == target {
                        s.shift(under, 0)
                    } else if *k > target {
                        Term::Var(k - 1)
                    } else {
                        Term::Var(*k)
                    }
                }
                Term::Unit => Term::Unit,
                Term::Lam(ty, b) => Term::lam(ty.clone(), go(b, depth, s, under + 1)),
                Term::App(f, a) => Term::app(go(f, depth, s, under), go(a, depth, s, under)),
                Term::Tuple(cs) => Term::Tuple(cs.iter().map(|c| go(c, depth, s, under)).collect()),
                Term::Proj(x, i) => Term::proj(go(x, depth, s, under), *i),
            }
        }
        go(self, depth, s, 0)
    }

    /// Every term reachable by contracting exactly one β- or projection redex,
    /// in leftmost-outermost order.
    pub fn reducts(&self) -> Vec<Term> {
        let mut out = Vec::new();
        match self {
            Term::App(f, a) => {
                if let Term::Lam(_, body) = f.as_ref() {
                    out.push(body.substitute(0, a));
                }
                out.extend(
                    f.reducts()
                        .into_iter()
                        .map(|f2| Term::app(f2, (**a).clone())),
                );
                out.extend(
                    a.reducts()
                        .into_iter()
                        .map(|a2| Term::app((**f).clone(), a2)),
                );
            }
            Term::Proj(s, i) => {
                if let Term::Tuple(cs) = s.as_ref() {
                    if let Some(c) = cs.get(i.wrapping_sub(1)) {
                        out.push(c.clone());
                    }
                }
                out.extend(s.reducts().into_iter().map(|s2| Term::proj(s2, *i)));
            }
            Term::Lam(ty, b) => {
                out.extend(b.reducts().into_iter().map(|b2| Term::lam(ty.clone(), b2)));
            }
            Term::Tuple(cs) => {
                for (k, c) in cs.iter().enumerate() {
                    for c2 in c.reducts() {
                        let mut cs2 = cs.clone();
                        cs2[k] = c2;
                        out.push(Term::Tuple(cs2));
                    }
                }
            }
            Term::Var(_) | Term::Unit => {}
        }
        out
    }

    fn fmt_named(
        &self,
        f: &mut fmt::Formatter<'_>,
        names: &mut Vec<String>,
        prec: u8,
    ) -> fmt::Result {
        // prec: 0 = top, 1 = application head, 2 = argument / projection subject
        match self {
            Term::Var(k) => match names.len().checked_sub(k + 1) {
                Some(pos) => write!(f, "{}", names[pos]),
                None => write!(f, "#{}", k - names.len()),
            },
            Term::Unit => write!(f, "()"),
            Term::Lam(ty, b) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                let name = format!("x{}", names.len());
                write!(f, "\\{}:{}. ", name, ty)?;
                names.push(name);
                let r = b.fmt_named(f, names, 0);
                names.pop();
                r?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Term::App(g, a) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                g.fmt_named(f, names, 1)?;
                write!(f, " ")?;
                a.fmt_named(f, names, 2)?;
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Term::Tuple(cs) => {
                write!(f, "<")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    c.fmt_named(f, names, 0)?;
                }
                write!(f, ">")
            }
            Term::Proj(s, i) => {
                s.fmt_named(f, names, 2)?;
                write!(f, ".{}", i)
            }
        }
    }
}

/// Prints with generated binder names `x0, x1, …` (by binder depth). Free
/// variables print as `#k`. The output parses back to the same term.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_named(f, &mut Vec::new(), 0)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// α-equivalence. With nameless terms this is structural equality.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    t == u
}

pub fn term_size(t: &Term) -> usize {
    t.size()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o() -> SimpleType {
        SimpleType::Base
    }

    #[test]
    fn sizes() {
        assert_eq!(Term::Unit.size(), 1);
        assert_eq!(Term::lam(o(), Term::Var(0)).size(), 2);
        assert_eq!(Term::app(Term::Var(0), Term::Var(1)).size(), 3);
    }

    #[test]
    fn alpha_equivalence_is_structural() {
        assert!(alpha_eq(
            &Term::lam(o(), Term::Var(0)),
            &Term::lam(o(), Term::Var(0))
        ));
        let k1 = Term::lam(o(), Term::lam(o(), Term::Var(1)));
        let k0 = Term::lam(o(), Term::lam(o(), Term::Var(0)));
        assert!(!alpha_eq(&k1, &k0));
    }

    #[test]
    fn substitute_at_depth() {
        let s = Term::app(Term::Var(3), Term::Var(4));
        assert_eq!(Term::Var(0).substitute(0, &s), s);
        // under a binder the substituted term is shifted
        let t = Term::lam(o(), Term::app(Term::Var(0), Term::Var(1)));
        let got = t.substitute(0, &Term::Var(5));
        assert_eq!(got, Term::lam(o(), Term::app(Term::Var(0), Term::Var(6))));
        // variables beyond the substituted one move down
        assert_eq!(Term::Var(2).substitute(0, &Term::Unit), Term::Var(1));
    }

    #[test]
    fn beta_contraction_twice_applied() {
        // (λx:o⇒o. x (x y)) f  with y = #1, f = #0 in the outer context
        let oo = SimpleType::arrow(o(), o());
        let body = Term::app(Term::Var(0), Term::app(Term::Var(0), Term::Var(2)));
        let redex = Term::app(Term::lam(oo, body), Term::Var(0));
        let reducts = redex.reducts();
        let expected = Term::app(Term::Var(0), Term::app(Term::Var(0), Term::Var(1)));
        assert_eq!(reducts[0], expected);
    }

    #[test]
    fn free_bound_counts_outer_scope() {
        assert_eq!(Term::lam(o(), Term::Var(0)).free_bound(), 0);
        assert_eq!(Term::lam(o(), Term::Var(2)).free_bound(), 2);
    }
}
