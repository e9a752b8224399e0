use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::{CloneError, RankedAlphabet};

/// An element of the free clone: a variable `x_i` (1-based) or a letter
/// applied to its children. The variable bound `n` travels alongside.
#[derive(Clone, Eq)]
pub enum Tree {
    Var(usize),
    Node(usize, Arc<[Tree]>),
}

impl Tree {
    pub fn var(i: usize) -> Tree {
        Tree::Var(i)
    }

    pub fn node(letter: usize, children: impl Into<Vec<Tree>>) -> Tree {
        Tree::Node(letter, children.into().into())
    }

    /// Number of nodes, variables included.
    pub fn size(&self) -> usize {
        match self {
            Tree::Var(_) => 1,
            Tree::Node(_, cs) => 1 + cs.iter().map(Tree::size).sum::<usize>(),
        }
    }

    /// Nesting depth of substitutions: leaves (variables and constants) have
    /// height 0, and `t ∈ S⁽ᵈ⁾` iff `height(t) < d`.
    pub fn height(&self) -> usize {
        match self {
            Tree::Var(_) => 0,
            Tree::Node(_, cs) => cs.iter().map(|c| c.height() + 1).max().unwrap_or(0),
        }
    }

    pub fn max_var(&self) -> usize {
        match self {
            Tree::Var(i) => *i,
            Tree::Node(_, cs) => cs.iter().map(Tree::max_var).max().unwrap_or(0),
        }
    }

    /// Checks arities against `alpha` and variables against `n`.
    pub fn validate(&self, alpha: &RankedAlphabet, n: usize) -> Result<(), CloneError> {
        match self {
            Tree::Var(i) if (1..=n).contains(i) => Ok(()),
            Tree::Var(i) => Err(CloneError::ArityMismatch(format!(
                "variable x{} outside 1..{}",
                i, n
            ))),
            Tree::Node(j, cs) => match alpha.arity(*j) {
                Some(k) if k == cs.len() => cs.iter().try_for_each(|c| c.validate(alpha, n)),
                Some(k) => Err(CloneError::ArityMismatch(format!(
                    "letter a{} has arity {} but {} children",
                    j,
                    k,
                    cs.len()
                ))),
                None => Err(CloneError::ArityMismatch(format!(
                    "no letter a{} in {}",
                    j, alpha
                ))),
            },
        }
    }

    /// Simultaneous substitution of `args[i-1]` for `x_i`.
    pub fn subst(&self, args: &[Tree]) -> Tree {
        match self {
            Tree::Var(i) => args[*i - 1].clone(),
            Tree::Node(j, cs) => Tree::Node(*j, cs.iter().map(|c| c.subst(args)).collect()),
        }
    }

    fn root_rank(&self) -> (u8, usize) {
        match self {
            Tree::Var(i) => (0, *i),
            Tree::Node(j, _) => (1, *j),
        }
    }
}

/// `s_{m,n}` of the free clone, with arity checks.
pub fn tree_subst(
    alpha: &RankedAlphabet,
    m: usize,
    n: usize,
    t: &Tree,
    args: &[Tree],
) -> Result<Tree, CloneError> {
    if args.len() != m {
        return Err(CloneError::ArityMismatch(format!(
            "{} arguments for a tree over {} variables",
            args.len(),
            m
        )));
    }
    t.validate(alpha, m)?;
    for a in args {
        a.validate(alpha, n)?;
    }
    Ok(t.subst(args))
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Tree::Var(a), Tree::Var(b)) => a == b,
            (Tree::Node(a, cs), Tree::Node(b, ds)) => a == b && (Arc::ptr_eq(cs, ds) || cs[..] == ds[..]),
            _ => false,
        }
    }
}

impl std::hash::Hash for Tree {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Tree::Var(i) => (0u8, i).hash(state),
            Tree::Node(j, cs) => {
                (1u8, j).hash(state);
                cs[..].hash(state);
            }
        }
    }
}

/// Canonical order: size, then root (variables by index before letters by
/// index), then children lexicographically.
impl Ord for Tree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.root_rank().cmp(&other.root_rank()))
            .then_with(|| match (self, other) {
                (Tree::Node(_, a), Tree::Node(_, b)) => a.iter().cmp(b.iter()),
                _ => Ordering::Equal,
            })
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Var(i) => write!(f, "x{}", i),
            Tree::Node(j, cs) if cs.is_empty() => write!(f, "a{}", j),
            Tree::Node(j, cs) => {
                write!(f, "(a{}", j)?;
                for c in cs.iter() {
                    write!(f, " {}", c)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `(a1 (a2 x1) x2)`; a constant may be written `a1` or `(a1)`.
pub fn parse_tree(src: &str) -> Result<Tree, CloneError> {
    let tokens: Vec<String> = src
        .replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_owned)
        .collect();
    let mut pos = 0;
    let t = parse_at(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(CloneError::Parse(format!(
            "trailing input after token {}",
            pos
        )));
    }
    Ok(t)
}

fn atom(tok: &str) -> Result<Tree, CloneError> {
    let num = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| CloneError::Parse(format!("bad atom `{}`", tok)))
    };
    if let Some(rest) = tok.strip_prefix('x') {
        Ok(Tree::Var(num(rest)?))
    } else if let Some(rest) = tok.strip_prefix('a') {
        Ok(Tree::Node(num(rest)?, Vec::new().into()))
    } else {
        Err(CloneError::Parse(format!(
            "expected x<i> or a<j>, found `{}`",
            tok
        )))
    }
}

fn parse_at(tokens: &[String], pos: &mut usize) -> Result<Tree, CloneError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| CloneError::Parse("unexpected end of tree".into()))?;
    *pos += 1;
    if tok != "(" {
        return atom(tok);
    }
    let head = tokens
        .get(*pos)
        .ok_or_else(|| CloneError::Parse("missing letter after `(`".into()))?;
    *pos += 1;
    let letter = match atom(head)? {
        Tree::Node(j, _) => j,
        Tree::Var(_) => {
            return Err(CloneError::Parse(format!(
                "variable `{}` in head position",
                head
            )))
        }
    };
    let mut children = Vec::new();
    loop {
        match tokens.get(*pos).map(String::as_str) {
            Some(")") => {
                *pos += 1;
                return Ok(Tree::Node(letter, children.into()));
            }
            Some(_) => children.push(parse_at(tokens, pos)?),
            None => return Err(CloneError::Parse("unclosed `(`".into())),
        }
    }
}

/// Enumerates trees over a fixed alphabet and variable bound, by size, in
/// canonical order. Results for smaller sizes are kept.
pub struct TreeEnumerator {
    alpha: RankedAlphabet,
    n: usize,
    by_size: Vec<Vec<Tree>>,
}

impl TreeEnumerator {
    pub fn new(alpha: &RankedAlphabet, n: usize) -> TreeEnumerator {
        TreeEnumerator {
            alpha: alpha.clone(),
            n,
            by_size: vec![Vec::new()],
        }
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alpha
    }

    pub fn vars(&self) -> usize {
        self.n
    }

    /// Trees of exactly `size` nodes.
    pub fn of_size(&mut self, size: usize) -> &[Tree] {
        while self.by_size.len() <= size {
            let s = self.by_size.len();
            let next = self.build(s);
            self.by_size.push(next);
        }
        &self.by_size[size]
    }

    /// Trees of size at most `max`, in canonical order.
    pub fn up_to(&mut self, max: usize) -> Vec<Tree> {
        (1..=max).flat_map(|s| self.of_size(s).to_vec()).collect()
    }

    fn build(&mut self, s: usize) -> Vec<Tree> {
        let mut out = Vec::new();
        if s == 1 {
            out.extend((1..=self.n).map(Tree::Var));
        }
        let letters: Vec<(usize, usize)> = self.alpha.letters().collect();
        for (j, k) in letters {
            if k == 0 {
                if s == 1 {
                    out.push(Tree::node(j, Vec::new()));
                }
                continue;
            }
            if s < k + 1 {
                continue;
            }
            for sizes in compositions(s - 1, k) {
                let pools: Vec<Vec<Tree>> =
                    sizes.iter().map(|&c| self.of_size(c).to_vec()).collect();
                for_each_product(&pools, |children| {
                    out.push(Tree::node(j, children.to_vec()))
                });
            }
        }
        out.sort();
        out
    }
}

/// Ordered ways to write `total` as `parts` positive summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Calls `f` on every tuple of the cartesian product, first pool most
/// significant.
pub(crate) fn for_each_product<T: Clone>(pools: &[Vec<T>], mut f: impl FnMut(&[T])) {
    if pools.iter().any(|p| p.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; pools.len()];
    let mut cur: Vec<T> = pools.iter().map(|p| p[0].clone()).collect();
    loop {
        f(&cur);
        let mut k = pools.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < pools[k].len() {
                cur[k] = pools[k][idx[k]].clone();
                break;
            }
            idx[k] = 0;
            cur[k] = pools[k][0].clone();
        }
    }
}

/// Trees of height `< depth`, grouped by root letter.
pub fn trees_below_height(alpha: &RankedAlphabet, n: usize, depth: usize) -> Vec<Tree> {
    let mut level: Vec<Tree> = Vec::new();
    for _ in 0..depth {
        let mut next: Vec<Tree> = (1..=n).map(Tree::Var).collect();
        for (j, k) in alpha.letters() {
            let pools = vec![level.clone(); k];
            for_each_product(&pools, |cs| next.push(Tree::node(j, cs.to_vec())));
        }
        level = next;
    }
    level
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> Tree {
        parse_tree(s).unwrap()
    }

    #[test]
    fn subst_examples() {
        let a11 = RankedAlphabet::new(vec![1, 1]);
        let r = tree_subst(&a11, 1, 1, &t("(a1 x1)"), &[t("(a2 x1)")]).unwrap();
        assert_eq!(r, t("(a1 (a2 x1))"));
        let args = [t("(a2 x1)"), t("x1")];
        assert_eq!(Tree::Var(2).subst(&args), t("x1"));
        assert!(tree_subst(&a11, 2, 1, &t("(a1 x1)"), &[t("x1")]).is_err());
    }

    #[test]
    fn parse_print_round_trip() {
        for s in ["x1", "a1", "(a2 x1 x2)", "(a1 (a2 x1) x2)"] {
            assert_eq!(t(s).to_string(), s);
        }
        assert_eq!(t("(a1)"), t("a1"));
        assert!(parse_tree("(x1 x2)").is_err());
        assert!(parse_tree("(a1 x1").is_err());
        assert!(parse_tree("x0").is_err());
    }

    #[test]
    fn canonical_order() {
        let mut ts = [t("(a1 x1)"),
            t("a2"),
            t("x2"),
            t("x1"),
            t("(a1 (a1 x1))"),
            t("(a1 a2)")];
        ts.sort();
        let shown: Vec<String> = ts.iter().map(|x| x.to_string()).collect();
        assert_eq!(
            shown,
            ["x1", "x2", "a2", "(a1 x1)", "(a1 a2)", "(a1 (a1 x1))"]
        );
    }

    #[test]
    fn enumeration_counts() {
        // [1,1] with one variable: 2^(s-1) trees of size s
        let mut e = TreeEnumerator::new(&RankedAlphabet::new(vec![1, 1]), 1);
        for s in 1..=8 {
            assert_eq!(e.of_size(s).len(), 1 << (s - 1));
        }
        // [0,2] with one variable: Catalan(k) * 2^(k+1) trees of size 2k+1
        let mut e = TreeEnumerator::new(&RankedAlphabet::new(vec![0, 2]), 1);
        let catalan = [1, 1, 2, 5];
        for (k, c) in catalan.iter().enumerate() {
            assert_eq!(e.of_size(2 * k + 1).len(), c << (k + 1));
            assert!(e.of_size(2 * k + 2).is_empty());
        }
    }

    #[test]
    fn height_bounded_counts() {
        let a01 = RankedAlphabet::new(vec![0, 1]);
        assert!(trees_below_height(&a01, 1, 0).is_empty());
        assert_eq!(trees_below_height(&a01, 1, 1).len(), 2);
        assert_eq!(trees_below_height(&a01, 1, 2).len(), 4);
        assert_eq!(trees_below_height(&a01, 1, 3).len(), 6);
    }

    fn arb_tree() -> impl Strategy<Value = Tree> {
        let leaf = prop_oneof![
            (1usize..3).prop_map(Tree::Var),
            Just(Tree::node(1, Vec::new()))
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|c| Tree::node(2, vec![c])),
                (inner.clone(), inner).prop_map(|(a, b)| Tree::node(3, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_display(tree in arb_tree()) {
            prop_assert_eq!(parse_tree(&tree.to_string()).unwrap(), tree);
        }

        #[test]
        fn substitution_is_associative(x in arb_tree(), y1 in arb_tree(), y2 in arb_tree(), z1 in arb_tree(), z2 in arb_tree()) {
            let ys = [y1, y2];
            let zs = [z1, z2];
            let lhs = x.subst(&ys).subst(&zs);
            let inner: Vec<Tree> = ys.iter().map(|y| y.subst(&zs)).collect();
            prop_assert_eq!(lhs, x.subst(&inner));
        }

        #[test]
        fn order_is_total_and_size_first(a in arb_tree(), b in arb_tree()) {
            if a.size() < b.size() {
                prop_assert!(a < b);
            }
            prop_assert_eq!(a.cmp(&b) == Ordering::Equal, a == b);
        }
    }
}
