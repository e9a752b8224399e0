use super::term::Term;
use super::types::SimpleType;
use super::StlcError;

/// Ordered list of variable types, innermost last. `Var(0)` is the last
/// entry.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingContext {
    entries: Vec<SimpleType>,
}

impl TypingContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_types(entries: Vec<SimpleType>) -> Self {
        TypingContext { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, index: usize) -> Option<&SimpleType> {
        self.entries
            .len()
            .checked_sub(index + 1)
            .map(|pos| &self.entries[pos])
    }

    pub fn push(&mut self, ty: SimpleType) {
        self.entries.push(ty);
    }

    pub fn pop(&mut self) -> Option<SimpleType> {
        self.entries.pop()
    }

    pub fn extended(&self, ty: SimpleType) -> Self {
        let mut c = self.clone();
        c.push(ty);
        c
    }

    pub fn types(&self) -> &[SimpleType] {
        &self.entries
    }
}

/// Infers the unique type of `t` in `ctx`.
pub fn typecheck(ctx: &TypingContext, t: &Term) -> Result<SimpleType, StlcError> {
    let mut ctx = ctx.clone();
    infer(&mut ctx, t, &mut String::from("root"))
}

fn infer(ctx: &mut TypingContext, t: &Term, loc: &mut String) -> Result<SimpleType, StlcError> {
    match t {
        Term::Var(k) => ctx.lookup(*k).cloned().ok_or(StlcError::Scope {
            index: *k,
            context_len: ctx.len(),
        }),
        Term::Unit => Ok(SimpleType::Unit),
        Term::Lam(dom, body) => {
            ctx.push(dom.clone());
            let mark = loc.len();
            loc.push_str(".body");
            let cod = infer(ctx, body, loc);
            loc.truncate(mark);
            ctx.pop();
            Ok(SimpleType::arrow(dom.clone(), cod?))
        }
        Term::App(f, a) => {
            let mark = loc.len();
            loc.push_str(".fun");
            let fty = infer(ctx, f, loc)?;
            loc.truncate(mark);
            loc.push_str(".arg");
            let aty = infer(ctx, a, loc)?;
            loc.truncate(mark);
            match fty {
                SimpleType::Arrow(dom, cod) => {
                    if *dom == aty {
                        Ok((*cod).clone())
                    } else {
                        Err(StlcError::Type {
                            location: loc.clone(),
                            expected: dom.to_string(),
                            found: aty.to_string(),
                        })
                    }
                }
                other => Err(StlcError::Type {
                    location: format!("{}.fun", loc),
                    expected: "an arrow type".into(),
                    found: other.to_string(),
                }),
            }
        }
        Term::Tuple(cs) => {
            let mut tys = Vec::with_capacity(cs.len());
            for (i, c) in cs.iter().enumerate() {
                let mark = loc.len();
                loc.push_str(&format!(".{}", i + 1));
                let ty = infer(ctx, c, loc);
                loc.truncate(mark);
                tys.push(ty?);
            }
            Ok(SimpleType::product(tys))
        }
        Term::Proj(s, i) => {
            let mark = loc.len();
            loc.push_str(".subject");
            let sty = infer(ctx, s, loc)?;
            loc.truncate(mark);
            match sty.components() {
                Some(cs) if *i >= 1 && *i <= cs.len() => Ok(cs[*i - 1].clone()),
                _ => Err(StlcError::Type {
                    location: loc.clone(),
                    expected: format!("a product with at least {} components", i),
                    found: sty.to_string(),
                }),
            }
        }
    }
}
