//! Surface syntax for types and terms.
//!
//! ```text
//! type ::= o | 1 | type -> type | (type * … * type) | (type *) | (type)
//! term ::= \x:type. term | term term | <term, …> | term.i | () | x
//! ```
//! `λ` is accepted for `\` and `→` for `->`. Names are resolved to de Bruijn
//! indices at parse time; free names are looked up in the supplied scope.

use super::term::Term;
use super::types::SimpleType;
use super::StlcError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(usize),
    Lambda,
    Colon,
    Dot,
    Arrow,
    Star,
    Comma,
    LParen,
    RParen,
    LAngle,
    RAngle,
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, StlcError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        let tok = match c {
            '\\' | 'λ' => Some(Tok::Lambda),
            ':' => Some(Tok::Colon),
            '.' => Some(Tok::Dot),
            '*' | '×' => Some(Tok::Star),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '<' | '⟨' => Some(Tok::LAngle),
            '>' | '⟩' => Some(Tok::RAngle),
            '→' => Some(Tok::Arrow),
            _ => None,
        };
        if let Some(tok) = tok {
            out.push(Spanned {
                tok,
                line: l0,
                col: c0,
            });
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Spanned {
                tok: Tok::Arrow,
                line: l0,
                col: c0,
            });
            advance(2, &mut i, &mut col);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
                col += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| StlcError::Parse {
                line: l0,
                col: c0,
                message: format!("number out of range: {}", s),
            })?;
            out.push(Spanned {
                tok: Tok::Num(n),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
                col += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Spanned {
                tok: Tok::Ident(s),
                line: l0,
                col: c0,
            });
            continue;
        }
        return Err(StlcError::Parse {
            line: l0,
            col: c0,
            message: format!("unexpected character {:?}", c),
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    scope: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, StlcError> {
        let s = &self.toks[self.pos];
        Err(StlcError::Parse {
            line: s.line,
            col: s.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), StlcError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {:?}, found {:?}", tok, self.peek()))
        }
    }

    fn ty(&mut self) -> Result<SimpleType, StlcError> {
        let dom = self.ty_atom()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let cod = self.ty()?;
            Ok(SimpleType::arrow(dom, cod))
        } else {
            Ok(dom)
        }
    }

    fn ty_atom(&mut self) -> Result<SimpleType, StlcError> {
        match self.bump() {
            Tok::Ident(s) if s == "o" => Ok(SimpleType::Base),
            Tok::Num(1) => Ok(SimpleType::Unit),
            Tok::LParen => {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(SimpleType::Unit);
                }
                let first = self.ty()?;
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(first);
                }
                let mut cs = vec![first];
                while *self.peek() == Tok::Star {
                    self.bump();
                    if *self.peek() == Tok::RParen {
                        break;
                    }
                    cs.push(self.ty()?);
                }
                self.expect(Tok::RParen)?;
                Ok(SimpleType::product(cs))
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                self.error(format!("expected a type, found {:?}", other))
            }
        }
    }

    fn term(&mut self) -> Result<Term, StlcError> {
        if *self.peek() == Tok::Lambda {
            self.bump();
            let name = match self.bump() {
                Tok::Ident(s) => s,
                _ => {
                    self.pos -= 1;
                    return self.error("expected a binder name");
                }
            };
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            self.expect(Tok::Dot)?;
            self.scope.push(name);
            let body = self.term();
            self.scope.pop();
            return Ok(Term::lam(ty, body?));
        }
        let mut head = self.postfix()?;
        while self.starts_atom() {
            let arg = if *self.peek() == Tok::Lambda {
                self.term()?
            } else {
                self.postfix()?
            };
            head = Term::app(head, arg);
        }
        Ok(head)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::LParen | Tok::LAngle | Tok::Lambda
        )
    }

    fn postfix(&mut self) -> Result<Term, StlcError> {
        let mut t = self.atom()?;
        while *self.peek() == Tok::Dot && matches!(self.peek_at(1), Tok::Num(_)) {
            self.bump();
            if let Tok::Num(i) = self.bump() {
                if i == 0 {
                    self.pos -= 1;
                    return self.error("projections are 1-based");
                }
                t = Term::proj(t, i);
            }
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, StlcError> {
        match self.bump() {
            Tok::Ident(name) => match self.scope.iter().rposition(|n| *n == name) {
                Some(pos) => Ok(Term::Var(self.scope.len() - 1 - pos)),
                None => {
                    self.pos -= 1;
                    self.error(format!("unbound variable {}", name))
                }
            },
            Tok::LParen => {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(Term::Unit);
                }
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LAngle => {
                let mut cs = Vec::new();
                if *self.peek() != Tok::RAngle {
                    cs.push(self.term()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        cs.push(self.term()?);
                    }
                }
                self.expect(Tok::RAngle)?;
                Ok(Term::tuple(cs))
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                self.error(format!("expected a term, found {:?}", other))
            }
        }
    }
}

pub fn parse_type(src: &str) -> Result<SimpleType, StlcError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        scope: Vec::new(),
    };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("trailing input {:?}", p.peek()));
    }
    Ok(t)
}

/// Parses a closed term.
pub fn parse_term(src: &str) -> Result<Term, StlcError> {
    parse_term_in(src, &[])
}

/// Parses a term whose free names are `scope` (outermost first).
pub fn parse_term_in(src: &str, scope: &[&str]) -> Result<Term, StlcError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        scope: scope.iter().map(|s| s.to_string()).collect(),
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("trailing input {:?}", p.peek()));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn types() {
        assert_eq!(parse_type("o").unwrap(), SimpleType::Base);
        assert_eq!(parse_type("1").unwrap(), SimpleType::Unit);
        let t = parse_type("(o -> o) -> o -> o").unwrap();
        assert_eq!(t.to_string(), "(o -> o) -> o -> o");
        let p = parse_type("(o * (o -> o))").unwrap();
        assert_eq!(p.components().unwrap().len(), 2);
        assert_eq!(parse_type("(o *)").unwrap().components().unwrap().len(), 1);
    }

    #[test]
    fn terms_resolve_names() {
        let t = parse_term("\\x:o. x").unwrap();
        assert_eq!(t, Term::lam(SimpleType::Base, Term::Var(0)));
        let t = parse_term("λf:o -> o. λx:o. f (f x)").unwrap();
        let expect = Term::lam(
            SimpleType::arrow(SimpleType::Base, SimpleType::Base),
            Term::lam(
                SimpleType::Base,
                Term::app(Term::Var(1), Term::app(Term::Var(1), Term::Var(0))),
            ),
        );
        assert_eq!(t, expect);
    }

    #[test]
    fn tuples_projections_and_unit() {
        let t = parse_term("\\s:(o * o). <s.2, s.1, ()>").unwrap();
        assert_eq!(
            t,
            Term::lam(
                SimpleType::product(vec![SimpleType::Base, SimpleType::Base]),
                Term::Tuple(vec![
                    Term::proj(Term::Var(0), 2),
                    Term::proj(Term::Var(0), 1),
                    Term::Unit
                ])
            )
        );
    }

    #[test]
    fn display_round_trips() {
        let src = "\\s:(o * (o -> o)). \\x:o. s.2 (s.2 x)";
        let t = parse_term(src).unwrap();
        assert_eq!(parse_term(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_term("\\x:o.\n  y") {
            Err(StlcError::Parse { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("unexpected {:?}", other),
        }
        assert!(matches!(
            parse_term("\\x:o. x $"),
            Err(StlcError::Parse { .. })
        ));
    }
}
