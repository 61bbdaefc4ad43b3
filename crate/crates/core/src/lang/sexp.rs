//! S-expression surface syntax for terms.
//!
//! ```text
//! term  := int | "true" | "false" | list | "$" index | ident
//!        | "(" "lam" term ")" | "(" "lam" k term ")" | "(" term term+ ")"
//! list  := "[" (int ("," | ws)?)* "]"
//! ```
//!
//! Identifiers are resolved through a [`Scope`]: known operations and named
//! constants become [`Term::Prim`], task inputs become [`Term::Input`].

use std::collections::BTreeSet;

use thiserror::Error;

use super::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Prim,
    Input,
}

/// Resolves identifiers during parsing.
pub trait Scope {
    fn resolve(&self, name: &str) -> Option<SymbolKind>;
}

/// Treats every identifier as a primitive. Useful for tooling that only
/// manipulates syntax.
pub struct OpenScope;

impl Scope for OpenScope {
    fn resolve(&self, _name: &str) -> Option<SymbolKind> {
        Some(SymbolKind::Prim)
    }
}

impl Scope for BTreeSet<String> {
    fn resolve(&self, name: &str) -> Option<SymbolKind> {
        self.contains(name).then_some(SymbolKind::Prim)
    }
}

/// Layers task input names over another scope.
pub struct WithInputs<'a, S: ?Sized> {
    pub inner: &'a S,
    pub inputs: &'a [String],
}

impl<S: Scope + ?Sized> Scope for WithInputs<'_, S> {
    fn resolve(&self, name: &str) -> Option<SymbolKind> {
        if self.inputs.iter().any(|i| i == name) {
            Some(SymbolKind::Input)
        } else {
            self.inner.resolve(name)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{token}` at byte {offset}")]
    UnknownSymbol { token: String, offset: usize },
    #[error("unbound index ${index} at byte {offset}")]
    UnboundIndex { index: usize, offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    LBracket,
    RBracket,
    Comma,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok<'_>)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let tok = match c {
            b'(' => Some(Tok::Open),
            b')' => Some(Tok::Close),
            b'[' => Some(Tok::LBracket),
            b']' => Some(Tok::RBracket),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = tok {
            out.push((i, tok));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else {
            let start = i;
            while i < bytes.len()
                && !bytes[i].is_ascii_whitespace()
                && !matches!(bytes[i], b'(' | b')' | b'[' | b']' | b',')
            {
                i += 1;
            }
            out.push((start, Tok::Atom(&text[start..i])));
        }
    }
    Ok(out)
}

struct Parser<'a, 's, S: ?Sized> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    end: usize,
    scope: &'s S,
}

fn lam_arity(atom: &str) -> Option<usize> {
    let rest = atom.strip_prefix("lam")?;
    if rest.is_empty() {
        return Some(1);
    }
    rest.parse::<usize>().ok().filter(|k| *k >= 1)
}

impl<S: Scope + ?Sized> Parser<'_, '_, S> {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn term(&mut self, depth: usize) -> Result<Term, ParseError> {
        let Some((offset, tok)) = self.toks.get(self.pos).cloned() else {
            return self.syntax("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Tok::Open => {
                if let Some((_, Tok::Atom(a))) = self.toks.get(self.pos) {
                    if let Some(k) = lam_arity(a) {
                        self.pos += 1;
                        let body = self.term(depth + k)?;
                        self.expect_close()?;
                        return Ok(Term::lam(k, body));
                    }
                }
                let head = self.term(depth)?;
                let mut args = Vec::new();
                while !matches!(self.toks.get(self.pos), Some((_, Tok::Close)) | None) {
                    args.push(self.term(depth)?);
                }
                self.expect_close()?;
                if args.is_empty() {
                    return Err(ParseError::Syntax {
                        offset,
                        message: "application needs at least one argument".into(),
                    });
                }
                Ok(Term::App(Box::new(head), args))
            }
            Tok::LBracket => {
                let mut values = Vec::new();
                loop {
                    match self.toks.get(self.pos).cloned() {
                        Some((_, Tok::RBracket)) => {
                            self.pos += 1;
                            return Ok(Term::List(values));
                        }
                        Some((_, Tok::Comma)) => self.pos += 1,
                        Some((o, Tok::Atom(a))) => {
                            let v = a.parse::<i64>().map_err(|_| ParseError::Syntax {
                                offset: o,
                                message: format!("list element `{a}` is not an integer"),
                            })?;
                            values.push(v);
                            self.pos += 1;
                        }
                        _ => return self.syntax("unterminated list"),
                    }
                }
            }
            Tok::Atom(a) => self.atom(a, offset, depth),
            Tok::Close | Tok::RBracket | Tok::Comma => {
                self.pos -= 1;
                self.syntax("unexpected delimiter")
            }
        }
    }

    fn atom(&self, a: &str, offset: usize, depth: usize) -> Result<Term, ParseError> {
        if let Some(idx) = a.strip_prefix('$') {
            let index = idx.parse::<usize>().map_err(|_| ParseError::Syntax {
                offset,
                message: format!("bad variable `{a}`"),
            })?;
            if index >= depth {
                return Err(ParseError::UnboundIndex { index, offset });
            }
            return Ok(Term::Var(index));
        }
        if let Ok(v) = a.parse::<i64>() {
            return Ok(Term::Int(v));
        }
        match a {
            "true" => return Ok(Term::Bool(true)),
            "false" => return Ok(Term::Bool(false)),
            _ => {}
        }
        if lam_arity(a).is_some() {
            return Err(ParseError::Syntax {
                offset,
                message: "`lam` must open a parenthesised form".into(),
            });
        }
        match self.scope.resolve(a) {
            Some(SymbolKind::Prim) => Ok(Term::Prim(a.to_string())),
            Some(SymbolKind::Input) => Ok(Term::Input(a.to_string())),
            None => Err(ParseError::UnknownSymbol {
                token: a.to_string(),
                offset,
            }),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            Some((_, Tok::Close)) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.syntax("expected `)`"),
        }
    }
}

/// Parses a single closed term.
pub fn parse<S: Scope + ?Sized>(text: &str, scope: &S) -> Result<Term, ParseError> {
    parse_open(text, scope, 0)
}

/// Parses a term that may use the indices `$0..$free` without binders.
pub fn parse_open<S: Scope + ?Sized>(
    text: &str,
    scope: &S,
    free: usize,
) -> Result<Term, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        scope,
    };
    let t = p.term(free)?;
    if p.pos != p.toks.len() {
        return p.syntax("trailing input after term");
    }
    Ok(t)
}

pub fn print(t: &Term) -> String {
    let mut s = String::new();
    write_term(t, &mut s);
    s
}

fn write_term(t: &Term, out: &mut String) {
    use std::fmt::Write;
    match t {
        Term::Var(i) => {
            let _ = write!(out, "${i}");
        }
        Term::Input(n) | Term::Prim(n) => out.push_str(n),
        Term::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Term::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Term::List(vs) => {
            out.push('[');
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push(']');
        }
        Term::App(head, args) => {
            out.push('(');
            write_term(head, out);
            for a in args {
                out.push(' ');
                write_term(a, out);
            }
            out.push(')');
        }
        Term::Lam(k, body) => {
            if *k == 1 {
                out.push_str("(lam ");
            } else {
                let _ = write!(out, "(lam{k} ");
            }
            write_term(body, out);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scope() -> BTreeSet<String> {
        ["+", "Add", "Map", "Sort"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn nested_lambdas() {
        let t = parse("(lam (lam (+ $1 $0)))", &scope()).unwrap();
        let expected = Term::lam(
            1,
            Term::lam(1, Term::call("+", vec![Term::Var(1), Term::Var(0)])),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn unbound_index_is_rejected() {
        assert_eq!(
            parse("$0", &scope()),
            Err(ParseError::UnboundIndex {
                index: 0,
                offset: 0
            })
        );
        assert!(matches!(
            parse("(lam (Add $0 $1))", &scope()),
            Err(ParseError::UnboundIndex { index: 1, .. })
        ));
        assert!(parse("(lam2 (Add $0 $1))", &scope()).is_ok());
    }

    #[test]
    fn unknown_symbol_names_token() {
        match parse("(Frobnicate 1)", &scope()) {
            Err(ParseError::UnknownSymbol { token, offset }) => {
                assert_eq!(token, "Frobnicate");
                assert_eq!(offset, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn printing() {
        assert_eq!(print(&Term::lam(1, Term::Var(0))), "(lam $0)");
        assert_eq!(
            print(&Term::call("Add", vec![Term::Int(1), Term::Int(2)])),
            "(Add 1 2)"
        );
        assert_eq!(print(&Term::List(vec![-1, 2])), "[-1,2]");
        let t = parse("(lam1 (Map (lam2 $1) [1 2,3]))", &scope()).unwrap();
        assert_eq!(print(&t), "(lam (Map (lam2 $1) [1,2,3]))");
    }

    #[test]
    fn inputs_resolve_through_layered_scope() {
        let names = vec!["xs".to_string()];
        let base = scope();
        let s = WithInputs {
            inner: &base,
            inputs: &names,
        };
        assert_eq!(
            parse("(Sort xs)", &s).unwrap(),
            Term::call("Sort", vec![Term::input("xs")])
        );
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert!(matches!(
            parse("(Add 1 2", &scope()),
            Err(ParseError::Syntax { offset: 8, .. })
        ));
        assert!(matches!(
            parse("(Add 1 2) 3", &scope()),
            Err(ParseError::Syntax { offset: 10, .. })
        ));
        assert!(parse("(Add)", &scope()).is_err());
        assert!(parse("[1, x]", &scope()).is_err());
    }
}
