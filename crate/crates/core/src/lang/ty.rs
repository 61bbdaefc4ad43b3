use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Monomorphic types of the DSL.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Int,
    Bool,
    IntList,
    /// A function taking all of `params` at once (no currying).
    Arrow(Vec<Ty>, Box<Ty>),
}

impl Ty {
    pub fn arrow(params: Vec<Ty>, ret: Ty) -> Ty {
        assert!(
            !params.is_empty(),
            "arrow types take at least one parameter"
        );
        Ty::Arrow(params, Box::new(ret))
    }

    pub fn is_arrow(&self) -> bool {
        matches!(self, Ty::Arrow(..))
    }

    pub fn as_arrow(&self) -> Option<(&[Ty], &Ty)> {
        match self {
            Ty::Arrow(params, ret) => Some((params, ret)),
            _ => None,
        }
    }

    /// Structural well-formedness: every arrow, at any depth, has a parameter.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Ty::Arrow(params, ret) => {
                !params.is_empty() && params.iter().all(Ty::is_well_formed) && ret.is_well_formed()
            }
            _ => true,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Int => write!(f, "Int"),
            Ty::Bool => write!(f, "Bool"),
            Ty::IntList => write!(f, "IntList"),
            Ty::Arrow(params, ret) => {
                write!(f, "(")?;
                for (i, p) in params.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, " -> {ret})")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid type `{text}`: {reason}")]
pub struct TyParseError {
    pub text: String,
    pub reason: String,
}

impl FromStr for Ty {
    type Err = TyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| TyParseError {
            text: s.to_string(),
            reason: reason.to_string(),
        };
        let mut p = TyParser {
            src: s.as_bytes(),
            pos: 0,
        };
        let ty = p.ty().map_err(|r| err(&r))?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(err("trailing input"));
        }
        Ok(ty)
    }
}

struct TyParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl TyParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn ty(&mut self) -> Result<Ty, String> {
        self.skip_ws();
        if self.eat("(") {
            let mut params = vec![self.ty()?];
            loop {
                if self.eat(",") {
                    params.push(self.ty()?);
                } else if self.eat("->") {
                    let ret = self.ty()?;
                    if !self.eat(")") {
                        return Err("expected `)`".into());
                    }
                    return Ok(Ty::Arrow(params, Box::new(ret)));
                } else {
                    return Err("expected `,` or `->`".into());
                }
            }
        }
        for (name, ty) in [
            ("IntList", Ty::IntList),
            ("Int", Ty::Int),
            ("Bool", Ty::Bool),
        ] {
            if self.eat(name) {
                return Ok(ty);
            }
        }
        Err(format!("unexpected input at byte {}", self.pos))
    }
}
