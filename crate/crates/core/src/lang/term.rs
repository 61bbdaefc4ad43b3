use std::fmt;
use std::sync::Arc;

/// A lambda-calculus term with de Bruijn indices.
///
/// `Lam(k, body)` binds `k` variables at once. Inside `body`, `Var(0)` is the
/// last of those parameters and `Var(k - 1)` the first; indices `>= k` refer to
/// enclosing binders, exactly as if the lambda were written as `k` nested
/// single-variable lambdas.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    Input(String),
    Int(i64),
    Bool(bool),
    List(Vec<i64>),
    Prim(String),
    App(Box<Term>, Vec<Term>),
    Lam(usize, Arc<Term>),
}

impl Term {
    pub fn prim(name: impl Into<String>) -> Term {
        Term::Prim(name.into())
    }

    pub fn input(name: impl Into<String>) -> Term {
        Term::Input(name.into())
    }

    /// `App(Prim(name), args)`.
    pub fn call(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(Box::new(Term::Prim(name.into())), args)
    }

    pub fn lam(arity: usize, body: Term) -> Term {
        assert!(arity >= 1, "lambda arity must be at least 1");
        Term::Lam(arity, Arc::new(body))
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, Term::App(..) | Term::Lam(..))
    }

    /// Program length: leaves count 1, bound variables and lambda nodes count
    /// 0, and an application of a primitive counts 1 plus its arguments.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Input(_) | Term::Int(_) | Term::Bool(_) | Term::List(_) | Term::Prim(_) => 1,
            Term::Lam(_, body) => body.size(),
            Term::App(head, args) => {
                let head_cost = match head.as_ref() {
                    Term::Prim(_) => 1,
                    other => 1 + other.size(),
                };
                head_cost + args.iter().map(Term::size).sum::<usize>()
            }
        }
    }

    /// Smallest bound-variable index that escapes this term, if any.
    pub fn min_free_var(&self) -> Option<usize> {
        fn go(t: &Term, depth: usize) -> Option<usize> {
            match t {
                Term::Var(i) if *i >= depth => Some(i - depth),
                Term::Lam(k, body) => go(body, depth + k),
                Term::App(head, args) => std::iter::once(head.as_ref())
                    .chain(args.iter())
                    .filter_map(|c| go(c, depth))
                    .min(),
                _ => None,
            }
        }
        go(self, 0)
    }

    /// True when every bound variable index is below its enclosing binder count.
    pub fn is_closed(&self) -> bool {
        self.min_free_var().is_none()
    }

    /// Adds `by` (possibly negative) to every free variable index `>= cutoff`.
    pub fn shift(&self, by: isize, cutoff: usize) -> Term {
        match self {
            Term::Var(i) if *i >= cutoff => {
                let shifted = *i as isize + by;
                assert!(shifted >= 0, "shift produced a negative index");
                Term::Var(shifted as usize)
            }
            Term::Lam(k, body) => Term::Lam(*k, Arc::new(body.shift(by, cutoff + k))),
            Term::App(head, args) => Term::App(
                Box::new(head.shift(by, cutoff)),
                args.iter().map(|a| a.shift(by, cutoff)).collect(),
            ),
            other => other.clone(),
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::App(head, args) => std::iter::once(head.as_ref()).chain(args.iter()).collect(),
            Term::Lam(_, body) => vec![body.as_ref()],
            _ => Vec::new(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::App(head, args) => {
                head.walk(f);
                for a in args {
                    a.walk(f);
                }
            }
            Term::Lam(_, body) => body.walk(f),
            _ => {}
        }
    }

    pub fn mentions_prim(&self, name: &str) -> bool {
        let mut found = false;
        self.walk(&mut |t| {
            if let Term::Prim(p) = t {
                found |= p == name;
            }
        });
        found
    }

    /// Name of the primitive applied at the root, if the root is such an application.
    pub fn head_prim(&self) -> Option<&str> {
        match self {
            Term::App(head, _) => match head.as_ref() {
                Term::Prim(name) => Some(name),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::lang::sexp::print(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(Term::Int(0).size(), 1);
        assert_eq!(
            Term::call("Add", vec![Term::Int(1), Term::Int(2)]).size(),
            3
        );
        // bound variables are free of charge, lambdas cost their body
        let double = Term::lam(1, Term::call("Double", vec![Term::Var(0)]));
        assert_eq!(double.size(), 1);
    }

    #[test]
    fn closedness_counts_all_parameters() {
        let t = Term::lam(2, Term::call("Add", vec![Term::Var(1), Term::Var(0)]));
        assert!(t.is_closed());
        let open = Term::lam(2, Term::call("Add", vec![Term::Var(2), Term::Var(0)]));
        assert_eq!(open.min_free_var(), Some(0));
    }

    #[test]
    fn shift_respects_binders() {
        let t = Term::call(
            "Map",
            vec![
                Term::lam(1, Term::call("Add", vec![Term::Var(0), Term::Var(1)])),
                Term::Var(0),
            ],
        );
        let s = t.shift(-1, 1);
        assert_eq!(s, t.shift(0, 0).shift(-1, 1));
        assert_eq!(t.shift(2, 0).shift(-2, 0), t);
    }
}
