//! Partial abstractions: terms with numbered holes, and matching them
//! against corpus subtrees.

use std::fmt;
use std::sync::Arc;

use super::Solution;
use crate::lang::{print, Term};

/// A term whose `Hole(j)` leaves stand for the `j`-th abstraction parameter.
///
/// Hole ids are numbered `0..arity` in pre-order of first occurrence. `Var`
/// nodes only refer to lambdas inside the pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HoleTerm {
    Hole(usize),
    Var(usize),
    Int(i64),
    Bool(bool),
    List(Vec<i64>),
    Prim(String),
    App(Box<HoleTerm>, Vec<HoleTerm>),
    Lam(usize, Box<HoleTerm>),
}

/// One occurrence of a pattern in a corpus program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    pub task: String,
    pub program: usize,
    /// Child indices from the program root, following [`Term::children`].
    pub path: Vec<usize>,
    /// Binding of each hole, with the pattern's own lambdas stripped off.
    pub bindings: Vec<Term>,
}

impl HoleTerm {
    pub fn call(name: &str, args: Vec<HoleTerm>) -> HoleTerm {
        HoleTerm::App(Box::new(HoleTerm::Prim(name.to_string())), args)
    }

    /// Number of distinct holes.
    pub fn arity(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |h| {
            if let HoleTerm::Hole(j) = h {
                n = n.max(j + 1);
            }
        });
        n
    }

    fn visit(&self, f: &mut impl FnMut(&HoleTerm)) {
        f(self);
        match self {
            HoleTerm::App(head, args) => {
                head.visit(f);
                for a in args {
                    a.visit(f);
                }
            }
            HoleTerm::Lam(_, body) => body.visit(f),
            _ => {}
        }
    }

    /// Hole ids in pre-order, repeats included.
    pub fn hole_occurrences(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(&mut |h| {
            if let HoleTerm::Hole(j) = h {
                out.push(*j);
            }
        });
        out
    }

    /// True when hole ids appear in first-occurrence order `0, 1, ...`.
    pub fn holes_well_numbered(&self) -> bool {
        let mut next = 0;
        self.hole_occurrences().into_iter().all(|j| {
            if j == next {
                next += 1;
                true
            } else {
                j < next
            }
        })
    }

    /// Operations, constants and literals in the pattern; holes, bound
    /// variables and lambdas do not count.
    pub fn non_variable_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |h| {
            if matches!(
                h,
                HoleTerm::Int(_) | HoleTerm::Bool(_) | HoleTerm::List(_) | HoleTerm::Prim(_)
            ) {
                n += 1;
            }
        });
        n
    }

    /// Size of the pattern's own nodes under [`Term::size`], holes counting 0.
    pub fn pattern_size(&self) -> usize {
        match self {
            HoleTerm::Hole(_) | HoleTerm::Var(_) => 0,
            HoleTerm::Int(_) | HoleTerm::Bool(_) | HoleTerm::List(_) | HoleTerm::Prim(_) => 1,
            HoleTerm::Lam(_, body) => body.pattern_size(),
            HoleTerm::App(head, args) => {
                let head_cost = match head.as_ref() {
                    HoleTerm::Prim(_) => 1,
                    other => 1 + other.pattern_size(),
                };
                head_cost + args.iter().map(HoleTerm::pattern_size).sum::<usize>()
            }
        }
    }

    /// Size with every hole occurrence counted as one leaf.
    pub fn body_size(&self) -> usize {
        self.pattern_size() + self.hole_occurrences().len()
    }

    /// Replaces every hole by its binding, shifted under the pattern's lambdas.
    pub fn instantiate(&self, bindings: &[Term]) -> Term {
        fn go(h: &HoleTerm, b: &[Term], depth: usize) -> Term {
            match h {
                HoleTerm::Hole(j) => b[*j].shift(depth as isize, 0),
                HoleTerm::Var(i) => Term::Var(*i),
                HoleTerm::Int(v) => Term::Int(*v),
                HoleTerm::Bool(v) => Term::Bool(*v),
                HoleTerm::List(v) => Term::List(v.clone()),
                HoleTerm::Prim(p) => Term::Prim(p.clone()),
                HoleTerm::App(head, args) => Term::App(
                    Box::new(go(head, b, depth)),
                    args.iter().map(|a| go(a, b, depth)).collect(),
                ),
                HoleTerm::Lam(k, body) => Term::lam(*k, go(body, b, depth + k)),
            }
        }
        go(self, bindings, 0)
    }

    /// The abstraction body: `(lamN pattern)` with hole `j` as parameter `j`,
    /// or the bare pattern when there are no holes.
    pub fn to_body(&self) -> Term {
        let arity = self.arity();
        if arity == 0 {
            return self.instantiate(&[]);
        }
        let params: Vec<Term> = (0..arity).map(|j| Term::Var(arity - 1 - j)).collect();
        Term::lam(arity, self.instantiate(&params))
    }

    /// Inverse of [`HoleTerm::to_body`].
    pub fn from_body(body: &Term, arity: usize) -> HoleTerm {
        fn go(t: &Term, arity: usize, depth: usize) -> HoleTerm {
            match t {
                Term::Var(i) if *i >= depth => HoleTerm::Hole(arity - 1 - (i - depth)),
                Term::Var(i) => HoleTerm::Var(*i),
                Term::Input(n) => HoleTerm::Prim(n.clone()),
                Term::Int(v) => HoleTerm::Int(*v),
                Term::Bool(v) => HoleTerm::Bool(*v),
                Term::List(v) => HoleTerm::List(v.clone()),
                Term::Prim(p) => HoleTerm::Prim(p.clone()),
                Term::App(head, args) => HoleTerm::App(
                    Box::new(go(head, arity, depth)),
                    args.iter().map(|a| go(a, arity, depth)).collect(),
                ),
                Term::Lam(k, body) => HoleTerm::Lam(*k, Box::new(go(body, arity, depth + k))),
            }
        }
        match (arity, body) {
            (0, t) => go(t, 0, 0),
            (_, Term::Lam(k, inner)) if *k == arity => go(inner, arity, 0),
            _ => panic!("abstraction body is not a lambda over its parameters"),
        }
    }

    /// Matches the pattern at the root of `t`. Returns, for each hole, the
    /// bound subtree and the number of pattern binders above it.
    pub fn match_nodes<'t>(&self, t: &'t Term) -> Option<Vec<(&'t Term, usize)>> {
        fn go<'t>(
            h: &HoleTerm,
            t: &'t Term,
            depth: usize,
            out: &mut Vec<Option<(&'t Term, usize, Term)>>,
        ) -> bool {
            match (h, t) {
                (HoleTerm::Hole(j), _) => {
                    if t.min_free_var().is_some_and(|m| m < depth) {
                        return false;
                    }
                    let shifted = t.shift(-(depth as isize), 0);
                    match &out[*j] {
                        Some((_, _, prev)) => *prev == shifted,
                        None => {
                            out[*j] = Some((t, depth, shifted));
                            true
                        }
                    }
                }
                (HoleTerm::Var(i), Term::Var(k)) => i == k && *i < depth,
                (HoleTerm::Int(a), Term::Int(b)) => a == b,
                (HoleTerm::Bool(a), Term::Bool(b)) => a == b,
                (HoleTerm::List(a), Term::List(b)) => a == b,
                (HoleTerm::Prim(a), Term::Prim(b)) => a == b,
                (HoleTerm::App(hh, ha), Term::App(th, ta)) => {
                    ha.len() == ta.len()
                        && go(hh, th, depth, out)
                        && ha.iter().zip(ta).all(|(x, y)| go(x, y, depth, out))
                }
                (HoleTerm::Lam(a, hb), Term::Lam(b, tb)) => a == b && go(hb, tb, depth + a, out),
                _ => false,
            }
        }
        let mut out = vec![None; self.arity()];
        if !go(self, t, 0, &mut out) {
            return None;
        }
        Some(
            out.into_iter()
                .map(|b| {
                    let (node, depth, _) = b.expect("every hole id occurs");
                    (node, depth)
                })
                .collect(),
        )
    }

    /// Bindings of a match at the root of `t`.
    pub fn match_term(&self, t: &Term) -> Option<Vec<Term>> {
        self.match_nodes(t).map(|nodes| {
            nodes
                .into_iter()
                .map(|(n, d)| n.shift(-(d as isize), 0))
                .collect()
        })
    }

    fn to_display_term(&self) -> Term {
        let holes: Vec<Term> = (0..self.arity())
            .map(|j| Term::Input(format!("??{j}")))
            .collect();
        fn go(h: &HoleTerm, holes: &[Term]) -> Term {
            match h {
                HoleTerm::Hole(j) => holes[*j].clone(),
                HoleTerm::Var(i) => Term::Var(*i),
                HoleTerm::Int(v) => Term::Int(*v),
                HoleTerm::Bool(v) => Term::Bool(*v),
                HoleTerm::List(v) => Term::List(v.clone()),
                HoleTerm::Prim(p) => Term::Prim(p.clone()),
                HoleTerm::App(head, args) => Term::App(
                    Box::new(go(head, holes)),
                    args.iter().map(|a| go(a, holes)).collect(),
                ),
                HoleTerm::Lam(k, body) => Term::Lam(*k, Arc::new(go(body, holes))),
            }
        }
        go(self, &holes)
    }
}

impl fmt::Display for HoleTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(&self.to_display_term()))
    }
}

/// Every match of `h` at every subtree of every program, in program order
/// and pre-order within a program.
pub fn count_matches(h: &HoleTerm, corpus: &[Solution]) -> Vec<Match> {
    fn go(
        h: &HoleTerm,
        t: &Term,
        path: &mut Vec<usize>,
        sol: &Solution,
        program: usize,
        out: &mut Vec<Match>,
    ) {
        if let Some(bindings) = h.match_term(t) {
            out.push(Match {
                task: sol.task.clone(),
                program,
                path: path.clone(),
                bindings,
            });
        }
        for (i, c) in t.children().into_iter().enumerate() {
            path.push(i);
            go(h, c, path, sol, program, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for (i, sol) in corpus.iter().enumerate() {
        go(h, &sol.program, &mut Vec::new(), sol, i, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn add3() -> HoleTerm {
        HoleTerm::call("Add", vec![HoleTerm::Int(3), HoleTerm::Hole(0)])
    }

    #[test]
    fn body_round_trip() {
        let h = HoleTerm::call(
            "Map",
            vec![
                HoleTerm::Lam(
                    1,
                    Box::new(HoleTerm::call(
                        "Add",
                        vec![HoleTerm::Var(0), HoleTerm::Hole(0)],
                    )),
                ),
                HoleTerm::Hole(1),
            ],
        );
        let body = h.to_body();
        assert_eq!(print(&body), "(lam2 (Map (lam (Add $0 $2)) $0))");
        assert_eq!(HoleTerm::from_body(&body, 2), h);
        assert_eq!(h.to_string(), "(Map (lam (Add $0 ??0)) ??1)");
    }

    #[test]
    fn counts_for_add3() {
        let h = add3();
        assert_eq!(h.arity(), 1);
        assert_eq!(h.non_variable_count(), 2);
        assert_eq!(h.pattern_size(), 2);
        assert_eq!(h.body_size(), 3);
    }

    #[test]
    fn holes_may_not_capture_pattern_binders() {
        let h = HoleTerm::call(
            "Map",
            vec![
                HoleTerm::Lam(1, Box::new(HoleTerm::Hole(0))),
                HoleTerm::Hole(1),
            ],
        );
        let captured = Term::call(
            "Map",
            vec![
                Term::lam(1, Term::call("Double", vec![Term::Var(0)])),
                Term::input("l"),
            ],
        );
        assert!(h.match_term(&captured).is_none());
        let free = Term::call("Map", vec![Term::lam(1, Term::Var(1)), Term::input("l")]);
        assert_eq!(
            h.match_term(&free).unwrap(),
            vec![Term::Var(0), Term::input("l")]
        );
        assert_eq!(h.instantiate(&[Term::Var(0), Term::input("l")]), free);
    }

    #[test]
    fn repeated_holes_need_equal_bindings() {
        let h = HoleTerm::call("Add", vec![HoleTerm::Hole(0), HoleTerm::Hole(0)]);
        let same = Term::call("Add", vec![Term::input("x"), Term::input("x")]);
        let diff = Term::call("Add", vec![Term::input("x"), Term::input("y")]);
        assert!(h.match_term(&same).is_some());
        assert!(h.match_term(&diff).is_none());
    }
}
