//! Replacing pattern occurrences by calls to the abstraction.

use super::pattern::HoleTerm;
use super::Solution;
use crate::lang::Term;

/// A match that the rewrite actually replaced.
#[derive(Clone, Debug)]
pub struct Applied<'c> {
    pub program: usize,
    pub root: &'c Term,
    /// Bound subtree of each hole in the original program.
    pub bindings: Vec<&'c Term>,
}

pub struct Rewritten<'c> {
    pub corpus: Vec<Solution>,
    pub applied: Vec<Applied<'c>>,
}

/// Call to the abstraction `name` with the given arguments.
pub fn application(name: &str, args: Vec<Term>) -> Term {
    if args.is_empty() {
        Term::Prim(name.to_string())
    } else {
        Term::call(name, args)
    }
}

fn rewrite_term<'c>(
    t: &'c Term,
    h: &HoleTerm,
    name: &str,
    program: usize,
    applied: &mut Vec<Applied<'c>>,
) -> Term {
    if let Some(nodes) = h.match_nodes(t) {
        applied.push(Applied {
            program,
            root: t,
            bindings: nodes.iter().map(|(n, _)| *n).collect(),
        });
        let args = nodes
            .into_iter()
            .map(|(n, d)| rewrite_term(n, h, name, program, applied).shift(-(d as isize), 0))
            .collect();
        return application(name, args);
    }
    match t {
        Term::App(head, args) => Term::App(
            Box::new(rewrite_term(head, h, name, program, applied)),
            args.iter()
                .map(|a| rewrite_term(a, h, name, program, applied))
                .collect(),
        ),
        Term::Lam(k, body) => Term::lam(*k, rewrite_term(body, h, name, program, applied)),
        other => other.clone(),
    }
}

/// Replaces non-overlapping matches of `h`, outermost first and left to
/// right, continuing inside the bindings of each replaced match.
pub fn rewrite_with<'c>(corpus: &'c [Solution], h: &HoleTerm, name: &str) -> Rewritten<'c> {
    let mut applied = Vec::new();
    let corpus = corpus
        .iter()
        .enumerate()
        .map(|(i, s)| Solution {
            task: s.task.clone(),
            inputs: s.inputs.clone(),
            program: rewrite_term(&s.program, h, name, i, &mut applied),
        })
        .collect();
    Rewritten { corpus, applied }
}

/// Total size of every program in the corpus.
pub fn corpus_size(corpus: &[Solution]) -> usize {
    corpus.iter().map(|s| s.program.size()).sum()
}
