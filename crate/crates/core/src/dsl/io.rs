//! Library files.
//!
//! ```text
//! absynth-library 1
//! version 2
//! learned 2
//! op Add : (Int, Int -> Int) = primitive
//! const 0 : Int
//! op fn_1 [found=1] : ((Int -> Int), IntList -> IntList) = (lam2 (Map $1 $0))
//! const fn_2 [found=2] : Int = (Sum [1,2,3])
//! ```
//!
//! Primitives are resolved by name when loading. Learned items appear in
//! discovery order after all primitives and literal constants, so every body
//! only mentions names defined on earlier lines.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{Constant, DSLibrary, OpKind, Operation};
use crate::lang::{parse, OpenScope, ParseError, Term, Ty};

const MAGIC: &str = "absynth-library 1";

#[derive(Debug, Error)]
pub enum LibraryFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown primitive `{name}`")]
    UnknownPrimitive { line: usize, name: String },
    #[error("line {line}: {source}")]
    Body { line: usize, source: ParseError },
}

fn learned_index(name: &str) -> usize {
    name.strip_prefix("fn_")
        .and_then(|k| k.parse().ok())
        .unwrap_or(usize::MAX)
}

pub fn render_library(lib: &DSLibrary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "version {}", lib.version());
    let _ = writeln!(out, "learned {}", lib.learned_count());
    for op in lib.ops().iter().filter(|o| !o.is_learned()) {
        let _ = writeln!(out, "op {} : {} = primitive", op.name, op.signature());
    }
    for c in lib.constants().iter().filter(|c| c.name.is_none()) {
        let _ = writeln!(out, "const {} : {}", c.term, c.ty);
    }
    let mut learned: Vec<(usize, String)> = Vec::new();
    for op in lib.ops().iter() {
        if let OpKind::Learned { body, iteration } = &op.kind {
            learned.push((
                learned_index(&op.name),
                format!(
                    "op {} [found={iteration}] : {} = {body}",
                    op.name,
                    op.signature()
                ),
            ));
        }
    }
    for c in lib.constants() {
        if let Some(name) = &c.name {
            learned.push((
                learned_index(name),
                format!(
                    "const {name} [found={}] : {} = {}",
                    c.iteration.unwrap_or(0),
                    c.ty,
                    c.term
                ),
            ));
        }
    }
    learned.sort();
    for (_, line) in learned {
        let _ = writeln!(out, "{line}");
    }
    out
}

pub fn save_library(lib: &DSLibrary, path: &Path) -> Result<(), LibraryFileError> {
    std::fs::write(path, render_library(lib))?;
    Ok(())
}

pub fn load_library(path: &Path) -> Result<DSLibrary, LibraryFileError> {
    parse_library(&std::fs::read_to_string(path)?)
}

struct Header<'a> {
    name: &'a str,
    found: Option<usize>,
    ty: Ty,
    rest: Option<&'a str>,
}

fn split_item(line: usize, text: &str) -> Result<Header<'_>, LibraryFileError> {
    let bad = |m: &str| LibraryFileError::Malformed {
        line,
        message: m.to_string(),
    };
    let (left, right) = text
        .split_once(" : ")
        .ok_or_else(|| bad("expected ` : `"))?;
    let (name, found) = match left.split_once(' ') {
        Some((n, meta)) => {
            let k = meta
                .trim()
                .strip_prefix("[found=")
                .and_then(|m| m.strip_suffix(']'))
                .and_then(|m| m.parse().ok())
                .ok_or_else(|| bad("bad metadata, expected `[found=<k>]`"))?;
            (n, Some(k))
        }
        None => (left, None),
    };
    let (ty_text, rest) = match right.split_once(" = ") {
        Some((t, r)) => (t, Some(r.trim())),
        None => (right, None),
    };
    let ty = ty_text
        .trim()
        .parse::<Ty>()
        .map_err(|e| bad(&e.to_string()))?;
    Ok(Header {
        name: name.trim(),
        found,
        ty,
        rest,
    })
}

pub fn parse_library(text: &str) -> Result<DSLibrary, LibraryFileError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let bad = |line: usize, m: &str| LibraryFileError::Malformed {
        line,
        message: m.to_string(),
    };
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(bad(1, "missing `absynth-library 1` header")),
    }
    let mut version = None;
    let mut learned = None;
    let mut ops = Vec::new();
    let mut constants = Vec::new();
    let mut known: BTreeSet<String> = BTreeSet::new();
    for (no, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (kw, rest) = line.split_once(' ').unwrap_or((line, ""));
        match kw {
            "version" => {
                version = Some(
                    rest.trim()
                        .parse::<u64>()
                        .map_err(|_| bad(no, "bad version"))?,
                )
            }
            "learned" => {
                learned = Some(
                    rest.trim()
                        .parse::<usize>()
                        .map_err(|_| bad(no, "bad count"))?,
                )
            }
            "op" => {
                let h = split_item(no, rest)?;
                let (params, ret) = match h.ty.as_arrow() {
                    Some((p, r)) => (p.to_vec(), r.clone()),
                    None => return Err(bad(no, "operation type must be a function type")),
                };
                let kind = match h.rest {
                    Some("primitive") => {
                        let prim = Operation::primitive(h.name).ok_or_else(|| {
                            LibraryFileError::UnknownPrimitive {
                                line: no,
                                name: h.name.to_string(),
                            }
                        })?;
                        if prim.params != params || prim.ret != ret {
                            return Err(bad(
                                no,
                                "primitive signature does not match its definition",
                            ));
                        }
                        prim.kind
                    }
                    Some(body) => OpKind::Learned {
                        body: parse(body, &known)
                            .map_err(|source| LibraryFileError::Body { line: no, source })?,
                        iteration: h
                            .found
                            .ok_or_else(|| bad(no, "learned op needs [found=k]"))?,
                    },
                    None => return Err(bad(no, "expected `= primitive` or `= <body>`")),
                };
                known.insert(h.name.to_string());
                ops.push(Operation {
                    name: h.name.to_string(),
                    params,
                    ret,
                    kind,
                });
            }
            "const" => {
                let h = split_item(no, rest)?;
                let c = match h.rest {
                    None => {
                        let term = parse(h.name, &OpenScope)
                            .ok()
                            .filter(Term::is_leaf)
                            .filter(|t| !matches!(t, Term::Prim(_)))
                            .ok_or_else(|| bad(no, "literal constant expected"))?;
                        Constant {
                            name: None,
                            term,
                            ty: h.ty,
                            iteration: None,
                        }
                    }
                    Some(body) => {
                        let term = parse(body, &known)
                            .map_err(|source| LibraryFileError::Body { line: no, source })?;
                        known.insert(h.name.to_string());
                        Constant {
                            name: Some(h.name.to_string()),
                            term,
                            ty: h.ty,
                            iteration: h.found,
                        }
                    }
                };
                constants.push(c);
            }
            other => return Err(bad(no, &format!("unknown directive `{other}`"))),
        }
    }
    let version = version.ok_or_else(|| bad(0, "missing version"))?;
    let learned = learned.ok_or_else(|| bad(0, "missing learned count"))?;
    Ok(DSLibrary::from_parts(ops, constants, version, learned))
}
