//! Programming-by-example tasks and the task file format.
//!
//! A task file holds one or more documents separated by `---` lines:
//!
//! ```text
//! name: double_evens
//! inputs: xs:IntList
//! output: IntList
//! example: xs=[1,2,3,4] -> [4,8]
//! example: xs=[6,7] -> [12]
//! solution: (Map (lam (Multiply $0 2)) (Filter (lam (IsEven $0)) xs))
//! ```
//!
//! `inputs` is a comma-separated list of `name:Type`; each `example` binds
//! every input with `name=literal` (comma-separated) and gives the output
//! literal after `->`. Literals are integers, `true`/`false`, or `[a,b,...]`.
//! `solution` is an optional reference program. Lines starting with `#` are
//! comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::dsl::DSLibrary;
use crate::lang::{evaluate, parse, Bindings, EvalLimits, OpenScope, Term, Ty, Value, WithInputs};

#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub inputs: Bindings,
    pub output: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Task {
    pub name: String,
    pub inputs: Vec<(String, Ty)>,
    pub output: Ty,
    pub examples: Vec<Example>,
    /// Known solution, when the task comes with one.
    pub solution: Option<Term>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaskError {
    #[error("task `{task}`: {message}")]
    Invalid { task: String, message: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub fn value_type(v: &Value) -> Option<Ty> {
    match v {
        Value::Int(_) => Some(Ty::Int),
        Value::Bool(_) => Some(Ty::Bool),
        Value::List(_) => Some(Ty::IntList),
        _ => None,
    }
}

impl Task {
    pub fn input_types(&self) -> BTreeMap<String, Ty> {
        self.inputs.iter().cloned().collect()
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn example_inputs(&self) -> Vec<Arc<Bindings>> {
        self.examples
            .iter()
            .map(|e| Arc::new(e.inputs.clone()))
            .collect()
    }

    pub fn validate(&self) -> Result<(), TaskError> {
        let bad = |m: String| TaskError::Invalid {
            task: self.name.clone(),
            message: m,
        };
        if self.examples.is_empty() {
            return Err(bad("needs at least one example".into()));
        }
        if self.output.is_arrow() {
            return Err(bad("output must be first-order".into()));
        }
        for (i, ex) in self.examples.iter().enumerate() {
            if ex.inputs.len() != self.inputs.len() {
                return Err(bad(format!("example {i} binds the wrong inputs")));
            }
            for (name, ty) in &self.inputs {
                match ex.inputs.get(name).and_then(value_type) {
                    Some(t) if &t == ty => {}
                    _ => return Err(bad(format!("example {i}: input `{name}` is not a {ty}"))),
                }
            }
            if value_type(&ex.output).as_ref() != Some(&self.output) {
                return Err(bad(format!("example {i}: output is not a {}", self.output)));
            }
        }
        Ok(())
    }

    /// True when `program` produces every expected output.
    pub fn is_solved_by(&self, program: &Term, lib: &DSLibrary, limits: EvalLimits) -> bool {
        self.examples
            .iter()
            .all(|ex| evaluate(program, &ex.inputs, lib, limits).is_ok_and(|v| v == ex.output))
    }
}

/// Parses an integer, boolean or `[a,b,...]` list literal.
pub fn parse_literal(s: &str) -> Option<Value> {
    let s = s.trim();
    match s {
        "true" => return Some(Value::Bool(true)),
        "false" => return Some(Value::Bool(false)),
        _ => {}
    }
    if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let items: Result<Vec<i64>, _> = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect();
        return items.ok().map(Value::list);
    }
    s.parse::<i64>().ok().map(Value::Int)
}

/// Splits on commas that are not inside brackets.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

#[derive(Default)]
struct Draft {
    name: Option<String>,
    inputs: Option<Vec<(String, Ty)>>,
    output: Option<Ty>,
    examples: Vec<Example>,
    solution: Option<(usize, String)>,
    first_line: usize,
}

impl Draft {
    fn is_empty(&self) -> bool {
        self.name.is_none()
            && self.inputs.is_none()
            && self.output.is_none()
            && self.examples.is_empty()
    }

    fn finish(self) -> Result<Task, TaskError> {
        let missing = |what: &str| TaskError::Format {
            line: self.first_line,
            message: format!("task is missing `{what}`"),
        };
        let name = self.name.clone().ok_or_else(|| missing("name"))?;
        let inputs = self.inputs.clone().ok_or_else(|| missing("inputs"))?;
        let output = self.output.clone().ok_or_else(|| missing("output"))?;
        let solution = match &self.solution {
            Some((line, text)) => {
                let names: Vec<String> = inputs.iter().map(|(n, _)| n.clone()).collect();
                let scope = WithInputs {
                    inner: &OpenScope,
                    inputs: &names,
                };
                Some(parse(text, &scope).map_err(|e| TaskError::Format {
                    line: *line,
                    message: e.to_string(),
                })?)
            }
            None => None,
        };
        let task = Task {
            name,
            inputs,
            output,
            examples: self.examples,
            solution,
        };
        task.validate()?;
        Ok(task)
    }
}

pub fn parse_tasks(text: &str) -> Result<Vec<Task>, TaskError> {
    let mut tasks = Vec::new();
    let mut draft = Draft::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "---" {
            if !draft.is_empty() {
                tasks.push(std::mem::take(&mut draft).finish()?);
            }
            continue;
        }
        let fmt_err = |m: String| TaskError::Format {
            line: line_no,
            message: m,
        };
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| fmt_err("expected `key: value`".into()))?;
        let rest = rest.trim();
        if draft.is_empty() {
            draft.first_line = line_no;
        }
        match key.trim() {
            "name" => draft.name = Some(rest.to_string()),
            "inputs" => {
                let mut inputs = Vec::new();
                for decl in rest.split(',').map(str::trim).filter(|d| !d.is_empty()) {
                    let (n, t) = decl
                        .split_once(':')
                        .ok_or_else(|| fmt_err(format!("bad input declaration `{decl}`")))?;
                    let ty = t.trim().parse::<Ty>().map_err(|e| fmt_err(e.to_string()))?;
                    inputs.push((n.trim().to_string(), ty));
                }
                draft.inputs = Some(inputs);
            }
            "output" => {
                draft.output = Some(rest.parse::<Ty>().map_err(|e| fmt_err(e.to_string()))?)
            }
            "example" => {
                let (lhs, rhs) = rest
                    .rsplit_once("->")
                    .ok_or_else(|| fmt_err("example needs `->`".into()))?;
                let mut inputs = Bindings::new();
                for binding in split_top_level(lhs).into_iter().map(str::trim) {
                    if binding.is_empty() {
                        continue;
                    }
                    let (n, v) = binding
                        .split_once('=')
                        .ok_or_else(|| fmt_err(format!("bad binding `{binding}`")))?;
                    let v = parse_literal(v)
                        .ok_or_else(|| fmt_err(format!("bad literal in `{binding}`")))?;
                    inputs.insert(n.trim().to_string(), v);
                }
                let output =
                    parse_literal(rhs).ok_or_else(|| fmt_err(format!("bad output `{rhs}`")))?;
                draft.examples.push(Example { inputs, output });
            }
            "solution" => draft.solution = Some((line_no, rest.to_string())),
            other => return Err(fmt_err(format!("unknown key `{other}`"))),
        }
    }
    if !draft.is_empty() {
        tasks.push(draft.finish()?);
    }
    Ok(tasks)
}

pub fn render_tasks(tasks: &[Task]) -> String {
    let mut out = String::new();
    for (i, t) in tasks.iter().enumerate() {
        if i > 0 {
            out.push_str("---\n");
        }
        let _ = writeln!(out, "name: {}", t.name);
        let decls: Vec<String> = t.inputs.iter().map(|(n, ty)| format!("{n}:{ty}")).collect();
        let _ = writeln!(out, "inputs: {}", decls.join(", "));
        let _ = writeln!(out, "output: {}", t.output);
        for ex in &t.examples {
            let binds: Vec<String> = t
                .inputs
                .iter()
                .map(|(n, _)| format!("{n}={}", ex.inputs[n]))
                .collect();
            let _ = writeln!(out, "example: {} -> {}", binds.join(", "), ex.output);
        }
        if let Some(s) = &t.solution {
            let _ = writeln!(out, "solution: {s}");
        }
    }
    out
}

pub fn load_tasks(path: &Path) -> Result<Vec<Task>, TaskError> {
    let text = std::fs::read_to_string(path).map_err(|e| TaskError::Io(e.to_string()))?;
    parse_tasks(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = "\
name: sum_plus
inputs: xs:IntList, n:Int
output: Int
example: xs=[1, 2,3], n=2 -> 8
example: xs=[], n=-1 -> -1
solution: (Add (Sum xs) n)
---
name: flag
inputs: b:Bool
output: Bool
example: b=true -> true
";

    #[test]
    fn parses_documents() {
        let tasks = parse_tasks(DOC).unwrap();
        assert_eq!(tasks.len(), 2);
        assert_eq!(tasks[0].inputs[1], ("n".to_string(), Ty::Int));
        assert_eq!(
            tasks[0].examples[0].inputs["xs"],
            Value::list(vec![1, 2, 3])
        );
        assert_eq!(tasks[0].examples[1].output, Value::Int(-1));
        assert!(tasks[0].solution.is_some());
        assert_eq!(parse_tasks(&render_tasks(&tasks)).unwrap(), tasks);
    }

    #[test]
    fn reports_line_numbers() {
        let err =
            parse_tasks("name: t\ninputs: x:Int\noutput: Int\nexample: x=1 => 2\n").unwrap_err();
        assert_eq!(
            err,
            TaskError::Format {
                line: 4,
                message: "example needs `->`".into()
            }
        );
    }

    #[test]
    fn rejects_ill_typed_examples() {
        let err = parse_tasks("name: t\ninputs: x:Int\noutput: Int\nexample: x=[1] -> 2\n");
        assert!(matches!(err, Err(TaskError::Invalid { .. })));
        let err = parse_tasks("name: t\ninputs: x:Int\noutput: Int\n");
        assert!(matches!(err, Err(TaskError::Invalid { .. })));
    }
}
