//! Search contexts: the task's concrete store plus one store of lambda bodies
//! per parameter list that any operation expects.

use std::sync::Arc;

use super::signature::{battery, SigValue, Signature};
use super::store::{ArgRef, Insert, Origin, ValueEntry, ValueStore};
use super::task::Task;
use crate::dsl::DSLibrary;
use crate::guidance::features;
use crate::lang::{Bindings, Closure, ErrorClass, EvalLimits, Machine, Term, Ty, Value};

/// Index of the concrete context in [`SearchSpace::contexts`].
pub const CONCRETE: usize = 0;

#[derive(Clone, Debug)]
pub struct Context {
    /// Lambda parameter types; empty for the concrete context.
    pub params: Vec<Ty>,
    /// Example index of each evaluation point.
    pub point_example: Vec<usize>,
    /// Parameter values of each evaluation point.
    pub point_args: Vec<Vec<Value>>,
    pub store: ValueStore,
}

impl Context {
    pub fn is_lambda(&self) -> bool {
        !self.params.is_empty()
    }
}

/// The result of running one operation on one argument tuple.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub signature: Signature,
    pub weight: u32,
    pub ty: Ty,
    /// False when the value is dead: it errors on some example (concrete) or
    /// on every point (lambda body).
    pub viable: bool,
}

#[derive(Clone)]
pub struct SearchSpace<'a> {
    pub lib: &'a DSLibrary,
    pub limits: EvalLimits,
    pub inputs: Vec<(String, Ty)>,
    pub examples: Vec<Arc<Bindings>>,
    pub contexts: Vec<Context>,
    /// Expected output type and per-example outputs, when searching for a task.
    pub target: Option<(Ty, Signature)>,
}

impl<'a> SearchSpace<'a> {
    pub fn for_task(task: &Task, lib: &'a DSLibrary, limits: EvalLimits) -> Self {
        let target: Signature = task
            .examples
            .iter()
            .map(|e| SigValue::from_result(Ok(e.output.clone())))
            .collect();
        Self::new(
            lib,
            limits,
            task.inputs.clone(),
            task.example_inputs(),
            Some((task.output.clone(), target)),
        )
    }

    pub fn new(
        lib: &'a DSLibrary,
        limits: EvalLimits,
        inputs: Vec<(String, Ty)>,
        examples: Vec<Arc<Bindings>>,
        target: Option<(Ty, Signature)>,
    ) -> Self {
        let mut contexts = vec![Context {
            params: Vec::new(),
            point_example: (0..examples.len()).collect(),
            point_args: vec![Vec::new(); examples.len()],
            store: ValueStore::new(),
        }];
        for params in lib.lambda_contexts() {
            let tuples = battery(&params);
            let mut point_example = Vec::new();
            let mut point_args = Vec::new();
            for e in 0..examples.len() {
                for t in &tuples {
                    point_example.push(e);
                    point_args.push(t.clone());
                }
            }
            contexts.push(Context {
                params,
                point_example,
                point_args,
                store: ValueStore::new(),
            });
        }
        let mut space = SearchSpace {
            lib,
            limits,
            inputs,
            examples,
            contexts,
            target,
        };
        for c in 0..space.contexts.len() {
            space.seed(c);
        }
        space
    }

    fn seed(&mut self, c: usize) {
        let k = self.contexts[c].params.len();
        for j in 0..k {
            let ty = self.contexts[c].params[j].clone();
            let sig: Signature = self.contexts[c]
                .point_args
                .iter()
                .map(|args| SigValue::from_result(Ok(args[j].clone())))
                .collect();
            self.add_leaf(c, Term::Var(k - 1 - j), 0, ty, sig);
        }
        for (name, ty) in self.inputs.clone() {
            let term = Term::Input(name);
            let sig = self.eval_leaf(c, &term);
            self.add_leaf(c, term, 1, ty, sig);
        }
        for constant in self.lib.constants() {
            let term = constant.reference();
            let sig = self.eval_leaf(c, &term);
            self.add_leaf(c, term, 1, constant.ty.clone(), sig);
        }
    }

    fn eval_leaf(&self, c: usize, term: &Term) -> Signature {
        let ctx = &self.contexts[c];
        ctx.point_example
            .iter()
            .map(|&e| {
                SigValue::from_result(Machine::new(self.lib, self.limits).eval(
                    term,
                    &[],
                    &self.examples[e],
                ))
            })
            .collect()
    }

    fn add_leaf(&mut self, c: usize, term: Term, weight: u32, ty: Ty, sig: Signature) {
        if sig.iter().any(SigValue::is_error) {
            return;
        }
        let entry = ValueEntry {
            term,
            weight,
            ty,
            signature: sig,
            is_lambda: self.contexts[c].is_lambda(),
            origin: None,
            features: Arc::from(Vec::new()),
        };
        if let Insert::New(id) | Insert::Improved(id) = self.contexts[c].store.insert(entry) {
            self.refresh_features(c, id);
        }
    }

    pub fn entry(&self, r: ArgRef) -> &ValueEntry {
        self.contexts[r.ctx as usize].store.get(r.id)
    }

    /// Index of the lambda context for a function-typed parameter.
    pub fn lambda_context(&self, params: &[Ty]) -> Option<usize> {
        self.contexts.iter().position(|c| c.params == params)
    }

    /// Candidate argument entries for parameter `param` of an operation
    /// applied in context `c`, in insertion order.
    pub fn candidates(&self, c: usize, param: &Ty) -> Vec<ArgRef> {
        match param {
            Ty::Arrow(params, ret) => match self.lambda_context(params) {
                Some(l) => {
                    let store = &self.contexts[l].store;
                    store
                        .of_type(ret)
                        .iter()
                        .filter(|&&id| store.get(id).weight >= 1)
                        .map(|&id| ArgRef { ctx: l as u32, id })
                        .collect()
                }
                None => Vec::new(),
            },
            ty => self.contexts[c]
                .store
                .of_type(ty)
                .iter()
                .map(|&id| ArgRef { ctx: c as u32, id })
                .collect(),
        }
    }

    pub fn tuple_weight(&self, args: &[ArgRef]) -> u32 {
        1 + args.iter().map(|a| self.entry(*a).weight).sum::<u32>()
    }

    /// Runs operation `op` on `args` at every point of context `c`.
    pub fn execute(&self, c: usize, op: usize, args: &[ArgRef]) -> Outcome {
        let operation = &self.lib.ops()[op];
        let ctx = &self.contexts[c];
        let mut closures: Vec<Option<Vec<Value>>> = vec![None; args.len()];
        for (i, a) in args.iter().enumerate() {
            if operation.params[i].is_arrow() {
                let lam = &self.contexts[a.ctx as usize];
                let body = Arc::new(self.entry(*a).term.clone());
                closures[i] = Some(
                    self.examples
                        .iter()
                        .map(|inputs| {
                            Value::Closure(Arc::new(Closure {
                                arity: lam.params.len(),
                                body: body.clone(),
                                env: Vec::new(),
                                inputs: inputs.clone(),
                            }))
                        })
                        .collect(),
                );
            }
        }
        let mut out = Vec::with_capacity(ctx.point_example.len());
        let mut errors = 0;
        for (p, &e) in ctx.point_example.iter().enumerate() {
            let mut vals = Vec::with_capacity(args.len());
            let mut failed: Option<ErrorClass> = None;
            for (i, a) in args.iter().enumerate() {
                match &closures[i] {
                    Some(per_example) => vals.push(per_example[e].clone()),
                    None => match &self.entry(*a).signature[p] {
                        SigValue::Error(class) => {
                            failed = Some(*class);
                            break;
                        }
                        v => vals.push(v.to_value().expect("non-error value")),
                    },
                }
            }
            let result = match failed {
                Some(class) => SigValue::Error(class),
                None => SigValue::from_result(
                    Machine::new(self.lib, self.limits).apply_op(operation, vals),
                ),
            };
            if result.is_error() {
                errors += 1;
            }
            out.push(result);
        }
        let viable = if ctx.is_lambda() {
            errors < out.len()
        } else {
            errors == 0
        };
        Outcome {
            signature: out.into(),
            weight: self.tuple_weight(args),
            ty: operation.ret.clone(),
            viable,
        }
    }

    pub fn build_term(&self, op: usize, args: &[ArgRef]) -> Term {
        let operation = &self.lib.ops()[op];
        let terms = args
            .iter()
            .zip(&operation.params)
            .map(|(a, param)| {
                let t = self.entry(*a).term.clone();
                if !param.is_arrow() {
                    t
                } else {
                    Term::lam(self.contexts[a.ctx as usize].params.len(), t)
                }
            })
            .collect();
        Term::call(operation.name.clone(), terms)
    }

    /// Inserts an execution result. Returns `None` for non-viable outcomes
    /// and duplicates that are not lighter.
    pub fn commit(
        &mut self,
        c: usize,
        op: usize,
        args: &[ArgRef],
        outcome: Outcome,
    ) -> Option<Insert> {
        if !outcome.viable {
            return None;
        }
        let store = &self.contexts[c].store;
        if let Some(id) = store.lookup(&outcome.signature) {
            if store.get(id).weight <= outcome.weight {
                return Some(Insert::Duplicate(id));
            }
        }
        let entry = ValueEntry {
            term: self.build_term(op, args),
            weight: outcome.weight,
            ty: outcome.ty,
            signature: outcome.signature,
            is_lambda: self.contexts[c].is_lambda(),
            origin: Some(Origin {
                op,
                args: args.to_vec(),
            }),
            features: Arc::from(Vec::new()),
        };
        let ins = self.contexts[c].store.insert(entry);
        if ins.changed() {
            self.refresh_features(c, ins.id());
        }
        Some(ins)
    }

    /// True when entry `id` of the concrete context matches the task outputs.
    pub fn is_solution(&self, id: u32) -> bool {
        match &self.target {
            Some((ty, sig)) => {
                let e = self.contexts[CONCRETE].store.get(id);
                &e.ty == ty && &e.signature == sig
            }
            None => false,
        }
    }

    fn refresh_features(&mut self, c: usize, id: u32) {
        if let Some((_, target)) = self.target.clone() {
            let f = features::value_features(self, c, self.contexts[c].store.get(id), &target);
            self.contexts[c].store.set_features(id, f.into());
        }
    }

    /// Recomputes every entry's features against a new target signature.
    pub fn retarget(&mut self, ty: Ty, target: Signature) {
        self.target = Some((ty, target));
        for c in 0..self.contexts.len() {
            for id in 0..self.contexts[c].store.len() as u32 {
                self.refresh_features(c, id);
            }
        }
    }

    /// Signatures of every context, as sorted sets.
    pub fn signature_sets(&self) -> Vec<std::collections::BTreeSet<(Ty, Signature)>> {
        self.contexts
            .iter()
            .map(|c| {
                c.store
                    .entries()
                    .iter()
                    .map(|e| (e.ty.clone(), e.signature.clone()))
                    .collect()
            })
            .collect()
    }
}

/// The initial concrete store for a task: its inputs and the library constants.
pub fn init_store(task: &Task, lib: &DSLibrary, limits: EvalLimits) -> ValueStore {
    SearchSpace::for_task(task, lib, limits)
        .contexts
        .swap_remove(CONCRETE)
        .store
}
