//! Explored values, deduplicated by signature.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::signature::Signature;
use crate::lang::{Term, Ty};

/// Names an entry in one of the search contexts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArgRef {
    pub ctx: u32,
    pub id: u32,
}

/// How an entry was built: the operation index and its argument entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Origin {
    pub op: usize,
    pub args: Vec<ArgRef>,
}

/// One explored value. In a lambda context `term` and `ty` describe the
/// lambda body; the value itself is `(lamK term)`.
#[derive(Clone, Debug)]
pub struct ValueEntry {
    pub term: Term,
    pub weight: u32,
    pub ty: Ty,
    pub signature: Signature,
    pub is_lambda: bool,
    pub origin: Option<Origin>,
    /// Scorer features, filled in by the search when task outputs are known.
    pub features: Arc<[f64]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Insert {
    New(u32),
    /// A lighter term replaced the stored one.
    Improved(u32),
    Duplicate(u32),
}

impl Insert {
    pub fn changed(self) -> bool {
        !matches!(self, Insert::Duplicate(_))
    }

    pub fn id(self) -> u32 {
        match self {
            Insert::New(i) | Insert::Improved(i) | Insert::Duplicate(i) => i,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValueStore {
    entries: Vec<ValueEntry>,
    by_signature: HashMap<Signature, u32>,
    by_type: BTreeMap<Ty, Vec<u32>>,
    weight_histogram: Vec<usize>,
    /// Ids of new and improved entries, in order of change.
    changes: Vec<u32>,
}

impl ValueStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> &ValueEntry {
        &self.entries[id as usize]
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> &[ValueEntry] {
        &self.entries
    }

    /// Ids of entries added or made lighter after the first `since` changes.
    pub fn changes_since(&self, since: usize) -> &[u32] {
        &self.changes[since.min(self.changes.len())..]
    }

    pub fn change_count(&self) -> usize {
        self.changes.len()
    }

    pub fn lookup(&self, sig: &Signature) -> Option<u32> {
        self.by_signature.get(sig).copied()
    }

    /// Ids of entries of type `ty`, in insertion order.
    pub fn of_type(&self, ty: &Ty) -> &[u32] {
        self.by_type.get(ty).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn type_counts(&self) -> impl Iterator<Item = (&Ty, usize)> {
        self.by_type.iter().map(|(t, ids)| (t, ids.len()))
    }

    /// Number of entries per weight, indexed by weight.
    pub fn weight_histogram(&self) -> &[usize] {
        &self.weight_histogram
    }

    pub fn insert(&mut self, entry: ValueEntry) -> Insert {
        if let Some(&id) = self.by_signature.get(&entry.signature) {
            let old_weight = self.entries[id as usize].weight;
            if entry.weight < old_weight {
                self.weight_histogram[old_weight as usize] -= 1;
                self.bump(entry.weight);
                self.entries[id as usize] = entry;
                self.changes.push(id);
                return Insert::Improved(id);
            }
            return Insert::Duplicate(id);
        }
        let id = self.entries.len() as u32;
        self.by_signature.insert(entry.signature.clone(), id);
        self.by_type.entry(entry.ty.clone()).or_default().push(id);
        self.bump(entry.weight);
        self.entries.push(entry);
        self.changes.push(id);
        Insert::New(id)
    }

    fn bump(&mut self, w: u32) {
        let w = w as usize;
        if self.weight_histogram.len() <= w {
            self.weight_histogram.resize(w + 1, 0);
        }
        self.weight_histogram[w] += 1;
    }

    pub fn set_features(&mut self, id: u32, features: Arc<[f64]>) {
        self.entries[id as usize].features = features;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::signature::SigValue;

    fn entry(t: Term, w: u32, v: i64) -> ValueEntry {
        ValueEntry {
            term: t,
            weight: w,
            ty: Ty::Int,
            signature: vec![SigValue::Int(v)].into(),
            is_lambda: false,
            origin: None,
            features: Arc::from(Vec::new()),
        }
    }

    #[test]
    fn dedupes_and_keeps_lighter_terms() {
        let mut s = ValueStore::new();
        assert_eq!(
            s.insert(entry(
                Term::call("Add", vec![Term::Int(1), Term::Int(1)]),
                3,
                2
            )),
            Insert::New(0)
        );
        assert_eq!(s.insert(entry(Term::Int(3), 1, 3)), Insert::New(1));
        assert_eq!(s.insert(entry(Term::Int(2), 1, 2)), Insert::Improved(0));
        assert_eq!(
            s.insert(entry(
                Term::call("Add", vec![Term::Int(2), Term::Int(0)]),
                3,
                2
            )),
            Insert::Duplicate(0)
        );
        assert_eq!(s.get(0).term, Term::Int(2));
        assert_eq!(s.weight_histogram(), &[0, 2, 0, 0]);
        assert_eq!(s.of_type(&Ty::Int), &[0, 1]);
    }
}
