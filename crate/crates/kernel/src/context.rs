//! Ordered contexts of declarations, definitions, holes and equations.

use crate::term::{Name, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContextEntry {
    Universal { name: Name, ty: Term },
    Definition { name: Name, ty: Term, body: Term },
    /// A hole to be filled by proof search.
    Existential { name: Name, ty: Term },
    /// A matching constraint `lhs = rhs`.
    Equation { lhs: Term, rhs: Term },
}

impl ContextEntry {
    pub fn name(&self) -> Option<&Name> {
        match self {
            ContextEntry::Universal { name, .. }
            | ContextEntry::Definition { name, .. }
            | ContextEntry::Existential { name, .. } => Some(name),
            ContextEntry::Equation { .. } => None,
        }
    }

    pub fn ty(&self) -> Option<&Term> {
        match self {
            ContextEntry::Universal { ty, .. }
            | ContextEntry::Definition { ty, .. }
            | ContextEntry::Existential { ty, .. } => Some(ty),
            ContextEntry::Equation { .. } => None,
        }
    }

    pub fn is_universal(&self) -> bool {
        matches!(self, ContextEntry::Universal { .. } | ContextEntry::Definition { .. })
    }

    /// Applies `f` to every term held by the entry.
    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> ContextEntry {
        match self {
            ContextEntry::Universal { name, ty } => ContextEntry::Universal { name: name.clone(), ty: f(ty) },
            ContextEntry::Definition { name, ty, body } => {
                ContextEntry::Definition { name: name.clone(), ty: f(ty), body: f(body) }
            }
            ContextEntry::Existential { name, ty } => ContextEntry::Existential { name: name.clone(), ty: f(ty) },
            ContextEntry::Equation { lhs, rhs } => ContextEntry::Equation { lhs: f(lhs), rhs: f(rhs) },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    entries: Vec<ContextEntry>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn from_entries(entries: Vec<ContextEntry>) -> Self {
        Context { entries }
    }

    pub fn entries(&self) -> &[ContextEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<ContextEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, entry: ContextEntry) {
        self.entries.push(entry);
    }

    pub fn with(&self, entry: ContextEntry) -> Context {
        let mut c = self.clone();
        c.push(entry);
        c
    }

    pub fn push_universal(&mut self, name: impl Into<Name>, ty: Term) {
        self.push(ContextEntry::Universal { name: name.into(), ty });
    }

    pub fn push_definition(&mut self, name: impl Into<Name>, ty: Term, body: Term) {
        self.push(ContextEntry::Definition { name: name.into(), ty, body });
    }

    pub fn lookup(&self, name: &str) -> Option<&ContextEntry> {
        self.entries.iter().rev().find(|e| e.name().is_some_and(|n| &**n == name))
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().rposition(|e| e.name().is_some_and(|n| &**n == name))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }

    pub fn type_of(&self, name: &str) -> Option<&Term> {
        self.lookup(name).and_then(ContextEntry::ty)
    }

    /// Body of a definition, used for δ-reduction.
    pub fn definition(&self, name: &str) -> Option<&Term> {
        match self.lookup(name)? {
            ContextEntry::Definition { body, .. } => Some(body),
            _ => None,
        }
    }

    pub fn is_existential(&self, name: &str) -> bool {
        matches!(self.lookup(name), Some(ContextEntry::Existential { .. }))
    }

    /// Non constrained and non quantified: only declarations and definitions.
    pub fn is_plain(&self) -> bool {
        self.entries.iter().all(ContextEntry::is_universal)
    }

    pub fn existentials(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.entries.iter().filter_map(|e| match e {
            ContextEntry::Existential { name, ty } => Some((name, ty)),
            _ => None,
        })
    }

    pub fn equations(&self) -> impl Iterator<Item = (&Term, &Term)> {
        self.entries.iter().filter_map(|e| match e {
            ContextEntry::Equation { lhs, rhs } => Some((lhs, rhs)),
            _ => None,
        })
    }

    /// Universal variables and defined constants, most recent first.
    pub fn constants_recent_first(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.entries.iter().rev().filter_map(|e| match e {
            ContextEntry::Universal { name, ty } | ContextEntry::Definition { name, ty, .. } => Some((name, ty)),
            _ => None,
        })
    }

    /// The same context with existentials read as universal declarations
    /// and equations dropped.
    pub fn existentials_as_universals(&self) -> Context {
        Context {
            entries: self
                .entries
                .iter()
                .filter_map(|e| match e {
                    ContextEntry::Existential { name, ty } => {
                        Some(ContextEntry::Universal { name: name.clone(), ty: ty.clone() })
                    }
                    ContextEntry::Equation { .. } => None,
                    other => Some(other.clone()),
                })
                .collect(),
        }
    }

    /// True when all names are pairwise distinct.
    pub fn names_distinct(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.entries.iter().filter_map(ContextEntry::name).all(|n| seen.insert(n.clone()))
    }
}

impl FromIterator<ContextEntry> for Context {
    fn from_iter<I: IntoIterator<Item = ContextEntry>>(iter: I) -> Self {
        Context { entries: iter.into_iter().collect() }
    }
}

impl Extend<ContextEntry> for Context {
    fn extend<I: IntoIterator<Item = ContextEntry>>(&mut self, iter: I) {
        self.entries.extend(iter)
    }
}
