//! Locally nameless terms.
//!
//! Variables bound inside a term are de Bruijn indices (`Bound`); variables
//! of the surrounding context are names (`Free`). Binders carry a display
//! hint that takes no part in equality or hashing, so derived `PartialEq`
//! is α-equivalence.

use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Deref;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Interned-by-refcount identifier.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: impl AsRef<str>) -> Self {
        Name(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Deref for Name {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

static FRESH: AtomicU64 = AtomicU64::new(0);

/// A name that cannot collide with any identifier the parser accepts.
pub fn fresh_name(hint: &str) -> Name {
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    let base = hint.split('#').next().unwrap_or("x");
    Name::from(format!("{base}#{n}"))
}

/// Display name of a binder. Compares equal to every other binder.
#[derive(Clone)]
pub struct Binder(pub Name);

impl Binder {
    pub fn new(s: impl AsRef<str>) -> Self {
        Binder(Name::new(s))
    }

    pub fn anonymous() -> Self {
        Binder(Name::new("_"))
    }

    pub fn name(&self) -> &Name {
        &self.0
    }
}

impl PartialEq for Binder {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Binder {}

impl Hash for Binder {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Debug for Binder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Prop,
    Type,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Prop => f.write_str("Prop"),
            Sort::Type => f.write_str("Type"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Sort(Sort),
    Bound(usize),
    Free(Name),
    App(Arc<Term>, Arc<Term>),
    Lam(Binder, Arc<Term>, Arc<Term>),
    Prod(Binder, Arc<Term>, Arc<Term>),
}

impl Term {
    pub fn prop() -> Term {
        Term::Sort(Sort::Prop)
    }

    pub fn ty() -> Term {
        Term::Sort(Sort::Type)
    }

    pub fn var(name: impl Into<Name>) -> Term {
        Term::Free(name.into())
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(a))
    }

    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    /// `[name:domain]body`, abstracting the free variable `name` of `body`.
    pub fn lam(name: &Name, domain: Term, body: &Term) -> Term {
        Term::Lam(Binder(display_hint(name)), Arc::new(domain), Arc::new(body.close(name)))
    }

    /// `(name:domain)body`, abstracting the free variable `name` of `body`.
    pub fn pi(name: &Name, domain: Term, body: &Term) -> Term {
        Term::Prod(Binder(display_hint(name)), Arc::new(domain), Arc::new(body.close(name)))
    }

    /// Non-dependent product `domain -> codomain`.
    pub fn arrow(domain: Term, codomain: Term) -> Term {
        Term::Prod(Binder::anonymous(), Arc::new(domain), Arc::new(codomain))
    }

    /// Abstracts `binders` (outermost first) over `body` with λ.
    pub fn lams(binders: &[(Name, Term)], body: Term) -> Term {
        binders.iter().rev().fold(body, |acc, (n, ty)| Term::lam(n, ty.clone(), &acc))
    }

    /// Abstracts `binders` (outermost first) over `body` with Π.
    pub fn pis(binders: &[(Name, Term)], body: Term) -> Term {
        binders.iter().rev().fold(body, |acc, (n, ty)| Term::pi(n, ty.clone(), &acc))
    }

    pub fn is_sort(&self) -> bool {
        matches!(self, Term::Sort(_))
    }

    pub fn as_free(&self) -> Option<&Name> {
        match self {
            Term::Free(n) => Some(n),
            _ => None,
        }
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(&**a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    pub fn head(&self) -> &Term {
        let mut t = self;
        while let Term::App(f, _) = t {
            t = f;
        }
        t
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Sort(_) | Term::Bound(_) | Term::Free(_) => 1,
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Lam(_, d, b) | Term::Prod(_, d, b) => 1 + d.size() + b.size(),
        }
    }

    /// Replaces the loose index 0 by `u`, which must be locally closed.
    pub fn instantiate(&self, u: &Term) -> Term {
        self.instantiate_at(0, u)
    }

    fn instantiate_at(&self, depth: usize, u: &Term) -> Term {
        match self {
            Term::Bound(i) if *i == depth => u.clone(),
            Term::Bound(i) if *i > depth => Term::Bound(i - 1),
            Term::Sort(_) | Term::Bound(_) | Term::Free(_) => self.clone(),
            Term::App(f, a) => Term::app(f.instantiate_at(depth, u), a.instantiate_at(depth, u)),
            Term::Lam(b, d, body) => Term::Lam(
                b.clone(),
                Arc::new(d.instantiate_at(depth, u)),
                Arc::new(body.instantiate_at(depth + 1, u)),
            ),
            Term::Prod(b, d, body) => Term::Prod(
                b.clone(),
                Arc::new(d.instantiate_at(depth, u)),
                Arc::new(body.instantiate_at(depth + 1, u)),
            ),
        }
    }

    /// Opens a binder body with the free variable `name`.
    pub fn open(&self, name: &Name) -> Term {
        self.instantiate(&Term::Free(name.clone()))
    }

    /// Turns free occurrences of `name` into the loose index 0.
    pub fn close(&self, name: &Name) -> Term {
        self.close_at(0, name)
    }

    fn close_at(&self, depth: usize, name: &Name) -> Term {
        match self {
            Term::Free(n) if n == name => Term::Bound(depth),
            Term::Sort(_) | Term::Bound(_) | Term::Free(_) => self.clone(),
            Term::App(f, a) => Term::app(f.close_at(depth, name), a.close_at(depth, name)),
            Term::Lam(b, d, body) => Term::Lam(
                b.clone(),
                Arc::new(d.close_at(depth, name)),
                Arc::new(body.close_at(depth + 1, name)),
            ),
            Term::Prod(b, d, body) => Term::Prod(
                b.clone(),
                Arc::new(d.close_at(depth, name)),
                Arc::new(body.close_at(depth + 1, name)),
            ),
        }
    }

    /// Capture-avoiding replacement of the free variable `target` by `u`.
    ///
    /// `u` must be locally closed; binders of `self` are indices, so nothing
    /// in `u` can be captured.
    pub fn subst(&self, target: &Name, u: &Term) -> Term {
        if !self.mentions(target) {
            return self.clone();
        }
        match self {
            Term::Free(n) if n == target => u.clone(),
            Term::Sort(_) | Term::Bound(_) | Term::Free(_) => self.clone(),
            Term::App(f, a) => Term::app(f.subst(target, u), a.subst(target, u)),
            Term::Lam(b, d, body) => {
                Term::Lam(b.clone(), Arc::new(d.subst(target, u)), Arc::new(body.subst(target, u)))
            }
            Term::Prod(b, d, body) => {
                Term::Prod(b.clone(), Arc::new(d.subst(target, u)), Arc::new(body.subst(target, u)))
            }
        }
    }

    /// Simultaneous substitution of free variables.
    pub fn subst_all(&self, map: &[(Name, Term)]) -> Term {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Term::Free(n) => match map.iter().find(|(k, _)| k == n) {
                Some((_, v)) => v.clone(),
                None => self.clone(),
            },
            Term::Sort(_) | Term::Bound(_) => self.clone(),
            Term::App(f, a) => Term::app(f.subst_all(map), a.subst_all(map)),
            Term::Lam(b, d, body) => {
                Term::Lam(b.clone(), Arc::new(d.subst_all(map)), Arc::new(body.subst_all(map)))
            }
            Term::Prod(b, d, body) => {
                Term::Prod(b.clone(), Arc::new(d.subst_all(map)), Arc::new(body.subst_all(map)))
            }
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Term::Free(n) => &**n == name,
            Term::Sort(_) | Term::Bound(_) => false,
            Term::App(f, a) => f.mentions(name) || a.mentions(name),
            Term::Lam(_, d, b) | Term::Prod(_, d, b) => d.mentions(name) || b.mentions(name),
        }
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Free(n) => {
                out.insert(n.clone());
            }
            Term::Sort(_) | Term::Bound(_) => {}
            Term::App(f, a) => {
                f.collect_free(out);
                a.collect_free(out);
            }
            Term::Lam(_, d, b) | Term::Prod(_, d, b) => {
                d.collect_free(out);
                b.collect_free(out);
            }
        }
    }

    /// True when index `depth` occurs loose (used for `->` sugar).
    pub fn has_loose(&self, depth: usize) -> bool {
        match self {
            Term::Bound(i) => *i == depth,
            Term::Sort(_) | Term::Free(_) => false,
            Term::App(f, a) => f.has_loose(depth) || a.has_loose(depth),
            Term::Lam(_, d, b) | Term::Prod(_, d, b) => d.has_loose(depth) || b.has_loose(depth + 1),
        }
    }

    /// True when no index escapes its binders.
    pub fn is_locally_closed(&self) -> bool {
        self.max_loose(0).is_none()
    }

    fn max_loose(&self, depth: usize) -> Option<usize> {
        match self {
            Term::Bound(i) if *i >= depth => Some(*i - depth),
            Term::Sort(_) | Term::Bound(_) | Term::Free(_) => None,
            Term::App(f, a) => f.max_loose(depth).max(a.max_loose(depth)),
            Term::Lam(_, d, b) | Term::Prod(_, d, b) => d.max_loose(depth).max(b.max_loose(depth + 1)),
        }
    }
}

/// Strips the uniqueness suffix that `fresh_name` appends.
pub(crate) fn display_hint(name: &Name) -> Name {
    match name.find('#') {
        Some(i) => Name::new(&name[..i]),
        None => name.clone(),
    }
}
