//! Goal decomposition, the curried view of a head's type, and the context
//! extension that instantiates a goal hole with a head applied to fresh holes.

use cocv_kernel::reduce::normalize;
use cocv_kernel::typing::infer_sort;
use cocv_kernel::{fresh_name, Context, ContextEntry, Name, ReductionError, Term, TypeError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GammaError {
    #[error("prefix index {index} exceeds the {available} goal binders")]
    PrefixTooLong { index: usize, available: usize },
    #[error("ill-typed hole `{name}`: {error}")]
    IllTypedHole { name: Name, error: TypeError },
    #[error("`{0}` is not a hole of the context")]
    NotExistential(Name),
    #[error("substitution produced duplicate names")]
    DuplicateNames,
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Per-owner supply of hole names. Names start with `?`, which identifiers
/// never do, so they cannot clash with user declarations.
#[derive(Debug, Clone)]
pub struct NameSupply {
    prefix: &'static str,
    next: usize,
}

impl NameSupply {
    pub fn new(prefix: &'static str) -> Self {
        NameSupply { prefix, next: 1 }
    }

    pub fn fresh(&mut self) -> Name {
        let n = Name::from(format!("?{}{}", self.prefix, self.next));
        self.next += 1;
        n
    }
}

/// `(x1:P1)...(xn:Pn)P` with `P` atomic. Binders are opened with names that
/// are unused in the context they were split in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalDecomposition {
    pub binders: Vec<(Name, Term)>,
    pub head: Term,
}

impl GoalDecomposition {
    pub fn arity(&self) -> usize {
        self.binders.len()
    }

    pub fn recompose(&self) -> Term {
        Term::pis(&self.binders, self.head.clone())
    }
}

fn readable_local(hint: &str, ctx: &Context, taken: &[(Name, Term)]) -> Name {
    let base = match hint {
        "" | "_" => "x",
        h => h.split('#').next().unwrap_or("x"),
    };
    let mut candidate = base.to_string();
    let mut k = 0;
    while ctx.contains(&candidate) || taken.iter().any(|(n, _)| **n == *candidate) {
        k += 1;
        candidate = format!("{base}{k}");
    }
    Name::from(candidate)
}

/// Peels the maximal product prefix off the normal form of `goal`.
pub fn split_goal(goal: &Term, ctx: &Context) -> Result<GoalDecomposition, ReductionError> {
    let mut t = normalize(goal, ctx)?;
    let mut binders = Vec::new();
    while let Term::Prod(b, d, body) = &t {
        let x = readable_local(b.name(), ctx, &binders);
        let next = body.open(&x);
        binders.push((x, (**d).clone()));
        t = next;
    }
    Ok(GoalDecomposition { binders, head: t })
}

/// `w : (y1:Q'1)...(yq:Q'q)Q'` seen as `(y1:Q1)(y2:(Q2 y1))...(Q y1...yq)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurriedType {
    /// `(y_j, Q'_j)` with earlier `y`s free.
    pub params: Vec<(Name, Term)>,
    /// `Q_j = [y1:Q'1]...[y_{j-1}:Q'_{j-1}]Q'_j`.
    pub families: Vec<Term>,
    /// `Q = [y1:Q'1]...[yq:Q'q]Q'`.
    pub result: Term,
    /// `Q'`, with the `y`s free.
    pub target: Term,
}

impl CurriedType {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// `(y1:Q1)(y2:(Q2 y1))...(Q y1...yq)`.
    pub fn recompose(&self) -> Term {
        let ys: Vec<Term> = self.params.iter().map(|(n, _)| Term::Free(n.clone())).collect();
        let binders: Vec<(Name, Term)> = self
            .params
            .iter()
            .zip(&self.families)
            .enumerate()
            .map(|(j, ((y, _), q))| (y.clone(), Term::apps(q.clone(), ys[..j].iter().cloned())))
            .collect();
        Term::pis(&binders, Term::apps(self.result.clone(), ys))
    }
}

pub fn curry_type(w_type: &Term, ctx: &Context) -> Result<CurriedType, ReductionError> {
    let mut t = normalize(w_type, ctx)?;
    let mut params: Vec<(Name, Term)> = Vec::new();
    while let Term::Prod(b, d, body) = &t {
        let y = fresh_name(b.name());
        let next = body.open(&y);
        params.push((y, (**d).clone()));
        t = next;
    }
    let families = (0..params.len()).map(|j| Term::lams(&params[..j], params[j].1.clone())).collect();
    let result = Term::lams(&params, t.clone());
    Ok(CurriedType { params, families, result, target: t })
}

/// `<x, γ, body>`: the hole instantiated, the entries replacing it, and the
/// instantiating term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionTriple {
    pub variable: Name,
    pub extension: Vec<ContextEntry>,
    pub body: Term,
}

impl SubstitutionTriple {
    /// Plain instantiation of `variable` by `body`.
    pub fn instantiation(variable: Name, body: Term) -> Self {
        SubstitutionTriple { variable, extension: Vec::new(), body }
    }

    pub fn holes(&self) -> impl Iterator<Item = &Name> {
        self.extension.iter().filter_map(|e| match e {
            ContextEntry::Existential { name, .. } => Some(name),
            _ => None,
        })
    }
}

/// Builds the triple that instantiates `variable` (a hole of the goal's
/// type) by `[x1:P1]...[xi:Pi](w (h1 x1...xi)...(hq x1...xi))`.
///
/// `ctx` must contain every constant the goal mentions; goal binders are
/// free in `goal.binders` types and may be used as `w`.
pub fn build_gamma(
    variable: &Name,
    goal: &GoalDecomposition,
    prefix: usize,
    w: &Name,
    w_type: &Term,
    ctx: &Context,
    supply: &mut NameSupply,
) -> Result<SubstitutionTriple, GammaError> {
    if prefix > goal.arity() {
        return Err(GammaError::PrefixTooLong { index: prefix, available: goal.arity() });
    }
    let xs = &goal.binders[..prefix];
    let x_terms: Vec<Term> = xs.iter().map(|(n, _)| Term::Free(n.clone())).collect();
    let curried = curry_type(w_type, ctx)?;

    let mut check_ctx = ctx.existentials_as_universals();
    let mut extension = Vec::new();
    let mut applied_holes: Vec<Term> = Vec::new();
    for family in &curried.families {
        let h = supply.fresh();
        let inner = normalize_beta_only(&Term::apps(family.clone(), applied_holes.iter().cloned()))?;
        let ty = Term::pis(xs, inner);
        infer_sort(&check_ctx, &ty).map_err(|error| GammaError::IllTypedHole { name: h.clone(), error })?;
        check_ctx.push_universal(h.clone(), ty.clone());
        extension.push(ContextEntry::Existential { name: h.clone(), ty });
        applied_holes.push(Term::apps(Term::Free(h), x_terms.iter().cloned()));
    }
    let lhs = Term::pis(xs, Term::apps(curried.result.clone(), applied_holes.iter().cloned()));
    extension.push(ContextEntry::Equation { lhs, rhs: goal.recompose() });
    let body = Term::lams(xs, Term::apps(Term::Free(w.clone()), applied_holes));
    Ok(SubstitutionTriple { variable: variable.clone(), extension, body })
}

fn normalize_beta_only(t: &Term) -> Result<Term, ReductionError> {
    cocv_kernel::normalize_beta(t)
}

/// `Γγ`: replaces the hole by the extension and substitutes the body into
/// every later entry.
pub fn apply_substitution(ctx: &Context, triple: &SubstitutionTriple) -> Result<Context, GammaError> {
    let entries = ctx.entries();
    let at = entries
        .iter()
        .position(|e| matches!(e, ContextEntry::Existential { name, .. } if *name == triple.variable))
        .ok_or_else(|| GammaError::NotExistential(triple.variable.clone()))?;
    let mut out: Vec<ContextEntry> = entries[..at].to_vec();
    out.extend(triple.extension.iter().cloned());
    out.extend(entries[at + 1..].iter().map(|e| e.map_terms(|t| t.subst(&triple.variable, &triple.body))));
    let out = Context::from_entries(out);
    if !out.names_distinct() {
        return Err(GammaError::DuplicateNames);
    }
    Ok(out)
}

/// Instantiates a hole by a closed term.
pub fn instantiate(ctx: &Context, hole: &Name, value: &Term) -> Result<Context, GammaError> {
    apply_substitution(ctx, &SubstitutionTriple::instantiation(hole.clone(), value.clone()))
}
