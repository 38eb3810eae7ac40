//! Proof synthesis for a goal in a plain context.
//!
//! For each head candidate `w` and prefix length `i` the goal hole is
//! replaced by `[x1..xi](w (h1 x1..xi)..(hq x1..xi))` together with the
//! closing equation. The holes are then instantiated in three phases:
//! higher-order holes eagerly by variables, the closing equation by the
//! matcher, and the rest right to left by constants or projections. Every
//! instantiation is accounted for by matching the hole's type against the
//! type of the instantiating term.

use cocv_kernel::reduce::{normalize_with, order};
use cocv_kernel::typing::{check_type, infer_sort, infer_type};
use cocv_kernel::{normalize_beta, Context, ContextEntry, Fuel, Name, ReductionError, Sort, Term};
use thiserror::Error;

use crate::context::{apply_substitution, build_gamma, curry_type, instantiate, split_goal};
use crate::context::{GammaError, GoalDecomposition, NameSupply};
use crate::matcher::{solve_with, MatchError, MatchProblem, SolveOptions};

pub const DEFAULT_MAX_SOLUTIONS: usize = 64;

const GOAL_HOLE: &str = "?goal";

#[derive(Debug, Clone)]
pub struct SynthesisRequest {
    pub context: Context,
    pub goal: Term,
    /// Constants allowed as heads and fill candidates; `None` allows all.
    pub premises: Option<Vec<Name>>,
    pub fuel: u64,
    pub max_solutions: usize,
    pub trace: bool,
}

impl SynthesisRequest {
    pub fn new(context: Context, goal: Term) -> Self {
        SynthesisRequest {
            context,
            goal,
            premises: None,
            fuel: cocv_kernel::DEFAULT_FUEL,
            max_solutions: DEFAULT_MAX_SOLUTIONS,
            trace: false,
        }
    }

    pub fn with_premises<N: Into<Name>>(mut self, premises: impl IntoIterator<Item = N>) -> Self {
        self.premises = Some(premises.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    fn allows(&self, name: &Name) -> bool {
        self.premises.as_ref().is_none_or(|ps| ps.contains(name))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SynthesisOutcome {
    Found { proof: Term, trace: Vec<String> },
    NotFound { trace: Vec<String> },
    InternalError { reason: String, trace: Vec<String> },
}

impl SynthesisOutcome {
    pub fn proof(&self) -> Option<&Term> {
        match self {
            SynthesisOutcome::Found { proof, .. } => Some(proof),
            _ => None,
        }
    }

    pub fn trace(&self) -> &[String] {
        match self {
            SynthesisOutcome::Found { trace, .. }
            | SynthesisOutcome::NotFound { trace }
            | SynthesisOutcome::InternalError { trace, .. } => trace,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SynthesisOutcome::Found { .. })
    }

    pub fn is_internal_error(&self) -> bool {
        matches!(self, SynthesisOutcome::InternalError { .. })
    }
}

/// Failures that abort the whole search.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("matcher: {0}")]
    Matcher(MatchError),
    #[error("context: {0}")]
    Context(GammaError),
    #[error("synthesized proof `{proof}` fails the kernel check: {reason}")]
    Unsound { proof: Term, reason: String },
}

impl From<MatchError> for SynthesisError {
    fn from(e: MatchError) -> Self {
        match e {
            MatchError::Reduction(r) => SynthesisError::Reduction(r),
            other => SynthesisError::Matcher(other),
        }
    }
}

impl From<GammaError> for SynthesisError {
    fn from(e: GammaError) -> Self {
        match e {
            GammaError::Reduction(r) => SynthesisError::Reduction(r),
            other => SynthesisError::Context(other),
        }
    }
}

/// A partially instantiated search state: the quantified, possibly
/// constrained context and the bindings made so far.
#[derive(Debug, Clone)]
pub struct Branch {
    pub context: Context,
    pub bindings: Vec<(Name, Term)>,
}

impl Branch {
    fn bind(&self, hole: &Name, value: &Term) -> Result<Branch, GammaError> {
        let context = instantiate(&self.context, hole, value)?;
        let mut bindings = self.bindings.clone();
        bindings.push((hole.clone(), value.clone()));
        Ok(Branch { context, bindings })
    }

    fn holes(&self) -> Vec<(Name, Term)> {
        self.context.existentials().map(|(n, t)| (n.clone(), t.clone())).collect()
    }

    fn without_equations(&self) -> Branch {
        let context = self.context.entries().iter().filter(|e| !matches!(e, ContextEntry::Equation { .. })).cloned().collect();
        Branch { context, bindings: self.bindings.clone() }
    }
}

/// The state produced for one `(i, w)` pair.
#[derive(Debug, Clone)]
pub struct Attempt {
    /// `[x1..xi](w (h1 x1..xi)..(hq x1..xi))`.
    pub skeleton: Term,
    pub branch: Branch,
    /// Holes whose parameter type in `w`'s type has order above two.
    pub eager: Vec<Name>,
}

/// Builds and applies the γ extension for head `w` under the first `i` goal
/// binders. `None` when γ is ill typed.
pub fn attempt_head(
    ctx: &Context,
    goal: &GoalDecomposition,
    i: usize,
    w: &Name,
    supply: &mut NameSupply,
) -> Result<Option<Attempt>, SynthesisError> {
    let w_type = match goal.binders[..i].iter().find(|(n, _)| n == w) {
        Some((_, t)) => t.clone(),
        None => ctx.type_of(w).cloned().ok_or_else(|| SynthesisError::InvalidRequest(format!("unknown head `{w}`")))?,
    };
    let variable = Name::new(GOAL_HOLE);
    let triple = match build_gamma(&variable, goal, i, w, &w_type, ctx, supply) {
        Ok(t) => t,
        Err(GammaError::IllTypedHole { .. }) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let quantified = ctx.with(ContextEntry::Existential { name: variable, ty: goal.recompose() });
    let context = apply_substitution(&quantified, &triple)?;
    let curried = curry_type(&w_type, ctx)?;
    let mut eager = Vec::new();
    for (h, (_, param)) in triple.holes().zip(&curried.params) {
        if order(param, ctx)? > 2 {
            eager.push(h.clone());
        }
    }
    Ok(Some(Attempt { skeleton: triple.body, branch: Branch { context, bindings: Vec::new() }, eager }))
}

fn display_hole(h: &Name) -> &str {
    h.strip_prefix('?').unwrap_or(h)
}

struct Search<'a> {
    req: &'a SynthesisRequest,
    goal: GoalDecomposition,
    fuel: Fuel,
    trace: Vec<String>,
}

impl Search<'_> {
    fn log(&mut self, depth: usize, line: impl FnOnce() -> String) {
        if self.req.trace {
            self.trace.push(format!("{}{}", "  ".repeat(depth), line()));
        }
    }

    fn nf(&mut self, t: &Term) -> Result<Term, ReductionError> {
        normalize_with(t, &self.req.context, &mut self.fuel)
    }

    /// Candidate heads for prefix `i`: binders `xi..x1`, then the allowed
    /// constants from most recent to oldest.
    fn heads(&mut self, i: usize) -> Result<Vec<Name>, SynthesisError> {
        let mut out: Vec<(Name, Term)> = self.goal.binders[..i].iter().rev().cloned().collect();
        out.extend(
            self.req
                .context
                .constants_recent_first()
                .filter(|(n, _)| self.req.allows(n))
                .map(|(n, t)| (n.clone(), t.clone())),
        );
        let head = self.nf(&self.goal.head.clone())?;
        let mut names = Vec::with_capacity(out.len());
        for (n, t) in out {
            if let Term::Sort(s) = head {
                if self.nf(&t)? != Term::Sort(s) {
                    continue;
                }
            }
            names.push(n);
        }
        Ok(names)
    }

    /// Instantiates `hole` by `value` once the accounting equation between
    /// the two types has been solved; one branch per matcher solution.
    fn account(&mut self, branch: &Branch, hole: &Name, value: &Term, value_type: &Term) -> Result<Vec<Branch>, SynthesisError> {
        self.fuel.tick()?;
        let hole_type = branch.context.type_of(hole).cloned().expect("hole is declared");
        let problem = MatchProblem {
            context: branch.context.clone(),
            existentials: branch.holes().into_iter().map(|(n, _)| n).filter(|n| n != hole).collect(),
            equations: vec![(hole_type, value_type.clone())],
        };
        let opts = SolveOptions { limit: self.req.max_solutions, trace: false };
        let report = solve_with(&problem, opts, &mut self.fuel)?;
        let mut out = Vec::with_capacity(report.solutions.len());
        for sol in report.solutions {
            let mut b = branch.bind(hole, value)?;
            for (h, t) in &sol.bindings {
                b = b.bind(h, t)?;
            }
            out.push(b);
        }
        Ok(out)
    }

    /// Projections `[x1..xi]xm` onto the goal binders a hole abstracts.
    fn binder_projections(&self, i: usize) -> Vec<(Term, Term)> {
        let xs = &self.goal.binders[..i];
        (0..i)
            .rev()
            .map(|m| (Term::lams(xs, Term::Free(xs[m].0.clone())), Term::pis(xs, xs[m].1.clone())))
            .collect()
    }

    fn constants(&self) -> Vec<(Term, Term)> {
        self.req
            .context
            .constants_recent_first()
            .filter(|(n, _)| self.req.allows(n))
            .map(|(n, t)| (Term::Free(n.clone()), t.clone()))
            .collect()
    }

    fn phase_eager(&mut self, branch: Branch, eager: &[Name], i: usize, depth: usize) -> Result<Vec<Branch>, SynthesisError> {
        let mut frontier = vec![branch];
        for h in eager {
            let mut next = Vec::new();
            for b in &frontier {
                if !b.context.is_existential(h) {
                    next.push(b.clone());
                    continue;
                }
                let mut cands = self.binder_projections(i);
                cands.extend(self.constants());
                for (value, ty) in cands {
                    let found = self.account(b, h, &value, &ty)?;
                    if !found.is_empty() {
                        self.log(depth, || format!("eager {} := {value}", display_hole(h)));
                    }
                    next.extend(found);
                }
            }
            frontier = next;
        }
        Ok(frontier)
    }

    fn phase_equation(&mut self, branch: &Branch, depth: usize) -> Result<Vec<Branch>, SynthesisError> {
        let Some((lhs, rhs)) = branch.context.equations().next().map(|(l, r)| (l.clone(), r.clone())) else {
            return Ok(vec![branch.clone()]);
        };
        let problem = MatchProblem {
            context: branch.context.clone(),
            existentials: branch.holes().into_iter().map(|(n, _)| n).collect(),
            equations: vec![(lhs, rhs)],
        };
        let opts = SolveOptions { limit: self.req.max_solutions, trace: false };
        let report = solve_with(&problem, opts, &mut self.fuel)?;
        self.log(depth, || format!("eq solved: {} solutions", report.solutions.len()));
        let mut out = Vec::with_capacity(report.solutions.len());
        for sol in report.solutions {
            let mut b = branch.without_equations();
            for (h, t) in &sol.bindings {
                b = b.bind(h, t)?;
            }
            out.push(b);
        }
        Ok(out)
    }

    /// Candidates for the last remaining hole: allowed constants, then
    /// projections over each prefix of the hole's product telescope.
    fn fill_candidates(&mut self, branch: &Branch, hole: &Name) -> Result<Vec<(Term, Term)>, SynthesisError> {
        let mut cands = self.constants();
        let ty = branch.context.type_of(hole).cloned().expect("hole is declared");
        if branch.holes().iter().any(|(h, _)| ty.mentions(h)) {
            return Ok(cands);
        }
        let mut t = normalize_with(&ty, &branch.context.existentials_as_universals(), &mut self.fuel)?;
        let mut zs: Vec<(Name, Term)> = Vec::new();
        while let Term::Prod(b, d, body) = &t {
            let z = cocv_kernel::fresh_name(b.name());
            let next = body.open(&z);
            zs.push((z, (**d).clone()));
            t = next;
        }
        // Full prefix first; shorter prefixes only help binders of product type.
        for k in (0..=zs.len()).rev() {
            let prefix = &zs[..k];
            for m in (0..k).rev() {
                if k < zs.len() && !matches!(zs[m].1, Term::Prod(..)) {
                    continue;
                }
                cands.push((Term::lams(prefix, Term::Free(zs[m].0.clone())), Term::pis(prefix, zs[m].1.clone())));
            }
        }
        Ok(cands)
    }

    /// Depth-first fill, last hole first. Returns the first complete proof.
    fn fill(&mut self, skeleton: &Term, branch: &Branch, depth: usize) -> Result<Option<Term>, SynthesisError> {
        self.fuel.tick()?;
        let Some((hole, _)) = branch.holes().pop() else {
            return self.finish(skeleton, branch, depth);
        };
        for (value, ty) in self.fill_candidates(branch, &hole)? {
            for b in self.account(branch, &hole, &value, &ty)? {
                self.log(depth, || format!("fill {} := {value}", display_hole(&hole)));
                if let Some(proof) = self.fill(skeleton, &b, depth + 1)? {
                    return Ok(Some(proof));
                }
            }
        }
        Ok(None)
    }

    fn finish(&mut self, skeleton: &Term, branch: &Branch, depth: usize) -> Result<Option<Term>, SynthesisError> {
        let mut proof = skeleton.clone();
        while branch.bindings.iter().any(|(n, _)| proof.mentions(n)) {
            self.fuel.tick()?;
            proof = proof.subst_all(&branch.bindings);
        }
        let proof = normalize_beta(&proof)?;
        if let Some(name) = proof.free_names().into_iter().find(|n| n.starts_with('?')) {
            return Err(SynthesisError::InvalidRequest(format!("hole `{name}` left in proof")));
        }
        if let Some(c) = premise_violation(&self.req.context, &proof, self.req.premises.as_deref()) {
            self.log(depth, || format!("reject {proof}: `{c}` is not a premise"));
            return Ok(None);
        }
        check_type(&self.req.context, &proof, &self.req.goal)
            .map_err(|e| SynthesisError::Unsound { proof: proof.clone(), reason: e.to_string() })?;
        Ok(Some(proof))
    }

    fn run(&mut self) -> Result<Option<Term>, SynthesisError> {
        let mut supply = NameSupply::new("h");
        let n = self.goal.arity();
        for i in (0..=n).rev() {
            for w in self.heads(i)? {
                self.fuel.tick()?;
                self.log(0, || format!("try w={w} i={i}"));
                let Some(attempt) = attempt_head(&self.req.context, &self.goal, i, &w, &mut supply)? else {
                    continue;
                };
                for b in self.phase_eager(attempt.branch, &attempt.eager, i, 1)? {
                    for b in self.phase_equation(&b, 1)? {
                        if let Some(proof) = self.fill(&attempt.skeleton, &b, 1)? {
                            self.log(0, || format!("FOUND: {proof}"));
                            return Ok(Some(proof));
                        }
                    }
                }
            }
        }
        Ok(None)
    }
}

/// The first proof-level constant of `ctx` used in a proof position of
/// `proof` without being among the premises. Binder domains and arguments
/// that are types or type families are not proof positions.
pub fn premise_violation(ctx: &Context, proof: &Term, premises: Option<&[Name]>) -> Option<Name> {
    let premises = premises?;
    let mut used = Vec::new();
    collect_proof_positions(&mut ctx.clone(), proof, &mut used);
    used.into_iter().find(|c| {
        !premises.contains(c) && ctx.type_of(c).is_some_and(|ty| matches!(infer_sort(ctx, ty), Ok(Sort::Prop)))
    })
}

fn is_type_level(ctx: &Context, t: &Term) -> bool {
    let Ok(ty) = infer_type(ctx, t) else { return false };
    let Ok(mut ty) = cocv_kernel::normalize(&ty, ctx) else { return false };
    while let Term::Prod(b, _, body) = &ty {
        ty = body.open(&cocv_kernel::fresh_name(b.name()));
    }
    ty.is_sort()
}

fn collect_proof_positions(ctx: &mut Context, t: &Term, out: &mut Vec<Name>) {
    match t {
        Term::Free(n) => {
            if !out.contains(n) {
                out.push(n.clone());
            }
        }
        Term::App(..) => {
            let (head, args) = t.spine();
            collect_proof_positions(ctx, head, out);
            for a in args {
                if !is_type_level(ctx, a) {
                    collect_proof_positions(ctx, a, out);
                }
            }
        }
        Term::Lam(b, d, body) => {
            let x = cocv_kernel::fresh_name(b.name());
            let mut inner = ctx.with(ContextEntry::Universal { name: x.clone(), ty: (**d).clone() });
            collect_proof_positions(&mut inner, &body.open(&x), out);
        }
        Term::Prod(..) | Term::Sort(_) | Term::Bound(_) => {}
    }
}

fn validate(req: &SynthesisRequest) -> Result<(), SynthesisError> {
    if !req.context.is_plain() {
        return Err(SynthesisError::InvalidRequest("context has holes or equations".into()));
    }
    infer_sort(&req.context, &req.goal)
        .map_err(|e| SynthesisError::InvalidRequest(format!("goal is not a type: {e}")))?;
    if let Some(p) = req.premises.iter().flatten().find(|p| !req.context.contains(p)) {
        return Err(SynthesisError::InvalidRequest(format!("unknown premise `{p}`")));
    }
    Ok(())
}

/// Searches for a proof of `req.goal`. Deterministic: equal requests give
/// equal outcomes and traces.
pub fn synthesize(req: &SynthesisRequest) -> SynthesisOutcome {
    if let Err(e) = validate(req) {
        return SynthesisOutcome::InternalError { reason: e.to_string(), trace: Vec::new() };
    }
    let goal = match split_goal(&req.goal, &req.context) {
        Ok(g) => g,
        Err(e) => return SynthesisOutcome::InternalError { reason: e.to_string(), trace: Vec::new() },
    };
    let mut search = Search { req, goal, fuel: Fuel::new(req.fuel), trace: Vec::new() };
    match search.run() {
        Ok(Some(proof)) => SynthesisOutcome::Found { proof, trace: search.trace },
        Ok(None) => SynthesisOutcome::NotFound { trace: search.trace },
        Err(e) => SynthesisOutcome::InternalError { reason: e.to_string(), trace: search.trace },
    }
}
