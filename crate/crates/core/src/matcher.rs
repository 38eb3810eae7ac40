//! Second-order pattern matching with closed right-hand sides.
//!
//! Huet-style search: rigid/rigid pairs are decomposed, flexible/rigid
//! pairs branch over projections and one imitation. Binders on both sides
//! are decomposed under a shared fresh local. Every residual produced by a
//! flexible step has a strictly smaller right-hand side, or the same
//! right-hand side and a strictly smaller left-hand side, so the search is
//! finite.

use std::fmt;

use cocv_kernel::reduce::{normalize_with, order};
use cocv_kernel::typing::{check_type, infer_sort};
use cocv_kernel::{fresh_name, normalize_beta, Context, Fuel, Name, ReductionError, Sort, Term};
use thiserror::Error;

use crate::context::NameSupply;

/// Opened binders and the remaining body.
type Telescope = (Vec<(Name, Term)>, Term);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("`{0}` is not a hole of the problem context")]
    UnknownExistential(Name),
    #[error("right-hand side `{0}` mentions a hole")]
    OpenRightHandSide(Term),
    #[error("internal error: solution violates equation `{lhs} = {rhs}`")]
    Unsound { lhs: Term, rhs: Term },
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

#[derive(Debug, Clone)]
pub struct MatchProblem {
    pub context: Context,
    pub existentials: Vec<Name>,
    pub equations: Vec<(Term, Term)>,
}

/// Bindings for the problem's holes. Holes the equations do not constrain
/// are absent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchSolution {
    pub bindings: Vec<(Name, Term)>,
}

impl MatchSolution {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.bindings.iter().find(|(n, _)| &**n == name).map(|(_, t)| t)
    }
}

impl fmt::Display for MatchSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (n, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n} := {t}")?;
        }
        f.write_str("}")
    }
}

/// An equation under locally bound variables opened as fresh names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub locals: Vec<(Name, Term)>,
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Equation { locals: Vec::new(), lhs, rhs }
    }

    fn same_scope(&self, lhs: Term, rhs: Term) -> Self {
        Equation { locals: self.locals.clone(), lhs, rhs }
    }

    fn is_local(&self, name: &Name) -> bool {
        self.locals.iter().any(|(n, _)| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("clash between `{lhs}` and `{rhs}`")]
pub struct Clash {
    pub lhs: Term,
    pub rhs: Term,
}

/// Decomposes a pair whose left head is not a hole. Both sides must be
/// normal.
pub fn step_rigid(eq: &Equation) -> Result<Vec<Equation>, Clash> {
    let clash = || Clash { lhs: eq.lhs.clone(), rhs: eq.rhs.clone() };
    match (&eq.lhs, &eq.rhs) {
        (Term::Sort(a), Term::Sort(b)) if a == b => Ok(Vec::new()),
        (Term::Lam(b, d1, body1), Term::Lam(_, d2, body2)) | (Term::Prod(b, d1, body1), Term::Prod(_, d2, body2))
            if std::mem::discriminant(&eq.lhs) == std::mem::discriminant(&eq.rhs) =>
        {
            let x = fresh_name(b.name());
            let mut inner = eq.locals.clone();
            inner.push((x.clone(), (**d2).clone()));
            Ok(vec![
                eq.same_scope((**d1).clone(), (**d2).clone()),
                Equation { locals: inner, lhs: body1.open(&x), rhs: body2.open(&x) },
            ])
        }
        (Term::Free(_) | Term::App(..), Term::Free(_) | Term::App(..)) => {
            let (h1, a1) = eq.lhs.spine();
            let (h2, a2) = eq.rhs.spine();
            if h1 != h2 || a1.len() != a2.len() || !matches!(h1, Term::Free(_)) {
                return Err(clash());
            }
            Ok(a1.into_iter().zip(a2).map(|(l, r)| eq.same_scope(l.clone(), r.clone())).collect())
        }
        _ => Err(clash()),
    }
}

/// A candidate binding for a hole together with the holes it introduces and
/// the equations left to solve.
#[derive(Debug, Clone)]
pub struct FlexCandidate {
    pub binding: Term,
    pub fresh: Vec<(Name, Term)>,
    pub residuals: Vec<Equation>,
    pub kind: CandidateKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    Projection(usize),
    Imitation,
}

/// Read-only view used by a flexible step.
pub struct FlexEnv<'a> {
    pub context: &'a Context,
    /// Unsolved holes and their current types.
    pub holes: &'a [(Name, Term)],
    pub supply: &'a mut NameSupply,
    pub fuel: &'a mut Fuel,
}

impl FlexEnv<'_> {
    fn nf(&mut self, t: &Term) -> Result<Term, ReductionError> {
        normalize_with(t, self.context, self.fuel)
    }

    fn is_hole(&self, n: &Name) -> bool {
        self.holes.iter().any(|(h, _)| h == n)
    }

    fn mentions_hole(&self, t: &Term) -> bool {
        self.holes.iter().any(|(h, _)| t.mentions(h))
    }

    fn fresh_hole(&mut self, ty: Term, fresh: &mut Vec<(Name, Term)>) -> Name {
        let h = self.supply.fresh();
        fresh.push((h.clone(), ty));
        h
    }

    /// Opens `count` products of `ty`, returning the binders and the rest.
    fn open_products(&mut self, ty: &Term, count: usize) -> Result<Option<Telescope>, ReductionError> {
        let mut t = self.nf(ty)?;
        let mut zs = Vec::with_capacity(count);
        for _ in 0..count {
            match &t {
                Term::Prod(b, d, body) => {
                    let z = fresh_name(b.name());
                    let next = body.open(&z);
                    zs.push((z, (**d).clone()));
                    t = next;
                }
                _ => return Ok(None),
            }
        }
        Ok(Some((zs, t)))
    }

    /// Fresh holes `H1..Hk` for the first `k` domains of `head_type`, each
    /// abstracted over `zs`; returns the applications `(Hj z...)`.
    fn telescope_holes(
        &mut self,
        head_type: &Term,
        count: usize,
        zs: &[(Name, Term)],
        fresh: &mut Vec<(Name, Term)>,
    ) -> Result<Option<Vec<Name>>, ReductionError> {
        let z_terms: Vec<Term> = zs.iter().map(|(n, _)| Term::Free(n.clone())).collect();
        let mut t = self.nf(head_type)?;
        let mut holes = Vec::with_capacity(count);
        for _ in 0..count {
            match &t {
                Term::Prod(_, d, body) => {
                    let h = self.fresh_hole(Term::pis(zs, (**d).clone()), fresh);
                    let app = Term::apps(Term::Free(h.clone()), z_terms.iter().cloned());
                    let next = self.nf(&body.instantiate(&app))?;
                    holes.push(h);
                    t = next;
                }
                _ => return Ok(None),
            }
        }
        Ok(Some(holes))
    }
}

/// Candidates for `F args = rhs` where `F : hole_type`. `rhs` must be
/// normal and free of holes.
pub fn step_flex(
    env: &mut FlexEnv<'_>,
    eq: &Equation,
    hole_type: &Term,
    args: &[Term],
) -> Result<Vec<FlexCandidate>, ReductionError> {
    let rhs = &eq.rhs;
    let k = args.len();
    let Some((zs, rest)) = env.open_products(hole_type, k)? else {
        return Ok(Vec::new());
    };
    let z_terms: Vec<Term> = zs.iter().map(|(n, _)| Term::Free(n.clone())).collect();
    let apply_args = |h: &Name, extra: &[Term]| {
        Term::apps(Term::apps(Term::Free(h.clone()), args.iter().cloned()), extra.iter().cloned())
    };
    let mut out = Vec::new();

    // Projections, leftmost binder first.
    for (m, arg) in args.iter().enumerate() {
        let (z, z_ty) = &zs[m];
        let typed_ok = if env.mentions_hole(z_ty) || env.mentions_hole(&rest) {
            true
        } else {
            env.nf(z_ty)? == env.nf(&rest)?
        };
        if typed_ok {
            out.push(FlexCandidate {
                binding: Term::lams(&zs, Term::Free(z.clone())),
                fresh: Vec::new(),
                residuals: vec![eq.same_scope(arg.clone(), rhs.clone())],
                kind: CandidateKind::Projection(m),
            });
        }
        // Projection onto a functional argument, applied to fresh holes.
        let (a_head, a_args) = arg.spine();
        let (r_head, r_args) = rhs.spine();
        let rigid = matches!(a_head, Term::Free(n) if !env.is_hole(n));
        if rigid && a_head == r_head && r_args.len() > a_args.len() {
            let extra = r_args.len() - a_args.len();
            let mut fresh = Vec::new();
            if let Some(ks) = env.telescope_holes(z_ty, extra, &zs, &mut fresh)? {
                let k_apps: Vec<Term> =
                    ks.iter().map(|h| Term::apps(Term::Free(h.clone()), z_terms.iter().cloned())).collect();
                let mut residuals: Vec<Equation> =
                    a_args.iter().zip(&r_args).map(|(l, r)| eq.same_scope((*l).clone(), (*r).clone())).collect();
                residuals.extend(
                    ks.iter().zip(&r_args[a_args.len()..]).map(|(h, r)| eq.same_scope(apply_args(h, &[]), (*r).clone())),
                );
                out.push(FlexCandidate {
                    binding: Term::lams(&zs, Term::apps(Term::Free(z.clone()), k_apps)),
                    fresh,
                    residuals,
                    kind: CandidateKind::Projection(m),
                });
            }
        }
    }

    // Imitation of the rigid head of the right-hand side.
    let mut fresh = Vec::new();
    let imitation = match rhs {
        Term::Sort(s) => Some((Term::lams(&zs, Term::Sort(*s)), Vec::new())),
        Term::Free(_) | Term::App(..) => {
            let (head, r_args) = rhs.spine();
            match head {
                Term::Free(c) if !eq.is_local(c) && !env.is_hole(c) => {
                    let c_type = env.context.type_of(c).cloned();
                    match c_type {
                        Some(c_type) => env.telescope_holes(&c_type, r_args.len(), &zs, &mut fresh)?.map(|hs| {
                            let apps = hs.iter().map(|h| Term::apps(Term::Free(h.clone()), z_terms.iter().cloned()));
                            let residuals =
                                hs.iter().zip(&r_args).map(|(h, r)| eq.same_scope(apply_args(h, &[]), (*r).clone())).collect();
                            (Term::lams(&zs, Term::apps(head.clone(), apps)), residuals)
                        }),
                        None => None,
                    }
                }
                _ => None,
            }
        }
        Term::Lam(b, dom, body) => match env.nf(&rest)? {
            Term::Prod(pb, r_dom, r_body) => {
                let y = fresh_name(pb.name());
                let mut binders = zs.clone();
                binders.push((y.clone(), (*r_dom).clone()));
                let hb = env.fresh_hole(Term::pis(&binders, r_body.open(&y)), &mut fresh);
                let mut inner_args = z_terms.clone();
                inner_args.push(Term::Free(y.clone()));
                let binding = Term::lams(&zs, Term::lam(&y, (*r_dom).clone(), &Term::apps(Term::Free(hb.clone()), inner_args)));
                let inst: Vec<(Name, Term)> = zs.iter().map(|(n, _)| n.clone()).zip(args.iter().cloned()).collect();
                let y2 = fresh_name(b.name());
                let mut locals = eq.locals.clone();
                locals.push((y2.clone(), (**dom).clone()));
                let residuals = vec![
                    eq.same_scope(r_dom.subst_all(&inst), (**dom).clone()),
                    Equation { locals, lhs: apply_args(&hb, &[Term::Free(y2.clone())]), rhs: body.open(&y2) },
                ];
                Some((binding, residuals))
            }
            _ => None,
        },
        Term::Prod(b, dom, body) => match env.nf(&rest)? {
            Term::Sort(body_sort) => {
                let mut typing = env.context.existentials_as_universals();
                for (n, t) in &eq.locals {
                    typing.push_universal(n.clone(), t.clone());
                }
                match infer_sort(&typing, dom) {
                    Ok(dom_sort) => {
                        let hd = env.fresh_hole(Term::pis(&zs, Term::Sort(dom_sort)), &mut fresh);
                        let hd_app = Term::apps(Term::Free(hd.clone()), z_terms.iter().cloned());
                        let y = fresh_name(b.name());
                        let mut binders = zs.clone();
                        binders.push((y.clone(), hd_app.clone()));
                        let he = env.fresh_hole(Term::pis(&binders, Term::Sort(body_sort)), &mut fresh);
                        let mut inner_args = z_terms.clone();
                        inner_args.push(Term::Free(y.clone()));
                        let binding = Term::lams(&zs, Term::pi(&y, hd_app, &Term::apps(Term::Free(he.clone()), inner_args)));
                        let y2 = fresh_name(b.name());
                        let mut locals = eq.locals.clone();
                        locals.push((y2.clone(), (**dom).clone()));
                        let residuals = vec![
                            eq.same_scope(apply_args(&hd, &[]), (**dom).clone()),
                            Equation { locals, lhs: apply_args(&he, &[Term::Free(y2.clone())]), rhs: body.open(&y2) },
                        ];
                        Some((binding, residuals))
                    }
                    Err(_) => None,
                }
            }
            _ => None,
        },
        Term::Bound(_) => None,
    };
    if let Some((binding, residuals)) = imitation {
        out.push(FlexCandidate { binding, fresh, residuals, kind: CandidateKind::Imitation });
    }

    if cfg!(debug_assertions) {
        let lhs_size: usize = 1 + args.iter().map(Term::size).sum::<usize>();
        for c in &out {
            for r in &c.residuals {
                let smaller_rhs = r.rhs.size() < rhs.size();
                let same_rhs_smaller_lhs = r.rhs == *rhs && r.lhs.size() < lhs_size;
                debug_assert!(smaller_rhs || same_rhs_smaller_lhs, "termination measure must decrease");
            }
        }
    }
    Ok(out)
}

/// The eligibility test: every hole has order at most two and, in every
/// left-hand side, holes are applied only to arguments of atomic type.
pub fn is_argument_restricted(p: &MatchProblem) -> Result<bool, MatchError> {
    let ctx = &p.context;
    for h in &p.existentials {
        let ty = ctx.type_of(h).ok_or_else(|| MatchError::UnknownExistential(h.clone()))?;
        if order(ty, ctx)? > 2 {
            return Ok(false);
        }
    }
    for (lhs, _) in &p.equations {
        let lhs = cocv_kernel::normalize(lhs, ctx)?;
        if !atomic_arguments(&lhs, p, ctx)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn atomic_arguments(t: &Term, p: &MatchProblem, ctx: &Context) -> Result<bool, MatchError> {
    match t {
        Term::Lam(b, d, body) | Term::Prod(b, d, body) => {
            let x = fresh_name(b.name());
            Ok(atomic_arguments(d, p, ctx)? && atomic_arguments(&body.open(&x), p, ctx)?)
        }
        Term::App(..) => {
            let (head, args) = t.spine();
            if let Term::Free(h) = head {
                if p.existentials.contains(h) {
                    let mut ty = cocv_kernel::normalize(ctx.type_of(h).expect("checked above"), ctx)?;
                    for a in &args {
                        match ty {
                            Term::Prod(_, d, body) => {
                                if matches!(cocv_kernel::normalize(&d, ctx)?, Term::Prod(..)) {
                                    return Ok(false);
                                }
                                ty = cocv_kernel::normalize(&body.instantiate(a), ctx)?;
                            }
                            _ => return Ok(false),
                        }
                    }
                }
            }
            for a in args {
                if !atomic_arguments(a, p, ctx)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Ok(true),
    }
}

/// Search options.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub limit: usize,
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { limit: 64, trace: false }
    }
}

#[derive(Clone)]
struct Node {
    holes: Vec<(Name, Term)>,
    bindings: Vec<(Name, Term)>,
    equations: Vec<Equation>,
}

struct Search<'a> {
    problem: &'a MatchProblem,
    opts: SolveOptions,
    fuel: &'a mut Fuel,
    supply: NameSupply,
    solutions: Vec<MatchSolution>,
    trace: Vec<String>,
}

fn resolve(t: &Term, bindings: &[(Name, Term)]) -> Term {
    let mut t = t.clone();
    while bindings.iter().any(|(n, _)| t.mentions(n)) {
        t = t.subst_all(bindings);
    }
    t
}

impl Search<'_> {
    fn run(&mut self, node: Node, depth: usize) -> Result<(), MatchError> {
        self.fuel.tick()?;
        if self.solutions.len() >= self.opts.limit {
            return Ok(());
        }
        let mut node = node;
        if node.equations.is_empty() {
            return self.record(&node);
        }
        let eq = node.equations.remove(0);
        let ctx = &self.problem.context;
        let lhs = normalize_with(&resolve(&eq.lhs, &node.bindings), ctx, self.fuel)?;
        let rhs = normalize_with(&eq.rhs, ctx, self.fuel)?;
        let eq = eq.same_scope(lhs, rhs);
        let flex_head = match eq.lhs.head() {
            Term::Free(n) => node.holes.iter().find(|(h, _)| h == n).cloned(),
            _ => None,
        };
        if !node.holes.iter().any(|(h, _)| eq.lhs.mentions(h)) {
            if eq.lhs == eq.rhs {
                return self.run(node, depth);
            }
            return Ok(());
        }
        match flex_head {
            None => match step_rigid(&eq) {
                Ok(sub) => {
                    let mut equations = sub;
                    equations.append(&mut node.equations);
                    node.equations = equations;
                    self.run(node, depth)
                }
                Err(_) => Ok(()),
            },
            Some((hole, hole_type)) => {
                let hole_type = resolve(&hole_type, &node.bindings);
                let args: Vec<Term> = eq.lhs.spine().1.into_iter().cloned().collect();
                let others: Vec<(Name, Term)> = node.holes.iter().filter(|(h, _)| *h != hole).cloned().collect();
                let candidates = {
                    let mut env = FlexEnv { context: ctx, holes: &node.holes, supply: &mut self.supply, fuel: self.fuel };
                    step_flex(&mut env, &eq, &hole_type, &args)?
                };
                for c in candidates {
                    if self.solutions.len() >= self.opts.limit {
                        break;
                    }
                    if self.opts.trace {
                        self.trace.push(format!("[{depth}] {hole} ← {} | residuals: {}", c.binding, c.residuals.len()));
                    }
                    let mut holes = others.clone();
                    holes.extend(c.fresh);
                    let mut bindings = node.bindings.clone();
                    bindings.push((hole.clone(), c.binding));
                    let mut equations = c.residuals;
                    equations.extend(node.equations.iter().cloned());
                    self.run(Node { holes, bindings, equations }, depth + 1)?;
                }
                Ok(())
            }
        }
    }

    fn record(&mut self, node: &Node) -> Result<(), MatchError> {
        let ctx = &self.problem.context;
        let mut bindings = Vec::new();
        for h in &self.problem.existentials {
            if let Some((_, b)) = node.bindings.iter().find(|(n, _)| n == h) {
                let value = normalize_beta(&resolve(b, &node.bindings))?;
                if node.holes.iter().any(|(f, _)| value.mentions(f)) {
                    return Ok(());
                }
                bindings.push((h.clone(), value));
            }
        }
        for (lhs, rhs) in &self.problem.equations {
            let l = cocv_kernel::normalize(&lhs.subst_all(&bindings), ctx)?;
            let r = cocv_kernel::normalize(rhs, ctx)?;
            if l != r {
                return Err(MatchError::Unsound { lhs: lhs.clone(), rhs: rhs.clone() });
            }
        }
        let typing = ctx.existentials_as_universals();
        for (h, value) in &bindings {
            let ty = ctx.type_of(h).expect("hole declared").subst_all(&bindings);
            if check_type(&typing, value, &ty).is_err() {
                return Ok(());
            }
        }
        let solution = MatchSolution { bindings };
        if !self.solutions.contains(&solution) {
            self.solutions.push(solution);
        }
        Ok(())
    }
}

/// Result of a search: solutions in discovery order and the optional trace.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    pub solutions: Vec<MatchSolution>,
    pub trace: Vec<String>,
}

/// Solves `p`, returning at most `opts.limit` solutions, projections before
/// imitations and leftmost projections first. Every returned binding is
/// β-normal and well typed at its hole's type.
pub fn solve_with(p: &MatchProblem, opts: SolveOptions, fuel: &mut Fuel) -> Result<SolveReport, MatchError> {
    let mut holes = Vec::new();
    for h in &p.existentials {
        if !p.context.is_existential(h) {
            return Err(MatchError::UnknownExistential(h.clone()));
        }
        holes.push((h.clone(), p.context.type_of(h).cloned().expect("existential has a type")));
    }
    for (_, rhs) in &p.equations {
        if p.existentials.iter().any(|h| rhs.mentions(h)) {
            return Err(MatchError::OpenRightHandSide(rhs.clone()));
        }
    }
    let equations = p.equations.iter().map(|(l, r)| Equation::new(l.clone(), r.clone())).collect();
    let mut search = Search { problem: p, opts, fuel, supply: NameSupply::new("m"), solutions: Vec::new(), trace: Vec::new() };
    search.run(Node { holes, bindings: Vec::new(), equations }, 0)?;
    Ok(SolveReport { solutions: search.solutions, trace: search.trace })
}

pub fn solve(p: &MatchProblem, limit: usize) -> Result<Vec<MatchSolution>, MatchError> {
    Ok(solve_with(p, SolveOptions { limit, trace: false }, &mut Fuel::default())?.solutions)
}

/// Sort of a type in a plain context, or `None` when it is not a type.
pub fn sort_of(ctx: &Context, t: &Term) -> Option<Sort> {
    infer_sort(ctx, t).ok()
}
