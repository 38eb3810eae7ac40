//! The type checker: `Prop : Type`, products typed by the sort of their
//! codomain, abstractions typed by products, applications by instantiating
//! the product codomain after a conversion check on the argument.
//!
//! Only plain contexts (declarations and definitions) are accepted.

use thiserror::Error;

use crate::context::{Context, ContextEntry};
use crate::reduce::{conv, normalize, whnf, ReductionError};
use crate::term::{fresh_name, Name, Sort, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("`Type` has no type")]
    TypeHasNoType,
    #[error("non-product applied: `{fun}` has type `{fun_type}`")]
    NotAProduct { fun: Term, fun_type: Term },
    #[error("argument `{arg}` has type `{actual}` but `{expected}` was expected")]
    DomainMismatch { arg: Box<Term>, expected: Box<Term>, actual: Box<Term> },
    #[error("`{term}` is not a type (its type is `{ty}`)")]
    NotAType { term: Term, ty: Term },
    #[error("type mismatch: expected `{expected}`, found `{actual}`")]
    Mismatch { expected: Term, actual: Term },
    #[error("the kernel only accepts plain contexts; found hole or equation `{0}`")]
    NotPlain(String),
    #[error("`{0}` is already declared")]
    DuplicateName(Name),
    #[error("ill-formed term: dangling de Bruijn index {0}")]
    LooseIndex(usize),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("context entry {position}: {error}")]
pub struct ContextError {
    pub position: usize,
    pub error: TypeError,
}

/// Outcome of a successful inference.
#[derive(Debug, Clone)]
pub struct TypingReport {
    pub subject: Term,
    pub inferred_type: Term,
    pub context_snapshot: Context,
}

struct Checker<'a> {
    ctx: &'a Context,
    locals: Vec<(Name, Term)>,
}

impl Checker<'_> {
    fn lookup(&self, name: &Name) -> Result<Term, TypeError> {
        if let Some((_, ty)) = self.locals.iter().rev().find(|(n, _)| n == name) {
            return Ok(ty.clone());
        }
        self.ctx.type_of(name).cloned().ok_or_else(|| TypeError::UnboundVariable(name.clone()))
    }

    fn nf(&self, t: &Term) -> Result<Term, TypeError> {
        Ok(normalize(t, self.ctx)?)
    }

    fn sort_of(&mut self, t: &Term) -> Result<Sort, TypeError> {
        let ty = self.infer(t)?;
        match whnf(&ty, self.ctx)? {
            Term::Sort(s) => Ok(s),
            _ => Err(TypeError::NotAType { term: t.clone(), ty: self.nf(&ty)? }),
        }
    }

    fn with_local<R>(&mut self, name: Name, ty: Term, f: impl FnOnce(&mut Self) -> R) -> R {
        self.locals.push((name, ty));
        let r = f(self);
        self.locals.pop();
        r
    }

    fn infer(&mut self, t: &Term) -> Result<Term, TypeError> {
        match t {
            Term::Sort(Sort::Prop) => Ok(Term::ty()),
            Term::Sort(Sort::Type) => Err(TypeError::TypeHasNoType),
            Term::Bound(i) => Err(TypeError::LooseIndex(*i)),
            Term::Free(n) => self.lookup(n),
            Term::App(f, a) => {
                let fun_type = self.infer(f)?;
                match whnf(&fun_type, self.ctx)? {
                    Term::Prod(_, dom, cod) => {
                        let arg_type = self.infer(a)?;
                        if !conv(&arg_type, &dom, self.ctx)? {
                            return Err(TypeError::DomainMismatch {
                                arg: Box::new((**a).clone()),
                                expected: Box::new(self.nf(&dom)?),
                                actual: Box::new(self.nf(&arg_type)?),
                            });
                        }
                        Ok(cod.instantiate(a))
                    }
                    _ => Err(TypeError::NotAProduct { fun: (**f).clone(), fun_type: self.nf(&fun_type)? }),
                }
            }
            Term::Lam(b, dom, body) => {
                self.sort_of(dom)?;
                let x = fresh_name(b.name());
                let body_type = self.with_local(x.clone(), (**dom).clone(), |c| -> Result<Term, TypeError> {
                    let bt = c.infer(&body.open(&x))?;
                    // The product must itself be a type: rules out `[x:A]Prop`.
                    c.sort_of(&bt)?;
                    Ok(bt)
                })?;
                Ok(Term::pi(&x, (**dom).clone(), &body_type))
            }
            Term::Prod(b, dom, body) => {
                self.sort_of(dom)?;
                let x = fresh_name(b.name());
                let s = self.with_local(x.clone(), (**dom).clone(), |c| c.sort_of(&body.open(&x)))?;
                Ok(Term::Sort(s))
            }
        }
    }
}

fn require_plain(ctx: &Context) -> Result<(), TypeError> {
    match ctx.entries().iter().find(|e| !e.is_universal()) {
        None => Ok(()),
        Some(ContextEntry::Existential { name, .. }) => Err(TypeError::NotPlain(name.to_string())),
        Some(_) => Err(TypeError::NotPlain("equation".into())),
    }
}

/// Infers the type of `t` in the plain context `ctx`.
pub fn infer_type(ctx: &Context, t: &Term) -> Result<Term, TypeError> {
    require_plain(ctx)?;
    Checker { ctx, locals: Vec::new() }.infer(t)
}

pub fn infer_report(ctx: &Context, t: &Term) -> Result<TypingReport, TypeError> {
    let ty = infer_type(ctx, t)?;
    Ok(TypingReport { subject: t.clone(), inferred_type: ty, context_snapshot: ctx.clone() })
}

/// Succeeds iff `t` is well typed and its type is convertible to `ty`.
pub fn check_type(ctx: &Context, t: &Term, ty: &Term) -> Result<(), TypeError> {
    let actual = infer_type(ctx, t)?;
    if conv(&actual, ty, ctx)? {
        Ok(())
    } else {
        Err(TypeError::Mismatch { expected: normalize(ty, ctx)?, actual: normalize(&actual, ctx)? })
    }
}

/// Infers the sort of `t`, failing if `t` is not a type.
pub fn infer_sort(ctx: &Context, t: &Term) -> Result<Sort, TypeError> {
    require_plain(ctx)?;
    Checker { ctx, locals: Vec::new() }.sort_of(t)
}

/// Checks each entry against its prefix.
pub fn check_context(ctx: &Context) -> Result<(), ContextError> {
    let mut prefix = Context::new();
    for (position, entry) in ctx.entries().iter().enumerate() {
        let at = |error| ContextError { position, error };
        match entry {
            ContextEntry::Universal { name, ty } => {
                if prefix.contains(name) {
                    return Err(at(TypeError::DuplicateName(name.clone())));
                }
                infer_sort(&prefix, ty).map_err(at)?;
            }
            ContextEntry::Definition { name, ty, body } => {
                if prefix.contains(name) {
                    return Err(at(TypeError::DuplicateName(name.clone())));
                }
                infer_sort(&prefix, ty).map_err(at)?;
                check_type(&prefix, body, ty).map_err(at)?;
            }
            ContextEntry::Existential { name, .. } => return Err(at(TypeError::NotPlain(name.to_string()))),
            ContextEntry::Equation { .. } => return Err(at(TypeError::NotPlain("equation".into()))),
        }
        prefix.push(entry.clone());
    }
    Ok(())
}
