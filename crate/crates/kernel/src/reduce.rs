//! β/δ reduction, conversion and the order of a type.

use thiserror::Error;

use crate::context::Context;
use crate::term::{fresh_name, Term};

/// Step bound for a single normalization. Well-typed terms never reach it.
pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("internal error: reduction fuel exhausted after {0} steps")]
    FuelExhausted(u64),
}

/// A decrementing step budget.
#[derive(Debug, Clone)]
pub struct Fuel {
    initial: u64,
    remaining: u64,
}

impl Fuel {
    pub fn new(steps: u64) -> Self {
        Fuel { initial: steps, remaining: steps }
    }

    pub fn tick(&mut self) -> Result<(), ReductionError> {
        if self.remaining == 0 {
            return Err(ReductionError::FuelExhausted(self.initial));
        }
        self.remaining -= 1;
        Ok(())
    }

    pub fn used(&self) -> u64 {
        self.initial - self.remaining
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel::new(DEFAULT_FUEL)
    }
}

struct Reducer<'a> {
    ctx: &'a Context,
    delta: bool,
    fuel: &'a mut Fuel,
}

impl Reducer<'_> {
    fn whnf(&mut self, t: &Term) -> Result<Term, ReductionError> {
        let mut t = t.clone();
        loop {
            let (head, args) = t.spine();
            let next = match head {
                Term::Lam(_, _, body) if !args.is_empty() => {
                    let reduced = body.instantiate(args[0]);
                    Term::apps(reduced, args[1..].iter().map(|a| (*a).clone()))
                }
                Term::Free(n) if self.delta => match self.ctx.definition(n) {
                    Some(def) => Term::apps(def.clone(), args.iter().map(|a| (*a).clone())),
                    None => return Ok(t),
                },
                _ => return Ok(t),
            };
            self.fuel.tick()?;
            t = next;
        }
    }

    fn normalize(&mut self, t: &Term) -> Result<Term, ReductionError> {
        let t = self.whnf(t)?;
        Ok(match &t {
            Term::Lam(b, d, body) => {
                let d = self.normalize(d)?;
                let x = fresh_name(b.name());
                let body = self.normalize(&body.open(&x))?;
                Term::Lam(b.clone(), d.into(), body.close(&x).into())
            }
            Term::Prod(b, d, body) => {
                let d = self.normalize(d)?;
                let x = fresh_name(b.name());
                let body = self.normalize(&body.open(&x))?;
                Term::Prod(b.clone(), d.into(), body.close(&x).into())
            }
            Term::App(..) => {
                let (head, args) = t.spine();
                let mut out = head.clone();
                for a in args {
                    out = Term::app(out, self.normalize(a)?);
                }
                out
            }
            _ => t,
        })
    }
}

/// Weak head normal form under β and δ.
pub fn whnf(t: &Term, ctx: &Context) -> Result<Term, ReductionError> {
    Reducer { ctx, delta: true, fuel: &mut Fuel::default() }.whnf(t)
}

/// β/δ-normal form, unfolding the definitions of `ctx`.
pub fn normalize(t: &Term, ctx: &Context) -> Result<Term, ReductionError> {
    normalize_with(t, ctx, &mut Fuel::default())
}

pub fn normalize_with(t: &Term, ctx: &Context, fuel: &mut Fuel) -> Result<Term, ReductionError> {
    Reducer { ctx, delta: true, fuel }.normalize(t)
}

/// β-normal form; definitions stay folded.
pub fn normalize_beta(t: &Term) -> Result<Term, ReductionError> {
    let empty = Context::new();
    Reducer { ctx: &empty, delta: false, fuel: &mut Fuel::default() }.normalize(t)
}

/// Convertibility: equal β/δ-normal forms up to α.
pub fn conv(t: &Term, u: &Term, ctx: &Context) -> Result<bool, ReductionError> {
    if t == u {
        return Ok(true);
    }
    Ok(normalize(t, ctx)? == normalize(u, ctx)?)
}

/// Order of a type, measured on its normal form: atomic types have order 1
/// and `(x:A)B` has order `max(order(A) + 1, order(B))`.
pub fn order(t: &Term, ctx: &Context) -> Result<usize, ReductionError> {
    Ok(order_of_normal(&normalize(t, ctx)?))
}

pub fn order_of_normal(t: &Term) -> usize {
    match t {
        Term::Prod(_, d, b) => (order_of_normal(d) + 1).max(order_of_normal(b)),
        _ => 1,
    }
}
