//! Trusted base for the `cocv` proof checker.
//!
//! This crate holds the term language of the Calculus of Constructions
//! (locally nameless: bound variables are de Bruijn indices, context
//! variables are names), β/δ reduction, contexts, the concrete syntax
//! shared with the vernacular, and the type checker that rechecks every
//! synthesized proof. It has no dependency on the search machinery.

pub mod context;
pub mod print;
pub mod reduce;
pub mod syntax;
pub mod term;
pub mod typing;

pub use context::{Context, ContextEntry};
pub use reduce::{conv, normalize, normalize_beta, order, whnf, Fuel, ReductionError, DEFAULT_FUEL};
pub use syntax::{parse_term, ParseError};
pub use term::{fresh_name, Binder, Name, Sort, Term};
pub use typing::{check_context, check_type, infer_type, ContextError, TypeError, TypingReport};
