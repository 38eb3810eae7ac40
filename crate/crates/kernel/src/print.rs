//! Printing terms back into the concrete syntax.

use std::collections::BTreeSet;
use std::fmt;

use crate::term::{Name, Term};

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Top,
    ArrowLeft,
    Arg,
}

struct Printer {
    free: BTreeSet<Name>,
    scope: Vec<Name>,
}

impl Printer {
    fn pick(&self, hint: &str) -> Name {
        let base = if hint.is_empty() || hint == "_" { "x" } else { hint };
        let mut candidate = base.to_string();
        while self.free.contains(candidate.as_str()) || self.scope.iter().any(|n| **n == *candidate) {
            candidate.push('\'');
        }
        Name::from(candidate)
    }

    fn write(&mut self, t: &Term, prec: Prec, out: &mut String) {
        match t {
            Term::Sort(s) => out.push_str(&s.to_string()),
            Term::Free(n) => out.push_str(n),
            Term::Bound(i) => match self.scope.len().checked_sub(i + 1) {
                Some(k) => out.push_str(&self.scope[k]),
                None => out.push_str(&format!("#{i}")),
            },
            Term::App(..) => {
                let (head, args) = t.spine();
                out.push('(');
                self.write(head, Prec::Arg, out);
                for a in args {
                    out.push(' ');
                    self.write(a, Prec::Arg, out);
                }
                out.push(')');
            }
            Term::Prod(b, d, body) if !body.has_loose(0) => {
                let wrap = prec > Prec::Top;
                if wrap {
                    out.push('(');
                }
                self.write(d, Prec::ArrowLeft, out);
                out.push_str("->");
                self.scope.push(Name::new("#unused"));
                self.write(body, Prec::Top, out);
                self.scope.pop();
                if wrap {
                    out.push(')');
                }
            }
            Term::Lam(b, d, body) | Term::Prod(b, d, body) => {
                let wrap = prec > Prec::Top;
                if wrap {
                    out.push('(');
                }
                let (open, close) = if matches!(t, Term::Lam(..)) { ('[', ']') } else { ('(', ')') };
                let name = self.pick(b.name());
                out.push(open);
                out.push_str(&name);
                out.push(':');
                self.write(d, Prec::Top, out);
                out.push(close);
                self.scope.push(name);
                self.write(body, Prec::Top, out);
                self.scope.pop();
                if wrap {
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Printer { free: self.free_names(), scope: Vec::new() };
        let mut out = String::new();
        p.write(self, Prec::Top, &mut out);
        f.write_str(&out)
    }
}
