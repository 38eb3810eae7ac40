//! Independent jobs over many inputs. Results keep input order in both
//! modes, and each job is itself sequential, so the two modes agree.

use cocv_kernel::Fuel;

use crate::matcher::{solve_with, MatchError, MatchProblem, MatchSolution, SolveOptions};
use crate::synth::{synthesize, SynthesisOutcome, SynthesisRequest};
use crate::vernacular::{check_script, CheckConfig, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

pub fn check_scripts<S: AsRef<str> + Sync>(exec: Exec, sources: &[S], config: &CheckConfig) -> Vec<Report> {
    map(exec, sources, |s| check_script(s.as_ref(), config))
}

pub fn synthesize_all(exec: Exec, requests: &[SynthesisRequest]) -> Vec<SynthesisOutcome> {
    map(exec, requests, synthesize)
}

pub fn solve_all(exec: Exec, problems: &[MatchProblem], limit: usize) -> Vec<Result<Vec<MatchSolution>, MatchError>> {
    map(exec, problems, |p| {
        solve_with(p, SolveOptions { limit, trace: false }, &mut Fuel::default()).map(|r| r.solutions)
    })
}
