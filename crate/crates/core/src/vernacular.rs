//! Proof scripts.
//!
//! ```text
//! Variable A,B:Prop.          Hypothesis f:A->B.
//! Axiom ax:(A:Prop)A.         Definition id : (A:Prop)A->A := [A:Prop][x:A]x.
//! Remark r.  ...  Statement A->B.  ...  Using f.
//! ```
//!
//! A `Remark` opens a frame. Its locals declared before the `Statement` are
//! abstracted when the frame closes; definitions (including completed
//! nested remarks) are substituted into the proof. `Using` runs the
//! synthesizer with the listed premises and closes the frame, adding the
//! generalized statement and its proof as a definition in the enclosing
//! scope.

use std::fmt;

use cocv_kernel::syntax::{tokenize, Parser, Pos, Token};
use cocv_kernel::typing::{check_context, check_type, infer_sort, infer_type};
use cocv_kernel::{normalize_beta, Context, ContextEntry, Name, ParseError, Term, TypeError, DEFAULT_FUEL};
use thiserror::Error;

use crate::synth::{synthesize, SynthesisOutcome, SynthesisRequest, DEFAULT_MAX_SOLUTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalKind {
    Variable,
    Hypothesis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    Local { kind: LocalKind, name: Name, ty: Term },
    Axiom { name: Name, ty: Term },
    Definition { name: Name, ty: Option<Term>, body: Term },
    Remark(Name),
    Statement(Term),
    Using(Vec<Name>),
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Local { kind: LocalKind::Variable, name, ty } => write!(f, "Variable {name}:{ty}."),
            Instruction::Local { kind: LocalKind::Hypothesis, name, ty } => write!(f, "Hypothesis {name}:{ty}."),
            Instruction::Axiom { name, ty } => write!(f, "Axiom {name}:{ty}."),
            Instruction::Definition { name, ty: Some(ty), body } => write!(f, "Definition {name} : {ty} := {body}."),
            Instruction::Definition { name, ty: None, body } => write!(f, "Definition {name} := {body}."),
            Instruction::Remark(name) => write!(f, "Remark {name}."),
            Instruction::Statement(ty) => write!(f, "Statement {ty}."),
            Instruction::Using(ps) => {
                f.write_str("Using")?;
                for (i, p) in ps.iter().enumerate() {
                    f.write_str(if i == 0 { " " } else { ", " })?;
                    f.write_str(p)?;
                }
                f.write_str(".")
            }
        }
    }
}

/// An instruction with the position of its keyword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Located {
    pub pos: Pos,
    pub instruction: Instruction,
}

fn keyword(p: &Parser<'_>) -> Option<&'static str> {
    const KEYWORDS: [&str; 7] = ["Variable", "Hypothesis", "Axiom", "Definition", "Remark", "Statement", "Using"];
    match p.peek() {
        Token::Ident(n) => KEYWORDS.iter().copied().find(|k| **n == **k),
        _ => None,
    }
}

/// Parses a whole script. `Variable A,B:Prop.` yields one instruction per
/// name, all at the keyword's position.
pub fn parse(source: &str) -> Result<Vec<Located>, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser::new(&toks);
    let mut out = Vec::new();
    while !p.at_eof() {
        let pos = p.position();
        let Some(kw) = keyword(&p) else {
            return Err(p.error(format!("expected an instruction, found {}", p.peek())));
        };
        p.advance();
        match kw {
            "Variable" | "Hypothesis" => {
                let kind = if kw == "Variable" { LocalKind::Variable } else { LocalKind::Hypothesis };
                let names = p.ident_list()?;
                p.expect(&Token::Colon)?;
                let ty = p.parse_term()?;
                for name in names {
                    out.push(Located { pos, instruction: Instruction::Local { kind, name, ty: ty.clone() } });
                }
            }
            "Axiom" => {
                let name = p.expect_ident()?;
                p.expect(&Token::Colon)?;
                let ty = p.parse_term()?;
                out.push(Located { pos, instruction: Instruction::Axiom { name, ty } });
            }
            "Definition" => {
                let name = p.expect_ident()?;
                let ty = if p.eat(&Token::Colon) { Some(p.parse_term()?) } else { None };
                p.expect(&Token::ColonEq)?;
                let body = p.parse_term()?;
                out.push(Located { pos, instruction: Instruction::Definition { name, ty, body } });
            }
            "Remark" => {
                let name = p.expect_ident()?;
                out.push(Located { pos, instruction: Instruction::Remark(name) });
            }
            "Statement" => {
                let ty = p.parse_term()?;
                out.push(Located { pos, instruction: Instruction::Statement(ty) });
            }
            _ => {
                let premises = if matches!(p.peek(), Token::Ident(_)) { p.ident_list()? } else { Vec::new() };
                out.push(Located { pos, instruction: Instruction::Using(premises) });
            }
        }
        p.expect(&Token::Dot)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Internal,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Internal => "internal error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("`{0}` is already declared")]
    AlreadyDeclared(Name),
    #[error("ill-typed declaration of `{name}`: {error}")]
    BadDeclaration { name: Name, error: TypeError },
    #[error("ill-typed definition of `{name}`: {error}")]
    BadDefinition { name: Name, error: TypeError },
    #[error("ill-formed statement: {0}")]
    BadStatement(TypeError),
    #[error("`Axiom {0}` inside a remark; axioms are global")]
    AxiomInRemark(Name),
    #[error("`Statement` outside a remark")]
    StatementOutsideRemark,
    #[error("remark `{0}` already has a statement")]
    StatementRepeated(Name),
    #[error("`{0}` declared after the statement of its remark")]
    LocalAfterStatement(Name),
    #[error("`Using` outside a remark")]
    UsingOutsideRemark,
    #[error("`Using` before any `Statement` in remark `{0}`")]
    UsingWithoutStatement(Name),
    #[error("unknown premise `{0}`")]
    UnknownPremise(Name),
    #[error("no proof of `{statement}` found using {premises}")]
    NotFound { statement: Term, premises: String },
    #[error("remark `{0}` is never closed")]
    UnclosedRemark(Name),
    #[error("synthesis failed: {0}")]
    SynthesisInternal(String),
    #[error("discharged proof of `{name}` fails the kernel check: {error}")]
    DischargeRejected { name: Name, error: TypeError },
    #[error("final context fails the kernel check: {0}")]
    FinalRecheck(String),
}

impl ScriptError {
    pub fn severity(&self) -> Severity {
        match self {
            ScriptError::SynthesisInternal(_) | ScriptError::DischargeRejected { .. } | ScriptError::FinalRecheck(_) => {
                Severity::Internal
            }
            _ => Severity::Error,
        }
    }
}

/// An error at the position of the offending instruction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {severity}: {error}", severity = .error.severity())]
pub struct CheckError {
    pub pos: Pos,
    pub error: ScriptError,
}

impl CheckError {
    pub fn severity(&self) -> Severity {
        self.error.severity()
    }
}

impl From<ParseError> for CheckError {
    fn from(e: ParseError) -> Self {
        CheckError { pos: Pos { line: e.line, col: e.col }, error: ScriptError::Syntax(e.message) }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    pub fuel: u64,
    pub max_solutions: usize,
    pub trace: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { fuel: DEFAULT_FUEL, max_solutions: DEFAULT_MAX_SOLUTIONS, trace: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemarkFrame {
    pub name: Name,
    pub pos: Pos,
    pub before: Vec<ContextEntry>,
    pub statement: Option<Term>,
    pub after: Vec<ContextEntry>,
}

impl RemarkFrame {
    fn locals(&self) -> impl Iterator<Item = &ContextEntry> {
        self.before.iter().chain(&self.after)
    }
}

/// A constant produced by closing a remark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvedConstant {
    pub name: Name,
    pub ty: Term,
    pub proof: Term,
    /// Position of the `Remark`.
    pub pos: Pos,
}

#[derive(Debug, Clone, Default)]
pub struct CheckerState {
    pub global: Context,
    pub frames: Vec<RemarkFrame>,
}

impl CheckerState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Global context followed by every open frame's locals.
    pub fn visible(&self) -> Context {
        let mut c = self.global.clone();
        for f in &self.frames {
            c.extend(f.locals().cloned());
        }
        c
    }

    fn add(&mut self, entry: ContextEntry) {
        match self.frames.last_mut() {
            None => self.global.push(entry),
            Some(f) if f.statement.is_none() => f.before.push(entry),
            Some(f) => f.after.push(entry),
        }
    }

    fn fresh_name(&self, name: &Name) -> Result<(), ScriptError> {
        if self.visible().contains(name) {
            Err(ScriptError::AlreadyDeclared(name.clone()))
        } else {
            Ok(())
        }
    }

    /// Executes one instruction. Closing a remark returns its constant.
    pub fn exec(
        &mut self,
        instr: &Instruction,
        config: &CheckConfig,
        trace: &mut Vec<String>,
    ) -> Result<Option<ProvedConstant>, ScriptError> {
        match instr {
            Instruction::Local { name, ty, .. } => {
                if self.frames.last().is_some_and(|f| f.statement.is_some()) {
                    return Err(ScriptError::LocalAfterStatement(name.clone()));
                }
                self.declare(name, ty)?;
                self.add(ContextEntry::Universal { name: name.clone(), ty: ty.clone() });
            }
            Instruction::Axiom { name, ty } => {
                if !self.frames.is_empty() {
                    return Err(ScriptError::AxiomInRemark(name.clone()));
                }
                self.declare(name, ty)?;
                self.global.push_universal(name.clone(), ty.clone());
            }
            Instruction::Definition { name, ty, body } => {
                self.fresh_name(name)?;
                let ctx = self.visible();
                let bad = |error| ScriptError::BadDefinition { name: name.clone(), error };
                let ty = match ty {
                    Some(ty) => {
                        infer_sort(&ctx, ty).map_err(bad)?;
                        check_type(&ctx, body, ty).map_err(bad)?;
                        ty.clone()
                    }
                    None => {
                        let ty = infer_type(&ctx, body).map_err(bad)?;
                        infer_sort(&ctx, &ty).map_err(bad)?;
                        ty
                    }
                };
                self.add(ContextEntry::Definition { name: name.clone(), ty, body: body.clone() });
            }
            Instruction::Remark(name) => {
                self.fresh_name(name)?;
                self.frames.push(RemarkFrame {
                    name: name.clone(),
                    pos: Pos::default(),
                    before: Vec::new(),
                    statement: None,
                    after: Vec::new(),
                });
            }
            Instruction::Statement(ty) => {
                let ctx = self.visible();
                let frame = self.frames.last_mut().ok_or(ScriptError::StatementOutsideRemark)?;
                if frame.statement.is_some() {
                    return Err(ScriptError::StatementRepeated(frame.name.clone()));
                }
                infer_sort(&ctx, ty).map_err(ScriptError::BadStatement)?;
                frame.statement = Some(ty.clone());
            }
            Instruction::Using(premises) => return self.check_using(premises, config, trace).map(Some),
        }
        Ok(None)
    }

    fn declare(&self, name: &Name, ty: &Term) -> Result<(), ScriptError> {
        self.fresh_name(name)?;
        infer_sort(&self.visible(), ty).map_err(|error| ScriptError::BadDeclaration { name: name.clone(), error })?;
        Ok(())
    }

    /// Synthesizes a proof of the innermost statement, discharges the
    /// frame, and adds the generalized result to the enclosing scope.
    pub fn check_using(
        &mut self,
        premises: &[Name],
        config: &CheckConfig,
        trace: &mut Vec<String>,
    ) -> Result<ProvedConstant, ScriptError> {
        let frame = self.frames.last().ok_or(ScriptError::UsingOutsideRemark)?;
        let statement = frame.statement.clone().ok_or_else(|| ScriptError::UsingWithoutStatement(frame.name.clone()))?;
        let ctx = self.visible();
        if let Some(p) = premises.iter().find(|p| !ctx.contains(p)) {
            return Err(ScriptError::UnknownPremise(p.clone()));
        }
        let req = SynthesisRequest {
            context: ctx,
            goal: statement.clone(),
            premises: Some(premises.to_vec()),
            fuel: config.fuel,
            max_solutions: config.max_solutions,
            trace: config.trace,
        };
        let outcome = synthesize(&req);
        if config.trace {
            trace.push(format!("remark {}: Statement {statement}.", frame.name));
            trace.extend(outcome.trace().iter().map(|l| format!("  {l}")));
        }
        let proof = match outcome {
            SynthesisOutcome::Found { proof, .. } => proof,
            SynthesisOutcome::NotFound { .. } => {
                let premises = if premises.is_empty() {
                    "no premises".to_string()
                } else {
                    premises.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
                };
                return Err(ScriptError::NotFound { statement, premises });
            }
            SynthesisOutcome::InternalError { reason, .. } => return Err(ScriptError::SynthesisInternal(reason)),
        };

        let frame = self.frames.pop().expect("frame checked above");
        let (ty, proof) = discharge(&frame, statement, proof).map_err(ScriptError::SynthesisInternal)?;
        let enclosing = self.visible();
        check_type(&enclosing, &proof, &ty)
            .map_err(|error| ScriptError::DischargeRejected { name: frame.name.clone(), error })?;
        self.add(ContextEntry::Definition { name: frame.name.clone(), ty: ty.clone(), body: proof.clone() });
        Ok(ProvedConstant { name: frame.name, ty, proof, pos: frame.pos })
    }
}

/// Substitutes the frame's definitions and abstracts its variables, last
/// local first, so binders appear in declaration order.
pub fn discharge(frame: &RemarkFrame, statement: Term, proof: Term) -> Result<(Term, Term), String> {
    let (mut ty, mut proof) = (statement, proof);
    for entry in frame.locals().collect::<Vec<_>>().into_iter().rev() {
        match entry {
            ContextEntry::Definition { name, body, .. } => {
                ty = ty.subst(name, body);
                proof = proof.subst(name, body);
            }
            ContextEntry::Universal { name, ty: u } => {
                ty = Term::pi(name, u.clone(), &ty);
                proof = Term::lam(name, u.clone(), &proof);
            }
            other => return Err(format!("unexpected local entry {other:?}")),
        }
    }
    let proof = normalize_beta(&proof).map_err(|e| e.to_string())?;
    Ok((ty, proof))
}

/// Outcome of checking a script: the constants proved before the first
/// failure, the search trace, and that failure if any.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub constants: Vec<ProvedConstant>,
    pub trace: Vec<String>,
    pub error: Option<CheckError>,
    pub context: Context,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

pub fn check_script(source: &str, config: &CheckConfig) -> Report {
    let mut report = Report::default();
    let script = match parse(source) {
        Ok(s) => s,
        Err(e) => {
            report.error = Some(e.into());
            return report;
        }
    };
    let mut state = CheckerState::new();
    for located in &script {
        match state.exec(&located.instruction, config, &mut report.trace) {
            Ok(Some(c)) => report.constants.push(c),
            Ok(None) => {
                if let (Instruction::Remark(_), Some(f)) = (&located.instruction, state.frames.last_mut()) {
                    f.pos = located.pos;
                }
            }
            Err(error) => {
                report.error = Some(CheckError { pos: located.pos, error });
                report.context = state.global;
                return report;
            }
        }
    }
    if let Some(f) = state.frames.last() {
        report.error = Some(CheckError { pos: f.pos, error: ScriptError::UnclosedRemark(f.name.clone()) });
    } else if let Err(e) = check_context(&state.global) {
        let pos = script.last().map(|l| l.pos).unwrap_or_default();
        report.error = Some(CheckError { pos, error: ScriptError::FinalRecheck(e.to_string()) });
    }
    report.context = state.global;
    report
}
