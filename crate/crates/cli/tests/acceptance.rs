//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cocv_core::batch::{synthesize_all, Exec};
use cocv_core::matcher::{is_argument_restricted, solve, MatchProblem};
use cocv_core::synth::{premise_violation, SynthesisOutcome, SynthesisRequest};
use cocv_core::vernacular::{check_script, parse, CheckConfig, Instruction};
use cocv_kernel::{check_type, conv, parse_term, Context, ContextEntry, Name, Term};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn p(s: &str) -> Term {
    parse_term(s).unwrap_or_else(|e| panic!("cannot parse `{s}`: {e}"))
}

// ---------------------------------------------------------------- corpus

struct Case {
    name: String,
    request: SynthesisRequest,
    expect_found: bool,
}

fn load_corpus() -> Vec<Case> {
    let text = std::fs::read_to_string(fixtures().join("corpus.txt")).expect("corpus");
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let cols: Vec<&str> = line.split('|').map(str::trim).collect();
        assert_eq!(cols.len(), 5, "bad corpus line: {line}");
        let mut ctx = Context::new();
        for decl in cols[1].split(';').map(str::trim) {
            let (name, rest) = decl.split_once(':').expect("declaration");
            match rest.split_once(":=") {
                Some((ty, body)) => ctx.push_definition(name.trim(), p(ty), p(body)),
                None => ctx.push_universal(name.trim(), p(rest)),
            }
        }
        let mut request = SynthesisRequest::new(ctx, p(cols[2]));
        request.premises = match cols[3] {
            "*" => None,
            "-" => Some(Vec::new()),
            ps => Some(ps.split(',').map(|s| Name::new(s.trim())).collect()),
        };
        out.push(Case { name: cols[0].to_string(), request, expect_found: cols[4] == "found" });
    }
    out
}

/// Kernel recheck and premise scan of a found proof.
fn audit(req: &SynthesisRequest, out: &SynthesisOutcome) -> Result<(), String> {
    match out {
        SynthesisOutcome::Found { proof, .. } => {
            check_type(&req.context, proof, &req.goal).map_err(|e| format!("`{proof}` rejected: {e}"))?;
            if let Some(c) = premise_violation(&req.context, proof, req.premises.as_deref()) {
                return Err(format!("`{proof}` uses `{c}` outside the premises"));
            }
            Ok(())
        }
        SynthesisOutcome::NotFound { .. } => Ok(()),
        SynthesisOutcome::InternalError { reason, .. } => Err(format!("internal error: {reason}")),
    }
}

fn criterion_soundness() -> Verdict {
    let corpus = load_corpus();
    if corpus.len() < 30 {
        return Err(format!("corpus has only {} requests", corpus.len()));
    }
    let start = Instant::now();
    let requests: Vec<SynthesisRequest> = corpus.iter().map(|c| c.request.clone()).collect();
    let outcomes = synthesize_all(Exec::Parallel, &requests);
    let elapsed = start.elapsed();
    let mut errors = Vec::new();
    let mut found = 0;
    for (case, out) in corpus.iter().zip(&outcomes) {
        if let Err(e) = audit(&case.request, out) {
            errors.push(format!("{}: {e}", case.name));
        }
        if out.is_found() {
            found += 1;
        }
        if out.is_found() != case.expect_found {
            errors.push(format!("{}: expected found={}, got {:?}", case.name, case.expect_found, out.proof()));
        }
    }
    if elapsed > Duration::from_secs(10) {
        errors.push(format!("took {elapsed:?}"));
    }
    if errors.is_empty() {
        Ok(format!("{} requests, {found} proofs rechecked, {elapsed:.2?}", corpus.len()))
    } else {
        Err(errors.join("; "))
    }
}

// ------------------------------------------------------- random requests

const ATOMS: [&str; 3] = ["A", "B", "C"];

fn random_type(rng: &mut ChaCha8Rng, atoms: &[&str], pred: bool, elems: &[String], depth: usize) -> Term {
    let leaf = |rng: &mut ChaCha8Rng| {
        if pred && !elems.is_empty() && rng.random_bool(0.3) {
            Term::app(Term::var("P"), Term::var(elems.choose(rng).unwrap().as_str()))
        } else {
            Term::var(*atoms.choose(rng).unwrap())
        }
    };
    if depth <= 1 || rng.random_bool(0.3) {
        return leaf(rng);
    }
    if pred && rng.random_bool(0.15) {
        let x = Name::new("x");
        return Term::pi(&x, Term::var("A"), &Term::app(Term::var("P"), Term::Free(x.clone())));
    }
    let dom = random_type(rng, atoms, pred, elems, depth - 1);
    let cod = random_type(rng, atoms, pred, elems, depth - 1);
    Term::arrow(dom, cod)
}

fn random_request(rng: &mut ChaCha8Rng) -> SynthesisRequest {
    let n_atoms = rng.random_range(1..=3);
    let atoms = &ATOMS[..n_atoms];
    let mut ctx = Context::new();
    for a in atoms {
        ctx.push_universal(*a, Term::prop());
    }
    let pred = rng.random_bool(0.3);
    let mut elems = Vec::new();
    if pred {
        ctx.push_universal("P", p("(x:A)Prop"));
        for k in 0..rng.random_range(1..=2) {
            let e = format!("a{k}");
            ctx.push_universal(e.as_str(), Term::var("A"));
            elems.push(e);
        }
    }
    let mut hyps = Vec::new();
    while ctx.len() < 8 && rng.random_bool(0.8) {
        let h = format!("h{}", hyps.len());
        let depth = rng.random_range(1..=3);
        let ty = random_type(rng, atoms, pred, &elems, depth);
        ctx.push_universal(h.as_str(), ty);
        hyps.push(Name::new(h));
    }
    let depth = rng.random_range(1..=4);
    let goal = random_type(rng, atoms, pred, &elems, depth);
    let mut req = SynthesisRequest::new(ctx, goal);
    if rng.random_bool(0.5) {
        let mut premises: Vec<Name> = hyps.into_iter().filter(|_| rng.random_bool(0.7)).collect();
        premises.extend(elems.iter().map(|e| Name::new(e.as_str())));
        req.premises = Some(premises);
    }
    req
}

fn criterion_termination() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0c0);
    let mut requests: Vec<SynthesisRequest> = load_corpus().into_iter().map(|c| c.request).collect();
    let corpus_len = requests.len();
    requests.extend((0..200).map(|_| random_request(&mut rng)));
    let start = Instant::now();
    let outcomes = synthesize_all(Exec::Parallel, &requests);
    let elapsed = start.elapsed();
    let mut errors = Vec::new();
    for (req, out) in requests.iter().zip(&outcomes) {
        if let Err(e) = audit(req, out) {
            errors.push(format!("goal `{}`: {e}", req.goal));
        }
    }
    let found = outcomes.iter().filter(|o| o.is_found()).count();
    if elapsed > Duration::from_secs(60) {
        errors.push(format!("took {elapsed:?}"));
    }
    if errors.is_empty() {
        Ok(format!("{} requests ({corpus_len} corpus + 200 random), {found} found, none exhausted fuel, {elapsed:.2?}", requests.len()))
    } else {
        Err(errors.join("; "))
    }
}

// --------------------------------------------------------- matcher oracle

/// First-order terms over the signature; `Var(j)` is the j-th parameter of
/// the hole whose body this is.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Fo {
    Var(usize),
    Con(usize, Vec<Fo>),
}

/// Left-hand sides: constants and holes applied to argument terms.
#[derive(Debug, Clone)]
enum Lhs {
    Hole(usize, Vec<Lhs>),
    Con(usize, Vec<Lhs>),
}

struct Sig {
    names: Vec<&'static str>,
    arities: Vec<usize>,
}

const ALL_CONSTS: [(&str, usize); 5] = [("a", 0), ("b", 0), ("c", 0), ("g", 1), ("k", 2)];

fn fo_depth(t: &Fo) -> usize {
    match t {
        Fo::Var(_) => 1,
        Fo::Con(_, args) => 1 + args.iter().map(fo_depth).max().unwrap_or(0),
    }
}

fn subst(body: &Fo, args: &[Fo]) -> Fo {
    match body {
        Fo::Var(j) => args[*j].clone(),
        Fo::Con(c, xs) => Fo::Con(*c, xs.iter().map(|x| subst(x, args)).collect()),
    }
}

fn eval(t: &Lhs, sol: &[Fo]) -> Fo {
    match t {
        Lhs::Con(c, xs) => Fo::Con(*c, xs.iter().map(|x| eval(x, sol)).collect()),
        Lhs::Hole(h, xs) => {
            let args: Vec<Fo> = xs.iter().map(|x| eval(x, sol)).collect();
            subst(&sol[*h], &args)
        }
    }
}

/// Every body of depth at most `depth` over the signature and `vars`
/// parameters.
fn enumerate(sig: &Sig, vars: usize, depth: usize) -> Vec<Fo> {
    let mut levels: Vec<Vec<Fo>> = vec![Vec::new()];
    for d in 1..=depth {
        let smaller: Vec<Fo> = levels.iter().flatten().cloned().collect();
        let mut this: Vec<Fo> = Vec::new();
        if d == 1 {
            this.extend((0..vars).map(Fo::Var));
            this.extend(sig.arities.iter().enumerate().filter(|(_, a)| **a == 0).map(|(c, _)| Fo::Con(c, Vec::new())));
        } else {
            for (c, &ar) in sig.arities.iter().enumerate().filter(|(_, a)| **a > 0) {
                let mut tuples: Vec<Vec<Fo>> = vec![Vec::new()];
                for _ in 0..ar {
                    tuples = tuples
                        .into_iter()
                        .flat_map(|t| smaller.iter().map(move |s| [t.clone(), vec![s.clone()]].concat()))
                        .collect();
                }
                for args in tuples {
                    let t = Fo::Con(c, args);
                    if fo_depth(&t) == d {
                        this.push(t);
                    }
                }
            }
        }
        levels.push(this);
    }
    levels.into_iter().flatten().collect()
}

fn cartesian(choices: &[Vec<Fo>]) -> Vec<Vec<Fo>> {
    choices.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.into_iter().flat_map(|prefix| opts.iter().map(move |o| [prefix.clone(), vec![o.clone()]].concat())).collect()
    })
}

fn random_fo(rng: &mut ChaCha8Rng, sig: &Sig, vars: usize, depth: usize) -> Fo {
    let nullary: Vec<usize> = (0..sig.names.len()).filter(|c| sig.arities[*c] == 0).collect();
    let other: Vec<usize> = (0..sig.names.len()).filter(|c| sig.arities[*c] > 0).collect();
    if depth <= 1 || other.is_empty() || rng.random_bool(0.35) {
        let leaves = vars + nullary.len();
        let k = rng.random_range(0..leaves);
        return if k < vars { Fo::Var(k) } else { Fo::Con(nullary[k - vars], Vec::new()) };
    }
    let c = *other.choose(rng).unwrap();
    Fo::Con(c, (0..sig.arities[c]).map(|_| random_fo(rng, sig, vars, depth - 1)).collect())
}

fn random_lhs(rng: &mut ChaCha8Rng, sig: &Sig, arities: &[usize], depth: usize) -> Lhs {
    let hole = |rng: &mut ChaCha8Rng| {
        let h = rng.random_range(0..arities.len());
        Lhs::Hole(h, (0..arities[h]).map(|_| random_lhs(rng, sig, arities, depth.saturating_sub(1))).collect())
    };
    if depth <= 1 {
        let nullary: Vec<usize> = (0..sig.names.len()).filter(|c| sig.arities[*c] == 0).collect();
        let zero_holes: Vec<usize> = (0..arities.len()).filter(|h| arities[*h] == 0).collect();
        if !zero_holes.is_empty() && rng.random_bool(0.3) {
            return Lhs::Hole(*zero_holes.choose(rng).unwrap(), Vec::new());
        }
        return Lhs::Con(*nullary.choose(rng).unwrap(), Vec::new());
    }
    if rng.random_bool(0.5) {
        return hole(rng);
    }
    let c = rng.random_range(0..sig.names.len());
    Lhs::Con(c, (0..sig.arities[c]).map(|_| random_lhs(rng, sig, arities, depth - 1)).collect())
}

fn lhs_holes(t: &Lhs, out: &mut BTreeSet<usize>) {
    match t {
        Lhs::Hole(h, xs) => {
            out.insert(*h);
            xs.iter().for_each(|x| lhs_holes(x, out));
        }
        Lhs::Con(_, xs) => xs.iter().for_each(|x| lhs_holes(x, out)),
    }
}

fn hole_name(h: usize) -> Name {
    Name::new(["F", "G"][h])
}

fn fo_term(t: &Fo, sig: &Sig, params: &[Name]) -> Term {
    match t {
        Fo::Var(j) => Term::Free(params[*j].clone()),
        Fo::Con(c, xs) => Term::apps(Term::var(sig.names[*c]), xs.iter().map(|x| fo_term(x, sig, params))),
    }
}

fn lhs_term(t: &Lhs, sig: &Sig) -> Term {
    match t {
        Lhs::Con(c, xs) => Term::apps(Term::var(sig.names[*c]), xs.iter().map(|x| lhs_term(x, sig))),
        Lhs::Hole(h, xs) => Term::apps(Term::Free(hole_name(*h)), xs.iter().map(|x| lhs_term(x, sig))),
    }
}

/// Reads a matcher binding `[z1..zk]body` back into the first-order form.
fn read_binding(t: &Term, arity: usize, sig: &Sig) -> Option<Fo> {
    let mut body = t;
    for _ in 0..arity {
        match body {
            Term::Lam(_, _, b) => body = b,
            _ => return None,
        }
    }
    fn go(t: &Term, arity: usize, sig: &Sig) -> Option<Fo> {
        let (head, args) = t.spine();
        match head {
            Term::Bound(i) if args.is_empty() && *i < arity => Some(Fo::Var(arity - 1 - i)),
            Term::Free(n) => {
                let c = sig.names.iter().position(|s| **s == **n)?;
                if sig.arities[c] != args.len() {
                    return None;
                }
                Some(Fo::Con(c, args.iter().map(|a| go(a, arity, sig)).collect::<Option<_>>()?))
            }
            _ => None,
        }
    }
    go(body, arity, sig)
}

struct OracleProblem {
    sig: Sig,
    arities: Vec<usize>,
    equations: Vec<(Lhs, Fo)>,
}

fn random_oracle_problem(rng: &mut ChaCha8Rng) -> OracleProblem {
    loop {
        let mut chosen: Vec<(&str, usize)> = vec![ALL_CONSTS[0]];
        for c in &ALL_CONSTS[1..] {
            if chosen.len() < 4 && rng.random_bool(0.5) {
                chosen.push(*c);
            }
        }
        let sig = Sig { names: chosen.iter().map(|c| c.0).collect(), arities: chosen.iter().map(|c| c.1).collect() };
        let n_holes = rng.random_range(1..=2);
        let max_arity = if n_holes == 2 { 1 } else { 2 };
        let arities: Vec<usize> = (0..n_holes).map(|_| rng.random_range(0..=max_arity)).collect();
        let planted: Vec<Fo> = arities.iter().map(|&a| random_fo(rng, &sig, a, 2)).collect();
        let mut equations = Vec::new();
        for _ in 0..rng.random_range(1..=2) {
            let lhs = random_lhs(rng, &sig, &arities, 3);
            let rhs = if rng.random_bool(0.75) { eval(&lhs, &planted) } else { random_fo(rng, &sig, 0, 3) };
            equations.push((lhs, rhs));
        }
        let mut used = BTreeSet::new();
        equations.iter().for_each(|(l, _)| lhs_holes(l, &mut used));
        if used.is_empty() || equations.iter().any(|(_, r)| fo_depth(r) > 3) {
            continue;
        }
        return OracleProblem { sig, arities, equations };
    }
}

fn to_match_problem(op: &OracleProblem) -> MatchProblem {
    let mut ctx = Context::new();
    ctx.push_universal("A", Term::prop());
    for (n, ar) in op.sig.names.iter().zip(&op.sig.arities) {
        ctx.push_universal(*n, (0..*ar).fold(Term::var("A"), |acc, _| Term::arrow(Term::var("A"), acc)));
    }
    for (h, ar) in op.arities.iter().enumerate() {
        let ty = (0..*ar).fold(Term::var("A"), |acc, _| Term::arrow(Term::var("A"), acc));
        ctx.push(ContextEntry::Existential { name: hole_name(h), ty });
    }
    MatchProblem {
        context: ctx,
        existentials: (0..op.arities.len()).map(hole_name).collect(),
        equations: op.equations.iter().map(|(l, r)| (lhs_term(l, &op.sig), fo_term(r, &op.sig, &[]))).collect(),
    }
}

fn check_oracle_problem(op: &OracleProblem) -> Result<usize, String> {
    let problem = to_match_problem(op);
    if !is_argument_restricted(&problem).map_err(|e| e.to_string())? {
        return Err("generated problem is not argument-restricted".into());
    }
    let pools: Vec<Vec<Fo>> = op.arities.iter().map(|&a| enumerate(&op.sig, a, 3)).collect();
    let oracle: BTreeSet<Vec<Fo>> =
        cartesian(&pools).into_iter().filter(|sol| op.equations.iter().all(|(l, r)| eval(l, sol) == *r)).collect();

    let solutions = solve(&problem, 1_000_000).map_err(|e| e.to_string())?;
    let mut found: BTreeSet<Vec<Fo>> = BTreeSet::new();
    for s in &solutions {
        let mut choices = Vec::new();
        for (h, &ar) in op.arities.iter().enumerate() {
            match s.get(&hole_name(h)) {
                Some(t) => choices.push(vec![read_binding(t, ar, &op.sig).ok_or_else(|| format!("unexpected binding {t}"))?]),
                None => choices.push(pools[h].clone()),
            }
        }
        found.extend(cartesian(&choices));
    }
    if found == oracle {
        Ok(oracle.len())
    } else {
        let show = |v: &Vec<Fo>| format!("{v:?}");
        let missing: Vec<String> = oracle.difference(&found).take(3).map(show).collect();
        let extra: Vec<String> = found.difference(&oracle).take(3).map(show).collect();
        Err(format!("{:?}: missing {missing:?}, extra {extra:?}", problem.equations.iter().map(|(l, r)| format!("{l} = {r}")).collect::<Vec<_>>()))
    }
}

fn criterion_matcher_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let problems: Vec<OracleProblem> = (0..520).map(|_| random_oracle_problem(&mut rng)).collect();
    let results = cocv_core::batch::map(Exec::Parallel, &problems, check_oracle_problem);
    let mut errors = Vec::new();
    let (mut solvable, mut total_solutions) = (0, 0);
    for r in results {
        match r {
            Ok(n) => {
                total_solutions += n;
                if n > 0 {
                    solvable += 1;
                }
            }
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(format!("{} problems agree with enumeration ({solvable} solvable, {total_solutions} grounded solutions)", problems.len()))
    } else {
        Err(format!("{} disagreements, first: {}", errors.len(), errors[0]))
    }
}

// ------------------------------------------------------------- CLI runs

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    elapsed: Duration,
}

fn run_cli(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_cocv")).args(args).output().expect("spawn cocv");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        elapsed: start.elapsed(),
    }
}

struct Record {
    name: String,
    ty: Term,
    proof: Term,
}

fn records(stdout: &str) -> Result<Vec<Record>, String> {
    stdout
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).map_err(|e| format!("bad record {l}: {e}"))?;
            let field = |k: &str| v[k].as_str().map(str::to_owned).ok_or_else(|| format!("record lacks `{k}`: {l}"));
            Ok(Record {
                name: field("name")?,
                ty: parse_term(&field("type")?).map_err(|e| e.to_string())?,
                proof: parse_term(&field("proof")?).map_err(|e| e.to_string())?,
            })
        })
        .collect()
}

const POSITIVE: [&str; 7] = ["trans.vn", "s_combinator.vn", "leibniz_sym.vn", "leibniz_hyp.vn", "nested.vn", "logic.vn", "eager.vn"];

fn has_predicate_argument(t: &Term) -> bool {
    match t {
        Term::App(f, a) => {
            matches!(&**a, Term::Lam(_, _, body) if matches!(&**body, Term::Prod(..))) || has_predicate_argument(f) || has_predicate_argument(a)
        }
        Term::Lam(_, _, b) | Term::Prod(_, _, b) => has_predicate_argument(b),
        _ => false,
    }
}

fn criterion_fixtures() -> Verdict {
    let mut notes = Vec::new();
    let mut by_file = std::collections::BTreeMap::new();
    for f in POSITIVE {
        let path = fixtures().join(f);
        let run = run_cli(&["check", "--machine-output", path.to_str().unwrap()]);
        if run.code != 0 {
            return Err(format!("{f}: exit {} ({})", run.code, run.stderr.trim()));
        }
        if run.elapsed > Duration::from_secs(1) {
            return Err(format!("{f}: took {:?}", run.elapsed));
        }
        notes.push(format!("{f} {:.0?}", run.elapsed));
        by_file.insert(f, records(&run.stdout)?);
    }

    let trans = &by_file["trans.vn"][0];
    let expected_ty = p("(A:Prop)(B:Prop)(C:Prop)(f:(x:A)B)(g:(x:B)C)(x:A)C");
    let expected_proof = p("[A:Prop][B:Prop][C:Prop][f:A->B][g:B->C][x:A](g (f x))");
    if trans.name != "trans" || trans.ty != expected_ty || !conv(&trans.proof, &expected_proof, &Context::new()).unwrap() {
        return Err(format!("trans: got {} : {} := {}", trans.name, trans.ty, trans.proof));
    }

    let mut eq_ctx = Context::new();
    eq_ctx.push_definition("eq", p("(A:Prop)(x:A)(y:A)Prop"), p("[A:Prop][x:A][y:A](P:(z:A)Prop)((P x))->(P y)"));
    let sym = &by_file["leibniz_sym.vn"][0];
    check_type(&eq_ctx, &sym.proof, &sym.ty).map_err(|e| format!("sym recheck: {e}"))?;
    if sym.ty != p("(A:Prop)(x:A)(y:A)((eq A x y))->(eq A y x)") || !has_predicate_argument(&sym.proof) {
        return Err(format!("sym: unexpected {} := {}", sym.ty, sym.proof));
    }

    let nested = &by_file["nested.vn"];
    for (outer, lemma) in [("main", "to_c"), ("main2", "to_c2")] {
        let r = nested.iter().find(|r| r.name == outer).ok_or_else(|| format!("nested: no `{outer}`"))?;
        if r.proof.mentions(lemma) {
            return Err(format!("nested: `{lemma}` not discharged in {}", r.proof));
        }
    }
    Ok(notes.join(", "))
}

fn expected_position(source: &str) -> Option<(usize, usize)> {
    let rest = source.split("(* expect ").nth(1)?;
    let (pos, _) = rest.split_once(" *)")?;
    let (l, c) = pos.split_once(':')?;
    Some((l.parse().ok()?, c.parse().ok()?))
}

fn criterion_negative() -> Verdict {
    let dir = fixtures().join("negative");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    files.sort();
    if files.len() < 10 {
        return Err(format!("only {} negative scripts", files.len()));
    }
    let mut slowest = Duration::ZERO;
    for f in &files {
        let source = std::fs::read_to_string(f).map_err(|e| e.to_string())?;
        let (line, col) = expected_position(&source).ok_or_else(|| format!("{}: no expectation", f.display()))?;
        let run = run_cli(&["check", f.to_str().unwrap()]);
        let prefix = format!("{}:{line}:{col}: error:", f.display());
        if run.code != 1 || !run.stderr.contains(&prefix) {
            return Err(format!("{}: exit {}, stderr {:?}, wanted {prefix}", f.display(), run.code, run.stderr.trim()));
        }
        if run.elapsed > Duration::from_secs(1) {
            return Err(format!("{}: took {:?}", f.display(), run.elapsed));
        }
        slowest = slowest.max(run.elapsed);
    }
    Ok(format!("{} scripts exit 1 at the expected instruction, slowest {slowest:.0?}", files.len()))
}

// ------------------------------------------------------ kernel isolation

fn criterion_kernel_independence() -> Verdict {
    let kernel = Path::new(env!("CARGO_MANIFEST_DIR")).join("../kernel");
    let manifest: toml::Table =
        std::fs::read_to_string(kernel.join("Cargo.toml")).map_err(|e| e.to_string())?.parse().map_err(|e: toml::de::Error| e.to_string())?;
    for section in ["dependencies", "dev-dependencies", "build-dependencies"] {
        if let Some(deps) = manifest.get(section).and_then(|d| d.as_table()) {
            if let Some(bad) = deps.keys().find(|k| k.starts_with("cocv")) {
                return Err(format!("kernel [{section}] depends on `{bad}`"));
            }
        }
    }
    let mut stack = vec![kernel.join("src"), kernel.join("tests")];
    let mut scanned = 0;
    while let Some(dir) = stack.pop() {
        let Ok(entries) = std::fs::read_dir(&dir) else { continue };
        for e in entries {
            let path = e.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|x| x == "rs") {
                scanned += 1;
                let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
                if text.contains("cocv_core") {
                    return Err(format!("{} refers to cocv_core", path.display()));
                }
            }
        }
    }
    Ok(format!("kernel manifest has no workspace dependency; {scanned} source files clean"))
}

// ------------------------------------------------------ discharge order

fn criterion_discharge() -> Verdict {
    let mut checked = 0;
    for f in POSITIVE {
        let source = std::fs::read_to_string(fixtures().join(f)).map_err(|e| e.to_string())?;
        let script = parse(&source).map_err(|e| e.to_string())?;
        let report = check_script(&source, &CheckConfig::default());
        if let Some(e) = &report.error {
            return Err(format!("{f}: {e}"));
        }
        // Replays the frame structure: locals before each statement.
        let mut frames: Vec<(Vec<(Name, Term)>, bool)> = Vec::new();
        let mut expected: Vec<Vec<(Name, Term)>> = Vec::new();
        for l in &script {
            match &l.instruction {
                Instruction::Remark(_) => frames.push((Vec::new(), false)),
                Instruction::Statement(_) => frames.last_mut().unwrap().1 = true,
                Instruction::Local { name, ty, .. } => {
                    if let Some((locals, false)) = frames.last_mut() {
                        locals.push((name.clone(), ty.clone()));
                    }
                }
                Instruction::Using(_) => expected.push(frames.pop().unwrap().0),
                _ => {}
            }
        }
        if expected.len() != report.constants.len() {
            return Err(format!("{f}: {} remarks but {} constants", expected.len(), report.constants.len()));
        }
        for (decls, c) in expected.iter().zip(&report.constants) {
            let mut t = c.ty.clone();
            for (name, u) in decls {
                match &t {
                    Term::Prod(_, d, body) if **d == *u => t = body.open(name),
                    _ => return Err(format!("{f}: `{}` : {} does not start with ({name}:{u})", c.name, c.ty)),
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} constants start with their declared locals in order"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("soundness", criterion_soundness),
        ("termination", criterion_termination),
        ("matcher oracle", criterion_matcher_oracle),
        ("end-to-end fixtures", criterion_fixtures),
        ("negative suite", criterion_negative),
        ("kernel independence", criterion_kernel_independence),
        ("discharge fidelity", criterion_discharge),
    ];
    let mut failed = 0;
    for (i, (label, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} {label}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {label}: FAIL ({detail})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
