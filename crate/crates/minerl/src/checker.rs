//! Whole-program type checking: generate constraints, rewrite them,
//! solve by tallying with backtracking over candidate substitutions, and
//! turn failures into located diagnostics.
//!
//! The pipeline runs in two rounds. The definitions' constraint is
//! rewritten once and tallied; each candidate substitution θ is applied
//! to the scheme environment, the generalized result scopes the main
//! expression's rewriting, and a final tally of equiv(θ) ∧ c′ accepts the
//! first θ that survives. When every candidate fails, the whole pipeline
//! is retried with exhaustiveness conjuncts stripped: a retry that
//! succeeds pins the blame on specific case expressions, which are then
//! reported with their residual (uncovered) type and, when one exists, a
//! concrete unmatched value. Otherwise a prefix search over the failing
//! conjunction finds the first constraint that makes it unsolvable and
//! blames that constraint's source location.
//!
//! A successful check is followed by an unreachability scan: a branch is
//! reported when its dead-branch test holds under the final substitution
//! for every copy of the branch (intersection annotations check a body
//! once per arrow, and a branch skipped for only some arrows is doing
//! useful work).

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{GuardedPattern, Program, Span};
use crate::constraints::{
    equiv_constraint, exhaustiveness_sites, gen_program, generalize_env, rewrite,
    simple_sexpr, strip_exhaustiveness, BranchTest, Origin, RewriteError, Role,
    SchemeEnv, SimpleConstraint, Site,
};
use crate::patenv::{gpat_ty, Approx};
use crate::subty::{ground_witness, is_empty, is_subtype, simplify};
use crate::tally::{Solutions, TallyCtx, TallyError};
use crate::types::{compose_subst, Ty, TyNode, TyStore, TySubst, TyVar};
use crate::ast::value_to_string;

// ---------------------------------------------------------------------------
// Results and diagnostics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    TypeError,
    NonExhaustive,
    UnreachableBranch,
    UnboundVariable,
    MalformedAnnotation,
    Timeout,
}

impl DiagnosticKind {
    pub fn name(self) -> &'static str {
        match self {
            DiagnosticKind::TypeError => "TypeError",
            DiagnosticKind::NonExhaustive => "NonExhaustive",
            DiagnosticKind::UnreachableBranch => "UnreachableBranch",
            DiagnosticKind::UnboundVariable => "UnboundVariable",
            DiagnosticKind::MalformedAnnotation => "MalformedAnnotation",
            DiagnosticKind::Timeout => "Timeout",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub span: Span,
    pub message: String,
    /// NonExhaustive: the uncovered part of the scrutinee type.
    pub residual_type: Option<String>,
    /// NonExhaustive: an example unmatched value, when one exists.
    pub witness: Option<String>,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, span: Span, message: String) -> Diagnostic {
        Diagnostic { kind, span, message, residual_type: None, witness: None }
    }
}

#[derive(Debug, Clone)]
pub enum CheckResult {
    Ok { ty: Ty, subst: TySubst },
    Err(Vec<Diagnostic>),
}

/// Check result plus bookkeeping the driver wants: how many candidate
/// substitutions the definitions produced, whether the solution cap
/// truncated them, and the requested constraint trace.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub result: CheckResult,
    pub candidates: usize,
    pub truncated: bool,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub budget: u64,
    pub max_solutions: usize,
    pub no_exhaustiveness: bool,
    pub trace: bool,
}

impl Default for CheckOptions {
    fn default() -> CheckOptions {
        CheckOptions {
            budget: 1_000_000,
            max_solutions: 64,
            no_exhaustiveness: false,
            trace: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// One successful pipeline pass.
struct Success {
    theta_total: TySubst,
    records: Vec<BranchTest>,
    /// Exhaustiveness conjuncts seen before any stripping:
    /// (case span, scrutinee variable, union of accepted types).
    sites: Vec<(Span, Ty, Ty)>,
    candidates: usize,
    truncated: bool,
}

enum Failure {
    Rewrite(RewriteError),
    Timeout,
    /// Every candidate failed; carries the conjunction to blame and the
    /// number of candidates tried.
    NoSolution { blame_target: SimpleConstraint, candidates: usize },
}

pub fn check_program(
    st: &mut TyStore,
    prog: &Program,
    expected: Option<Ty>,
    opts: &CheckOptions,
) -> CheckReport {
    let mut trace = Vec::new();
    let want = match expected {
        Some(t) => t,
        None => {
            let v = st.fresh_var("main");
            st.mk_var(v)
        }
    };
    let mut rigid: BTreeSet<TyVar> = BTreeSet::new();
    if let Some(t) = expected {
        rigid.extend(st.free_ty_vars(t).iter().copied());
    }
    let pc = match gen_program(st, prog, want, opts.no_exhaustiveness) {
        Ok(pc) => pc,
        Err(g) => {
            let d = Diagnostic::new(
                DiagnosticKind::MalformedAnnotation,
                g.span,
                format!("annotation on `{}`: {}", g.name, g.message),
            );
            return CheckReport { result: CheckResult::Err(vec![d]), candidates: 0, truncated: false, trace };
        }
    };
    rigid.extend(pc.rigid.iter().copied());
    if opts.trace {
        for part in &pc.def_parts {
            trace.push(format!(
                "(def {} {})",
                part.name,
                crate::constraints::constraint_sexpr(st, &part.constraint)
            ));
        }
        trace.push(format!("(main {})", crate::constraints::constraint_sexpr(st, &pc.main_constraint)));
    }

    match attempt(st, &pc.env, &pc, &rigid, opts, false, &mut trace) {
        Ok(success) => finish(st, prog, &pc, &rigid, success, trace),
        Err(Failure::Rewrite(e)) => {
            let d = rewrite_diag(e);
            CheckReport { result: CheckResult::Err(vec![d]), candidates: 0, truncated: false, trace }
        }
        Err(Failure::Timeout) => CheckReport {
            result: CheckResult::Err(vec![timeout_diag(prog)]),
            candidates: 0,
            truncated: false,
            trace,
        },
        Err(Failure::NoSolution { blame_target, candidates }) => {
            // Retry without exhaustiveness conjuncts: success means the
            // failure was (at least) missing case coverage.
            match attempt(st, &pc.env, &pc, &rigid, opts, true, &mut trace) {
                Ok(stripped) => {
                    let diags = exhaustiveness_diags(st, &stripped, &rigid);
                    if diags.is_empty() {
                        let d = blame(st, &rigid, opts, &blame_target, candidates, prog);
                        CheckReport { result: CheckResult::Err(vec![d]), candidates, truncated: false, trace }
                    } else {
                        CheckReport { result: CheckResult::Err(diags), candidates, truncated: false, trace }
                    }
                }
                Err(Failure::Timeout) => CheckReport {
                    result: CheckResult::Err(vec![timeout_diag(prog)]),
                    candidates,
                    truncated: false,
                    trace,
                },
                Err(_) => {
                    let d = blame(st, &rigid, opts, &blame_target, candidates, prog);
                    CheckReport { result: CheckResult::Err(vec![d]), candidates, truncated: false, trace }
                }
            }
        }
    }
}

/// Run the rewrite-and-tally pipeline once, backtracking over the
/// definitions' candidate substitutions. `strip` removes exhaustiveness
/// conjuncts before solving (the sites are still collected first).
fn attempt(
    st: &mut TyStore,
    sigma: &SchemeEnv,
    pc: &crate::constraints::ProgConstraint,
    rigid: &BTreeSet<TyVar>,
    opts: &CheckOptions,
    strip: bool,
    trace: &mut Vec<String>,
) -> Result<Success, Failure> {
    let gamma = crate::patenv::TypeEnv::new();
    // Branch reachability is only reported for annotated definitions, so
    // only their dead-branch records are kept.
    let mut def_records = Vec::new();
    let mut def_simples = Vec::new();
    for part in &pc.def_parts {
        let mut records = Vec::new();
        let simple = rewrite(st, &part.constraint, sigma, &gamma, &mut records)
            .map_err(Failure::Rewrite)?;
        if part.annotated {
            def_records.extend(records);
        }
        def_simples.push(simple);
    }
    let def_simple = SimpleConstraint::And(def_simples);
    let mut sites = Vec::new();
    exhaustiveness_sites(&def_simple, &mut sites);
    let def_solve = if strip { strip_exhaustiveness(&def_simple) } else { def_simple.clone() };
    if opts.trace && !strip {
        trace.push(format!("(rewritten-defs {})", simple_sexpr(st, &def_solve)));
    }
    let def_sols = tally_call(st, rigid, opts, &def_solve)?;
    if def_sols.substs.is_empty() {
        return Err(Failure::NoSolution { blame_target: def_simple, candidates: 0 });
    }
    let candidates = def_sols.substs.len();

    let mut first_blame: Option<SimpleConstraint> = None;
    for theta in &def_sols.substs {
        let mut sigma_theta = SchemeEnv::new();
        for (name, sc) in sigma {
            let applied = st.apply_subst_scheme(sc, theta);
            sigma_theta.insert(name.clone(), applied);
        }
        let sigma_gen = generalize_env(st, &sigma_theta);
        let mut main_records = Vec::new();
        let main_simple =
            match rewrite(st, &pc.main_constraint, &sigma_gen, &gamma, &mut main_records) {
                Ok(c) => c,
                Err(e) => return Err(Failure::Rewrite(e)),
            };
        let mut attempt_sites = sites.clone();
        exhaustiveness_sites(&main_simple, &mut attempt_sites);
        let main_solve = if strip { strip_exhaustiveness(&main_simple) } else { main_simple };
        let eq = equiv_constraint(st, theta);
        let full = SimpleConstraint::And(vec![eq, main_solve]);
        if opts.trace && !strip {
            trace.push(format!("(attempt {})", simple_sexpr(st, &full)));
        }
        let sols = tally_call(st, rigid, opts, &full)?;
        if let Some(theta2) = sols.substs.first() {
            let theta_total = compose_subst(st, theta, theta2);
            if opts.trace && !strip {
                trace.push(format!("(accepted candidates {})", candidates));
            }
            return Ok(Success {
                theta_total,
                records: def_records,
                sites: attempt_sites,
                candidates,
                truncated: def_sols.truncated || sols.truncated,
            });
        }
        if first_blame.is_none() {
            first_blame = Some(full);
        }
    }
    Err(Failure::NoSolution { blame_target: first_blame.expect("at least one candidate"), candidates })
}

fn tally_call(
    st: &mut TyStore,
    rigid: &BTreeSet<TyVar>,
    opts: &CheckOptions,
    c: &SimpleConstraint,
) -> Result<Solutions, Failure> {
    let mut tcx = TallyCtx::new(st, rigid.clone(), opts.budget);
    tcx.tally(c, opts.max_solutions).map_err(|TallyError::Budget| Failure::Timeout)
}

/// Successful check: apply the final substitution and scan for
/// unreachable branches, which downgrade the result to an error.
fn finish(
    st: &mut TyStore,
    _prog: &Program,
    pc: &crate::constraints::ProgConstraint,
    rigid: &BTreeSet<TyVar>,
    success: Success,
    trace: Vec<String>,
) -> CheckReport {
    let solved = st.apply_subst(pc.main_ty, &success.theta_total);
    let cleaned = display_simplify(st, solved, rigid);
    let ty = simplify(st, cleaned);
    let dead = detect_unreachable(st, &success.records, &success.theta_total, rigid);
    if dead.is_empty() {
        CheckReport {
            result: CheckResult::Ok { ty, subst: success.theta_total },
            candidates: success.candidates,
            truncated: success.truncated,
            trace,
        }
    } else {
        let diags = dead
            .into_iter()
            .map(|site| {
                Diagnostic::new(
                    DiagnosticKind::UnreachableBranch,
                    site.span,
                    format!("branch {} of this case can never match", site.index + 1),
                )
            })
            .collect();
        CheckReport {
            result: CheckResult::Err(diags),
            candidates: success.candidates,
            truncated: success.truncated,
            trace,
        }
    }
}

// ---------------------------------------------------------------------------
// Unreachable branches
// ---------------------------------------------------------------------------

/// Branches whose dead-branch test holds, under the final substitution,
/// for every recorded copy of the branch. Intersection annotations check
/// a body once per arrow; a branch is only reported when no arrow needs
/// it. The test instantiates leftover solver variables minimally, per
/// the typing the checker actually committed to.
pub fn detect_unreachable(
    st: &mut TyStore,
    records: &[BranchTest],
    theta: &TySubst,
    rigid: &BTreeSet<TyVar>,
) -> Vec<Site> {
    let mut by_site: BTreeMap<Site, Vec<&BranchTest>> = BTreeMap::new();
    for bt in records {
        by_site.entry(bt.site).or_default().push(bt);
    }
    let mut out = Vec::new();
    for (site, tests) in by_site {
        let all_dead = tests.iter().all(|bt| {
            let s = st.apply_subst(bt.scrut_var, theta);
            let d = st.apply_subst(bt.dead_when, theta);
            let s = minimal_instance(st, s, rigid);
            let d = minimal_instance(st, d, rigid);
            is_subtype(st, s, d)
        });
        if all_dead {
            out.push(site);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Exhaustiveness
// ---------------------------------------------------------------------------

/// The part of the scrutinee type no branch is guaranteed to accept;
/// empty exactly when the case is exhaustive.
pub fn check_exhaustiveness_details(
    st: &mut TyStore,
    scrutiny: Ty,
    gpats: &[GuardedPattern],
) -> Ty {
    let mut accepted = st.bottom();
    for pg in gpats {
        let lo = gpat_ty(st, pg, Approx::Down);
        accepted = st.mk_union(accepted, lo);
    }
    st.mk_diff(scrutiny, accepted)
}

/// Diagnostics for the collected exhaustiveness sites whose residual is
/// nonempty under the stripped retry's substitution. One per case span.
fn exhaustiveness_diags(
    st: &mut TyStore,
    success: &Success,
    rigid: &BTreeSet<TyVar>,
) -> Vec<Diagnostic> {
    let mut seen_spans = BTreeSet::new();
    let mut out = Vec::new();
    for &(span, scrut, accepted) in &success.sites {
        if seen_spans.contains(&span) {
            continue;
        }
        let s = st.apply_subst(scrut, &success.theta_total);
        let a = st.apply_subst(accepted, &success.theta_total);
        let raw = st.mk_diff(s, a);
        let min = minimal_instance(st, raw, rigid);
        if is_empty(st, min) {
            continue;
        }
        let residual = simplify(st, min);
        seen_spans.insert(span);
        let mut d = Diagnostic::new(
            DiagnosticKind::NonExhaustive,
            span,
            "this case does not cover all values of the scrutinee".to_string(),
        );
        d.residual_type = Some(st.ty_to_string(residual));
        d.witness = ground_witness(st, residual, 3).map(|v| value_to_string(&v));
        out.push(d);
    }
    out
}

// ---------------------------------------------------------------------------
// Canonical instances
// ---------------------------------------------------------------------------
//
// Tallying solutions stay valid under every assignment of their leftover
// variables (the fresh slack a solution introduces between bounds).
// Reports therefore pick a canonical assignment rather than showing
// solver variables to the user.

/// Every flexible leftover variable goes to the bottom type: the least
/// instance, matching the minimal typing the checker committed to. Used
/// for reachability tests and residual scrutinee types.
fn minimal_instance(st: &mut TyStore, t: Ty, rigid: &BTreeSet<TyVar>) -> Ty {
    let fv = st.free_ty_vars(t);
    let bot = st.bottom();
    let mut s = TySubst::new();
    for v in fv.iter() {
        if !rigid.contains(v) {
            s.insert(*v, bot);
        }
    }
    st.apply_subst(t, &s)
}

/// Polarity-aware cleanup for the reported type: variables occurring
/// only covariantly shrink to bottom, only contravariantly to top, and
/// genuinely polymorphic (mixed) variables stay.
fn display_simplify(st: &mut TyStore, t: Ty, rigid: &BTreeSet<TyVar>) -> Ty {
    let mut seen = BTreeSet::new();
    let mut pos = BTreeSet::new();
    let mut neg = BTreeSet::new();
    polarity_scan(st, t, true, &mut seen, &mut pos, &mut neg);
    let bot = st.bottom();
    let top = st.top();
    let mut s = TySubst::new();
    for v in st.free_ty_vars(t).iter() {
        if rigid.contains(v) {
            continue;
        }
        match (pos.contains(v), neg.contains(v)) {
            (true, false) => {
                s.insert(*v, bot);
            }
            (false, true) => {
                s.insert(*v, top);
            }
            _ => {}
        }
    }
    st.apply_subst(t, &s)
}

fn polarity_scan(
    st: &TyStore,
    t: Ty,
    covariant: bool,
    seen: &mut BTreeSet<(Ty, bool)>,
    pos: &mut BTreeSet<TyVar>,
    neg: &mut BTreeSet<TyVar>,
) {
    if !seen.insert((t, covariant)) {
        return;
    }
    match *st.node(t) {
        TyNode::Var(v) => {
            if covariant {
                pos.insert(v);
            } else {
                neg.insert(v);
            }
        }
        TyNode::Base(_) | TyNode::Hole => {}
        TyNode::Union(a, b) => {
            polarity_scan(st, a, covariant, seen, pos, neg);
            polarity_scan(st, b, covariant, seen, pos, neg);
        }
        TyNode::Neg(a) => polarity_scan(st, a, !covariant, seen, pos, neg),
        TyNode::Pair(a, b) => {
            polarity_scan(st, a, covariant, seen, pos, neg);
            polarity_scan(st, b, covariant, seen, pos, neg);
        }
        TyNode::Arrow(d, c) => {
            polarity_scan(st, d, !covariant, seen, pos, neg);
            polarity_scan(st, c, covariant, seen, pos, neg);
        }
    }
}

// ---------------------------------------------------------------------------
// Blame
// ---------------------------------------------------------------------------

/// Locate the first conjunct of the always-live combination that tips the
/// prefix from solvable to unsolvable, and word a diagnostic by its role.
fn blame(
    st: &mut TyStore,
    rigid: &BTreeSet<TyVar>,
    opts: &CheckOptions,
    target: &SimpleConstraint,
    candidates: usize,
    prog: &Program,
) -> Diagnostic {
    let mut live = Vec::new();
    flatten_live(target, &mut live);
    let mut prefix: Vec<(Ty, Ty)> = Vec::new();
    for (lhs, rhs, origin) in &live {
        prefix.push((*lhs, *rhs));
        let mut tcx = TallyCtx::new(st, rigid.clone(), opts.budget);
        match tcx.solvable(&prefix) {
            Ok(false) => {
                return blame_diag(origin, candidates, prog);
            }
            Ok(true) => {}
            Err(TallyError::Budget) => return timeout_diag(prog),
        }
    }
    // The taken-branch combination alone is solvable; report generically.
    Diagnostic::new(
        DiagnosticKind::TypeError,
        prog.main.span,
        summary_message("the program's parts cannot be typed consistently", candidates),
    )
}

fn flatten_live(c: &SimpleConstraint, out: &mut Vec<(Ty, Ty, Origin)>) {
    match c {
        SimpleConstraint::Sub { lhs, rhs, origin } => out.push((*lhs, *rhs, origin.clone())),
        SimpleConstraint::And(parts) => {
            for p in parts {
                flatten_live(p, out);
            }
        }
        SimpleConstraint::Or { live, .. } => flatten_live(live, out),
    }
}

fn blame_diag(origin: &Origin, candidates: usize, prog: &Program) -> Diagnostic {
    let message = match &origin.role {
        Role::Constant => "this constant does not have the required type".to_string(),
        Role::Variable(x) => format!("`{}` does not have the required type here", x),
        Role::Function => "this function does not admit the required arrow type".to_string(),
        Role::PairSite => "this pair does not have the required type".to_string(),
        Role::CaseResult => "the case branches do not produce the required type".to_string(),
        Role::Scrutinee => "the scrutinee cannot have the shape this pattern requires".to_string(),
        Role::GuardScope(x) => format!("guard variable `{}` cannot be typed here", x),
        Role::Exhaustiveness => "this case does not cover all values of the scrutinee".to_string(),
        Role::Annotation(f) => format!("the body of `{}` does not match its annotation", f),
        Role::Expected => "the program does not have the expected type".to_string(),
        Role::Stability => "a definition's inferred type does not support this use".to_string(),
        Role::Deadness => "this branch can never match".to_string(),
    };
    let span = if origin.span == Span::default() { prog.main.span } else { origin.span };
    Diagnostic::new(DiagnosticKind::TypeError, span, summary_message(&message, candidates))
}

fn summary_message(core: &str, candidates: usize) -> String {
    if candidates > 1 {
        format!("{} (tried {} candidate typings of the definitions)", core, candidates)
    } else {
        core.to_string()
    }
}

fn rewrite_diag(e: RewriteError) -> Diagnostic {
    match e {
        RewriteError::Unbound { name, span } => Diagnostic::new(
            DiagnosticKind::UnboundVariable,
            span,
            format!("unbound variable `{}`", name),
        ),
        RewriteError::Ambiguous { name, span } => Diagnostic::new(
            DiagnosticKind::TypeError,
            span,
            format!("`{}` names both a definition and a local binding here", name),
        ),
    }
}

fn timeout_diag(prog: &Program) -> Diagnostic {
    Diagnostic::new(
        DiagnosticKind::Timeout,
        prog.main.span,
        "type checking exceeded the constraint-solving budget".to_string(),
    )
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
