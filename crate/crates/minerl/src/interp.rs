//! Reference interpreter: small-step, call-by-value, leftmost-innermost,
//! substitution-based.
//!
//! Top-level definitions stay in an environment and unfold lazily when a
//! name reaches evaluation position, so recursive definitions need no
//! fixed-point combinator. Everything else moves by substitution, which
//! also enters patterns: a capture or guard test whose variable gets
//! substituted turns into a comparison against the substituted value.
//!
//! Guards evaluate left to right with short-circuiting. An `oracle` atom
//! consults the run's oracle state: a fixed answer or a seeded stream of
//! fair coin flips, one per evaluation.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{
    alpha_equal_value, expr_to_value, free_vars_expr, value_to_expr, vars_of, Clause, Expr,
    ExprKind, Guard, Name, Pattern, Program, Span, Value,
};

pub type DefEnv = BTreeMap<Name, Value>;

/// Definitions as values: every definition is a lambda.
pub fn def_env(prog: &Program) -> DefEnv {
    prog.defs
        .iter()
        .map(|d| {
            (
                d.name.clone(),
                Value::Abs(d.binder.clone(), Box::new(d.body.clone())),
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStrategy {
    AlwaysTrue,
    AlwaysFalse,
    Seeded(u64),
}

/// Oracle decisions for one run; each `oracle` evaluation draws once.
pub struct OracleState {
    strategy: OracleStrategy,
    rng: Option<ChaCha8Rng>,
    draws: u64,
}

impl OracleState {
    pub fn new(strategy: OracleStrategy) -> OracleState {
        let rng = match strategy {
            OracleStrategy::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        OracleState {
            strategy,
            rng,
            draws: 0,
        }
    }

    pub fn next(&mut self) -> bool {
        self.draws += 1;
        match self.strategy {
            OracleStrategy::AlwaysTrue => true,
            OracleStrategy::AlwaysFalse => false,
            OracleStrategy::Seeded(_) => {
                let rng = self.rng.as_mut().expect("seeded oracle has an rng");
                rng.next_u32() & 1 == 1
            }
        }
    }

    /// Number of oracle evaluations so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

/// Simultaneous capture-avoiding substitution of values for variables.
/// Substituted values are closed up to definition names, but binders may
/// shadow those names, so clashing binders are renamed.
pub fn subst_many(e: &Expr, map: &BTreeMap<Name, Value>) -> Expr {
    if map.is_empty() {
        return e.clone();
    }
    let repl: BTreeMap<Name, Repl> = map
        .iter()
        .map(|(x, v)| (x.clone(), Repl::Val(v.clone())))
        .collect();
    subst_repl(e, &repl)
}

pub fn subst(e: &Expr, x: &str, v: &Value) -> Expr {
    let mut map = BTreeMap::new();
    map.insert(x.to_string(), v.clone());
    subst_many(e, &map)
}

/// What a variable is replaced by: a value, or another variable (used
/// when renaming binders).
#[derive(Clone)]
enum Repl {
    Val(Value),
    Var(Name),
}

impl Repl {
    fn free_vars(&self) -> BTreeSet<Name> {
        match self {
            Repl::Val(v) => {
                let e = value_to_expr(v, Span::default());
                free_vars_expr(&e)
            }
            Repl::Var(x) => std::iter::once(x.clone()).collect(),
        }
    }

    fn to_expr(&self, span: Span) -> Expr {
        match self {
            Repl::Val(v) => value_to_expr(v, span),
            Repl::Var(x) => Expr::new(ExprKind::Var(x.clone()), span),
        }
    }
}

fn subst_repl(e: &Expr, map: &BTreeMap<Name, Repl>) -> Expr {
    if map.is_empty() {
        return e.clone();
    }
    let kind = match &e.kind {
        ExprKind::Var(x) => match map.get(x) {
            Some(r) => return r.to_expr(e.span),
            None => ExprKind::Var(x.clone()),
        },
        ExprKind::Const(c) => ExprKind::Const(c.clone()),
        ExprKind::App(f, a) => ExprKind::App(
            Box::new(subst_repl(f, map)),
            Box::new(subst_repl(a, map)),
        ),
        ExprKind::Pair(a, b) => ExprKind::Pair(
            Box::new(subst_repl(a, map)),
            Box::new(subst_repl(b, map)),
        ),
        ExprKind::Abs(y, body) => {
            let mut inner: BTreeMap<Name, Repl> = map.clone();
            inner.remove(y);
            if inner.is_empty() {
                ExprKind::Abs(y.clone(), body.clone())
            } else if replacements_mention(&inner, y) {
                let fresh = fresh_name(y, &inner, body);
                let mut renamed = inner;
                renamed.insert(y.clone(), Repl::Var(fresh.clone()));
                ExprKind::Abs(fresh, Box::new(subst_repl(body, &renamed)))
            } else {
                ExprKind::Abs(y.clone(), Box::new(subst_repl(body, &inner)))
            }
        }
        ExprKind::Case(scrut, clauses) => {
            let scrut = Box::new(subst_repl(scrut, map));
            let clauses = clauses.iter().map(|cl| subst_clause(cl, map)).collect();
            ExprKind::Case(scrut, clauses)
        }
    };
    Expr::new(kind, e.span)
}

fn subst_clause(cl: &Clause, map: &BTreeMap<Name, Repl>) -> Clause {
    // The pattern is all uses (captures, embedded values), never binders
    // for its own occurrence, so it substitutes under the full map.
    let pattern = subst_pattern(&cl.gpat.pattern, map);
    let bound = vars_of(&pattern);
    let mut inner: BTreeMap<Name, Repl> = map.clone();
    for x in &bound {
        inner.remove(x);
    }
    let clash: Vec<Name> = bound
        .iter()
        .filter(|y| replacements_mention(&inner, y))
        .cloned()
        .collect();
    let (pattern, inner) = if clash.is_empty() {
        (pattern, inner)
    } else {
        let mut pattern = pattern;
        let mut inner = inner;
        for y in clash {
            let fresh = fresh_clause_name(&y, &inner, &pattern, &cl.body);
            pattern = rename_pattern_binder(&pattern, &y, &fresh);
            inner.insert(y.clone(), Repl::Var(fresh));
        }
        (pattern, inner)
    };
    let guard = subst_guard(&cl.gpat.guard, &inner);
    let body = subst_repl(&cl.body, &inner);
    Clause {
        gpat: crate::ast::GuardedPattern { pattern, guard },
        body,
        span: cl.span,
    }
}

fn subst_pattern(p: &Pattern, map: &BTreeMap<Name, Repl>) -> Pattern {
    match p {
        Pattern::Wildcard | Pattern::Bind(_) => p.clone(),
        Pattern::Val(v) => Pattern::Val(subst_value(v, map)),
        Pattern::Capture(x) => match map.get(x) {
            Some(Repl::Val(v)) => Pattern::Val(v.clone()),
            Some(Repl::Var(z)) => Pattern::Capture(z.clone()),
            None => Pattern::Capture(x.clone()),
        },
        Pattern::Pair(a, b) => Pattern::Pair(
            Box::new(subst_pattern(a, map)),
            Box::new(subst_pattern(b, map)),
        ),
    }
}

fn subst_guard(g: &Guard, map: &BTreeMap<Name, Repl>) -> Guard {
    match g {
        Guard::True | Guard::Oracle => g.clone(),
        Guard::TestVar(t, x) => match map.get(x) {
            Some(Repl::Val(v)) => Guard::TestVal(*t, v.clone()),
            Some(Repl::Var(z)) => Guard::TestVar(*t, z.clone()),
            None => Guard::TestVar(*t, x.clone()),
        },
        Guard::TestVal(t, v) => Guard::TestVal(*t, subst_value(v, map)),
        Guard::And(a, b) => Guard::And(
            Box::new(subst_guard(a, map)),
            Box::new(subst_guard(b, map)),
        ),
    }
}

fn subst_value(v: &Value, map: &BTreeMap<Name, Repl>) -> Value {
    let e = value_to_expr(v, Span::default());
    let e = subst_repl(&e, map);
    expr_to_value(&e).expect("substitution preserves value shape")
}

fn replacements_mention(map: &BTreeMap<Name, Repl>, y: &str) -> bool {
    map.values().any(|r| r.free_vars().contains(y))
}

fn fresh_name(base: &str, map: &BTreeMap<Name, Repl>, body: &Expr) -> Name {
    let mut avoid: BTreeSet<Name> = free_vars_expr(body);
    for (x, r) in map {
        avoid.insert(x.clone());
        avoid.extend(r.free_vars());
    }
    pick_fresh(base, &avoid)
}

fn fresh_clause_name(base: &str, map: &BTreeMap<Name, Repl>, p: &Pattern, body: &Expr) -> Name {
    let mut avoid: BTreeSet<Name> = free_vars_expr(body);
    avoid.extend(vars_of(p));
    for (x, r) in map {
        avoid.insert(x.clone());
        avoid.extend(r.free_vars());
    }
    pick_fresh(base, &avoid)
}

fn pick_fresh(base: &str, avoid: &BTreeSet<Name>) -> Name {
    for i in 1.. {
        let cand = format!("{base}{i}");
        if !avoid.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// Rename the binding occurrences of `old` inside a pattern (captures are
/// uses of the outer scope and stay put).
fn rename_pattern_binder(p: &Pattern, old: &str, new: &str) -> Pattern {
    match p {
        Pattern::Bind(x) if x == old => Pattern::Bind(new.to_string()),
        Pattern::Pair(a, b) => Pattern::Pair(
            Box::new(rename_pattern_binder(a, old, new)),
            Box::new(rename_pattern_binder(b, old, new)),
        ),
        _ => p.clone(),
    }
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StuckReason {
    UnboundVariable(Name),
    AppliedNonFunction,
    NoMatchingClause,
    UnboundCapture(Name),
}

impl std::fmt::Display for StuckReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StuckReason::UnboundVariable(x) => write!(f, "unbound variable `{x}`"),
            StuckReason::AppliedNonFunction => write!(f, "applied a value that is not a function"),
            StuckReason::NoMatchingClause => write!(f, "no clause matches the scrutinee"),
            StuckReason::UnboundCapture(x) => write!(f, "capture `^{x}` names no binding"),
        }
    }
}

/// Match a value against a pattern. A non-linear pattern matches only if
/// its repeated binders receive equal values. Captures compare against
/// the definition environment when substitution left them symbolic.
pub fn match_pattern(
    v: &Value,
    p: &Pattern,
    defs: &DefEnv,
) -> Result<Option<BTreeMap<Name, Value>>, StuckReason> {
    match p {
        Pattern::Wildcard => Ok(Some(BTreeMap::new())),
        Pattern::Bind(x) => Ok(Some(std::iter::once((x.clone(), v.clone())).collect())),
        Pattern::Val(w) => Ok(alpha_equal_value(v, w).then(BTreeMap::new)),
        Pattern::Capture(x) => match defs.get(x) {
            Some(w) => Ok(alpha_equal_value(v, w).then(BTreeMap::new)),
            None => Err(StuckReason::UnboundCapture(x.clone())),
        },
        Pattern::Pair(p1, p2) => {
            let Value::Pair(v1, v2) = v else {
                return Ok(None);
            };
            let Some(b1) = match_pattern(v1, p1, defs)? else {
                return Ok(None);
            };
            let Some(b2) = match_pattern(v2, p2, defs)? else {
                return Ok(None);
            };
            let mut merged = b1;
            for (x, v) in b2 {
                match merged.get(&x) {
                    Some(prev) if !alpha_equal_value(prev, &v) => return Ok(None),
                    _ => {
                        merged.insert(x, v);
                    }
                }
            }
            Ok(Some(merged))
        }
    }
}

/// Evaluate a guard under the clause's bindings. A type test looks first
/// at the bindings, then at the definitions; a variable bound by neither
/// simply fails the test.
pub fn eval_guard(
    g: &Guard,
    binds: &BTreeMap<Name, Value>,
    defs: &DefEnv,
    oracle: &mut OracleState,
) -> bool {
    match g {
        Guard::True => true,
        Guard::Oracle => oracle.next(),
        Guard::TestVar(t, x) => match binds.get(x).or_else(|| defs.get(x)) {
            Some(v) => v.models(*t),
            None => false,
        },
        Guard::TestVal(t, v) => v.models(*t),
        Guard::And(a, b) => eval_guard(a, binds, defs, oracle) && eval_guard(b, binds, defs, oracle),
    }
}

// ---------------------------------------------------------------------------
// Reduction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Done(Value),
    Next(Expr),
    Stuck(StuckReason),
}

/// One leftmost-innermost reduction step.
pub fn step(e: &Expr, defs: &DefEnv, oracle: &mut OracleState) -> Step {
    if let Some(v) = expr_to_value(e) {
        return Step::Done(v);
    }
    match &e.kind {
        ExprKind::Var(x) => match defs.get(x) {
            Some(v) => Step::Next(value_to_expr(v, e.span)),
            None => Step::Stuck(StuckReason::UnboundVariable(x.clone())),
        },
        ExprKind::Const(_) | ExprKind::Abs(..) => unreachable!("values handled above"),
        ExprKind::Pair(a, b) => {
            if expr_to_value(a).is_none() {
                narrow(a, defs, oracle, |a| {
                    ExprKind::Pair(Box::new(a), Box::new((**b).clone()))
                }, e.span)
            } else {
                narrow(b, defs, oracle, |b| {
                    ExprKind::Pair(Box::new((**a).clone()), Box::new(b))
                }, e.span)
            }
        }
        ExprKind::App(f, a) => {
            if expr_to_value(f).is_none() {
                narrow(f, defs, oracle, |f| {
                    ExprKind::App(Box::new(f), Box::new((**a).clone()))
                }, e.span)
            } else if expr_to_value(a).is_none() {
                narrow(a, defs, oracle, |a| {
                    ExprKind::App(Box::new((**f).clone()), Box::new(a))
                }, e.span)
            } else {
                let arg = expr_to_value(a).expect("checked above");
                match &f.kind {
                    ExprKind::Abs(x, body) => Step::Next(subst(body, x, &arg)),
                    _ => Step::Stuck(StuckReason::AppliedNonFunction),
                }
            }
        }
        ExprKind::Case(scrut, clauses) => {
            let Some(v) = expr_to_value(scrut) else {
                return narrow(scrut, defs, oracle, |s| {
                    ExprKind::Case(Box::new(s), clauses.clone())
                }, e.span);
            };
            for cl in clauses {
                match match_pattern(&v, &cl.gpat.pattern, defs) {
                    Err(r) => return Step::Stuck(r),
                    Ok(None) => continue,
                    Ok(Some(binds)) => {
                        if eval_guard(&cl.gpat.guard, &binds, defs, oracle) {
                            return Step::Next(subst_many(&cl.body, &binds));
                        }
                    }
                }
            }
            Step::Stuck(StuckReason::NoMatchingClause)
        }
    }
}

fn narrow(
    inner: &Expr,
    defs: &DefEnv,
    oracle: &mut OracleState,
    rebuild: impl FnOnce(Expr) -> ExprKind,
    span: Span,
) -> Step {
    match step(inner, defs, oracle) {
        Step::Next(e) => Step::Next(Expr::new(rebuild(e), span)),
        Step::Done(_) => unreachable!("non-value cannot finish in one inspection"),
        stuck => stuck,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Final(Value),
    Stuck(StuckReason),
    OutOfFuel,
}

/// Drive an expression to a value, spending one fuel per step. Reaching a
/// value on the last step still counts as finishing.
pub fn run_expr(e: Expr, defs: &DefEnv, fuel: u64, oracle: &mut OracleState) -> RunOutcome {
    let mut cur = e;
    let mut remaining = fuel;
    loop {
        if let Some(v) = expr_to_value(&cur) {
            return RunOutcome::Final(v);
        }
        if remaining == 0 {
            return RunOutcome::OutOfFuel;
        }
        remaining -= 1;
        match step(&cur, defs, oracle) {
            Step::Done(v) => return RunOutcome::Final(v),
            Step::Stuck(r) => return RunOutcome::Stuck(r),
            Step::Next(e) => cur = e,
        }
    }
}

pub fn run(prog: &Program, fuel: u64, oracle: &mut OracleState) -> RunOutcome {
    let defs = def_env(prog);
    run_expr(prog.main.clone(), &defs, fuel, oracle)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse_program, Const};
    use crate::types::TyStore;

    fn parse(src: &str) -> Program {
        let mut st = TyStore::new();
        parse_program(src, &mut st).expect("parse")
    }

    fn eval(src: &str) -> RunOutcome {
        let prog = parse(src);
        let mut oracle = OracleState::new(OracleStrategy::AlwaysTrue);
        run(&prog, 10_000, &mut oracle)
    }

    fn int(n: i64) -> Value {
        Value::Const(Const::Int(n.into()))
    }

    #[test]
    fn identity_application() {
        let out = eval("f = fun x -> x in f 1");
        assert_eq!(out, RunOutcome::Final(int(1)));
    }

    #[test]
    fn pairs_evaluate_left_to_right() {
        let prog = parse("in ((fun x -> x) 1, (fun y -> y) 2)");
        let defs = DefEnv::new();
        let mut oracle = OracleState::new(OracleStrategy::AlwaysTrue);
        let Step::Next(e1) = step(&prog.main, &defs, &mut oracle) else {
            panic!("should step");
        };
        assert_eq!(crate::ast::expr_to_string(&e1), "(1, (fun y -> y) 2)");
        let out = run_expr(e1, &defs, 100, &mut oracle);
        assert_eq!(
            out,
            RunOutcome::Final(Value::Pair(Box::new(int(1)), Box::new(int(2))))
        );
    }

    #[test]
    fn case_decomposes_pairs() {
        let out = eval("in case (1, 2) of (x, y) -> x end");
        assert_eq!(out, RunOutcome::Final(int(1)));
        let out = eval("in case (1, 2) of (x, y) -> y end");
        assert_eq!(out, RunOutcome::Final(int(2)));
    }

    #[test]
    fn clauses_try_in_order_with_guards() {
        let out = eval("in case 1 of x when is_float x -> 0; x when is_int x -> x end");
        assert_eq!(out, RunOutcome::Final(int(1)));
    }

    #[test]
    fn value_patterns_compare_constants() {
        let out = eval("in case 3 of 4 -> 0; 3 -> 1; _ -> 2 end");
        assert_eq!(out, RunOutcome::Final(int(1)));
        let out = eval("in case 2.5 of 2.5 -> 1; _ -> 0 end");
        assert_eq!(out, RunOutcome::Final(int(1)));
    }

    #[test]
    fn captures_compare_against_definitions() {
        let out = eval("g = fun y -> y in case g of ^g -> 1; _ -> 0 end");
        assert_eq!(out, RunOutcome::Final(int(1)));
        let out = eval("g = fun y -> y\nh = fun z -> (z, z)\nin case h of ^g -> 1; _ -> 0 end");
        assert_eq!(out, RunOutcome::Final(int(0)));
    }

    #[test]
    fn captures_substitute_to_value_patterns() {
        let out = eval("in (fun v -> case 3 of ^v -> 1; _ -> 0 end) 3");
        assert_eq!(out, RunOutcome::Final(int(1)));
        let out = eval("in (fun v -> case 3 of ^v -> 1; _ -> 0 end) 4");
        assert_eq!(out, RunOutcome::Final(int(0)));
    }

    #[test]
    fn guard_tests_substitute_to_value_tests() {
        let out = eval("in (fun v -> case 0 of _ when is_int v -> 7; _ -> 8 end) 2");
        assert_eq!(out, RunOutcome::Final(int(7)));
        let out = eval("in (fun v -> case 0 of _ when is_int v -> 7; _ -> 8 end) 2.5");
        assert_eq!(out, RunOutcome::Final(int(8)));
    }

    #[test]
    fn binders_shadow() {
        let out = eval("in (fun x -> fun x -> x) 1 2");
        assert_eq!(out, RunOutcome::Final(int(2)));
        let out = eval("in (fun x -> case 5 of x -> x end) 9");
        assert_eq!(out, RunOutcome::Final(int(5)));
    }

    #[test]
    fn substitution_avoids_capturing_definition_names() {
        // f's body mentions the definition `e`; the inner binder `e` must
        // not capture it.
        let src = "e = fun w -> w\nd = fun z -> e z\nin (fun f -> fun e -> f 4) d 7";
        let out = eval(src);
        assert_eq!(out, RunOutcome::Final(int(4)));
    }

    #[test]
    fn nonlinear_patterns_require_equal_parts() {
        let out = eval("in case (2, 2) of (x, x) -> x; _ -> 0 end");
        assert_eq!(out, RunOutcome::Final(int(2)));
        let out = eval("in case (1, 2) of (x, x) -> x; _ -> 0 end");
        assert_eq!(out, RunOutcome::Final(int(0)));
        // functions compare up to renaming
        let out = eval(
            "in case (fun a -> a, fun b -> b) of (f, f) -> 1; _ -> 0 end",
        );
        assert_eq!(out, RunOutcome::Final(int(1)));
    }

    #[test]
    fn oracle_strategies() {
        let src = "in case 0 of _ when oracle -> 1; _ -> 2 end";
        let prog = parse(src);
        let mut t = OracleState::new(OracleStrategy::AlwaysTrue);
        assert_eq!(run(&prog, 100, &mut t), RunOutcome::Final(int(1)));
        let mut f = OracleState::new(OracleStrategy::AlwaysFalse);
        assert_eq!(run(&prog, 100, &mut f), RunOutcome::Final(int(2)));
        let mut s1 = OracleState::new(OracleStrategy::Seeded(7));
        let mut s2 = OracleState::new(OracleStrategy::Seeded(7));
        let r1 = run(&prog, 100, &mut s1);
        let r2 = run(&prog, 100, &mut s2);
        assert_eq!(r1, r2);
        assert_eq!(s1.draws(), s2.draws());
    }

    #[test]
    fn guards_short_circuit() {
        let src = "in case 0 of _ when oracle, oracle -> 1; _ -> 2 end";
        let prog = parse(src);
        let mut f = OracleState::new(OracleStrategy::AlwaysFalse);
        assert_eq!(run(&prog, 100, &mut f), RunOutcome::Final(int(2)));
        assert_eq!(f.draws(), 1);
        let mut t = OracleState::new(OracleStrategy::AlwaysTrue);
        assert_eq!(run(&prog, 100, &mut t), RunOutcome::Final(int(1)));
        assert_eq!(t.draws(), 2);
    }

    #[test]
    fn unbound_guard_variables_fail_quietly() {
        let out = eval("in case 0 of _ when is_int nobody -> 1; _ -> 2 end");
        assert_eq!(out, RunOutcome::Final(int(2)));
    }

    #[test]
    fn recursion_through_definitions() {
        // sum over a 0-terminated list encoded with pairs
        let src = "sum = fun l -> case l of 0 -> 0; (x, rest) -> sum rest end\n\
                   in sum (1, (2, (3, 0)))";
        let out = eval(src);
        assert_eq!(out, RunOutcome::Final(int(0)));
    }

    #[test]
    fn stuck_states() {
        assert_eq!(
            eval("in nobody"),
            RunOutcome::Stuck(StuckReason::UnboundVariable("nobody".into()))
        );
        assert_eq!(
            eval("in 1 2"),
            RunOutcome::Stuck(StuckReason::AppliedNonFunction)
        );
        assert_eq!(
            eval("in case 5 of 6 -> 0 end"),
            RunOutcome::Stuck(StuckReason::NoMatchingClause)
        );
        assert_eq!(
            eval("in case 1 of ^nope -> 0; _ -> 1 end"),
            RunOutcome::Stuck(StuckReason::UnboundCapture("nope".into()))
        );
    }

    #[test]
    fn fuel_runs_out_on_divergence() {
        let out = eval("w = fun x -> x x in w w");
        assert_eq!(out, RunOutcome::OutOfFuel);
    }

    #[test]
    fn fuel_boundary_still_accepts_a_value() {
        let prog = parse("in (fun x -> x) 1");
        let defs = DefEnv::new();
        let mut oracle = OracleState::new(OracleStrategy::AlwaysTrue);
        // one step reaches the value `1`; zero remaining fuel must still
        // report it
        let out = run_expr(prog.main.clone(), &defs, 1, &mut oracle);
        assert_eq!(out, RunOutcome::Final(int(1)));
    }
}
