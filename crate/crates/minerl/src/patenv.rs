//! Typing of guarded patterns: the environments they bind and the
//! upper/lower approximations of the scrutinee values they accept.
//!
//! The upper approximation of a guarded pattern contains every value the
//! clause might accept; the lower approximation only values it is
//! guaranteed to accept. Guards drag the two apart: an `oracle` can always
//! decline, a type test on an outer variable depends on state the
//! scrutinee does not determine, and a capture compares against a value
//! unknown to the type system, so each of those collapses the lower
//! approximation while leaving the upper one generous.

use std::collections::BTreeMap;

use crate::ast::{is_linear, vars_of, Const, Guard, GuardedPattern, Name, Pattern, Value};
use crate::subty::{is_empty, proj1, proj2, NotAPairType};
use crate::types::{Ty, TyStore};

pub type TypeEnv = BTreeMap<Name, Ty>;

/// Which approximation of accepted values is being computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approx {
    Up,
    Down,
}

/// Pointwise meet of two environments: variables present on both sides
/// intersect, the rest pass through.
pub fn inter_env(st: &mut TyStore, a: &TypeEnv, b: &TypeEnv) -> TypeEnv {
    let mut out = a.clone();
    for (x, &t) in b {
        match out.get(x) {
            Some(&prev) => {
                let met = st.mk_inter(prev, t);
                out.insert(x.clone(), met);
            }
            None => {
                out.insert(x.clone(), t);
            }
        }
    }
    out
}

/// Variable refinements a guard provides when it passes: each dynamic
/// type test pins its subject to the tested kind. Tests on values and the
/// boolean atoms refine nothing.
pub fn guard_env(st: &mut TyStore, g: &Guard) -> TypeEnv {
    let mut out = TypeEnv::new();
    collect_guard_env(st, g, &mut out);
    out
}

fn collect_guard_env(st: &mut TyStore, g: &Guard, out: &mut TypeEnv) {
    match g {
        Guard::True | Guard::Oracle | Guard::TestVal(..) => {}
        Guard::TestVar(gt, x) => {
            let t = st.ty_of_guardty(*gt);
            match out.get(x) {
                Some(&prev) => {
                    let met = st.mk_inter(prev, t);
                    out.insert(x.clone(), met);
                }
                None => {
                    out.insert(x.clone(), t);
                }
            }
        }
        Guard::And(a, b) => {
            collect_guard_env(st, a, out);
            collect_guard_env(st, b, out);
        }
    }
}

/// Environment a pattern binds when matching a value of type `t`: binders
/// take the projection of `t` along their path. Fails when a pair pattern
/// meets a type that admits non-pairs.
pub fn pat_env(st: &mut TyStore, t: Ty, p: &Pattern) -> Result<TypeEnv, NotAPairType> {
    match p {
        Pattern::Wildcard | Pattern::Val(_) | Pattern::Capture(_) => Ok(TypeEnv::new()),
        Pattern::Bind(x) => Ok(std::iter::once((x.clone(), t)).collect()),
        Pattern::Pair(p1, p2) => {
            let t1 = proj1(st, t)?;
            let t2 = proj2(st, t)?;
            let e1 = pat_env(st, t1, p1)?;
            let e2 = pat_env(st, t2, p2)?;
            Ok(inter_env(st, &e1, &e2))
        }
    }
}

/// Environment of a guarded pattern against scrutinee type `t`: the
/// pattern's bindings met with the guard's refinements. Refinements of
/// variables bound outside the pattern stay in the result, narrowing the
/// outer environment inside the clause.
pub fn gpat_env(st: &mut TyStore, t: Ty, pg: &GuardedPattern) -> Result<TypeEnv, NotAPairType> {
    let pe = pat_env(st, t, &pg.pattern)?;
    let ge = guard_env(st, &pg.guard);
    Ok(inter_env(st, &pe, &ge))
}

/// Can the guard evaluate to true at all?
pub fn safe_up(g: &Guard) -> bool {
    match g {
        Guard::True | Guard::Oracle | Guard::TestVar(..) => true,
        Guard::TestVal(gt, v) => v.models(*gt),
        Guard::And(a, b) => safe_up(a) && safe_up(b),
    }
}

/// Is the guard guaranteed to pass whenever the pattern alone matched?
/// `bound` holds the pattern's binders: a test on one of them is decided
/// by the scrutinee, so the approximations absorb it; anything else can
/// fail for reasons the scrutinee does not control.
pub fn safe_down(g: &Guard, bound: &std::collections::BTreeSet<Name>) -> bool {
    match g {
        Guard::True => true,
        Guard::Oracle => false,
        Guard::TestVar(_, x) => bound.contains(x),
        Guard::TestVal(gt, v) => v.models(*gt),
        Guard::And(a, b) => safe_down(a, bound) && safe_down(b, bound),
    }
}

/// Values a bare pattern accepts, with binder types read from `env` (the
/// guard's refinements). Captures and non-integer constants split the
/// modes: the upper bound stays generous, the lower bound gives up.
pub fn pat_ty(st: &mut TyStore, p: &Pattern, env: &TypeEnv, mode: Approx) -> Ty {
    match p {
        Pattern::Wildcard => st.top(),
        Pattern::Bind(x) => env.get(x).copied().unwrap_or_else(|| st.top()),
        Pattern::Capture(_) => match mode {
            Approx::Up => st.top(),
            Approx::Down => st.bottom(),
        },
        Pattern::Val(Value::Const(Const::Int(n))) => st.mk_int_lit(n.clone()),
        Pattern::Val(Value::Const(Const::Float(_))) => match mode {
            Approx::Up => st.mk_float(),
            Approx::Down => st.bottom(),
        },
        Pattern::Val(_) => match mode {
            Approx::Up => st.top(),
            Approx::Down => st.bottom(),
        },
        Pattern::Pair(p1, p2) => {
            let t1 = pat_ty(st, p1, env, mode);
            let t2 = pat_ty(st, p2, env, mode);
            st.mk_pair(t1, t2)
        }
    }
}

/// Upper or lower approximation of the scrutinee values a guarded pattern
/// accepts.
pub fn gpat_ty(st: &mut TyStore, pg: &GuardedPattern, mode: Approx) -> Ty {
    let env = guard_env(st, &pg.guard);
    match mode {
        Approx::Up => {
            if !safe_up(&pg.guard) || env.values().any(|&t| is_empty(st, t)) {
                return st.bottom();
            }
            pat_ty(st, &pg.pattern, &env, Approx::Up)
        }
        Approx::Down => {
            let bound = vars_of(&pg.pattern);
            if !safe_down(&pg.guard, &bound) || !is_linear(&pg.pattern) {
                return st.bottom();
            }
            pat_ty(st, &pg.pattern, &env, Approx::Down)
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse_program, parse_type, ExprKind};
    use crate::subty::is_equiv;

    /// Guarded pattern of the first clause in `case z of <src> end`.
    fn gpat(st: &mut TyStore, src: &str) -> GuardedPattern {
        let prog = parse_program(&format!("in case z of {src} -> 0 end"), st).unwrap();
        match &prog.main.kind {
            ExprKind::Case(_, clauses) => clauses[0].gpat.clone(),
            _ => unreachable!(),
        }
    }

    fn ty(st: &mut TyStore, src: &str) -> Ty {
        parse_type(src, st).unwrap()
    }

    #[test]
    fn guard_envs_accumulate_tests() {
        let st = &mut TyStore::new();
        let pg = gpat(st, "x when is_int x");
        let env = guard_env(st, &pg.guard);
        let int = st.mk_int();
        assert_eq!(env.get("x"), Some(&int));

        let pg = gpat(st, "x when is_int x, is_float x");
        let env = guard_env(st, &pg.guard);
        assert!(is_empty(st, env["x"]));

        let pg = gpat(st, "p when is_pair p, oracle");
        let env = guard_env(st, &pg.guard);
        let pt = ty(st, "(Any, Any)");
        assert_eq!(env.get("p"), Some(&pt));
    }

    #[test]
    fn inter_env_meets_shared_names() {
        let st = &mut TyStore::new();
        let int = st.mk_int();
        let float = st.mk_float();
        let u = st.mk_union(int, float);
        let a: TypeEnv = [("x".to_string(), u), ("y".to_string(), int)].into();
        let b: TypeEnv = [("x".to_string(), int), ("z".to_string(), float)].into();
        let m = inter_env(st, &a, &b);
        assert!(is_equiv(st, m["x"], int));
        assert_eq!(m["y"], int);
        assert_eq!(m["z"], float);
    }

    #[test]
    fn pat_env_projects_components() {
        let st = &mut TyStore::new();
        let t = ty(st, "(0, Int) | (1, Float)");
        let prog = parse_program("in case z of (x, y) -> 0 end", st).unwrap();
        let p = match &prog.main.kind {
            ExprKind::Case(_, cl) => cl[0].gpat.pattern.clone(),
            _ => unreachable!(),
        };
        let env = pat_env(st, t, &p).unwrap();
        let zx = ty(st, "0 | 1");
        let yf = ty(st, "Int | Float");
        assert!(is_equiv(st, env["x"], zx));
        assert!(is_equiv(st, env["y"], yf));
    }

    #[test]
    fn pat_env_fails_on_non_pairs() {
        let st = &mut TyStore::new();
        let t = ty(st, "Int | (Int, Int)");
        let pg = gpat(st, "(x, y)");
        let err = pat_env(st, t, &pg.pattern).unwrap_err();
        assert_eq!(err.0, t);
    }

    #[test]
    fn pat_env_ignores_non_binders() {
        let st = &mut TyStore::new();
        let int = st.mk_int();
        let pg = gpat(st, "_");
        assert!(pat_env(st, int, &pg.pattern).unwrap().is_empty());
        let pg = gpat(st, "^x");
        assert!(pat_env(st, int, &pg.pattern).unwrap().is_empty());
        let pg = gpat(st, "7");
        assert!(pat_env(st, int, &pg.pattern).unwrap().is_empty());
    }

    #[test]
    fn gpat_env_refines_pattern_and_outer_vars() {
        let st = &mut TyStore::new();
        let t = ty(st, "Int | Float");
        let pg = gpat(st, "x when is_int x");
        let env = gpat_env(st, t, &pg).unwrap();
        let int = st.mk_int();
        assert!(is_equiv(st, env["x"], int));

        let pg = gpat(st, "x when is_float w");
        let env = gpat_env(st, t, &pg).unwrap();
        let float = st.mk_float();
        assert_eq!(env["w"], float);
        assert_eq!(env["x"], t);
    }

    #[test]
    fn approximations_of_plain_patterns() {
        let st = &mut TyStore::new();
        let top = st.top();
        let bot = st.bottom();

        let pg = gpat(st, "_");
        assert_eq!(gpat_ty(st, &pg, Approx::Up), top);
        assert_eq!(gpat_ty(st, &pg, Approx::Down), top);

        let pg = gpat(st, "5");
        let five = st.mk_int_lit(5);
        assert_eq!(gpat_ty(st, &pg, Approx::Up), five);
        assert_eq!(gpat_ty(st, &pg, Approx::Down), five);

        let pg = gpat(st, "1.5");
        let float = st.mk_float();
        assert_eq!(gpat_ty(st, &pg, Approx::Up), float);
        assert_eq!(gpat_ty(st, &pg, Approx::Down), bot);

        let pg = gpat(st, "^x");
        assert_eq!(gpat_ty(st, &pg, Approx::Up), top);
        assert_eq!(gpat_ty(st, &pg, Approx::Down), bot);
    }

    #[test]
    fn approximations_of_guarded_patterns() {
        let st = &mut TyStore::new();
        let top = st.top();
        let bot = st.bottom();
        let int = st.mk_int();

        let pg = gpat(st, "x when is_int x");
        assert_eq!(gpat_ty(st, &pg, Approx::Up), int);
        assert_eq!(gpat_ty(st, &pg, Approx::Down), int);

        let pg = gpat(st, "x when oracle");
        assert_eq!(gpat_ty(st, &pg, Approx::Up), top);
        assert_eq!(gpat_ty(st, &pg, Approx::Down), bot);

        // a test on an outer variable cannot be guaranteed by the scrutinee
        let pg = gpat(st, "x when is_int w");
        assert_eq!(gpat_ty(st, &pg, Approx::Up), top);
        assert_eq!(gpat_ty(st, &pg, Approx::Down), bot);

        // contradictory tests kill the clause entirely
        let pg = gpat(st, "x when is_int x, is_float x");
        let up = gpat_ty(st, &pg, Approx::Up);
        assert!(is_empty(st, up));
    }

    #[test]
    fn approximations_of_pair_patterns() {
        let st = &mut TyStore::new();
        let pg = gpat(st, "(x, _) when is_float x");
        let up = gpat_ty(st, &pg, Approx::Up);
        let expect = ty(st, "(Float, Any)");
        assert_eq!(up, expect);
        let down = gpat_ty(st, &pg, Approx::Down);
        assert_eq!(down, expect);

        // a capture in one component wrecks only the lower bound
        let pg = gpat(st, "(x, ^v) when is_int x");
        let up = gpat_ty(st, &pg, Approx::Up);
        let expect_up = ty(st, "(Int, Any)");
        assert_eq!(up, expect_up);
        let down = gpat_ty(st, &pg, Approx::Down);
        assert!(is_empty(st, down));
    }

    #[test]
    fn nonlinear_patterns_have_no_lower_bound() {
        let st = &mut TyStore::new();
        let pg = gpat(st, "(x, x)");
        let up = gpat_ty(st, &pg, Approx::Up);
        let expect = ty(st, "(Any, Any)");
        assert_eq!(up, expect);
        let down = gpat_ty(st, &pg, Approx::Down);
        assert!(is_empty(st, down));
    }
}
