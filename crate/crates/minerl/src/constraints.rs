//! Constraints tying expressions to types.
//!
//! Generation walks the program and produces constraints over fresh type
//! variables without consulting any environment; variables are recorded
//! symbolically (`VarSub`). Rewriting then eliminates expression
//! variables against a monomorphic environment and a scheme environment,
//! leaving simple constraints: subtyping atoms combined with conjunction
//! and, for case branches, disjunction ("the branch typechecks, or it is
//! dead"). The solver consumes simple constraints only.
//!
//! Every subtyping atom carries an origin (source span plus the syntactic
//! role that demanded it) so failures can be blamed on a location.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{free_vars_gpat, Clause, Expr, ExprKind, GuardedPattern, Name, Pattern, Program, Span};
use crate::patenv::{self, Approx, TypeEnv};
use crate::subty::dnf;
use crate::types::{Ty, TyNode, TyScheme, TyStore, TySubst, TyVar};

// ---------------------------------------------------------------------------
// Origins
// ---------------------------------------------------------------------------

/// Syntactic role that demanded a subtyping atom; used to word diagnostics
/// and to recognize strippable exhaustiveness conjuncts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Role {
    Constant,
    Variable(Name),
    Function,
    PairSite,
    CaseResult,
    Scrutinee,
    GuardScope(Name),
    Exhaustiveness,
    Annotation(Name),
    Expected,
    Stability,
    Deadness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub span: Span,
    pub role: Role,
}

impl Origin {
    pub fn new(span: Span, role: Role) -> Origin {
        Origin { span, role }
    }
}

/// A case branch's identity: clause span plus its index in the case.
/// Intersection annotations type a body once per arrow, so the same site
/// can occur several times in one rewritten constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub span: Span,
    pub index: usize,
}

// ---------------------------------------------------------------------------
// Constraint languages
// ---------------------------------------------------------------------------

/// Generated constraints; may mention expression variables (`VarSub`) and
/// scoped definitions, which rewriting eliminates.
#[derive(Debug, Clone)]
pub enum Constraint {
    /// lhs must be a subtype of rhs.
    Sub { lhs: Ty, rhs: Ty, origin: Origin },
    /// The type of expression variable `var` must be a subtype of `rhs`.
    VarSub { var: Name, rhs: Ty, origin: Origin },
    And(Vec<Constraint>),
    /// Monomorphic bindings scoping `inner`.
    Def { bindings: Vec<(Name, Ty)>, inner: Box<Constraint> },
    /// Case expression: the scrutiny conjunct holds unconditionally, each
    /// branch either typechecks under its pattern environment or is dead.
    Case { scrutiny: Box<Constraint>, branches: Vec<Branch> },
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub site: Site,
    /// The branch is dead when `scrut_var` ≤ `dead_when`.
    pub scrut_var: Ty,
    pub dead_when: Ty,
    /// Pattern bindings and guard refinements for the branch body.
    pub env: TypeEnv,
    pub body: Box<Constraint>,
}

/// Rewritten constraints: no expression variables left.
#[derive(Debug, Clone)]
pub enum SimpleConstraint {
    Sub { lhs: Ty, rhs: Ty, origin: Origin },
    And(Vec<SimpleConstraint>),
    /// Dead-branch test or live-branch body; exactly one must hold.
    Or { dead: Box<SimpleConstraint>, live: Box<SimpleConstraint> },
}

impl SimpleConstraint {
    pub fn truth() -> SimpleConstraint {
        SimpleConstraint::And(Vec::new())
    }
}

/// Dead-branch test recorded while rewriting, evaluated against the final
/// substitution to report unreachable branches.
#[derive(Debug, Clone)]
pub struct BranchTest {
    pub site: Site,
    pub scrut_var: Ty,
    pub dead_when: Ty,
}

pub type SchemeEnv = BTreeMap<Name, TyScheme>;

/// One definition's constraint. Unreachable-branch reporting applies to
/// annotated definitions only, so the flag travels with the constraint.
#[derive(Debug, Clone)]
pub struct DefPart {
    pub name: Name,
    pub annotated: bool,
    pub constraint: Constraint,
}

/// Whole-program constraint: definitions first, then the main expression
/// under the solved-and-generalized scheme environment.
#[derive(Debug, Clone)]
pub struct ProgConstraint {
    pub def_parts: Vec<DefPart>,
    pub env: SchemeEnv,
    pub main_constraint: Constraint,
    /// Type the main expression was generated at.
    pub main_ty: Ty,
    /// Annotation variables: quantified in some definition's scheme, kept
    /// rigid while solving.
    pub rigid: BTreeSet<TyVar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenError {
    pub name: Name,
    pub span: Span,
    pub message: String,
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct Gen<'a> {
    st: &'a mut TyStore,
    /// Suppress exhaustiveness conjuncts (per-definition pragma or global
    /// flag).
    skip_exhaustiveness: bool,
}

impl<'a> Gen<'a> {
    fn fresh(&mut self, hint: &str) -> Ty {
        let v = self.st.fresh_var(hint);
        self.st.mk_var(v)
    }

    fn gen_expr(&mut self, e: &Expr, want: Ty) -> Constraint {
        match &e.kind {
            ExprKind::Var(x) => Constraint::VarSub {
                var: x.clone(),
                rhs: want,
                origin: Origin::new(e.span, Role::Variable(x.clone())),
            },
            ExprKind::Const(c) => {
                let lhs = self.st.ty_of_const(c);
                Constraint::Sub { lhs, rhs: want, origin: Origin::new(e.span, Role::Constant) }
            }
            ExprKind::Abs(x, body) => {
                let dom = self.fresh("dom");
                let cod = self.fresh("cod");
                let inner = self.gen_expr(body, cod);
                let arrow = self.st.mk_arrow(dom, cod);
                Constraint::And(vec![
                    Constraint::Def {
                        bindings: vec![(x.clone(), dom)],
                        inner: Box::new(inner),
                    },
                    Constraint::Sub { lhs: arrow, rhs: want, origin: Origin::new(e.span, Role::Function) },
                ])
            }
            ExprKind::App(f, a) => {
                let arg = self.fresh("arg");
                let arrow = self.st.mk_arrow(arg, want);
                let cf = self.gen_expr(f, arrow);
                let ca = self.gen_expr(a, arg);
                Constraint::And(vec![cf, ca])
            }
            ExprKind::Pair(a, b) => {
                let t1 = self.fresh("fst");
                let t2 = self.fresh("snd");
                let c1 = self.gen_expr(a, t1);
                let c2 = self.gen_expr(b, t2);
                let pair = self.st.mk_pair(t1, t2);
                Constraint::And(vec![
                    c1,
                    c2,
                    Constraint::Sub { lhs: pair, rhs: want, origin: Origin::new(e.span, Role::PairSite) },
                ])
            }
            ExprKind::Case(scrut, clauses) => self.gen_case(e.span, scrut, clauses, want),
        }
    }

    fn gen_case(&mut self, span: Span, scrut: &Expr, clauses: &[Clause], want: Ty) -> Constraint {
        let alpha = self.fresh("scr");
        let beta = self.fresh("res");
        let scrut_c = self.gen_expr(scrut, alpha);

        let mut scrutiny = vec![scrut_c];
        let mut branches = Vec::new();
        // Union of the accepting types of the clauses seen so far: values
        // in it are guaranteed to be consumed before reaching the current
        // clause.
        let mut matched = self.st.bottom();
        for (index, clause) in clauses.iter().enumerate() {
            let upper = patenv::gpat_ty(self.st, &clause.gpat, Approx::Up);
            let lower = patenv::gpat_ty(self.st, &clause.gpat, Approx::Down);
            let through = self.st.mk_diff(alpha, matched);
            let narrowed = self.st.mk_inter(through, upper);
            let (pat_c, env) = self.gen_pat_env(narrowed, &clause.gpat, clause.span);
            let body = self.gen_expr(&clause.body, beta);
            let not_upper = self.st.mk_neg(upper);
            let dead_when = self.st.mk_union(matched, not_upper);
            scrutiny.push(pat_c);
            branches.push(Branch {
                site: Site { span: clause.span, index },
                scrut_var: alpha,
                dead_when,
                env,
                body: Box::new(body),
            });
            matched = self.st.mk_union(matched, lower);
        }
        if !self.skip_exhaustiveness {
            scrutiny.push(Constraint::Sub {
                lhs: alpha,
                rhs: matched,
                origin: Origin::new(span, Role::Exhaustiveness),
            });
        }
        Constraint::And(vec![
            Constraint::Case {
                scrutiny: Box::new(Constraint::And(scrutiny)),
                branches,
            },
            Constraint::Sub { lhs: beta, rhs: want, origin: Origin::new(span, Role::CaseResult) },
        ])
    }

    /// Environment and constraints a guarded pattern imposes when matched
    /// against a scrutinee of type `t`: pattern bindings through fresh
    /// component variables, guard refinements intersected in, and a scope
    /// check for every free variable of the guarded pattern.
    fn gen_pat_env(&mut self, t: Ty, pg: &GuardedPattern, span: Span) -> (Constraint, TypeEnv) {
        let (pat_c, pat_env) = self.gen_pat(t, &pg.pattern, span);
        let guard_env = patenv::guard_env(self.st, &pg.guard);
        let env = patenv::inter_env(self.st, &pat_env, &guard_env);
        let mut parts = vec![pat_c];
        let top = self.st.top();
        for x in free_vars_gpat(pg) {
            parts.push(Constraint::VarSub {
                var: x.clone(),
                rhs: top,
                origin: Origin::new(span, Role::GuardScope(x)),
            });
        }
        (Constraint::And(parts), env)
    }

    fn gen_pat(&mut self, t: Ty, p: &Pattern, span: Span) -> (Constraint, TypeEnv) {
        match p {
            Pattern::Wildcard | Pattern::Val(_) | Pattern::Capture(_) => {
                (Constraint::And(Vec::new()), TypeEnv::new())
            }
            Pattern::Bind(x) => {
                let mut env = TypeEnv::new();
                env.insert(x.clone(), t);
                (Constraint::And(Vec::new()), env)
            }
            Pattern::Pair(p1, p2) => {
                let a1 = self.fresh("p1");
                let a2 = self.fresh("p2");
                let (c1, e1) = self.gen_pat(a1, p1, span);
                let (c2, e2) = self.gen_pat(a2, p2, span);
                let pair = self.st.mk_pair(a1, a2);
                let env = patenv::inter_env(self.st, &e1, &e2);
                let c = Constraint::And(vec![
                    c1,
                    c2,
                    Constraint::Sub { lhs: t, rhs: pair, origin: Origin::new(span, Role::Scrutinee) },
                ]);
                (c, env)
            }
        }
    }
}

/// Recover the conjuncts of an annotation that must be an intersection of
/// arrows: a single all-positive-arrow line in disjunctive normal form.
pub fn annotation_arrows(st: &mut TyStore, body: Ty) -> Option<Vec<(Ty, Ty)>> {
    let lines = dnf(st, body);
    if lines.len() != 1 {
        return None;
    }
    let line = &lines[0];
    if !line.neg.is_empty() || line.pos.is_empty() {
        return None;
    }
    let mut arrows = Vec::new();
    for &a in &line.pos {
        match *st.node(a) {
            TyNode::Arrow(d, c) => arrows.push((d, c)),
            _ => return None,
        }
    }
    Some(arrows)
}

/// Constraint and scheme entry for one definition. Annotated definitions
/// are checked once per arrow of the intersection, each time binding the
/// parameter at that arrow's domain.
pub fn gen_def(
    st: &mut TyStore,
    def: &crate::ast::Def,
    global_no_exhaustiveness: bool,
) -> Result<(Constraint, TyScheme), GenError> {
    let mut g = Gen {
        st,
        skip_exhaustiveness: global_no_exhaustiveness || def.no_exhaustiveness,
    };
    match &def.scheme {
        None => {
            let alpha = g.fresh("d");
            let lambda = def.lambda();
            let c = g.gen_expr(&lambda, alpha);
            Ok((c, TyScheme::mono(alpha)))
        }
        Some(scheme) => {
            let free = g.st.free_ty_vars(scheme.body);
            if !free.iter().all(|v| scheme.vars.contains(v)) {
                return Err(GenError {
                    name: def.name.clone(),
                    span: def.span,
                    message: format!(
                        "annotation of `{}` mentions type variables that are not quantified",
                        def.name
                    ),
                });
            }
            let Some(arrows) = annotation_arrows(g.st, scheme.body) else {
                return Err(GenError {
                    name: def.name.clone(),
                    span: def.span,
                    message: format!(
                        "annotation of `{}` must be an intersection of arrow types",
                        def.name
                    ),
                });
            };
            let mut parts = Vec::new();
            for (dom, cod) in arrows {
                let inner = g.gen_expr(&def.body, cod);
                parts.push(Constraint::Def {
                    bindings: vec![(def.binder.clone(), dom)],
                    inner: Box::new(inner),
                });
            }
            Ok((Constraint::And(parts), scheme.clone()))
        }
    }
}

pub fn gen_program(
    st: &mut TyStore,
    prog: &Program,
    want: Ty,
    global_no_exhaustiveness: bool,
) -> Result<ProgConstraint, GenError> {
    let mut def_parts = Vec::new();
    let mut env = SchemeEnv::new();
    let mut rigid = BTreeSet::new();
    for def in &prog.defs {
        let (c, scheme) = gen_def(st, def, global_no_exhaustiveness)?;
        rigid.extend(scheme.vars.iter().copied());
        def_parts.push(DefPart {
            name: def.name.clone(),
            annotated: def.scheme.is_some(),
            constraint: c,
        });
        env.insert(def.name.clone(), scheme);
    }
    let mut g = Gen { st, skip_exhaustiveness: global_no_exhaustiveness };
    let main_constraint = g.gen_expr(&prog.main, want);
    Ok(ProgConstraint { def_parts, env, main_constraint, main_ty: want, rigid })
}

// ---------------------------------------------------------------------------
// Rewriting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RewriteError {
    /// Variable bound in neither environment.
    Unbound { name: Name, span: Span },
    /// Variable bound in both environments; the rewriting rules demand
    /// exactly one.
    Ambiguous { name: Name, span: Span },
}

/// Eliminate expression variables: monomorphic bindings resolve through
/// `gamma`, top-level schemes instantiate fresh through `sigma`. Dead-branch
/// tests are appended to `records` for the unreachability report.
pub fn rewrite(
    st: &mut TyStore,
    c: &Constraint,
    sigma: &SchemeEnv,
    gamma: &TypeEnv,
    records: &mut Vec<BranchTest>,
) -> Result<SimpleConstraint, RewriteError> {
    match c {
        Constraint::Sub { lhs, rhs, origin } => Ok(SimpleConstraint::Sub {
            lhs: *lhs,
            rhs: *rhs,
            origin: origin.clone(),
        }),
        Constraint::VarSub { var, rhs, origin } => {
            match (gamma.get(var), sigma.get(var)) {
                (Some(&t), None) => Ok(SimpleConstraint::Sub { lhs: t, rhs: *rhs, origin: origin.clone() }),
                (None, Some(scheme)) => {
                    let scheme = scheme.clone();
                    let (body, _) = st.instantiate(&scheme);
                    Ok(SimpleConstraint::Sub { lhs: body, rhs: *rhs, origin: origin.clone() })
                }
                (None, None) => Err(RewriteError::Unbound { name: var.clone(), span: origin.span }),
                (Some(_), Some(_)) => Err(RewriteError::Ambiguous { name: var.clone(), span: origin.span }),
            }
        }
        Constraint::And(parts) => {
            let mut out = Vec::with_capacity(parts.len());
            for p in parts {
                out.push(rewrite(st, p, sigma, gamma, records)?);
            }
            Ok(SimpleConstraint::And(out))
        }
        Constraint::Def { bindings, inner } => {
            let mut extended = gamma.clone();
            for (x, t) in bindings {
                extended.insert(x.clone(), *t);
            }
            rewrite(st, inner, sigma, &extended, records)
        }
        Constraint::Case { scrutiny, branches } => {
            let mut out = vec![rewrite(st, scrutiny, sigma, gamma, records)?];
            for b in branches {
                records.push(BranchTest {
                    site: b.site,
                    scrut_var: b.scrut_var,
                    dead_when: b.dead_when,
                });
                let dead = SimpleConstraint::Sub {
                    lhs: b.scrut_var,
                    rhs: b.dead_when,
                    origin: Origin::new(b.site.span, Role::Deadness),
                };
                let branch_gamma = patenv::inter_env(st, gamma, &b.env);
                let live = rewrite(st, &b.body, sigma, &branch_gamma, records)?;
                out.push(SimpleConstraint::Or { dead: Box::new(dead), live: Box::new(live) });
            }
            Ok(SimpleConstraint::And(out))
        }
    }
}

/// Generalize a scheme environment: unquantified schemes close over all
/// their free variables, quantified (annotation) schemes stay as written.
pub fn generalize_env(st: &mut TyStore, env: &SchemeEnv) -> SchemeEnv {
    env.iter()
        .map(|(x, sc)| {
            let sc = if sc.vars.is_empty() { st.generalize(sc.body) } else { sc.clone() };
            (x.clone(), sc)
        })
        .collect()
}

/// Constrain a substitution's bindings to stay fixed: α ≤ αθ and αθ ≤ α
/// for every α it binds.
pub fn equiv_constraint(st: &mut TyStore, theta: &TySubst) -> SimpleConstraint {
    let mut parts = Vec::new();
    for (&v, &img) in theta {
        let var = st.mk_var(v);
        let origin = Origin::new(Span::default(), Role::Stability);
        parts.push(SimpleConstraint::Sub { lhs: var, rhs: img, origin: origin.clone() });
        parts.push(SimpleConstraint::Sub { lhs: img, rhs: var, origin });
    }
    SimpleConstraint::And(parts)
}

/// Drop exhaustiveness conjuncts (used to re-check a failing program and
/// tell "non-exhaustive match" apart from a plain type error).
pub fn strip_exhaustiveness(c: &SimpleConstraint) -> SimpleConstraint {
    match c {
        SimpleConstraint::Sub { origin, .. } if origin.role == Role::Exhaustiveness => {
            SimpleConstraint::truth()
        }
        SimpleConstraint::Sub { .. } => c.clone(),
        SimpleConstraint::And(parts) => {
            SimpleConstraint::And(parts.iter().map(strip_exhaustiveness).collect())
        }
        SimpleConstraint::Or { dead, live } => SimpleConstraint::Or {
            dead: Box::new(strip_exhaustiveness(dead)),
            live: Box::new(strip_exhaustiveness(live)),
        },
    }
}

/// Exhaustiveness conjuncts present in a rewritten constraint:
/// (case span, scrutinee variable, union of accepting types).
pub fn exhaustiveness_sites(c: &SimpleConstraint, out: &mut Vec<(Span, Ty, Ty)>) {
    match c {
        SimpleConstraint::Sub { lhs, rhs, origin } if origin.role == Role::Exhaustiveness => {
            out.push((origin.span, *lhs, *rhs));
        }
        SimpleConstraint::Sub { .. } => {}
        SimpleConstraint::And(parts) => {
            for p in parts {
                exhaustiveness_sites(p, out);
            }
        }
        SimpleConstraint::Or { dead, live } => {
            exhaustiveness_sites(dead, out);
            exhaustiveness_sites(live, out);
        }
    }
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

pub fn constraint_sexpr(st: &TyStore, c: &Constraint) -> String {
    let mut s = String::new();
    sexpr_gen(st, c, &mut s);
    s
}

fn sexpr_gen(st: &TyStore, c: &Constraint, out: &mut String) {
    match c {
        Constraint::Sub { lhs, rhs, .. } => {
            out.push_str(&format!("(sub {} {})", st.ty_to_string(*lhs), st.ty_to_string(*rhs)));
        }
        Constraint::VarSub { var, rhs, .. } => {
            out.push_str(&format!("(var {} {})", var, st.ty_to_string(*rhs)));
        }
        Constraint::And(parts) => {
            out.push_str("(and");
            for p in parts {
                out.push(' ');
                sexpr_gen(st, p, out);
            }
            out.push(')');
        }
        Constraint::Def { bindings, inner } => {
            out.push_str("(def (");
            for (i, (x, t)) in bindings.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&format!("({} {})", x, st.ty_to_string(*t)));
            }
            out.push_str(") ");
            sexpr_gen(st, inner, out);
            out.push(')');
        }
        Constraint::Case { scrutiny, branches } => {
            out.push_str("(case ");
            sexpr_gen(st, scrutiny, out);
            for b in branches {
                out.push_str(&format!(
                    " (branch {} (unless (sub {} {})) (env",
                    b.site.index,
                    st.ty_to_string(b.scrut_var),
                    st.ty_to_string(b.dead_when)
                ));
                for (x, t) in &b.env {
                    out.push_str(&format!(" ({} {})", x, st.ty_to_string(*t)));
                }
                out.push_str(") ");
                sexpr_gen(st, &b.body, out);
                out.push(')');
            }
            out.push(')');
        }
    }
}

pub fn simple_sexpr(st: &TyStore, c: &SimpleConstraint) -> String {
    let mut s = String::new();
    sexpr_simple(st, c, &mut s);
    s
}

fn sexpr_simple(st: &TyStore, c: &SimpleConstraint, out: &mut String) {
    match c {
        SimpleConstraint::Sub { lhs, rhs, .. } => {
            out.push_str(&format!("(sub {} {})", st.ty_to_string(*lhs), st.ty_to_string(*rhs)));
        }
        SimpleConstraint::And(parts) => {
            out.push_str("(and");
            for p in parts {
                out.push(' ');
                sexpr_simple(st, p, out);
            }
            out.push(')');
        }
        SimpleConstraint::Or { dead, live } => {
            out.push_str("(or ");
            sexpr_simple(st, dead, out);
            out.push(' ');
            sexpr_simple(st, live, out);
            out.push(')');
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_program;
    use crate::types::BaseTy;
    use num_bigint::BigInt;

    fn parse(st: &mut TyStore, src: &str) -> Program {
        parse_program(src, st).expect("parse")
    }

    fn flat<'c>(c: &'c Constraint, out: &mut Vec<&'c Constraint>) {
        if let Constraint::And(parts) = c {
            for p in parts {
                flat(p, out);
            }
        } else {
            out.push(c);
        }
    }

    #[test]
    fn constants_constrain_their_singleton() {
        let mut st = TyStore::new();
        let want = st.fresh_var("t");
        let want = st.mk_var(want);
        let prog = parse(&mut st, "in 1");
        let mut g = Gen { st: &mut st, skip_exhaustiveness: false };
        let c = g.gen_expr(&prog.main, want);
        let one = st.mk_base(BaseTy::IntLit(BigInt::from(1)));
        match c {
            Constraint::Sub { lhs, rhs, .. } => {
                assert_eq!(lhs, one);
                assert_eq!(rhs, want);
            }
            other => panic!("expected a subtyping atom, got {other:?}"),
        }
    }

    #[test]
    fn variables_constrain_symbolically() {
        let mut st = TyStore::new();
        let want = st.top();
        let prog = parse(&mut st, "in x");
        let mut g = Gen { st: &mut st, skip_exhaustiveness: false };
        let c = g.gen_expr(&prog.main, want);
        assert!(matches!(c, Constraint::VarSub { ref var, .. } if var == "x"));
    }

    #[test]
    fn abstraction_introduces_arrow_and_binding() {
        let mut st = TyStore::new();
        let want = st.top();
        let prog = parse(&mut st, "in fun x -> x");
        let mut g = Gen { st: &mut st, skip_exhaustiveness: false };
        let c = g.gen_expr(&prog.main, want);
        let mut parts = Vec::new();
        flat(&c, &mut parts);
        assert_eq!(parts.len(), 2);
        let Constraint::Def { bindings, inner } = parts[0] else {
            panic!("expected a definition constraint");
        };
        assert_eq!(bindings.len(), 1);
        assert_eq!(bindings[0].0, "x");
        assert!(matches!(**inner, Constraint::VarSub { .. }));
        let Constraint::Sub { lhs, rhs, .. } = parts[1] else {
            panic!("expected the arrow atom");
        };
        assert!(matches!(*st.node(*lhs), TyNode::Arrow(..)));
        assert_eq!(*rhs, want);
    }

    #[test]
    fn pattern_envs_follow_the_rules() {
        let mut st = TyStore::new();
        let int = st.mk_base(BaseTy::Int);
        let span = Span::default();
        let mut g = Gen { st: &mut st, skip_exhaustiveness: false };

        let (c, env) = g.gen_pat(int, &Pattern::Wildcard, span);
        assert!(env.is_empty());
        assert!(matches!(c, Constraint::And(v) if v.is_empty()));

        let (_, env) = g.gen_pat(int, &Pattern::Bind("x".into()), span);
        assert_eq!(env.get("x"), Some(&int));

        let p = Pattern::Pair(
            Box::new(Pattern::Bind("a".into())),
            Box::new(Pattern::Bind("b".into())),
        );
        let (c, env) = g.gen_pat(int, &p, span);
        assert_eq!(env.len(), 2);
        let a = env["a"];
        let b = env["b"];
        assert!(matches!(*g.st.node(a), TyNode::Var(_)));
        assert!(matches!(*g.st.node(b), TyNode::Var(_)));
        let mut parts = Vec::new();
        flat(&c, &mut parts);
        let Some(Constraint::Sub { lhs, rhs, .. }) = parts.last() else {
            panic!("expected decomposition atom");
        };
        assert_eq!(*lhs, int);
        let expect = g.st.mk_pair(a, b);
        assert_eq!(*rhs, expect);
    }

    #[test]
    fn guard_free_variables_get_scope_checks() {
        let mut st = TyStore::new();
        let prog = parse(&mut st, "in case z of _ when is_int w -> 0 end");
        let ExprKind::Case(_, clauses) = &prog.main.kind else {
            panic!();
        };
        let int = st.mk_base(BaseTy::Int);
        let mut g = Gen { st: &mut st, skip_exhaustiveness: false };
        let (c, env) = g.gen_pat_env(int, &clauses[0].gpat, clauses[0].span);
        // the guard refines w even though the pattern ignores it
        assert!(env.contains_key("w"));
        let mut parts = Vec::new();
        flat(&c, &mut parts);
        assert!(parts.iter().any(|p| matches!(
            p,
            Constraint::VarSub { var, origin: Origin { role: Role::GuardScope(_), .. }, .. } if var == "w"
        )));
    }

    #[test]
    fn annotation_arrows_recover_intersections() {
        let mut st = TyStore::new();
        let int = st.mk_base(BaseTy::Int);
        let float = st.mk_base(BaseTy::Float);
        let a1 = st.mk_arrow(int, int);
        let a2 = st.mk_arrow(float, float);
        let both = st.mk_inter(a1, a2);
        let arrows = annotation_arrows(&mut st, both).expect("intersection of arrows");
        assert_eq!(arrows.len(), 2);
        assert!(arrows.contains(&(int, int)));
        assert!(arrows.contains(&(float, float)));

        let single = annotation_arrows(&mut st, a1).expect("single arrow");
        assert_eq!(single, vec![(int, int)]);

        assert!(annotation_arrows(&mut st, int).is_none());
        let v = st.named_var("a");
        let va = st.mk_var(v);
        assert!(annotation_arrows(&mut st, va).is_none());
    }

    #[test]
    fn annotated_defs_get_one_conjunct_per_arrow() {
        let mut st = TyStore::new();
        let prog = parse(
            &mut st,
            "f : (Int -> Int) & (Float -> Float) = fun y -> y in f",
        );
        let (c, scheme) = gen_def(&mut st, &prog.defs[0], false).expect("well-formed");
        assert!(scheme.vars.is_empty());
        let mut parts = Vec::new();
        flat(&c, &mut parts);
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|p| matches!(p, Constraint::Def { .. })));
    }

    #[test]
    fn malformed_annotations_are_rejected() {
        let mut st = TyStore::new();
        // not an arrow
        let prog = parse(&mut st, "f : forall 'a. 'a = fun y -> y in f");
        let err = gen_def(&mut st, &prog.defs[0], false).unwrap_err();
        assert!(err.message.contains("intersection of arrow"));
        // free type variable
        let prog = parse(&mut st, "g : 'b -> 'b = fun y -> y in g");
        let err = gen_def(&mut st, &prog.defs[0], false).unwrap_err();
        assert!(err.message.contains("not quantified"));
    }

    #[test]
    fn rewrite_resolves_variables() {
        let mut st = TyStore::new();
        let int = st.mk_base(BaseTy::Int);
        let want = st.top();
        let c = Constraint::VarSub {
            var: "x".into(),
            rhs: want,
            origin: Origin::new(Span::default(), Role::Variable("x".into())),
        };
        let mut gamma = TypeEnv::new();
        gamma.insert("x".into(), int);
        let mut records = Vec::new();
        let out = rewrite(&mut st, &c, &SchemeEnv::new(), &gamma, &mut records).unwrap();
        match out {
            SimpleConstraint::Sub { lhs, rhs, .. } => {
                assert_eq!(lhs, int);
                assert_eq!(rhs, want);
            }
            other => panic!("unexpected rewrite {other:?}"),
        }
    }

    #[test]
    fn rewrite_instantiates_schemes_fresh() {
        let mut st = TyStore::new();
        let a = st.named_var("a");
        let va = st.mk_var(a);
        let arrow = st.mk_arrow(va, va);
        let scheme = TyScheme { vars: [a].into_iter().collect(), body: arrow };
        let mut sigma = SchemeEnv::new();
        sigma.insert("f".into(), scheme);
        let want = st.top();
        let c = Constraint::VarSub {
            var: "f".into(),
            rhs: want,
            origin: Origin::new(Span::default(), Role::Variable("f".into())),
        };
        let mut records = Vec::new();
        let out = rewrite(&mut st, &c, &sigma, &TypeEnv::new(), &mut records).unwrap();
        let SimpleConstraint::Sub { lhs, .. } = out else {
            panic!();
        };
        let TyNode::Arrow(d, _) = *st.node(lhs) else {
            panic!("instantiated scheme should still be an arrow");
        };
        // the instantiated domain is a fresh variable, not `a` itself
        let TyNode::Var(fresh) = *st.node(d) else {
            panic!();
        };
        assert_ne!(fresh, a);
    }

    #[test]
    fn rewrite_reports_unbound_and_ambiguous() {
        let mut st = TyStore::new();
        let want = st.top();
        let int = st.mk_base(BaseTy::Int);
        let c = Constraint::VarSub {
            var: "x".into(),
            rhs: want,
            origin: Origin::new(Span::default(), Role::Variable("x".into())),
        };
        let mut records = Vec::new();
        let err = rewrite(&mut st, &c, &SchemeEnv::new(), &TypeEnv::new(), &mut records).unwrap_err();
        assert!(matches!(err, RewriteError::Unbound { ref name, .. } if name == "x"));

        let mut gamma = TypeEnv::new();
        gamma.insert("x".into(), int);
        let mut sigma = SchemeEnv::new();
        sigma.insert("x".into(), TyScheme::mono(int));
        let err = rewrite(&mut st, &c, &sigma, &gamma, &mut records).unwrap_err();
        assert!(matches!(err, RewriteError::Ambiguous { ref name, .. } if name == "x"));
    }

    #[test]
    fn case_rewrites_to_disjunctions_and_records_tests() {
        let mut st = TyStore::new();
        let want = st.fresh_var("t");
        let want = st.mk_var(want);
        let prog = parse(&mut st, "in case 1 of 0 -> 0; _ -> 1 end");
        let mut g = Gen { st: &mut st, skip_exhaustiveness: false };
        let c = g.gen_expr(&prog.main, want);
        let mut records = Vec::new();
        let out = rewrite(&mut st, &c, &SchemeEnv::new(), &TypeEnv::new(), &mut records).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].site.index, 0);
        assert_eq!(records[1].site.index, 1);
        let mut ors = 0;
        fn count_ors(c: &SimpleConstraint, n: &mut usize) {
            match c {
                SimpleConstraint::Or { dead, live } => {
                    *n += 1;
                    count_ors(dead, n);
                    count_ors(live, n);
                }
                SimpleConstraint::And(parts) => parts.iter().for_each(|p| count_ors(p, n)),
                SimpleConstraint::Sub { .. } => {}
            }
        }
        count_ors(&out, &mut ors);
        assert_eq!(ors, 2);
    }

    #[test]
    fn generalize_env_closes_unquantified_schemes() {
        let mut st = TyStore::new();
        let v = st.fresh_var("a");
        let tv = st.mk_var(v);
        let arrow = st.mk_arrow(tv, tv);
        let mut env = SchemeEnv::new();
        env.insert("f".into(), TyScheme::mono(arrow));
        let out = generalize_env(&mut st, &env);
        assert_eq!(out["f"].vars.iter().copied().collect::<Vec<_>>(), vec![v]);
        // an annotation scheme is untouched even if its body has free vars
        let closed = TyScheme { vars: [v].into_iter().collect(), body: arrow };
        env.insert("g".into(), closed.clone());
        let out = generalize_env(&mut st, &env);
        assert_eq!(out["g"], closed);
    }

    #[test]
    fn equiv_constraint_pins_bindings() {
        let mut st = TyStore::new();
        let v = st.fresh_var("a");
        let int = st.mk_base(BaseTy::Int);
        let mut theta = TySubst::new();
        theta.insert(v, int);
        let c = equiv_constraint(&mut st, &theta);
        let SimpleConstraint::And(parts) = &c else { panic!() };
        assert_eq!(parts.len(), 2);
        let var = st.mk_var(v);
        assert!(matches!(parts[0], SimpleConstraint::Sub { lhs, rhs, .. } if lhs == var && rhs == int));
        assert!(matches!(parts[1], SimpleConstraint::Sub { lhs, rhs, .. } if lhs == int && rhs == var));
    }

    #[test]
    fn exhaustiveness_can_be_stripped_and_collected() {
        let mut st = TyStore::new();
        let want = st.fresh_var("t");
        let want = st.mk_var(want);
        let prog = parse(&mut st, "in case 1 of 0 -> 0 end");
        let mut g = Gen { st: &mut st, skip_exhaustiveness: false };
        let c = g.gen_expr(&prog.main, want);
        let mut records = Vec::new();
        let out = rewrite(&mut st, &c, &SchemeEnv::new(), &TypeEnv::new(), &mut records).unwrap();
        let mut sites = Vec::new();
        exhaustiveness_sites(&out, &mut sites);
        assert_eq!(sites.len(), 1);
        let stripped = strip_exhaustiveness(&out);
        sites.clear();
        exhaustiveness_sites(&stripped, &mut sites);
        assert!(sites.is_empty());
    }

    #[test]
    fn pragma_suppresses_exhaustiveness_conjuncts() {
        let mut st = TyStore::new();
        let prog = parse(
            &mut st,
            "# no_exhaustiveness\nf = fun x -> case x of 1 -> 1 end\nin f 1",
        );
        let (c, _) = gen_def(&mut st, &prog.defs[0], false).unwrap();
        let mut records = Vec::new();
        let out = rewrite(&mut st, &c, &SchemeEnv::new(), &TypeEnv::new(), &mut records);
        // rewriting succeeds only because gamma lacks f; VarSub(f, ...) is
        // absent here since the body does not mention f
        let out = out.unwrap();
        let mut sites = Vec::new();
        exhaustiveness_sites(&out, &mut sites);
        assert!(sites.is_empty());
    }

    #[test]
    fn traces_are_stable() {
        let mut st = TyStore::new();
        let int = st.mk_base(BaseTy::Int);
        let top = st.top();
        let c = Constraint::And(vec![
            Constraint::Sub { lhs: int, rhs: top, origin: Origin::new(Span::default(), Role::Constant) },
            Constraint::VarSub {
                var: "x".into(),
                rhs: int,
                origin: Origin::new(Span::default(), Role::Variable("x".into())),
            },
        ]);
        assert_eq!(constraint_sexpr(&st, &c), "(and (sub Int Any) (var x Int))");
    }
}
