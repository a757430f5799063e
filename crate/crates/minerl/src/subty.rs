//! Subtyping as set inclusion: `t` is a subtype of `u` exactly when
//! `t & !u` is uninhabited, so everything reduces to an emptiness test on
//! disjunctive normal forms.
//!
//! Emptiness is decided coinductively: a type re-entered while its own
//! check is in progress counts as empty, which is the right reading for
//! equi-recursive types over finite values. Verdicts that did not lean on
//! any in-progress hypothesis are cached durably on the store. A positive
//! verdict (empty) only ever builds on positive sub-verdicts and
//! hypotheses; a negative verdict only on negative sub-verdicts, so
//! negatives are durable unconditionally.
//!
//! Type variables at the top level of a conjunction follow the
//! all-substitutions reading of emptiness: a variable occurring both
//! positively and negatively empties the line, and any other top-level
//! variable can be discarded before deciding the ground residue.

use num_bigint::BigInt;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::ast::{Const, Value};
use crate::types::{BaseTy, Ty, TyNode, TyStore};

/// One conjunction of a type's disjunctive normal form: positive and
/// negative atoms, each a variable, base, pair, or arrow node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DnfLine {
    pub pos: Vec<Ty>,
    pub neg: Vec<Ty>,
}

impl DnfLine {
    fn atom(t: Ty) -> DnfLine {
        DnfLine {
            pos: vec![t],
            neg: Vec::new(),
        }
    }

    fn co_atom(t: Ty) -> DnfLine {
        DnfLine {
            pos: Vec::new(),
            neg: vec![t],
        }
    }

    /// Merge two conjunctions; `None` when the result clashes on an atom
    /// and is trivially empty.
    fn merge(&self, other: &DnfLine) -> Option<DnfLine> {
        let mut pos: BTreeSet<Ty> = self.pos.iter().copied().collect();
        pos.extend(other.pos.iter().copied());
        let mut neg: BTreeSet<Ty> = self.neg.iter().copied().collect();
        neg.extend(other.neg.iter().copied());
        if pos.iter().any(|t| neg.contains(t)) {
            return None;
        }
        Some(DnfLine {
            pos: pos.into_iter().collect(),
            neg: neg.into_iter().collect(),
        })
    }
}

/// Disjunctive normal form of `t`: a union of conjunctions of atoms.
/// Cached on the store; the union/negation skeleton of a contractive type
/// is acyclic, so the walk terminates.
pub fn dnf(st: &mut TyStore, t: Ty) -> Rc<Vec<DnfLine>> {
    if let Some(lines) = st.dnf_cache.get(&t) {
        return Rc::clone(lines);
    }
    let lines = match *st.node(t) {
        TyNode::Var(_) | TyNode::Base(_) | TyNode::Pair(..) | TyNode::Arrow(..) => {
            vec![DnfLine::atom(t)]
        }
        TyNode::Union(a, b) => {
            let mut out: Vec<DnfLine> = (*dnf(st, a)).clone();
            out.extend((*dnf(st, b)).clone());
            out
        }
        TyNode::Neg(x) => match *st.node(x) {
            TyNode::Var(_) | TyNode::Base(_) | TyNode::Pair(..) | TyNode::Arrow(..) => {
                vec![DnfLine::co_atom(x)]
            }
            TyNode::Neg(y) => (*dnf(st, y)).clone(),
            TyNode::Union(a, b) => {
                let na = st.mk_neg(a);
                let nb = st.mk_neg(b);
                let left = dnf(st, na);
                let right = dnf(st, nb);
                let mut out = Vec::new();
                let mut seen: BTreeSet<(Vec<Ty>, Vec<Ty>)> = BTreeSet::new();
                for la in left.iter() {
                    for lb in right.iter() {
                        if let Some(line) = la.merge(lb) {
                            if seen.insert((line.pos.clone(), line.neg.clone())) {
                                out.push(line);
                            }
                        }
                    }
                }
                out
            }
            TyNode::Hole => unreachable!("negation of an unfinished placeholder"),
        },
        TyNode::Hole => unreachable!("normal form of an unfinished placeholder"),
    };
    let rc = Rc::new(lines);
    st.dnf_cache.insert(t, Rc::clone(&rc));
    rc
}

// ---------------------------------------------------------------------------
// Emptiness
// ---------------------------------------------------------------------------

/// Depth reported by verdicts that used no in-progress hypothesis.
const NO_HYPOTHESIS: usize = usize::MAX;

struct EmptyCtx {
    /// Types whose emptiness check is in progress, with their entry depth.
    in_progress: HashMap<Ty, usize>,
}

pub fn is_empty(st: &mut TyStore, t: Ty) -> bool {
    let mut ctx = EmptyCtx {
        in_progress: HashMap::new(),
    };
    empty_rec(st, t, &mut ctx).0
}

pub fn is_subtype(st: &mut TyStore, t: Ty, u: Ty) -> bool {
    let d = st.mk_diff(t, u);
    is_empty(st, d)
}

pub fn is_equiv(st: &mut TyStore, t: Ty, u: Ty) -> bool {
    is_subtype(st, t, u) && is_subtype(st, u, t)
}

/// Core check. Returns the verdict together with the shallowest
/// in-progress entry depth the verdict relied on (`NO_HYPOTHESIS` when
/// self-contained); only self-contained positives are cached durably.
fn empty_rec(st: &mut TyStore, t: Ty, ctx: &mut EmptyCtx) -> (bool, usize) {
    if let Some(&b) = st.empty_cache.get(&t) {
        return (b, NO_HYPOTHESIS);
    }
    if let Some(&d) = ctx.in_progress.get(&t) {
        return (true, d);
    }
    let depth = ctx.in_progress.len();
    ctx.in_progress.insert(t, depth);
    let lines = dnf(st, t);
    let mut verdict = true;
    let mut used = NO_HYPOTHESIS;
    for line in lines.iter() {
        let (e, u) = line_empty(st, line, ctx);
        if !e {
            verdict = false;
            break;
        }
        used = used.min(u);
    }
    ctx.in_progress.remove(&t);
    if !verdict {
        // Nonemptiness is witnessed by a finite value and never depends on
        // an in-progress hypothesis.
        st.empty_cache.insert(t, false);
        (false, NO_HYPOTHESIS)
    } else if used >= depth {
        st.empty_cache.insert(t, true);
        (true, NO_HYPOTHESIS)
    } else {
        (true, used)
    }
}

/// Atoms of one line, split by kind.
#[derive(Default)]
pub(crate) struct LineAtoms {
    pub(crate) pos_vars: BTreeSet<Ty>,
    pub(crate) neg_vars: BTreeSet<Ty>,
    pub(crate) pos_base: Vec<BaseTy>,
    pub(crate) neg_base: Vec<BaseTy>,
    pub(crate) pos_pairs: Vec<(Ty, Ty)>,
    pub(crate) neg_pairs: Vec<(Ty, Ty)>,
    pub(crate) pos_arrows: Vec<(Ty, Ty)>,
    pub(crate) neg_arrows: Vec<(Ty, Ty)>,
}

pub(crate) fn split_atoms(st: &TyStore, line: &DnfLine) -> LineAtoms {
    let mut out = LineAtoms::default();
    for &a in &line.pos {
        match *st.node(a) {
            TyNode::Var(_) => {
                out.pos_vars.insert(a);
            }
            TyNode::Base(ref b) => out.pos_base.push(b.clone()),
            TyNode::Pair(x, y) => out.pos_pairs.push((x, y)),
            TyNode::Arrow(x, y) => out.pos_arrows.push((x, y)),
            _ => unreachable!("non-atom in normal form"),
        }
    }
    for &a in &line.neg {
        match *st.node(a) {
            TyNode::Var(_) => {
                out.neg_vars.insert(a);
            }
            TyNode::Base(ref b) => out.neg_base.push(b.clone()),
            TyNode::Pair(x, y) => out.neg_pairs.push((x, y)),
            TyNode::Arrow(x, y) => out.neg_arrows.push((x, y)),
            _ => unreachable!("non-atom in normal form"),
        }
    }
    out
}

fn line_empty(st: &mut TyStore, line: &DnfLine, ctx: &mut EmptyCtx) -> (bool, usize) {
    let atoms = split_atoms(st, line);
    // A variable required and excluded at once empties the line under
    // every substitution.
    if atoms.pos_vars.iter().any(|v| atoms.neg_vars.contains(v)) {
        return (true, NO_HYPOTHESIS);
    }
    // Other top-level variables are droppable: some substitution makes
    // them full, so only the ground residue decides.
    let kinds = [
        !atoms.pos_base.is_empty(),
        !atoms.pos_pairs.is_empty(),
        !atoms.pos_arrows.is_empty(),
    ];
    match kinds.iter().filter(|&&k| k).count() {
        0 => {
            // No positive constructor: the residue is the full top split
            // into its three kinds; each must be empty.
            if !base_line_empty(true, &atoms.pos_base, &atoms.neg_base) {
                return (false, NO_HYPOTHESIS);
            }
            let top = st.top();
            let (pe, pu) = pairs_empty(st, top, top, &atoms.neg_pairs, ctx);
            if !pe {
                return (false, NO_HYPOTHESIS);
            }
            let all_funs = [(st.bottom(), st.top())];
            let (ae, au) = arrows_empty(st, &all_funs, &atoms.neg_arrows, ctx);
            if !ae {
                return (false, NO_HYPOTHESIS);
            }
            (true, pu.min(au))
        }
        1 => {
            if !atoms.pos_base.is_empty() {
                (
                    base_line_empty(false, &atoms.pos_base, &atoms.neg_base),
                    NO_HYPOTHESIS,
                )
            } else if !atoms.pos_pairs.is_empty() {
                let (t1, t2) = intersect_components(st, &atoms.pos_pairs);
                pairs_empty(st, t1, t2, &atoms.neg_pairs, ctx)
            } else {
                arrows_empty(st, &atoms.pos_arrows, &atoms.neg_arrows, ctx)
            }
        }
        _ => (true, NO_HYPOTHESIS), // two constructor kinds cannot meet
    }
}

pub(crate) fn intersect_components(st: &mut TyStore, pairs: &[(Ty, Ty)]) -> (Ty, Ty) {
    let firsts: Vec<Ty> = pairs.iter().map(|&(a, _)| a).collect();
    let seconds: Vec<Ty> = pairs.iter().map(|&(_, b)| b).collect();
    (
        st.mk_inter_all(firsts.iter().copied()),
        st.mk_inter_all(seconds.iter().copied()),
    )
}

// -- base kind ---------------------------------------------------------------

/// Integers as a finite or cofinite set.
#[derive(Debug, Clone, PartialEq, Eq)]
enum IntSet {
    Fin(BTreeSet<BigInt>),
    Cofin(BTreeSet<BigInt>),
}

/// Decidable fragment of the base kind: a set of integers plus all floats
/// or none. Floats have no literal types, so a flag suffices.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BaseSet {
    ints: IntSet,
    floats: bool,
}

impl BaseSet {
    fn full() -> BaseSet {
        BaseSet {
            ints: IntSet::Cofin(BTreeSet::new()),
            floats: true,
        }
    }

    fn of_atom(b: &BaseTy) -> BaseSet {
        match b {
            BaseTy::Int => BaseSet {
                ints: IntSet::Cofin(BTreeSet::new()),
                floats: false,
            },
            BaseTy::Float => BaseSet {
                ints: IntSet::Fin(BTreeSet::new()),
                floats: true,
            },
            BaseTy::IntLit(n) => BaseSet {
                ints: IntSet::Fin(std::iter::once(n.clone()).collect()),
                floats: false,
            },
        }
    }

    fn intersect(&self, other: &BaseSet) -> BaseSet {
        BaseSet {
            ints: self.ints.intersect(&other.ints),
            floats: self.floats && other.floats,
        }
    }

    fn subtract(&self, other: &BaseSet) -> BaseSet {
        BaseSet {
            ints: self.ints.subtract(&other.ints),
            floats: self.floats && !other.floats,
        }
    }

    fn is_empty(&self) -> bool {
        !self.floats && matches!(&self.ints, IntSet::Fin(s) if s.is_empty())
    }
}

impl IntSet {
    fn intersect(&self, other: &IntSet) -> IntSet {
        match (self, other) {
            (IntSet::Fin(a), IntSet::Fin(b)) => {
                IntSet::Fin(a.intersection(b).cloned().collect())
            }
            (IntSet::Fin(a), IntSet::Cofin(b)) => {
                IntSet::Fin(a.difference(b).cloned().collect())
            }
            (IntSet::Cofin(a), IntSet::Fin(b)) => {
                IntSet::Fin(b.difference(a).cloned().collect())
            }
            (IntSet::Cofin(a), IntSet::Cofin(b)) => {
                IntSet::Cofin(a.union(b).cloned().collect())
            }
        }
    }

    fn subtract(&self, other: &IntSet) -> IntSet {
        match (self, other) {
            (IntSet::Fin(a), IntSet::Fin(b)) => {
                IntSet::Fin(a.difference(b).cloned().collect())
            }
            (IntSet::Fin(a), IntSet::Cofin(b)) => {
                IntSet::Fin(a.intersection(b).cloned().collect())
            }
            (IntSet::Cofin(a), IntSet::Fin(b)) => {
                IntSet::Cofin(a.union(b).cloned().collect())
            }
            (IntSet::Cofin(a), IntSet::Cofin(b)) => {
                IntSet::Fin(b.difference(a).cloned().collect())
            }
        }
    }
}

/// Emptiness of a pure base-kind line. With `from_top` the positives start
/// from the whole base kind (used when the line has no positive atom).
pub(crate) fn base_line_empty(from_top: bool, pos: &[BaseTy], neg: &[BaseTy]) -> bool {
    let mut acc = BaseSet::full();
    if !from_top {
        for b in pos {
            acc = acc.intersect(&BaseSet::of_atom(b));
        }
    }
    for b in neg {
        acc = acc.subtract(&BaseSet::of_atom(b));
    }
    acc.is_empty()
}

// -- pair kind ---------------------------------------------------------------

/// Emptiness of `(t1, t2) & !(s1, s2) & ...`: for every way of charging
/// each negative pair to one side, some side must come out empty.
fn pairs_empty(
    st: &mut TyStore,
    t1: Ty,
    t2: Ty,
    negs: &[(Ty, Ty)],
    ctx: &mut EmptyCtx,
) -> (bool, usize) {
    let (e1, u1) = empty_rec(st, t1, ctx);
    if e1 {
        return (true, u1);
    }
    let (e2, u2) = empty_rec(st, t2, ctx);
    if e2 {
        return (true, u2);
    }
    let Some((&(s1, s2), rest)) = negs.split_first() else {
        return (false, NO_HYPOTHESIS);
    };
    let left = st.mk_diff(t1, s1);
    let (le, lu) = pairs_empty(st, left, t2, rest, ctx);
    if !le {
        return (false, NO_HYPOTHESIS);
    }
    let right = st.mk_diff(t2, s2);
    let (re, ru) = pairs_empty(st, t1, right, rest, ctx);
    if !re {
        return (false, NO_HYPOTHESIS);
    }
    (true, lu.min(ru))
}

// -- arrow kind --------------------------------------------------------------

/// Emptiness of `(t1->s1) & ... & !(t'->s') & ...`: some negative arrow
/// must subsume the positive intersection. With no negative atom the line
/// is inhabited (by a function as partial as needed).
fn arrows_empty(
    st: &mut TyStore,
    pos: &[(Ty, Ty)],
    negs: &[(Ty, Ty)],
    ctx: &mut EmptyCtx,
) -> (bool, usize) {
    for &(nd, nc) in negs {
        let co_cod = st.mk_neg(nc);
        let (covered, used) = arrow_phi(st, nd, co_cod, false, pos, ctx);
        if covered {
            return (true, used);
        }
    }
    (false, NO_HYPOTHESIS)
}

/// Does `!(dom -> cod)` annul the intersection of the positive arrows in
/// `rest`? `t1` starts at `dom` and shrinks by excluded domains; `t2`
/// accumulates `!cod` with the codomains sent to the other side, and only
/// counts once armed (some codomain joined, keeping the split proper).
fn arrow_phi(
    st: &mut TyStore,
    t1: Ty,
    t2: Ty,
    armed: bool,
    rest: &[(Ty, Ty)],
    ctx: &mut EmptyCtx,
) -> (bool, usize) {
    let (e1, u1) = empty_rec(st, t1, ctx);
    if e1 {
        return (true, u1);
    }
    if armed {
        let (e2, u2) = empty_rec(st, t2, ctx);
        if e2 {
            return (true, u2);
        }
    }
    let Some((&(di, ci), rest)) = rest.split_first() else {
        return (false, NO_HYPOTHESIS);
    };
    let shrunk = st.mk_diff(t1, di);
    let (le, lu) = arrow_phi(st, shrunk, t2, armed, rest, ctx);
    if !le {
        return (false, NO_HYPOTHESIS);
    }
    let joined = st.mk_inter(t2, ci);
    let (re, ru) = arrow_phi(st, t1, joined, true, rest, ctx);
    if !re {
        return (false, NO_HYPOTHESIS);
    }
    (true, lu.min(ru))
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

/// Projection failure: the argument admits values outside the pair kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotAPairType(pub Ty);

impl std::fmt::Display for NotAPairType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "projection from a type that is not a pair type")
    }
}

impl std::error::Error for NotAPairType {}

pub fn proj1(st: &mut TyStore, t: Ty) -> Result<Ty, NotAPairType> {
    proj(st, t, true)
}

pub fn proj2(st: &mut TyStore, t: Ty) -> Result<Ty, NotAPairType> {
    proj(st, t, false)
}

/// Set of component values on one side of a pair type: the exact union
/// over feasible charges of the negative atoms, line by line.
fn proj(st: &mut TyStore, t: Ty, first: bool) -> Result<Ty, NotAPairType> {
    let top = st.top();
    let pair_top = st.mk_pair(top, top);
    if !is_subtype(st, t, pair_top) {
        return Err(NotAPairType(t));
    }
    let lines = dnf(st, t);
    let lines = (*lines).clone();
    let mut parts: Vec<Ty> = Vec::new();
    for line in &lines {
        let atoms = split_atoms(st, line);
        if atoms.pos_vars.iter().any(|v| atoms.neg_vars.contains(v)) {
            continue;
        }
        // Base or arrow positives cannot hold pairs; such lines are empty
        // inside a pair-typed union. Top-level variables project away.
        if !atoms.pos_base.is_empty() || !atoms.pos_arrows.is_empty() {
            continue;
        }
        let (t1, t2) = if atoms.pos_pairs.is_empty() {
            (top, top)
        } else {
            intersect_components(st, &atoms.pos_pairs)
        };
        let (keep, other) = if first { (t1, t2) } else { (t2, t1) };
        let negs: Vec<(Ty, Ty)> = atoms
            .neg_pairs
            .iter()
            .map(|&(a, b)| if first { (a, b) } else { (b, a) })
            .collect();
        proj_line(st, keep, other, &negs, &mut parts);
    }
    Ok(st.mk_union_all(parts.iter().copied()))
}

/// Walk every charge of the negative pairs: a negative either constrains
/// the kept side (its kept component joins the region's intersection) or
/// must be dodged on the other side. Regions whose other side dies are
/// infeasible.
fn proj_line(st: &mut TyStore, region: Ty, other: Ty, negs: &[(Ty, Ty)], parts: &mut Vec<Ty>) {
    if is_empty(st, region) {
        return;
    }
    match negs.split_first() {
        None => {
            if !is_empty(st, other) {
                parts.push(region);
            }
        }
        Some((&(nk, no), rest)) => {
            let inside = st.mk_inter(region, nk);
            let dodged = st.mk_diff(other, no);
            proj_line(st, inside, dodged, rest, parts);
            let outside = st.mk_diff(region, nk);
            proj_line(st, outside, other, rest, parts);
        }
    }
}

// ---------------------------------------------------------------------------
// Ground witnesses
// ---------------------------------------------------------------------------

/// Most precise type of a closed value: integer constants get their
/// literal type, lambdas the type of all functions.
pub fn canonical_type(st: &mut TyStore, v: &Value) -> Ty {
    match v {
        Value::Const(Const::Int(n)) => st.mk_int_lit(n.clone()),
        Value::Const(Const::Float(_)) => st.mk_float(),
        Value::Abs(..) => {
            let b = st.bottom();
            let t = st.top();
            st.mk_arrow(b, t)
        }
        Value::Pair(a, b) => {
            let ta = canonical_type(st, a);
            let tb = canonical_type(st, b);
            st.mk_pair(ta, tb)
        }
    }
}

/// Rebuild an equivalent type in a tidier shape for display: empty union
/// lines vanish, conjuncts that do not change a line's meaning vanish,
/// and lines the rest of the union already covers vanish. Not a
/// canonical form, only a cleanup; the result is equivalent to the
/// input.
pub fn simplify(st: &mut TyStore, t: Ty) -> Ty {
    let mut memo = HashMap::new();
    simplify_rec(st, t, &mut memo)
}

fn simplify_rec(st: &mut TyStore, t: Ty, memo: &mut HashMap<Ty, Ty>) -> Ty {
    if let Some(&r) = memo.get(&t) {
        return r;
    }
    if is_empty(st, t) {
        let b = st.bottom();
        memo.insert(t, b);
        return b;
    }
    let n = st.mk_neg(t);
    if is_empty(st, n) {
        let top = st.top();
        memo.insert(t, top);
        return top;
    }
    // Nested occurrences (recursive types) keep the original knot.
    memo.insert(t, t);
    let lines = dnf(st, t);
    let mut line_tys: Vec<Ty> = Vec::new();
    for line in lines.iter() {
        let atoms = split_atoms(st, line);
        let mut parts: Vec<Ty> = Vec::new();
        for &v in &atoms.pos_vars {
            parts.push(v);
        }
        for &v in &atoms.neg_vars {
            parts.push(st.mk_neg(v));
        }
        for b in &atoms.pos_base {
            parts.push(st.mk_base(b.clone()));
        }
        for b in &atoms.neg_base {
            let x = st.mk_base(b.clone());
            parts.push(st.mk_neg(x));
        }
        for &(a, b) in &atoms.pos_pairs {
            parts.push(st.mk_pair(a, b));
        }
        for &(a, b) in &atoms.neg_pairs {
            let p = st.mk_pair(a, b);
            parts.push(st.mk_neg(p));
        }
        for &(a, b) in &atoms.pos_arrows {
            parts.push(st.mk_arrow(a, b));
        }
        for &(a, b) in &atoms.neg_arrows {
            let p = st.mk_arrow(a, b);
            parts.push(st.mk_neg(p));
        }
        let full = st.mk_inter_all(parts.clone());
        if is_empty(st, full) {
            continue;
        }
        // Dropping a conjunct only grows the line; keep the drop when the
        // grown line still fits inside the original.
        let mut kept = parts;
        let mut i = 0;
        while kept.len() > 1 && i < kept.len() {
            let mut without = kept.clone();
            without.remove(i);
            let wt = st.mk_inter_all(without.clone());
            if is_subtype(st, wt, full) {
                kept = without;
            } else {
                i += 1;
            }
        }
        let rebuilt: Vec<Ty> = kept.iter().map(|&a| rebuild_atom(st, a, memo)).collect();
        line_tys.push(st.mk_inter_all(rebuilt));
    }
    // Drop lines the rest of the union already covers.
    let mut removed = vec![false; line_tys.len()];
    for i in 0..line_tys.len() {
        let rest: Vec<Ty> = line_tys
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i && !removed[j])
            .map(|(_, &x)| x)
            .collect();
        if rest.is_empty() {
            continue;
        }
        let rest_ty = st.mk_union_all(rest);
        if is_subtype(st, line_tys[i], rest_ty) {
            removed[i] = true;
        }
    }
    let survivors: Vec<Ty> = line_tys
        .into_iter()
        .zip(removed)
        .filter(|&(_, r)| !r)
        .map(|(x, _)| x)
        .collect();
    let result = st.mk_union_all(survivors);
    memo.insert(t, result);
    result
}

/// Simplify the components under a constructor atom.
fn rebuild_atom(st: &mut TyStore, a: Ty, memo: &mut HashMap<Ty, Ty>) -> Ty {
    match *st.node(a) {
        TyNode::Pair(x, y) => {
            let sx = simplify_rec(st, x, memo);
            let sy = simplify_rec(st, y, memo);
            st.mk_pair(sx, sy)
        }
        TyNode::Arrow(d, c) => {
            let sd = simplify_rec(st, d, memo);
            let sc = simplify_rec(st, c, memo);
            st.mk_arrow(sd, sc)
        }
        TyNode::Neg(inner) => {
            let si = rebuild_atom(st, inner, memo);
            st.mk_neg(si)
        }
        _ => a,
    }
}

/// Search for a closed value inhabiting `t`, trying scalar probes first
/// and pairs of probes up to `depth`. Finding one proves `t` nonempty;
/// finding none proves nothing. Returns `None` for non-ground types.
pub fn ground_witness(st: &mut TyStore, t: Ty, depth: u32) -> Option<Value> {
    if !st.free_ty_vars(t).is_empty() {
        return None;
    }
    let mut pool = scalar_probes(st, t);
    for _ in 0..depth {
        if let Some(v) = pool.iter().find(|v| inhabits(st, v, t)) {
            return Some(v.clone());
        }
        pool = grow_pairs(&pool);
    }
    pool.into_iter().find(|v| inhabits(st, v, t))
}

fn inhabits(st: &mut TyStore, v: &Value, t: Ty) -> bool {
    let ct = canonical_type(st, v);
    is_subtype(st, ct, t)
}

/// Scalar candidates: small constants, every integer literal mentioned in
/// `t`, one integer mentioned nowhere, a float, and the identity function.
fn scalar_probes(st: &TyStore, t: Ty) -> Vec<Value> {
    let mut mentioned: BTreeSet<BigInt> = BTreeSet::new();
    let mut seen: BTreeSet<Ty> = BTreeSet::new();
    let mut stack = vec![t];
    while let Some(u) = stack.pop() {
        if !seen.insert(u) {
            continue;
        }
        match st.node(u) {
            TyNode::Base(BaseTy::IntLit(n)) => {
                mentioned.insert(n.clone());
            }
            TyNode::Union(a, b) | TyNode::Pair(a, b) | TyNode::Arrow(a, b) => {
                stack.push(*a);
                stack.push(*b);
            }
            TyNode::Neg(a) => stack.push(*a),
            _ => {}
        }
    }
    let fresh = match mentioned.iter().next_back() {
        Some(max) => max + 1,
        None => BigInt::from(42),
    };
    let mut out: Vec<Value> = Vec::new();
    let push_int = |n: BigInt, out: &mut Vec<Value>| {
        let v = Value::Const(Const::Int(n));
        if !out.contains(&v) {
            out.push(v);
        }
    };
    push_int(BigInt::from(0), &mut out);
    push_int(BigInt::from(1), &mut out);
    for n in &mentioned {
        push_int(n.clone(), &mut out);
    }
    push_int(fresh, &mut out);
    out.push(Value::Const(Const::Float(0.5)));
    out.push(Value::Abs(
        "x".to_string(),
        Box::new(crate::ast::Expr::new(
            crate::ast::ExprKind::Var("x".to_string()),
            crate::ast::Span::default(),
        )),
    ));
    out
}

/// One pairing round over the pool, keeping the pool small and the order
/// deterministic.
fn grow_pairs(pool: &[Value]) -> Vec<Value> {
    const CAP: usize = 64;
    let mut out = pool.to_vec();
    'outer: for a in pool {
        for b in pool {
            if out.len() >= CAP {
                break 'outer;
            }
            let p = Value::Pair(Box::new(a.clone()), Box::new(b.clone()));
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
