//! Tallying: solving subtyping constraints over polymorphic
//! set-theoretic types, the subtype analogue of unification.
//!
//! A conjunction of constraints t ≤ u is solved in three stages.
//! NORMALIZE drives each difference t ∖ u towards emptiness exactly like
//! the subtyping decision procedure, except that when a line's emptiness
//! could be achieved by instantiating a flexible variable, it emits a
//! single-variable bound instead of a verdict; the result is a set of
//! alternative bound sets. SATURATE closes every bound set under the
//! consequence lower ≤ upper for each doubly-bounded variable. SOLVE
//! turns a saturated set into a regular system of equations (each
//! variable gets "(lower ∪ fresh) ∩ upper") and reads substitutions off
//! the system, introducing recursive types where the bounds are cyclic.
//!
//! Disjunctions, which rewriting produces for possibly-dead case
//! branches, are expanded upfront into disjunct-free conjunctions whose
//! solution sets are pooled. Variables listed as rigid act as opaque
//! constants: they are never bounded and never substituted.
//!
//! All work is metered: each visited node costs one step from a budget,
//! and exceeding it aborts the call with `TallyError::Budget` rather than
//! looping on adversarial constraints.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::constraints::SimpleConstraint;
use crate::subty::{
    base_line_empty, dnf, intersect_components, is_empty, is_subtype, split_atoms,
};
use crate::types::{compose_subst, Ty, TyNode, TyStore, TySubst, TyVar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TallyError {
    /// Step budget exhausted; reported to the user as a timeout.
    Budget,
}

/// Solutions in deterministic order; `truncated` reports that the cap cut
/// the list short.
#[derive(Debug, Clone, Default)]
pub struct Solutions {
    pub substs: Vec<TySubst>,
    pub truncated: bool,
}

/// Whether a substitution satisfies a simple constraint.
pub fn solves(st: &mut TyStore, theta: &TySubst, c: &SimpleConstraint) -> bool {
    match c {
        SimpleConstraint::Sub { lhs, rhs, .. } => {
            let l = st.apply_subst(*lhs, theta);
            let r = st.apply_subst(*rhs, theta);
            is_subtype(st, l, r)
        }
        SimpleConstraint::And(parts) => parts.iter().all(|p| solves(st, theta, p)),
        SimpleConstraint::Or { dead, live } => {
            solves(st, theta, live) || solves(st, theta, dead)
        }
    }
}

/// Top-level conjuncts of a constraint; disjunctions stay whole.
fn flatten_conj(c: &SimpleConstraint, out: &mut Vec<SimpleConstraint>) {
    match c {
        SimpleConstraint::And(parts) => {
            for p in parts {
                flatten_conj(p, out);
            }
        }
        _ => out.push(c.clone()),
    }
}

/// Lower and upper bound of one variable, kept merged: several lowers
/// union, several uppers intersect.
type Bound = (Option<Ty>, Option<Ty>);
/// One alternative set of variable bounds.
type Bounds = BTreeMap<TyVar, Bound>;
/// Alternatives: empty means unsatisfiable, a lone empty map means
/// satisfiable with no conditions.
type CsSet = BTreeSet<Bounds>;

fn sat() -> CsSet {
    let mut s = CsSet::new();
    s.insert(Bounds::new());
    s
}

/// Hard cap on live alternatives in any one set; growing past it aborts
/// the call with a budget error instead of exhausting memory.
const MAX_ALTERNATIVES: usize = 8_192;

pub struct TallyCtx<'a> {
    st: &'a mut TyStore,
    rigid: BTreeSet<TyVar>,
    budget: u64,
    steps: u64,
    /// Results of normalization calls made outside any coinductive
    /// context; saturation re-normalizes the same differences repeatedly.
    norm_cache: HashMap<Ty, CsSet>,
}

impl<'a> TallyCtx<'a> {
    pub fn new(st: &'a mut TyStore, rigid: BTreeSet<TyVar>, budget: u64) -> TallyCtx<'a> {
        TallyCtx { st, rigid, budget, steps: 0, norm_cache: HashMap::new() }
    }

    pub fn steps_used(&self) -> u64 {
        self.steps
    }

    fn tick(&mut self) -> Result<(), TallyError> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(TallyError::Budget)
        } else {
            Ok(())
        }
    }

    /// Solve a full simple constraint. The top-level conjunction is first
    /// partitioned into groups that share flexible variables: groups
    /// constrain disjoint variables, so each solves independently and the
    /// per-group substitutions merge by plain union. This turns the
    /// disjunct expansion of independent parts (such as the per-arrow
    /// checks of an intersection annotation) from a product into a sum.
    pub fn tally(
        &mut self,
        c: &SimpleConstraint,
        max_solutions: usize,
    ) -> Result<Solutions, TallyError> {
        let mut items = Vec::new();
        flatten_conj(c, &mut items);
        let groups = self.var_groups(&items);
        if std::env::var("MINERL_TALLY_DEBUG").is_ok() {
            eprintln!("tally: {} items, {} groups", items.len(), groups.len());
        }
        let mut merged: Vec<TySubst> = vec![TySubst::new()];
        let mut truncated = false;
        for group in &groups {
            let before = self.steps;
            let sols = self.tally_group(group, max_solutions)?;
            if std::env::var("MINERL_TALLY_DEBUG").is_ok() {
                eprintln!(
                    "  group: {} sols, {} steps",
                    sols.substs.len(),
                    self.steps - before
                );
            }
            truncated |= sols.truncated;
            if sols.substs.is_empty() {
                return Ok(Solutions { substs: Vec::new(), truncated });
            }
            let mut next: Vec<TySubst> = Vec::new();
            'fold: for m in &merged {
                for s in &sols.substs {
                    let mut u = m.clone();
                    u.extend(s.iter().map(|(v, t)| (*v, *t)));
                    next.push(u);
                    if next.len() >= max_solutions {
                        truncated = true;
                        break 'fold;
                    }
                }
            }
            merged = next;
        }
        let ordered = self.order_pool(merged, max_solutions);
        Ok(Solutions { substs: ordered, truncated })
    }

    /// Group the conjuncts by shared flexible variables, preserving the
    /// order of first appearance. Ground conjuncts form singleton groups
    /// that merely gate satisfiability.
    fn var_groups(&mut self, items: &[SimpleConstraint]) -> Vec<SimpleConstraint> {
        let mut groups: Vec<(BTreeSet<TyVar>, Vec<SimpleConstraint>)> = Vec::new();
        for item in items {
            let vars = self.item_vars(item);
            let mut hits: Vec<usize> = groups
                .iter()
                .enumerate()
                .filter(|(_, (gv, _))| !gv.is_disjoint(&vars))
                .map(|(i, _)| i)
                .collect();
            if vars.is_empty() || hits.is_empty() {
                groups.push((vars, vec![item.clone()]));
                continue;
            }
            let into = hits.remove(0);
            for i in hits.into_iter().rev() {
                let (gv, gi) = groups.remove(i);
                groups[into].0.extend(gv);
                groups[into].1.extend(gi);
            }
            groups[into].0.extend(vars);
            groups[into].1.push(item.clone());
        }
        groups
            .into_iter()
            .map(|(_, items)| {
                if items.len() == 1 {
                    items.into_iter().next().unwrap()
                } else {
                    SimpleConstraint::And(items)
                }
            })
            .collect()
    }

    /// Flexible variables a conjunct mentions anywhere, dead alternatives
    /// included.
    fn item_vars(&mut self, c: &SimpleConstraint) -> BTreeSet<TyVar> {
        let mut out = BTreeSet::new();
        let mut stack = vec![c];
        while let Some(k) = stack.pop() {
            match k {
                SimpleConstraint::Sub { lhs, rhs, .. } => {
                    for side in [*lhs, *rhs] {
                        for v in self.st.free_ty_vars(side).iter() {
                            if !self.rigid.contains(v) {
                                out.insert(*v);
                            }
                        }
                    }
                }
                SimpleConstraint::And(parts) => stack.extend(parts.iter()),
                SimpleConstraint::Or { dead, live } => {
                    stack.push(dead);
                    stack.push(live);
                }
            }
        }
        out
    }

    /// Solve one variable-sharing group: expand disjunctions, solve each
    /// conjunction, pool and order the solutions.
    fn tally_group(
        &mut self,
        c: &SimpleConstraint,
        max_solutions: usize,
    ) -> Result<Solutions, TallyError> {
        let conjunctions = self.expand(c)?;
        let mut pool: Vec<TySubst> = Vec::new();
        let mut seen: BTreeSet<TySubst> = BTreeSet::new();
        let mut truncated = false;
        for conj in &conjunctions {
            if pool.len() >= max_solutions {
                truncated = true;
                break;
            }
            for theta in self.tally_conj_capped(conj, max_solutions - pool.len())? {
                if seen.insert(theta.clone()) {
                    pool.push(theta);
                }
            }
        }
        let substs = self.order_pool(pool, max_solutions);
        Ok(Solutions { substs, truncated })
    }

    /// Deterministic solution order: fewest forced bindings first, then
    /// smallest total type size, then the serialized form.
    fn order_pool(&mut self, pool: Vec<TySubst>, max_solutions: usize) -> Vec<TySubst> {
        let mut keyed: Vec<(usize, usize, String, TySubst)> = pool
            .into_iter()
            .map(|theta| {
                let nontrivial = theta
                    .values()
                    .filter(|&&t| !matches!(*self.st.node(t), TyNode::Var(_)))
                    .count();
                let size: usize = theta.values().map(|&t| self.ty_size(t)).sum();
                let key = self.subst_key(&theta);
                (nontrivial, size, key, theta)
            })
            .collect();
        keyed.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));
        keyed.truncate(max_solutions);
        keyed.into_iter().map(|(_, _, _, s)| s).collect()
    }

    /// Distinct reachable nodes. Smaller solutions sort first, so an
    /// application through one arrow of an overload beats the blanket
    /// union over every arrow.
    fn ty_size(&self, t: Ty) -> usize {
        let mut seen = BTreeSet::new();
        let mut stack = vec![t];
        while let Some(u) = stack.pop() {
            if !seen.insert(u) {
                continue;
            }
            match *self.st.node(u) {
                TyNode::Var(_) | TyNode::Base(_) | TyNode::Hole => {}
                TyNode::Neg(a) => stack.push(a),
                TyNode::Union(a, b) | TyNode::Pair(a, b) | TyNode::Arrow(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        seen.len()
    }

    fn subst_key(&self, theta: &TySubst) -> String {
        let mut s = String::new();
        for (v, t) in theta {
            s.push_str(self.st.var_name(*v));
            s.push('=');
            s.push_str(&self.st.ty_to_string(*t));
            s.push(';');
        }
        s
    }

    /// Disjunctive normal form over the Or nodes: a list of conjunctions,
    /// live branches expanded before dead alternatives.
    fn expand(&mut self, c: &SimpleConstraint) -> Result<Vec<Vec<(Ty, Ty)>>, TallyError> {
        let expanded = self.expand_rec(c)?;
        let mut out = Vec::new();
        let mut seen: BTreeSet<BTreeSet<(Ty, Ty)>> = BTreeSet::new();
        for conj in expanded {
            let set: BTreeSet<(Ty, Ty)> = conj.iter().copied().collect();
            if seen.insert(set) {
                out.push(conj);
            }
        }
        Ok(out)
    }

    fn expand_rec(&mut self, c: &SimpleConstraint) -> Result<Vec<Vec<(Ty, Ty)>>, TallyError> {
        self.tick()?;
        match c {
            SimpleConstraint::Sub { lhs, rhs, .. } => Ok(vec![vec![(*lhs, *rhs)]]),
            SimpleConstraint::And(parts) => {
                let mut acc: Vec<Vec<(Ty, Ty)>> = vec![Vec::new()];
                for p in parts {
                    let pc = self.expand_rec(p)?;
                    let mut next = Vec::with_capacity(acc.len() * pc.len());
                    for a in &acc {
                        for b in &pc {
                            self.tick()?;
                            let mut merged = a.clone();
                            merged.extend(b.iter().copied());
                            next.push(merged);
                        }
                    }
                    acc = next;
                }
                Ok(acc)
            }
            SimpleConstraint::Or { dead, live } => {
                let mut out = self.expand_rec(live)?;
                out.extend(self.expand_rec(dead)?);
                Ok(out)
            }
        }
    }

    /// Solve one conjunction of subtyping constraints, exhaustively.
    pub fn tally_conj(&mut self, subs: &[(Ty, Ty)]) -> Result<Vec<TySubst>, TallyError> {
        self.tally_conj_capped(subs, usize::MAX)
    }

    /// Whether one conjunction has any solution at all.
    pub fn solvable(&mut self, subs: &[(Ty, Ty)]) -> Result<bool, TallyError> {
        Ok(!self.tally_conj_capped(subs, 1)?.is_empty())
    }

    /// Backtracking search: normalize one constraint at a time, fork on
    /// its alternative bound sets depth-first, and saturate and solve only
    /// completed branches. Solutions stream out until `cap` is reached, so
    /// a conjunction whose alternatives would multiply beyond reach still
    /// yields its first solutions cheaply.
    fn tally_conj_capped(
        &mut self,
        subs: &[(Ty, Ty)],
        cap: usize,
    ) -> Result<Vec<TySubst>, TallyError> {
        // Flexible variables the constraints mention; solutions must bind
        // all of them (fresh variables stand in for the unconstrained).
        let mut flex: BTreeSet<TyVar> = BTreeSet::new();
        for &(l, r) in subs {
            for side in [l, r] {
                for v in self.st.free_ty_vars(side).iter() {
                    if !self.rigid.contains(v) {
                        flex.insert(*v);
                    }
                }
            }
        }

        // Most constrained first: constraints over few flexible variables
        // pin bounds down before wide application constraints fork, so
        // doomed forks die at the merge instead of deep in the search.
        let mut subs: Vec<(Ty, Ty)> = subs.to_vec();
        let mut var_count: HashMap<(Ty, Ty), usize> = HashMap::new();
        for &(l, r) in &subs {
            let mut vs: BTreeSet<TyVar> = BTreeSet::new();
            for side in [l, r] {
                for v in self.st.free_ty_vars(side).iter() {
                    if !self.rigid.contains(v) {
                        vs.insert(*v);
                    }
                }
            }
            var_count.insert((l, r), vs.len());
        }
        subs.sort_by_key(|k| var_count[k]);
        let subs = &subs[..];

        let mut out: Vec<TySubst> = Vec::new();
        let mut emitted: BTreeSet<TySubst> = BTreeSet::new();
        let mut leaves: BTreeSet<Bounds> = BTreeSet::new();
        let mut stack: Vec<(usize, Bounds)> = vec![(0, Bounds::new())];
        'search: while let Some((i, bounds)) = stack.pop() {
            self.tick()?;
            if i == subs.len() {
                if !leaves.insert(bounds.clone()) {
                    continue;
                }
                let mut single = CsSet::new();
                single.insert(bounds);
                for b in self.saturate(single)? {
                    let Some(theta) = self.solve_bounds(&b) else {
                        continue;
                    };
                    let theta = self.complete_domain(theta, &flex);
                    debug_assert!(
                        subs.iter().all(|&(l, r)| {
                            let ls = self.st.apply_subst(l, &theta);
                            let rs = self.st.apply_subst(r, &theta);
                            is_subtype(self.st, ls, rs)
                        }),
                        "tallying produced a non-solution"
                    );
                    if emitted.insert(theta.clone()) {
                        out.push(theta);
                        if out.len() == 1 && std::env::var("MINERL_TALLY_DEBUG").is_ok() {
                            eprintln!("      first sol at {} steps", self.steps);
                        }
                        if out.len() >= cap {
                            break 'search;
                        }
                    }
                }
                continue;
            }
            let (l, r) = subs[i];
            let d = self.st.mk_diff(l, r);
            let normed = self.norm(d, &BTreeSet::new())?;
            // Reversed push keeps the first alternative on top.
            for e in normed.iter().rev() {
                let merged = self.merge_bounds(&bounds, e);
                if !self.plainly_unsat(&merged) && !self.dead_on_arrival(&bounds, &merged)? {
                    stack.push((i + 1, merged));
                }
            }
            if stack.len() > MAX_ALTERNATIVES {
                return Err(TallyError::Budget);
            }
        }
        Ok(out)
    }

    // -- normalization ------------------------------------------------------

    /// Alternative bound sets under which `t` is empty. `seen` carries the
    /// types whose emptiness is currently assumed (coinduction through
    /// constructors).
    fn norm(&mut self, t: Ty, seen: &BTreeSet<Ty>) -> Result<CsSet, TallyError> {
        self.tick()?;
        // A type whose variables are all rigid cannot be influenced by any
        // substitution: decide emptiness outright.
        let fv = self.st.free_ty_vars(t);
        if fv.iter().all(|v| self.rigid.contains(v)) {
            return Ok(if is_empty(self.st, t) { sat() } else { CsSet::new() });
        }
        if seen.contains(&t) {
            return Ok(sat());
        }
        let top_level = seen.is_empty();
        if top_level {
            if let Some(hit) = self.norm_cache.get(&t) {
                return Ok(hit.clone());
            }
        }
        let mut inner = seen.clone();
        inner.insert(t);
        let lines = dnf(self.st, t);
        let mut acc = sat();
        for line in lines.iter() {
            let atoms = split_atoms(self.st, line);
            let s = self.norm_line(&atoms, &inner)?;
            acc = self.meet(&acc, &s)?;
            if acc.is_empty() {
                break;
            }
        }
        if top_level {
            self.norm_cache.insert(t, acc.clone());
        }
        Ok(acc)
    }

    fn norm_line(
        &mut self,
        atoms: &crate::subty::LineAtoms,
        seen: &BTreeSet<Ty>,
    ) -> Result<CsSet, TallyError> {
        self.tick()?;
        if atoms.pos_vars.iter().any(|v| atoms.neg_vars.contains(v)) {
            return Ok(sat());
        }
        // Bound the smallest flexible top-level variable, if any: the rest
        // of the line becomes its bound.
        let mut candidate: Option<(TyVar, Ty, bool)> = None;
        for (&atom, positive) in atoms
            .pos_vars
            .iter()
            .map(|a| (a, true))
            .chain(atoms.neg_vars.iter().map(|a| (a, false)))
        {
            let TyNode::Var(v) = *self.st.node(atom) else {
                unreachable!("variable atom");
            };
            if self.rigid.contains(&v) {
                continue;
            }
            if candidate.map_or(true, |(best, _, _)| v < best) {
                candidate = Some((v, atom, positive));
            }
        }
        if let Some((v, atom, positive)) = candidate {
            let rest = self.line_without(atoms, atom);
            let mut bounds = Bounds::new();
            if positive {
                let hi = self.st.mk_neg(rest);
                bounds.insert(v, (None, Some(hi)));
            } else {
                bounds.insert(v, (Some(rest), None));
            }
            let mut out = CsSet::new();
            out.insert(bounds);
            return Ok(out);
        }
        // Only rigid variables on top: no substitution can constrain them,
        // so drop them and decide by constructor kind.
        let kinds = [
            !atoms.pos_base.is_empty(),
            !atoms.pos_pairs.is_empty(),
            !atoms.pos_arrows.is_empty(),
        ];
        match kinds.iter().filter(|&&k| k).count() {
            0 => {
                if !base_line_empty(true, &atoms.pos_base, &atoms.neg_base) {
                    return Ok(CsSet::new());
                }
                let top = self.st.top();
                let pairs = self.norm_pairs(top, top, &atoms.neg_pairs, seen)?;
                if pairs.is_empty() {
                    return Ok(CsSet::new());
                }
                let bot = self.st.bottom();
                let all_funs = [(bot, top)];
                let arrows = self.norm_arrows(&all_funs, &atoms.neg_arrows, seen)?;
                self.meet(&pairs, &arrows)
            }
            1 => {
                if !atoms.pos_base.is_empty() {
                    // base atoms never contain variables
                    Ok(if base_line_empty(false, &atoms.pos_base, &atoms.neg_base) {
                        sat()
                    } else {
                        CsSet::new()
                    })
                } else if !atoms.pos_pairs.is_empty() {
                    let (t1, t2) = intersect_components(self.st, &atoms.pos_pairs);
                    self.norm_pairs(t1, t2, &atoms.neg_pairs, seen)
                } else {
                    self.norm_arrows(&atoms.pos_arrows, &atoms.neg_arrows, seen)
                }
            }
            _ => Ok(sat()),
        }
    }

    /// The line as a type, with one variable atom removed.
    fn line_without(&mut self, atoms: &crate::subty::LineAtoms, drop: Ty) -> Ty {
        let mut parts: Vec<Ty> = Vec::new();
        for &a in atoms.pos_vars.iter().filter(|&&a| a != drop) {
            parts.push(a);
        }
        for b in &atoms.pos_base {
            let t = self.st.mk_base(b.clone());
            parts.push(t);
        }
        for &(x, y) in &atoms.pos_pairs {
            let t = self.st.mk_pair(x, y);
            parts.push(t);
        }
        for &(x, y) in &atoms.pos_arrows {
            let t = self.st.mk_arrow(x, y);
            parts.push(t);
        }
        for &a in atoms.neg_vars.iter().filter(|&&a| a != drop) {
            let t = self.st.mk_neg(a);
            parts.push(t);
        }
        for b in atoms.neg_base.clone() {
            let t = self.st.mk_base(b);
            let n = self.st.mk_neg(t);
            parts.push(n);
        }
        for &(x, y) in &atoms.neg_pairs {
            let t = self.st.mk_pair(x, y);
            let n = self.st.mk_neg(t);
            parts.push(n);
        }
        for &(x, y) in &atoms.neg_arrows {
            let t = self.st.mk_arrow(x, y);
            let n = self.st.mk_neg(t);
            parts.push(n);
        }
        self.st.mk_inter_all(parts)
    }

    /// Ways to make (t1, t2) ∖ negs empty: empty a component, or charge
    /// the first negative pair to both components and recurse.
    fn norm_pairs(
        &mut self,
        t1: Ty,
        t2: Ty,
        negs: &[(Ty, Ty)],
        seen: &BTreeSet<Ty>,
    ) -> Result<CsSet, TallyError> {
        self.tick()?;
        let a = self.norm(t1, seen)?;
        let b = self.norm(t2, seen)?;
        let mut out = join(a, b);
        if let Some((&(s1, s2), rest)) = negs.split_first() {
            let l1 = self.st.mk_diff(t1, s1);
            let left = self.norm_pairs(l1, t2, rest, seen)?;
            if !left.is_empty() {
                let r2 = self.st.mk_diff(t2, s2);
                let right = self.norm_pairs(t1, r2, rest, seen)?;
                let both = self.meet(&left, &right)?;
                out = join(out, both);
            }
        }
        Ok(out)
    }

    /// Ways to make an all-arrow line empty: some negative arrow must be
    /// covered by the positives.
    fn norm_arrows(
        &mut self,
        pos: &[(Ty, Ty)],
        negs: &[(Ty, Ty)],
        seen: &BTreeSet<Ty>,
    ) -> Result<CsSet, TallyError> {
        let mut out = CsSet::new();
        for &(nd, nc) in negs {
            let t2 = self.st.mk_neg(nc);
            let s = self.norm_phi(nd, t2, false, pos, seen)?;
            out = join(out, s);
        }
        Ok(out)
    }

    fn norm_phi(
        &mut self,
        t1: Ty,
        t2: Ty,
        armed: bool,
        rest: &[(Ty, Ty)],
        seen: &BTreeSet<Ty>,
    ) -> Result<CsSet, TallyError> {
        self.tick()?;
        let mut out = self.norm(t1, seen)?;
        if armed {
            let s = self.norm(t2, seen)?;
            out = join(out, s);
        }
        if let Some((&(d, c), rs)) = rest.split_first() {
            let l1 = self.st.mk_diff(t1, d);
            let left = self.norm_phi(l1, t2, armed, rs, seen)?;
            if !left.is_empty() {
                let ti = self.st.mk_inter(t2, c);
                let right = self.norm_phi(t1, ti, true, rs, seen)?;
                let both = self.meet(&left, &right)?;
                out = join(out, both);
            }
        }
        Ok(out)
    }

    // -- combination ----------------------------------------------------------

    fn meet(&mut self, a: &CsSet, b: &CsSet) -> Result<CsSet, TallyError> {
        let mut out = CsSet::new();
        for x in a {
            for y in b {
                self.tick()?;
                let merged = self.merge_bounds(x, y);
                if !self.plainly_unsat(&merged) {
                    out.insert(merged);
                }
                if out.len() > MAX_ALTERNATIVES {
                    return Err(TallyError::Budget);
                }
            }
        }
        Ok(out)
    }

    /// Join or intersect two bounds, preferring the existing type when one
    /// side subsumes the other. Keeping merged bounds in a recognizable
    /// form lets identical alternatives collapse instead of accumulating
    /// as structurally distinct union chains.
    fn join_lo(&mut self, a: Ty, b: Ty) -> Ty {
        if is_subtype(self.st, a, b) {
            b
        } else if is_subtype(self.st, b, a) {
            a
        } else {
            self.st.mk_union(a, b)
        }
    }

    fn meet_hi(&mut self, a: Ty, b: Ty) -> Ty {
        if is_subtype(self.st, a, b) {
            a
        } else if is_subtype(self.st, b, a) {
            b
        } else {
            self.st.mk_inter(a, b)
        }
    }

    fn merge_bounds(&mut self, x: &Bounds, y: &Bounds) -> Bounds {
        let mut out = x.clone();
        for (&v, &(lo, hi)) in y {
            let e = out.entry(v).or_insert((None, None));
            e.0 = match (e.0, lo) {
                (Some(a), Some(b)) => Some(self.join_lo(a, b)),
                (a, b) => a.or(b),
            };
            e.1 = match (e.1, hi) {
                (Some(a), Some(b)) => Some(self.meet_hi(a, b)),
                (a, b) => a.or(b),
            };
        }
        out
    }

    /// A bound set is dead if some lower bound provably escapes its upper
    /// bound. The check is exact when both sides mention no flexible
    /// variables (rigid ones are opaque constants) and is skipped
    /// otherwise, since flexible occurrences could still be instantiated.
    fn plainly_unsat(&mut self, bounds: &Bounds) -> bool {
        for &(lo, hi) in bounds.values() {
            let (Some(lo), Some(hi)) = (lo, hi) else { continue };
            if self.all_rigid(lo) && self.all_rigid(hi) && !is_subtype(self.st, lo, hi) {
                return true;
            }
        }
        false
    }

    /// Forward check: a freshly merged bound pair whose consequence
    /// lower ≤ upper normalizes to no alternatives can never be saturated,
    /// so the whole branch is dead. Checking at merge time prunes doomed
    /// subtrees long before leaf saturation would discover them; the norm
    /// results are cached, so the later saturation pass repays nothing.
    /// Only pairs that changed relative to `before` are tested.
    fn dead_on_arrival(&mut self, before: &Bounds, merged: &Bounds) -> Result<bool, TallyError> {
        for (v, &(lo, hi)) in merged {
            let (Some(lo), Some(hi)) = (lo, hi) else { continue };
            if before.get(v) == Some(&(Some(lo), Some(hi))) {
                continue;
            }
            let d = self.st.mk_diff(lo, hi);
            if self.norm(d, &BTreeSet::new())?.is_empty() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn all_rigid(&mut self, t: Ty) -> bool {
        self.st.free_ty_vars(t).iter().all(|v| self.rigid.contains(v))
    }

    // -- saturation -----------------------------------------------------------

    /// Close each bound set under lower ≤ upper for every doubly-bounded
    /// variable; normalizing that consequence may fork a set into several
    /// or kill it.
    fn saturate(&mut self, alts: CsSet) -> Result<CsSet, TallyError> {
        type Processed = BTreeSet<(TyVar, Ty, Ty)>;
        let mut done = CsSet::new();
        let mut work: Vec<(Bounds, Processed)> =
            alts.into_iter().map(|b| (b, Processed::new())).collect();
        let mut visited: BTreeSet<(Bounds, Processed)> = BTreeSet::new();
        while let Some((bounds, processed)) = work.pop() {
            self.tick()?;
            let next = bounds.iter().find_map(|(&v, &(lo, hi))| match (lo, hi) {
                (Some(l), Some(h)) if !processed.contains(&(v, l, h)) => Some((v, l, h)),
                _ => None,
            });
            let Some((v, l, h)) = next else {
                done.insert(bounds);
                continue;
            };
            let d = self.st.mk_diff(l, h);
            let extra = self.norm(d, &BTreeSet::new())?;
            let mut processed = processed;
            processed.insert((v, l, h));
            for e in &extra {
                let merged = self.merge_bounds(&bounds, e);
                if self.plainly_unsat(&merged) || self.dead_on_arrival(&bounds, &merged)? {
                    continue;
                }
                let item = (merged, processed.clone());
                if visited.insert(item.clone()) {
                    work.push(item);
                }
                if work.len() > MAX_ALTERNATIVES {
                    return Err(TallyError::Budget);
                }
            }
        }
        Ok(done)
    }

    // -- solving ----------------------------------------------------------------

    /// Turn one saturated bound set into a substitution: each variable is
    /// pinned between its bounds with fresh slack, and the resulting
    /// equation system is solved into (possibly recursive) types. Cyclic
    /// dependencies that never pass a constructor have no regular
    /// solution; those sets are dropped.
    fn solve_bounds(&mut self, bounds: &Bounds) -> Option<TySubst> {
        let mut eqs: BTreeMap<TyVar, Ty> = BTreeMap::new();
        for (&v, &(lo, hi)) in bounds {
            debug_assert!(!self.rigid.contains(&v), "rigid variables are never bounded");
            let hint = self.st.var_name(v).to_string();
            let slack = self.st.fresh_var(&hint);
            let slack = self.st.mk_var(slack);
            let rhs = match (lo, hi) {
                (Some(l), Some(h)) => {
                    let u = self.st.mk_union(l, slack);
                    self.st.mk_inter(u, h)
                }
                (Some(l), None) => self.st.mk_union(l, slack),
                (None, Some(h)) => self.st.mk_inter(slack, h),
                (None, None) => slack,
            };
            eqs.insert(v, rhs);
        }
        self.st.solve_equations(&eqs).ok()
    }

    /// Extend a substitution so it binds every flexible variable of the
    /// constraint: unbounded ones map to fresh variables, also renaming
    /// their occurrences inside the solved images.
    fn complete_domain(&mut self, theta: TySubst, flex: &BTreeSet<TyVar>) -> TySubst {
        let mut renaming = TySubst::new();
        for &v in flex {
            if !theta.contains_key(&v) {
                let hint = self.st.var_name(v).to_string();
                let f = self.st.fresh_var(&hint);
                let fv = self.st.mk_var(f);
                renaming.insert(v, fv);
            }
        }
        if renaming.is_empty() {
            theta
        } else {
            compose_subst(self.st, &theta, &renaming)
        }
    }
}

fn join(mut a: CsSet, b: CsSet) -> CsSet {
    a.extend(b);
    a
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
