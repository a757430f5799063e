//! Hash-consed type graphs with equi-recursive structure.
//!
//! Invariants:
//! * A `Ty` is an index into its `TyStore`; handles from different stores
//!   must never be mixed.
//! * Acyclic nodes are deduplicated structurally; cyclic clusters are
//!   deduplicated by shape (bisimulation up to the ids of their acyclic
//!   leaves), so building the same recursive type twice yields the same id.
//! * Every cycle passes through a `Pair` or `Arrow` node. `mk_rec`,
//!   `mk_rec_system` and `solve_equations` reject other cycles with
//!   [`TyError::Contractiveness`]; this is what makes disjunctive normal
//!   form expansion terminate.
//! * Stores are single-threaded; operations that allocate or decide take
//!   `&mut TyStore` and results are deterministic per store history.

use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use crate::ast::{Const, GuardType};

pub type TySubst = BTreeMap<TyVar, Ty>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TyError {
    /// A recursive definition reaches itself through unions and negations
    /// only, e.g. `rec X. X | Int`.
    Contractiveness,
}

impl std::fmt::Display for TyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TyError::Contractiveness => {
                write!(f, "recursive type is not contractive")
            }
        }
    }
}

impl std::error::Error for TyError {}

/// Type variable. Ordered by allocation index; the constraint solver relies
/// on this order when it picks which variable of a constraint to isolate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TyVar(pub u32);

/// Handle to an interned type node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ty(u32);

impl Ty {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BaseTy {
    Int,
    Float,
    /// Singleton type of one integer constant.
    IntLit(BigInt),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TyNode {
    Var(TyVar),
    Base(BaseTy),
    Union(Ty, Ty),
    Neg(Ty),
    Pair(Ty, Ty),
    Arrow(Ty, Ty),
    /// Unpatched placeholder during recursive construction; never reachable
    /// from a handle returned to callers.
    Hole,
}

/// Type scheme `forall vars. body`. Bound variables are ordinary store
/// variables and globally unique, so capture cannot occur as long as
/// substitutions never mention them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TyScheme {
    pub vars: BTreeSet<TyVar>,
    pub body: Ty,
}

impl TyScheme {
    pub fn mono(body: Ty) -> TyScheme {
        TyScheme { vars: BTreeSet::new(), body }
    }
}

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

/// Token of the canonical serialization of a cyclic cluster. Two clusters
/// get the same token stream exactly when they have the same shape over the
/// same external leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum KeyTok {
    U,
    N,
    P,
    A,
    V(TyVar),
    B(BaseTy),
    Ext(Ty),
    Back(u32),
}

pub struct TyStore {
    nodes: Vec<TyNode>,
    intern: HashMap<TyNode, Ty>,
    cyclic: HashMap<Vec<KeyTok>, Ty>,
    var_names: Vec<String>,
    name_index: HashMap<String, TyVar>,
    top_cell: Option<Ty>,
    bottom_cell: Option<Ty>,
    fv_cache: HashMap<Ty, Rc<BTreeSet<TyVar>>>,
    pub(crate) dnf_cache: HashMap<Ty, Rc<Vec<crate::subty::DnfLine>>>,
    pub(crate) empty_cache: HashMap<Ty, bool>,
}

impl Default for TyStore {
    fn default() -> Self {
        TyStore::new()
    }
}

impl TyStore {
    pub fn new() -> TyStore {
        TyStore {
            nodes: Vec::new(),
            intern: HashMap::new(),
            cyclic: HashMap::new(),
            var_names: Vec::new(),
            name_index: HashMap::new(),
            top_cell: None,
            bottom_cell: None,
            fv_cache: HashMap::new(),
            dnf_cache: HashMap::new(),
            empty_cache: HashMap::new(),
        }
    }

    pub fn node(&self, t: Ty) -> &TyNode {
        &self.nodes[t.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn alloc(&mut self, node: TyNode) -> Ty {
        let id = Ty(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    fn mk_node(&mut self, node: TyNode) -> Ty {
        debug_assert!(!matches!(node, TyNode::Hole));
        if let Some(&id) = self.intern.get(&node) {
            return id;
        }
        let id = self.alloc(node.clone());
        self.intern.insert(node, id);
        id
    }

    // -- variables ----------------------------------------------------------

    /// Fresh variable with a machine-generated display name.
    pub fn fresh_var(&mut self, hint: &str) -> TyVar {
        let id = self.var_names.len() as u32;
        let name = if hint.is_empty() {
            format!("v{id}")
        } else {
            format!("{hint}{id}")
        };
        self.var_names.push(name);
        TyVar(id)
    }

    /// Variable for a name written in source: one `TyVar` per distinct
    /// name, so `'a` denotes the same variable wherever it appears.
    pub fn named_var(&mut self, name: &str) -> TyVar {
        if let Some(&v) = self.name_index.get(name) {
            return v;
        }
        let id = self.var_names.len() as u32;
        self.var_names.push(name.to_string());
        let v = TyVar(id);
        self.name_index.insert(name.to_string(), v);
        v
    }

    pub fn var_name(&self, v: TyVar) -> &str {
        &self.var_names[v.0 as usize]
    }

    // -- constructors -------------------------------------------------------

    pub fn mk_var(&mut self, v: TyVar) -> Ty {
        self.mk_node(TyNode::Var(v))
    }

    pub fn mk_base(&mut self, b: BaseTy) -> Ty {
        self.mk_node(TyNode::Base(b))
    }

    pub fn mk_int(&mut self) -> Ty {
        self.mk_base(BaseTy::Int)
    }

    pub fn mk_float(&mut self) -> Ty {
        self.mk_base(BaseTy::Float)
    }

    pub fn mk_int_lit(&mut self, n: impl Into<BigInt>) -> Ty {
        self.mk_base(BaseTy::IntLit(n.into()))
    }

    pub fn mk_union(&mut self, a: Ty, b: Ty) -> Ty {
        if a == b {
            return a;
        }
        if self.bottom_cell == Some(a) {
            return b;
        }
        if self.bottom_cell == Some(b) {
            return a;
        }
        if self.top_cell == Some(a) || self.top_cell == Some(b) {
            return self.top_cell.unwrap();
        }
        self.mk_node(TyNode::Union(a, b))
    }

    pub fn mk_neg(&mut self, a: Ty) -> Ty {
        if let TyNode::Neg(inner) = *self.node(a) {
            return inner;
        }
        self.mk_node(TyNode::Neg(a))
    }

    pub fn mk_pair(&mut self, a: Ty, b: Ty) -> Ty {
        self.mk_node(TyNode::Pair(a, b))
    }

    pub fn mk_arrow(&mut self, dom: Ty, cod: Ty) -> Ty {
        self.mk_node(TyNode::Arrow(dom, cod))
    }

    /// Intersection, encoded as `!(!a | !b)`.
    pub fn mk_inter(&mut self, a: Ty, b: Ty) -> Ty {
        if a == b {
            return a;
        }
        if self.top_cell == Some(a) {
            return b;
        }
        if self.top_cell == Some(b) {
            return a;
        }
        if self.bottom_cell == Some(a) || self.bottom_cell == Some(b) {
            return self.bottom_cell.unwrap();
        }
        let na = self.mk_neg(a);
        let nb = self.mk_neg(b);
        let u = self.mk_union(na, nb);
        self.mk_neg(u)
    }

    /// Difference, encoded as `a & !b`.
    pub fn mk_diff(&mut self, a: Ty, b: Ty) -> Ty {
        let nb = self.mk_neg(b);
        self.mk_inter(a, nb)
    }

    pub fn mk_union_all(&mut self, parts: impl IntoIterator<Item = Ty>) -> Ty {
        let mut acc = self.bottom();
        for p in parts {
            acc = self.mk_union(acc, p);
        }
        acc
    }

    pub fn mk_inter_all(&mut self, parts: impl IntoIterator<Item = Ty>) -> Ty {
        let mut acc = self.top();
        for p in parts {
            acc = self.mk_inter(acc, p);
        }
        acc
    }

    /// The universal type `Int | Float | (Any, Any) | (Empty -> Any)`, tied
    /// into a cycle so that pairs and functions over anything are included.
    pub fn top(&mut self) -> Ty {
        if let Some(t) = self.top_cell {
            return t;
        }
        let int = self.mk_int();
        let float = self.mk_float();
        let t = self
            .mk_rec::<TyError, _>(|st, ph| {
                let pair = st.mk_pair(ph, ph);
                let none = st.mk_neg(ph);
                let arrow = st.mk_arrow(none, ph);
                let scalars = st.mk_union(int, float);
                let shapes = st.mk_union(pair, arrow);
                Ok(TyNode::Union(scalars, shapes))
            })
            .expect("universal type is contractive");
        self.top_cell = Some(t);
        let b = self.mk_neg(t);
        self.bottom_cell = Some(b);
        t
    }

    pub fn bottom(&mut self) -> Ty {
        if self.bottom_cell.is_none() {
            self.top();
        }
        self.bottom_cell.unwrap()
    }

    pub fn is_top_id(&self, t: Ty) -> bool {
        self.top_cell == Some(t)
    }

    pub fn is_bottom_id(&self, t: Ty) -> bool {
        self.bottom_cell == Some(t)
    }

    // -- recursive construction ---------------------------------------------

    /// Build a possibly recursive type. The closure receives a placeholder
    /// handle it may embed into sub-terms built with the ordinary
    /// constructors; the node it returns becomes the placeholder's content.
    ///
    /// Fails if the definition reaches the placeholder through unions and
    /// negations only.
    pub fn mk_rec<E, F>(&mut self, build: F) -> Result<Ty, E>
    where
        F: FnOnce(&mut TyStore, Ty) -> Result<TyNode, E>,
        E: From<TyError>,
    {
        let out = self.mk_rec_system(1, |st, phs| build(st, phs[0]).map(|n| vec![n]))?;
        Ok(out[0])
    }

    /// Allocate a placeholder for an explicitly staged recursive build;
    /// finish it with `rec_complete`. Prefer `mk_rec` where a closure
    /// suffices; this form exists for builders that cannot hand the store
    /// to a closure (the parser threads it through recursive descent).
    pub fn rec_placeholder(&mut self) -> Ty {
        self.alloc(TyNode::Hole)
    }

    /// Patch a placeholder from `rec_placeholder` with its final node,
    /// check contractiveness, and fold the result into the interning maps.
    /// Placeholders still open (from enclosing staged builds) are left
    /// untouched and treated as opaque leaves.
    pub fn rec_complete(&mut self, ph: Ty, node: TyNode) -> Result<Ty, TyError> {
        self.nodes[ph.index()] = node;
        self.check_contractive(ph)?;
        Ok(self.canonicalize(&[ph], ph.index())[0])
    }

    /// Build a mutually recursive family of types in one step: `build`
    /// receives one placeholder per slot and returns the node for each.
    pub fn mk_rec_system<E, F>(&mut self, n: usize, build: F) -> Result<Vec<Ty>, E>
    where
        F: FnOnce(&mut TyStore, &[Ty]) -> Result<Vec<TyNode>, E>,
        E: From<TyError>,
    {
        let first_new = self.nodes.len();
        let phs: Vec<Ty> = (0..n).map(|_| self.alloc(TyNode::Hole)).collect();
        let nodes = build(self, &phs)?;
        assert_eq!(nodes.len(), n, "mk_rec_system arity mismatch");
        for (ph, node) in phs.iter().zip(nodes) {
            self.nodes[ph.index()] = node;
        }
        for &ph in &phs {
            self.check_contractive(ph)?;
        }
        Ok(self.canonicalize(&phs, first_new))
    }

    fn children(&self, t: Ty) -> Vec<Ty> {
        match *self.node(t) {
            TyNode::Union(a, b) | TyNode::Pair(a, b) | TyNode::Arrow(a, b) => vec![a, b],
            TyNode::Neg(a) => vec![a],
            _ => vec![],
        }
    }

    /// Reject graphs in which `root` lies on a cycle made of unions and
    /// negations only. Constructor children start independent walks.
    fn check_contractive(&self, root: Ty) -> Result<(), TyError> {
        let mut todo: Vec<Ty> = vec![root];
        let mut started: HashSet<Ty> = HashSet::new();
        while let Some(start) = todo.pop() {
            if !started.insert(start) {
                continue;
            }
            // DFS from `start` along union/negation edges; constructor
            // children are queued as new walk roots.
            let mut state: HashMap<Ty, u8> = HashMap::new(); // 1 on path, 2 done
            let mut stack: Vec<(Ty, usize)> = vec![(start, 0)];
            while let Some((t, ix)) = stack.pop() {
                let soft: Vec<Ty> = match *self.node(t) {
                    TyNode::Union(a, b) => vec![a, b],
                    TyNode::Neg(a) => vec![a],
                    TyNode::Pair(a, b) | TyNode::Arrow(a, b) => {
                        todo.push(a);
                        todo.push(b);
                        vec![]
                    }
                    _ => vec![],
                };
                if ix == 0 {
                    state.insert(t, 1);
                }
                if ix < soft.len() {
                    stack.push((t, ix + 1));
                    let c = soft[ix];
                    match state.get(&c) {
                        Some(1) => return Err(TyError::Contractiveness),
                        Some(_) => {}
                        None => stack.push((c, 0)),
                    }
                } else {
                    state.insert(t, 2);
                }
            }
        }
        Ok(())
    }

    /// Fold freshly patched nodes back into the interning maps. Works on the
    /// subgraph of nodes allocated at or after `first_new` reachable from
    /// `roots`: acyclic nodes re-intern structurally, strongly connected
    /// clusters deduplicate by canonical serialization.
    fn canonicalize(&mut self, roots: &[Ty], first_new: usize) -> Vec<Ty> {
        let cand: HashSet<Ty> = {
            let mut seen = HashSet::new();
            let mut queue: Vec<Ty> = roots
                .iter()
                .copied()
                .filter(|t| t.index() >= first_new)
                .collect();
            while let Some(t) = queue.pop() {
                if seen.insert(t) {
                    for c in self.children(t) {
                        if c.index() >= first_new {
                            queue.push(c);
                        }
                    }
                }
            }
            seen
        };
        let sccs = self.tarjan(&cand);
        let mut redirect: HashMap<Ty, Ty> = HashMap::new();
        let resolve = |redirect: &HashMap<Ty, Ty>, c: Ty| redirect.get(&c).copied().unwrap_or(c);
        for scc in sccs {
            let self_contained = scc.len() > 1
                || self.children(scc[0]).contains(&scc[0]);
            if !self_contained {
                let t = scc[0];
                if matches!(self.node(t), TyNode::Hole) {
                    // Placeholder of an enclosing staged build; opaque here.
                    continue;
                }
                if self.intern.get(self.node(t)) == Some(&t) {
                    // Already interned (constructed through mk_node during a
                    // builder). Its stored children stay as they are; they
                    // may point at superseded duplicates, which costs
                    // sharing but keeps every node's meaning intact.
                    continue;
                }
                let node = match *self.node(t) {
                    TyNode::Union(a, b) => {
                        TyNode::Union(resolve(&redirect, a), resolve(&redirect, b))
                    }
                    TyNode::Neg(a) => TyNode::Neg(resolve(&redirect, a)),
                    TyNode::Pair(a, b) => {
                        TyNode::Pair(resolve(&redirect, a), resolve(&redirect, b))
                    }
                    TyNode::Arrow(a, b) => {
                        TyNode::Arrow(resolve(&redirect, a), resolve(&redirect, b))
                    }
                    ref other => other.clone(),
                };
                let id = self.reintern(node);
                if id != t {
                    redirect.insert(t, id);
                }
                continue;
            }
            // Cyclic cluster: patch raw members through the redirects, then
            // deduplicate the cluster by shape.
            let members: HashSet<Ty> = scc.iter().copied().collect();
            for &m in &scc {
                if self.intern.get(self.node(m)) == Some(&m) {
                    continue;
                }
                let node = match *self.node(m) {
                    TyNode::Union(a, b) => {
                        TyNode::Union(resolve(&redirect, a), resolve(&redirect, b))
                    }
                    TyNode::Neg(a) => TyNode::Neg(resolve(&redirect, a)),
                    TyNode::Pair(a, b) => {
                        TyNode::Pair(resolve(&redirect, a), resolve(&redirect, b))
                    }
                    TyNode::Arrow(a, b) => {
                        TyNode::Arrow(resolve(&redirect, a), resolve(&redirect, b))
                    }
                    ref other => other.clone(),
                };
                self.nodes[m.index()] = node;
            }
            let keys: Vec<Vec<KeyTok>> = scc
                .iter()
                .map(|&m| self.serialize_cluster(m, &members))
                .collect();
            let hits: Vec<Option<Ty>> = keys.iter().map(|k| self.cyclic.get(k).copied()).collect();
            if hits.iter().all(Option::is_some) {
                for (&m, h) in scc.iter().zip(&hits) {
                    let h = h.unwrap();
                    if h != m {
                        redirect.insert(m, h);
                    }
                }
            } else {
                for (m, key) in scc.iter().zip(keys) {
                    self.cyclic.entry(key).or_insert(*m);
                }
            }
        }
        roots.iter().map(|&r| resolve(&redirect, r)).collect()
    }

    fn reintern(&mut self, node: TyNode) -> Ty {
        match node {
            TyNode::Union(a, b) => self.mk_union(a, b),
            TyNode::Neg(a) => self.mk_neg(a),
            other => self.mk_node(other),
        }
    }

    /// Strongly connected components of `cand`, in reverse topological
    /// order (children before parents). Iterative Tarjan.
    fn tarjan(&self, cand: &HashSet<Ty>) -> Vec<Vec<Ty>> {
        struct Frame {
            t: Ty,
            child_ix: usize,
        }
        let mut index: HashMap<Ty, u32> = HashMap::new();
        let mut low: HashMap<Ty, u32> = HashMap::new();
        let mut on_stack: HashSet<Ty> = HashSet::new();
        let mut stack: Vec<Ty> = Vec::new();
        let mut next = 0u32;
        let mut out: Vec<Vec<Ty>> = Vec::new();
        let mut starts: Vec<Ty> = cand.iter().copied().collect();
        starts.sort();
        for &start in &starts {
            if index.contains_key(&start) {
                continue;
            }
            let mut frames = vec![Frame { t: start, child_ix: 0 }];
            index.insert(start, next);
            low.insert(start, next);
            next += 1;
            stack.push(start);
            on_stack.insert(start);
            while let Some(frame) = frames.last_mut() {
                let t = frame.t;
                let children: Vec<Ty> = self
                    .children(t)
                    .into_iter()
                    .filter(|c| cand.contains(c))
                    .collect();
                if frame.child_ix < children.len() {
                    let c = children[frame.child_ix];
                    frame.child_ix += 1;
                    if let Some(&ci) = index.get(&c) {
                        if on_stack.contains(&c) {
                            let l = low[&t].min(ci);
                            low.insert(t, l);
                        }
                    } else {
                        index.insert(c, next);
                        low.insert(c, next);
                        next += 1;
                        stack.push(c);
                        on_stack.insert(c);
                        frames.push(Frame { t: c, child_ix: 0 });
                    }
                } else {
                    frames.pop();
                    if let Some(parent) = frames.last() {
                        let l = low[&parent.t].min(low[&t]);
                        low.insert(parent.t, l);
                    }
                    if low[&t] == index[&t] {
                        let mut scc = Vec::new();
                        loop {
                            let m = stack.pop().unwrap();
                            on_stack.remove(&m);
                            scc.push(m);
                            if m == t {
                                break;
                            }
                        }
                        scc.sort();
                        out.push(scc);
                    }
                }
            }
        }
        out
    }

    /// Canonical token stream of the cluster `members` as seen from `root`.
    /// Nodes outside `members` appear as opaque external ids; repeats of a
    /// member appear as back-references by visit order.
    fn serialize_cluster(&self, root: Ty, members: &HashSet<Ty>) -> Vec<KeyTok> {
        let mut out = Vec::new();
        let mut pos: HashMap<Ty, u32> = HashMap::new();
        let mut stack = vec![root];
        while let Some(t) = stack.pop() {
            if !members.contains(&t) {
                out.push(KeyTok::Ext(t));
                continue;
            }
            if let Some(&p) = pos.get(&t) {
                out.push(KeyTok::Back(p));
                continue;
            }
            pos.insert(t, pos.len() as u32);
            match self.node(t) {
                TyNode::Var(v) => out.push(KeyTok::V(*v)),
                TyNode::Base(b) => out.push(KeyTok::B(b.clone())),
                TyNode::Union(a, b) => {
                    out.push(KeyTok::U);
                    stack.push(*b);
                    stack.push(*a);
                }
                TyNode::Neg(a) => {
                    out.push(KeyTok::N);
                    stack.push(*a);
                }
                TyNode::Pair(a, b) => {
                    out.push(KeyTok::P);
                    stack.push(*b);
                    stack.push(*a);
                }
                TyNode::Arrow(a, b) => {
                    out.push(KeyTok::A);
                    stack.push(*b);
                    stack.push(*a);
                }
                TyNode::Hole => out.push(KeyTok::Ext(t)),
            }
        }
        out
    }

    // -- free variables -------------------------------------------------------

    /// Variables reachable in the graph of `t`. Cached per root.
    pub fn free_ty_vars(&mut self, t: Ty) -> Rc<BTreeSet<TyVar>> {
        if let Some(cached) = self.fv_cache.get(&t) {
            return Rc::clone(cached);
        }
        let mut vars = BTreeSet::new();
        let mut seen: HashSet<Ty> = HashSet::new();
        let mut queue = vec![t];
        while let Some(u) = queue.pop() {
            if !seen.insert(u) {
                continue;
            }
            if let TyNode::Var(v) = self.node(u) {
                vars.insert(*v);
            }
            queue.extend(self.children(u));
        }
        let rc = Rc::new(vars);
        self.fv_cache.insert(t, Rc::clone(&rc));
        rc
    }

    // -- substitution -----------------------------------------------------------

    /// Apply a substitution, rebuilding only the affected part of the graph.
    pub fn apply_subst(&mut self, t: Ty, s: &TySubst) -> Ty {
        if s.is_empty() {
            return t;
        }
        self.apply_subst_many(&[t], s)[0]
    }

    pub fn apply_subst_many(&mut self, roots: &[Ty], s: &TySubst) -> Vec<Ty> {
        if s.is_empty() {
            return roots.to_vec();
        }
        let affected = self.affected_nodes(roots, |v| s.contains_key(&v));
        if affected.is_empty() {
            return roots.to_vec();
        }
        let first_new = self.nodes.len();
        // Copy every affected composite node; variable leaves route to their
        // replacement.
        let mut copy: HashMap<Ty, Ty> = HashMap::new();
        for &u in &affected {
            if !matches!(self.node(u), TyNode::Var(_)) {
                let c = self.alloc(TyNode::Hole);
                copy.insert(u, c);
            }
        }
        let resolve = |st: &TyStore, copy: &HashMap<Ty, Ty>, c: Ty| -> Ty {
            if affected.contains(&c) {
                if let TyNode::Var(v) = st.node(c) {
                    return s[v];
                }
            }
            copy.get(&c).copied().unwrap_or(c)
        };
        self.patch_copies(&copy, &resolve);
        let copies: Vec<Ty> = copy.values().copied().collect();
        for &c in &copies {
            self.check_contractive(c)
                .expect("substitution preserves contractiveness");
        }
        let canon = self.canonicalize(&copies, first_new);
        let canon_of: HashMap<Ty, Ty> = copies.into_iter().zip(canon).collect();
        roots
            .iter()
            .map(|&r| {
                let r2 = resolve(self, &copy, r);
                canon_of.get(&r2).copied().unwrap_or(r2)
            })
            .collect()
    }

    /// Solve the equation system `v = rhs` for every entry; occurrences of
    /// equation variables inside right-hand sides are tied into recursive
    /// types. Fails when a variable reaches itself through unions and
    /// negations only.
    pub fn solve_equations(&mut self, eqs: &BTreeMap<TyVar, Ty>) -> Result<TySubst, TyError> {
        let mut sol = TySubst::new();
        let mut live: BTreeMap<TyVar, Ty> = eqs.clone();
        // Peel equations whose right-hand side mentions no live variable.
        loop {
            let live_vars: BTreeSet<TyVar> = live.keys().copied().collect();
            let mut ready: Vec<TyVar> = Vec::new();
            for (&v, &rhs) in &live {
                let fv = self.free_ty_vars(rhs);
                if fv.iter().all(|w| !live_vars.contains(w)) {
                    ready.push(v);
                }
            }
            if ready.is_empty() {
                break;
            }
            for v in ready {
                let rhs = live.remove(&v).unwrap();
                let r = self.apply_subst(rhs, &sol);
                sol.insert(v, r);
            }
        }
        if live.is_empty() {
            return Ok(sol);
        }
        // Remaining equations are genuinely recursive. Substitute what is
        // already solved, then resolve variable aliases `v = w`.
        let mut rhs_of: BTreeMap<TyVar, Ty> = BTreeMap::new();
        for (&v, &rhs) in &live {
            let r = self.apply_subst(rhs, &sol);
            rhs_of.insert(v, r);
        }
        let live_vars: BTreeSet<TyVar> = rhs_of.keys().copied().collect();
        let anchor = |st: &TyStore, mut v: TyVar| -> Result<TyVar, TyError> {
            let mut hops = 0;
            loop {
                let rhs = rhs_of[&v];
                if let TyNode::Var(w) = *st.node(rhs) {
                    if live_vars.contains(&w) {
                        hops += 1;
                        if hops > live_vars.len() {
                            return Err(TyError::Contractiveness);
                        }
                        v = w;
                        continue;
                    }
                }
                return Ok(v);
            }
        };
        let mut anchors: BTreeMap<TyVar, TyVar> = BTreeMap::new();
        for &v in &live_vars {
            anchors.insert(v, anchor(self, v)?);
        }
        let roots: Vec<Ty> = anchors.values().map(|a| rhs_of[a]).collect();
        let affected = self.affected_nodes(&roots, |v| live_vars.contains(&v));
        let first_new = self.nodes.len();
        let mut copy: HashMap<Ty, Ty> = HashMap::new();
        for &u in &affected {
            if !matches!(self.node(u), TyNode::Var(_)) {
                let c = self.alloc(TyNode::Hole);
                copy.insert(u, c);
            }
        }
        // Each live variable's occurrence routes to the copy of its
        // anchor's right-hand side: that ties the recursive knot.
        let mut target: HashMap<TyVar, Ty> = HashMap::new();
        for (&v, &a) in &anchors {
            let rhs = rhs_of[&a];
            let c = copy.get(&rhs).copied().ok_or(TyError::Contractiveness)?;
            target.insert(v, c);
        }
        let resolve = |st: &TyStore, copy: &HashMap<Ty, Ty>, c: Ty| -> Ty {
            if affected.contains(&c) {
                if let TyNode::Var(v) = st.node(c) {
                    if let Some(&t) = target.get(v) {
                        return t;
                    }
                }
            }
            copy.get(&c).copied().unwrap_or(c)
        };
        self.patch_copies(&copy, &resolve);
        let copies: Vec<Ty> = copy.values().copied().collect();
        for &c in &copies {
            self.check_contractive(c)?;
        }
        let canon = self.canonicalize(&copies, first_new);
        let canon_of: HashMap<Ty, Ty> = copies.into_iter().zip(canon).collect();
        for (&v, &t) in &target {
            let id = canon_of.get(&t).copied().unwrap_or(t);
            sol.insert(v, id);
        }
        Ok(sol)
    }

    fn patch_copies(
        &mut self,
        copy: &HashMap<Ty, Ty>,
        resolve: &dyn Fn(&TyStore, &HashMap<Ty, Ty>, Ty) -> Ty,
    ) {
        let targets: Vec<(Ty, Ty)> = copy.iter().map(|(&u, &c)| (u, c)).collect();
        for (u, c) in targets {
            let node = match *self.node(u) {
                TyNode::Union(a, b) => {
                    TyNode::Union(resolve(self, copy, a), resolve(self, copy, b))
                }
                TyNode::Neg(a) => TyNode::Neg(resolve(self, copy, a)),
                TyNode::Pair(a, b) => {
                    TyNode::Pair(resolve(self, copy, a), resolve(self, copy, b))
                }
                TyNode::Arrow(a, b) => {
                    TyNode::Arrow(resolve(self, copy, a), resolve(self, copy, b))
                }
                ref other => other.clone(),
            };
            self.nodes[c.index()] = node;
        }
    }

    /// Nodes reachable from `roots` whose subgraph mentions a selected
    /// variable: reverse reachability from the matching variable leaves.
    fn affected_nodes(&self, roots: &[Ty], selected: impl Fn(TyVar) -> bool) -> HashSet<Ty> {
        let mut reach: HashSet<Ty> = HashSet::new();
        let mut queue: Vec<Ty> = roots.to_vec();
        while let Some(t) = queue.pop() {
            if reach.insert(t) {
                queue.extend(self.children(t));
            }
        }
        let mut rev: HashMap<Ty, Vec<Ty>> = HashMap::new();
        let mut seeds: Vec<Ty> = Vec::new();
        for &t in &reach {
            for c in self.children(t) {
                rev.entry(c).or_default().push(t);
            }
            if let TyNode::Var(v) = self.node(t) {
                if selected(*v) {
                    seeds.push(t);
                }
            }
        }
        let mut affected: HashSet<Ty> = HashSet::new();
        while let Some(t) = seeds.pop() {
            if affected.insert(t) {
                if let Some(ps) = rev.get(&t) {
                    seeds.extend(ps.iter().copied());
                }
            }
        }
        affected
    }

    // -- schemes ----------------------------------------------------------------

    /// Quantify every free variable of `t`.
    pub fn generalize(&mut self, t: Ty) -> TyScheme {
        let vars = (*self.free_ty_vars(t)).clone();
        TyScheme { vars, body: t }
    }

    /// Replace bound variables with fresh ones; returns the renamed body and
    /// the fresh instances in bound-variable order.
    pub fn instantiate(&mut self, sc: &TyScheme) -> (Ty, Vec<TyVar>) {
        if sc.vars.is_empty() {
            return (sc.body, Vec::new());
        }
        let mut s = TySubst::new();
        let mut fresh = Vec::new();
        for &v in &sc.vars {
            let hint = self.var_name(v).to_string();
            let f = self.fresh_var(&hint);
            fresh.push(f);
            let fv = self.mk_var(f);
            s.insert(v, fv);
        }
        (self.apply_subst(sc.body, &s), fresh)
    }

    pub fn apply_subst_scheme(&mut self, sc: &TyScheme, s: &TySubst) -> TyScheme {
        let mut pruned = s.clone();
        for v in &sc.vars {
            pruned.remove(v);
        }
        TyScheme {
            vars: sc.vars.clone(),
            body: self.apply_subst(sc.body, &pruned),
        }
    }

    // -- constants and guards -----------------------------------------------------

    /// Most precise type of a constant: the singleton for an integer,
    /// `Float` for a float.
    pub fn ty_of_const(&mut self, c: &Const) -> Ty {
        match c {
            Const::Int(n) => self.mk_base(BaseTy::IntLit(n.clone())),
            Const::Float(_) => self.mk_float(),
        }
    }

    /// Type carved out by a dynamic type test.
    pub fn ty_of_guardty(&mut self, g: GuardType) -> Ty {
        match g {
            GuardType::IsInt => self.mk_int(),
            GuardType::IsFloat => self.mk_float(),
            GuardType::IsPair => {
                let t = self.top();
                self.mk_pair(t, t)
            }
            GuardType::IsFun => {
                let t = self.top();
                let b = self.bottom();
                self.mk_arrow(b, t)
            }
        }
    }
}

/// Compose substitutions: apply `first`, then `then`.
pub fn compose_subst(store: &mut TyStore, first: &TySubst, then: &TySubst) -> TySubst {
    let mut out = TySubst::new();
    for (&v, &t) in first {
        out.insert(v, store.apply_subst(t, then));
    }
    for (&v, &t) in then {
        out.entry(v).or_insert(t);
    }
    out
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

impl TyStore {
    /// Render a type in the surface grammar. Cyclic nodes print as
    /// `rec X. ...` with binders named in order of first appearance, so the
    /// output is stable for a given graph.
    pub fn ty_to_string(&self, t: Ty) -> String {
        let headers = self.loop_headers(t);
        let mut names: HashMap<Ty, String> = HashMap::new();
        let mut printer = TyPrinter {
            store: self,
            headers,
            names: &mut names,
            next_name: 0,
        };
        let mut out = String::new();
        printer.go(&mut out, t, 0, true);
        out
    }

    pub fn scheme_to_string(&self, sc: &TyScheme) -> String {
        if sc.vars.is_empty() {
            return self.ty_to_string(sc.body);
        }
        let vars: Vec<String> = sc
            .vars
            .iter()
            .map(|&v| format!("'{}", self.var_name(v)))
            .collect();
        format!("forall {}. {}", vars.join(" "), self.ty_to_string(sc.body))
    }

    /// Nodes re-entered while still on the DFS path: exactly the nodes that
    /// need a `rec` binder when printing.
    fn loop_headers(&self, root: Ty) -> HashSet<Ty> {
        let mut headers = HashSet::new();
        let mut state: HashMap<Ty, u8> = HashMap::new(); // 1 on path, 2 done
        let mut stack: Vec<(Ty, usize)> = vec![(root, 0)];
        while let Some((t, ix)) = stack.pop() {
            let children = self.children(t);
            if ix == 0 {
                state.insert(t, 1);
            }
            if ix < children.len() {
                stack.push((t, ix + 1));
                let c = children[ix];
                match state.get(&c) {
                    Some(1) => {
                        headers.insert(c);
                    }
                    Some(_) => {}
                    None => stack.push((c, 0)),
                }
            } else {
                state.insert(t, 2);
            }
        }
        headers
    }
}

struct TyPrinter<'a> {
    store: &'a TyStore,
    headers: HashSet<Ty>,
    names: &'a mut HashMap<Ty, String>,
    next_name: usize,
}

impl TyPrinter<'_> {
    fn fresh_rec_name(&mut self) -> String {
        const LETTERS: [&str; 4] = ["X", "Y", "Z", "W"];
        let n = self.next_name;
        self.next_name += 1;
        if n < 4 {
            LETTERS[n].to_string()
        } else {
            format!("{}{}", LETTERS[n % 4], n / 4)
        }
    }

    /// `prec`: 0 union, 1 intersection, 2 negation, 3 atom.
    /// `tail`: whether greedy forms (arrows, `rec`) may run to the end of
    /// the enclosing type without parentheses.
    fn go(&mut self, out: &mut String, t: Ty, prec: u8, tail: bool) {
        if self.store.is_top_id(t) {
            out.push_str("Any");
            return;
        }
        if self.store.is_bottom_id(t) {
            out.push_str("Empty");
            return;
        }
        if let Some(name) = self.names.get(&t) {
            out.push_str(name);
            return;
        }
        if self.headers.contains(&t) {
            let name = self.fresh_rec_name();
            self.names.insert(t, name.clone());
            let mut body = String::new();
            self.render(&mut body, t, 0, true);
            if prec == 0 && tail {
                out.push_str("rec ");
                out.push_str(&name);
                out.push_str(". ");
                out.push_str(&body);
            } else {
                out.push_str("(rec ");
                out.push_str(&name);
                out.push_str(". ");
                out.push_str(&body);
                out.push(')');
            }
            return;
        }
        self.render(out, t, prec, tail);
    }

    fn render(&mut self, out: &mut String, t: Ty, prec: u8, tail: bool) {
        if let Some(parts) = self.as_intersection(t) {
            let mut s = String::new();
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    s.push_str(" & ");
                }
                self.go(&mut s, *p, 2, false);
            }
            if prec > 1 {
                out.push('(');
                out.push_str(&s);
                out.push(')');
            } else {
                out.push_str(&s);
            }
            return;
        }
        match self.store.node(t) {
            TyNode::Var(v) => {
                out.push('\'');
                out.push_str(self.store.var_name(*v));
            }
            TyNode::Base(BaseTy::Int) => out.push_str("Int"),
            TyNode::Base(BaseTy::Float) => out.push_str("Float"),
            TyNode::Base(BaseTy::IntLit(n)) => out.push_str(&n.to_string()),
            TyNode::Union(..) => {
                let arms = self.union_arms(t);
                let mut s = String::new();
                for (i, a) in arms.iter().enumerate() {
                    if i > 0 {
                        s.push_str(" | ");
                    }
                    let last = i + 1 == arms.len();
                    self.go(&mut s, *a, 1, tail && last && prec == 0);
                }
                if prec > 0 {
                    out.push('(');
                    out.push_str(&s);
                    out.push(')');
                } else {
                    out.push_str(&s);
                }
            }
            TyNode::Neg(a) => {
                out.push('!');
                self.go(out, *a, 3, false);
            }
            TyNode::Pair(a, b) => {
                let (a, b) = (*a, *b);
                out.push('(');
                self.go(out, a, 0, true);
                out.push_str(", ");
                self.go(out, b, 0, true);
                out.push(')');
            }
            TyNode::Arrow(d, c) => {
                let (d, c) = (*d, *c);
                let mut s = String::new();
                self.go(&mut s, d, 3, false);
                s.push_str(" -> ");
                self.go(&mut s, c, 0, true);
                if tail {
                    out.push_str(&s);
                } else {
                    out.push('(');
                    out.push_str(&s);
                    out.push(')');
                }
            }
            TyNode::Hole => out.push_str("<hole>"),
        }
    }

    /// Flatten nested unions into one arm list, stopping at nodes that need
    /// their own `rec` binder.
    fn union_arms(&self, t: Ty) -> Vec<Ty> {
        let mut arms = Vec::new();
        let mut stack = vec![(t, true)];
        while let Some((u, is_root)) = stack.pop() {
            match self.store.node(u) {
                TyNode::Union(a, b) if is_root || !self.headers.contains(&u) => {
                    stack.push((*b, false));
                    stack.push((*a, false));
                }
                _ => arms.push(u),
            }
        }
        arms
    }

    /// Recognize `!(!a | !b | ...)` so intersections round-trip through the
    /// `&` syntax.
    fn as_intersection(&self, t: Ty) -> Option<Vec<Ty>> {
        let TyNode::Neg(inner) = self.store.node(t) else {
            return None;
        };
        let inner = *inner;
        if self.headers.contains(&inner) || self.names.contains_key(&inner) {
            return None;
        }
        if !matches!(self.store.node(inner), TyNode::Union(..)) {
            return None;
        }
        let mut arms = Vec::new();
        let mut stack = vec![(inner, true)];
        while let Some((u, is_root)) = stack.pop() {
            match self.store.node(u) {
                TyNode::Union(a, b) if is_root || !self.headers.contains(&u) => {
                    stack.push((*b, false));
                    stack.push((*a, false));
                }
                TyNode::Neg(x) if !self.headers.contains(&u) && !self.names.contains_key(&u) => {
                    arms.push(*x)
                }
                _ => return None,
            }
        }
        if arms.len() < 2 {
            return None;
        }
        Some(arms)
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn list_of(st: &mut TyStore, elem: Ty) -> Ty {
        let nil = st.mk_int_lit(0);
        st.mk_rec::<TyError, _>(|st, ph| {
            let cons = st.mk_pair(elem, ph);
            Ok(TyNode::Union(nil, cons))
        })
        .unwrap()
    }

    #[test]
    fn interning_shares_structure() {
        let mut st = TyStore::new();
        let a = st.mk_int();
        let b = st.mk_int();
        assert_eq!(a, b);
        let f = st.mk_float();
        let u1 = st.mk_union(a, f);
        let u2 = st.mk_union(a, f);
        assert_eq!(u1, u2);
        let p1 = st.mk_pair(a, f);
        let p2 = st.mk_pair(a, f);
        assert_eq!(p1, p2);
    }

    #[test]
    fn union_simplifications() {
        let mut st = TyStore::new();
        let top = st.top();
        let bot = st.bottom();
        let int = st.mk_int();
        assert_eq!(st.mk_union(int, int), int);
        assert_eq!(st.mk_union(int, bot), int);
        assert_eq!(st.mk_union(bot, int), int);
        assert_eq!(st.mk_union(int, top), top);
        assert_eq!(st.mk_inter(int, top), int);
        assert_eq!(st.mk_inter(bot, int), bot);
    }

    #[test]
    fn double_negation_cancels() {
        let mut st = TyStore::new();
        let int = st.mk_int();
        let n = st.mk_neg(int);
        assert_eq!(st.mk_neg(n), int);
    }

    #[test]
    fn top_and_bottom_are_closed() {
        let mut st = TyStore::new();
        let top = st.top();
        let bot = st.bottom();
        assert!(st.free_ty_vars(top).is_empty());
        assert!(st.free_ty_vars(bot).is_empty());
        assert_eq!(st.mk_neg(top), bot);
        assert_eq!(st.mk_neg(bot), top);
    }

    #[test]
    fn mk_rec_builds_list_and_tracks_vars() {
        let mut st = TyStore::new();
        let a = st.fresh_var("a");
        let av = st.mk_var(a);
        let l = list_of(&mut st, av);
        let fv = st.free_ty_vars(l);
        assert_eq!(fv.iter().copied().collect::<Vec<_>>(), vec![a]);
    }

    #[test]
    fn mk_rec_rejects_union_cycle() {
        let mut st = TyStore::new();
        let int = st.mk_int();
        let r = st.mk_rec::<TyError, _>(|_, ph| Ok(TyNode::Union(ph, int)));
        assert_eq!(r, Err(TyError::Contractiveness));
        let r2 = st.mk_rec::<TyError, _>(|st2, ph| {
            let n = st2.mk_neg(ph);
            Ok(TyNode::Union(n, int))
        });
        assert_eq!(r2, Err(TyError::Contractiveness));
    }

    #[test]
    fn mk_rec_without_recursion_reinterns() {
        let mut st = TyStore::new();
        let int = st.mk_int();
        let t = st
            .mk_rec::<TyError, _>(|_, _| Ok(TyNode::Base(BaseTy::Int)))
            .unwrap();
        assert_eq!(t, int);
    }

    #[test]
    fn identical_recursive_builds_share_one_id() {
        let mut st = TyStore::new();
        let a = st.fresh_var("a");
        let av = st.mk_var(a);
        let l1 = list_of(&mut st, av);
        let l2 = list_of(&mut st, av);
        assert_eq!(l1, l2);
    }

    #[test]
    fn subst_on_arrow() {
        let mut st = TyStore::new();
        let a = st.fresh_var("a");
        let av = st.mk_var(a);
        let arr = st.mk_arrow(av, av);
        let int = st.mk_int();
        let mut s = TySubst::new();
        s.insert(a, int);
        let out = st.apply_subst(arr, &s);
        assert_eq!(out, st.mk_arrow(int, int));
        // untouched types come back unchanged
        let f = st.mk_float();
        assert_eq!(st.apply_subst(f, &s), f);
    }

    #[test]
    fn subst_through_recursive_type_shares_direct_build() {
        let mut st = TyStore::new();
        let a = st.fresh_var("a");
        let av = st.mk_var(a);
        let l = list_of(&mut st, av);
        let int = st.mk_int();
        let mut s = TySubst::new();
        s.insert(a, int);
        let li = st.apply_subst(l, &s);
        let direct = list_of(&mut st, int);
        assert_eq!(li, direct);
        assert!(st.free_ty_vars(li).is_empty());
    }

    #[test]
    fn solve_equations_ground_and_recursive() {
        let mut st = TyStore::new();
        let a = st.fresh_var("a");
        let int = st.mk_int();
        // ground: a = Int
        let mut eqs = BTreeMap::new();
        eqs.insert(a, int);
        let sol = st.solve_equations(&eqs).unwrap();
        assert_eq!(sol[&a], int);
        // recursive: b = (Int, b)
        let b = st.fresh_var("b");
        let bv = st.mk_var(b);
        let pair = st.mk_pair(int, bv);
        let mut eqs = BTreeMap::new();
        eqs.insert(b, pair);
        let sol = st.solve_equations(&eqs).unwrap();
        let direct = st
            .mk_rec::<TyError, _>(|st2, ph| {
                let _ = st2;
                Ok(TyNode::Pair(int, ph))
            })
            .unwrap();
        assert_eq!(sol[&b], direct);
        assert!(st.free_ty_vars(sol[&b]).is_empty());
    }

    #[test]
    fn solve_equations_rejects_non_contractive() {
        let mut st = TyStore::new();
        let a = st.fresh_var("a");
        let av = st.mk_var(a);
        let int = st.mk_int();
        // a = a
        let mut eqs = BTreeMap::new();
        eqs.insert(a, av);
        assert!(st.solve_equations(&eqs).is_err());
        // a = a | Int
        let u = st.mk_union(av, int);
        let mut eqs = BTreeMap::new();
        eqs.insert(a, u);
        assert!(st.solve_equations(&eqs).is_err());
    }

    #[test]
    fn solve_equations_mutual() {
        let mut st = TyStore::new();
        let a = st.fresh_var("a");
        let b = st.fresh_var("b");
        let av = st.mk_var(a);
        let bv = st.mk_var(b);
        let int = st.mk_int();
        let float = st.mk_float();
        // a = (b, Int), b = (a, Float)
        let ra = st.mk_pair(bv, int);
        let rb = st.mk_pair(av, float);
        let mut eqs = BTreeMap::new();
        eqs.insert(a, ra);
        eqs.insert(b, rb);
        let sol = st.solve_equations(&eqs).unwrap();
        let ta = sol[&a];
        let tb = sol[&b];
        assert!(st.free_ty_vars(ta).is_empty());
        match *st.node(ta) {
            TyNode::Pair(x, y) => {
                assert_eq!(x, tb);
                assert_eq!(y, int);
            }
            ref other => panic!("expected pair, got {other:?}"),
        }
        match *st.node(tb) {
            TyNode::Pair(x, y) => {
                assert_eq!(x, ta);
                assert_eq!(y, float);
            }
            ref other => panic!("expected pair, got {other:?}"),
        }
    }

    #[test]
    fn instantiate_renames_bound_vars() {
        let mut st = TyStore::new();
        let a = st.named_var("a");
        let av = st.mk_var(a);
        let arr = st.mk_arrow(av, av);
        let sc = st.generalize(arr);
        assert_eq!(sc.vars.len(), 1);
        let (inst, fresh) = st.instantiate(&sc);
        assert_eq!(fresh.len(), 1);
        assert_ne!(fresh[0], a);
        match *st.node(inst) {
            TyNode::Arrow(d, c) => {
                assert_eq!(d, c);
                assert_eq!(*st.node(d), TyNode::Var(fresh[0]));
            }
            ref other => panic!("expected arrow, got {other:?}"),
        }
    }

    #[test]
    fn const_and_guard_types() {
        let mut st = TyStore::new();
        let three = st.ty_of_const(&Const::Int(3.into()));
        assert_eq!(three, st.mk_int_lit(3));
        let half = st.ty_of_const(&Const::Float(0.5));
        assert_eq!(half, st.mk_float());
        let ti = st.ty_of_guardty(GuardType::IsInt);
        assert_eq!(ti, st.mk_int());
        let tp = st.ty_of_guardty(GuardType::IsPair);
        assert!(matches!(st.node(tp), TyNode::Pair(..)));
        let tf = st.ty_of_guardty(GuardType::IsFun);
        assert!(matches!(st.node(tf), TyNode::Arrow(..)));
    }

    #[test]
    fn printing_basics() {
        let mut st = TyStore::new();
        let int = st.mk_int();
        let float = st.mk_float();
        assert_eq!(st.ty_to_string(int), "Int");
        let u = st.mk_union(int, float);
        assert_eq!(st.ty_to_string(u), "Int | Float");
        let p = st.mk_pair(int, float);
        assert_eq!(st.ty_to_string(p), "(Int, Float)");
        let arr = st.mk_arrow(int, u);
        assert_eq!(st.ty_to_string(arr), "Int -> Int | Float");
        let n = st.mk_neg(int);
        assert_eq!(st.ty_to_string(n), "!Int");
        let lit = st.mk_int_lit(-7);
        assert_eq!(st.ty_to_string(lit), "-7");
        let top = st.top();
        assert_eq!(st.ty_to_string(top), "Any");
        let bot = st.bottom();
        assert_eq!(st.ty_to_string(bot), "Empty");
    }

    #[test]
    fn printing_intersection_and_arrows() {
        let mut st = TyStore::new();
        let int = st.mk_int();
        let float = st.mk_float();
        let a1 = st.mk_arrow(int, int);
        let a2 = st.mk_arrow(float, float);
        let i = st.mk_inter(a1, a2);
        assert_eq!(st.ty_to_string(i), "(Int -> Int) & (Float -> Float)");
        // arrow in a non-tail union arm needs parentheses
        let u = st.mk_union(a1, int);
        assert_eq!(st.ty_to_string(u), "(Int -> Int) | Int");
        let u2 = st.mk_union(int, a1);
        assert_eq!(st.ty_to_string(u2), "Int | Int -> Int");
    }

    #[test]
    fn printing_recursive_types() {
        let mut st = TyStore::new();
        let a = st.named_var("a");
        let av = st.mk_var(a);
        let l = list_of(&mut st, av);
        assert_eq!(st.ty_to_string(l), "rec X. 0 | ('a, X)");
    }

    #[test]
    fn scheme_printing() {
        let mut st = TyStore::new();
        let a = st.named_var("a");
        let av = st.mk_var(a);
        let arr = st.mk_arrow(av, av);
        let sc = st.generalize(arr);
        assert_eq!(st.scheme_to_string(&sc), "forall 'a. 'a -> 'a");
    }

    #[test]
    fn compose_substitutions() {
        let mut st = TyStore::new();
        let a = st.fresh_var("a");
        let b = st.fresh_var("b");
        let bv = st.mk_var(b);
        let int = st.mk_int();
        let mut s1 = TySubst::new();
        s1.insert(a, bv);
        let mut s2 = TySubst::new();
        s2.insert(b, int);
        let c = compose_subst(&mut st, &s1, &s2);
        assert_eq!(c[&a], int);
        assert_eq!(c[&b], int);
    }
}
