//! Version space algebras.
//!
//! Orthodox VSAs (set, union and join nodes) live in a hash-consed
//! [`VsaStore`]: building a node that already exists returns the existing
//! label, so no two distinct nodes ever have the same children. A
//! [`NormalizedVsa`] is an extracted, validated view whose layers strictly
//! alternate union and join, with no set nodes.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::denote;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::term::{Signature, Symbol, Term};

/// Label of a node within one [`VsaStore`]. Dense, in creation order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeLabel(pub u32);

impl NodeLabel {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VsaNode {
    /// An explicit set of terms, kept sorted and duplicate-free.
    Set(Vec<Term>),
    /// Union of the children's denotations. Children are distinct, in first-seen order.
    Union(Vec<NodeLabel>),
    /// `{ head(P_1, ..., P_k) | P_i ∈ ⟦children[i]⟧ }`.
    Join {
        head: Symbol,
        children: Vec<NodeLabel>,
    },
}

impl VsaNode {
    pub fn children(&self) -> &[NodeLabel] {
        match self {
            VsaNode::Set(_) => &[],
            VsaNode::Union(c) | VsaNode::Join { children: c, .. } => c,
        }
    }
}

/// Arena of hash-consed VSA nodes.
#[derive(Clone, Default)]
pub struct VsaStore {
    nodes: Vec<VsaNode>,
    interned: HashMap<VsaNode, NodeLabel>,
    signature: Signature,
}

impl VsaStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// A store whose signature starts out as `sig`.
    pub fn with_signature(sig: Signature) -> Self {
        VsaStore {
            signature: sig,
            ..Self::default()
        }
    }

    /// Every symbol used so far (plus any the store was seeded with).
    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, label: NodeLabel) -> &VsaNode {
        &self.nodes[label.index()]
    }

    pub fn labels(&self) -> impl Iterator<Item = NodeLabel> {
        (0..self.nodes.len() as u32).map(NodeLabel)
    }

    fn intern(&mut self, node: VsaNode) -> NodeLabel {
        if let Some(&l) = self.interned.get(&node) {
            return l;
        }
        let label = NodeLabel(u32::try_from(self.nodes.len()).expect("VSA store full"));
        self.nodes.push(node.clone());
        self.interned.insert(node, label);
        label
    }

    pub fn mk_set(&mut self, terms: impl IntoIterator<Item = Term>) -> Result<NodeLabel> {
        let mut terms: Vec<Term> = terms.into_iter().collect();
        for t in &terms {
            t.collect_symbols(&mut self.signature)?;
        }
        terms.sort_unstable();
        terms.dedup();
        Ok(self.intern(VsaNode::Set(terms)))
    }

    /// Duplicate children are dropped; the first occurrence keeps its position.
    pub fn mk_union(&mut self, children: impl IntoIterator<Item = NodeLabel>) -> NodeLabel {
        let mut seen = HashSet::new();
        let children: Vec<NodeLabel> = children.into_iter().filter(|c| seen.insert(*c)).collect();
        debug_assert!(children.iter().all(|c| c.index() < self.nodes.len()));
        self.intern(VsaNode::Union(children))
    }

    pub fn mk_join(&mut self, head: Symbol, children: Vec<NodeLabel>) -> Result<NodeLabel> {
        if children.len() != head.arity() {
            return Err(Error::ArityMismatch {
                name: head.name().to_string(),
                expected: head.arity(),
                found: children.len(),
                offset: None,
            });
        }
        debug_assert!(children.iter().all(|c| c.index() < self.nodes.len()));
        self.signature.add(&head)?;
        Ok(self.intern(VsaNode::Join { head, children }))
    }

    /// The join tree of a single term: `head(U(join(c_1)), ..., U(join(c_k)))`.
    pub fn mk_term(&mut self, term: &Term) -> Result<NodeLabel> {
        let mut memo: HashMap<&Term, NodeLabel> = HashMap::new();
        for sub in term.post_order() {
            if memo.contains_key(sub) {
                continue;
            }
            let children = sub
                .children()
                .iter()
                .map(|c| {
                    let j = memo[c];
                    self.mk_union([j])
                })
                .collect();
            let j = self.mk_join(sub.head().clone(), children)?;
            memo.insert(sub, j);
        }
        Ok(memo[term])
    }

    /// Nodes reachable from `root`, children before parents.
    pub fn reachable(&self, root: NodeLabel) -> Vec<NodeLabel> {
        post_order(root, |l| Cow::Borrowed(self.node(l).children()))
    }

    pub fn contains_set_nodes(&self, root: NodeLabel) -> bool {
        self.reachable(root)
            .into_iter()
            .any(|l| matches!(self.node(l), VsaNode::Set(_)))
    }

    /// True if no two nodes in the store share the same structure.
    pub fn check_uniqueness(&self) -> bool {
        let mut seen = HashSet::new();
        self.nodes.iter().all(|n| seen.insert(n))
    }

    pub fn enumerate(&self, root: NodeLabel, limit: usize) -> Result<Vec<Term>> {
        self.enumerate_with(root, limit, Exec::default())
    }

    /// `⟦root⟧` sorted by term order, or [`Error::Overflow`] if it has more than `limit` terms.
    pub fn enumerate_with(&self, root: NodeLabel, limit: usize, exec: Exec) -> Result<Vec<Term>> {
        let order = self.reachable(root);
        let mut productive: HashMap<NodeLabel, bool> = HashMap::with_capacity(order.len());
        for &l in &order {
            let p = match self.node(l) {
                VsaNode::Set(ts) => !ts.is_empty(),
                VsaNode::Union(cs) => cs.iter().any(|c| productive[c]),
                VsaNode::Join { children, .. } => children.iter().all(|c| productive[c]),
            };
            productive.insert(l, p);
        }
        if !productive[&root] {
            return Ok(Vec::new());
        }
        // Below a non-empty node every non-empty descendant denotes at most as
        // many terms, so an overflow anywhere on this cone is a real overflow.
        let needed = post_order(root, |l| match self.node(l) {
            VsaNode::Union(cs) => {
                Cow::Owned(cs.iter().copied().filter(|c| productive[c]).collect())
            }
            other => Cow::Borrowed(other.children()),
        });
        let mut sets: HashMap<NodeLabel, Vec<Term>> = HashMap::with_capacity(needed.len());
        for &l in &needed {
            let set = match self.node(l) {
                VsaNode::Set(ts) => {
                    if ts.len() > limit {
                        return Err(Error::Overflow { limit });
                    }
                    ts.clone()
                }
                VsaNode::Union(cs) => {
                    let parts: Vec<&[Term]> = cs
                        .iter()
                        .filter_map(|c| sets.get(c).map(Vec::as_slice))
                        .collect();
                    denote::union(&parts, limit)?
                }
                VsaNode::Join { head, children } => {
                    let parts: Vec<&[Term]> = children.iter().map(|c| sets[c].as_slice()).collect();
                    denote::product(head, &parts, limit, exec)?
                }
            };
            sets.insert(l, set);
        }
        Ok(sets.remove(&root).expect("root computed"))
    }

    /// Rewrites every set node reachable from `root` into a union of term join trees.
    pub fn eliminate_set_nodes(&mut self, root: NodeLabel) -> Result<NodeLabel> {
        let mut map: HashMap<NodeLabel, NodeLabel> = HashMap::new();
        for l in self.reachable(root) {
            let new = match self.node(l).clone() {
                VsaNode::Set(ts) => {
                    let joins = ts
                        .iter()
                        .map(|t| self.mk_term(t))
                        .collect::<Result<Vec<_>>>()?;
                    self.mk_union(joins)
                }
                VsaNode::Union(cs) => self.mk_union(cs.iter().map(|c| map[c])),
                VsaNode::Join { head, children } => {
                    let cs = children.iter().map(|c| map[c]).collect();
                    self.mk_join(head, cs)?
                }
            };
            map.insert(l, new);
        }
        Ok(map[&root])
    }

    /// Rewrites the VSA at `root` into strictly alternating union/join layers.
    ///
    /// Set nodes become unions of term join trees, nested unions are spliced
    /// into their parent (then deduplicated), and joins that sit where a union
    /// is required get a unary union wrapper. The result is always union-rooted.
    pub fn normalize(&mut self, root: NodeLabel) -> Result<NormalizedVsa> {
        // For each node, the normalized joins it contributes to an enclosing union layer.
        let mut joins_of: HashMap<NodeLabel, Vec<NodeLabel>> = HashMap::new();
        for l in self.reachable(root) {
            let joins = match self.node(l).clone() {
                VsaNode::Set(ts) => ts
                    .iter()
                    .map(|t| self.mk_term(t))
                    .collect::<Result<Vec<_>>>()?,
                VsaNode::Union(cs) => {
                    let mut seen = HashSet::new();
                    cs.iter()
                        .flat_map(|c| joins_of[c].iter().copied())
                        .filter(|j| seen.insert(*j))
                        .collect()
                }
                VsaNode::Join { head, children } => {
                    let unions = children
                        .iter()
                        .map(|c| {
                            let js = joins_of[c].clone();
                            self.mk_union(js)
                        })
                        .collect();
                    vec![self.mk_join(head, unions)?]
                }
            };
            joins_of.insert(l, joins);
        }
        let top = joins_of.remove(&root).expect("root visited");
        let top = self.mk_union(top);
        NormalizedVsa::from_store(self, top)
    }
}

/// Iterative DFS post-order over a DAG (each node emitted once).
pub(crate) fn post_order<'a, F>(root: NodeLabel, mut children: F) -> Vec<NodeLabel>
where
    F: FnMut(NodeLabel) -> Cow<'a, [NodeLabel]>,
{
    let mut out = Vec::new();
    let mut visited = HashSet::new();
    let mut stack: Vec<(NodeLabel, bool)> = vec![(root, false)];
    while let Some((l, expanded)) = stack.pop() {
        if expanded {
            out.push(l);
            continue;
        }
        if !visited.insert(l) {
            continue;
        }
        stack.push((l, true));
        let cs = children(l);
        for &c in cs.iter().rev() {
            if !visited.contains(&c) {
                stack.push((c, false));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnionNode {
    pub label: NodeLabel,
    /// Indices into [`NormalizedVsa::joins`].
    pub joins: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinNode {
    pub label: NodeLabel,
    pub head: Symbol,
    /// Indices into [`NormalizedVsa::unions`].
    pub children: Vec<usize>,
}

/// Reference to a node of a [`NormalizedVsa`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormRef {
    Union(usize),
    Join(usize),
}

/// A union-rooted VSA with strictly alternating union and join layers.
///
/// Nodes are indexed per kind. `order` lists every node with children before
/// parents, and every node is reachable from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedVsa {
    unions: Vec<UnionNode>,
    joins: Vec<JoinNode>,
    order: Vec<NormRef>,
    root: usize,
    signature: Signature,
}

/// Node and edge counts of a normalized VSA.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VsaSizeReport {
    pub unions: usize,
    pub joins: usize,
    pub union_join_edges: usize,
    pub join_union_edges: usize,
}

impl VsaSizeReport {
    /// V
    pub fn nodes(&self) -> usize {
        self.unions + self.joins
    }

    /// E
    pub fn edges(&self) -> usize {
        self.union_join_edges + self.join_union_edges
    }
}

impl NormalizedVsa {
    /// Extracts the normalized VSA rooted at `root`, checking alternation.
    pub fn from_store(store: &VsaStore, root: NodeLabel) -> Result<NormalizedVsa> {
        if !matches!(store.node(root), VsaNode::Union(_)) {
            return Err(Error::InvalidNormalized(format!(
                "root {root:?} is not a union node"
            )));
        }
        let mut union_ix: HashMap<NodeLabel, usize> = HashMap::new();
        let mut join_ix: HashMap<NodeLabel, usize> = HashMap::new();
        let mut unions = Vec::new();
        let mut joins = Vec::new();
        let mut order = Vec::new();
        for l in store.reachable(root) {
            match store.node(l) {
                VsaNode::Set(_) => {
                    return Err(Error::InvalidNormalized(format!("set node {l:?}")));
                }
                VsaNode::Union(cs) => {
                    let js = cs
                        .iter()
                        .map(|c| {
                            join_ix.get(c).copied().ok_or_else(|| {
                                Error::InvalidNormalized(format!(
                                    "union {l:?} has non-join child {c:?}"
                                ))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    union_ix.insert(l, unions.len());
                    order.push(NormRef::Union(unions.len()));
                    unions.push(UnionNode {
                        label: l,
                        joins: js,
                    });
                }
                VsaNode::Join { head, children } => {
                    let us = children
                        .iter()
                        .map(|c| {
                            union_ix.get(c).copied().ok_or_else(|| {
                                Error::InvalidNormalized(format!(
                                    "join {l:?} has non-union child {c:?}"
                                ))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    join_ix.insert(l, joins.len());
                    order.push(NormRef::Join(joins.len()));
                    joins.push(JoinNode {
                        label: l,
                        head: head.clone(),
                        children: us,
                    });
                }
            }
        }
        let root = union_ix[&root];
        let mut signature = Signature::new();
        for j in &joins {
            signature.add(&j.head)?;
        }
        Ok(NormalizedVsa {
            unions,
            joins,
            order,
            root,
            signature,
        })
    }

    /// Builds a normalized VSA from explicit node tables, validating every invariant
    /// (index ranges, arities, per-kind uniqueness, acyclicity, reachability).
    pub fn from_parts(
        unions: Vec<UnionNode>,
        joins: Vec<JoinNode>,
        root: usize,
    ) -> Result<NormalizedVsa> {
        let bad = |m: String| Error::InvalidNormalized(m);
        if root >= unions.len() {
            return Err(bad(format!("root index {root} out of range")));
        }
        let mut labels = HashSet::new();
        let mut union_keys = HashSet::new();
        for (i, u) in unions.iter().enumerate() {
            if !labels.insert(u.label) {
                return Err(bad(format!("label {:?} used twice", u.label)));
            }
            if let Some(&j) = u.joins.iter().find(|&&j| j >= joins.len()) {
                return Err(bad(format!("union {i} refers to missing join {j}")));
            }
            let distinct: HashSet<_> = u.joins.iter().collect();
            if distinct.len() != u.joins.len() {
                return Err(bad(format!("union {i} has duplicate children")));
            }
            if !union_keys.insert(&u.joins) {
                return Err(bad(format!("union {i} duplicates another union")));
            }
        }
        let mut signature = Signature::new();
        let mut join_keys = HashSet::new();
        for (i, j) in joins.iter().enumerate() {
            if !labels.insert(j.label) {
                return Err(bad(format!("label {:?} used twice", j.label)));
            }
            if j.children.len() != j.head.arity() {
                return Err(bad(format!("join {i} arity mismatch for {:?}", j.head)));
            }
            if let Some(&u) = j.children.iter().find(|&&u| u >= unions.len()) {
                return Err(bad(format!("join {i} refers to missing union {u}")));
            }
            if !join_keys.insert((&j.head, &j.children)) {
                return Err(bad(format!("join {i} duplicates another join")));
            }
            signature.add(&j.head)?;
        }

        // Post-order DFS with cycle detection.
        let mut state: HashMap<NormRef, bool> = HashMap::new(); // false = on stack, true = done
        let mut order = Vec::with_capacity(unions.len() + joins.len());
        let mut stack = vec![(NormRef::Union(root), false)];
        let kids = |r: NormRef| -> Vec<NormRef> {
            match r {
                NormRef::Union(u) => unions[u].joins.iter().map(|&j| NormRef::Join(j)).collect(),
                NormRef::Join(j) => joins[j]
                    .children
                    .iter()
                    .map(|&u| NormRef::Union(u))
                    .collect(),
            }
        };
        while let Some((r, expanded)) = stack.pop() {
            if expanded {
                state.insert(r, true);
                order.push(r);
                continue;
            }
            match state.get(&r) {
                Some(true) => continue,
                Some(false) => return Err(bad(format!("cycle through {r:?}"))),
                None => {}
            }
            state.insert(r, false);
            stack.push((r, true));
            for c in kids(r).into_iter().rev() {
                match state.get(&c) {
                    Some(true) => {}
                    Some(false) => return Err(bad(format!("cycle through {c:?}"))),
                    None => stack.push((c, false)),
                }
            }
        }
        if order.len() != unions.len() + joins.len() {
            return Err(bad("some nodes are unreachable from the root".into()));
        }
        Ok(NormalizedVsa {
            unions,
            joins,
            order,
            root,
            signature,
        })
    }

    pub fn unions(&self) -> &[UnionNode] {
        &self.unions
    }

    pub fn joins(&self) -> &[JoinNode] {
        &self.joins
    }

    /// Index of the root union.
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn root_label(&self) -> NodeLabel {
        self.unions[self.root].label
    }

    /// All nodes, children before parents.
    pub fn order(&self) -> &[NormRef] {
        &self.order
    }

    /// Symbols used by the joins.
    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> VsaSizeReport {
        VsaSizeReport {
            unions: self.unions.len(),
            joins: self.joins.len(),
            union_join_edges: self.unions.iter().map(|u| u.joins.len()).sum(),
            join_union_edges: self.joins.iter().map(|j| j.children.len()).sum(),
        }
    }

    /// Re-interns the VSA into `store` and returns the root label there.
    pub fn to_store(&self, store: &mut VsaStore) -> Result<NodeLabel> {
        let mut u_map = vec![NodeLabel(0); self.unions.len()];
        let mut j_map = vec![NodeLabel(0); self.joins.len()];
        for &r in &self.order {
            match r {
                NormRef::Union(u) => {
                    let cs: Vec<NodeLabel> =
                        self.unions[u].joins.iter().map(|&j| j_map[j]).collect();
                    u_map[u] = store.mk_union(cs);
                }
                NormRef::Join(j) => {
                    let node = &self.joins[j];
                    let cs = node.children.iter().map(|&u| u_map[u]).collect();
                    j_map[j] = store.mk_join(node.head.clone(), cs)?;
                }
            }
        }
        Ok(u_map[self.root])
    }

    pub fn enumerate(&self, limit: usize) -> Result<Vec<Term>> {
        self.enumerate_node(NormRef::Union(self.root), limit, Exec::default())
    }

    pub fn enumerate_with(&self, limit: usize, exec: Exec) -> Result<Vec<Term>> {
        self.enumerate_node(NormRef::Union(self.root), limit, exec)
    }

    /// Denotation of an arbitrary union or join node.
    pub fn enumerate_node(&self, start: NormRef, limit: usize, exec: Exec) -> Result<Vec<Term>> {
        let mut u_prod = vec![false; self.unions.len()];
        let mut j_prod = vec![false; self.joins.len()];
        for &r in &self.order {
            match r {
                NormRef::Union(u) => u_prod[u] = self.unions[u].joins.iter().any(|&j| j_prod[j]),
                NormRef::Join(j) => j_prod[j] = self.joins[j].children.iter().all(|&u| u_prod[u]),
            }
        }
        let productive = |r: NormRef| match r {
            NormRef::Union(u) => u_prod[u],
            NormRef::Join(j) => j_prod[j],
        };
        if !productive(start) {
            return Ok(Vec::new());
        }

        // Mark the productive cone below `start`.
        let mut u_need = vec![false; self.unions.len()];
        let mut j_need = vec![false; self.joins.len()];
        let mut stack = vec![start];
        while let Some(r) = stack.pop() {
            match r {
                NormRef::Union(u) if !u_need[u] => {
                    u_need[u] = true;
                    stack.extend(
                        self.unions[u]
                            .joins
                            .iter()
                            .filter(|&&j| j_prod[j])
                            .map(|&j| NormRef::Join(j)),
                    );
                }
                NormRef::Join(j) if !j_need[j] => {
                    j_need[j] = true;
                    stack.extend(self.joins[j].children.iter().map(|&u| NormRef::Union(u)));
                }
                _ => {}
            }
        }

        let mut u_sets: Vec<Option<Vec<Term>>> = vec![None; self.unions.len()];
        let mut j_sets: Vec<Option<Vec<Term>>> = vec![None; self.joins.len()];
        for &r in &self.order {
            match r {
                NormRef::Union(u) if u_need[u] => {
                    let parts: Vec<&[Term]> = self.unions[u]
                        .joins
                        .iter()
                        .filter_map(|&j| j_sets[j].as_deref())
                        .collect();
                    u_sets[u] = Some(denote::union(&parts, limit)?);
                }
                NormRef::Join(j) if j_need[j] => {
                    let node = &self.joins[j];
                    let parts: Vec<&[Term]> = node
                        .children
                        .iter()
                        .map(|&u| u_sets[u].as_deref().expect("child computed"))
                        .collect();
                    j_sets[j] = Some(denote::product(&node.head, &parts, limit, exec)?);
                }
                _ => {}
            }
            if r == start {
                break;
            }
        }
        Ok(match start {
            NormRef::Union(u) => u_sets[u].take(),
            NormRef::Join(j) => j_sets[j].take(),
        }
        .expect("start computed"))
    }
}
