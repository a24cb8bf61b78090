//! Seeded generators for VSAs and automata, plus a brute-force denotation oracle.
//!
//! Generation is a pure function of [`GenConfig`]: the PRNG is SplitMix64
//! with its published constants, so corpora are identical across runs and
//! platforms.

use std::collections::BTreeSet;

use crate::automaton::{StateId, TreeAutomaton};
use crate::error::{Error, Result};
use crate::term::{Signature, Symbol, Term};
use crate::vsa::{NodeLabel, VsaNode, VsaStore};

/// SplitMix64 (Steele, Lea, Flood 2014).
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    pub const MIX1: u64 = 0xBF58_476D_1CE4_E5B9;
    pub const MIX2: u64 = 0x94D0_49BB_1331_11EB;

    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(Self::GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(Self::MIX1);
        z = (z ^ (z >> 27)).wrapping_mul(Self::MIX2);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n` (multiply-high; `n > 0`).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    /// True with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        ((self.next_u64() >> 11) as f64) / ((1u64 << 53) as f64) < p
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.below(xs.len())]
    }
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub seed: u64,
    /// Maximum height of any denoted term; 1 means constants only.
    pub max_depth: usize,
    pub signature: Signature,
    pub max_union_width: usize,
    pub share_probability: f64,
    /// Upper bound on the size of the root's denotation.
    pub max_terms: usize,
    /// Only build VSAs in which every term has exactly one derivation.
    pub disjoint: bool,
}

/// `a, b, c, g/1, f/2`.
pub fn standard_signature() -> Signature {
    Signature::from_pairs([("a", 0), ("b", 0), ("c", 0), ("g", 1), ("f", 2)])
        .expect("valid signature")
}

impl GenConfig {
    /// The configuration used for the property corpora: depth 4, width 3, at most 10,000 terms.
    pub fn corpus(seed: u64) -> Self {
        GenConfig {
            seed,
            max_depth: 4,
            signature: standard_signature(),
            max_union_width: 3,
            share_probability: 0.3,
            max_terms: 10_000,
            disjoint: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        if self.max_union_width == 0 {
            return bad("max_union_width must be positive");
        }
        if self.max_terms == 0 {
            return bad("max_terms must be positive");
        }
        if !(0.0..=1.0).contains(&self.share_probability) {
            return bad("share_probability must lie in [0, 1]");
        }
        if self.signature.constants().next().is_none() {
            return bad("signature needs at least one constant");
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct PoolEntry {
    label: NodeLabel,
    /// Upper bound on |⟦node⟧|.
    bound: usize,
    depth: usize,
}

struct Generator<'c> {
    cfg: &'c GenConfig,
    rng: SplitMix64,
    store: VsaStore,
    pool: Vec<PoolEntry>,
    constants: Vec<Symbol>,
    symbols: Vec<Symbol>,
}

/// Largest `r` with `r^k <= n` (`k >= 1`, `n >= 1`).
fn int_root(n: usize, k: usize) -> usize {
    let mut r = (n as f64).powf(1.0 / k as f64).round() as usize + 1;
    while r > 1 && r.checked_pow(k as u32).is_none_or(|p| p > n) {
        r -= 1;
    }
    r.max(1)
}

impl<'c> Generator<'c> {
    fn new(cfg: &'c GenConfig) -> Self {
        Generator {
            cfg,
            rng: SplitMix64::new(cfg.seed),
            store: VsaStore::with_signature(cfg.signature.clone()),
            pool: Vec::new(),
            constants: cfg.signature.constants().cloned().collect(),
            symbols: cfg.signature.iter().cloned().collect(),
        }
    }

    fn remember(&mut self, label: NodeLabel, bound: usize, depth: usize) -> (NodeLabel, usize) {
        self.pool.push(PoolEntry {
            label,
            bound,
            depth,
        });
        (label, bound)
    }

    /// Symbols usable at `depth` (constants only at depth 1).
    fn symbols_for(&self, depth: usize) -> Vec<Symbol> {
        self.symbols
            .iter()
            .filter(|s| depth > 1 || s.is_constant())
            .cloned()
            .collect()
    }

    fn try_share(
        &mut self,
        depth: usize,
        budget: usize,
        join_only: bool,
    ) -> Option<(NodeLabel, usize)> {
        if !self.rng.chance(self.cfg.share_probability) {
            return None;
        }
        let candidates: Vec<PoolEntry> = self
            .pool
            .iter()
            .filter(|e| e.bound <= budget && e.depth <= depth)
            .filter(|e| !join_only || matches!(self.store.node(e.label), VsaNode::Join { .. }))
            .copied()
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let e = *self.rng.pick(&candidates);
        Some((e.label, e.bound))
    }

    /// Leans towards non-constants above the leaves so languages stay non-trivial.
    fn pick_head(&mut self, depth: usize) -> Symbol {
        let inner: Vec<Symbol> = self
            .symbols
            .iter()
            .filter(|s| !s.is_constant())
            .cloned()
            .collect();
        if depth > 1 && !inner.is_empty() && self.rng.chance(0.9) {
            return self.rng.pick(&inner).clone();
        }
        let syms = self.symbols_for(depth);
        self.rng.pick(&syms).clone()
    }

    fn random_term(&mut self, depth: usize) -> Term {
        let syms = self.symbols_for(depth);
        let head = self.rng.pick(&syms).clone();
        let children = (0..head.arity())
            .map(|_| self.random_term(depth - 1))
            .collect();
        Term::new(head, children).expect("arity respected")
    }

    /// Any node kind.
    fn node(&mut self, depth: usize, budget: usize) -> Result<(NodeLabel, usize)> {
        if let Some(shared) = self.try_share(depth, budget, false) {
            return Ok(shared);
        }
        let roll = self.rng.below(100);
        if roll < 10 {
            self.set_node(depth, budget)
        } else if roll < 60 {
            self.union_node(depth, budget)
        } else {
            self.join_node(depth, budget, None)
        }
    }

    fn set_node(&mut self, depth: usize, budget: usize) -> Result<(NodeLabel, usize)> {
        let k = if self.rng.chance(0.03) {
            0
        } else {
            self.rng.range(1, self.cfg.max_union_width.min(budget))
        };
        let terms: BTreeSet<Term> = (0..k).map(|_| self.random_term(depth)).collect();
        let bound = terms.len();
        let label = self.store.mk_set(terms)?;
        Ok(self.remember(label, bound, depth))
    }

    fn union_node(&mut self, depth: usize, budget: usize) -> Result<(NodeLabel, usize)> {
        let cap = self.cfg.max_union_width.min(budget);
        let width = if self.rng.chance(0.03) {
            0
        } else {
            self.rng.range(cap.min(2), cap)
        };
        let child_budget = budget.checked_div(width).unwrap_or(0);
        let mut children = Vec::with_capacity(width);
        let mut bound = 0;
        if self.cfg.disjoint {
            // Only joins, with pairwise distinct heads.
            let mut heads = self.symbols_for(depth);
            for _ in 0..width.min(heads.len()) {
                let i = self.rng.below(heads.len());
                let head = heads.swap_remove(i);
                let (c, b) = self.join_node(depth, child_budget, Some(head))?;
                children.push(c);
                bound += b;
            }
        } else {
            for _ in 0..width {
                let (c, b) = self.node(depth, child_budget)?;
                children.push(c);
                bound += b;
            }
        }
        let label = self.store.mk_union(children);
        Ok(self.remember(label, bound, depth))
    }

    fn join_node(
        &mut self,
        depth: usize,
        budget: usize,
        head: Option<Symbol>,
    ) -> Result<(NodeLabel, usize)> {
        let head = match head {
            Some(h) => h,
            None => {
                if let Some(shared) = self.try_share(depth, budget, true) {
                    return Ok(shared);
                }
                self.pick_head(depth)
            }
        };
        let child_budget = if head.arity() == 0 {
            0
        } else {
            int_root(budget, head.arity())
        };
        let mut children = Vec::with_capacity(head.arity());
        let mut bound = 1usize;
        for _ in 0..head.arity() {
            let (c, b) = self.node(depth - 1, child_budget)?;
            children.push(c);
            bound *= b;
        }
        let label = self.store.mk_join(head, children)?;
        Ok(self.remember(label, bound, depth))
    }
}

/// A seeded orthodox VSA mixing set, union and join nodes.
///
/// Every node carries an upper bound on its denotation (sets: size, unions:
/// sum, joins: product) and children get a share of their parent's budget, so
/// the root never denotes more than `max_terms` terms.
pub fn gen_vsa(cfg: &GenConfig) -> Result<(VsaStore, NodeLabel)> {
    cfg.validate()?;
    let mut g = Generator::new(cfg);
    // Mostly union roots; the rest exercise set and join roots.
    let (root, _) = if cfg.disjoint || g.rng.chance(0.8) {
        g.union_node(cfg.max_depth, cfg.max_terms)?
    } else {
        g.node(cfg.max_depth, cfg.max_terms)?
    };
    Ok((g.store, root))
}

/// A VSA whose embedding is guaranteed to be ambiguous.
///
/// With `h` a non-constant and `c` a constant, the root contains both
/// `h(A, ..., A)` and `h(B, ..., B)` where `A = U(c, h(c, ..., c))` and
/// `B = U(c)`, so `h(c, ..., c)` has two derivations. A random VSA is added
/// alongside.
pub fn gen_ambiguous_vsa(cfg: &GenConfig) -> Result<(VsaStore, NodeLabel)> {
    cfg.validate()?;
    if cfg.max_depth < 3 {
        return Err(Error::InvalidConfig(
            "ambiguous VSAs need max_depth >= 3".into(),
        ));
    }
    let mut g = Generator::new(cfg);
    let h = {
        let non_const: Vec<Symbol> = g
            .symbols
            .iter()
            .filter(|s| !s.is_constant())
            .cloned()
            .collect();
        if non_const.is_empty() {
            return Err(Error::InvalidConfig(
                "ambiguous VSAs need a non-constant symbol".into(),
            ));
        }
        g.rng.pick(&non_const).clone()
    };
    let c = g.rng.pick(&g.constants.clone()).clone();
    let arity = h.arity();
    let s = &mut g.store;
    let jc = s.mk_join(c, vec![])?;
    let uc = s.mk_union([jc]);
    let inner = s.mk_join(h.clone(), vec![uc; arity])?;
    let a = s.mk_union([jc, inner]);
    let left = s.mk_join(h.clone(), vec![a; arity])?;
    let right = s.mk_join(h, vec![uc; arity])?;
    let fixed_terms = 2usize.pow(arity as u32) + 1;
    let budget = cfg.max_terms.saturating_sub(fixed_terms).max(1);
    let (rest, _) = g.node(cfg.max_depth, budget)?;
    let root = g.store.mk_union([left, right, rest]);
    Ok((g.store, root))
}

/// Naive evaluation of the three denotation equations, straight from the
/// definitions: no memoization, no sharing, no pruning.
pub fn oracle_enumerate(store: &VsaStore, root: NodeLabel, cap: usize) -> Result<BTreeSet<Term>> {
    let out: BTreeSet<Term> = match store.node(root) {
        VsaNode::Set(terms) => terms.iter().cloned().collect(),
        VsaNode::Union(children) => {
            let mut acc = BTreeSet::new();
            for &c in children {
                acc.extend(oracle_enumerate(store, c, cap)?);
                if acc.len() > cap {
                    return Err(Error::Overflow { limit: cap });
                }
            }
            acc
        }
        VsaNode::Join { head, children } => {
            let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
            for &c in children {
                let options = oracle_enumerate(store, c, cap)?;
                let mut next = Vec::new();
                for prefix in &tuples {
                    for t in &options {
                        let mut tuple = prefix.clone();
                        tuple.push(t.clone());
                        next.push(tuple);
                    }
                    if next.len() > cap {
                        return Err(Error::Overflow { limit: cap });
                    }
                }
                tuples = next;
            }
            tuples
                .into_iter()
                .map(|args| Term::new(head.clone(), args))
                .collect::<Result<_>>()?
        }
    };
    if out.len() > cap {
        return Err(Error::Overflow { limit: cap });
    }
    Ok(out)
}

/// Random automaton over `sig` with `states` states and up to `transitions`
/// expanded transitions. With `acyclic`, every transition targets a state
/// with a larger id than all its children.
pub fn gen_automaton(
    seed: u64,
    sig: &Signature,
    states: usize,
    transitions: usize,
    acyclic: bool,
) -> TreeAutomaton {
    assert!(states > 0);
    let mut rng = SplitMix64::new(seed);
    let mut a = TreeAutomaton::new(sig.clone());
    let ids: Vec<StateId> = (0..states).map(|i| a.add_state(&format!("q{i}"))).collect();
    let symbols: Vec<Symbol> = sig.iter().cloned().collect();
    for _ in 0..transitions {
        let head = rng.pick(&symbols).clone();
        let target = if acyclic && head.arity() > 0 {
            if states < 2 {
                continue;
            }
            rng.range(1, states - 1)
        } else {
            rng.below(states)
        };
        let children = (0..head.arity())
            .map(|_| {
                if acyclic {
                    ids[rng.below(target)]
                } else {
                    ids[rng.below(states)]
                }
            })
            .collect();
        a.add_transition(head, children, ids[target])
            .expect("generated transition is well formed");
    }
    let finals = rng.range(1, states.min(2));
    for _ in 0..finals {
        a.add_final(ids[rng.below(states)]);
    }
    a
}

/// Random term of height at most `depth`.
pub fn random_term(rng: &mut SplitMix64, sig: &Signature, depth: usize) -> Term {
    let syms: Vec<&Symbol> = sig
        .iter()
        .filter(|s| depth > 1 || s.is_constant())
        .collect();
    let head = (*rng.pick(&syms)).clone();
    let children = (0..head.arity())
        .map(|_| random_term(rng, sig, depth - 1))
        .collect();
    Term::new(head, children).expect("arity respected")
}

/// Replaces the head of one random subterm with another symbol of the same arity.
pub fn swap_symbol(rng: &mut SplitMix64, sig: &Signature, term: &Term) -> Option<Term> {
    let positions = term.post_order().len();
    let target = rng.below(positions);
    let mut counter = 0;
    rebuild(rng, sig, term, target, &mut counter)
}

fn rebuild(
    rng: &mut SplitMix64,
    sig: &Signature,
    term: &Term,
    target: usize,
    counter: &mut usize,
) -> Option<Term> {
    let mut changed = false;
    let mut children = Vec::with_capacity(term.children().len());
    for c in term.children() {
        match rebuild(rng, sig, c, target, counter) {
            Some(new) => {
                changed = true;
                children.push(new);
            }
            None => children.push(c.clone()),
        }
    }
    let here = *counter;
    *counter += 1;
    if here == target {
        let alternatives: Vec<&Symbol> = sig
            .iter()
            .filter(|s| s.arity() == term.head().arity() && *s != term.head())
            .collect();
        if alternatives.is_empty() {
            return None;
        }
        let head = (*rng.pick(&alternatives)).clone();
        return Some(Term::new(head, children).expect("same arity"));
    }
    if changed {
        Some(Term::new(term.head().clone(), children).expect("same arity"))
    } else {
        None
    }
}

/// A deep, already normalized VSA over `a, b, g/1, f/2` with about nine
/// nodes plus edges per layer: `U_k = U(g(U_{k-1}), f(U_{k-1}, U_{k-2}), a)`.
///
/// Its denotation grows doubly exponentially, so it is only useful for
/// structural work (normalization, embedding), never enumeration.
pub fn layered_vsa(layers: usize) -> (VsaStore, NodeLabel) {
    let sig = Signature::from_pairs([("a", 0), ("b", 0), ("g", 1), ("f", 2)]).expect("valid");
    let mut store = VsaStore::with_signature(sig);
    let sym = |store: &VsaStore, n: &str| store.signature().get(n).expect("declared").clone();
    let (a, b, g, f) = (
        sym(&store, "a"),
        sym(&store, "b"),
        sym(&store, "g"),
        sym(&store, "f"),
    );
    let ja = store.mk_join(a, vec![]).expect("constant");
    let jb = store.mk_join(b, vec![]).expect("constant");
    let mut prev2 = store.mk_union([ja]);
    let mut prev = store.mk_union([jb, ja]);
    for _ in 2..layers.max(2) {
        let jg = store.mk_join(g.clone(), vec![prev]).expect("arity 1");
        let jf = store
            .mk_join(f.clone(), vec![prev, prev2])
            .expect("arity 2");
        let u = store.mk_union([jg, jf, ja]);
        prev2 = prev;
        prev = u;
    }
    (store, prev)
}
