//! Bottom-up nondeterministic finite tree automata.
//!
//! Transitions are stored factored: one record per `(head, children)` key
//! with the set of its target states. The expanded transition relation is
//! available as a view for export and tests.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;

use crate::denote;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::term::{Signature, Symbol, Term};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// An expanded transition `head(children) -> target`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub head: Symbol,
    pub children: Vec<StateId>,
    pub target: StateId,
}

/// `head(children)` shared by every state in `targets`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredTransition {
    pub id: usize,
    pub head: Symbol,
    pub children: Vec<StateId>,
    /// Sorted, non-empty.
    pub targets: Vec<StateId>,
}

#[derive(Clone, Debug)]
pub struct TreeAutomaton {
    signature: Signature,
    state_names: Vec<String>,
    by_name: HashMap<String, StateId>,
    finals: BTreeSet<StateId>,
    transitions: Vec<FactoredTransition>,
    by_key: HashMap<(Symbol, Vec<StateId>), usize>,
}

/// Result of [`TreeAutomaton::is_acyclic`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Acyclicity {
    /// States in a topological order (children before targets).
    Acyclic(Vec<StateId>),
    /// States forming a cycle, each feeding the next.
    Cyclic(Vec<StateId>),
}

impl Acyclicity {
    pub fn is_acyclic(&self) -> bool {
        matches!(self, Acyclicity::Acyclic(_))
    }
}

/// Outcome of a nondeterministic bottom-up run on one term.
#[derive(Clone, Debug)]
pub struct MembershipRun {
    pub accepted: bool,
    /// Every subterm in post-order with the states it can reach.
    pub reached: Vec<(Term, BTreeSet<StateId>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathCount {
    /// Number of derivations reaching each state, indexed by state.
    pub per_state: Vec<BigUint>,
    /// Sum over final states.
    pub total: BigUint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaSizeReport {
    pub states: usize,
    pub factored_transitions: usize,
    pub expanded_transitions: usize,
    /// Sum of the arities of the factored transitions.
    pub arity_sum: usize,
}

/// Product automaton plus the pair of factor states behind each product state.
#[derive(Clone, Debug)]
pub struct Product {
    pub automaton: TreeAutomaton,
    pub pairs: Vec<(StateId, StateId)>,
}

impl TreeAutomaton {
    pub fn new(signature: Signature) -> Self {
        TreeAutomaton {
            signature,
            state_names: Vec::new(),
            by_name: HashMap::new(),
            finals: BTreeSet::new(),
            transitions: Vec::new(),
            by_key: HashMap::new(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.state_names.len() as u32).map(StateId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s.index()]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.by_name.get(name).copied()
    }

    /// Adds a state, or returns the existing one with that name.
    pub fn add_state(&mut self, name: &str) -> StateId {
        if let Some(&s) = self.by_name.get(name) {
            return s;
        }
        let s = StateId(u32::try_from(self.state_names.len()).expect("too many states"));
        self.state_names.push(name.to_string());
        self.by_name.insert(name.to_string(), s);
        s
    }

    pub fn add_final(&mut self, s: StateId) {
        assert!(s.index() < self.num_states(), "unknown state {s:?}");
        self.finals.insert(s);
    }

    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals.contains(&s)
    }

    /// Adds `head(children) -> target`, merging into the factored transition with the same key.
    pub fn add_transition(
        &mut self,
        head: Symbol,
        children: Vec<StateId>,
        target: StateId,
    ) -> Result<()> {
        self.add_factored(head, children, [target])
    }

    pub fn add_factored(
        &mut self,
        head: Symbol,
        children: Vec<StateId>,
        targets: impl IntoIterator<Item = StateId>,
    ) -> Result<()> {
        if children.len() != head.arity() {
            return Err(Error::ArityMismatch {
                name: head.name().to_string(),
                expected: head.arity(),
                found: children.len(),
                offset: None,
            });
        }
        if !self.signature.contains(&head) {
            return Err(Error::UnknownSymbol {
                name: head.name().to_string(),
                offset: 0,
            });
        }
        let n = self.num_states();
        let targets: Vec<StateId> = targets.into_iter().collect();
        if let Some(bad) = children.iter().chain(&targets).find(|s| s.index() >= n) {
            return Err(Error::UnknownState(format!("{bad:?}")));
        }
        let key = (head, children);
        let ix = match self.by_key.get(&key) {
            Some(&ix) => ix,
            None => {
                let ix = self.transitions.len();
                self.transitions.push(FactoredTransition {
                    id: ix,
                    head: key.0.clone(),
                    children: key.1.clone(),
                    targets: Vec::new(),
                });
                self.by_key.insert(key, ix);
                ix
            }
        };
        let ts = &mut self.transitions[ix].targets;
        for t in targets {
            if let Err(pos) = ts.binary_search(&t) {
                ts.insert(pos, t);
            }
        }
        Ok(())
    }

    pub fn factored(&self) -> &[FactoredTransition] {
        &self.transitions
    }

    /// The expanded transition relation, in factored order then target order.
    pub fn expanded(&self) -> impl Iterator<Item = Transition> + '_ {
        self.transitions.iter().flat_map(|t| {
            t.targets.iter().map(move |&target| Transition {
                head: t.head.clone(),
                children: t.children.clone(),
                target,
            })
        })
    }

    pub fn size(&self) -> TaSizeReport {
        TaSizeReport {
            states: self.num_states(),
            factored_transitions: self.transitions.len(),
            expanded_transitions: self.transitions.iter().map(|t| t.targets.len()).sum(),
            arity_sum: self.transitions.iter().map(|t| t.children.len()).sum(),
        }
    }

    /// Kahn's algorithm over the dependency graph (child state -> target state).
    pub fn is_acyclic(&self) -> Acyclicity {
        let n = self.num_states();
        let mut indegree = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in &self.transitions {
            for c in &t.children {
                for &target in &t.targets {
                    succ[c.index()].push(target.index());
                    indegree[target.index()] += 1;
                }
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&s| indegree[s] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(s) = queue.pop_front() {
            order.push(StateId(s as u32));
            for &t in &succ[s] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    queue.push_back(t);
                }
            }
        }
        if order.len() == n {
            return Acyclicity::Acyclic(order);
        }
        // Every leftover state has a leftover predecessor; walk back until one repeats.
        let mut pred: Vec<Option<usize>> = vec![None; n];
        for (s, ts) in succ.iter().enumerate() {
            if indegree[s] == 0 {
                continue;
            }
            for &t in ts {
                if indegree[t] > 0 && pred[t].is_none() {
                    pred[t] = Some(s);
                }
            }
        }
        let start = (0..n).find(|&s| indegree[s] > 0).expect("leftover state");
        let mut pos = HashMap::new();
        let mut walk = Vec::new();
        let mut cur = start;
        while !pos.contains_key(&cur) {
            pos.insert(cur, walk.len());
            walk.push(cur);
            cur = pred[cur].expect("leftover state has a leftover predecessor");
        }
        let mut cycle: Vec<StateId> = walk[pos[&cur]..]
            .iter()
            .map(|&s| StateId(s as u32))
            .collect();
        cycle.reverse();
        Acyclicity::Cyclic(cycle)
    }

    fn topo_order(&self) -> Result<Vec<StateId>> {
        match self.is_acyclic() {
            Acyclicity::Acyclic(order) => Ok(order),
            Acyclicity::Cyclic(cycle) => Err(Error::CyclicAutomaton {
                witness: cycle
                    .iter()
                    .map(|&s| self.state_name(s).to_string())
                    .collect(),
            }),
        }
    }

    /// Transitions grouped by target state.
    fn inbound(&self) -> Vec<Vec<usize>> {
        let mut inbound = vec![Vec::new(); self.num_states()];
        for (i, t) in self.transitions.iter().enumerate() {
            for &target in &t.targets {
                inbound[target.index()].push(i);
            }
        }
        inbound
    }

    /// States with a non-empty language.
    pub fn productive_states(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut productive = vec![false; n];
        // Counter-based fixpoint; also correct on cyclic automata.
        let mut missing: Vec<usize> = self
            .transitions
            .iter()
            .map(|t| t.children.iter().collect::<HashSet<_>>().len())
            .collect();
        let mut uses: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, t) in self.transitions.iter().enumerate() {
            for c in t.children.iter().collect::<HashSet<_>>() {
                uses[c.index()].push(i);
            }
        }
        let mut queue: VecDeque<usize> = (0..self.transitions.len())
            .filter(|&i| missing[i] == 0)
            .collect();
        while let Some(i) = queue.pop_front() {
            for &target in &self.transitions[i].targets {
                if !productive[target.index()] {
                    productive[target.index()] = true;
                    for &u in &uses[target.index()] {
                        missing[u] -= 1;
                        if missing[u] == 0 {
                            queue.push_back(u);
                        }
                    }
                }
            }
        }
        productive
    }

    pub fn enumerate(&self, limit: usize) -> Result<Vec<Term>> {
        self.enumerate_with(limit, Exec::default())
    }

    /// `⋃_{q ∈ finals} ⟦q⟧`, sorted.
    pub fn enumerate_with(&self, limit: usize, exec: Exec) -> Result<Vec<Term>> {
        let finals: Vec<StateId> = self.finals.iter().copied().collect();
        let mut sets = self.languages(&finals, limit, exec)?;
        let parts: Vec<Vec<Term>> = finals.iter().filter_map(|f| sets.remove(f)).collect();
        let refs: Vec<&[Term]> = parts.iter().map(Vec::as_slice).collect();
        denote::union(&refs, limit)
    }

    /// `⟦q⟧` for a single state.
    pub fn state_language(&self, q: StateId, limit: usize) -> Result<Vec<Term>> {
        Ok(self
            .languages(&[q], limit, Exec::default())?
            .remove(&q)
            .unwrap_or_default())
    }

    /// `⟦head(children) -> _⟧` for one factored transition.
    pub fn transition_language(&self, ix: usize, limit: usize) -> Result<Vec<Term>> {
        let t = &self.transitions[ix];
        let mut wanted: Vec<StateId> = t.children.clone();
        wanted.sort();
        wanted.dedup();
        let sets = self.languages(&wanted, limit, Exec::default())?;
        let empty = Vec::new();
        let parts: Vec<&[Term]> = t
            .children
            .iter()
            .map(|c| sets.get(c).unwrap_or(&empty).as_slice())
            .collect();
        denote::product(&t.head, &parts, limit, Exec::default())
    }

    /// Languages of the non-empty states among `roots` (least fixed point, bottom-up).
    fn languages(
        &self,
        roots: &[StateId],
        limit: usize,
        exec: Exec,
    ) -> Result<HashMap<StateId, Vec<Term>>> {
        let order = self.topo_order()?;
        let productive = self.productive_states();
        let inbound = self.inbound();
        let live = |i: &usize| {
            self.transitions[*i]
                .children
                .iter()
                .all(|c| productive[c.index()])
        };

        // Productive cone below the roots; every state there denotes at most
        // as many terms as some root, so overflow checks stay exact.
        let mut needed = vec![false; self.num_states()];
        let mut stack: Vec<StateId> = roots
            .iter()
            .copied()
            .filter(|r| productive[r.index()])
            .collect();
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut needed[s.index()], true) {
                continue;
            }
            for i in inbound[s.index()].iter().filter(|i| live(i)) {
                stack.extend(self.transitions[*i].children.iter().copied());
            }
        }

        let mut sets: HashMap<StateId, Vec<Term>> = HashMap::new();
        for s in order {
            if !needed[s.index()] {
                continue;
            }
            let mut parts: Vec<Vec<Term>> = Vec::new();
            for i in inbound[s.index()].iter().filter(|i| live(i)) {
                let t = &self.transitions[*i];
                let children: Vec<&[Term]> =
                    t.children.iter().map(|c| sets[c].as_slice()).collect();
                parts.push(denote::product(&t.head, &children, limit, exec)?);
            }
            let refs: Vec<&[Term]> = parts.iter().map(Vec::as_slice).collect();
            let set = denote::union(&refs, limit)?;
            sets.insert(s, set);
        }
        Ok(sets)
    }

    /// Nondeterministic bottom-up run computing every reachable state per subterm.
    /// Symbols outside the signature reach no state.
    pub fn run_membership(&self, term: &Term) -> MembershipRun {
        let mut by_head: HashMap<&Symbol, Vec<usize>> = HashMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            by_head.entry(&t.head).or_default().push(i);
        }
        let mut memo: HashMap<&Term, BTreeSet<StateId>> = HashMap::new();
        let mut reached = Vec::new();
        for sub in term.post_order() {
            if let Some(states) = memo.get(sub) {
                reached.push((sub.clone(), states.clone()));
                continue;
            }
            let mut states = BTreeSet::new();
            for &i in by_head.get(sub.head()).into_iter().flatten() {
                let t = &self.transitions[i];
                let fits = t
                    .children
                    .iter()
                    .zip(sub.children())
                    .all(|(q, c)| memo[c].contains(q));
                if fits {
                    states.extend(t.targets.iter().copied());
                }
            }
            reached.push((sub.clone(), states.clone()));
            memo.insert(sub, states);
        }
        let accepted = memo[term].iter().any(|s| self.finals.contains(s));
        MembershipRun { accepted, reached }
    }

    pub fn accepts(&self, term: &Term) -> bool {
        self.run_membership(term).accepted
    }

    /// Number of accepting derivations, per state and in total.
    ///
    /// This equals the size of the language only when no term has two
    /// derivations; otherwise it is an upper bound (see [`Self::is_unambiguous`]).
    pub fn count_paths(&self) -> Result<PathCount> {
        let order = self.topo_order()?;
        let inbound = self.inbound();
        let mut per_state = vec![BigUint::from(0u32); self.num_states()];
        for s in order {
            let mut total = BigUint::from(0u32);
            for &i in &inbound[s.index()] {
                let mut prod = BigUint::from(1u32);
                for c in &self.transitions[i].children {
                    prod *= &per_state[c.index()];
                }
                total += prod;
            }
            per_state[s.index()] = total;
        }
        let total = self
            .finals
            .iter()
            .map(|f| &per_state[f.index()])
            .sum::<BigUint>();
        Ok(PathCount { per_state, total })
    }

    /// True if every accepted term has exactly one accepting derivation.
    ///
    /// Decided on the self-product: two distinct accepting runs on the same
    /// term disagree at some node, which shows up as an off-diagonal product
    /// state that can still reach a final pair.
    pub fn is_unambiguous(&self) -> bool {
        let product = self.product(self).expect("same signature");
        let useful = product.automaton.coreachable();
        product
            .pairs
            .iter()
            .enumerate()
            .all(|(i, (p, q))| p == q || !useful[i])
    }

    /// States from which some final state can be reached.
    fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut into: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in &self.transitions {
            for &target in &t.targets {
                for c in &t.children {
                    into[target.index()].push(c.index());
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = self.finals.iter().map(|f| f.index()).collect();
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut seen[s], true) {
                continue;
            }
            stack.extend(into[s].iter().copied());
        }
        seen
    }

    /// Product automaton accepting `⟦self⟧ ∩ ⟦other⟧`.
    pub fn intersect(&self, other: &TreeAutomaton) -> Result<TreeAutomaton> {
        Ok(self.product(other)?.automaton)
    }

    /// Reachable-only product: pair states are discovered bottom-up starting
    /// from nullary transitions, so unreachable pairs are never built.
    pub fn product(&self, other: &TreeAutomaton) -> Result<Product> {
        let signature = self
            .signature
            .merge(&other.signature)
            .map_err(|e| Error::SignatureMismatch(e.to_string()))?;
        let mut out = TreeAutomaton::new(signature);
        let mut pairs: Vec<(StateId, StateId)> = Vec::new();
        let mut pair_ix: HashMap<(StateId, StateId), StateId> = HashMap::new();

        let mut b_by_head: HashMap<&Symbol, Vec<usize>> = HashMap::new();
        for (i, t) in other.transitions.iter().enumerate() {
            b_by_head.entry(&t.head).or_default().push(i);
        }
        // Candidate transition pairs, and which pairs wait on which state of each factor.
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for (i, ta) in self.transitions.iter().enumerate() {
            for &j in b_by_head.get(&ta.head).into_iter().flatten() {
                candidates.push((i, j));
            }
        }
        let mut waiting: HashMap<(StateId, StateId), Vec<usize>> = HashMap::new();
        let mut missing: Vec<usize> = Vec::with_capacity(candidates.len());
        let mut ready: VecDeque<usize> = VecDeque::new();
        for (k, &(i, j)) in candidates.iter().enumerate() {
            let ta = &self.transitions[i];
            let tb = &other.transitions[j];
            let keys: HashSet<(StateId, StateId)> = ta
                .children
                .iter()
                .copied()
                .zip(tb.children.iter().copied())
                .collect();
            missing.push(keys.len());
            if keys.is_empty() {
                ready.push_back(k);
            }
            for key in keys {
                waiting.entry(key).or_default().push(k);
            }
        }

        while let Some(k) = ready.pop_front() {
            let (i, j) = candidates[k];
            let ta = &self.transitions[i];
            let tb = &other.transitions[j];
            let children: Vec<StateId> = ta
                .children
                .iter()
                .zip(&tb.children)
                .map(|(&p, &q)| pair_ix[&(p, q)])
                .collect();
            let mut targets = Vec::new();
            for &p in &ta.targets {
                for &q in &tb.targets {
                    let id = match pair_ix.get(&(p, q)) {
                        Some(&id) => id,
                        None => {
                            let id = out.add_state(&format!("p{}", pairs.len()));
                            pairs.push((p, q));
                            pair_ix.insert((p, q), id);
                            if self.is_final(p) && other.is_final(q) {
                                out.add_final(id);
                            }
                            for &w in waiting.get(&(p, q)).into_iter().flatten() {
                                missing[w] -= 1;
                                if missing[w] == 0 {
                                    ready.push_back(w);
                                }
                            }
                            id
                        }
                    };
                    targets.push(id);
                }
            }
            out.add_factored(ta.head.clone(), children, targets)?;
        }
        Ok(Product {
            automaton: out,
            pairs,
        })
    }
}
