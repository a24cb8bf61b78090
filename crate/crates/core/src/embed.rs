//! Embedding of normalized VSAs into acyclic tree automata.
//!
//! Every union node `U^l` becomes a state `q^l`. Every join node
//! `J_F(U^{l_1}, ..., U^{l_k})` becomes one factored transition
//! `F(q^{l_1}, ..., q^{l_k})` whose targets are the states of the unions that
//! contain it. The root union's state is the only final state. Since each
//! join is visited once and each edge once, the construction runs in time and
//! space linear in the number of VSA nodes plus edges.

use std::collections::BTreeMap;

use crate::automaton::{StateId, TaSizeReport, TreeAutomaton};
use crate::error::{Error, Result};
use crate::vsa::{NodeLabel, NormalizedVsa, VsaSizeReport};

#[derive(Clone, Debug)]
pub struct EmbeddingResult {
    pub automaton: TreeAutomaton,
    pub root_state: StateId,
    pub state_of_union: BTreeMap<NodeLabel, StateId>,
    /// Factored transition index for each join label.
    pub transition_of_join: BTreeMap<NodeLabel, usize>,
    pub vsa_size: VsaSizeReport,
    pub ta_size: TaSizeReport,
}

/// State ids follow the normalized VSA's union order (children first); state
/// names are `q<label>` after the union labels.
pub fn embed(vsa: &NormalizedVsa) -> Result<EmbeddingResult> {
    let mut automaton = TreeAutomaton::new(vsa.signature().clone());
    let mut state_of_union = BTreeMap::new();
    for u in vsa.unions() {
        let s = automaton.add_state(&format!("q{}", u.label));
        if state_of_union.insert(u.label, s).is_some() {
            return Err(Error::InvalidNormalized(format!(
                "union label {:?} appears twice",
                u.label
            )));
        }
    }

    // parents[j] = unions containing join j, in union order.
    let mut parents: Vec<Vec<StateId>> = vec![Vec::new(); vsa.joins().len()];
    for (ui, u) in vsa.unions().iter().enumerate() {
        for &j in &u.joins {
            parents[j].push(StateId(ui as u32));
        }
    }

    let mut transition_of_join = BTreeMap::new();
    for (ji, (join, targets)) in vsa.joins().iter().zip(parents).enumerate() {
        if targets.is_empty() {
            return Err(Error::InvalidNormalized(format!(
                "join {:?} has no parent union",
                join.label
            )));
        }
        let children = join.children.iter().map(|&u| StateId(u as u32)).collect();
        let before = automaton.factored().len();
        automaton.add_factored(join.head.clone(), children, targets)?;
        if automaton.factored().len() != before + 1 {
            return Err(Error::InvalidNormalized(format!(
                "join {:?} duplicates another join (uniqueness violated)",
                join.label
            )));
        }
        debug_assert_eq!(before, ji);
        transition_of_join.insert(join.label, before);
    }

    let root_state = StateId(vsa.root() as u32);
    automaton.add_final(root_state);
    let ta_size = automaton.size();
    Ok(EmbeddingResult {
        automaton,
        root_state,
        state_of_union,
        transition_of_join,
        vsa_size: vsa.size(),
        ta_size,
    })
}

/// One size equality between the VSA and its embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearityCheck {
    pub name: &'static str,
    pub automaton_side: usize,
    pub vsa_side: usize,
}

impl LinearityCheck {
    pub fn holds(&self) -> bool {
        self.automaton_side == self.vsa_side
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearityReport {
    pub checks: Vec<LinearityCheck>,
}

impl LinearityReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(LinearityCheck::holds)
    }
}

/// States vs unions, factored transitions vs joins, expanded transitions vs
/// union→join edges, summed arities vs join→union edges.
pub fn check_linearity(vsa: &NormalizedVsa, result: &EmbeddingResult) -> LinearityReport {
    let v = vsa.size();
    let t = result.automaton.size();
    let check = |name, automaton_side, vsa_side| LinearityCheck {
        name,
        automaton_side,
        vsa_side,
    };
    LinearityReport {
        checks: vec![
            check("states == union nodes", t.states, v.unions),
            check(
                "factored transitions == join nodes",
                t.factored_transitions,
                v.joins,
            ),
            check(
                "expanded transitions == union->join edges",
                t.expanded_transitions,
                v.union_join_edges,
            ),
            check(
                "transition arity sum == join->union edges",
                t.arity_sum,
                v.join_union_edges,
            ),
        ],
    }
}
