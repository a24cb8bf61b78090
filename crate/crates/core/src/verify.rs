//! End-to-end checks of the embedding on single VSAs and on seeded corpora.

use crate::automaton::Acyclicity;
use crate::embed::{check_linearity, embed, LinearityReport};
use crate::error::Result;
use crate::par::Exec;
use crate::term::Term;
use crate::testgen::{gen_vsa, oracle_enumerate, GenConfig};
use crate::vsa::{NodeLabel, VsaStore};

/// Outcome of normalizing, embedding and enumerating one VSA.
#[derive(Clone, Debug)]
pub struct EquivalenceCheck {
    pub vsa_terms: Vec<Term>,
    pub automaton_terms: Vec<Term>,
    /// Present when the oracle was requested.
    pub oracle_agrees: Option<bool>,
    pub linearity: LinearityReport,
    pub acyclic: bool,
}

impl EquivalenceCheck {
    pub fn languages_equal(&self) -> bool {
        self.vsa_terms == self.automaton_terms
    }

    pub fn passed(&self) -> bool {
        self.languages_equal()
            && self.oracle_agrees != Some(false)
            && self.linearity.all_hold()
            && self.acyclic
    }
}

/// Enumerates `root` directly and through its embedded automaton.
pub fn check_equivalence(
    store: &mut VsaStore,
    root: NodeLabel,
    limit: usize,
    with_oracle: bool,
    exec: Exec,
) -> Result<EquivalenceCheck> {
    let vsa_terms = store.enumerate_with(root, limit, exec)?;
    let normalized = store.normalize(root)?;
    let embedding = embed(&normalized)?;
    let automaton_terms = embedding.automaton.enumerate_with(limit, exec)?;
    let oracle_agrees = if with_oracle {
        let oracle = oracle_enumerate(store, root, limit)?;
        Some(oracle.len() == vsa_terms.len() && oracle.iter().eq(vsa_terms.iter()))
    } else {
        None
    };
    Ok(EquivalenceCheck {
        vsa_terms,
        automaton_terms,
        oracle_agrees,
        linearity: check_linearity(&normalized, &embedding),
        acyclic: matches!(embedding.automaton.is_acyclic(), Acyclicity::Acyclic(_)),
    })
}

#[derive(Clone, Debug)]
pub struct CorpusOutcome {
    pub seed: u64,
    pub terms: usize,
    pub passed: bool,
    pub error: Option<String>,
}

/// Generates one VSA per seed and runs [`check_equivalence`] (with the oracle) on each.
///
/// Seeds are independent, so with [`Exec::Parallel`] they are checked
/// concurrently; enumeration inside each check stays sequential.
pub fn check_corpus(
    seeds: &[u64],
    config: impl Fn(u64) -> GenConfig + Sync + Send,
    exec: Exec,
) -> Vec<CorpusOutcome> {
    exec.map(seeds, |&seed| {
        let cfg = config(seed);
        let run = gen_vsa(&cfg).and_then(|(mut store, root)| {
            check_equivalence(&mut store, root, cfg.max_terms, true, Exec::Sequential)
        });
        match run {
            Ok(check) => CorpusOutcome {
                seed,
                terms: check.vsa_terms.len(),
                passed: check.passed(),
                error: None,
            },
            Err(e) => CorpusOutcome {
                seed,
                terms: 0,
                passed: false,
                error: Some(e.to_string()),
            },
        }
    })
}
