use std::cmp::Ordering;

use proptest::prelude::*;
use vsa_automata::testgen::{
    gen_vsa, oracle_enumerate, random_term, standard_signature, GenConfig, SplitMix64,
};
use vsa_automata::vsa::{NormRef, NormalizedVsa};
use vsa_automata::{embed, parse_term, print_term, term_ord, Term, VsaNode, VsaStore};

fn term(seed: u64, depth: usize) -> Term {
    random_term(&mut SplitMix64::new(seed), &standard_signature(), depth)
}

fn small_config(seed: u64, depth: usize, width: usize, share: f64) -> GenConfig {
    GenConfig {
        max_depth: depth,
        max_union_width: width,
        share_probability: share,
        max_terms: 2_000,
        ..GenConfig::corpus(seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn terms_round_trip(seed: u64, depth in 1usize..7) {
        let t = term(seed, depth);
        let printed = print_term(&t);
        prop_assert_eq!(parse_term(&printed, &standard_signature()).unwrap(), t.clone());
        prop_assert_eq!(printed, t.to_string());
    }

    #[test]
    fn term_order_is_total(s1: u64, s2: u64, s3: u64, depth in 1usize..5) {
        let (a, b, c) = (term(s1, depth), term(s2, depth), term(s3, depth));
        prop_assert_eq!(term_ord(&a, &b), term_ord(&b, &a).reverse());
        prop_assert_eq!(term_ord(&a, &b) == Ordering::Equal, a == b);
        prop_assert_eq!(term_ord(&a, &a), Ordering::Equal);
        if term_ord(&a, &b) != Ordering::Greater && term_ord(&b, &c) != Ordering::Greater {
            prop_assert_ne!(term_ord(&a, &c), Ordering::Greater);
        }
    }

    #[test]
    fn normalization_preserves_denotation(seed: u64, depth in 1usize..5, width in 1usize..4, share in 0.0f64..0.8) {
        let cfg = small_config(seed, depth, width, share);
        let (mut store, root) = gen_vsa(&cfg).unwrap();
        let before = store.enumerate(root, cfg.max_terms).unwrap();
        let oracle = oracle_enumerate(&store, root, cfg.max_terms).unwrap();
        prop_assert!(oracle.iter().eq(before.iter()));

        let n = store.normalize(root).unwrap();
        prop_assert_eq!(n.enumerate(cfg.max_terms).unwrap(), before.clone());
        prop_assert!(store.check_uniqueness());
        prop_assert!(!store.contains_set_nodes(n.root_label()));

        // Normal form: unions hold only joins, joins only unions.
        for l in store.reachable(n.root_label()) {
            match store.node(l) {
                VsaNode::Set(_) => prop_assert!(false, "set node survived"),
                VsaNode::Union(cs) => {
                    for c in cs {
                        let is_join = matches!(store.node(*c), VsaNode::Join { .. });
                        prop_assert!(is_join);
                    }
                }
                VsaNode::Join { children, .. } => {
                    for c in children {
                        let is_union = matches!(store.node(*c), VsaNode::Union(_));
                        prop_assert!(is_union);
                    }
                }
            }
        }

        // Normalizing again changes nothing.
        let again = store.normalize(n.root_label()).unwrap();
        prop_assert_eq!(again.root_label(), n.root_label());
        prop_assert_eq!(again.size(), n.size());
    }

    #[test]
    fn normalized_rebuilds_through_a_fresh_store(seed: u64, depth in 1usize..5) {
        let cfg = small_config(seed, depth, 3, 0.3);
        let (mut store, root) = gen_vsa(&cfg).unwrap();
        let n = store.normalize(root).unwrap();
        let mut fresh = VsaStore::with_signature(store.signature().clone());
        let r = n.to_store(&mut fresh).unwrap();
        let rebuilt = NormalizedVsa::from_store(&fresh, r).unwrap();
        prop_assert_eq!(rebuilt.size(), n.size());
        prop_assert_eq!(
            rebuilt.enumerate(cfg.max_terms).unwrap(),
            n.enumerate(cfg.max_terms).unwrap()
        );
    }

    /// Every union's denotation is its state's language, and every join's
    /// denotation is its transition's language.
    #[test]
    fn embedding_matches_node_by_node(seed: u64, depth in 1usize..5, share in 0.0f64..0.8) {
        let cfg = small_config(seed, depth, 3, share);
        let (mut store, root) = gen_vsa(&cfg).unwrap();
        let n = store.normalize(root).unwrap();
        let r = embed(&n).unwrap();
        let exec = vsa_automata::Exec::Sequential;
        for (ui, u) in n.unions().iter().enumerate() {
            let want = n.enumerate_node(NormRef::Union(ui), cfg.max_terms, exec).unwrap();
            let got = r.automaton.state_language(r.state_of_union[&u.label], cfg.max_terms).unwrap();
            prop_assert_eq!(got, want);
        }
        for (ji, j) in n.joins().iter().enumerate() {
            let want = n.enumerate_node(NormRef::Join(ji), cfg.max_terms, exec).unwrap();
            let got = r.automaton.transition_language(r.transition_of_join[&j.label], cfg.max_terms).unwrap();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn parallel_and_sequential_enumeration_agree(seed: u64) {
        let (store, root) = gen_vsa(&GenConfig::corpus(seed)).unwrap();
        prop_assert_eq!(
            store.enumerate_with(root, 10_000, vsa_automata::Exec::Sequential).unwrap(),
            store.enumerate_with(root, 10_000, vsa_automata::Exec::Parallel).unwrap()
        );
    }
}

#[test]
fn enumeration_output_is_sorted_and_distinct() {
    for seed in 0..100 {
        let (store, root) = gen_vsa(&GenConfig::corpus(seed)).unwrap();
        let terms = store.enumerate(root, 10_000).unwrap();
        assert!(terms
            .windows(2)
            .all(|w| term_ord(&w[0], &w[1]) == Ordering::Less));
    }
}
