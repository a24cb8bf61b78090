//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.
//!
//! Run with `cargo test --test acceptance`.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use vsa_automata::io;
use vsa_automata::testgen::{
    gen_ambiguous_vsa, gen_automaton, gen_vsa, layered_vsa, oracle_enumerate, standard_signature,
    swap_symbol, GenConfig, SplitMix64,
};
use vsa_automata::verify::check_corpus;
use vsa_automata::{check_linearity, embed, Exec, Term, VsaStore};

const CORPUS: u64 = 500;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus_seeds() -> Vec<u64> {
    (0..CORPUS).collect()
}

fn fig1_reproduction() -> Outcome {
    let start = Instant::now();
    let text = std::fs::read_to_string(fixture("fig1.vsa")).map_err(|e| e.to_string())?;
    let (mut store, root) = io::load_vsa(&text).map_err(|e| e.to_string())?;
    let normalized = store.normalize(root).map_err(|e| e.to_string())?;
    let result = embed(&normalized).map_err(|e| e.to_string())?;
    let a = &result.automaton;
    let terms = a.enumerate(100).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let mut expected = Vec::new();
    for x in ["a", "b", "c"] {
        for y in ["a", "b", "c"] {
            expected.push(format!("(f (g {x}) (g {y}))"));
        }
    }
    let got: Vec<String> = terms.iter().map(Term::to_string).collect();
    ensure(a.num_states() == 3, || format!("{} states", a.num_states()))?;
    ensure(a.factored().len() == 5, || {
        format!("{} factored transitions", a.factored().len())
    })?;
    ensure(got == expected, || format!("terms {got:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("3 states, 5 transitions, 9 terms in {elapsed:.2?}"))
}

fn corpus_checks() -> [Outcome; 3] {
    // Equivalence, linearity and acyclicity all come out of one pass over the corpus.
    let start = Instant::now();
    let outcomes = check_corpus(&corpus_seeds(), GenConfig::corpus, Exec::default());
    let elapsed = start.elapsed();
    let mut equivalence_fail = Vec::new();
    let mut total_terms = 0usize;
    for o in &outcomes {
        total_terms += o.terms;
        if let Some(e) = &o.error {
            equivalence_fail.push(format!("seed {}: {e}", o.seed));
        }
    }

    // Redo the structural checks explicitly so each criterion reports on its own.
    let mut lin_equalities = 0;
    let mut lin_fail = Vec::new();
    let mut acyclic = 0;
    let mut enum_fail = Vec::new();
    for seed in corpus_seeds() {
        let cfg = GenConfig::corpus(seed);
        let (mut store, root) = match gen_vsa(&cfg) {
            Ok(v) => v,
            Err(e) => {
                lin_fail.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let vsa_terms = store.enumerate(root, cfg.max_terms);
        let normalized = store.normalize(root).expect("generated VSAs normalize");
        let result = embed(&normalized).expect("embedding succeeds");
        for c in check_linearity(&normalized, &result).checks {
            if c.holds() {
                lin_equalities += 1;
            } else {
                lin_fail.push(format!(
                    "seed {seed}: {} ({} vs {})",
                    c.name, c.automaton_side, c.vsa_side
                ));
            }
        }
        if result.automaton.is_acyclic().is_acyclic() {
            acyclic += 1;
        }
        let ta_terms = result.automaton.enumerate(cfg.max_terms);
        let oracle = oracle_enumerate(&store, root, cfg.max_terms);
        match (vsa_terms, ta_terms, oracle) {
            (Ok(v), Ok(t), Ok(o)) => {
                if v != t || !o.iter().eq(v.iter()) {
                    enum_fail.push(format!(
                        "seed {seed}: vsa {} ta {} oracle {}",
                        v.len(),
                        t.len(),
                        o.len()
                    ));
                }
            }
            _ => enum_fail.push(format!("seed {seed}: enumeration failed")),
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();

    let agreement = if passed == outcomes.len()
        && equivalence_fail.is_empty()
        && enum_fail.is_empty()
        && elapsed < Duration::from_secs(60)
    {
        Ok(format!(
            "{passed}/{CORPUS} seeds agree (vsa = automaton = oracle), {total_terms} terms, {elapsed:.2?}"
        ))
    } else {
        Err(format!(
            "{passed}/{CORPUS} passed in {elapsed:.2?}; {:?} {:?}",
            equivalence_fail.iter().take(3).collect::<Vec<_>>(),
            enum_fail.iter().take(3).collect::<Vec<_>>()
        ))
    };

    let linearity = if lin_fail.is_empty() && lin_equalities == 4 * CORPUS as usize {
        match embed_scaling() {
            Ok(report) => Ok(format!(
                "{lin_equalities}/{} equalities hold; {report}",
                4 * CORPUS
            )),
            Err(e) => Err(format!("{lin_equalities} equalities hold but {e}")),
        }
    } else {
        Err(format!(
            "{lin_equalities}/{} equalities; {:?}",
            4 * CORPUS,
            lin_fail.iter().take(3).collect::<Vec<_>>()
        ))
    };

    let acyclicity = if acyclic == CORPUS as usize {
        Ok(format!("{acyclic}/{CORPUS} embedded automata acyclic"))
    } else {
        Err(format!("only {acyclic}/{CORPUS} acyclic"))
    };
    [agreement, linearity, acyclicity]
}

/// Embed time at three sizes; passes when each size stays within 3x of a
/// linear extrapolation from the smallest.
fn embed_scaling() -> Result<String, String> {
    let targets = [1_000usize, 10_000, 100_000];
    let mut points = Vec::new();
    for target in targets {
        // About nine nodes plus edges per layer.
        let (mut store, root) = layered_vsa(target / 9);
        let normalized = store.normalize(root).map_err(|e| e.to_string())?;
        let size = normalized.size();
        let reps = (200_000 / target).max(3);
        let mut best = Duration::MAX;
        for _ in 0..reps {
            let start = Instant::now();
            let r = embed(&normalized).map_err(|e| e.to_string())?;
            best = best.min(start.elapsed());
            std::hint::black_box(r);
        }
        points.push((size.nodes() + size.edges(), best));
    }
    let (n0, t0) = points[0];
    let per0 = t0.as_secs_f64() / n0 as f64;
    let mut report = Vec::new();
    let mut ok = true;
    for &(n, t) in &points {
        let ratio = (t.as_secs_f64() / n as f64) / per0;
        ok &= ratio <= 3.0;
        report.push(format!("V+E={n}: {t:.2?} ({ratio:.2}x linear)"));
    }
    let report = report.join(", ");
    if ok {
        Ok(report)
    } else {
        Err(format!("super-linear embed time: {report}"))
    }
}

fn membership() -> Outcome {
    let sig = standard_signature();
    let mut instances = 0;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut seed = 0;
    while instances < 50 && seed < CORPUS {
        let cfg = GenConfig::corpus(seed);
        seed += 1;
        let (mut store, root) = gen_vsa(&cfg).map_err(|e| e.to_string())?;
        let terms = store
            .enumerate(root, cfg.max_terms)
            .map_err(|e| e.to_string())?;
        let set: BTreeSet<&Term> = terms.iter().collect();
        let mut rng = SplitMix64::new(seed ^ 0x5eed);
        // An instance qualifies when 100 out-of-set swaps can be found.
        let mut mutants = Vec::new();
        for _ in 0..10_000 {
            if mutants.len() == 100 || terms.is_empty() {
                break;
            }
            let t = &terms[rng.below(terms.len())];
            if let Some(m) = swap_symbol(&mut rng, &sig, t) {
                if !set.contains(&m) {
                    mutants.push(m);
                }
            }
        }
        if mutants.len() < 100 {
            continue;
        }
        instances += 1;
        let a = embed(&store.normalize(root).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .automaton;
        for t in &terms {
            let run = a.run_membership(t);
            ensure(run.accepted, || format!("seed {}: {t} rejected", seed - 1))?;
            accepted += 1;
        }
        for m in &mutants {
            let run = a.run_membership(m);
            ensure(!run.accepted, || {
                format!("seed {}: mutant {m} accepted", seed - 1)
            })?;
            rejected += 1;
        }
    }
    ensure(instances == 50, || {
        format!("only {instances} instances admit 100 mutants")
    })?;
    Ok(format!(
        "{instances} instances: {accepted} members accepted, {rejected} mutants rejected"
    ))
}

fn intersection() -> Outcome {
    let start = Instant::now();
    let cfg = |seed| GenConfig {
        max_terms: 2_000,
        ..GenConfig::corpus(seed)
    };
    let mut nonempty = 0;
    let results = Exec::default().map_range(100, |i| -> Result<usize, String> {
        let load = |seed: u64| -> Result<(VsaStore, vsa_automata::NodeLabel), String> {
            gen_vsa(&cfg(seed)).map_err(|e| e.to_string())
        };
        let (mut sa, ra) = load(2 * i as u64)?;
        let (mut sb, rb) = load(2 * i as u64 + 1)?;
        let la: BTreeSet<Term> = sa
            .enumerate(ra, 2_000)
            .map_err(|e| e.to_string())?
            .into_iter()
            .collect();
        let lb: BTreeSet<Term> = sb
            .enumerate(rb, 2_000)
            .map_err(|e| e.to_string())?
            .into_iter()
            .collect();
        let brute: Vec<Term> = la.intersection(&lb).cloned().collect();
        let ta = embed(&sa.normalize(ra).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let tb = embed(&sb.normalize(rb).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let product = ta
            .automaton
            .intersect(&tb.automaton)
            .map_err(|e| e.to_string())?;
        let got = product.enumerate(2_000).map_err(|e| e.to_string())?;
        if got != brute {
            return Err(format!(
                "pair {i}: product {} terms, brute force {}",
                got.len(),
                brute.len()
            ));
        }
        Ok(got.len())
    });
    let mut total = 0;
    for r in results {
        let n = r?;
        total += n;
        if n > 0 {
            nonempty += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "100/100 pairs match brute force ({nonempty} non-empty, {total} common terms), {elapsed:.2?}"
    ))
}

fn counting() -> Outcome {
    let disjoint = Exec::default().map_range(CORPUS as usize, |seed| -> Result<(), String> {
        let cfg = GenConfig {
            disjoint: true,
            ..GenConfig::corpus(seed as u64)
        };
        let (mut store, root) = gen_vsa(&cfg).map_err(|e| e.to_string())?;
        let terms = store
            .enumerate(root, cfg.max_terms)
            .map_err(|e| e.to_string())?;
        let a = embed(&store.normalize(root).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .automaton;
        let count = a.count_paths().map_err(|e| e.to_string())?.total;
        if count != terms.len().into() {
            return Err(format!(
                "disjoint seed {seed}: count {count} vs {} terms",
                terms.len()
            ));
        }
        Ok(())
    });
    for r in disjoint {
        r?;
    }
    let mut strictly_more = 0;
    for seed in 0..50u64 {
        let cfg = GenConfig::corpus(seed);
        let (mut store, root) = gen_ambiguous_vsa(&cfg).map_err(|e| e.to_string())?;
        let terms = store
            .enumerate(root, usize::MAX)
            .map_err(|e| e.to_string())?;
        let a = embed(&store.normalize(root).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .automaton;
        let count = a.count_paths().map_err(|e| e.to_string())?.total;
        ensure(count >= terms.len().into(), || {
            format!(
                "ambiguous seed {seed}: count {count} < {} terms",
                terms.len()
            )
        })?;
        if count > terms.len().into() {
            strictly_more += 1;
        }
    }
    Ok(format!(
        "{CORPUS}/{CORPUS} disjoint counts exact; 50/50 ambiguous counts >= |L| ({strictly_more} strictly)"
    ))
}

fn round_trips() -> Outcome {
    for seed in 0..200u64 {
        let (store, root) = gen_vsa(&GenConfig::corpus(seed)).map_err(|e| e.to_string())?;
        let saved = io::save_vsa(&store, root);
        let (reloaded, r2) = io::load_vsa(&saved).map_err(|e| format!("seed {seed}: {e}"))?;
        let again = io::save_vsa(&reloaded, r2);
        ensure(saved == again, || {
            format!("vsa seed {seed}: {saved:?} != {again:?}")
        })?;
        let before = store
            .enumerate(root, usize::MAX)
            .map_err(|e| e.to_string())?;
        let after = reloaded
            .enumerate(r2, usize::MAX)
            .map_err(|e| e.to_string())?;
        ensure(before == after, || {
            format!("vsa seed {seed}: denotation changed")
        })?;
    }
    let sig = standard_signature();
    for seed in 0..200u64 {
        let states = 1 + (seed as usize % 8);
        let a = gen_automaton(seed, &sig, states, 3 * states, seed % 2 == 0);
        let saved = io::save_ta(&a);
        let b = io::load_ta(&saved).map_err(|e| format!("seed {seed}: {e}"))?;
        let again = io::save_ta(&b);
        ensure(saved == again, || {
            format!("ta seed {seed}: {saved:?} != {again:?}")
        })?;
        let ea: BTreeSet<_> = a.expanded().map(|t| ta_key(&a, &t)).collect();
        let eb: BTreeSet<_> = b.expanded().map(|t| ta_key(&b, &t)).collect();
        ensure(ea == eb, || format!("ta seed {seed}: transitions differ"))?;
        let fa: BTreeSet<&str> = a.finals().iter().map(|&s| a.state_name(s)).collect();
        let fb: BTreeSet<&str> = b.finals().iter().map(|&s| b.state_name(s)).collect();
        ensure(fa == fb, || format!("ta seed {seed}: finals differ"))?;
    }
    Ok("200/200 .vsa and 200/200 .ta files round-trip".to_string())
}

fn ta_key(
    a: &vsa_automata::TreeAutomaton,
    t: &vsa_automata::automaton::Transition,
) -> (String, Vec<String>, String) {
    (
        t.head.name().to_string(),
        t.children
            .iter()
            .map(|&c| a.state_name(c).to_string())
            .collect(),
        a.state_name(t.target).to_string(),
    )
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as `--nocapture`; none apply here.
    let [agreement, linearity, acyclicity] = corpus_checks();
    let results = [
        ("fig1 reproduction", fig1_reproduction()),
        ("enumeration agreement", agreement),
        ("embedding linearity", linearity),
        ("acyclicity", acyclicity),
        ("membership", membership()),
        ("intersection", intersection()),
        ("counting", counting()),
        ("round-trips", round_trips()),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        let n = i + 1;
        match r {
            Ok(detail) => println!("PASS [{n}] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{n}] {name}: {detail}");
            }
        }
    }
    println!(
        "{}/{} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
