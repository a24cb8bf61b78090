//! The `vsata` command line.
//!
//! Exit codes: 0 success, 1 `member` rejected or `check` mismatch, 2 usage or
//! I/O error, 3 parse error, 4 enumeration overflow or refused (cyclic).
//! Data goes to stdout, diagnostics to stderr. Each invocation runs on a
//! single thread, whatever features the library was built with.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::automaton::TreeAutomaton;
use crate::embed::{check_linearity, embed};
use crate::error::Error;
use crate::io;
use crate::par::Exec;
use crate::term::{parse_term_inferring, Term};
use crate::testgen::{gen_ambiguous_vsa, gen_vsa, standard_signature, GenConfig};
use crate::verify::check_equivalence;
use crate::vsa::{NodeLabel, VsaStore};

pub const DEFAULT_LIMIT: usize = 10_000;

#[derive(Parser, Debug)]
#[command(
    name = "vsata",
    version,
    about = "Version space algebras and tree automata"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rewrite a VSA into alternating union/join layers.
    Normalize {
        input: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Normalize a VSA and embed it into a tree automaton.
    Embed {
        input: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
        /// Print size reports and the linearity equalities.
        #[arg(long)]
        stats: bool,
    },
    /// List every term of a VSA or automaton, sorted, one per line.
    Enumerate {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Count accepting derivations.
    Count { input: PathBuf },
    /// Run the automaton on a term.
    Member { input: PathBuf, term: String },
    /// Product of two automata (VSAs are embedded first).
    Intersect {
        a: PathBuf,
        b: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Export to Graphviz DOT.
    Dot {
        input: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
        /// Render a VSA after normalization.
        #[arg(long)]
        normalized: bool,
    },
    /// Generate a seeded random VSA.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = 0.3)]
        share: f64,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        max_terms: usize,
        /// Every term has a single derivation.
        #[arg(long, conflicts_with = "ambiguous")]
        disjoint: bool,
        /// Some term has two derivations.
        #[arg(long)]
        ambiguous: bool,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Compare the VSA's enumeration with that of its embedded automaton.
    Check {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    /// Non-zero exit without a diagnostic.
    Exit(i32),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Overflow { .. } | Error::CyclicAutomaton { .. } => 4,
        Error::InvalidConfig(_) => 2,
        _ => 3,
    }
}

enum Input {
    Vsa(VsaStore, NodeLabel),
    Ta(TreeAutomaton),
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// `(` starts a VSA; anything else is read as an automaton.
fn load(path: &Path) -> Result<Input, Failure> {
    let text = read(path)?;
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty());
    if first.is_some_and(|l| l.starts_with('(')) {
        let (store, root) = io::load_vsa(&text)?;
        Ok(Input::Vsa(store, root))
    } else {
        Ok(Input::Ta(io::load_ta(&text)?))
    }
}

fn load_vsa(path: &Path) -> Result<(VsaStore, NodeLabel), Failure> {
    match load(path)? {
        Input::Vsa(s, r) => Ok((s, r)),
        Input::Ta(_) => Err(Failure::Usage(format!(
            "{} is an automaton, expected a VSA",
            path.display()
        ))),
    }
}

fn load_automaton(path: &Path) -> Result<TreeAutomaton, Failure> {
    match load(path)? {
        Input::Ta(a) => Ok(a),
        Input::Vsa(mut store, root) => {
            let n = store.normalize(root)?;
            Ok(embed(&n)?.automaton)
        }
    }
}

fn emit(target: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match target {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(e.to_string())),
    }
}

fn write_terms(terms: &[Term], out: &mut dyn Write) -> Result<(), Failure> {
    let mut text = String::new();
    for t in terms {
        text.push_str(&t.to_string());
        text.push('\n');
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Usage(e.to_string()))
}

/// Runs one invocation; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(Failure::Exit(code)) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Normalize { input, o } => {
            let (mut store, root) = load_vsa(&input)?;
            let n = store.normalize(root)?;
            emit(&o, &io::save_normalized(&n), out)
        }
        Command::Embed { input, o, stats } => {
            let (mut store, root) = load_vsa(&input)?;
            let n = store.normalize(root)?;
            let result = embed(&n)?;
            emit(&o, &io::save_ta(&result.automaton), out)?;
            if stats {
                let v = result.vsa_size;
                let t = result.ta_size;
                let mut report = format!(
                    "vsa unions={} joins={} union_join_edges={} join_union_edges={}\n\
                     automaton states={} factored_transitions={} expanded_transitions={} arity_sum={}\n",
                    v.unions,
                    v.joins,
                    v.union_join_edges,
                    v.join_union_edges,
                    t.states,
                    t.factored_transitions,
                    t.expanded_transitions,
                    t.arity_sum
                );
                for c in check_linearity(&n, &result).checks {
                    let verdict = if c.holds() { "ok" } else { "FAIL" };
                    report.push_str(&format!(
                        "{verdict} {}: {} == {}\n",
                        c.name, c.automaton_side, c.vsa_side
                    ));
                }
                // With the automaton on stdout the report would corrupt it.
                let sink: &mut dyn Write = if o.is_some() { out } else { err };
                sink.write_all(report.as_bytes())
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            }
            Ok(())
        }
        Command::Enumerate { input, limit } => {
            let terms = match load(&input)? {
                Input::Vsa(store, root) => store.enumerate_with(root, limit, Exec::Sequential)?,
                Input::Ta(a) => a.enumerate_with(limit, Exec::Sequential)?,
            };
            write_terms(&terms, out)
        }
        Command::Count { input } => {
            let a = load_automaton(&input)?;
            let count = a.count_paths()?;
            let flag = if a.is_unambiguous() {
                "exact"
            } else {
                "upper-bound"
            };
            writeln!(out, "{} {flag}", count.total).map_err(|e| Failure::Usage(e.to_string()))
        }
        Command::Member { input, term } => {
            let a = load_automaton(&input)?;
            // Symbols outside the automaton's signature just mean rejection.
            let mut sig = a.signature().clone();
            let t = parse_term_inferring(&term, &mut sig)?;
            let accepted = a.accepts(&t);
            writeln!(out, "{}", if accepted { "accept" } else { "reject" })
                .map_err(|e| Failure::Usage(e.to_string()))?;
            if accepted {
                Ok(())
            } else {
                Err(Failure::Exit(1))
            }
        }
        Command::Intersect { a, b, o } => {
            let a = load_automaton(&a)?;
            let b = load_automaton(&b)?;
            emit(&o, &io::save_ta(&a.intersect(&b)?), out)
        }
        Command::Dot {
            input,
            o,
            normalized,
        } => {
            let text = match load(&input)? {
                Input::Vsa(mut store, root) if normalized => {
                    io::normalized_to_dot(&store.normalize(root)?)
                }
                Input::Vsa(store, root) => io::vsa_to_dot(&store, root),
                Input::Ta(a) => io::ta_to_dot(&a),
            };
            emit(&o, &text, out)
        }
        Command::Gen {
            seed,
            depth,
            width,
            share,
            max_terms,
            disjoint,
            ambiguous,
            o,
        } => {
            let cfg = GenConfig {
                seed,
                max_depth: depth,
                signature: standard_signature(),
                max_union_width: width,
                share_probability: share,
                max_terms,
                disjoint,
            };
            let (store, root) = if ambiguous {
                gen_ambiguous_vsa(&cfg)?
            } else {
                gen_vsa(&cfg)?
            };
            emit(&o, &io::save_vsa(&store, root), out)
        }
        Command::Check { input, limit } => {
            let (mut store, root) = load_vsa(&input)?;
            let check = check_equivalence(&mut store, root, limit, true, Exec::Sequential)?;
            let w = |e: std::io::Error| Failure::Usage(e.to_string());
            if check.passed() {
                writeln!(out, "equal {}", check.vsa_terms.len()).map_err(w)?;
                Ok(())
            } else {
                writeln!(
                    out,
                    "mismatch vsa={} automaton={} oracle_agrees={:?} linear={} acyclic={}",
                    check.vsa_terms.len(),
                    check.automaton_terms.len(),
                    check.oracle_agrees,
                    check.linearity.all_hold(),
                    check.acyclic
                )
                .map_err(w)?;
                Err(Failure::Exit(1))
            }
        }
    }
}
