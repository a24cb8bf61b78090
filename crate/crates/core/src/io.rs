//! Text formats: `.vsa` s-expressions, `.ta` line files and DOT export.
//!
//! VSA files hold one top-level node:
//!
//! ```text
//! vsa := (U label node*) | (J label symbol node*) | (S term*) | (ref label)
//! ```
//!
//! The first occurrence of a label defines the node and `ref` reuses it.
//! Automaton files list `final <state>` lines, then expanded transitions
//! `f(q1,q2) -> q`; blank lines and `#` comments are ignored.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::automaton::TreeAutomaton;
use crate::error::{Error, Result};
use crate::sexp::{self, Sexp};
use crate::term::{is_identifier, term_from_sexp, Signature, Symbol, SymbolSource};
use crate::vsa::{NodeLabel, NormalizedVsa, VsaNode, VsaStore};

/// Parses a VSA file into a fresh store. Symbols and their arities are inferred from use.
pub fn load_vsa(text: &str) -> Result<(VsaStore, NodeLabel)> {
    let mut store = VsaStore::new();
    let root = load_vsa_into(text, &mut store)?;
    Ok((store, root))
}

/// Parses a VSA file into an existing store.
pub fn load_vsa_into(text: &str, store: &mut VsaStore) -> Result<NodeLabel> {
    let sexp = sexp::parse_one(text)?;
    let mut loader = VsaLoader {
        store,
        labels: HashMap::new(),
    };
    loader.node(&sexp)
}

struct VsaLoader<'s> {
    store: &'s mut VsaStore,
    labels: HashMap<u64, NodeLabel>,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

fn parse_label(s: &Sexp<'_>) -> Result<u64> {
    s.as_atom()
        .filter(|a| a.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|a| a.parse::<u64>().ok())
        .filter(|&l| l > 0)
        .ok_or_else(|| syntax(s.offset(), "expected a positive integer label"))
}

impl VsaLoader<'_> {
    fn node(&mut self, s: &Sexp<'_>) -> Result<NodeLabel> {
        let Sexp::List { items, offset } = s else {
            return Err(syntax(
                s.offset(),
                "expected `(U ...)`, `(J ...)`, `(S ...)` or `(ref ...)`",
            ));
        };
        let offset = *offset;
        let Some(kind) = items.first().and_then(Sexp::as_atom) else {
            return Err(syntax(offset, "expected a node keyword"));
        };
        match kind {
            "ref" => {
                if items.len() != 2 {
                    return Err(syntax(offset, "`ref` takes exactly one label"));
                }
                let label = parse_label(&items[1])?;
                self.labels
                    .get(&label)
                    .copied()
                    .ok_or(Error::DanglingRef { label, offset })
            }
            "S" => {
                let mut sig = self.store.signature().clone();
                let terms = items[1..]
                    .iter()
                    .map(|t| term_from_sexp(t, &mut SymbolSource::Inferring(&mut sig)))
                    .collect::<Result<Vec<_>>>()?;
                self.store.mk_set(terms)
            }
            "U" | "J" => {
                let Some(label_sexp) = items.get(1) else {
                    return Err(syntax(offset, "missing label"));
                };
                let label = parse_label(label_sexp)?;
                if self.labels.contains_key(&label) {
                    return Err(Error::DuplicateLabel { label, offset });
                }
                let node = if kind == "U" {
                    let children = items[2..]
                        .iter()
                        .map(|c| self.node(c))
                        .collect::<Result<Vec<_>>>()?;
                    self.store.mk_union(children)
                } else {
                    let Some(head_sexp) = items.get(2) else {
                        return Err(syntax(offset, "join is missing its symbol"));
                    };
                    let name = head_sexp
                        .as_atom()
                        .filter(|a| is_identifier(a))
                        .ok_or_else(|| syntax(head_sexp.offset(), "expected a symbol"))?;
                    let children = items[3..]
                        .iter()
                        .map(|c| self.node(c))
                        .collect::<Result<Vec<_>>>()?;
                    let head = match self.store.signature().get(name) {
                        Some(sym) if sym.arity() != children.len() => {
                            return Err(Error::ArityMismatch {
                                name: name.to_string(),
                                expected: sym.arity(),
                                found: children.len(),
                                offset: Some(head_sexp.offset()),
                            })
                        }
                        Some(sym) => sym.clone(),
                        None => Symbol::try_new(name, children.len())?,
                    };
                    self.store.mk_join(head, children)?
                };
                // A label inside its own definition is still undefined, so
                // `ref` cannot build a cycle.
                if self.labels.contains_key(&label) {
                    return Err(Error::DuplicateLabel { label, offset });
                }
                self.labels.insert(label, node);
                Ok(node)
            }
            other => Err(syntax(
                items[0].offset(),
                format!("unknown node keyword `{other}`"),
            )),
        }
    }
}

/// Canonical single-line text. Labels are renumbered 1.. in preorder; each
/// shared node is written once and referenced with `ref` afterwards.
pub fn save_vsa(store: &VsaStore, root: NodeLabel) -> String {
    let mut out = String::new();
    let mut labels: HashMap<NodeLabel, u64> = HashMap::new();
    enum Step {
        Open(NodeLabel),
        Text(&'static str),
    }
    let mut stack = vec![Step::Open(root)];
    while let Some(step) = stack.pop() {
        let l = match step {
            Step::Text(t) => {
                out.push_str(t);
                continue;
            }
            Step::Open(l) => l,
        };
        if !out.is_empty() && !out.ends_with('(') {
            out.push(' ');
        }
        let node = store.node(l);
        if let VsaNode::Set(terms) = node {
            out.push_str("(S");
            for t in terms {
                let _ = write!(out, " {t}");
            }
            out.push(')');
            continue;
        }
        if let Some(n) = labels.get(&l) {
            let _ = write!(out, "(ref {n})");
            continue;
        }
        let n = labels.len() as u64 + 1;
        labels.insert(l, n);
        match node {
            VsaNode::Union(_) => {
                let _ = write!(out, "(U {n}");
            }
            VsaNode::Join { head, .. } => {
                let _ = write!(out, "(J {n} {head}");
            }
            VsaNode::Set(_) => unreachable!(),
        }
        stack.push(Step::Text(")"));
        for &c in node.children().iter().rev() {
            stack.push(Step::Open(c));
        }
    }
    out.push('\n');
    out
}

pub fn save_normalized(vsa: &NormalizedVsa) -> String {
    let mut store = VsaStore::new();
    let root = vsa
        .to_store(&mut store)
        .expect("normalized VSA is well formed");
    save_vsa(&store, root)
}

/// Parses an automaton file, inferring the signature.
pub fn load_ta(text: &str) -> Result<TreeAutomaton> {
    load_ta_impl(text, None)
}

/// Parses an automaton file over a fixed signature.
pub fn load_ta_with(text: &str, sig: &Signature) -> Result<TreeAutomaton> {
    load_ta_impl(text, Some(sig))
}

struct RawTransition<'a> {
    line: usize,
    head: &'a str,
    children: Vec<&'a str>,
    target: &'a str,
}

fn load_ta_impl(text: &str, fixed: Option<&Signature>) -> Result<TreeAutomaton> {
    let mut finals: Vec<&str> = Vec::new();
    let mut raw: Vec<RawTransition<'_>> = Vec::new();
    let mut sig = fixed.cloned().unwrap_or_default();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: &str| Error::MalformedLine {
            line: lineno,
            message: m.to_string(),
        };
        if let Some(rest) = line.strip_prefix("final") {
            if rest.starts_with(|c: char| c.is_whitespace()) {
                if !raw.is_empty() {
                    return Err(bad("`final` lines must precede transitions"));
                }
                let name = rest.trim();
                if !is_identifier(name) {
                    return Err(bad("expected `final <state>`"));
                }
                finals.push(name);
                continue;
            }
        }
        let (lhs, target) = line
            .split_once("->")
            .ok_or_else(|| bad("expected `symbol(states) -> state`"))?;
        let target = target.trim();
        if !is_identifier(target) {
            return Err(bad("invalid target state"));
        }
        let lhs = lhs.trim();
        let (head, args) = lhs
            .split_once('(')
            .ok_or_else(|| bad("expected `(` after the symbol"))?;
        let head = head.trim();
        if !is_identifier(head) {
            return Err(bad("invalid symbol"));
        }
        let args = args
            .strip_suffix(')')
            .ok_or_else(|| bad("expected `)` before `->`"))?;
        let children: Vec<&str> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',').map(str::trim).collect()
        };
        if children.iter().any(|c| !is_identifier(c)) {
            return Err(bad("invalid child state"));
        }
        match fixed {
            Some(s) => {
                let sym = s.get(head).ok_or_else(|| Error::UnknownSymbol {
                    name: head.to_string(),
                    offset: 0,
                })?;
                if sym.arity() != children.len() {
                    return Err(bad(&format!(
                        "`{head}` expects {} argument(s), found {}",
                        sym.arity(),
                        children.len()
                    )));
                }
            }
            None => {
                sig.intern(head, children.len())
                    .map_err(|e| bad(&e.to_string()))?;
            }
        }
        raw.push(RawTransition {
            line: lineno,
            head,
            children,
            target,
        });
    }

    let mut a = TreeAutomaton::new(sig.clone());
    for name in finals {
        let s = a.add_state(name);
        a.add_final(s);
    }
    for t in raw {
        let children = t.children.iter().map(|c| a.add_state(c)).collect();
        let target = a.add_state(t.target);
        let head = sig.get(t.head).expect("interned above").clone();
        a.add_transition(head, children, target)
            .map_err(|e| Error::MalformedLine {
                line: t.line,
                message: e.to_string(),
            })?;
    }
    Ok(a)
}

/// Expanded transitions sorted by head name, then child names, then target name.
pub fn save_ta(a: &TreeAutomaton) -> String {
    let mut out = String::new();
    let finals: BTreeSet<&str> = a.finals().iter().map(|&s| a.state_name(s)).collect();
    for f in finals {
        let _ = writeln!(out, "final {f}");
    }
    let mut lines: Vec<(&str, Vec<&str>, &str)> = a
        .factored()
        .iter()
        .flat_map(|t| {
            let children: Vec<&str> = t.children.iter().map(|&c| a.state_name(c)).collect();
            t.targets
                .iter()
                .map(move |&target| (t.head.name(), children.clone(), a.state_name(target)))
        })
        .collect();
    lines.sort();
    for (head, children, target) in lines {
        let _ = writeln!(out, "{head}({}) -> {target}", children.join(","));
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Orthodox VSA: unions as ellipses labelled `U`, joins as boxes labelled
/// with their symbol, set nodes as notes listing their terms.
pub fn vsa_to_dot(store: &VsaStore, root: NodeLabel) -> String {
    let mut out = String::from("digraph vsa {\n  rankdir=BT;\n");
    for l in store.reachable(root) {
        let (shape, label) = match store.node(l) {
            VsaNode::Union(_) => ("ellipse", "U".to_string()),
            VsaNode::Join { head, .. } => ("box", head.name().to_string()),
            VsaNode::Set(ts) => (
                "note",
                format!(
                    "{{{}}}",
                    ts.iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            ),
        };
        let _ = writeln!(
            out,
            "  n{} [shape={shape}, label=\"{}\"];",
            l.0,
            dot_escape(&label)
        );
    }
    for l in store.reachable(root) {
        let node = store.node(l);
        let ported = matches!(node, VsaNode::Join { .. });
        for (i, c) in node.children().iter().enumerate() {
            if ported {
                let _ = writeln!(out, "  n{} -> n{} [label=\"{i}\"];", c.0, l.0);
            } else {
                let _ = writeln!(out, "  n{} -> n{};", c.0, l.0);
            }
        }
    }
    out.push_str("}\n");
    out
}

pub fn normalized_to_dot(vsa: &NormalizedVsa) -> String {
    let mut store = VsaStore::new();
    let root = vsa
        .to_store(&mut store)
        .expect("normalized VSA is well formed");
    vsa_to_dot(&store, root)
}

/// States as ellipses (finals with a double border), factored transitions as
/// rectangles with numbered inbound edges and one outbound edge per target.
pub fn ta_to_dot(a: &TreeAutomaton) -> String {
    let mut out = String::from("digraph automaton {\n  rankdir=BT;\n");
    for s in a.states() {
        let peripheries = if a.is_final(s) { 2 } else { 1 };
        let _ = writeln!(
            out,
            "  s{} [shape=ellipse, peripheries={peripheries}, label=\"{}\"];",
            s.0,
            dot_escape(a.state_name(s))
        );
    }
    for t in a.factored() {
        let _ = writeln!(
            out,
            "  t{} [shape=rectangle, label=\"{}\"];",
            t.id,
            dot_escape(t.head.name())
        );
        for (i, c) in t.children.iter().enumerate() {
            let _ = writeln!(out, "  s{} -> t{} [label=\"{i}\"];", c.0, t.id);
        }
        for target in &t.targets {
            let _ = writeln!(out, "  t{} -> s{};", t.id, target.0);
        }
    }
    out.push_str("}\n");
    out
}
