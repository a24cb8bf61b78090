//! Signatures, symbols and ground terms.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sexp::{self, Sexp};

/// A function symbol with a fixed arity. Arity 0 symbols are constants.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Arc<str>,
    arity: usize,
}

impl Symbol {
    /// Panics if `name` is not an identifier; use [`Symbol::try_new`] for input from users.
    pub fn new(name: &str, arity: usize) -> Self {
        Self::try_new(name, arity).expect("invalid symbol name")
    }

    pub fn try_new(name: &str, arity: usize) -> Result<Self> {
        if !is_identifier(name) {
            return Err(Error::Syntax {
                offset: 0,
                message: format!("`{name}` is not a valid symbol name"),
            });
        }
        Ok(Symbol {
            name: Arc::from(name),
            arity,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_constant(&self) -> bool {
        self.arity == 0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut bytes = s.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() || b == b'_' => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// A finite set of symbols, at most one arity per name.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: BTreeMap<Arc<str>, Symbol>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a signature from `(name, arity)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self> {
        let mut sig = Signature::new();
        for (name, arity) in pairs {
            sig.add(&Symbol::try_new(name, arity)?)?;
        }
        Ok(sig)
    }

    /// Adds `sym`, or checks it against the existing entry of the same name.
    pub fn add(&mut self, sym: &Symbol) -> Result<()> {
        match self.symbols.get(sym.name()) {
            Some(existing) if existing.arity != sym.arity => Err(Error::ConflictingArity {
                name: sym.name().to_string(),
                first: existing.arity,
                second: sym.arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.symbols.insert(sym.name.clone(), sym.clone());
                Ok(())
            }
        }
    }

    /// Looks up `name`, inserting it with `arity` if absent.
    pub fn intern(&mut self, name: &str, arity: usize) -> Result<Symbol> {
        if let Some(existing) = self.symbols.get(name) {
            if existing.arity != arity {
                return Err(Error::ConflictingArity {
                    name: name.to_string(),
                    first: existing.arity,
                    second: arity,
                });
            }
            return Ok(existing.clone());
        }
        let sym = Symbol::try_new(name, arity)?;
        self.symbols.insert(sym.name.clone(), sym.clone());
        Ok(sym)
    }

    pub fn get(&self, name: &str) -> Option<&Symbol> {
        self.symbols.get(name)
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        self.symbols.get(sym.name()) == Some(sym)
    }

    /// Symbols in name order.
    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.values()
    }

    pub fn constants(&self) -> impl Iterator<Item = &Symbol> {
        self.iter().filter(|s| s.is_constant())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Union of two signatures; fails if a name has different arities.
    pub fn merge(&self, other: &Signature) -> Result<Signature> {
        let mut out = self.clone();
        for sym in other.iter() {
            out.add(sym)?;
        }
        Ok(out)
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

struct TermNode {
    head: Symbol,
    children: Box<[Term]>,
}

/// A ground term. Cloning is cheap; subterms are shared.
#[derive(Clone)]
pub struct Term(Arc<TermNode>);

impl Term {
    pub fn new(head: Symbol, children: Vec<Term>) -> Result<Term> {
        if children.len() != head.arity {
            return Err(Error::ArityMismatch {
                name: head.name().to_string(),
                expected: head.arity,
                found: children.len(),
                offset: None,
            });
        }
        Ok(Term(Arc::new(TermNode {
            head,
            children: children.into_boxed_slice(),
        })))
    }

    /// Panics if `head` is not a constant.
    pub fn constant(head: Symbol) -> Term {
        Term::new(head, Vec::new()).expect("constant symbol expected")
    }

    pub fn head(&self) -> &Symbol {
        &self.0.head
    }

    pub fn children(&self) -> &[Term] {
        &self.0.children
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Term::size).sum::<usize>()
    }

    /// Height; constants have depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Term::depth).max().unwrap_or(0)
    }

    /// Visits every subterm in post-order (children before parents).
    pub fn post_order(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![(self, false)];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                out.push(t);
            } else {
                stack.push((t, true));
                for c in t.children().iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Adds every symbol of the term to `sig`.
    pub fn collect_symbols(&self, sig: &mut Signature) -> Result<()> {
        sig.add(self.head())?;
        for c in self.children() {
            c.collect_symbols(sig)?;
        }
        Ok(())
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.head == other.0.head && self.0.children == other.0.children)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.head.hash(state);
        self.0.children.hash(state);
    }
}

impl Ord for Term {
    /// Head name, then arity, then children left to right.
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.head()
            .name()
            .cmp(other.head().name())
            .then(self.head().arity.cmp(&other.head().arity))
            .then_with(|| self.children().cmp(other.children()))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical s-expression: constants bare, applications as `(head child...)`.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children().is_empty() {
            return f.write_str(self.head().name());
        }
        write!(f, "({}", self.head().name())?;
        for c in self.children() {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn print_term(t: &Term) -> String {
    t.to_string()
}

/// Total order on terms used for every sorted output.
pub fn term_ord(a: &Term, b: &Term) -> Ordering {
    a.cmp(b)
}

/// Parses a term over a fixed signature.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term> {
    let sexp = sexp::parse_one(text)?;
    term_from_sexp(&sexp, &mut SymbolSource::Fixed(sig))
}

/// Parses a term, growing `sig` with any new symbol (arity taken from usage).
pub fn parse_term_inferring(text: &str, sig: &mut Signature) -> Result<Term> {
    let sexp = sexp::parse_one(text)?;
    term_from_sexp(&sexp, &mut SymbolSource::Inferring(sig))
}

pub(crate) enum SymbolSource<'s> {
    Fixed(&'s Signature),
    Inferring(&'s mut Signature),
}

impl SymbolSource<'_> {
    pub(crate) fn resolve(&mut self, name: &str, arity: usize, offset: usize) -> Result<Symbol> {
        match self {
            SymbolSource::Fixed(sig) => {
                let sym = sig.get(name).ok_or_else(|| Error::UnknownSymbol {
                    name: name.to_string(),
                    offset,
                })?;
                if sym.arity != arity {
                    return Err(Error::ArityMismatch {
                        name: name.to_string(),
                        expected: sym.arity,
                        found: arity,
                        offset: Some(offset),
                    });
                }
                Ok(sym.clone())
            }
            SymbolSource::Inferring(sig) => sig.intern(name, arity).map_err(|e| match e {
                Error::ConflictingArity { first, .. } => Error::ArityMismatch {
                    name: name.to_string(),
                    expected: first,
                    found: arity,
                    offset: Some(offset),
                },
                other => other,
            }),
        }
    }
}

fn symbol_atom<'a>(s: &Sexp<'a>) -> Result<&'a str> {
    match s.as_atom() {
        Some(a) if is_identifier(a) => Ok(a),
        _ => Err(Error::Syntax {
            offset: s.offset(),
            message: "expected a symbol".to_string(),
        }),
    }
}

pub(crate) fn term_from_sexp(s: &Sexp<'_>, syms: &mut SymbolSource<'_>) -> Result<Term> {
    match s {
        Sexp::Atom { offset, .. } => {
            let name = symbol_atom(s)?;
            let head = syms.resolve(name, 0, *offset)?;
            Term::new(head, Vec::new())
        }
        Sexp::List { items, offset } => {
            let Some((first, rest)) = items.split_first() else {
                return Err(Error::Syntax {
                    offset: *offset,
                    message: "empty application".to_string(),
                });
            };
            let name = symbol_atom(first)?;
            if rest.is_empty() {
                return Err(Error::Syntax {
                    offset: *offset,
                    message: format!("constant `{name}` must be written without parentheses"),
                });
            }
            let head = syms.resolve(name, rest.len(), first.offset())?;
            let children = rest
                .iter()
                .map(|c| term_from_sexp(c, syms))
                .collect::<Result<Vec<_>>>()?;
            Term::new(head, children)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::from_pairs([("f", 2), ("g", 1), ("a", 0), ("b", 0), ("c", 0)]).unwrap()
    }

    #[test]
    fn parses_and_prints_canonically() {
        let s = sig();
        let t = parse_term("(f (g a) (g b))", &s).unwrap();
        assert_eq!(t.head().name(), "f");
        assert_eq!(t.children()[1].children()[0].head().name(), "b");
        assert_eq!(print_term(&t), "(f (g a) (g b))");
        assert_eq!(print_term(&parse_term("a", &s).unwrap()), "a");
        let chain = parse_term("(g\n (g\t(g    a)))", &s).unwrap();
        assert_eq!(chain.depth(), 4);
        assert_eq!(print_term(&chain), "(g (g (g a)))");
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let s = sig();
        assert_eq!(
            parse_term("(f a d)", &s),
            Err(Error::UnknownSymbol {
                name: "d".into(),
                offset: 5
            })
        );
        assert_eq!(
            parse_term("(g a b)", &s),
            Err(Error::ArityMismatch {
                name: "g".into(),
                expected: 1,
                found: 2,
                offset: Some(1)
            })
        );
        assert!(matches!(
            parse_term("f", &s),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            parse_term("(a)", &s),
            Err(Error::Syntax { offset: 0, .. })
        ));
        assert!(matches!(
            parse_term("(1 a)", &s),
            Err(Error::Syntax { offset: 1, .. })
        ));
    }

    #[test]
    fn inferring_parser_grows_signature() {
        let mut s = Signature::new();
        let t = parse_term_inferring("(h x (h y z))", &mut s).unwrap();
        assert_eq!(t.size(), 5);
        assert_eq!(s.len(), 4);
        assert!(matches!(
            parse_term_inferring("(h x)", &mut s),
            Err(Error::ArityMismatch { expected: 2, .. })
        ));
    }

    #[test]
    fn signature_rejects_conflicting_arity() {
        let mut s = sig();
        assert!(s.add(&Symbol::new("f", 1)).is_err());
        assert!(s.add(&Symbol::new("f", 2)).is_ok());
        assert!(Symbol::try_new("9x", 0).is_err());
    }

    #[test]
    fn term_order() {
        let s = sig();
        let p = |t: &str| parse_term(t, &s).unwrap();
        assert_eq!(term_ord(&p("a"), &p("b")), Ordering::Less);
        assert_eq!(term_ord(&p("(g a)"), &p("(g b)")), Ordering::Less);
        assert_eq!(term_ord(&p("a"), &p("(f a a)")), Ordering::Less);
        // name before arity
        let a1 = Term::new(Symbol::new("a", 1), vec![p("a")]).unwrap();
        assert_eq!(term_ord(&p("a"), &a1), Ordering::Less);
    }

    #[test]
    fn sorting_fig1_terms_is_permutation_invariant() {
        let s = sig();
        let xs = ["a", "b", "c"];
        let mut terms = Vec::new();
        for x in xs {
            for y in xs {
                terms.push(parse_term(&format!("(f (g {x}) (g {y}))"), &s).unwrap());
            }
        }
        let mut expected = terms.clone();
        expected.sort();
        let printed: Vec<String> = expected.iter().map(print_term).collect();
        assert_eq!(printed[0], "(f (g a) (g a))");
        assert_eq!(printed[1], "(f (g a) (g b))");
        assert_eq!(printed[3], "(f (g b) (g a))");
        assert_eq!(printed[8], "(f (g c) (g c))");
        for rot in 0..terms.len() {
            let mut perm = terms.clone();
            perm.rotate_left(rot);
            perm.reverse();
            perm.sort();
            assert_eq!(perm, expected);
        }
    }
}
