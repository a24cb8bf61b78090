//! Minimal s-expression reader shared by the term and VSA formats.
//!
//! Atoms are runs of `[A-Za-z0-9_]`; everything else except parentheses and
//! whitespace is a syntax error. Every node remembers the byte offset it
//! started at so callers can report precise locations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp<'a> {
    Atom { text: &'a str, offset: usize },
    List { items: Vec<Sexp<'a>>, offset: usize },
}

impl<'a> Sexp<'a> {
    pub fn offset(&self) -> usize {
        match self {
            Sexp::Atom { offset, .. } | Sexp::List { offset, .. } => *offset,
        }
    }

    pub fn as_atom(&self) -> Option<&'a str> {
        match self {
            Sexp::Atom { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

fn is_atom_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

fn is_ws(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r')
}

struct Reader<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn skip_ws(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && is_ws(bytes[self.pos]) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn read(&mut self) -> Result<Sexp<'a>> {
        // Explicit stack: deeply nested inputs must not overflow the call stack.
        let mut stack: Vec<(usize, Vec<Sexp<'a>>)> = Vec::new();
        loop {
            self.skip_ws();
            let start = self.pos;
            let node = match self.peek() {
                None => {
                    return Err(match stack.last() {
                        Some((open, _)) => syntax(*open, "unclosed `(`"),
                        None => syntax(start, "unexpected end of input"),
                    })
                }
                Some(b'(') => {
                    self.pos += 1;
                    stack.push((start, Vec::new()));
                    continue;
                }
                Some(b')') => {
                    let Some((open, items)) = stack.pop() else {
                        return Err(syntax(start, "unexpected `)`"));
                    };
                    self.pos += 1;
                    Sexp::List {
                        items,
                        offset: open,
                    }
                }
                Some(b) if is_atom_byte(b) => {
                    let bytes = self.src.as_bytes();
                    while self.pos < bytes.len() && is_atom_byte(bytes[self.pos]) {
                        self.pos += 1;
                    }
                    Sexp::Atom {
                        text: &self.src[start..self.pos],
                        offset: start,
                    }
                }
                Some(_) => {
                    let ch = self.src[start..].chars().next().unwrap_or('?');
                    return Err(syntax(start, format!("unexpected character {ch:?}")));
                }
            };
            match stack.last_mut() {
                Some((_, items)) => items.push(node),
                None => return Ok(node),
            }
        }
    }
}

/// Reads exactly one s-expression from `src`; trailing non-whitespace is an error.
pub fn parse_one(src: &str) -> Result<Sexp<'_>> {
    let mut reader = Reader { src, pos: 0 };
    let node = reader.read()?;
    reader.skip_ws();
    if reader.pos != src.len() {
        return Err(syntax(reader.pos, "trailing input after expression"));
    }
    Ok(node)
}
