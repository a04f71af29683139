//! Minimal s-expression reader shared by the KB, transcript and world-model formats.
//!
//! Atoms are maximal runs of characters other than whitespace, parentheses and `;`.
//! A `;` starts a comment that runs to the end of the line.

use std::fmt;

use thiserror::Error;

use crate::symbol::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(Symbol, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&Symbol> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    /// The head atom of a list form, e.g. `schema` in `(schema ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(|s| s.as_atom())
            .map(|s| s.as_str())
    }

    pub fn expect_atom(&self, what: &str) -> Result<&Symbol, SyntaxError> {
        self.as_atom()
            .ok_or_else(|| SyntaxError::new(self.pos(), format!("expected {what}, found a list")))
    }

    pub fn expect_list(&self, what: &str) -> Result<&[Sexp], SyntaxError> {
        self.as_list()
            .ok_or_else(|| SyntaxError::new(self.pos(), format!("expected {what}, found an atom")))
    }

    /// Expects `(HEAD rest...)` and returns `rest`.
    pub fn expect_form(&self, head: &str) -> Result<&[Sexp], SyntaxError> {
        let items = self.expect_list(&format!("({head} ...)"))?;
        match items.first().and_then(|s| s.as_atom()) {
            Some(h) if h.as_str() == head => Ok(&items[1..]),
            _ => Err(SyntaxError::new(
                self.pos(),
                format!("expected ({head} ...)"),
            )),
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Reader<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<Sexp>, SyntaxError> {
        self.skip_trivia();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => Ok(None),
            Some(')') => Err(SyntaxError::new(start, "unexpected ')'")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(SyntaxError::new(start, "unclosed '('")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List(items, start)));
                        }
                        Some(_) => {
                            // read() cannot return None here: a character is pending
                            if let Some(item) = self.read()? {
                                items.push(item);
                            }
                        }
                    }
                }
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Some(Sexp::Atom(Symbol::from(text), start)))
            }
        }
    }
}

/// Reads every top-level form in `src`.
pub fn parse_all(src: &str) -> Result<Vec<Sexp>, SyntaxError> {
    let mut reader = Reader {
        chars: src.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    let mut out = Vec::new();
    while let Some(form) = reader.read()? {
        out.push(form);
    }
    Ok(out)
}

/// Parses a non-negative integer atom.
pub fn parse_count(s: &Sexp, what: &str) -> Result<usize, SyntaxError> {
    let atom = s.expect_atom(what)?;
    atom.as_str()
        .parse::<usize>()
        .map_err(|_| SyntaxError::new(s.pos(), format!("expected {what}, found `{atom}`")))
}
