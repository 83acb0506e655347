//! Text ⇄ [`Program`](crate::ast::Program) conversion.
//!
//! The canonical dialect is what normalization emits: canonical identifiers,
//! explicit sketch entities, literal numbers in millimeters and degrees. The
//! raw dialect additionally accepts opaque identifiers, unit suffixes,
//! arithmetic and implicit sketch parameterizations. The grammar is written
//! down in `docs/grammar.ebnf`.

mod emit;
mod lexer;
mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emit::{emit, emit_query, emit_with_precision, format_decimal};
pub use lexer::{escape, tokenize, unescape, Token, TokenKind, KEYWORDS};
pub use parse::{parse, parse_named};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dialect {
    Canonical,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { message: message.into(), line, column, expected: Vec::new() }
    }

    pub fn expecting(mut self, expected: &[&str]) -> Self {
        self.expected = expected.iter().map(|s| s.to_string()).collect();
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

/// JSON export of the AST.
pub fn to_json(program: &crate::ast::Program) -> String {
    serde_json::to_string_pretty(program).expect("AST serializes")
}

pub fn from_json(text: &str) -> Result<crate::ast::Program, serde_json::Error> {
    serde_json::from_str(text)
}
