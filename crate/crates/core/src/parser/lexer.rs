use serde::{Deserialize, Serialize};

use super::{Dialect, ParseError};
use crate::ast::Unit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenKind {
    Identifier,
    Number,
    String,
    UnitSuffix,
    Punct,
    Keyword,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
}

pub const KEYWORDS: &[&str] = &["true", "false", "makeQuery", "original", "adjacent", "PI"];

const PUNCT: &[char] = &['(', ')', '[', ']', ',', '=', ';', '+', '-', '*', '/'];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        self.src[self.pos..].chars().nth(1)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, f: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&f) {
            self.bump();
        }
    }
}

/// Splits source text into tokens. Whitespace and `//` comments are skipped;
/// the byte spans of the returned tokens cover everything else.
pub fn tokenize(text: &str, dialect: Dialect) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { src: text, pos: 0, line: 1, column: 1 };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            cur.eat_while(|c| c != '\n');
            continue;
        }
        let (start, line, column) = (cur.pos, cur.line, cur.column);
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_');
            let word = &text[start..cur.pos];
            if KEYWORDS.contains(&word) {
                TokenKind::Keyword
            } else if Unit::from_token(word).is_some() {
                if dialect == Dialect::Canonical {
                    return Err(ParseError::at(line, column, format!("unit suffix not allowed: `{word}`")));
                }
                TokenKind::UnitSuffix
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            cur.eat_while(|c| c.is_ascii_digit());
            if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
                cur.eat_while(|c| c.is_ascii_digit());
            }
            TokenKind::Number
        } else if c == '"' {
            cur.bump();
            loop {
                match cur.bump() {
                    None => return Err(ParseError::at(line, column, "unterminated string")),
                    Some('"') => break,
                    Some('\\') => match cur.bump() {
                        Some('\\' | '"' | 'n') => {}
                        _ => {
                            return Err(ParseError::at(cur.line, cur.column - 1, "invalid escape in string"))
                        }
                    },
                    Some(_) => {}
                }
            }
            TokenKind::String
        } else if PUNCT.contains(&c) {
            cur.bump();
            TokenKind::Punct
        } else {
            return Err(ParseError::at(line, column, format!("illegal character `{c}`")));
        };
        out.push(Token { kind, lexeme: text[start..cur.pos].to_string(), line, column, start, end: cur.pos });
    }
    Ok(out)
}

/// Decodes the body of a string token.
pub fn unescape(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(ts: &[Token]) -> Vec<TokenKind> {
        ts.iter().map(|t| t.kind).collect()
    }

    #[test]
    fn extrude_statement_tokens() {
        let ts = tokenize("opExtrude(F1, depth = 25.40)", Dialect::Canonical).unwrap();
        assert_eq!(kinds(&ts), vec![Identifier, Punct, Identifier, Punct, Identifier, Punct, Number, Punct]);
        assert_eq!(ts[6].lexeme, "25.40");
    }

    #[test]
    fn unit_suffix_depends_on_dialect() {
        let err = tokenize("1 * inch", Dialect::Canonical).unwrap_err();
        assert!(err.message.contains("unit suffix not allowed"));
        assert_eq!((err.line, err.column), (1, 5));
        let ts = tokenize("1 * inch", Dialect::Raw).unwrap();
        assert_eq!(kinds(&ts), vec![Number, Punct, UnitSuffix]);
        assert_eq!(ts[2].lexeme, "inch");
    }

    #[test]
    fn illegal_character_is_located() {
        let err = tokenize("opSketch(F0,\n  @)", Dialect::Raw).unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
    }

    #[test]
    fn strings_may_span_lines_and_escape() {
        let src = "\"a\\\"b\nc\"";
        let ts = tokenize(src, Dialect::Canonical).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(unescape(&ts[0].lexeme), "a\"b\nc");
        assert_eq!(escape("a\"b\nc"), "\"a\\\"b\\nc\"");
    }

    #[test]
    fn lexemes_and_gaps_reproduce_source() {
        let src = "opSketch(F0, // comment\n  entities = [])  ;\n";
        let ts = tokenize(src, Dialect::Canonical).unwrap();
        let mut rebuilt = std::string::String::new();
        let mut prev = 0;
        for t in &ts {
            let gap = &src[prev..t.start];
            assert!(gap.trim().is_empty() || gap.trim_start().starts_with("//"));
            rebuilt.push_str(gap);
            rebuilt.push_str(&t.lexeme);
            prev = t.end;
        }
        rebuilt.push_str(&src[prev..]);
        assert_eq!(rebuilt, src);
    }
}
