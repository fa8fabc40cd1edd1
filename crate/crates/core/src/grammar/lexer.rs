//! Lexer for grammar files. It is lenient: any stray character becomes a
//! one-char punctuation token, so opaque host-language bodies can be
//! scanned without understanding them.

use crate::diag::{Diagnostic, LineIndex, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Name(String),
    /// Double-quoted literal, unescaped.
    Str(String),
    /// Single-quoted literal, unescaped.
    Char(String),
    Number(u32),
    Punct(&'static str),
    Other(char),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("`{n}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Char(s) => format!("char literal '{s}'"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Other(c) => format!("`{c}`"),
            Tok::Eof => "end of file".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
    pub pos: Pos,
}

const PUNCTS: &[&str] = &[
    "<->", "->", "..", "{", "}", "(", ")", "[", "]", ";", ":", ",", ".", "=", "|", "*", "+", "?",
    "!", "~", "<", ">", "-",
];

pub fn lex(text: &str) -> Result<Vec<Spanned>, Diagnostic> {
    let lines = LineIndex::new(text);
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let c = text[i..].chars().next().unwrap_or_default();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if text[i..].starts_with("//") {
            i = text[i..].find('\n').map_or(text.len(), |n| i + n + 1);
            continue;
        }
        if text[i..].starts_with("/*") {
            match text[i + 2..].find("*/") {
                Some(n) => i = i + 2 + n + 2,
                None => {
                    return Err(Diagnostic::error(
                        lines.pos(text, i),
                        "unterminated block comment",
                    ))
                }
            }
            continue;
        }
        let start = i;
        let pos = lines.pos(text, start);
        let tok = if c.is_alphabetic() || c == '_' {
            let end = text[i..]
                .find(|ch: char| !(ch.is_alphanumeric() || ch == '_'))
                .map_or(text.len(), |n| i + n);
            i = end;
            Tok::Name(text[start..end].to_string())
        } else if c.is_ascii_digit() {
            let end = text[i..]
                .find(|ch: char| !ch.is_ascii_digit())
                .map_or(text.len(), |n| i + n);
            i = end;
            let n = text[start..end]
                .parse()
                .map_err(|_| Diagnostic::error(pos, "number out of range"))?;
            Tok::Number(n)
        } else if c == '"' || c == '\'' {
            let (value, end) = quoted(text, i, c).ok_or_else(|| {
                Diagnostic::error(pos, format!("unterminated {} literal", if c == '"' { "string" } else { "char" }))
            })?;
            i = end;
            if c == '"' {
                Tok::Str(value)
            } else {
                Tok::Char(value)
            }
        } else if let Some(p) = PUNCTS.iter().find(|p| text[i..].starts_with(**p)) {
            i += p.len();
            Tok::Punct(p)
        } else {
            i += c.len_utf8();
            Tok::Other(c)
        };
        out.push(Spanned { tok, start, end: i, pos });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        start: text.len(),
        end: text.len(),
        pos: lines.pos(text, text.len()),
    });
    Ok(out)
}

/// Scans a quoted literal starting at `start` (the opening quote). Returns the
/// unescaped contents and the offset past the closing quote.
fn quoted(text: &str, start: usize, quote: char) -> Option<(String, usize)> {
    let mut value = String::new();
    let mut chars = text[start + 1..].char_indices();
    while let Some((off, c)) = chars.next() {
        match c {
            c if c == quote => return Some((value, start + 1 + off + 1)),
            '\n' => return None,
            '\\' => {
                let (_, e) = chars.next()?;
                value.push(match e {
                    'n' => '\n',
                    't' => '\t',
                    'r' => '\r',
                    other => other,
                });
            }
            c => value.push(c),
        }
    }
    None
}
