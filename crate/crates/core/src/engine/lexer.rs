//! Lexer derived from a grammar: ident tokens come from `ident`
//! definitions (plus the predefined `IDENT` and `STRING`), and every quoted
//! literal of every production becomes a keyword or a punctuation symbol.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::diag::{Diagnostic, Diagnostics, LineIndex, Pos};
use crate::grammar::pattern::{predefined_ident, predefined_string, Pattern};
use crate::grammar::{BuiltinTransform, GrammarAst, RhsKind, IDENT, STRING};

/// A typed attribute value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    /// The enum literal that was consumed.
    Enum(String),
}

impl Value {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Enum(e) => f.write_str(e),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Str(v) | Value::Enum(v) => s.serialize_str(v),
            Value::Int(i) => s.serialize_i64(*i),
            Value::Float(x) => s.serialize_f64(*x),
            Value::Bool(b) => s.serialize_bool(*b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenTransform {
    Builtin(BuiltinTransform),
    /// Predefined `STRING`: strip the quotes and resolve escapes.
    Unquote,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentToken {
    pub name: String,
    pub pattern: Pattern,
    pub transform: TokenTransform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipRule {
    Whitespace,
    /// `//` to end of line
    LineComment,
    /// `/* ... */`
    BlockComment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenSpec {
    /// Tried in order; user definitions first, then predefined ones.
    pub ident_tokens: Vec<IdentToken>,
    /// Literals that match the `IDENT` pattern.
    pub keywords: BTreeSet<String>,
    pub punctuation: BTreeSet<String>,
    pub skip: Vec<SkipRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Ident(String),
    Keyword(String),
    Punct(String),
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(n) => f.write_str(n),
            TokenKind::Keyword(k) => write!(f, "keyword `{k}`"),
            TokenKind::Punct(p) => write!(f, "`{p}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Present exactly for ident tokens.
    pub value: Option<Value>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("unknown transform `{0}`")]
    Unknown(String),
    #[error("invalid {kind} literal `{lexeme}`")]
    Invalid { kind: &'static str, lexeme: String },
    #[error("{kind} literal `{lexeme}` is out of range")]
    Overflow { kind: &'static str, lexeme: String },
}

/// Applies a builtin transform by name: `string`, `int`, `float` or
/// `cardinality` (where `*` stands for -1).
pub fn transform_ident(transform: &str, lexeme: &str) -> Result<Value, TransformError> {
    let b = BuiltinTransform::from_name(transform)
        .ok_or_else(|| TransformError::Unknown(transform.to_string()))?;
    apply_builtin(b, lexeme)
}

pub(crate) fn apply_builtin(b: BuiltinTransform, lexeme: &str) -> Result<Value, TransformError> {
    match b {
        BuiltinTransform::String => Ok(Value::Str(lexeme.to_string())),
        BuiltinTransform::Int => parse_int(lexeme, "int"),
        BuiltinTransform::Cardinality if lexeme == "*" => Ok(Value::Int(-1)),
        BuiltinTransform::Cardinality => parse_int(lexeme, "cardinality"),
        BuiltinTransform::Float => {
            let invalid = || TransformError::Invalid { kind: "float", lexeme: lexeme.to_string() };
            let decimal = lexeme.chars().any(|c| c.is_ascii_digit())
                && lexeme.chars().all(|c| c.is_ascii_digit() || "+-.eE".contains(c));
            if !decimal {
                return Err(invalid());
            }
            let x: f64 = lexeme.parse().map_err(|_| invalid())?;
            if x.is_finite() {
                Ok(Value::Float(x))
            } else {
                Err(TransformError::Overflow { kind: "float", lexeme: lexeme.to_string() })
            }
        }
    }
}

fn parse_int(lexeme: &str, kind: &'static str) -> Result<Value, TransformError> {
    let digits = lexeme.strip_prefix(['-', '+']).unwrap_or(lexeme);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(TransformError::Invalid { kind, lexeme: lexeme.to_string() });
    }
    lexeme
        .parse::<i64>()
        .map(Value::Int)
        .map_err(|_| TransformError::Overflow { kind, lexeme: lexeme.to_string() })
}

fn unquote(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

impl IdentToken {
    pub fn apply(&self, lexeme: &str) -> Result<Value, TransformError> {
        match self.transform {
            TokenTransform::Builtin(b) => apply_builtin(b, lexeme),
            TokenTransform::Unquote => Ok(Value::Str(unquote(lexeme))),
        }
    }
}

/// Derives the lexer from a grammar.
pub fn build_token_spec(g: &GrammarAst) -> Result<TokenSpec, Diagnostics> {
    let mut ident_tokens: Vec<IdentToken> = Vec::new();
    let mut diags = Vec::new();
    for def in &g.idents {
        if ident_tokens.iter().any(|t| t.name == def.name) {
            diags.push(Diagnostic::error(def.pos, format!("duplicate ident definition {}", def.name)));
            continue;
        }
        let Some(b) = def.effective_transform() else {
            diags.push(Diagnostic::error(def.pos, format!("ident {} has no usable transform", def.name)));
            continue;
        };
        ident_tokens.push(IdentToken {
            name: def.name.clone(),
            pattern: def.pattern.clone(),
            transform: TokenTransform::Builtin(b),
        });
    }
    if g.ident(IDENT).is_none() {
        ident_tokens.push(IdentToken {
            name: IDENT.into(),
            pattern: predefined_ident(),
            transform: TokenTransform::Builtin(BuiltinTransform::String),
        });
    }
    if g.ident(STRING).is_none() {
        ident_tokens.push(IdentToken {
            name: STRING.into(),
            pattern: predefined_string(),
            transform: TokenTransform::Unquote,
        });
    }
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }

    let ident_pattern = ident_tokens
        .iter()
        .find(|t| t.name == IDENT)
        .map(|t| t.pattern.clone())
        .unwrap_or_else(predefined_ident);
    let mut keywords = BTreeSet::new();
    let mut punctuation = BTreeSet::new();
    let mut classify = |lit: &str| {
        if ident_pattern.matches_exactly(lit) {
            keywords.insert(lit.to_string());
        } else if !lit.is_empty() {
            punctuation.insert(lit.to_string());
        }
    };
    for p in &g.productions {
        p.rhs.walk(&mut |n| match &n.kind {
            RhsKind::Literal { text, .. } => classify(text),
            RhsKind::Constant { literals, .. } => literals.iter().for_each(|l| classify(l)),
            _ => {}
        });
    }
    Ok(TokenSpec {
        ident_tokens,
        keywords,
        punctuation,
        skip: vec![SkipRule::Whitespace, SkipRule::LineComment, SkipRule::BlockComment],
    })
}

impl TokenSpec {
    pub fn ident(&self, name: &str) -> Option<&IdentToken> {
        self.ident_tokens.iter().find(|t| t.name == name)
    }

    pub fn is_literal(&self, text: &str) -> bool {
        self.keywords.contains(text) || self.punctuation.contains(text)
    }

    /// Byte length of skippable text at `at`, or an error for an unterminated
    /// block comment.
    fn skip_len(&self, text: &str, at: usize) -> Result<usize, usize> {
        let rest = &text[at..];
        for rule in &self.skip {
            match rule {
                SkipRule::Whitespace => {
                    let n = rest.len() - rest.trim_start().len();
                    if n > 0 {
                        return Ok(n);
                    }
                }
                SkipRule::LineComment if rest.starts_with("//") => {
                    return Ok(rest.find('\n').map_or(rest.len(), |n| n + 1));
                }
                SkipRule::BlockComment if rest.starts_with("/*") => {
                    return rest[2..].find("*/").map(|n| n + 4).ok_or(at);
                }
                _ => {}
            }
        }
        Ok(0)
    }
}

/// Splits a model text into tokens by maximal munch. On equal length a
/// literal beats an ident token; ident tokens are tried in declaration order.
pub fn tokenize(spec: &TokenSpec, text: &str) -> Result<Vec<Token>, Diagnostic> {
    let lines = LineIndex::new(text);
    let mut out = Vec::new();
    let mut at = 0;
    while at < text.len() {
        match spec.skip_len(text, at) {
            Ok(0) => {}
            Ok(n) => {
                at += n;
                continue;
            }
            Err(start) => {
                return Err(Diagnostic::error(lines.pos(text, start), "unterminated block comment"))
            }
        }
        let rest = &text[at..];
        let pos = lines.pos(text, at);
        let literal = spec
            .keywords
            .iter()
            .chain(&spec.punctuation)
            .filter(|l| rest.starts_with(l.as_str()))
            .max_by_key(|l| l.len());
        let mut ident: Option<(&IdentToken, usize)> = None;
        for t in &spec.ident_tokens {
            if let Some(len) = t.pattern.longest_match(text, at) {
                if ident.is_none_or(|(_, best)| len > best) {
                    ident = Some((t, len));
                }
            }
        }
        let token = match (literal, ident) {
            (Some(lit), Some((_, len))) if lit.len() >= len => literal_token(spec, lit, pos),
            (Some(lit), None) => literal_token(spec, lit, pos),
            (_, Some((t, len))) => {
                let lexeme = &rest[..len];
                let value = t
                    .apply(lexeme)
                    .map_err(|e| Diagnostic::error(pos, e.to_string()))?;
                Token {
                    kind: TokenKind::Ident(t.name.clone()),
                    lexeme: lexeme.to_string(),
                    value: Some(value),
                    pos,
                }
            }
            (None, None) => {
                let c = rest.chars().next().unwrap_or_default();
                return Err(Diagnostic::error(pos, format!("unexpected character {c:?}")));
            }
        };
        at += token.lexeme.len();
        out.push(token);
    }
    Ok(out)
}

fn literal_token(spec: &TokenSpec, lit: &str, pos: Pos) -> Token {
    let kind = if spec.keywords.contains(lit) {
        TokenKind::Keyword(lit.to_string())
    } else {
        TokenKind::Punct(lit.to_string())
    };
    Token { kind, lexeme: lit.to_string(), value: None, pos }
}
