//! Token patterns of `ident` definitions: literals, char ranges, negated
//! classes, alternation and repetition. Matching computes the set of all
//! reachable end offsets, so the longest match falls out directly.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Literal(String),
    /// Inclusive char ranges; `negated` flips membership.
    Class { ranges: Vec<(char, char)>, negated: bool },
    Any,
    Seq(Vec<Pattern>),
    Alt(Vec<Pattern>),
    Star(Box<Pattern>),
    Plus(Box<Pattern>),
    Optional(Box<Pattern>),
}

impl Pattern {
    pub fn range(lo: char, hi: char) -> Self {
        Pattern::Class { ranges: vec![(lo, hi)], negated: false }
    }

    /// Length in bytes of the longest non-empty prefix of `text[start..]`
    /// matched by the pattern.
    pub fn longest_match(&self, text: &str, start: usize) -> Option<usize> {
        self.ends(text, &[start])
            .into_iter()
            .filter(|&e| e > start)
            .max()
            .map(|e| e - start)
    }

    pub fn matches_exactly(&self, s: &str) -> bool {
        !s.is_empty() && self.ends(s, &[0]).contains(&s.len())
    }

    /// All end offsets reachable from any of `starts`, sorted and deduplicated.
    fn ends(&self, text: &str, starts: &[usize]) -> Vec<usize> {
        let mut out = match self {
            Pattern::Literal(lit) => starts
                .iter()
                .filter(|&&s| text[s..].starts_with(lit.as_str()))
                .map(|&s| s + lit.len())
                .collect(),
            Pattern::Class { .. } | Pattern::Any => starts
                .iter()
                .filter_map(|&s| {
                    let c = text[s..].chars().next()?;
                    self.accepts_char(c).then_some(s + c.len_utf8())
                })
                .collect(),
            Pattern::Seq(items) => {
                let mut cur = starts.to_vec();
                for item in items {
                    if cur.is_empty() {
                        break;
                    }
                    cur = item.ends(text, &cur);
                }
                cur
            }
            Pattern::Alt(branches) => {
                branches.iter().flat_map(|b| b.ends(text, starts)).collect()
            }
            Pattern::Optional(inner) => {
                let mut v = starts.to_vec();
                v.extend(inner.ends(text, starts));
                v
            }
            Pattern::Star(inner) => closure(inner, text, starts.to_vec()),
            Pattern::Plus(inner) => {
                let first = inner.ends(text, starts);
                closure(inner, text, first)
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    fn accepts_char(&self, c: char) -> bool {
        match self {
            Pattern::Any => true,
            Pattern::Class { ranges, negated } => {
                ranges.iter().any(|&(lo, hi)| lo <= c && c <= hi) != *negated
            }
            _ => false,
        }
    }

    /// Whether the pattern's language contains at least one non-empty string.
    pub fn can_match_nonempty(&self) -> bool {
        match self {
            Pattern::Literal(l) => !l.is_empty(),
            Pattern::Class { ranges, negated } => *negated || ranges.iter().any(|(lo, hi)| lo <= hi),
            Pattern::Any => true,
            Pattern::Seq(items) => {
                items.iter().all(Pattern::is_satisfiable)
                    && items.iter().any(Pattern::can_match_nonempty)
            }
            Pattern::Alt(bs) => bs.iter().any(Pattern::can_match_nonempty),
            Pattern::Star(p) | Pattern::Plus(p) | Pattern::Optional(p) => p.can_match_nonempty(),
        }
    }

    pub fn matches_empty(&self) -> bool {
        match self {
            Pattern::Literal(l) => l.is_empty(),
            Pattern::Class { .. } | Pattern::Any => false,
            Pattern::Seq(items) => items.iter().all(Pattern::matches_empty),
            Pattern::Alt(bs) => bs.iter().any(Pattern::matches_empty),
            Pattern::Plus(p) => p.matches_empty(),
            Pattern::Star(_) | Pattern::Optional(_) => true,
        }
    }

    fn is_satisfiable(&self) -> bool {
        self.matches_empty() || self.can_match_nonempty()
    }
}

fn closure(inner: &Pattern, text: &str, seed: Vec<usize>) -> Vec<usize> {
    let mut seen = seed.clone();
    let mut frontier = seed;
    while !frontier.is_empty() {
        let next: Vec<usize> = inner
            .ends(text, &frontier)
            .into_iter()
            .filter(|e| !seen.contains(e))
            .collect();
        seen.extend(&next);
        frontier = next;
    }
    seen
}

fn write_char(f: &mut fmt::Formatter<'_>, c: char) -> fmt::Result {
    match c {
        '\'' => f.write_str("'\\''"),
        '\\' => f.write_str("'\\\\'"),
        '\n' => f.write_str("'\\n'"),
        '\t' => f.write_str("'\\t'"),
        '\r' => f.write_str("'\\r'"),
        c => write!(f, "'{c}'"),
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Literal(l) => {
                let escaped = l.replace('\\', "\\\\").replace('\'', "\\'");
                write!(f, "'{escaped}'")
            }
            Pattern::Class { ranges, negated } => {
                if *negated {
                    f.write_str("~")?;
                }
                f.write_str("(")?;
                for (i, &(lo, hi)) in ranges.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    write_char(f, lo)?;
                    if lo != hi {
                        f.write_str("..")?;
                        write_char(f, hi)?;
                    }
                }
                f.write_str(")")
            }
            Pattern::Any => f.write_str("."),
            Pattern::Seq(items) => {
                f.write_str("(")?;
                for (i, p) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            Pattern::Alt(bs) => {
                f.write_str("(")?;
                for (i, p) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            Pattern::Star(p) => write!(f, "{p}*"),
            Pattern::Plus(p) => write!(f, "{p}+"),
            Pattern::Optional(p) => write!(f, "{p}?"),
        }
    }
}

/// `('a'..'z'|'A'..'Z'|'_') ('a'..'z'|'A'..'Z'|'_'|'0'..'9')*`
pub fn predefined_ident() -> Pattern {
    Pattern::Seq(vec![
        Pattern::Class { ranges: vec![('a', 'z'), ('A', 'Z'), ('_', '_')], negated: false },
        Pattern::Star(Box::new(Pattern::Class {
            ranges: vec![('a', 'z'), ('A', 'Z'), ('_', '_'), ('0', '9')],
            negated: false,
        })),
    ])
}

/// A double-quoted string with backslash escapes, not spanning lines.
pub fn predefined_string() -> Pattern {
    Pattern::Seq(vec![
        Pattern::Literal("\"".into()),
        Pattern::Star(Box::new(Pattern::Alt(vec![
            Pattern::Class { ranges: vec![('"', '"'), ('\\', '\\'), ('\n', '\n')], negated: true },
            Pattern::Seq(vec![Pattern::Literal("\\".into()), Pattern::Any]),
        ]))),
        Pattern::Literal("\"".into()),
    ])
}
