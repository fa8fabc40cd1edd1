//! Structural min/max occurrence analysis over a right-hand side.

use indexmap::IndexMap;

use crate::grammar::{RepeatKind, Rhs, RhsKind};
use crate::metamodel::Cardinality;

/// Occurrence bounds of one member; both counts saturate at 2 ("many").
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub min: u8,
    pub max: u8,
}

impl Occurrence {
    const ONCE: Occurrence = Occurrence { min: 1, max: 1 };

    pub fn cardinality(self) -> Cardinality {
        if self.max > 1 {
            Cardinality::List
        } else if self.min == 0 {
            Cardinality::Optional
        } else {
            Cardinality::One
        }
    }
}

/// Member name a leaf contributes to: its label, or the lowercased
/// target name for unlabeled references. Literals contribute nothing.
pub fn member_name(rhs: &Rhs) -> Option<String> {
    match &rhs.kind {
        RhsKind::NonterminalRef { label, rule: target } | RhsKind::IdentRef { label, ident: target } => {
            Some(label.clone().unwrap_or_else(|| target.to_lowercase()))
        }
        RhsKind::Constant { label, .. } => Some(label.clone()),
        _ => None,
    }
}

/// Per-member occurrence bounds, in order of first textual occurrence.
pub fn occurrences(rhs: &Rhs) -> IndexMap<String, Occurrence> {
    match &rhs.kind {
        RhsKind::Literal { .. } => IndexMap::new(),
        RhsKind::NonterminalRef { .. } | RhsKind::IdentRef { .. } | RhsKind::Constant { .. } => {
            let mut m = IndexMap::new();
            m.extend(member_name(rhs).map(|n| (n, Occurrence::ONCE)));
            m
        }
        RhsKind::Sequence(items) => {
            let mut acc: IndexMap<String, Occurrence> = IndexMap::new();
            for item in items {
                for (name, o) in occurrences(item) {
                    let e = acc.entry(name).or_insert(Occurrence { min: 0, max: 0 });
                    e.min = e.min.saturating_add(o.min).min(2);
                    e.max = e.max.saturating_add(o.max).min(2);
                }
            }
            acc
        }
        RhsKind::Alternative(branches) => {
            let per_branch: Vec<_> = branches.iter().map(occurrences).collect();
            let mut acc: IndexMap<String, Occurrence> = IndexMap::new();
            for name in per_branch.iter().flat_map(|m| m.keys()) {
                if acc.contains_key(name) {
                    continue;
                }
                let get = |m: &IndexMap<String, Occurrence>| {
                    m.get(name).copied().unwrap_or(Occurrence { min: 0, max: 0 })
                };
                let min = per_branch.iter().map(get).map(|o| o.min).min().unwrap_or(0);
                let max = per_branch.iter().map(get).map(|o| o.max).max().unwrap_or(0);
                acc.insert(name.clone(), Occurrence { min, max });
            }
            acc
        }
        RhsKind::Repetition(inner, kind) => occurrences(inner)
            .into_iter()
            .map(|(n, o)| {
                let many = if o.max > 0 { 2 } else { 0 };
                let o = match kind {
                    RepeatKind::Star => Occurrence { min: 0, max: many },
                    RepeatKind::Optional => Occurrence { min: 0, max: o.max },
                    RepeatKind::Plus => Occurrence { min: o.min, max: many },
                };
                (n, o)
            })
            .collect(),
    }
}

/// Raw structural cardinality of every member (before boolean constants are
/// collapsed to a single flag).
pub fn occurrence_cardinalities(rhs: &Rhs) -> IndexMap<String, Cardinality> {
    occurrences(rhs).into_iter().map(|(n, o)| (n, o.cardinality())).collect()
}
