#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use gramkit::engine::{ModelTree, NodeId, Slot};
use gramkit::grammar::{RepeatKind, Rhs, RhsKind};
use gramkit::metamodel::Cardinality;
use gramkit::Language;
use indexmap::IndexMap;

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus").join(name)
}

pub fn corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn language(name: &str) -> Language {
    Language::compile(&corpus(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn automaton() -> Language {
    language("automaton.mc")
}

/// Node of `class` whose `name` attribute equals `name`.
pub fn named(tree: &ModelTree, class: &str, name: &str) -> NodeId {
    tree.iter()
        .find(|n| n.class == class && n.str_attr("name") == Some(name))
        .unwrap_or_else(|| panic!("no {class} named {name}"))
        .id
}

/// Constant-mapping grammar: one boolean and one two-literal enum.
pub const CONSTANTS_GRAMMAR: &str = r#"grammar Customers {
    Registry = Customer*;
    Customer = kind:["client" | "premiumclient"] name:IDENT vip:["vip"]? ";";
}"#;

/// Ident-transform grammar with the overlapping NUMBER/CARDINALITY pair.
pub const NUMBERS_GRAMMAR: &str = r#"grammar Numbers {
    ident NUMBER ('-')? ('0'..'9')+ : int;
    ident REAL ('-')? ('0'..'9')+ '.' ('0'..'9')+ : float;
    ident CARDINALITY ('0'..'9')+ | '*' :
      x -> int {
        if (x.equals("*")) return -1;
        else return Integer.parseInt(x);
      };
    Rows = Row*;
    Row = "row" n:NUMBER r:REAL c:CARDINALITY ";";
}"#;

/// Deterministic shop corpus mixing plain and premium clients, cash and
/// credit orders, and some malformed inputs.
pub fn shop_models() -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..24usize {
        let mut s = format!("Shop{i}\n");
        for c in 0..(i % 4) {
            if (i + c) % 2 == 0 {
                s.push_str(&format!("client c{c} \"Main Street {c}\" \"Town{i}\"\n"));
            } else {
                s.push_str(&format!("premiumclient p{c} d{}\n", c * 5));
            }
        }
        for o in 0..(i % 3) {
            if (i / 2 + o) % 2 == 0 {
                s.push_str(&format!("cashorder c{o} amt{o}\n"));
            } else {
                s.push_str(&format!("creditorder p{o} card{o}\n"));
            }
        }
        out.push(s);
    }
    // Rejected by both forms.
    out.push("Shop client Bob\n".into());
    out.push("Shop premiumclient Bob\n".into());
    out.push("Shop cashorder a b client c \"s\" \"t\"\n".into());
    out.push("Shop creditorder a\n".into());
    out.push("client c \"s\" \"t\"\n".into());
    out.push("Shop client \"Bob\" \"s\" \"t\"\n".into());
    out
}

/// Pre-order (class, present attribute values) with unit wrappers (no
/// attribute values, exactly one child) collapsed into their child.
pub fn collapsed(tree: &ModelTree) -> Vec<(String, Vec<(String, String)>)> {
    fn go(tree: &ModelTree, id: NodeId, out: &mut Vec<(String, Vec<(String, String)>)>) {
        let n = tree.node(id);
        // Member order differs between the two forms, so compare as a set.
        let mut attrs: Vec<(String, String)> = n
            .attributes
            .iter()
            .filter(|(_, s)| !s.values().is_empty())
            .map(|(k, s)| (k.clone(), format!("{:?}", s)))
            .collect();
        attrs.sort();
        if attrs.is_empty() && n.children.len() == 1 {
            return go(tree, n.children[0].1, out);
        }
        out.push((n.class.clone(), attrs));
        for (_, c) in &n.children {
            go(tree, *c, out);
        }
    }
    let mut out = Vec::new();
    go(tree, ModelTree::ROOT, &mut out);
    out
}

/// The same tree with positions erased, for comparing against a reread copy.
pub fn without_positions(tree: &ModelTree) -> ModelTree {
    let mut t = tree.clone();
    for n in &mut t.nodes {
        n.pos = Default::default();
        n.attribute_positions.clear();
    }
    t
}

pub fn slot_str(s: &Slot) -> String {
    format!("{s:?}")
}

// ---------------------------------------------------------------------------
// Cardinality oracle: enumerate every derivation of a right-hand side
// (repetitions unrolled up to twice, nested at most four deep) and count how
// often each member occurs.

type Counts = BTreeMap<String, u8>;

fn leaf_name(rhs: &Rhs) -> Option<String> {
    match &rhs.kind {
        RhsKind::NonterminalRef { label: Some(l), .. } | RhsKind::IdentRef { label: Some(l), .. } => Some(l.clone()),
        RhsKind::NonterminalRef { rule: t, .. } | RhsKind::IdentRef { ident: t, .. } => Some(t.to_lowercase()),
        RhsKind::Constant { label, .. } => Some(label.clone()),
        _ => None,
    }
}

fn product(a: &BTreeSet<Counts>, b: &BTreeSet<Counts>) -> BTreeSet<Counts> {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            let mut m = x.clone();
            for (k, v) in y {
                let e = m.entry(k.clone()).or_insert(0);
                *e = (*e + v).min(2);
            }
            out.insert(m);
        }
    }
    out
}

fn derivations(rhs: &Rhs, depth: u32) -> BTreeSet<Counts> {
    let empty: BTreeSet<Counts> = [Counts::new()].into();
    match &rhs.kind {
        RhsKind::Literal { .. } => empty,
        RhsKind::NonterminalRef { .. } | RhsKind::IdentRef { .. } | RhsKind::Constant { .. } => {
            [[(leaf_name(rhs).unwrap(), 1u8)].into_iter().collect()].into()
        }
        RhsKind::Sequence(items) => items.iter().fold(empty, |acc, i| product(&acc, &derivations(i, depth))),
        RhsKind::Alternative(items) => items.iter().flat_map(|i| derivations(i, depth)).collect(),
        RhsKind::Repetition(inner, kind) => {
            assert!(depth > 0, "repetitions nested deeper than the oracle bound");
            let once = derivations(inner, depth - 1);
            let twice = product(&once, &once);
            let mut out = BTreeSet::new();
            if *kind != RepeatKind::Plus {
                out.extend(empty);
            }
            out.extend(once);
            if *kind != RepeatKind::Optional {
                out.extend(twice);
            }
            out
        }
    }
}

pub fn oracle_cardinalities(rhs: &Rhs) -> IndexMap<String, Cardinality> {
    let all = derivations(rhs, 4);
    let mut names: Vec<String> = Vec::new();
    rhs.walk(&mut |n| {
        if let Some(name) = leaf_name(n) {
            if !names.contains(&name) {
                names.push(name);
            }
        }
    });
    names
        .into_iter()
        .map(|name| {
            let counts: Vec<u8> = all.iter().map(|d| d.get(&name).copied().unwrap_or(0)).collect();
            let card = if counts.iter().any(|&c| c >= 2) {
                Cardinality::List
            } else if counts.contains(&0) {
                Cardinality::Optional
            } else {
                Cardinality::One
            };
            (name, card)
        })
        .collect()
}

/// Productions used for the cardinality oracle, with stub rules for every
/// nonterminal they mention.
pub const ORACLE_PRODUCTIONS: &[&str] = &[
    r#"a:X ("," a:X)*"#,
    r#"name:IDENT"#,
    r#"( State | Transition )*"#,
    r#"x:IDENT?"#,
    r#"(a:IDENT b:IDENT)? c:IDENT"#,
    r#"(a:IDENT (b:IDENT)*)*"#,
    r#"a:IDENT | b:IDENT"#,
    r#"a:IDENT | a:IDENT a:IDENT"#,
    r#"(x:X | y:Y)+ z:X?"#,
    r#""k" (p:IDENT ("," p:IDENT)*)?"#,
    r#"(a:IDENT ((b:IDENT)?)*)+"#,
    r#"X Y X"#,
    r#"((a:IDENT)?)?"#,
    r#"!"state" name:IDENT ( "<<" initial:["initial"] ">>" | "<<" final:["final"] ">>" )* ( "{" State* "}" | ";" )"#,
    r#"(a:IDENT | (b:IDENT c:IDENT)+)? d:STRING*"#,
];

pub fn oracle_grammar(rhs: &str) -> String {
    format!(
        r#"grammar O {{
            P = {rhs};
            X = "x"; Y = "y"; State = "s"; Transition = "t";
        }}"#
    )
}

/// The three identifier definitions (plain name, number, cardinality with a
/// host-language conversion) wrapped in a grammar.
pub const IDENTS_GRAMMAR: &str = r#"grammar Idents {
    // Simple name
    ident IDENT ('a'..'z'|'A'..'Z')+ ;

    // Numbers (using default transformation)
    ident NUMBER ('0'..'9')+ : int;

    // Cardinality (STAR = -1)
    ident CARDINALITY ('0'..'9')+ | '*' :
      x -> int {
        if (x.equals("*")) return -1;
        else return Integer.parseInt(x);
      };

    Bound = n:NUMBER ".." c:CARDINALITY;
}"#;
