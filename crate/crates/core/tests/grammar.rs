mod common;

use common::*;
use gramkit::diag::Pos;
use gramkit::grammar::{
    parse_grammar, validate_grammar, BuiltinTransform, GrammarAst, RhsKind, Transform,
};

#[test]
fn identifier_definitions() {
    let g = parse_grammar(IDENTS_GRAMMAR).unwrap();
    let names: Vec<_> = g.idents.iter().map(|i| i.name.as_str()).collect();
    assert_eq!(names, ["IDENT", "NUMBER", "CARDINALITY"]);
    assert_eq!(g.idents[0].transform, Transform::Builtin(BuiltinTransform::String));
    assert_eq!(g.idents[1].transform, Transform::Builtin(BuiltinTransform::Int));
    match &g.idents[2].transform {
        Transform::Opaque { param, result_type, body } => {
            assert_eq!((param.as_str(), result_type.as_str()), ("x", "int"));
            assert!(body.contains("return -1;"));
        }
        other => panic!("expected opaque transform, got {other:?}"),
    }
    assert!(validate_grammar(&g).is_empty());
}

#[test]
fn automaton_grammar_structure() {
    let g = parse_grammar(&corpus("automaton.mc")).unwrap();
    assert_eq!(g.package.as_deref(), Some("mc.languages.automaton"));
    assert_eq!(g.name, "Automaton");
    let names: Vec<_> = g.productions.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names, ["Automaton", "State", "Transition", "TransitionWithAction"]);
    assert_eq!(g.production("TransitionWithAction").unwrap().super_rule.as_deref(), Some("Transition"));

    let mut constants = Vec::new();
    g.production("State").unwrap().rhs.walk(&mut |n| {
        if let RhsKind::Constant { label, literals } = &n.kind {
            constants.push((label.clone(), literals.clone()));
        }
    });
    assert_eq!(
        constants,
        [("initial".to_string(), vec!["initial".to_string()]), ("final".to_string(), vec!["final".to_string()])]
    );
    assert_eq!(g.associations.len(), 2);
    assert_eq!(g.concepts.len(), 2);
    assert_eq!(g.ast_blocks.len(), 1);
    assert_eq!(g.ast_blocks[0].methods.len(), 1);
}

#[test]
fn combined_automaton_grammar_is_accepted() {
    let g = parse_grammar(&corpus("automaton.mc")).unwrap();
    assert_eq!(validate_grammar(&g), []);
}

#[test]
fn every_corpus_grammar_validates_cleanly() {
    for f in ["automaton.mc", "shop.mc", "shop_ebnf.mc", "net.mc"] {
        let g = parse_grammar(&corpus(f)).unwrap();
        assert_eq!(validate_grammar(&g), [], "{f}");
    }
}

#[test]
fn undefined_nonterminal_and_left_recursion() {
    let d = validate_grammar(&parse_grammar("grammar G { A = B; }").unwrap());
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].message, "undefined nonterminal B");

    let d = validate_grammar(&parse_grammar(r#"grammar G { A = A "a"; }"#).unwrap());
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].message, "left recursion on A");
}

fn positions(g: &GrammarAst) -> Vec<Pos> {
    let mut out = vec![g.pos];
    out.extend(g.idents.iter().map(|i| i.pos));
    for p in &g.productions {
        out.push(p.pos);
        p.rhs.walk(&mut |n| out.push(n.pos));
    }
    out.extend(g.interfaces.iter().map(|i| i.pos));
    for b in &g.ast_blocks {
        out.push(b.pos);
        out.extend(b.attributes.iter().map(|a| a.pos));
        out.extend(b.methods.iter().map(|m| m.pos));
    }
    out.extend(g.associations.iter().map(|a| a.pos));
    out.extend(g.concepts.iter().map(|c| c.pos));
    out
}

#[test]
fn positions_lie_within_the_source() {
    for f in ["automaton.mc", "shop.mc", "shop_ebnf.mc", "net.mc"] {
        let text = corpus(f);
        let lines: Vec<&str> = text.split('\n').collect();
        let g = parse_grammar(&text).unwrap();
        for pos in positions(&g) {
            assert!(pos.line >= 1 && (pos.line as usize) <= lines.len(), "{f}: {pos}");
            let width = lines[pos.line as usize - 1].chars().count() as u32;
            assert!(pos.column >= 1 && pos.column <= width + 1, "{f}: {pos}");
        }
    }
}

#[test]
fn grammar_parsing_is_deterministic() {
    for f in ["automaton.mc", "shop.mc", "shop_ebnf.mc", "net.mc"] {
        let text = corpus(f);
        assert_eq!(parse_grammar(&text).unwrap(), parse_grammar(&text).unwrap());
    }
}

#[test]
fn keyword_marker_is_plain_keyword() {
    let a = parse_grammar(r#"grammar G { A = !"a" x:IDENT; }"#).unwrap();
    let b = parse_grammar(r#"grammar G { A = "a" x:IDENT; }"#).unwrap();
    let lang_a = gramkit::Language::compile(r#"grammar G { A = !"a" x:IDENT; }"#).unwrap();
    let lang_b = gramkit::Language::compile(r#"grammar G { A = "a" x:IDENT; }"#).unwrap();
    assert_eq!(lang_a.tokens().keywords, lang_b.tokens().keywords);
    assert_ne!(a.productions[0].rhs, b.productions[0].rhs);
}
