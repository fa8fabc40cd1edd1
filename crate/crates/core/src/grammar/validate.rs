use std::collections::{BTreeSet, HashMap};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::diag::{Diagnostic, Pos};
use crate::grammar::ast::*;
use crate::metamodel::infer_members;

/// Checks a parsed grammar. An empty result (or warnings only) means the
/// grammar is accepted.
pub fn validate_grammar(g: &GrammarAst) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    check_idents(g, &mut diags);
    check_references(g, &mut diags);
    let cyclic = check_extends(g, &mut diags);
    check_left_recursion(g, &cyclic, &mut diags);
    for p in &g.productions {
        diags.extend(infer_members(p, g).diagnostics);
    }
    for block in &g.ast_blocks {
        if g.production(&block.target).is_none() && g.interface(&block.target).is_none() {
            diags.push(Diagnostic::error(
                block.pos,
                format!("ast block targets unknown class or interface {}", block.target),
            ));
        }
    }
    check_associations(g, &mut diags);
    diags.sort_by_key(|d| d.pos);
    diags
}

fn check_idents(g: &GrammarAst, diags: &mut Vec<Diagnostic>) {
    for def in &g.idents {
        if !def.pattern.can_match_nonempty() {
            diags.push(Diagnostic::error(
                def.pos,
                format!("pattern of ident {} matches no non-empty string", def.name),
            ));
        } else if def.pattern.matches_empty() {
            diags.push(Diagnostic::warning(
                def.pos,
                format!("pattern of ident {} also matches the empty string", def.name),
            ));
        }
        if def.effective_transform().is_none() {
            if let Transform::Opaque { result_type, .. } = &def.transform {
                diags.push(Diagnostic::error(
                    def.pos,
                    format!(
                        "no builtin transform for ident {} with result type {result_type}",
                        def.name
                    ),
                ));
            }
        }
    }
}

fn check_references(g: &GrammarAst, diags: &mut Vec<Diagnostic>) {
    for p in &g.productions {
        p.rhs.walk(&mut |n| {
            if let RhsKind::NonterminalRef { rule, .. } = &n.kind {
                if g.production(rule).is_none() && g.interface(rule).is_none() {
                    diags.push(Diagnostic::error(n.pos, format!("undefined nonterminal {rule}")));
                }
            }
        });
        if let Some(sup) = &p.super_rule {
            if g.production(sup).is_none() {
                let what = if g.interface(sup).is_some() { "an interface" } else { "undefined" };
                diags.push(Diagnostic::error(
                    p.pos,
                    format!("{} extends {sup}, which is {what}; expected a production", p.name),
                ));
            }
        }
        for i in &p.interfaces {
            if g.interface(i).is_none() {
                diags.push(Diagnostic::error(
                    p.pos,
                    format!("{} implements undefined interface {i}", p.name),
                ));
            }
        }
    }
}

/// Reports each `extends` cycle once and returns the productions on cycles.
fn check_extends(g: &GrammarAst, diags: &mut Vec<Diagnostic>) -> BTreeSet<String> {
    let mut cyclic = BTreeSet::new();
    for p in &g.productions {
        let mut chain = vec![p.name.as_str()];
        let mut cur = p.super_rule.as_deref();
        while let Some(s) = cur {
            if s == p.name {
                // report only from the first member of the cycle in file order
                let first = g
                    .productions
                    .iter()
                    .find(|q| chain.contains(&q.name.as_str()))
                    .map(|q| q.name.as_str());
                if first == Some(p.name.as_str()) {
                    chain.push(s);
                    diags.push(Diagnostic::error(
                        p.pos,
                        format!("extends cycle: {}", chain.join(" -> ")),
                    ));
                }
                cyclic.insert(p.name.clone());
                break;
            }
            if chain.contains(&s) {
                break;
            }
            chain.push(s);
            cur = g.production(s).and_then(|q| q.super_rule.as_deref());
        }
    }
    cyclic
}

/// Nullability of every production and interface, taking inheritance
/// expansion into account.
fn nullable_rules(g: &GrammarAst) -> HashMap<&str, bool> {
    let mut nullable: HashMap<&str, bool> = g
        .productions
        .iter()
        .map(|p| (p.name.as_str(), false))
        .chain(g.interfaces.iter().map(|i| (i.name.as_str(), false)))
        .collect();
    loop {
        let mut changed = false;
        for p in &g.productions {
            let n = rhs_nullable(&p.rhs, &nullable)
                || g.sub_productions(&p.name).any(|s| nullable[s.name.as_str()]);
            if n && !nullable[p.name.as_str()] {
                nullable.insert(&p.name, true);
                changed = true;
            }
        }
        for i in &g.interfaces {
            let n = g.implementors(&i.name).any(|s| nullable[s.name.as_str()]);
            if n && !nullable[i.name.as_str()] {
                nullable.insert(&i.name, true);
                changed = true;
            }
        }
        if !changed {
            return nullable;
        }
    }
}

fn rhs_nullable(rhs: &Rhs, nullable: &HashMap<&str, bool>) -> bool {
    match &rhs.kind {
        RhsKind::Sequence(items) => items.iter().all(|i| rhs_nullable(i, nullable)),
        RhsKind::Alternative(bs) => bs.iter().any(|b| rhs_nullable(b, nullable)),
        RhsKind::Repetition(inner, kind) => {
            *kind != RepeatKind::Plus || rhs_nullable(inner, nullable)
        }
        RhsKind::NonterminalRef { rule, .. } => nullable.get(rule.as_str()).copied().unwrap_or(false),
        RhsKind::IdentRef { .. } | RhsKind::Literal { .. } | RhsKind::Constant { .. } => false,
    }
}

/// Nonterminals that may be entered at the start of `rhs` without consuming a token.
fn leftmost_refs<'a>(rhs: &'a Rhs, nullable: &HashMap<&str, bool>, out: &mut Vec<&'a str>) {
    match &rhs.kind {
        RhsKind::Sequence(items) => {
            for item in items {
                leftmost_refs(item, nullable, out);
                if !rhs_nullable(item, nullable) {
                    break;
                }
            }
        }
        RhsKind::Alternative(bs) => bs.iter().for_each(|b| leftmost_refs(b, nullable, out)),
        RhsKind::Repetition(inner, _) => leftmost_refs(inner, nullable, out),
        RhsKind::NonterminalRef { rule, .. } => out.push(rule),
        _ => {}
    }
}

/// Edges of the "may call without consuming" graph: rule body starts, plus
/// sub-productions and implementors tried as added alternatives.
fn left_call_edges(g: &GrammarAst) -> Vec<(&str, &str)> {
    let nullable = nullable_rules(g);
    let mut edges = Vec::new();
    for p in &g.productions {
        let mut refs = Vec::new();
        leftmost_refs(&p.rhs, &nullable, &mut refs);
        refs.extend(g.sub_productions(&p.name).map(|s| s.name.as_str()));
        edges.extend(refs.into_iter().map(|r| (p.name.as_str(), r)));
    }
    for i in &g.interfaces {
        edges.extend(g.implementors(&i.name).map(|s| (i.name.as_str(), s.name.as_str())));
    }
    edges
}

fn check_left_recursion(g: &GrammarAst, skip: &BTreeSet<String>, diags: &mut Vec<Diagnostic>) {
    let mut graph: DiGraph<&str, ()> = DiGraph::new();
    let mut index: HashMap<&str, NodeIndex> = HashMap::new();
    let mut positions: HashMap<&str, Pos> = HashMap::new();
    for (name, pos) in g
        .productions
        .iter()
        .map(|p| (p.name.as_str(), p.pos))
        .chain(g.interfaces.iter().map(|i| (i.name.as_str(), i.pos)))
    {
        index.insert(name, graph.add_node(name));
        positions.insert(name, pos);
    }
    for (from, to) in left_call_edges(g) {
        if let (Some(&a), Some(&b)) = (index.get(from), index.get(to)) {
            graph.update_edge(a, b, ());
        }
    }
    for scc in tarjan_scc(&graph) {
        let recursive = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if !recursive {
            continue;
        }
        for n in scc {
            let name = graph[n];
            if skip.contains(name) {
                continue;
            }
            diags.push(Diagnostic::error(positions[name], format!("left recursion on {name}")));
        }
    }
}

/// Member names visible on a class or interface: own syntax, `ast` blocks,
/// and everything inherited.
fn visible_members(g: &GrammarAst, type_name: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut stack = vec![type_name.to_string()];
    while let Some(t) = stack.pop() {
        if !seen.insert(t.clone()) {
            continue;
        }
        if let Some(p) = g.production(&t) {
            let inf = infer_members(p, g);
            out.extend(inf.attributes.into_iter().map(|a| a.name));
            out.extend(inf.compositions.into_iter().map(|c| c.name));
            stack.extend(p.super_rule.clone());
            stack.extend(p.interfaces.iter().cloned());
        }
        for block in g.ast_blocks.iter().filter(|b| b.target == t) {
            out.extend(block.attributes.iter().map(|a| a.name.clone()));
        }
    }
    out
}

fn is_subtype(g: &GrammarAst, sub: &str, sup: &str) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack = vec![sub];
    while let Some(t) = stack.pop() {
        if t == sup {
            return true;
        }
        if !seen.insert(t) {
            continue;
        }
        if let Some(p) = g.production(t) {
            stack.extend(p.super_rule.as_deref());
            stack.extend(p.interfaces.iter().map(String::as_str));
        }
    }
    false
}

fn check_associations(g: &GrammarAst, diags: &mut Vec<Diagnostic>) {
    let is_type = |n: &str| g.production(n).is_some() || g.interface(n).is_some();
    for a in &g.associations {
        for class in [&a.source_class, &a.target_class] {
            if !is_type(class) {
                diags.push(Diagnostic::error(a.pos, format!("unknown class {class} in association")));
            }
        }
    }
    let mut roles_seen: HashMap<&str, Pos> = HashMap::new();
    for spec in &g.concepts {
        if let Some(first) = roles_seen.insert(&spec.role, spec.pos) {
            diags.push(Diagnostic::error(
                spec.pos,
                format!("role {} is already resolved by the entry at {first}", spec.role),
            ));
        }
        let mut paths_ok = true;
        for path in [&spec.source, &spec.target] {
            if !is_type(&path.class) {
                diags.push(Diagnostic::error(spec.pos, format!("unknown class {} in reference path", path.class)));
                paths_ok = false;
            } else if !visible_members(g, &path.class).contains(&path.attribute) {
                diags.push(Diagnostic::error(spec.pos, format!("unknown attribute {path}")));
                paths_ok = false;
            }
        }
        match g.associations.iter().find(|a| a.source_role == spec.role) {
            None => diags.push(Diagnostic::error(
                spec.pos,
                format!("concept role {} does not name an association", spec.role),
            )),
            Some(a) if paths_ok => {
                if !is_subtype(g, &spec.source.class, &a.source_class)
                    || !is_subtype(g, &spec.target.class, &a.target_class)
                {
                    diags.push(Diagnostic::error(
                        spec.pos,
                        format!(
                            "reference {} resolves {} -> {}, but the association connects {} -> {}",
                            spec.role, spec.source.class, spec.target.class, a.source_class, a.target_class
                        ),
                    ));
                }
            }
            Some(_) => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    fn diags(src: &str) -> Vec<String> {
        validate_grammar(&parse_grammar(src).unwrap()).into_iter().map(|d| d.message).collect()
    }

    #[test]
    fn undefined_nonterminal() {
        assert_eq!(diags("grammar G { A = B; }"), vec!["undefined nonterminal B"]);
    }

    #[test]
    fn direct_left_recursion() {
        assert_eq!(diags(r#"grammar G { A = A "a"; }"#), vec!["left recursion on A"]);
    }

    #[test]
    fn indirect_left_recursion_through_nullable_prefix() {
        let d = diags(r#"grammar G { A = X? B "a"; B = A "b" | "c"; X = "x"; }"#);
        assert_eq!(d, vec!["left recursion on A", "left recursion on B"]);
    }

    #[test]
    fn right_recursion_is_fine() {
        assert!(diags(r#"grammar G { A = "a" A | "b"; }"#).is_empty());
    }

    #[test]
    fn left_recursion_through_inheritance() {
        let d = diags(r#"grammar G { S = "s"; A extends S = S "x"; }"#);
        assert_eq!(d, vec!["left recursion on S", "left recursion on A"]);
    }

    #[test]
    fn extends_cycle() {
        let d = diags(r#"grammar G { A extends B = "a"; B extends A = "b"; }"#);
        assert_eq!(d, vec!["extends cycle: A -> B -> A"]);
    }

    #[test]
    fn bad_inheritance_targets() {
        let d = diags(r#"grammar G { interface I; A extends I = "a"; B implements J = "b"; }"#);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn concept_paths_are_checked() {
        let d = diags(
            "grammar G { A = from:IDENT; B = name:IDENT; association { A.b * <-> 1 B; } \
             concept simplereference { b: A.nope -> B.name; c: A.from -> C.name; } }",
        );
        assert!(d.contains(&"unknown attribute A.nope".to_string()), "{d:?}");
        assert!(d.contains(&"unknown class C in reference path".to_string()), "{d:?}");
        assert!(d.contains(&"concept role c does not name an association".to_string()), "{d:?}");
    }

    #[test]
    fn empty_ident_pattern() {
        let d = diags("grammar G { ident E ('a')* ; A = e:E; }");
        assert_eq!(d, vec!["pattern of ident E also matches the empty string"]);
    }
}
