//! Inheritance expansion: every super-production gains its sub-productions as
//! leading alternatives, and every interface becomes an ordered choice over
//! its implementors. Production bodies are left untouched.

use std::collections::HashMap;

use crate::diag::{Diagnostic, Diagnostics};
use crate::engine::lexer::{build_token_spec, TokenSpec};
use crate::grammar::{GrammarAst, RepeatKind, Rhs, RhsKind};
use crate::metamodel::occurrence::member_name;

#[derive(Debug, Clone, PartialEq)]
pub enum Alternative {
    /// Parse the named rule instead; the node keeps that rule's class.
    Delegate(String),
    /// The rule's own right-hand side.
    Body(Rhs),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormRule {
    pub name: String,
    pub is_interface: bool,
    /// Tried in order; first match wins.
    pub alternatives: Vec<Alternative>,
}

/// A grammar ready for interpretation, together with its lexer.
#[derive(Debug, Clone)]
pub struct NormalizedGrammar {
    pub rules: Vec<NormRule>,
    pub tokens: TokenSpec,
    index: HashMap<String, usize>,
    pub(crate) compiled: Vec<Vec<CompiledAlt>>,
}

#[derive(Debug, Clone)]
pub(crate) enum CompiledAlt {
    Delegate(usize),
    Body(Expr),
}

#[derive(Debug, Clone)]
pub(crate) enum Expr {
    Seq(Vec<Expr>),
    Alt(Vec<Expr>),
    Repeat(Box<Expr>, RepeatKind),
    Rule { member: String, rule: usize },
    Ident { member: String, ident: String },
    Literal(String),
    Constant { member: String, literals: Vec<String> },
}

impl NormalizedGrammar {
    pub fn rule(&self, name: &str) -> Option<&NormRule> {
        self.index.get(name).map(|&i| &self.rules[i])
    }

    pub(crate) fn rule_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Classes a parse of `name` may produce, in the order they are tried.
    pub fn classes_for(&self, name: &str) -> Vec<&str> {
        let mut out = Vec::new();
        if let Some(&i) = self.index.get(name) {
            self.collect_classes(i, &mut out);
        }
        out
    }

    fn collect_classes<'a>(&'a self, i: usize, out: &mut Vec<&'a str>) {
        for alt in &self.rules[i].alternatives {
            match alt {
                Alternative::Delegate(sub) => {
                    if let Some(&j) = self.index.get(sub.as_str()) {
                        if !out.contains(&self.rules[j].name.as_str()) {
                            self.collect_classes(j, out);
                        }
                    }
                }
                Alternative::Body(_) => {
                    let name = self.rules[i].name.as_str();
                    if !out.contains(&name) {
                        out.push(name);
                    }
                }
            }
        }
    }
}

pub fn expand_inheritance(g: &GrammarAst) -> Result<NormalizedGrammar, Diagnostics> {
    let tokens = build_token_spec(g)?;
    let mut rules = Vec::new();
    for p in &g.productions {
        let mut alternatives: Vec<Alternative> =
            g.sub_productions(&p.name).map(|s| Alternative::Delegate(s.name.clone())).collect();
        alternatives.push(Alternative::Body(p.rhs.clone()));
        rules.push(NormRule { name: p.name.clone(), is_interface: false, alternatives });
    }
    for i in &g.interfaces {
        let alternatives =
            g.implementors(&i.name).map(|p| Alternative::Delegate(p.name.clone())).collect();
        rules.push(NormRule { name: i.name.clone(), is_interface: true, alternatives });
    }
    let index: HashMap<String, usize> =
        rules.iter().enumerate().map(|(i, r)| (r.name.clone(), i)).collect();

    let mut diags = Vec::new();
    for p in &g.productions {
        p.rhs.walk(&mut |n| {
            if let RhsKind::NonterminalRef { rule, .. } = &n.kind {
                match index.get(rule.as_str()) {
                    None => diags.push(Diagnostic::error(n.pos, format!("undefined nonterminal {rule}"))),
                    Some(&j) if rules[j].alternatives.is_empty() => diags.push(Diagnostic::error(
                        n.pos,
                        format!("interface {rule} has no implementing production"),
                    )),
                    _ => {}
                }
            }
        });
    }
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }

    let compiled = rules
        .iter()
        .map(|r| {
            r.alternatives
                .iter()
                .map(|a| match a {
                    Alternative::Delegate(sub) => CompiledAlt::Delegate(index[sub.as_str()]),
                    Alternative::Body(rhs) => CompiledAlt::Body(compile(rhs, &index)),
                })
                .collect()
        })
        .collect();
    Ok(NormalizedGrammar { rules, tokens, index, compiled })
}

fn compile(rhs: &Rhs, index: &HashMap<String, usize>) -> Expr {
    let member = || member_name(rhs).unwrap_or_default();
    match &rhs.kind {
        RhsKind::Sequence(items) => Expr::Seq(items.iter().map(|i| compile(i, index)).collect()),
        RhsKind::Alternative(items) => Expr::Alt(items.iter().map(|i| compile(i, index)).collect()),
        RhsKind::Repetition(inner, kind) => Expr::Repeat(Box::new(compile(inner, index)), *kind),
        RhsKind::NonterminalRef { rule, .. } => Expr::Rule { member: member(), rule: index[rule.as_str()] },
        RhsKind::IdentRef { ident, .. } => Expr::Ident { member: member(), ident: ident.clone() },
        RhsKind::Literal { text, .. } => Expr::Literal(text.clone()),
        RhsKind::Constant { label, literals } => {
            Expr::Constant { member: label.clone(), literals: literals.clone() }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    fn ng(src: &str) -> NormalizedGrammar {
        expand_inheritance(&parse_grammar(src).unwrap()).unwrap()
    }

    #[test]
    fn plain_grammar_is_unchanged() {
        let g = parse_grammar(r#"grammar G { A = "a" b:B; B = x:IDENT; }"#).unwrap();
        let n = expand_inheritance(&g).unwrap();
        for (r, p) in n.rules.iter().zip(&g.productions) {
            assert_eq!(r.name, p.name);
            assert_eq!(r.alternatives, vec![Alternative::Body(p.rhs.clone())]);
        }
    }

    #[test]
    fn chain_is_expanded_transitively() {
        let n = ng(r#"grammar G {
            A = "a"; B extends A = "b"; C extends B = "c";
        }"#);
        let a = n.rule("A").unwrap();
        assert_eq!(a.alternatives[0], Alternative::Delegate("B".into()));
        assert!(matches!(a.alternatives[1], Alternative::Body(_)));
        assert_eq!(n.rule("B").unwrap().alternatives[0], Alternative::Delegate("C".into()));
        assert_eq!(n.classes_for("A"), ["C", "B", "A"]);
    }

    #[test]
    fn interface_is_choice_over_implementors() {
        let n = ng(r#"grammar G {
            S = Order*; X implements Order = "x"; Y implements Order = "y"; interface Order;
        }"#);
        let o = n.rule("Order").unwrap();
        assert!(o.is_interface);
        assert_eq!(
            o.alternatives,
            vec![Alternative::Delegate("X".into()), Alternative::Delegate("Y".into())]
        );
    }

    #[test]
    fn unimplemented_interface_on_rhs_is_an_error() {
        let g = parse_grammar(r#"grammar G { S = Order*; interface Order; }"#).unwrap();
        let err = expand_inheritance(&g).unwrap_err();
        assert!(err.0[0].message.contains("no implementing production"));
    }
}
