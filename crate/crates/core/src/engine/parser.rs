//! Packrat interpreter over a [`NormalizedGrammar`]: ordered choice, full
//! backtracking, one memo entry per (rule, token position).

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use indexmap::IndexMap;

use crate::diag::{Diagnostic, Pos};
use crate::engine::lexer::{Token, TokenKind, Value};
use crate::engine::model::{ModelNode, ModelTree, NodeId, Slot};
use crate::engine::normalize::{CompiledAlt, Expr, NormalizedGrammar};
use crate::grammar::RepeatKind;
use crate::metamodel::{Cardinality, Member, Schema, ValueType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOptions {
    /// Disable to interpret without the memo table (same result, slower).
    pub memoize: bool,
    /// Start rule; defaults to the first production.
    pub start: Option<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { memoize: true, start: None }
    }
}

/// A matched rule before it is placed in the arena.
#[derive(Debug)]
struct PNode<'g> {
    rule: usize,
    pos: Pos,
    items: Vec<Item<'g>>,
}

#[derive(Debug, Clone)]
enum Item<'g> {
    Attr { member: &'g str, value: Value, pos: Pos },
    Constant { member: &'g str, literal: &'g str, pos: Pos },
    Child { member: &'g str, node: Rc<PNode<'g>> },
}

type Memo<'g> = HashMap<(usize, usize), Option<(Rc<PNode<'g>>, usize)>>;

struct Interp<'g, 't> {
    ng: &'g NormalizedGrammar,
    toks: &'t [Token],
    memo: Memo<'g>,
    memoize: bool,
    farthest: usize,
    expected: BTreeSet<String>,
}

impl<'g, 't> Interp<'g, 't> {
    fn pos_at(&self, i: usize) -> Pos {
        match self.toks.get(i) {
            Some(t) => t.pos,
            None => end_pos(self.toks),
        }
    }

    fn fail(&mut self, at: usize, what: impl FnOnce() -> String) {
        if at > self.farthest {
            self.farthest = at;
            self.expected.clear();
        }
        if at == self.farthest {
            self.expected.insert(what());
        }
    }

    fn rule(&mut self, r: usize, at: usize) -> Option<(Rc<PNode<'g>>, usize)> {
        if self.memoize {
            if let Some(hit) = self.memo.get(&(r, at)) {
                return hit.clone();
            }
        }
        let ng = self.ng;
        let mut result = None;
        for alt in &ng.compiled[r] {
            match alt {
                CompiledAlt::Delegate(sub) => {
                    if let Some(hit) = self.rule(*sub, at) {
                        result = Some(hit);
                        break;
                    }
                }
                CompiledAlt::Body(e) => {
                    let mut items = Vec::new();
                    if let Some(end) = self.expr(e, at, &mut items) {
                        let node = PNode { rule: r, pos: self.pos_at(at), items };
                        result = Some((Rc::new(node), end));
                        break;
                    }
                }
            }
        }
        if self.memoize {
            self.memo.insert((r, at), result.clone());
        }
        result
    }

    fn expr(&mut self, e: &'g Expr, at: usize, items: &mut Vec<Item<'g>>) -> Option<usize> {
        let mark = items.len();
        match e {
            Expr::Seq(parts) => {
                let mut p = at;
                for part in parts {
                    match self.expr(part, p, items) {
                        Some(next) => p = next,
                        None => {
                            items.truncate(mark);
                            return None;
                        }
                    }
                }
                Some(p)
            }
            Expr::Alt(branches) => {
                for b in branches {
                    if let Some(end) = self.expr(b, at, items) {
                        return Some(end);
                    }
                    items.truncate(mark);
                }
                None
            }
            Expr::Repeat(inner, RepeatKind::Optional) => {
                self.expr(inner, at, items).or_else(|| {
                    items.truncate(mark);
                    Some(at)
                })
            }
            Expr::Repeat(inner, kind) => {
                let mut p = at;
                let mut count = 0;
                loop {
                    let before = items.len();
                    match self.expr(inner, p, items) {
                        Some(next) if next > p => {
                            p = next;
                            count += 1;
                        }
                        Some(_) => {
                            // An empty iteration counts once, then the loop stops.
                            if count > 0 {
                                items.truncate(before);
                            }
                            count += 1;
                            break;
                        }
                        None => {
                            items.truncate(before);
                            break;
                        }
                    }
                }
                (*kind == RepeatKind::Star || count > 0).then_some(p)
            }
            Expr::Rule { member, rule } => {
                let (node, end) = self.rule(*rule, at)?;
                items.push(Item::Child { member, node });
                Some(end)
            }
            Expr::Ident { member, ident } => match self.toks.get(at).and_then(|t| self.ident_value(t, ident)) {
                Some(value) => {
                    items.push(Item::Attr { member, value, pos: self.toks[at].pos });
                    Some(at + 1)
                }
                None => {
                    self.fail(at, || ident.clone());
                    None
                }
            },
            Expr::Literal(text) => {
                if self.is_literal(at, text) {
                    Some(at + 1)
                } else {
                    self.fail(at, || format!("{text:?}"));
                    None
                }
            }
            Expr::Constant { member, literals } => {
                if let Some(lit) = literals.iter().find(|l| self.is_literal(at, l)) {
                    items.push(Item::Constant { member, literal: lit, pos: self.toks[at].pos });
                    return Some(at + 1);
                }
                for l in literals {
                    self.fail(at, || format!("{l:?}"));
                }
                None
            }
        }
    }

    fn is_literal(&self, at: usize, text: &str) -> bool {
        self.toks.get(at).is_some_and(|t| {
            matches!(&t.kind, TokenKind::Keyword(k) | TokenKind::Punct(k) if k == text)
        })
    }

    /// A token satisfies ident `name` if it was lexed as `name`, or if it is
    /// a non-keyword token whose lexeme `name`'s pattern also matches fully
    /// (overlapping ident definitions such as NUMBER and CARDINALITY).
    fn ident_value(&self, t: &Token, name: &str) -> Option<Value> {
        match &t.kind {
            TokenKind::Ident(k) if k == name => t.value.clone(),
            TokenKind::Keyword(_) => None,
            _ => {
                let it = self.ng.tokens.ident(name)?;
                if it.pattern.matches_exactly(&t.lexeme) {
                    it.apply(&t.lexeme).ok()
                } else {
                    None
                }
            }
        }
    }
}

fn end_pos(toks: &[Token]) -> Pos {
    match toks.last() {
        None => Pos::new(1, 1),
        Some(t) => {
            let lines = t.lexeme.matches('\n').count() as u32;
            match t.lexeme.rfind('\n') {
                Some(nl) => Pos::new(t.pos.line + lines, t.lexeme[nl + 1..].chars().count() as u32 + 1),
                None => Pos::new(t.pos.line, t.pos.column + t.lexeme.chars().count() as u32),
            }
        }
    }
}

fn describe(t: Option<&Token>) -> String {
    match t {
        None => "end of input".into(),
        Some(t) => match &t.kind {
            TokenKind::Ident(k) => k.clone(),
            TokenKind::Keyword(s) | TokenKind::Punct(s) => format!("{s:?}"),
        },
    }
}

/// Parses a token stream into a model tree. The whole stream must be
/// consumed; on failure the error sits at the farthest token reached and
/// lists what was expected there.
pub fn parse_model(
    schema: &Schema,
    ng: &NormalizedGrammar,
    tokens: &[Token],
    opts: &ParseOptions,
) -> Result<ModelTree, Diagnostic> {
    let start = match &opts.start {
        Some(name) => ng
            .rule_index(name)
            .ok_or_else(|| Diagnostic::error(Pos::new(1, 1), format!("unknown start rule {name}")))?,
        None if ng.rules.first().is_some_and(|r| !r.is_interface) => 0,
        None => return Err(Diagnostic::error(Pos::new(1, 1), "grammar has no productions")),
    };
    let mut it = Interp {
        ng,
        toks: tokens,
        memo: HashMap::new(),
        memoize: opts.memoize,
        farthest: 0,
        expected: BTreeSet::new(),
    };
    match it.rule(start, 0) {
        Some((root, end)) if end == tokens.len() => {
            let mut nodes = Vec::new();
            build(schema, ng, &root, None, &mut nodes);
            Ok(ModelTree { nodes })
        }
        result => {
            if let Some((_, end)) = result {
                it.fail(end, || "end of input".into());
            }
            let expected: Vec<String> = it.expected.iter().cloned().collect();
            let found = describe(tokens.get(it.farthest));
            Err(Diagnostic::error(
                it.pos_at(it.farthest),
                format!("{} expected, {found} found", expected.join(" or ")),
            ))
        }
    }
}

fn initial_slot(card: Cardinality, ty: &ValueType) -> Slot {
    match (card, ty) {
        (Cardinality::List, _) => Slot::List(Vec::new()),
        (_, ValueType::Boolean) => Slot::Single(Value::Bool(false)),
        _ => Slot::Absent,
    }
}

fn build(schema: &Schema, ng: &NormalizedGrammar, p: &PNode<'_>, parent: Option<NodeId>, nodes: &mut Vec<ModelNode>) -> NodeId {
    let id = NodeId(nodes.len());
    let class = ng.rules[p.rule].name.clone();
    let mut attributes = IndexMap::new();
    let mut composition_members = Vec::new();
    for m in schema.syntax_members(&class) {
        match m {
            Member::Attribute(a) => {
                attributes.insert(a.name.clone(), initial_slot(a.cardinality, &a.value_type));
            }
            Member::Composition(c) => composition_members.push(c.name.clone()),
        }
    }
    nodes.push(ModelNode {
        id,
        class: class.clone(),
        attributes: IndexMap::new(),
        attribute_positions: IndexMap::new(),
        children: Vec::new(),
        composition_members,
        parent,
        pos: p.pos,
    });

    let mut positions: IndexMap<String, Vec<Pos>> = IndexMap::new();
    let mut children = Vec::new();
    for item in &p.items {
        let (member, value, pos) = match item {
            Item::Child { member, node } => {
                let child = build(schema, ng, node, Some(id), nodes);
                children.push((member.to_string(), child));
                continue;
            }
            Item::Attr { member, value, pos } => (*member, value.clone(), *pos),
            Item::Constant { member, literal, pos } => {
                let boolean = matches!(
                    schema.member(&class, member),
                    Some(Member::Attribute(a)) if a.value_type == ValueType::Boolean
                );
                let value = if boolean { Value::Bool(true) } else { Value::Enum(literal.to_string()) };
                (*member, value, *pos)
            }
        };
        let card = schema.member(&class, member).map(|m| m.cardinality());
        let slot = attributes.entry(member.to_string()).or_insert(Slot::Absent);
        let at = positions.entry(member.to_string()).or_default();
        if card == Some(Cardinality::List) {
            if let Slot::List(vs) = slot {
                vs.push(value);
            } else {
                *slot = Slot::List(vec![value]);
            }
            at.push(pos);
        } else {
            *slot = Slot::Single(value);
            *at = vec![pos];
        }
    }
    let node = &mut nodes[id.0];
    node.attributes = attributes;
    node.attribute_positions = positions;
    node.children = children;
    id
}
