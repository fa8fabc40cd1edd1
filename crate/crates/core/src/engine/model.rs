//! Schema-typed model trees.

use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use crate::diag::{Diagnostic, Pos};
use crate::engine::lexer::Value;
use crate::metamodel::{Cardinality, Member, Schema, ValueType};

/// Index of a node within its [`ModelTree`]; equals the node's pre-order rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Value(s) stored for one attribute.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Slot {
    Single(Value),
    List(Vec<Value>),
    /// An optional member that was not matched; serialized as `null`.
    Absent,
}

impl Slot {
    pub fn single(&self) -> Option<&Value> {
        match self {
            Slot::Single(v) => Some(v),
            _ => None,
        }
    }

    pub fn values(&self) -> &[Value] {
        match self {
            Slot::Single(v) => std::slice::from_ref(v),
            Slot::List(vs) => vs,
            Slot::Absent => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelNode {
    pub id: NodeId,
    /// Most-derived class: the production that actually matched.
    pub class: String,
    pub attributes: IndexMap<String, Slot>,
    /// Position of each attribute value, parallel to [`Slot::values`].
    pub attribute_positions: IndexMap<String, Vec<Pos>>,
    /// Composition children as (member, child) in textual order.
    pub children: Vec<(String, NodeId)>,
    /// Composition members of the class; lists with no children are present
    /// here so they can be reported as empty.
    pub composition_members: Vec<String>,
    pub parent: Option<NodeId>,
    pub pos: Pos,
}

impl ModelNode {
    pub fn attr(&self, name: &str) -> Option<&Slot> {
        self.attributes.get(name)
    }

    /// The string value of a single-valued attribute.
    pub fn str_attr(&self, name: &str) -> Option<&str> {
        self.attr(name).and_then(Slot::single).and_then(Value::as_str)
    }

    pub fn children_of<'a>(&'a self, member: &'a str) -> impl Iterator<Item = NodeId> + 'a {
        self.children.iter().filter(move |(m, _)| m == member).map(|(_, id)| *id)
    }
}

/// An arena of nodes; node 0 is the root and ids follow pre-order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTree {
    pub nodes: Vec<ModelNode>,
}

impl ModelTree {
    pub const ROOT: NodeId = NodeId(0);

    pub fn root(&self) -> &ModelNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &ModelNode {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModelNode> {
        self.nodes.iter()
    }

    /// Nodes whose class is `class` or one of its subtypes.
    pub fn instances_of<'a>(&'a self, schema: &'a Schema, class: &'a str) -> impl Iterator<Item = &'a ModelNode> {
        self.nodes.iter().filter(move |n| schema.is_subtype(&n.class, class))
    }

    pub fn walk<V: Visitor + ?Sized>(&self, v: &mut V) {
        if !self.nodes.is_empty() {
            self.walk_from(Self::ROOT, v);
        }
    }

    fn walk_from<V: Visitor + ?Sized>(&self, id: NodeId, v: &mut V) {
        let node = self.node(id);
        v.enter(self, node);
        for (_, child) in &node.children {
            self.walk_from(*child, v);
        }
        v.leave(self, node);
    }
}

/// Callbacks for a depth-first walk along compositions.
pub trait Visitor {
    fn enter(&mut self, _tree: &ModelTree, _node: &ModelNode) {}
    fn leave(&mut self, _tree: &ModelTree, _node: &ModelNode) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Pre,
    Post,
}

/// Depth-first traversal along compositions, children in textual order.
pub fn visit(tree: &ModelTree, order: Order) -> Vec<NodeId> {
    struct Collect(Order, Vec<NodeId>);
    impl Visitor for Collect {
        fn enter(&mut self, _: &ModelTree, n: &ModelNode) {
            if self.0 == Order::Pre {
                self.1.push(n.id);
            }
        }
        fn leave(&mut self, _: &ModelTree, n: &ModelNode) {
            if self.0 == Order::Post {
                self.1.push(n.id);
            }
        }
    }
    let mut c = Collect(order, Vec::with_capacity(tree.len()));
    tree.walk(&mut c);
    c.1
}

fn value_fits(schema: &Schema, ty: &ValueType, v: &Value) -> bool {
    match (ty, v) {
        (ValueType::String, Value::Str(_))
        | (ValueType::Int, Value::Int(_))
        | (ValueType::Float, Value::Float(_))
        | (ValueType::Boolean, Value::Bool(_)) => true,
        (ValueType::Enum(e), Value::Enum(lit)) => {
            schema.enum_def(e).is_some_and(|d| d.literals.contains(lit))
        }
        _ => false,
    }
}

fn shape_fits(card: Cardinality, slot: &Slot) -> bool {
    matches!(
        (card, slot),
        (Cardinality::One, Slot::Single(_) | Slot::Absent)
            | (Cardinality::Optional, Slot::Single(_) | Slot::Absent)
            | (Cardinality::List, Slot::List(_))
    )
}

/// Checks every node against its class: members exist, value shapes and
/// types match, children are typed by their composition, and required
/// members bound by the node's own production are present.
pub fn validate_instance(tree: &ModelTree, schema: &Schema) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, node) in tree.nodes.iter().enumerate() {
        let err = |msg: String| Diagnostic::error(node.pos, format!("{} {}: {msg}", node.class, node.id));
        if node.id != NodeId(i) {
            out.push(err(format!("stored at index {i}")));
        }
        if schema.class(&node.class).is_none() {
            out.push(err("unknown class".into()));
            continue;
        }
        for (name, slot) in &node.attributes {
            match schema.member(&node.class, name) {
                Some(Member::Attribute(a)) => {
                    if !shape_fits(a.cardinality, slot) {
                        out.push(err(format!("attribute `{name}` does not fit cardinality {}", a.cardinality)));
                    }
                    if let Some(v) = slot.values().iter().find(|v| !value_fits(schema, &a.value_type, v)) {
                        out.push(err(format!("attribute `{name}` holds {v}, expected {}", a.value_type)));
                    }
                }
                _ => out.push(err(format!("unknown attribute `{name}`"))),
            }
        }
        for (name, child) in &node.children {
            let Some(Member::Composition(c)) = schema.member(&node.class, name) else {
                out.push(err(format!("unknown composition `{name}`")));
                continue;
            };
            let child_node = tree.nodes.get(child.0);
            match child_node {
                Some(ch) if ch.parent == Some(node.id) => {
                    if !schema.is_subtype(&ch.class, &c.target) {
                        out.push(err(format!("child {} of `{name}` is not a {}", ch.class, c.target)));
                    }
                }
                _ => out.push(err(format!("child {child} of `{name}` is not owned by this node"))),
            }
            if c.cardinality != Cardinality::List && node.children_of(name).count() > 1 {
                out.push(err(format!("composition `{name}` holds more than one child")));
            }
        }
        for m in schema.syntax_members(&node.class) {
            if m.cardinality() != Cardinality::One || m.from_ast() {
                continue;
            }
            let present = match m {
                Member::Attribute(_) => {
                    matches!(node.attributes.get(m.name()), Some(Slot::Single(_)))
                }
                Member::Composition(_) => node.children_of(m.name()).next().is_some(),
            };
            if !present {
                out.push(err(format!("required member `{}` is missing", m.name())));
            }
        }
    }
    out
}
