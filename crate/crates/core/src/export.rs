//! JSON graph documents for resolved models: nodes in pre-order with their
//! composition children, plus the association links between them.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::diag::{Diagnostic, Pos};
use crate::engine::{ModelNode, ModelTree, NodeId, Slot, Value};
use crate::metamodel::{Cardinality, Member, Schema, ValueType};
use crate::resolve::{AssociationLinks, LinkTable, NodeInfo};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub class: String,
    pub id: usize,
    pub attributes: IndexMap<String, Json>,
    pub children: IndexMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LinkDoc {
    /// `Source.role` of the association.
    pub association: String,
    pub role: String,
    pub source_id: usize,
    pub target_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelGraphDocument {
    pub nodes: Vec<NodeDoc>,
    pub links: Vec<LinkDoc>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ModelGraphDocument {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}

/// Builds the graph document. Only forward links are listed; the opposite
/// direction is their inverse.
pub fn export_model(tree: &ModelTree, links: &LinkTable, diagnostics: &[Diagnostic]) -> ModelGraphDocument {
    let nodes = tree.iter().map(node_doc).collect();
    let mut link_docs: Vec<LinkDoc> = links
        .associations
        .iter()
        .flat_map(|a| {
            let id = a.id();
            let role = a.association.forward.role.clone();
            a.pairs().map(move |(s, t)| LinkDoc {
                association: id.clone(),
                role: role.clone(),
                source_id: s.0,
                target_id: t.0,
            })
        })
        .collect();
    link_docs.sort();
    ModelGraphDocument { nodes, links: link_docs, diagnostics: diagnostics.to_vec() }
}

fn node_doc(n: &ModelNode) -> NodeDoc {
    let attributes = n
        .attributes
        .iter()
        .map(|(k, slot)| (k.clone(), serde_json::to_value(slot).expect("slot serializes")))
        .collect();
    let mut children: IndexMap<String, Vec<usize>> =
        n.composition_members.iter().map(|m| (m.clone(), Vec::new())).collect();
    for (member, child) in &n.children {
        children.entry(member.clone()).or_default().push(child.0);
    }
    NodeDoc { class: n.class.clone(), id: n.id.0, attributes, children }
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("node {0}: {1}")]
    Node(usize, String),
    #[error("link {0:?}: {1}")]
    Link(LinkDoc, String),
}

/// Rebuilds a tree and its links from a document. Source positions are not
/// part of the document and come back as defaults.
pub fn read_model(json: &str, schema: &Schema) -> Result<(ModelTree, LinkTable), ReadError> {
    let doc: ModelGraphDocument = serde_json::from_str(json)?;
    import_model(&doc, schema)
}

pub fn import_model(doc: &ModelGraphDocument, schema: &Schema) -> Result<(ModelTree, LinkTable), ReadError> {
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (i, nd) in doc.nodes.iter().enumerate() {
        if nd.id != i {
            return Err(ReadError::Node(nd.id, format!("expected id {i}")));
        }
        let mut attributes = IndexMap::new();
        for (name, raw) in &nd.attributes {
            let Some(Member::Attribute(a)) = schema.member(&nd.class, name) else {
                return Err(ReadError::Node(i, format!("unknown attribute `{name}`")));
            };
            let slot = decode_slot(raw, a.cardinality, &a.value_type)
                .ok_or_else(|| ReadError::Node(i, format!("bad value for `{name}`")))?;
            attributes.insert(name.clone(), slot);
        }
        let mut children = Vec::new();
        for (member, ids) in &nd.children {
            for &c in ids {
                if c <= i || c >= doc.nodes.len() {
                    return Err(ReadError::Node(i, format!("bad child id {c}")));
                }
                children.push((member.clone(), NodeId(c)));
            }
        }
        // Children were grouped by member; restore pre-order.
        children.sort_by_key(|(_, c)| *c);
        nodes.push(ModelNode {
            id: NodeId(i),
            class: nd.class.clone(),
            attributes,
            attribute_positions: IndexMap::new(),
            children,
            composition_members: nd.children.keys().cloned().collect(),
            parent: None,
            pos: Pos::default(),
        });
    }
    for i in 0..nodes.len() {
        for (_, c) in nodes[i].children.clone() {
            if nodes[c.0].parent.replace(NodeId(i)).is_some() {
                return Err(ReadError::Node(c.0, "has two parents".into()));
            }
        }
    }
    let tree = ModelTree { nodes };

    let mut table = LinkTable::default();
    for assoc in &schema.associations {
        let mut links = AssociationLinks {
            association: assoc.clone(),
            resolved: schema.references.iter().any(|r| r.role == assoc.forward.role),
            forward: BTreeMap::new(),
            opposite: BTreeMap::new(),
            unresolved: BTreeSet::new(),
        };
        for (end, map) in [(&assoc.forward, &mut links.forward), (&assoc.opposite, &mut links.opposite)] {
            for n in tree.instances_of(schema, &end.class) {
                map.insert(n.id, Vec::new());
                table.nodes.insert(n.id, NodeInfo { class: n.class.clone(), pos: n.pos });
            }
        }
        for l in doc.links.iter().filter(|l| l.association == assoc.id()) {
            let (s, t) = (NodeId(l.source_id), NodeId(l.target_id));
            if !links.forward.contains_key(&s) || !links.opposite.contains_key(&t) {
                return Err(ReadError::Link(l.clone(), "endpoint outside the association".into()));
            }
            links.forward.entry(s).or_default().push(t);
            links.opposite.entry(t).or_default().push(s);
        }
        for list in links.forward.values_mut().chain(links.opposite.values_mut()) {
            list.sort();
        }
        table.associations.push(links);
    }
    if let Some(l) = doc.links.iter().find(|l| schema.associations.iter().all(|a| a.id() != l.association)) {
        return Err(ReadError::Link(l.clone(), "unknown association".into()));
    }
    Ok((tree, table))
}

fn decode_value(raw: &Json, ty: &ValueType) -> Option<Value> {
    Some(match ty {
        ValueType::String => Value::Str(raw.as_str()?.to_string()),
        ValueType::Enum(_) => Value::Enum(raw.as_str()?.to_string()),
        ValueType::Int => Value::Int(raw.as_i64()?),
        ValueType::Float => Value::Float(raw.as_f64()?),
        ValueType::Boolean => Value::Bool(raw.as_bool()?),
    })
}

fn decode_slot(raw: &Json, card: Cardinality, ty: &ValueType) -> Option<Slot> {
    match (card, raw) {
        (_, Json::Null) => Some(Slot::Absent),
        (Cardinality::List, Json::Array(items)) => {
            items.iter().map(|v| decode_value(v, ty)).collect::<Option<_>>().map(Slot::List)
        }
        (Cardinality::List, _) => None,
        (_, v) => decode_value(v, ty).map(Slot::Single),
    }
}
