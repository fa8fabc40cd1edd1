use std::collections::BTreeSet;

use indexmap::IndexMap;

use crate::diag::{Diagnostic, Pos};
use crate::engine::{ModelNode, ModelTree, NodeId};
use crate::grammar::{AttrPath, ReferenceSpec};
use crate::metamodel::Schema;

/// Outcome of looking up a referencing name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup {
    Found(NodeId),
    Missing,
    /// The name is defined more than once; no link is made.
    Ambiguous,
}

/// Strategy for finding the node a name refers to. [`SymbolTable`] is the
/// flat, file-wide implementation.
pub trait Resolver {
    fn lookup(&self, spec: &ReferenceSpec, from: &ModelNode, name: &str) -> Lookup;
}

/// Definitions visible under one target path (`Class.attribute`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Namespace {
    pub entries: IndexMap<String, NodeId>,
    pub ambiguous: BTreeSet<String>,
}

/// File-wide unique names, one namespace per distinct target path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    pub namespaces: IndexMap<AttrPath, Namespace>,
}

impl SymbolTable {
    pub fn namespace(&self, target: &AttrPath) -> Option<&Namespace> {
        self.namespaces.get(target)
    }
}

impl Resolver for SymbolTable {
    fn lookup(&self, spec: &ReferenceSpec, _from: &ModelNode, name: &str) -> Lookup {
        let Some(ns) = self.namespaces.get(&spec.target) else { return Lookup::Missing };
        if ns.ambiguous.contains(name) {
            Lookup::Ambiguous
        } else {
            ns.entries.get(name).map_or(Lookup::Missing, |&id| Lookup::Found(id))
        }
    }
}

pub(crate) fn attr_pos(node: &ModelNode, attr: &str) -> Pos {
    node.attribute_positions
        .get(attr)
        .and_then(|ps| ps.first().copied())
        .unwrap_or(node.pos)
}

/// Collects the defining names of every spec's target path. A name defined
/// twice is reported once per extra definition and becomes unresolvable.
pub fn build_symbol_table(
    tree: &ModelTree,
    schema: &Schema,
    specs: &[ReferenceSpec],
) -> (SymbolTable, Vec<Diagnostic>) {
    let mut table = SymbolTable::default();
    let mut diags = Vec::new();
    for spec in specs {
        if table.namespaces.contains_key(&spec.target) {
            continue;
        }
        let mut ns = Namespace::default();
        let mut first_pos: IndexMap<&str, Pos> = IndexMap::new();
        for node in tree.instances_of(schema, &spec.target.class) {
            let Some(name) = node.str_attr(&spec.target.attribute) else { continue };
            let pos = attr_pos(node, &spec.target.attribute);
            match first_pos.get(name) {
                Some(first) => {
                    diags.push(Diagnostic::error(
                        pos,
                        format!("duplicate definition {name} (first defined at {first})"),
                    ));
                    ns.ambiguous.insert(name.to_string());
                    ns.entries.shift_remove(name);
                }
                None => {
                    first_pos.insert(name, pos);
                    ns.entries.insert(name.to_string(), node.id);
                }
            }
        }
        table.namespaces.insert(spec.target.clone(), ns);
    }
    (table, diags)
}
