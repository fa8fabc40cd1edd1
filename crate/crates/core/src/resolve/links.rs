use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{Diagnostic, Pos};
use crate::engine::{ModelTree, NodeId};
use crate::grammar::Multiplicity;
use crate::metamodel::{AssociationDef, Schema};
use crate::resolve::symbols::{attr_pos, Lookup, Resolver};

/// Links of one association. Every node of the participating classes has an
/// entry, possibly empty; lists are ordered by the position of the other end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationLinks {
    pub association: AssociationDef,
    /// False when no reference concept fills this association.
    pub resolved: bool,
    pub forward: BTreeMap<NodeId, Vec<NodeId>>,
    pub opposite: BTreeMap<NodeId, Vec<NodeId>>,
    /// Source nodes whose reference could not be resolved.
    pub unresolved: BTreeSet<NodeId>,
}

impl AssociationLinks {
    pub fn id(&self) -> String {
        self.association.id()
    }

    /// All (source, target) pairs of the forward direction.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.forward.iter().flat_map(|(s, ts)| ts.iter().map(move |t| (*s, *t)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInfo {
    pub class: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkTable {
    pub associations: Vec<AssociationLinks>,
    pub nodes: BTreeMap<NodeId, NodeInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("unknown role `{0}`")]
    UnknownRole(String),
}

impl LinkTable {
    pub fn association(&self, id: &str) -> Option<&AssociationLinks> {
        self.associations.iter().find(|a| a.id() == id)
    }

    /// Nodes reached from `node` over `role`, which may name either end of
    /// an association. A node outside the role's owning class has none.
    pub fn targets(&self, node: NodeId, role: &str) -> Result<&[NodeId], ResolveError> {
        let mut known = false;
        for a in &self.associations {
            let map = if a.association.forward.role == role {
                &a.forward
            } else if a.association.opposite.role == role {
                &a.opposite
            } else {
                continue;
            };
            known = true;
            if let Some(ts) = map.get(&node) {
                return Ok(ts);
            }
        }
        if known {
            Ok(&[])
        } else {
            Err(ResolveError::UnknownRole(role.to_string()))
        }
    }

    pub fn link_count(&self) -> usize {
        self.associations.iter().map(|a| a.pairs().count()).sum()
    }
}

/// Fills every association that a reference concept names. Unresolved
/// names are reported at the referencing attribute.
pub fn resolve_links<R: Resolver + ?Sized>(
    tree: &ModelTree,
    schema: &Schema,
    resolver: &R,
) -> (LinkTable, Vec<Diagnostic>) {
    let mut table = LinkTable::default();
    let mut diags = Vec::new();
    for assoc in &schema.associations {
        let mut links = AssociationLinks {
            association: assoc.clone(),
            resolved: false,
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
        for spec in schema.references.iter().filter(|r| r.role == assoc.forward.role) {
            links.resolved = true;
            for node in tree.instances_of(schema, &spec.source.class) {
                let Some(name) = node.str_attr(&spec.source.attribute) else { continue };
                match resolver.lookup(spec, node, name) {
                    Lookup::Found(target) => {
                        links.forward.entry(node.id).or_default().push(target);
                        links.opposite.entry(target).or_default().push(node.id);
                        let t = tree.node(target);
                        table.nodes.entry(target).or_insert(NodeInfo { class: t.class.clone(), pos: t.pos });
                    }
                    Lookup::Missing => {
                        links.unresolved.insert(node.id);
                        diags.push(Diagnostic::error(
                            attr_pos(node, &spec.source.attribute),
                            format!("unresolved reference {name}"),
                        ));
                    }
                    Lookup::Ambiguous => {
                        links.unresolved.insert(node.id);
                    }
                }
            }
        }
        for list in links.forward.values_mut().chain(links.opposite.values_mut()) {
            list.sort();
            list.dedup();
        }
        table.associations.push(links);
    }
    (table, diags)
}

fn violation(info: Option<&NodeInfo>, node: NodeId, role: &str, count: usize, m: &Multiplicity) -> Diagnostic {
    let (class, pos) = info.map_or(("node", Pos::default()), |i| (i.class.as_str(), i.pos));
    Diagnostic::error(
        pos,
        format!("{class} {node} has {count} link(s) for role {role}, expected {m}"),
    )
}

/// Checks link counts against both ends of every resolved association.
/// Nodes whose own reference failed are skipped, and lower bounds on the
/// opposite end are not enforced while any reference of the association is
/// unresolved, so one bad name yields one diagnostic.
pub fn check_multiplicities(links: &LinkTable, schema: &Schema) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for a in links.associations.iter().filter(|a| a.resolved) {
        let def = schema
            .associations
            .iter()
            .find(|d| d.id() == a.id())
            .unwrap_or(&a.association);
        let fwd = &def.forward;
        for (node, ts) in &a.forward {
            if a.unresolved.contains(node) {
                continue;
            }
            if !fwd.multiplicity.admits(ts.len()) {
                out.push(violation(links.nodes.get(node), *node, &fwd.role, ts.len(), &fwd.multiplicity));
            }
        }
        let opp = &def.opposite;
        for (node, ss) in &a.opposite {
            let below = ss.len() < opp.multiplicity.lo as usize;
            if below && !a.unresolved.is_empty() {
                continue;
            }
            if !opp.multiplicity.admits(ss.len()) {
                out.push(violation(links.nodes.get(node), *node, &opp.role, ss.len(), &opp.multiplicity));
            }
        }
    }
    out.sort_by_key(|d| d.pos);
    out
}

/// `{ m | t in links(node, out_role), m in links(t, through_role) }`
pub fn direct_successors(
    node: NodeId,
    out_role: &str,
    through_role: &str,
    links: &LinkTable,
) -> Result<BTreeSet<NodeId>, ResolveError> {
    let mut out = BTreeSet::new();
    // Check the second role even when the first yields nothing.
    links.targets(node, through_role)?;
    for t in links.targets(node, out_role)? {
        out.extend(links.targets(*t, through_role)?);
    }
    Ok(out)
}
