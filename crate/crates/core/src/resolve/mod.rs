//! Name-based resolution of associations into links between model nodes.

mod links;
mod symbols;

pub use links::{
    check_multiplicities, direct_successors, resolve_links, AssociationLinks, LinkTable, NodeInfo,
    ResolveError,
};
pub use symbols::{build_symbol_table, Lookup, Namespace, Resolver, SymbolTable};
