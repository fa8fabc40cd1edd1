//! Derivation of the abstract syntax (classes, attributes, compositions,
//! enumerations, associations) from a grammar.

mod derive;
pub mod occurrence;
mod render;
mod schema;

pub use derive::{constants_to_members, derive_schema, ident_value_type, infer_members, MemberInference};
pub use render::{export_schema, SchemaFormat};
pub use schema::*;
