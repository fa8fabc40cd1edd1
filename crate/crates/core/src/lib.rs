//! A grammar-driven language workbench.
//!
//! One grammar file defines both the concrete syntax of a textual language
//! and its abstract syntax: productions become classes, identifiers become
//! typed attributes, nonterminals become compositions, and `association`
//! blocks add name-resolved links between nodes. From the grammar this crate
//! derives a [`metamodel::Schema`], a lexer and a packrat parser, and turns
//! model files into linked, schema-conformant trees.

pub mod cli;
pub mod diag;
pub mod engine;
pub mod export;
pub mod grammar;
pub mod metamodel;
pub mod pipeline;
pub mod resolve;

pub use diag::{Diagnostic, Diagnostics, Pos, Severity};
pub use pipeline::{process_all, process_all_sequential, Language, Processed};
