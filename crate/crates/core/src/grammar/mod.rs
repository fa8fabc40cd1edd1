//! The extended grammar format: lexing, parsing and validation.

mod ast;
mod lexer;
mod parser;
pub mod pattern;
mod validate;

pub use ast::*;
pub use parser::parse_grammar;
pub use validate::validate_grammar;
