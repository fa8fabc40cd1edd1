//! Lexer and parser derived from a grammar, and the model trees they build.

mod lexer;
mod model;
mod normalize;
mod parser;

pub use lexer::{
    build_token_spec, tokenize, transform_ident, IdentToken, SkipRule, Token, TokenKind, TokenSpec,
    TokenTransform, TransformError, Value,
};
pub use model::{validate_instance, visit, ModelNode, ModelTree, NodeId, Order, Slot, Visitor};
pub use normalize::{expand_inheritance, Alternative, NormRule, NormalizedGrammar};
pub use parser::{parse_model, ParseOptions};
