//! The full pipeline from grammar text to linked models.

use crate::diag::{has_errors, Diagnostic, Diagnostics};
use crate::engine::{
    expand_inheritance, parse_model, tokenize, validate_instance, ModelTree, NormalizedGrammar,
    ParseOptions, TokenSpec,
};
use crate::export::{export_model, ModelGraphDocument};
use crate::grammar::{parse_grammar, validate_grammar, GrammarAst};
use crate::metamodel::{derive_schema, Schema};
use crate::resolve::{build_symbol_table, check_multiplicities, resolve_links, LinkTable};

/// A compiled grammar: schema, lexer and parser. Immutable and shareable
/// across threads.
#[derive(Debug, Clone)]
pub struct Language {
    pub grammar: GrammarAst,
    pub schema: Schema,
    pub normalized: NormalizedGrammar,
    /// Non-fatal findings from grammar validation.
    pub warnings: Vec<Diagnostic>,
}

impl Language {
    /// Parses, validates and compiles a grammar. On failure every finding,
    /// warnings included, is returned.
    pub fn compile(text: &str) -> Result<Language, Diagnostics> {
        let grammar = parse_grammar(text)?;
        let diags = validate_grammar(&grammar);
        if has_errors(&diags) {
            return Err(Diagnostics(diags));
        }
        let with_warnings = |mut e: Diagnostics| {
            let mut all = diags.clone();
            all.append(&mut e.0);
            all.sort_by_key(|d| d.pos);
            Diagnostics(all)
        };
        let schema = derive_schema(&grammar).map_err(with_warnings)?;
        let normalized = expand_inheritance(&grammar).map_err(with_warnings)?;
        Ok(Language { grammar, schema, normalized, warnings: diags })
    }

    pub fn tokens(&self) -> &TokenSpec {
        &self.normalized.tokens
    }

    /// Lexes and parses one model text.
    pub fn parse(&self, text: &str, opts: &ParseOptions) -> Result<ModelTree, Diagnostic> {
        let tokens = tokenize(self.tokens(), text)?;
        parse_model(&self.schema, &self.normalized, &tokens, opts)
    }

    pub fn process(&self, text: &str) -> Processed {
        self.process_with(text, &ParseOptions::default())
    }

    /// Parses, validates, resolves and checks one model. Every stage after a
    /// successful parse runs even if an earlier one reported problems.
    pub fn process_with(&self, text: &str, opts: &ParseOptions) -> Processed {
        let tree = match self.parse(text, opts) {
            Ok(t) => t,
            Err(d) => return Processed { tree: None, links: LinkTable::default(), diagnostics: vec![d] },
        };
        let mut diagnostics = validate_instance(&tree, &self.schema);
        let (symbols, mut d) = build_symbol_table(&tree, &self.schema, &self.schema.references);
        diagnostics.append(&mut d);
        let (links, mut d) = resolve_links(&tree, &self.schema, &symbols);
        diagnostics.append(&mut d);
        diagnostics.extend(check_multiplicities(&links, &self.schema));
        diagnostics.sort_by_key(|d| d.pos);
        Processed { tree: Some(tree), links, diagnostics }
    }
}

/// Result of running one model through the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Processed {
    /// Absent when lexing or parsing failed.
    pub tree: Option<ModelTree>,
    pub links: LinkTable,
    pub diagnostics: Vec<Diagnostic>,
}

impl Processed {
    pub fn has_errors(&self) -> bool {
        has_errors(&self.diagnostics)
    }

    pub fn document(&self) -> Option<ModelGraphDocument> {
        self.tree.as_ref().map(|t| export_model(t, &self.links, &self.diagnostics))
    }
}

pub fn process_all_sequential<S: AsRef<str>>(lang: &Language, texts: &[S], opts: &ParseOptions) -> Vec<Processed> {
    texts.iter().map(|t| lang.process_with(t.as_ref(), opts)).collect()
}

/// Processes several models, in parallel when the `parallel` feature is on.
/// Results are in input order either way.
#[cfg(feature = "parallel")]
pub fn process_all<S: AsRef<str> + Sync>(lang: &Language, texts: &[S], opts: &ParseOptions) -> Vec<Processed> {
    use rayon::prelude::*;
    texts.par_iter().map(|t| lang.process_with(t.as_ref(), opts)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn process_all<S: AsRef<str> + Sync>(lang: &Language, texts: &[S], opts: &ParseOptions) -> Vec<Processed> {
    process_all_sequential(lang, texts, opts)
}
