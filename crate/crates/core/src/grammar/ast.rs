use std::fmt;

use crate::diag::Pos;
use crate::grammar::pattern::Pattern;

/// Parse tree of one grammar file.
#[derive(Debug, Clone, PartialEq)]
pub struct GrammarAst {
    pub package: Option<String>,
    pub name: String,
    pub pos: Pos,
    pub idents: Vec<IdentDef>,
    pub productions: Vec<Production>,
    pub interfaces: Vec<InterfaceDecl>,
    pub ast_blocks: Vec<AstBlock>,
    pub associations: Vec<AssociationDecl>,
    pub concepts: Vec<ReferenceSpec>,
}

impl GrammarAst {
    pub fn production(&self, name: &str) -> Option<&Production> {
        self.productions.iter().find(|p| p.name == name)
    }

    pub fn interface(&self, name: &str) -> Option<&InterfaceDecl> {
        self.interfaces.iter().find(|i| i.name == name)
    }

    pub fn ident(&self, name: &str) -> Option<&IdentDef> {
        self.idents.iter().find(|i| i.name == name)
    }

    /// Names usable as ident references: declared idents plus the
    /// predefined `IDENT` and `STRING`.
    pub fn is_ident_name(&self, name: &str) -> bool {
        name == IDENT || name == STRING || self.ident(name).is_some()
    }

    pub fn start_rule(&self) -> Option<&Production> {
        self.productions.first()
    }

    /// Productions that directly extend `name`, in declaration order.
    pub fn sub_productions<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Production> + 'a {
        self.productions.iter().filter(move |p| p.super_rule.as_deref() == Some(name))
    }

    /// Productions that directly implement interface `name`, in declaration order.
    pub fn implementors<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Production> + 'a {
        self.productions.iter().filter(move |p| p.interfaces.iter().any(|i| i == name))
    }
}

pub const IDENT: &str = "IDENT";
pub const STRING: &str = "STRING";

#[derive(Debug, Clone, PartialEq)]
pub struct IdentDef {
    pub name: String,
    pub pattern: Pattern,
    pub transform: Transform,
    pub pos: Pos,
}

impl IdentDef {
    /// The builtin applied when lexing this ident. Opaque bodies are looked up
    /// by ident name in the builtin registry first, then by their declared
    /// result type.
    pub fn effective_transform(&self) -> Option<BuiltinTransform> {
        match &self.transform {
            Transform::Builtin(b) => Some(*b),
            Transform::Opaque { result_type, .. } => {
                BuiltinTransform::from_name(&self.name.to_lowercase())
                    .or_else(|| BuiltinTransform::from_result_type(result_type))
            }
        }
    }
}

/// Value conversion attached to an ident definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transform {
    Builtin(BuiltinTransform),
    /// Host-language conversion code, kept verbatim and never executed.
    Opaque { param: String, result_type: String, body: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinTransform {
    String,
    Int,
    Float,
    Cardinality,
}

impl BuiltinTransform {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "string" => Some(BuiltinTransform::String),
            "int" => Some(BuiltinTransform::Int),
            "float" => Some(BuiltinTransform::Float),
            "cardinality" => Some(BuiltinTransform::Cardinality),
            _ => None,
        }
    }

    /// Builtin matching a host-language result type name.
    pub fn from_result_type(ty: &str) -> Option<Self> {
        match ty {
            "String" | "string" => Some(BuiltinTransform::String),
            "int" | "Integer" | "long" | "Long" => Some(BuiltinTransform::Int),
            "float" | "Float" | "double" | "Double" => Some(BuiltinTransform::Float),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BuiltinTransform::String => "string",
            BuiltinTransform::Int => "int",
            BuiltinTransform::Float => "float",
            BuiltinTransform::Cardinality => "cardinality",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Production {
    pub name: String,
    pub super_rule: Option<String>,
    pub interfaces: Vec<String>,
    pub rhs: Rhs,
    pub pos: Pos,
}

/// A right-hand-side node with its source position.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    pub kind: RhsKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RepeatKind {
    Star,
    Plus,
    Optional,
}

impl RepeatKind {
    pub fn symbol(self) -> char {
        match self {
            RepeatKind::Star => '*',
            RepeatKind::Plus => '+',
            RepeatKind::Optional => '?',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RhsKind {
    Sequence(Vec<Rhs>),
    Alternative(Vec<Rhs>),
    Repetition(Box<Rhs>, RepeatKind),
    NonterminalRef { label: Option<String>, rule: String },
    IdentRef { label: Option<String>, ident: String },
    /// `keyword` records a leading `!`; it carries no extra meaning.
    Literal { text: String, keyword: bool },
    Constant { label: String, literals: Vec<String> },
}

impl Rhs {
    pub fn new(kind: RhsKind, pos: Pos) -> Self {
        Rhs { kind, pos }
    }

    /// Pre-order walk over this node and all descendants.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Rhs)) {
        f(self);
        match &self.kind {
            RhsKind::Sequence(items) | RhsKind::Alternative(items) => {
                items.iter().for_each(|i| i.walk(f))
            }
            RhsKind::Repetition(inner, _) => inner.walk(f),
            _ => {}
        }
    }
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RhsKind::Sequence(items) => {
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    if matches!(it.kind, RhsKind::Alternative(_)) {
                        write!(f, "({it})")?;
                    } else {
                        write!(f, "{it}")?;
                    }
                }
                Ok(())
            }
            RhsKind::Alternative(branches) => {
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{b}")?;
                }
                Ok(())
            }
            RhsKind::Repetition(inner, kind) => match inner.kind {
                RhsKind::Sequence(_) | RhsKind::Alternative(_) => {
                    write!(f, "({inner}){}", kind.symbol())
                }
                _ => write!(f, "{inner}{}", kind.symbol()),
            },
            RhsKind::NonterminalRef { label, rule: name }
            | RhsKind::IdentRef { label, ident: name } => match label {
                Some(l) => write!(f, "{l}:{name}"),
                None => f.write_str(name),
            },
            RhsKind::Literal { text, keyword } => {
                write!(f, "{}{:?}", if *keyword { "!" } else { "" }, text)
            }
            RhsKind::Constant { label, literals } => {
                let lits: Vec<String> = literals.iter().map(|l| format!("{l:?}")).collect();
                write!(f, "{label}:[{}]", lits.join("|"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceDecl {
    pub name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstBlock {
    pub target: String,
    pub attributes: Vec<AstAttribute>,
    pub methods: Vec<AstMethod>,
    pub pos: Pos,
}

/// Extra member declared in an `ast` block: `name:Type` with an optional
/// `*`, `+` or `?` suffix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstAttribute {
    pub name: String,
    pub type_name: String,
    pub repeat: Option<RepeatKind>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstMethod {
    pub signature: String,
    pub body: String,
    pub pos: Pos,
}

/// Allowed link count at one association end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Multiplicity {
    pub lo: u32,
    /// `None` is unbounded.
    pub hi: Option<u32>,
}

impl Multiplicity {
    pub const ONE: Multiplicity = Multiplicity { lo: 1, hi: Some(1) };
    pub const MANY: Multiplicity = Multiplicity { lo: 0, hi: None };

    pub fn range(lo: u32, hi: Option<u32>) -> Option<Self> {
        match hi {
            Some(h) if h < lo => None,
            _ => Some(Multiplicity { lo, hi }),
        }
    }

    pub fn admits(&self, count: usize) -> bool {
        count >= self.lo as usize && self.hi.is_none_or(|h| count <= h as usize)
    }

    pub fn is_unbounded_many(&self) -> bool {
        self.lo == 0 && self.hi.is_none()
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.lo, self.hi) {
            (0, None) => f.write_str("*"),
            (lo, None) => write!(f, "{lo}..*"),
            (lo, Some(hi)) if lo == hi => write!(f, "{lo}"),
            (lo, Some(hi)) => write!(f, "{lo}..{hi}"),
        }
    }
}

impl serde::Serialize for Multiplicity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `Src.role srcMult <-> tgtMult Tgt[.role] [mult]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationDecl {
    pub source_class: String,
    pub source_role: String,
    /// Links per target object (the multiplicity written next to the source).
    pub source_mult: Multiplicity,
    pub target_class: String,
    pub target_role: String,
    /// Links per source object (the multiplicity written next to the target).
    pub target_mult: Multiplicity,
    pub pos: Pos,
}

/// `Class.attribute`
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize)]
pub struct AttrPath {
    pub class: String,
    pub attribute: String,
}

impl fmt::Display for AttrPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class, self.attribute)
    }
}

/// One `simplereference` entry: `role: Src.attr -> Tgt.attr;`
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ReferenceSpec {
    pub role: String,
    pub source: AttrPath,
    pub target: AttrPath,
    #[serde(skip)]
    pub pos: Pos,
}
