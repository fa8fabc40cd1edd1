use std::fmt;

use serde::{Serialize, Serializer};

use crate::grammar::{Multiplicity, ReferenceSpec};

/// The abstract syntax derived from a grammar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schema {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub package: Option<String>,
    pub classes: Vec<ClassDef>,
    pub interfaces: Vec<InterfaceDef>,
    pub enums: Vec<EnumDef>,
    pub associations: Vec<AssociationDef>,
    pub references: Vec<ReferenceSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cardinality {
    One,
    Optional,
    List,
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cardinality::One => "one",
            Cardinality::Optional => "optional",
            Cardinality::List => "list",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueType {
    String,
    Int,
    Float,
    Boolean,
    /// Name of a generated [`EnumDef`].
    Enum(String),
}

impl ValueType {
    pub fn name(&self) -> &str {
        match self {
            ValueType::String => "string",
            ValueType::Int => "int",
            ValueType::Float => "float",
            ValueType::Boolean => "boolean",
            ValueType::Enum(e) => e,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for ValueType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AttributeDef {
    pub name: String,
    #[serde(rename = "type")]
    pub value_type: ValueType,
    pub cardinality: Cardinality,
    /// Declared in an `ast` block: never filled by the parser.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub from_ast: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompositionDef {
    pub name: String,
    #[serde(rename = "type")]
    pub target: String,
    pub cardinality: Cardinality,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub from_ast: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodDef {
    pub signature: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassDef {
    pub name: String,
    pub super_class: Option<String>,
    pub interfaces: Vec<String>,
    pub attributes: Vec<AttributeDef>,
    pub compositions: Vec<CompositionDef>,
    /// Inherited members that this class's own syntax also binds.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub redeclared: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<MethodDef>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfaceDef {
    pub name: String,
    pub attributes: Vec<AttributeDef>,
    pub compositions: Vec<CompositionDef>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<MethodDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumDef {
    pub name: String,
    pub literals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssociationEnd {
    pub class: String,
    pub role: String,
    pub multiplicity: Multiplicity,
}

/// A bidirectional non-compositional association. The forward end is owned by
/// the source class and navigates to target objects; the opposite end is owned
/// by the target class and navigates back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssociationDef {
    pub forward: AssociationEnd,
    pub opposite: AssociationEnd,
}

impl AssociationDef {
    /// Stable identifier, `Source.forwardRole`.
    pub fn id(&self) -> String {
        format!("{}.{}", self.forward.class, self.forward.role)
    }
}

/// A member looked up by name on a class or interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Member<'a> {
    Attribute(&'a AttributeDef),
    Composition(&'a CompositionDef),
}

impl<'a> Member<'a> {
    pub fn name(&self) -> &'a str {
        match self {
            Member::Attribute(a) => &a.name,
            Member::Composition(c) => &c.name,
        }
    }

    pub fn cardinality(&self) -> Cardinality {
        match self {
            Member::Attribute(a) => a.cardinality,
            Member::Composition(c) => c.cardinality,
        }
    }

    pub fn from_ast(&self) -> bool {
        match self {
            Member::Attribute(a) => a.from_ast,
            Member::Composition(c) => c.from_ast,
        }
    }
}

impl Schema {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn interface(&self, name: &str) -> Option<&InterfaceDef> {
        self.interfaces.iter().find(|i| i.name == name)
    }

    pub fn enum_def(&self, name: &str) -> Option<&EnumDef> {
        self.enums.iter().find(|e| e.name == name)
    }

    pub fn is_type(&self, name: &str) -> bool {
        self.class(name).is_some() || self.interface(name).is_some()
    }

    /// Superclass chain starting at `class` itself.
    pub fn ancestors<'a>(&'a self, class: &str) -> Vec<&'a ClassDef> {
        let mut out: Vec<&ClassDef> = Vec::new();
        let mut cur = self.class(class);
        while let Some(c) = cur {
            if out.iter().any(|seen| seen.name == c.name) {
                break;
            }
            out.push(c);
            cur = c.super_class.as_deref().and_then(|s| self.class(s));
        }
        out
    }

    /// Reflexive subtype check across `extends` and `implements`.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sub == sup {
            return true;
        }
        self.ancestors(sub)
            .iter()
            .any(|c| c.name == sup || c.interfaces.iter().any(|i| i == sup))
    }

    /// Finds a member on a class (walking superclasses, then interfaces) or
    /// on an interface.
    pub fn member<'a>(&'a self, type_name: &str, member: &str) -> Option<Member<'a>> {
        let own = |attrs: &'a [AttributeDef], comps: &'a [CompositionDef]| {
            attrs
                .iter()
                .find(|a| a.name == member)
                .map(Member::Attribute)
                .or_else(|| comps.iter().find(|c| c.name == member).map(Member::Composition))
        };
        if let Some(i) = self.interface(type_name) {
            return own(&i.attributes, &i.compositions);
        }
        let chain = self.ancestors(type_name);
        chain
            .iter()
            .find_map(|c| own(&c.attributes, &c.compositions))
            .or_else(|| {
                chain.iter().flat_map(|c| c.interfaces.iter()).find_map(|i| {
                    self.interface(i).and_then(|i| own(&i.attributes, &i.compositions))
                })
            })
    }

    /// Members a node of `class` carries from its own production: own
    /// non-`ast` members plus redeclared inherited ones.
    pub fn syntax_members<'a>(&'a self, class: &str) -> Vec<Member<'a>> {
        let Some(c) = self.class(class) else { return Vec::new() };
        let mut out: Vec<Member<'a>> = c
            .attributes
            .iter()
            .filter(|a| !a.from_ast)
            .map(Member::Attribute)
            .chain(c.compositions.iter().filter(|m| !m.from_ast).map(Member::Composition))
            .collect();
        for name in &c.redeclared {
            let inherited = c
                .super_class
                .as_deref()
                .and_then(|s| self.member(s, name))
                .or_else(|| self.member(class, name));
            out.extend(inherited);
        }
        out
    }

    pub fn association_by_role(&self, role: &str) -> Vec<&AssociationDef> {
        self.associations
            .iter()
            .filter(|a| a.forward.role == role || a.opposite.role == role)
            .collect()
    }
}
