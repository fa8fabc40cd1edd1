use indexmap::IndexMap;

use crate::diag::{Diagnostic, Diagnostics, Pos};
use crate::grammar::{
    AstAttribute, BuiltinTransform, GrammarAst, Production, RepeatKind, Rhs, RhsKind, IDENT,
    STRING,
};
use crate::metamodel::occurrence::{member_name, occurrences};
use crate::metamodel::schema::*;

/// Members inferred from one production's right-hand side.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MemberInference {
    pub attributes: Vec<AttributeDef>,
    pub compositions: Vec<CompositionDef>,
    pub enums: Vec<EnumDef>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq)]
enum LeafType {
    Value(ValueType),
    Rule(String),
    Constant(Vec<String>),
}

impl LeafType {
    fn describe(&self) -> String {
        match self {
            LeafType::Value(v) => v.to_string(),
            LeafType::Rule(r) => r.clone(),
            LeafType::Constant(lits) => format!("constant [{}]", lits.join("|")),
        }
    }
}

/// Value type produced by an ident, by its effective transform.
pub fn ident_value_type(g: &GrammarAst, ident: &str) -> Option<ValueType> {
    let transform = match g.ident(ident) {
        Some(def) => def.effective_transform()?,
        None if ident == IDENT || ident == STRING => BuiltinTransform::String,
        None => return None,
    };
    Some(match transform {
        BuiltinTransform::String => ValueType::String,
        BuiltinTransform::Int | BuiltinTransform::Cardinality => ValueType::Int,
        BuiltinTransform::Float => ValueType::Float,
    })
}

fn leaf_type(g: &GrammarAst, rhs: &Rhs) -> Option<LeafType> {
    match &rhs.kind {
        RhsKind::IdentRef { ident, .. } => {
            Some(LeafType::Value(ident_value_type(g, ident).unwrap_or(ValueType::String)))
        }
        RhsKind::NonterminalRef { rule, .. } => Some(LeafType::Rule(rule.clone())),
        RhsKind::Constant { literals, .. } => Some(LeafType::Constant(literals.clone())),
        _ => None,
    }
}

/// Infers the attributes and compositions a production contributes to its
/// class. Identically named elements merge into one member; binding one name
/// to different types is reported.
pub fn infer_members(p: &Production, g: &GrammarAst) -> MemberInference {
    let mut out = MemberInference::default();
    let mut groups: IndexMap<String, (LeafType, Pos)> = IndexMap::new();
    p.rhs.walk(&mut |leaf| {
        let (Some(name), Some(ty)) = (member_name(leaf), leaf_type(g, leaf)) else { return };
        match groups.get_mut(&name) {
            None => {
                groups.insert(name, (ty, leaf.pos));
            }
            Some((LeafType::Constant(existing), _)) if matches!(ty, LeafType::Constant(_)) => {
                let LeafType::Constant(lits) = ty else { unreachable!() };
                for l in lits {
                    if !existing.contains(&l) {
                        existing.push(l);
                    }
                }
            }
            Some((existing, first)) if *existing != ty => {
                out.diagnostics.push(Diagnostic::error(
                    leaf.pos,
                    format!(
                        "member `{name}` of {} bound to conflicting types {} and {} (first bound at {first})",
                        p.name,
                        existing.describe(),
                        ty.describe()
                    ),
                ));
            }
            Some(_) => {}
        }
    });
    let occ = occurrences(&p.rhs);
    for (name, (ty, _)) in groups {
        let card = occ[&name].cardinality();
        match ty {
            LeafType::Value(value_type) => out.attributes.push(AttributeDef {
                name,
                value_type,
                cardinality: card,
                from_ast: false,
            }),
            LeafType::Rule(target) => out.compositions.push(CompositionDef {
                name,
                target,
                cardinality: card,
                from_ast: false,
            }),
            LeafType::Constant(literals) => {
                let (attr, e) = constants_to_members(&p.name, &name, &literals, card);
                out.attributes.push(attr);
                out.enums.extend(e);
            }
        }
    }
    out
}

/// Maps a constant to its attribute: one literal gives a boolean flag (always
/// present, false when the literal was not consumed); several literals give an
/// enum `<Class>_<attr>` with the structural cardinality.
pub fn constants_to_members(
    class: &str,
    label: &str,
    literals: &[String],
    cardinality: Cardinality,
) -> (AttributeDef, Option<EnumDef>) {
    let mut unique: Vec<String> = Vec::new();
    for l in literals {
        if !unique.contains(l) {
            unique.push(l.clone());
        }
    }
    if unique.len() == 1 {
        let attr = AttributeDef {
            name: label.to_string(),
            value_type: ValueType::Boolean,
            cardinality: Cardinality::One,
            from_ast: false,
        };
        return (attr, None);
    }
    let enum_name = format!("{class}_{label}");
    let attr = AttributeDef {
        name: label.to_string(),
        value_type: ValueType::Enum(enum_name.clone()),
        cardinality,
        from_ast: false,
    };
    (attr, Some(EnumDef { name: enum_name, literals: unique }))
}

/// Comparable shape of a member, ignoring enum naming.
#[derive(Debug, PartialEq)]
enum Shape {
    Attr(ValueType, Cardinality),
    Comp(String, Cardinality),
}

struct Derivation<'g> {
    g: &'g GrammarAst,
    diags: Vec<Diagnostic>,
    enums: Vec<EnumDef>,
}

impl Derivation<'_> {
    fn shape_of(&self, m: Member<'_>) -> Shape {
        match m {
            Member::Attribute(a) => {
                let ty = match &a.value_type {
                    ValueType::Enum(e) => ValueType::Enum(
                        self.enums
                            .iter()
                            .find(|d| &d.name == e)
                            .map(|d| d.literals.join("|"))
                            .unwrap_or_default(),
                    ),
                    other => other.clone(),
                };
                Shape::Attr(ty, a.cardinality)
            }
            Member::Composition(c) => Shape::Comp(c.target.clone(), c.cardinality),
        }
    }

    fn ast_member(&mut self, owner: &str, attr: &AstAttribute) -> Option<(Option<AttributeDef>, Option<CompositionDef>)> {
        let cardinality = match attr.repeat {
            None => Cardinality::One,
            Some(RepeatKind::Optional) => Cardinality::Optional,
            Some(_) => Cardinality::List,
        };
        let ty = &attr.type_name;
        let value_type = if self.g.is_ident_name(ty) {
            ident_value_type(self.g, ty)
        } else {
            match ty.as_str() {
                "string" => Some(ValueType::String),
                "int" => Some(ValueType::Int),
                "float" => Some(ValueType::Float),
                "boolean" => Some(ValueType::Boolean),
                _ => None,
            }
        };
        if let Some(value_type) = value_type {
            let a = AttributeDef { name: attr.name.clone(), value_type, cardinality, from_ast: true };
            return Some((Some(a), None));
        }
        if self.g.production(ty).is_some() || self.g.interface(ty).is_some() {
            let c = CompositionDef { name: attr.name.clone(), target: ty.clone(), cardinality, from_ast: true };
            return Some((None, Some(c)));
        }
        self.diags.push(Diagnostic::error(
            attr.pos,
            format!("unknown type `{ty}` for member `{}` of {owner}", attr.name),
        ));
        None
    }
}

/// Derives the schema from a validated grammar.
pub fn derive_schema(g: &GrammarAst) -> Result<Schema, Diagnostics> {
    let mut d = Derivation { g, diags: Vec::new(), enums: Vec::new() };

    let mut classes: Vec<ClassDef> = g
        .productions
        .iter()
        .map(|p| {
            let inferred = infer_members(p, g);
            d.diags.extend(inferred.diagnostics);
            d.enums.extend(inferred.enums);
            ClassDef {
                name: p.name.clone(),
                super_class: p.super_rule.clone(),
                interfaces: p.interfaces.clone(),
                attributes: inferred.attributes,
                compositions: inferred.compositions,
                redeclared: Vec::new(),
                methods: Vec::new(),
            }
        })
        .collect();
    let mut interfaces: Vec<InterfaceDef> = g
        .interfaces
        .iter()
        .map(|i| InterfaceDef {
            name: i.name.clone(),
            attributes: Vec::new(),
            compositions: Vec::new(),
            methods: Vec::new(),
        })
        .collect();

    for block in &g.ast_blocks {
        let methods = block
            .methods
            .iter()
            .map(|m| MethodDef { signature: m.signature.clone(), body: m.body.clone() });
        let (attrs, comps, meths) = if let Some(c) = classes.iter_mut().find(|c| c.name == block.target) {
            (&mut c.attributes, &mut c.compositions, &mut c.methods)
        } else if let Some(i) = interfaces.iter_mut().find(|i| i.name == block.target) {
            (&mut i.attributes, &mut i.compositions, &mut i.methods)
        } else {
            d.diags.push(Diagnostic::error(
                block.pos,
                format!("ast block targets unknown class or interface {}", block.target),
            ));
            continue;
        };
        meths.extend(methods);
        for attr in &block.attributes {
            let Some((a, c)) = d.ast_member(&block.target, attr) else { continue };
            let existing = attrs
                .iter()
                .find(|x| x.name == attr.name)
                .map(Member::Attribute)
                .or_else(|| comps.iter().find(|x| x.name == attr.name).map(Member::Composition));
            let new = a.as_ref().map(Member::Attribute).or(c.as_ref().map(Member::Composition));
            match (existing, new) {
                (Some(old), Some(new)) => {
                    if d.shape_of(old) != d.shape_of(new) {
                        d.diags.push(Diagnostic::error(
                            attr.pos,
                            format!("ast member `{}` conflicts with existing member of {}", attr.name, block.target),
                        ));
                    }
                }
                _ => {
                    attrs.extend(a);
                    comps.extend(c);
                }
            }
        }
    }

    let mut schema = Schema {
        name: g.name.clone(),
        package: g.package.clone(),
        classes: classes.clone(),
        interfaces,
        enums: Vec::new(),
        associations: Vec::new(),
        references: g.concepts.clone(),
    };

    // Redeclared inherited members fold into the inherited definition.
    let mut dropped_enums = Vec::new();
    for (idx, class) in classes.iter().enumerate() {
        let Some(sup) = class.super_class.as_deref() else { continue };
        let mut redeclared = Vec::new();
        for name in class
            .attributes
            .iter()
            .map(|a| &a.name)
            .chain(class.compositions.iter().map(|c| &c.name))
        {
            let Some(inherited) = schema.member(sup, name) else { continue };
            let own = Member::from_class(class, name).expect("own member");
            if d.shape_of(own) == d.shape_of(inherited) {
                redeclared.push(name.clone());
                if let Member::Attribute(AttributeDef { value_type: ValueType::Enum(e), .. }) = own {
                    dropped_enums.push(e.clone());
                }
            } else {
                d.diags.push(Diagnostic::error(
                    g.productions[idx].pos,
                    format!(
                        "member `{name}` of {} redeclares an inherited member with a different type",
                        class.name
                    ),
                ));
            }
        }
        let target = &mut schema.classes[idx];
        target.attributes.retain(|a| !redeclared.contains(&a.name));
        target.compositions.retain(|c| !redeclared.contains(&c.name));
        target.redeclared = redeclared;
    }
    schema.enums = d.enums.iter().filter(|e| !dropped_enums.contains(&e.name)).cloned().collect();

    // Members must agree with those of implemented interfaces.
    for (idx, class) in schema.classes.iter().enumerate() {
        for iface in &class.interfaces {
            let Some(i) = schema.interface(iface) else { continue };
            for m in i.attributes.iter().map(Member::Attribute).chain(i.compositions.iter().map(Member::Composition)) {
                if let Some(own) = schema.member(&class.name, m.name()) {
                    if d.shape_of(own) != d.shape_of(m) {
                        d.diags.push(Diagnostic::error(
                            g.productions[idx].pos,
                            format!(
                                "member `{}` of {} conflicts with interface {iface}",
                                m.name(),
                                class.name
                            ),
                        ));
                    }
                }
            }
        }
    }

    for a in &g.associations {
        let def = AssociationDef {
            forward: AssociationEnd {
                class: a.source_class.clone(),
                role: a.source_role.clone(),
                multiplicity: a.target_mult,
            },
            opposite: AssociationEnd {
                class: a.target_class.clone(),
                role: a.target_role.clone(),
                multiplicity: a.source_mult,
            },
        };
        for end in [&def.forward, &def.opposite] {
            if schema.member(&end.class, &end.role).is_some() {
                d.diags.push(Diagnostic::error(
                    a.pos,
                    format!("association role `{}` collides with a member of {}", end.role, end.class),
                ));
            }
            let taken = schema.associations.iter().flat_map(|o| [&o.forward, &o.opposite]).any(|o| {
                o.role == end.role
                    && (schema.is_subtype(&end.class, &o.class) || schema.is_subtype(&o.class, &end.class))
            });
            if taken {
                d.diags.push(Diagnostic::error(
                    a.pos,
                    format!("association role `{}` is already defined on {}", end.role, end.class),
                ));
            }
        }
        schema.associations.push(def);
    }

    for spec in &g.concepts {
        for path in [&spec.source, &spec.target] {
            match schema.member(&path.class, &path.attribute) {
                Some(Member::Attribute(a))
                    if a.value_type == ValueType::String && a.cardinality != Cardinality::List => {}
                Some(_) => d.diags.push(Diagnostic::error(
                    spec.pos,
                    format!("reference path {path} must name a single string attribute"),
                )),
                None => {}
            }
        }
    }

    if d.diags.iter().any(Diagnostic::is_error) {
        d.diags.sort_by_key(|x| x.pos);
        Err(Diagnostics(d.diags))
    } else {
        Ok(schema)
    }
}

impl<'a> Member<'a> {
    fn from_class(c: &'a ClassDef, name: &str) -> Option<Member<'a>> {
        c.attributes
            .iter()
            .find(|a| a.name == name)
            .map(Member::Attribute)
            .or_else(|| c.compositions.iter().find(|x| x.name == name).map(Member::Composition))
    }
}
