use std::fmt::Write;

use crate::metamodel::schema::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemaFormat {
    Json,
    Plantuml,
}

/// Serializes a schema. Output is deterministic for a given schema.
pub fn export_schema(s: &Schema, format: SchemaFormat) -> String {
    match format {
        SchemaFormat::Json => {
            let mut out = serde_json::to_string_pretty(s).expect("schema serializes");
            out.push('\n');
            out
        }
        SchemaFormat::Plantuml => plantuml(s),
    }
}

fn quote_mult(m: &crate::grammar::Multiplicity) -> String {
    format!("\"{m}\"")
}

fn card_suffix(c: Cardinality) -> &'static str {
    match c {
        Cardinality::One => "",
        Cardinality::Optional => " [0..1]",
        Cardinality::List => " [*]",
    }
}

fn card_mult(c: Cardinality) -> &'static str {
    match c {
        Cardinality::One => "\"1\"",
        Cardinality::Optional => "\"0..1\"",
        Cardinality::List => "\"*\"",
    }
}

fn members(out: &mut String, attrs: &[AttributeDef], methods: &[MethodDef]) {
    for a in attrs {
        let _ = writeln!(out, "  {} : {}{}", a.name, a.value_type, card_suffix(a.cardinality));
    }
    for m in methods {
        let _ = writeln!(out, "  {}", m.signature);
    }
}

fn plantuml(s: &Schema) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@startuml {}", s.name);
    for i in &s.interfaces {
        let _ = writeln!(out, "interface {} {{", i.name);
        members(&mut out, &i.attributes, &i.methods);
        out.push_str("}\n");
    }
    for c in &s.classes {
        let _ = writeln!(out, "class {} {{", c.name);
        members(&mut out, &c.attributes, &c.methods);
        out.push_str("}\n");
    }
    for e in &s.enums {
        let _ = writeln!(out, "enum {} {{", e.name);
        for l in &e.literals {
            let _ = writeln!(out, "  {l}");
        }
        out.push_str("}\n");
    }
    for c in &s.classes {
        if let Some(sup) = &c.super_class {
            let _ = writeln!(out, "{} --|> {}", c.name, sup);
        }
        for i in &c.interfaces {
            let _ = writeln!(out, "{} ..|> {}", c.name, i);
        }
    }
    let comps = s
        .classes
        .iter()
        .map(|c| (&c.name, &c.compositions))
        .chain(s.interfaces.iter().map(|i| (&i.name, &i.compositions)));
    for (owner, list) in comps {
        for comp in list {
            let _ = writeln!(
                out,
                "{owner} *-- {} {} : {}",
                card_mult(comp.cardinality),
                comp.target,
                comp.name
            );
        }
    }
    for a in &s.associations {
        let _ = writeln!(
            out,
            "{} {} -- {} {} : {} / {}",
            a.forward.class,
            quote_mult(&a.opposite.multiplicity),
            quote_mult(&a.forward.multiplicity),
            a.opposite.class,
            a.forward.role,
            a.opposite.role
        );
    }
    out.push_str("@enduml\n");
    out
}
