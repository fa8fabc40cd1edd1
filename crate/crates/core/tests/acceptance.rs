//! One PASS/FAIL line per acceptance criterion; exits non-zero on any failure.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use gramkit::cli::run;
use gramkit::engine::{transform_ident, ParseOptions, Slot, Value};
use gramkit::export::read_model;
use gramkit::grammar::{parse_grammar, validate_grammar};
use gramkit::metamodel::{export_schema, occurrence::occurrence_cardinalities, Cardinality, SchemaFormat, ValueType};
use gramkit::resolve::{build_symbol_table, direct_successors, resolve_links};
use gramkit::Language;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("gramkit").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

fn path(name: &str) -> String {
    corpus_path(name).display().to_string()
}

fn pingpong_end_to_end() -> Outcome {
    let started = Instant::now();
    let lang = automaton();
    let p = lang.process(&corpus("pingpong.aut"));
    ensure!(p.diagnostics.is_empty(), "diagnostics: {:?}", p.diagnostics);
    let tree = p.tree.as_ref().ok_or("no tree")?;
    let links = &p.links;

    let transitions: Vec<_> = tree.iter().filter(|n| n.class.starts_with("Transition")).map(|n| n.id).collect();
    ensure!(transitions.len() == 4, "{} transitions", transitions.len());
    for t in &transitions {
        for role in ["fromState", "toState"] {
            let n = links.targets(*t, role).map_err(|e| e.to_string())?.len();
            ensure!(n == 1, "transition #{} has {n} {role} links", t.0);
        }
    }
    for name in ["NoGame", "Ping", "Pong"] {
        let s = named(tree, "State", name);
        for role in ["outgoingTransitions", "incomingTransitions"] {
            let n = links.targets(s, role).map_err(|e| e.to_string())?.len();
            ensure!(n == 1, "{name} has {n} {role}");
        }
    }
    let succ = |from: &str| {
        direct_successors(named(tree, "State", from), "outgoingTransitions", "toState", links).map_err(|e| e.to_string())
    };
    ensure!(succ("Ping")? == BTreeSet::from([named(tree, "State", "Pong")]), "successors of Ping");
    ensure!(succ("NoGame")? == BTreeSet::from([named(tree, "State", "InPlay")]), "successors of NoGame");

    let (code, out, err) = cli(&["parse", &path("automaton.mc"), &path("pingpong.aut")]);
    ensure!(code == 0 && err.is_empty(), "cli exit {code}: {err}");
    ensure!(serde_json::from_str::<serde_json::Value>(&out).is_ok(), "cli output is not JSON");
    let took = started.elapsed();
    ensure!(took < Duration::from_secs(1), "took {took:?}");
    Ok(())
}

fn shop_equivalence() -> Outcome {
    let started = Instant::now();
    let ext = language("shop.mc");
    let ebnf = language("shop_ebnf.mc");
    let opts = ParseOptions { start: Some("ShopSystem".into()), ..Default::default() };
    let models = shop_models();
    ensure!(models.len() >= 20, "only {} models", models.len());
    let mut accepted = 0;
    for m in &models {
        match (ext.parse(m, &opts), ebnf.parse(m, &opts)) {
            (Ok(a), Ok(b)) => {
                ensure!(collapsed(&a) == collapsed(&b), "trees differ for {m:?}");
                accepted += 1;
            }
            (Err(_), Err(_)) => {}
            (a, b) => return Err(format!("acceptance differs for {m:?}: {} vs {}", a.is_ok(), b.is_ok())),
        }
    }
    ensure!(accepted >= 20 && accepted < models.len(), "{accepted} of {} accepted", models.len());
    let took = started.elapsed();
    ensure!(took < Duration::from_secs(1), "took {took:?}");
    Ok(())
}

fn cardinality_oracle() -> Outcome {
    ensure!(ORACLE_PRODUCTIONS.len() >= 10, "too few productions");
    for rhs in ORACLE_PRODUCTIONS {
        let g = parse_grammar(&oracle_grammar(rhs)).map_err(|e| e.to_string())?;
        let p = g.production("P").ok_or("no P")?;
        let got = occurrence_cardinalities(&p.rhs);
        let want = oracle_cardinalities(&p.rhs);
        ensure!(got == want, "{rhs}: inferred {got:?}, oracle {want:?}");
    }
    Ok(())
}

fn constants() -> Outcome {
    let lang = Language::compile(CONSTANTS_GRAMMAR).map_err(|e| e.to_string())?;
    let c = lang.schema.class("Customer").ok_or("no Customer")?;
    let attr = |n: &str| c.attributes.iter().find(|a| a.name == n).ok_or(format!("no {n}"));
    let vip = attr("vip")?;
    ensure!(vip.value_type == ValueType::Boolean && vip.cardinality == Cardinality::One, "vip: {vip:?}");
    let kind = attr("kind")?;
    ensure!(kind.value_type == ValueType::Enum("Customer_kind".into()), "kind: {kind:?}");
    let lits = &lang.schema.enum_def("Customer_kind").ok_or("no enum")?.literals;
    ensure!(lits == &["client", "premiumclient"], "literals {lits:?}");

    let cases: [(&str, &[(&str, bool)]); 5] = [
        ("client Ann;", &[("client", false)]),
        ("premiumclient Bob vip;", &[("premiumclient", true)]),
        ("client Cy vip;", &[("client", true)]),
        ("premiumclient Di;", &[("premiumclient", false)]),
        ("client E; premiumclient F vip; client G;", &[("client", false), ("premiumclient", true), ("client", false)]),
    ];
    for (text, want) in cases {
        let tree = lang.parse(text, &ParseOptions::default()).map_err(|e| e.to_string())?;
        let got: Vec<(String, bool)> = tree
            .iter()
            .filter(|n| n.class == "Customer")
            .map(|n| {
                let kind = match n.attr("kind") {
                    Some(Slot::Single(Value::Enum(k))) => k.clone(),
                    other => format!("{other:?}"),
                };
                (kind, n.attr("vip") == Some(&Slot::Single(Value::Bool(true))))
            })
            .collect();
        let want: Vec<(String, bool)> = want.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        ensure!(got == want, "{text}: {got:?}");
    }
    Ok(())
}

fn ident_transforms() -> Outcome {
    let lang = Language::compile(IDENTS_GRAMMAR).map_err(|e| e.to_string())?;
    for (text, want) in [("1 .. *", -1i64), ("1 .. 17", 17)] {
        let tree = lang.parse(text, &ParseOptions::default()).map_err(|e| e.to_string())?;
        let got = tree.root().attr("c");
        ensure!(got == Some(&Slot::Single(Value::Int(want))), "{text}: {got:?}");
    }

    let lang = Language::compile(NUMBERS_GRAMMAR).map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut text = String::new();
    let mut want = Vec::new();
    for _ in 0..20 {
        let n: i64 = rng.gen_range(-1_000_000_000_000..1_000_000_000_000);
        let r = format!("{}.{:03}", rng.gen_range(-99_999..99_999), rng.gen_range(0..1000));
        text.push_str(&format!("row {n} {r} {};\n", n.unsigned_abs()));
        want.push((n, r.parse::<f64>().unwrap(), n.unsigned_abs() as i64));
    }
    let tree = lang.parse(&text, &ParseOptions::default()).map_err(|e| e.to_string())?;
    let got: Vec<(i64, f64, i64)> = tree
        .iter()
        .filter(|n| n.class == "Row")
        .map(|row| {
            let get = |k: &str| row.attr(k).and_then(Slot::single).cloned();
            match (get("n"), get("r"), get("c")) {
                (Some(Value::Int(n)), Some(Value::Float(r)), Some(Value::Int(c))) => Ok((n, r, c)),
                other => Err(format!("unexpected row values {other:?}")),
            }
        })
        .collect::<Result<_, _>>()?;
    ensure!(got == want, "values differ: {got:?}");
    ensure!(transform_ident("int", &i64::MIN.to_string()) == Ok(Value::Int(i64::MIN)), "i64::MIN");
    ensure!(transform_ident("int", "9223372036854775808").is_err(), "overflow accepted");
    Ok(())
}

/// Every corpus model with the language that reads it.
fn corpus_models() -> Vec<(Language, String)> {
    let mut out = Vec::new();
    for m in ["pingpong.aut", "broken.aut"] {
        out.push((automaton(), corpus(m)));
    }
    out.push((automaton(), "automaton D {\n  state S;\n  state S;\n  state T;\n  S - e > T;\n  T - e > S;\n}".into()));
    out.push((language("net.mc"), corpus("net_short.net")));
    for m in shop_models().into_iter().filter(|m| language("shop.mc").parse(m, &ParseOptions::default()).is_ok()) {
        out.push((language("shop.mc"), m.clone()));
        out.push((language("shop_ebnf.mc"), m));
    }
    out
}

fn invariants() -> Outcome {
    for f in ["automaton.mc", "shop.mc", "shop_ebnf.mc", "net.mc"] {
        let a = language(f);
        let b = language(f);
        for fmt in [SchemaFormat::Json, SchemaFormat::Plantuml] {
            ensure!(export_schema(&a.schema, fmt) == export_schema(&b.schema, fmt), "{f}: schema export differs");
        }
    }
    for (lang, text) in corpus_models() {
        let on = lang.parse(&text, &ParseOptions::default()).map_err(|e| e.to_string())?;
        let off = lang
            .parse(&text, &ParseOptions { memoize: false, ..Default::default() })
            .map_err(|e| e.to_string())?;
        ensure!(on == off, "memoization changes the tree for {text:?}");

        let (table, dups) = build_symbol_table(&on, &lang.schema, &lang.schema.references);
        let (links, _) = resolve_links(&on, &lang.schema, &table);
        for assoc in &links.associations {
            for (s, t) in assoc.pairs() {
                ensure!(assoc.opposite.get(&t).is_some_and(|v| v.contains(&s)), "{}: missing opposite", assoc.id());
            }
            let back: usize = assoc.opposite.values().map(Vec::len).sum();
            ensure!(back == assoc.pairs().count(), "{}: opposite count differs", assoc.id());
        }
        // Fail closed: a duplicated name is never a link target.
        for ns in table.namespaces.values() {
            for name in &ns.ambiguous {
                for assoc in &links.associations {
                    for (_, t) in assoc.pairs() {
                        ensure!(on.node(t).str_attr("name") != Some(name.as_str()), "ambiguous {name} linked");
                    }
                }
            }
        }
        let ambiguous = table.namespaces.values().any(|ns| !ns.ambiguous.is_empty());
        ensure!(dups.is_empty() != ambiguous, "duplicate diagnostics disagree with the table");

        let p = lang.process(&text);
        let json = p.document().ok_or("no document")?.to_json();
        ensure!(json == lang.process(&text).document().ok_or("no document")?.to_json(), "model export differs");
        let (back, _) = read_model(&json, &lang.schema).map_err(|e| e.to_string())?;
        ensure!(without_positions(&back) == without_positions(&on), "round trip differs");
    }
    Ok(())
}

fn count_errors(diags: &[gramkit::Diagnostic], line: u32, column: u32) -> Outcome {
    ensure!(diags.len() == 1, "{} diagnostics: {diags:?}", diags.len());
    ensure!((diags[0].pos.line, diags[0].pos.column) == (line, column), "at {}", diags[0].pos);
    Ok(())
}

fn negative_paths() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let g = dir.path().join("lr.mc");
    std::fs::write(&g, "grammar G {\n  A = A \"a\";\n}\n").map_err(|e| e.to_string())?;
    let (code, _, err) = cli(&["check", g.to_str().unwrap()]);
    ensure!(code == 1 && err.contains("left recursion on A"), "left recursion: exit {code}, {err}");

    let d = validate_grammar(&parse_grammar("grammar G { A = B; }").map_err(|e| e.to_string())?);
    ensure!(d.iter().any(|d| d.message == "undefined nonterminal B"), "undefined nonterminal: {d:?}");
    ensure!(Language::compile("grammar G { A = B; }").is_err(), "undefined nonterminal compiled");

    let p = automaton().process(&corpus("broken.aut"));
    count_errors(&p.diagnostics, 5, 3)?;
    ensure!(p.diagnostics[0].message == "unresolved reference X", "{}", p.diagnostics[0].message);

    let p = language("net.mc").process(&corpus("net_short.net"));
    count_errors(&p.diagnostics, 2, 3)?;
    Ok(())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("pingpong model parses, links and answers successor queries", pingpong_end_to_end),
        ("extends form and hand-expanded form accept identical trees", shop_equivalence),
        ("member cardinalities match the derivation oracle", cardinality_oracle),
        ("constants map to booleans and enums", constants),
        ("identifier transforms produce typed values", ident_transforms),
        ("structural invariants hold on every corpus model", invariants),
        ("invalid grammars and models are diagnosed precisely", negative_paths),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("PASS criterion {}: {name}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
