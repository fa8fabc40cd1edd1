use std::collections::{BTreeSet, HashMap};

use crate::diag::{Diagnostic, Diagnostics, Pos};
use crate::grammar::ast::*;
use crate::grammar::lexer::{lex, Spanned, Tok};
use crate::grammar::pattern::Pattern;

/// Parses a grammar file into its syntax tree.
///
/// Fails on the first syntax error, reporting the expected token set at the
/// failure point, or with every duplicate declaration found.
pub fn parse_grammar(text: &str) -> Result<GrammarAst, Diagnostics> {
    let toks = lex(text)?;
    let mut p = Parser { text, toks, i: 0, expected: BTreeSet::new() };
    let mut g = p.file()?;
    classify_refs(&mut g);
    check_duplicates(&g)?;
    Ok(g)
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Spanned>,
    i: usize,
    expected: BTreeSet<String>,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let idx = (self.i + n).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.i].clone();
        if self.i < self.toks.len() - 1 {
            self.i += 1;
        }
        self.expected.clear();
        t
    }

    fn is_punct(&mut self, p: &'static str) -> bool {
        if *self.peek() == Tok::Punct(p) {
            true
        } else {
            self.expected.insert(format!("`{p}`"));
            false
        }
    }

    fn eat_punct(&mut self, p: &'static str) -> bool {
        let hit = self.is_punct(p);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_punct(&mut self, p: &'static str) -> PResult<Pos> {
        let pos = self.pos();
        if self.eat_punct(p) {
            Ok(pos)
        } else {
            Err(self.unexpected())
        }
    }

    fn is_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Tok::Name(n) if n == w) {
            true
        } else {
            self.expected.insert(format!("`{w}`"));
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let hit = self.is_word(w);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expect_name(&mut self, what: &str) -> PResult<(String, Pos)> {
        if let Tok::Name(n) = self.peek() {
            let n = n.clone();
            let pos = self.bump().pos;
            Ok((n, pos))
        } else {
            self.expected.insert(what.to_string());
            Err(self.unexpected())
        }
    }

    fn unexpected(&self) -> Diagnostic {
        let found = self.peek().describe();
        let expected: Vec<&str> = self.expected.iter().map(String::as_str).collect();
        let msg = match expected.as_slice() {
            [] => format!("syntax error: unexpected {found}"),
            [one] => format!("syntax error: expected {one}, found {found}"),
            many => format!("syntax error: expected one of {}, found {found}", many.join(", ")),
        };
        Diagnostic::error(self.pos(), msg)
    }

    fn file(&mut self) -> PResult<GrammarAst> {
        let mut package = None;
        if self.eat_word("package") {
            let (mut name, _) = self.expect_name("package name")?;
            while self.eat_punct(".") {
                let (part, _) = self.expect_name("package name")?;
                name.push('.');
                name.push_str(&part);
            }
            self.expect_punct(";")?;
            package = Some(name);
        }
        self.expect_word("grammar")?;
        let (name, pos) = self.expect_name("grammar name")?;
        self.expect_punct("{")?;
        let mut g = GrammarAst {
            package,
            name,
            pos,
            idents: Vec::new(),
            productions: Vec::new(),
            interfaces: Vec::new(),
            ast_blocks: Vec::new(),
            associations: Vec::new(),
            concepts: Vec::new(),
        };
        while !self.is_punct("}") {
            self.declaration(&mut g)?;
        }
        self.bump();
        if *self.peek() != Tok::Eof {
            self.expected.insert("end of file".into());
            return Err(self.unexpected());
        }
        Ok(g)
    }

    fn declaration(&mut self, g: &mut GrammarAst) -> PResult<()> {
        let next_is_name = matches!(self.peek_at(1), Tok::Name(_));
        let next_is_brace = *self.peek_at(1) == Tok::Punct("{");
        if next_is_name && self.is_word("ident") {
            self.bump();
            g.idents.push(self.ident_def()?);
        } else if next_is_name && self.is_word("interface") {
            self.bump();
            let (name, pos) = self.expect_name("interface name")?;
            self.expect_punct(";")?;
            g.interfaces.push(InterfaceDecl { name, pos });
        } else if next_is_name && self.is_word("ast") {
            self.bump();
            g.ast_blocks.push(self.ast_block()?);
        } else if next_is_brace && self.is_word("association") {
            self.bump();
            self.association_block(&mut g.associations)?;
        } else if next_is_name && self.is_word("concept") {
            self.bump();
            self.concept_block(&mut g.concepts)?;
        } else if matches!(self.peek(), Tok::Name(_)) {
            g.productions.push(self.production()?);
        } else {
            self.expected.insert("declaration".into());
            return Err(self.unexpected());
        }
        Ok(())
    }

    fn ident_def(&mut self) -> PResult<IdentDef> {
        let (name, pos) = self.expect_name("ident name")?;
        let pattern = self.pattern_alt()?;
        let transform = if self.eat_punct(":") {
            self.transform()?
        } else {
            Transform::Builtin(BuiltinTransform::String)
        };
        self.expect_punct(";")?;
        Ok(IdentDef { name, pattern, transform, pos })
    }

    fn transform(&mut self) -> PResult<Transform> {
        let (first, pos) = self.expect_name("transform name")?;
        if self.eat_punct("->") {
            let (result_type, _) = self.expect_name("result type")?;
            let body = self.opaque_braces()?;
            return Ok(Transform::Opaque { param: first, result_type, body });
        }
        BuiltinTransform::from_name(&first)
            .map(Transform::Builtin)
            .ok_or_else(|| {
                Diagnostic::error(
                    pos,
                    format!("unknown transform `{first}` (expected string, int, float or cardinality)"),
                )
            })
    }

    /// Consumes a balanced `{ ... }` group and returns its inner text.
    fn opaque_braces(&mut self) -> PResult<String> {
        let open = self.expect_punct_span("{")?;
        let mut depth = 1usize;
        loop {
            match self.peek() {
                Tok::Eof => {
                    return Err(Diagnostic::error(self.pos(), "unterminated `{` block"));
                }
                Tok::Punct("{") => depth += 1,
                Tok::Punct("}") => {
                    depth -= 1;
                    if depth == 0 {
                        let close = self.bump();
                        return Ok(self.text[open.end..close.start].trim().to_string());
                    }
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn expect_punct_span(&mut self, p: &'static str) -> PResult<Spanned> {
        if self.is_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.unexpected())
        }
    }

    fn pattern_alt(&mut self) -> PResult<Pattern> {
        let mut branches = vec![self.pattern_seq()?];
        while self.eat_punct("|") {
            branches.push(self.pattern_seq()?);
        }
        Ok(if branches.len() == 1 { branches.pop().unwrap() } else { Pattern::Alt(branches) })
    }

    fn pattern_seq(&mut self) -> PResult<Pattern> {
        let mut items = Vec::new();
        while matches!(
            self.peek(),
            Tok::Char(_) | Tok::Str(_) | Tok::Punct("(") | Tok::Punct("~") | Tok::Punct(".")
        ) {
            let mut atom = self.pattern_atom()?;
            loop {
                atom = if self.eat_punct("*") {
                    Pattern::Star(Box::new(atom))
                } else if self.eat_punct("+") {
                    Pattern::Plus(Box::new(atom))
                } else if self.eat_punct("?") {
                    Pattern::Optional(Box::new(atom))
                } else {
                    break;
                };
            }
            items.push(atom);
        }
        match items.len() {
            0 => {
                self.expected.insert("token pattern".into());
                Err(self.unexpected())
            }
            1 => Ok(items.pop().unwrap()),
            _ => Ok(Pattern::Seq(items)),
        }
    }

    fn pattern_atom(&mut self) -> PResult<Pattern> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Char(s) | Tok::Str(s) => {
                self.bump();
                if self.eat_punct("..") {
                    let hi = match self.peek().clone() {
                        Tok::Char(h) | Tok::Str(h) => {
                            self.bump();
                            h
                        }
                        _ => {
                            self.expected.insert("char literal".into());
                            return Err(self.unexpected());
                        }
                    };
                    let (lo, hi) = match (single_char(&s), single_char(&hi)) {
                        (Some(l), Some(h)) if l <= h => (l, h),
                        _ => return Err(Diagnostic::error(pos, "invalid character range")),
                    };
                    Ok(Pattern::range(lo, hi))
                } else {
                    Ok(Pattern::Literal(s))
                }
            }
            Tok::Punct("(") => {
                self.bump();
                let inner = self.pattern_alt()?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            Tok::Punct("~") => {
                self.bump();
                let inner = self.pattern_atom()?;
                let ranges = class_ranges(&inner)
                    .ok_or_else(|| Diagnostic::error(pos, "`~` applies only to characters and ranges"))?;
                Ok(Pattern::Class { ranges, negated: true })
            }
            Tok::Punct(".") => {
                self.bump();
                Ok(Pattern::Any)
            }
            _ => Err(self.unexpected()),
        }
    }

    fn production(&mut self) -> PResult<Production> {
        let (name, pos) = self.expect_name("production name")?;
        let mut super_rule = None;
        let mut interfaces = Vec::new();
        if self.eat_word("extends") {
            super_rule = Some(self.expect_name("super production")?.0);
        }
        if self.eat_word("implements") {
            interfaces.push(self.expect_name("interface name")?.0);
            while self.eat_punct(",") {
                interfaces.push(self.expect_name("interface name")?.0);
            }
        }
        self.expect_punct("=")?;
        let rhs = self.rhs_alt()?;
        self.expect_punct(";")?;
        Ok(Production { name, super_rule, interfaces, rhs, pos })
    }

    fn rhs_alt(&mut self) -> PResult<Rhs> {
        let pos = self.pos();
        let mut branches = vec![self.rhs_seq()?];
        while self.eat_punct("|") {
            branches.push(self.rhs_seq()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            Rhs::new(RhsKind::Alternative(branches), pos)
        })
    }

    fn starts_rhs_item(&mut self) -> bool {
        match self.peek() {
            Tok::Name(_) | Tok::Str(_) => true,
            _ => self.is_punct("(") | self.is_punct("!") | self.is_punct("["),
        }
    }

    fn rhs_seq(&mut self) -> PResult<Rhs> {
        let pos = self.pos();
        let mut items = Vec::new();
        while self.starts_rhs_item() {
            let mut item = self.rhs_atom()?;
            loop {
                let kind = if self.eat_punct("*") {
                    RepeatKind::Star
                } else if self.eat_punct("+") {
                    RepeatKind::Plus
                } else if self.eat_punct("?") {
                    RepeatKind::Optional
                } else {
                    break;
                };
                let p = item.pos;
                item = Rhs::new(RhsKind::Repetition(Box::new(item), kind), p);
            }
            items.push(item);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Rhs::new(RhsKind::Sequence(items), pos)
        })
    }

    fn rhs_atom(&mut self) -> PResult<Rhs> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Punct("(") => {
                self.bump();
                let inner = self.rhs_alt()?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            Tok::Punct("!") => {
                self.bump();
                match self.peek().clone() {
                    Tok::Str(text) => {
                        self.bump();
                        Ok(Rhs::new(RhsKind::Literal { text, keyword: true }, pos))
                    }
                    _ => {
                        self.expected.insert("string literal".into());
                        Err(self.unexpected())
                    }
                }
            }
            Tok::Str(text) => {
                self.bump();
                Ok(Rhs::new(RhsKind::Literal { text, keyword: false }, pos))
            }
            Tok::Punct("[") => {
                let literals = self.constant_literals()?;
                match literals.as_slice() {
                    [single] if is_identifier(single) => Ok(Rhs::new(
                        RhsKind::Constant { label: single.to_lowercase(), literals },
                        pos,
                    )),
                    _ => Err(Diagnostic::error(pos, "constant needs an attribute name")),
                }
            }
            Tok::Name(name) => {
                self.bump();
                if *self.peek() == Tok::Punct(":") {
                    self.bump();
                    check_label(&name, pos)?;
                    if self.is_punct("[") {
                        let literals = self.constant_literals()?;
                        Ok(Rhs::new(RhsKind::Constant { label: name, literals }, pos))
                    } else {
                        let (rule, _) = self.expect_name("nonterminal or ident name")?;
                        Ok(Rhs::new(RhsKind::NonterminalRef { label: Some(name), rule }, pos))
                    }
                } else {
                    Ok(Rhs::new(RhsKind::NonterminalRef { label: None, rule: name }, pos))
                }
            }
            _ => Err(self.unexpected()),
        }
    }

    fn constant_literals(&mut self) -> PResult<Vec<String>> {
        self.expect_punct("[")?;
        let mut literals = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Str(s) => {
                    self.bump();
                    literals.push(s);
                }
                _ => {
                    self.expected.insert("string literal".into());
                    return Err(self.unexpected());
                }
            }
            if !self.eat_punct("|") {
                break;
            }
        }
        self.expect_punct("]")?;
        Ok(literals)
    }

    fn ast_block(&mut self) -> PResult<AstBlock> {
        let (target, pos) = self.expect_name("class or interface name")?;
        self.expect_punct("=")?;
        let mut attributes = Vec::new();
        let mut methods = Vec::new();
        while !self.is_punct(";") {
            let item_pos = self.pos();
            if self.is_word("method") {
                let method_tok = self.bump();
                while !matches!(self.peek(), Tok::Punct("{") | Tok::Eof) {
                    self.bump();
                }
                let sig_end = self.toks[self.i].start;
                let signature = self.text[method_tok.end..sig_end].trim().to_string();
                let body = self.opaque_braces()?;
                methods.push(AstMethod { signature, body, pos: item_pos });
                continue;
            }
            let (first, _) = self.expect_name("attribute")?;
            let (name, type_name) = if self.eat_punct(":") {
                check_label(&first, item_pos)?;
                (first, self.expect_name("type name")?.0)
            } else {
                (first.to_lowercase(), first)
            };
            let repeat = if self.eat_punct("*") {
                Some(RepeatKind::Star)
            } else if self.eat_punct("+") {
                Some(RepeatKind::Plus)
            } else if self.eat_punct("?") {
                Some(RepeatKind::Optional)
            } else {
                None
            };
            attributes.push(AstAttribute { name, type_name, repeat, pos: item_pos });
        }
        self.bump();
        Ok(AstBlock { target, attributes, methods, pos })
    }

    fn association_block(&mut self, out: &mut Vec<AssociationDecl>) -> PResult<()> {
        self.expect_punct("{")?;
        while !self.is_punct("}") {
            let (source_class, pos) = self.expect_name("class name")?;
            self.expect_punct(".")?;
            let (source_role, _) = self.expect_name("role name")?;
            let leading = self.multiplicity()?;
            self.expect_punct("<->")?;
            let target_mult = self.multiplicity()?;
            let (target_class, _) = self.expect_name("class name")?;
            let target_role = if self.eat_punct(".") {
                self.expect_name("role name")?.0
            } else {
                source_class.clone()
            };
            let mut source_mult = leading;
            if self.starts_multiplicity() {
                let mpos = self.pos();
                let trailing = self.multiplicity()?;
                if trailing != leading {
                    return Err(Diagnostic::error(
                        mpos,
                        format!(
                            "conflicting multiplicities {leading} and {trailing} for role {target_role}"
                        ),
                    ));
                }
                source_mult = trailing;
            }
            if !self.eat_punct(";") && !self.is_punct("}") {
                return Err(self.unexpected());
            }
            out.push(AssociationDecl {
                source_class,
                source_role,
                source_mult,
                target_class,
                target_role,
                target_mult,
                pos,
            });
        }
        self.bump();
        Ok(())
    }

    fn starts_multiplicity(&mut self) -> bool {
        matches!(self.peek(), Tok::Number(_)) || self.is_punct("*")
    }

    fn multiplicity(&mut self) -> PResult<Multiplicity> {
        let pos = self.pos();
        if self.eat_punct("*") {
            return Ok(Multiplicity::MANY);
        }
        let lo = match *self.peek() {
            Tok::Number(n) => {
                self.bump();
                n
            }
            _ => {
                self.expected.insert("multiplicity".into());
                return Err(self.unexpected());
            }
        };
        if !self.eat_punct("..") {
            return Ok(Multiplicity { lo, hi: Some(lo) });
        }
        let hi = if self.eat_punct("*") {
            None
        } else if let Tok::Number(n) = *self.peek() {
            self.bump();
            Some(n)
        } else {
            self.expected.insert("upper bound".into());
            return Err(self.unexpected());
        };
        Multiplicity::range(lo, hi).ok_or_else(|| {
            Diagnostic::error(pos, "multiplicity lower bound exceeds upper bound")
        })
    }

    fn concept_block(&mut self, out: &mut Vec<ReferenceSpec>) -> PResult<()> {
        let (kind, pos) = self.expect_name("concept name")?;
        if kind != "simplereference" {
            return Err(Diagnostic::error(pos, format!("unsupported concept `{kind}`")));
        }
        self.expect_punct("{")?;
        while !self.is_punct("}") {
            let (role, pos) = self.expect_name("role name")?;
            self.expect_punct(":")?;
            let source = self.attr_path()?;
            self.expect_punct("->")?;
            let target = self.attr_path()?;
            self.expect_punct(";")?;
            out.push(ReferenceSpec { role, source, target, pos });
        }
        self.bump();
        Ok(())
    }

    fn attr_path(&mut self) -> PResult<AttrPath> {
        let (class, _) = self.expect_name("class name")?;
        self.expect_punct(".")?;
        let (attribute, _) = self.expect_name("attribute name")?;
        Ok(AttrPath { class, attribute })
    }
}

fn single_char(s: &str) -> Option<char> {
    let mut it = s.chars();
    let c = it.next()?;
    it.next().is_none().then_some(c)
}

fn class_ranges(p: &Pattern) -> Option<Vec<(char, char)>> {
    match p {
        Pattern::Literal(s) => single_char(s).map(|c| vec![(c, c)]),
        Pattern::Class { ranges, negated: false } => Some(ranges.clone()),
        Pattern::Alt(bs) => {
            let mut out = Vec::new();
            for b in bs {
                out.extend(class_ranges(b)?);
            }
            Some(out)
        }
        _ => None,
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn check_label(label: &str, pos: Pos) -> PResult<()> {
    if label.starts_with(|c: char| c.is_lowercase()) {
        Ok(())
    } else {
        Err(Diagnostic::error(
            pos,
            format!("attribute name `{label}` must start with a lowercase letter"),
        ))
    }
}

/// References to ident names become `IdentRef`s once the whole file is known.
fn classify_refs(g: &mut GrammarAst) {
    let idents: Vec<String> = g.idents.iter().map(|i| i.name.clone()).collect();
    let is_ident = |n: &str| n == IDENT || n == STRING || idents.iter().any(|i| i == n);
    fn fix(rhs: &mut Rhs, is_ident: &dyn Fn(&str) -> bool) {
        match &mut rhs.kind {
            RhsKind::Sequence(items) | RhsKind::Alternative(items) => {
                items.iter_mut().for_each(|i| fix(i, is_ident))
            }
            RhsKind::Repetition(inner, _) => fix(inner, is_ident),
            RhsKind::NonterminalRef { label, rule } if is_ident(rule) => {
                rhs.kind = RhsKind::IdentRef { label: label.take(), ident: std::mem::take(rule) };
            }
            _ => {}
        }
    }
    for p in &mut g.productions {
        fix(&mut p.rhs, &is_ident);
    }
}

fn check_duplicates(g: &GrammarAst) -> Result<(), Diagnostics> {
    let mut seen: HashMap<&str, Pos> = HashMap::new();
    let mut diags = Vec::new();
    let decls = g
        .idents
        .iter()
        .map(|i| (i.name.as_str(), i.pos))
        .chain(g.productions.iter().map(|p| (p.name.as_str(), p.pos)))
        .chain(g.interfaces.iter().map(|i| (i.name.as_str(), i.pos)));
    for (name, pos) in decls {
        if let Some(first) = seen.get(name) {
            diags.push(Diagnostic::error(
                pos,
                format!("duplicate declaration {name} (first declared at {first})"),
            ));
        } else {
            seen.insert(name, pos);
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        diags.sort_by_key(|d| d.pos);
        Err(Diagnostics(diags))
    }
}
