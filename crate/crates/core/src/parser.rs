//! The `.crn` text format.
//!
//! ```text
//! # comment
//! species A B C          # optional explicit declarations
//! volume = 1
//! A + B ->{2.5} 2 B + H  # rate in braces, defaults to 1
//! H ->{0.1} 0            # "0" is the empty side
//! init A = 800
//! ```
//!
//! Whitespace is insignificant within a line. Species used without a
//! declaration are declared implicitly unless parsing in strict mode.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::crn::{is_identifier, Crn, NamedReaction, State};
use crate::error::{CrnError, ParseError};

#[derive(Debug, Clone, PartialEq)]
pub struct DocReaction {
    pub reactants: Vec<(String, u32)>,
    pub products: Vec<(String, u32)>,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CrnDocument {
    pub declarations: Option<BTreeSet<String>>,
    pub volume: Option<f64>,
    pub reactions: Vec<DocReaction>,
    pub init: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    /// Reject species that are not declared with a `species` line.
    pub strict: bool,
}

pub fn parse_crn(text: &str) -> Result<CrnDocument, ParseError> {
    parse_crn_with(text, ParseOptions::default())
}

pub fn parse_crn_with(text: &str, opts: ParseOptions) -> Result<CrnDocument, ParseError> {
    let mut doc = CrnDocument::default();
    let mut pending_strict: Vec<(String, usize, usize)> = Vec::new();
    for (lineno, raw) in text.split('\n').enumerate() {
        let line_no = lineno + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let toks = lex(content, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser {
            toks: &toks,
            pos: 0,
            line: line_no,
            eol: content.len() + 1,
        };
        match &toks[0].kind {
            Tok::Ident(w) if w == "init" && !toks.iter().any(|t| t.kind == Tok::Arrow) => {
                p.pos = 1;
                let (name, col) = p.ident()?;
                p.expect(Tok::Eq, "`=`")?;
                let count = p.integer()?;
                p.end()?;
                if doc.init.insert(name.clone(), count as i64).is_some() {
                    return Err(ParseError::new(
                        line_no,
                        col,
                        format!("duplicate init for `{name}`"),
                    ));
                }
                pending_strict.push((name, line_no, col));
            }
            Tok::Ident(w) if w == "volume" && !toks.iter().any(|t| t.kind == Tok::Arrow) => {
                p.pos = 1;
                p.expect(Tok::Eq, "`=`")?;
                let (v, col) = p.real()?;
                p.end()?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(ParseError::new(line_no, col, "volume must be positive"));
                }
                if doc.volume.replace(v).is_some() {
                    return Err(ParseError::new(line_no, 1, "duplicate volume directive"));
                }
            }
            Tok::Ident(w) if w == "species" && !toks.iter().any(|t| t.kind == Tok::Arrow) => {
                p.pos = 1;
                let decl = doc.declarations.get_or_insert_with(BTreeSet::new);
                while p.pos < toks.len() {
                    if toks[p.pos].kind == Tok::Comma {
                        p.pos += 1;
                        continue;
                    }
                    let (name, col) = p.ident()?;
                    if !decl.insert(name.clone()) {
                        return Err(ParseError::new(
                            line_no,
                            col,
                            format!("species `{name}` declared twice"),
                        ));
                    }
                }
            }
            _ if toks.iter().any(|t| t.kind == Tok::Arrow) => {
                let r = p.reaction()?;
                for (name, _) in r.reactants.iter().chain(&r.products) {
                    pending_strict.push((name.clone(), line_no, 1));
                }
                doc.reactions.push(r);
            }
            _ => {
                let t = &toks[0];
                let what = match &t.kind {
                    Tok::Ident(w) => format!("unknown directive `{w}`"),
                    _ => "expected a reaction or directive".to_string(),
                };
                return Err(ParseError::new(line_no, t.col, what));
            }
        }
    }
    if opts.strict {
        let decl = doc.declarations.clone().unwrap_or_default();
        if let Some((name, line, col)) = pending_strict
            .into_iter()
            .find(|(n, _, _)| !decl.contains(n))
        {
            return Err(ParseError::new(
                line,
                col,
                format!("undeclared species `{name}`"),
            ));
        }
    }
    Ok(doc)
}

/// Canonical text: sorted declarations, volume, one reaction per line with an
/// explicit rate, then sorted init lines.
pub fn serialize_crn(doc: &CrnDocument) -> String {
    let mut out = String::new();
    if let Some(decl) = &doc.declarations {
        out.push_str("species");
        for s in decl {
            out.push(' ');
            out.push_str(s);
        }
        out.push('\n');
    }
    if let Some(v) = doc.volume {
        let _ = writeln!(out, "volume = {v}");
    }
    let side = |items: &[(String, u32)]| -> String {
        if items.is_empty() {
            return "0".to_string();
        }
        items
            .iter()
            .map(|(s, m)| {
                if *m == 1 {
                    s.clone()
                } else {
                    format!("{m} {s}")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    };
    for r in &doc.reactions {
        let _ = writeln!(
            out,
            "{} ->{{{}}} {}",
            side(&r.reactants),
            r.rate,
            side(&r.products)
        );
    }
    for (name, c) in &doc.init {
        let _ = writeln!(out, "init {name} = {c}");
    }
    out
}

impl CrnDocument {
    /// Species order: declared species (sorted), then undeclared species in
    /// order of first appearance in reactions, then init-only species.
    pub fn species_order(&self) -> Vec<String> {
        let mut names: Vec<String> = self.declarations.iter().flatten().cloned().collect();
        let mut seen: BTreeSet<String> = names.iter().cloned().collect();
        let mut add = |n: &String, names: &mut Vec<String>| {
            if seen.insert(n.clone()) {
                names.push(n.clone());
            }
        };
        for r in &self.reactions {
            for (n, _) in r.reactants.iter().chain(&r.products) {
                add(n, &mut names);
            }
        }
        for n in self.init.keys() {
            add(n, &mut names);
        }
        names
    }

    pub fn to_crn(&self) -> Result<Crn, CrnError> {
        let reactions = self
            .reactions
            .iter()
            .map(|r| NamedReaction {
                reactants: r.reactants.clone(),
                products: r.products.clone(),
                rate: r.rate,
            })
            .collect();
        Crn::from_names(self.species_order(), reactions, self.volume.unwrap_or(1.0))
    }

    pub fn initial_state(&self, crn: &Crn) -> Result<State, CrnError> {
        let mut s = State::zeros(crn.num_species());
        for (name, &c) in &self.init {
            s.0[crn.require(name)?] = c;
        }
        Ok(s)
    }

    /// Document describing `crn` with every species declared and `init` as
    /// the initial counts (zero entries omitted).
    pub fn from_crn(crn: &Crn, init: Option<&State>) -> Self {
        let reactions = (0..crn.reactions().len())
            .map(|i| {
                let r = crn.named_reaction(i);
                DocReaction {
                    reactants: r.reactants,
                    products: r.products,
                    rate: r.rate,
                }
            })
            .collect();
        let init = init
            .map(|s| {
                crn.species()
                    .iter()
                    .filter(|sp| s.0[sp.index] != 0)
                    .map(|sp| (sp.name.clone(), s.0[sp.index]))
                    .collect()
            })
            .unwrap_or_default();
        CrnDocument {
            declarations: Some(crn.species_names().map(str::to_string).collect()),
            volume: (crn.volume() != 1.0).then(|| crn.volume()),
            reactions,
            init,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Plus,
    Arrow,
    LBrace,
    RBrace,
    Eq,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    col: usize,
}

fn lex(line: &str, line_no: usize) -> Result<Vec<Token>, ParseError> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        match c {
            b' ' | b'\t' => i += 1,
            b'+' => {
                out.push(Token {
                    kind: Tok::Plus,
                    col,
                });
                i += 1;
            }
            b'{' => {
                out.push(Token {
                    kind: Tok::LBrace,
                    col,
                });
                i += 1;
            }
            b'}' => {
                out.push(Token {
                    kind: Tok::RBrace,
                    col,
                });
                i += 1;
            }
            b'=' => {
                out.push(Token { kind: Tok::Eq, col });
                i += 1;
            }
            b',' => {
                out.push(Token {
                    kind: Tok::Comma,
                    col,
                });
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push(Token {
                    kind: Tok::Arrow,
                    col,
                });
                i += 2;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                out.push(Token {
                    kind: Tok::Number(line[start..i].to_string()),
                    col,
                });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: Tok::Ident(line[start..i].to_string()),
                    col,
                });
            }
            _ => {
                let ch = line[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(
                    line_no,
                    col,
                    format!("unexpected character `{ch}`"),
                ));
            }
        }
    }
    Ok(out)
}

struct LineParser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    eol: usize,
}

impl LineParser<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        let col = self.toks.get(self.pos).map_or(self.eol, |t| t.col);
        ParseError::new(self.line, col, msg)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            Err(self.err("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    fn ident(&mut self) -> Result<(String, usize), ParseError> {
        match self.toks.get(self.pos) {
            Some(Token {
                kind: Tok::Ident(s),
                col,
            }) if is_identifier(s) => {
                self.pos += 1;
                Ok((s.clone(), *col))
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    fn integer(&mut self) -> Result<u64, ParseError> {
        match self.toks.get(self.pos) {
            Some(Token {
                kind: Tok::Number(s),
                col,
            }) => {
                let v = s.parse::<u64>().map_err(|_| {
                    ParseError::new(
                        self.line,
                        *col,
                        format!("expected non-negative integer, got `{s}`"),
                    )
                })?;
                if v > i64::MAX as u64 {
                    return Err(ParseError::new(self.line, *col, "integer too large"));
                }
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err("expected integer")),
        }
    }

    fn real(&mut self) -> Result<(f64, usize), ParseError> {
        match self.toks.get(self.pos) {
            Some(Token {
                kind: Tok::Number(s),
                col,
            }) => {
                let v = s.parse::<f64>().map_err(|_| {
                    ParseError::new(self.line, *col, format!("malformed number `{s}`"))
                })?;
                self.pos += 1;
                Ok((v, *col))
            }
            _ => Err(self.err("expected number")),
        }
    }

    fn reaction(&mut self) -> Result<DocReaction, ParseError> {
        let reactants = self.side()?;
        self.expect(Tok::Arrow, "`->`")?;
        let mut rate = 1.0;
        if self.peek() == Some(&Tok::LBrace) {
            self.pos += 1;
            let (v, col) = self.real()?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(ParseError::new(
                    self.line,
                    col,
                    "rate constant must be positive",
                ));
            }
            rate = v;
            self.expect(Tok::RBrace, "`}`")?;
        }
        let products = self.side()?;
        self.end()?;
        Ok(DocReaction {
            reactants,
            products,
            rate,
        })
    }

    fn side(&mut self) -> Result<Vec<(String, u32)>, ParseError> {
        if let Some(Tok::Number(n)) = self.peek() {
            let is_zero = n.parse::<u64>() == Ok(0);
            let next_is_ident = matches!(
                self.toks.get(self.pos + 1).map(|t| &t.kind),
                Some(Tok::Ident(_))
            );
            if is_zero && !next_is_ident {
                self.pos += 1;
                return Ok(Vec::new());
            }
        }
        let mut terms: Vec<(String, u32)> = Vec::new();
        loop {
            let coeff = match self.peek() {
                Some(Tok::Number(_)) => {
                    let col = self.toks[self.pos].col;
                    let c = self.integer()?;
                    if c == 0 || c > u32::MAX as u64 {
                        return Err(ParseError::new(
                            self.line,
                            col,
                            "stoichiometry must be a positive integer",
                        ));
                    }
                    c as u32
                }
                _ => 1,
            };
            let (name, _) = self.ident()?;
            match terms.iter_mut().find(|(n, _)| *n == name) {
                Some(t) => t.1 += coeff,
                None => terms.push((name, coeff)),
            }
            if self.peek() == Some(&Tok::Plus) {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reaction_with_rate() {
        let d = parse_crn("A + B ->{2.5} 2 B + H").unwrap();
        assert_eq!(
            d.reactions,
            vec![DocReaction {
                reactants: vec![("A".into(), 1), ("B".into(), 1)],
                products: vec![("B".into(), 2), ("H".into(), 1)],
                rate: 2.5
            }]
        );
    }

    #[test]
    fn default_rate_and_empty_side() {
        let d = parse_crn("X1 -> X2\nH ->{0.1} 0\n0 -> A").unwrap();
        assert_eq!(d.reactions[0].rate, 1.0);
        assert!(d.reactions[1].products.is_empty());
        assert_eq!(d.reactions[1].rate, 0.1);
        assert!(d.reactions[2].reactants.is_empty());
    }

    #[test]
    fn directives_and_comments() {
        let text =
            "# header\r\nspecies B, A\r\nvolume = 2e0\r\nA -> B # trailing\r\ninit A = 3\r\n";
        let d = parse_crn(text).unwrap();
        assert_eq!(d.volume, Some(2.0));
        assert_eq!(d.init.get("A"), Some(&3));
        let crn = d.to_crn().unwrap();
        assert_eq!(crn.species_names().collect::<Vec<_>>(), ["A", "B"]);
        assert_eq!(d.initial_state(&crn).unwrap().0, vec![3, 0]);
    }

    #[test]
    fn coefficient_without_space() {
        let d = parse_crn("2A ->{1e-3} A2").unwrap();
        assert_eq!(d.reactions[0].reactants, vec![("A".to_string(), 2)]);
        assert_eq!(d.reactions[0].products, vec![("A2".to_string(), 1)]);
        assert_eq!(d.reactions[0].rate, 1e-3);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_crn("A -> B\nA ->{0} B").unwrap_err();
        assert_eq!((e.line, e.column), (2, 6));
        let e = parse_crn("A ->{-1} B").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_crn("init A = 1\ninit A = 2").unwrap_err();
        assert!(e.message.contains("duplicate init"));
        let e = parse_crn("frobnicate A").unwrap_err();
        assert!(e.message.contains("unknown directive"));
        let e = parse_crn("A + -> B").unwrap_err();
        assert_eq!(e.column, 5);
        assert!(parse_crn("A -> B $").is_err());
        assert_eq!(
            parse_crn("1X -> B").unwrap().reactions[0].reactants,
            vec![("X".to_string(), 1)]
        );
    }

    #[test]
    fn strict_mode_requires_declarations() {
        let opts = ParseOptions { strict: true };
        assert!(parse_crn_with("species A B\nA -> B", opts).is_ok());
        let e = parse_crn_with("species A\nA -> B", opts).unwrap_err();
        assert!(e.message.contains("undeclared species `B`"));
        assert!(parse_crn_with("species A\ninit C = 1", opts).is_err());
    }

    #[test]
    fn canonical_form() {
        let d = parse_crn("X1 -> X2\nH ->{0.1} 0").unwrap();
        let s = serialize_crn(&d);
        assert_eq!(s, "X1 ->{1} X2\nH ->{0.1} 0\n");
        assert_eq!(parse_crn(&s).unwrap(), d);
    }

    fn arb_name() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["A", "B", "C", "H", "L0", "L_1", "T10", "_x"])
            .prop_map(String::from)
    }

    fn arb_side() -> impl Strategy<Value = Vec<(String, u32)>> {
        prop::collection::btree_map(arb_name(), 1u32..4, 0..3).prop_map(|m| m.into_iter().collect())
    }

    prop_compose! {
        fn arb_doc()(
            decl in prop::option::of(prop::collection::btree_set(arb_name(), 0..4)),
            volume in prop::option::of(1e-3f64..1e3),
            reactions in prop::collection::vec((arb_side(), arb_side(), 1e-6f64..1e6), 0..5),
            init in prop::collection::btree_map(arb_name(), 0i64..10_000, 0..4),
        ) -> CrnDocument {
            CrnDocument {
                declarations: decl,
                volume,
                reactions: reactions.into_iter().map(|(r, p, k)| DocReaction { reactants: r, products: p, rate: k }).collect(),
                init,
            }
        }
    }

    proptest! {
        #[test]
        fn serialize_round_trips(doc in arb_doc()) {
            let text = serialize_crn(&doc);
            prop_assert_eq!(parse_crn(&text).unwrap(), doc);
        }
    }
}
