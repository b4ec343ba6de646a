//! Concrete syntax for formulas.
//!
//! ```text
//! formula := or ("=>" formula)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "(" formula ")" | prob | atom
//! prob    := "P>=" pexpr "[" path "]"
//! path    := "F<=" pexpr formula | "G<=" pexpr formula | "G" formula
//!          | formula "W" formula
//! atom    := true | false | named | lin cmp lin
//! ```
//!
//! Inside a path, a leading `F<=` or `G<=` is always read as a temporal
//! operator; comparisons on species called `F` or `G` must be parenthesized.

use crate::error::{CslError, ParseError};

use super::formula::{Atom, Cmp, Formula, LinExpr, Named, PExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 19] = [
    "=>", ">=", "<=", "==", "!=", "&&", "||", ">", "<", "=", "!", "&", "|", "(", ")", "[", "]",
    "+", "-",
];

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            let tok = if c.is_ascii_digit()
                || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
            {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                Tok::Num(chars[start..i].iter().collect())
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            } else if c == '*' || c == '/' {
                i += 1;
                Tok::Sym(if c == '*' { "*" } else { "/" })
            } else {
                let rest: String = chars[i..].iter().take(2).collect();
                let sym = SYMBOLS
                    .iter()
                    .find(|s| rest.starts_with(**s))
                    .ok_or_else(|| {
                        ParseError::new(ln + 1, col, format!("unexpected character `{c}`"))
                    })?;
                i += sym.len();
                Tok::Sym(match *sym {
                    "&&" => "&",
                    "||" => "|",
                    "==" => "=",
                    s => s,
                })
            };
            out.push(Spanned {
                tok,
                line: ln + 1,
                col,
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = match self.toks.get(self.pos).or(self.toks.last()) {
            Some(s) => (s.line, s.col),
            None => (1, 1),
        };
        ParseError::new(line, col, msg)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat("=>") {
            let rhs = self.formula()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.and()?;
        while self.eat("|") {
            f = f.or(self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.eat("&") {
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat("!") {
            return Ok(self.unary()?.not());
        }
        if self.is_sym("(") {
            // a parenthesized linear expression starts a comparison
            let save = self.pos;
            self.pos += 1;
            let f = self.formula();
            if let Ok(f) = f {
                if self.eat(")") {
                    return Ok(f);
                }
            }
            self.pos = save;
            return self.atom();
        }
        if matches!(self.peek(), Some(Tok::Ident(p)) if p == "P")
            && matches!(self.peek_at(1), Some(Tok::Sym(">=")))
        {
            let save = self.pos;
            self.pos += 2;
            if let Ok(bound) = self.pexpr() {
                if self.eat("[") {
                    let f = self.path(bound)?;
                    self.expect("]")?;
                    return Ok(f);
                }
            }
            self.pos = save;
        }
        self.atom()
    }

    fn path(&mut self, bound: PExpr) -> Result<Formula, ParseError> {
        if let Some(Tok::Ident(op)) = self.peek() {
            let op = op.clone();
            let next_le = matches!(self.peek_at(1), Some(Tok::Sym("<=")));
            if (op == "F" || op == "G") && next_le {
                self.pos += 2;
                let time = self.pexpr()?;
                let phi = Box::new(self.formula()?);
                return Ok(if op == "F" {
                    Formula::ProbEventually { bound, time, phi }
                } else {
                    Formula::ProbGlobally { bound, time, phi }
                });
            }
            let next_cmp = matches!(
                self.peek_at(1),
                Some(Tok::Sym(">" | ">=" | "<" | "=" | "!=" | "+" | "-" | "*"))
            );
            if op == "G" && !next_cmp {
                if bound != PExpr::Num(1.0) {
                    return Err(self.err("unbounded `G` requires probability bound 1"));
                }
                self.pos += 1;
                return Ok(Formula::GloballyAll(Box::new(self.formula()?)));
            }
        }
        let phi = Box::new(self.formula()?);
        match self.peek() {
            Some(Tok::Ident(w)) if w == "W" => self.pos += 1,
            _ => return Err(self.err("expected `F<=`, `G<=`, `G` or `W` in path formula")),
        }
        let psi = Box::new(self.formula()?);
        Ok(Formula::ProbWeakUntil { bound, phi, psi })
    }

    fn pexpr(&mut self) -> Result<PExpr, ParseError> {
        let mut e = self.pterm()?;
        loop {
            if self.eat("+") {
                e = PExpr::Add(Box::new(e), Box::new(self.pterm()?));
            } else if self.eat("-") {
                e = PExpr::Sub(Box::new(e), Box::new(self.pterm()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn pterm(&mut self) -> Result<PExpr, ParseError> {
        let mut e = self.pfactor()?;
        loop {
            if self.eat("*") {
                e = PExpr::Mul(Box::new(e), Box::new(self.pfactor()?));
            } else if self.eat("/") {
                e = PExpr::Div(Box::new(e), Box::new(self.pfactor()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn pfactor(&mut self) -> Result<PExpr, ParseError> {
        if self.eat("-") {
            return Ok(match self.pfactor()? {
                PExpr::Num(x) => PExpr::Num(-x),
                e => PExpr::Sub(Box::new(PExpr::Num(0.0)), Box::new(e)),
            });
        }
        if self.eat("(") {
            let e = self.pexpr()?;
            self.expect(")")?;
            return Ok(e);
        }
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                s.parse()
                    .map(PExpr::Num)
                    .map_err(|_| self.err(format!("bad number `{s}`")))
            }
            Some(Tok::Ident(v)) => {
                self.pos += 1;
                Ok(PExpr::Var(v))
            }
            _ => Err(self.err("expected a number or parameter")),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        if let Some(Tok::Ident(id)) = self.peek() {
            let id = id.clone();
            let continues = matches!(
                self.peek_at(1),
                Some(Tok::Sym(
                    ">" | ">=" | "<" | "<=" | "=" | "!=" | "+" | "-" | "*"
                ))
            );
            if !continues {
                if id == "true" {
                    self.pos += 1;
                    return Ok(Formula::tt());
                }
                if id == "false" {
                    self.pos += 1;
                    return Ok(Formula::ff());
                }
                if let Some(n) = Named::from_keyword(&id) {
                    self.pos += 1;
                    return Ok(Formula::named(n));
                }
            }
        }
        let lhs = self.lin()?;
        let op = match self.peek() {
            Some(Tok::Sym(">")) => Cmp::Gt,
            Some(Tok::Sym(">=")) => Cmp::Ge,
            Some(Tok::Sym("<")) => Cmp::Lt,
            Some(Tok::Sym("<=")) => Cmp::Le,
            Some(Tok::Sym("=")) => Cmp::Eq,
            Some(Tok::Sym("!=")) => Cmp::Ne,
            _ => return Err(self.err("expected a comparison operator")),
        };
        self.pos += 1;
        let rhs = self.lin()?;
        Ok(Formula::Atom(Atom::Compare(lhs, op, rhs)))
    }

    fn lin(&mut self) -> Result<LinExpr, ParseError> {
        let mut e = LinExpr::default();
        let mut sign = if self.eat("-") { -1 } else { 1 };
        loop {
            self.lin_term(sign, &mut e)?;
            if self.eat("+") {
                sign = 1;
            } else if self.eat("-") {
                sign = -1;
            } else {
                return Ok(e);
            }
        }
    }

    fn lin_term(&mut self, sign: i64, e: &mut LinExpr) -> Result<(), ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                let c: i64 = s
                    .parse()
                    .map_err(|_| self.err(format!("expected an integer, found `{s}`")))?;
                if self.eat("*") {
                    match self.peek().cloned() {
                        Some(Tok::Ident(v)) => {
                            self.pos += 1;
                            e.terms.push((sign * c, v));
                        }
                        _ => return Err(self.err("expected a species name after `*`")),
                    }
                } else {
                    e.constant += sign * c;
                }
                Ok(())
            }
            Some(Tok::Ident(v)) => {
                self.pos += 1;
                e.terms.push((sign, v));
                Ok(())
            }
            _ => Err(self.err("expected a species name or integer")),
        }
    }
}

/// Parses a single formula.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    if p.peek().is_none() {
        return Err(ParseError::new(1, 1, "empty formula"));
    }
    let f = p.formula()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

/// Parses a file of formulas, one per non-empty line. Lines may carry an
/// identifier as `name: formula`.
pub fn parse_formula_file(src: &str) -> Result<Vec<(String, Formula)>, CslError> {
    let mut out = Vec::new();
    for (n, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (id, body) = match line.split_once(':') {
            Some((id, body))
                if !id.trim().is_empty()
                    && id
                        .trim()
                        .chars()
                        .all(|c| c.is_alphanumeric() || "_.-".contains(c)) =>
            {
                (id.trim().to_string(), body)
            }
            _ => (format!("f{}", out.len() + 1), line),
        };
        let f = parse_formula(body).map_err(|e| ParseError::new(n + 1, e.column, e.message))?;
        out.push((id, f));
    }
    Ok(out)
}
