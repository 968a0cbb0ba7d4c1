//! Recursive-descent parser for the signature / theory / formula DSL.
//!
//! Formula grammar, loosest binding first:
//!
//! ```text
//! formula  := lattice
//! lattice  := additive (("/\" | "\/") additive)*
//! additive := unary (("+" | "-.") unary)*
//! unary    := "~" unary | postfix
//! postfix  := primary ("/" "2")*
//! primary  := number ["/" integer] | "(" formula ")" | "|" formula "-" formula "|"
//!           | ("min" | "max") "(" formula ("," formula)+ ")"
//!           | ("sup" | "inf") binders "." formula
//!           | ident ["(" terms ")"]
//! ```

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::syntax::{check_distinct, Formula, Modulus, Signature, Term, Theory, Variable};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    Plus,
    MinusDot,
    Minus,
    Arrow,
    Tilde,
    Slash,
    Pipe,
    Wedge,
    Vee,
    Equals,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn lex(src: &str) -> Result<Vec<Spanned>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| Error::Syntax { line, col, message };
    while i < bytes.len() {
        let c = bytes[i];
        let (l0, c0) = (line, col);
        let mut push = |tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned {
                tok,
                line: l0,
                col: c0,
            });
            *i += len;
            *col += len;
        };
        match c {
            b'\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            b' ' | b'\t' | b'\r' => {
                i += 1;
                col += 1;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'\\') => push(Tok::Wedge, 2, &mut i, &mut col),
            b'\\' if bytes.get(i + 1) == Some(&b'/') => push(Tok::Vee, 2, &mut i, &mut col),
            b'-' if bytes.get(i + 1) == Some(&b'.') => push(Tok::MinusDot, 2, &mut i, &mut col),
            b'-' if bytes.get(i + 1) == Some(&b'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            b'-' => push(Tok::Minus, 1, &mut i, &mut col),
            b'(' => push(Tok::LParen, 1, &mut i, &mut col),
            b')' => push(Tok::RParen, 1, &mut i, &mut col),
            b'{' => push(Tok::LBrace, 1, &mut i, &mut col),
            b'}' => push(Tok::RBrace, 1, &mut i, &mut col),
            b',' => push(Tok::Comma, 1, &mut i, &mut col),
            b';' => push(Tok::Semi, 1, &mut i, &mut col),
            b':' => push(Tok::Colon, 1, &mut i, &mut col),
            b'.' => push(Tok::Dot, 1, &mut i, &mut col),
            b'+' => push(Tok::Plus, 1, &mut i, &mut col),
            b'~' => push(Tok::Tilde, 1, &mut i, &mut col),
            b'/' => push(Tok::Slash, 1, &mut i, &mut col),
            b'|' => push(Tok::Pipe, 1, &mut i, &mut col),
            b'=' => push(Tok::Equals, 1, &mut i, &mut col),
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Number(src[start..i].to_string()),
                    line: l0,
                    col: c0,
                });
                col += i - start;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(src[start..i].to_string()),
                    line: l0,
                    col: c0,
                });
                col += i - start;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(err(line, col, format!("unexpected character {ch:?}")));
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

const KEYWORDS: &[&str] = &["sup", "inf", "min", "max"];

pub(crate) struct Parser<'s> {
    toks: Vec<Spanned>,
    pos: usize,
    pub sig: &'s Signature,
    scope: Vec<Variable>,
    free: IndexMap<String, Variable>,
}

impl<'s> Parser<'s> {
    pub fn new(src: &str, sig: &'s Signature) -> Result<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            sig,
            scope: Vec::new(),
            free: IndexMap::new(),
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let s = &self.toks[self.pos];
        Err(Error::Syntax {
            line: s.line,
            col: s.col,
            message: message.into(),
        })
    }

    pub fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {:?}, found {:?}", tok, self.peek()))
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {other:?}")),
        }
    }

    pub fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => self.error(format!("expected `{kw}`, found {other:?}")),
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn rational(&mut self) -> Result<Rational> {
        let n = match self.bump() {
            Tok::Number(n) => n,
            other => return self.error(format!("expected number, found {other:?}")),
        };
        let mut text = n.clone();
        if !n.contains('.') && *self.peek() == Tok::Slash {
            if let Tok::Number(d) = self.peek_at(1).clone() {
                if !d.contains('.') {
                    self.bump();
                    self.bump();
                    text = format!("{n}/{d}");
                }
            }
        }
        match rational::parse_rational(&text) {
            Ok(q) => Ok(q),
            Err(e) => self.error(e),
        }
    }

    /// Free variables seen so far, in first-occurrence order.
    pub fn take_free(&mut self) -> Vec<Variable> {
        std::mem::take(&mut self.free).into_values().collect()
    }

    /// Pre-declares variables (e.g. a context `x:S, y:S`) so they resolve by
    /// name even where the sort could not be inferred.
    pub fn declare_free(&mut self, vars: &[Variable]) {
        for v in vars {
            self.free.insert(v.name.clone(), v.clone());
        }
    }

    /// `x:S, y:T` (at least one binder).
    pub fn binders(&mut self) -> Result<Vec<Variable>> {
        let mut vars = Vec::new();
        loop {
            let name = self.ident()?;
            self.expect(Tok::Colon)?;
            let sort = self.ident()?;
            if !self.sig.has_sort(&sort) {
                return Err(Error::UnknownSymbol(sort));
            }
            vars.push(Variable::new(&name, &sort));
            if *self.peek() == Tok::Comma && matches!(self.peek_at(2), Tok::Colon) {
                self.bump();
            } else {
                break;
            }
        }
        Ok(vars)
    }

    pub fn formula(&mut self) -> Result<Formula> {
        let mut lhs = self.additive()?;
        loop {
            match self.peek() {
                Tok::Wedge => {
                    self.bump();
                    let rhs = self.additive()?;
                    lhs = Formula::max(lhs, rhs);
                }
                Tok::Vee => {
                    self.bump();
                    let rhs = self.additive()?;
                    lhs = Formula::min(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn additive(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Formula::add(lhs, rhs);
                }
                Tok::MinusDot => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Formula::monus(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Formula> {
        if *self.peek() == Tok::Tilde {
            self.bump();
            return Ok(Formula::neg(self.unary()?));
        }
        let mut f = self.primary()?;
        while *self.peek() == Tok::Slash {
            match self.peek_at(1) {
                Tok::Number(n) if n == "2" => {
                    self.bump();
                    self.bump();
                    f = Formula::half(f);
                }
                _ => {
                    self.bump();
                    return self.error("only halving `/2` is supported as a postfix operator");
                }
            }
        }
        Ok(f)
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Number(_) => {
                let q = self.rational()?;
                if !rational::in_unit_interval(&q) {
                    return self.error("constant outside [0,1]");
                }
                Ok(Formula::Const(q))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Pipe => {
                self.bump();
                let a = self.formula()?;
                self.expect(Tok::Minus)?;
                let b = self.formula()?;
                self.expect(Tok::Pipe)?;
                Ok(Formula::abs_diff(a, b))
            }
            Tok::Ident(kw) if kw == "min" || kw == "max" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let mut items = vec![self.formula()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    items.push(self.formula()?);
                }
                self.expect(Tok::RParen)?;
                if items.len() < 2 {
                    return self.error(format!("`{kw}` needs at least two arguments"));
                }
                Ok(if kw == "min" {
                    Formula::min_all(items)
                } else {
                    Formula::max_all(items)
                })
            }
            Tok::Ident(kw) if kw == "sup" || kw == "inf" => {
                self.bump();
                let vars = self.binders()?;
                if let Err(Error::Check(m)) = check_distinct(&vars) {
                    return self.error(m);
                }
                self.expect(Tok::Dot)?;
                let n = self.scope.len();
                self.scope.extend(vars.iter().cloned());
                let body = self.formula();
                self.scope.truncate(n);
                let body = Box::new(body?);
                Ok(if kw == "sup" {
                    Formula::Sup { vars, body }
                } else {
                    Formula::Inf { vars, body }
                })
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(rel) = self.sig.relation(&name) {
                    let domain = rel.domain.clone();
                    let args = if *self.peek() == Tok::LParen {
                        self.term_args(&name, &domain)?
                    } else if domain.is_empty() {
                        Vec::new()
                    } else {
                        return self.error(format!("relation `{name}` needs arguments"));
                    };
                    return Ok(Formula::Atom { rel: name, args });
                }
                if let Some(native) = self.sig.native(&name) {
                    let arity = native.arity;
                    self.expect(Tok::LParen)?;
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        args.push(self.formula()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.formula()?);
                        }
                    }
                    self.expect(Tok::RParen)?;
                    if args.len() != arity {
                        return Err(Error::Sort(format!(
                            "native `{name}` expects {arity} arguments, got {}",
                            args.len()
                        )));
                    }
                    return Ok(Formula::Native { name, args });
                }
                Err(Error::UnknownSymbol(name))
            }
            other => self.error(format!("expected formula, found {other:?}")),
        }
    }

    fn term_args(&mut self, symbol: &str, domain: &[String]) -> Result<Vec<Term>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let expected = domain.get(args.len()).cloned();
                let Some(expected) = expected else {
                    return Err(Error::Sort(format!(
                        "`{symbol}` expects {} arguments",
                        domain.len()
                    )));
                };
                args.push(self.term(&expected)?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        if args.len() != domain.len() {
            return Err(Error::Sort(format!(
                "`{symbol}` expects {} arguments, got {}",
                domain.len(),
                args.len()
            )));
        }
        Ok(args)
    }

    /// A term that must have sort `expected`.
    pub fn term(&mut self, expected: &str) -> Result<Term> {
        let name = self.ident()?;
        if KEYWORDS.contains(&name.as_str()) {
            return self.error(format!("`{name}` is reserved"));
        }
        if *self.peek() == Tok::LParen {
            let sym = self
                .sig
                .function(&name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            let (domain, codomain) = (sym.domain.clone(), sym.codomain.clone());
            if codomain != expected {
                return Err(Error::Sort(format!(
                    "`{name}` has sort {codomain}, expected {expected}"
                )));
            }
            let args = self.term_args(&name, &domain)?;
            return Ok(Term::App { func: name, args });
        }
        if let Some(v) = self.scope.iter().rev().find(|v| v.name == name) {
            if v.sort != expected {
                return Err(Error::Sort(format!(
                    "variable `{name}` has sort {}, expected {expected}",
                    v.sort
                )));
            }
            return Ok(Term::Var(v.clone()));
        }
        if let Some(sym) = self.sig.function(&name) {
            if sym.arity() != 0 {
                return Err(Error::Sort(format!("`{name}` needs arguments")));
            }
            if sym.codomain != expected {
                return Err(Error::Sort(format!(
                    "`{name}` has sort {}, expected {expected}",
                    sym.codomain
                )));
            }
            return Ok(Term::constant(&name));
        }
        if self.sig.is_symbol(&name) {
            return Err(Error::Sort(format!("`{name}` is not a term")));
        }
        if let Some(v) = self.free.get(&name) {
            if v.sort != expected {
                return Err(Error::Sort(format!(
                    "free variable `{name}` used at sorts {} and {expected}",
                    v.sort
                )));
            }
            return Ok(Term::Var(v.clone()));
        }
        let v = Variable::new(&name, expected);
        self.free.insert(name, v.clone());
        Ok(Term::Var(v))
    }
}

/// Parses a single formula; free variable sorts are inferred from use.
pub fn parse_formula(sig: &Signature, text: &str) -> Result<Formula> {
    let mut p = Parser::new(text, sig)?;
    let f = p.formula()?;
    if !p.at_eof() {
        return p.error(format!("unexpected trailing {:?}", p.peek()));
    }
    sig.check_formula(&f)?;
    Ok(f)
}

/// Parses a formula whose free variables are declared up front; returns the
/// formula with exactly that context (unused context variables are kept).
pub fn parse_formula_in(sig: &Signature, context: &[Variable], text: &str) -> Result<Formula> {
    let mut p = Parser::new(text, sig)?;
    p.declare_free(context);
    let f = p.formula()?;
    if !p.at_eof() {
        return p.error(format!("unexpected trailing {:?}", p.peek()));
    }
    sig.check_formula(&f)?;
    for v in f.free_variables() {
        if !context.contains(&v) {
            return Err(Error::Context(format!(
                "free variable `{}` not in the declared context",
                v.name
            )));
        }
    }
    Ok(f)
}

/// Parses `x:S, y:T` (possibly empty).
pub fn parse_binders(sig: &Signature, text: &str) -> Result<Vec<Variable>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut p = Parser::new(text, sig)?;
    let vars = p.binders()?;
    if !p.at_eof() {
        return p.error(format!("unexpected trailing {:?}", p.peek()));
    }
    check_distinct(&vars)?;
    Ok(vars)
}

fn sort_list(p: &mut Parser, terminators: &[Tok]) -> Result<Vec<String>> {
    let mut out = Vec::new();
    if terminators.contains(p.peek()) {
        return Ok(out);
    }
    loop {
        out.push(p.ident()?);
        if *p.peek() == Tok::Comma {
            p.bump();
        } else {
            return Ok(out);
        }
    }
}

/// Parses one declaration into `sig`. Returns `false` at a non-declaration.
fn declaration(p: &mut Parser, sig: &mut Signature) -> Result<bool> {
    let kw = match p.peek() {
        Tok::Ident(k) => k.clone(),
        _ => return Ok(false),
    };
    let refs = |v: &[String]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match kw.as_str() {
        "sort" => {
            p.bump();
            let name = p.ident()?;
            p.expect(Tok::Semi)?;
            sig.add_sort(&name)?;
        }
        "fn" => {
            p.bump();
            let name = p.ident()?;
            p.expect(Tok::Colon)?;
            let domain = sort_list(p, &[Tok::Arrow])?;
            p.expect(Tok::Arrow)?;
            let codomain = p.ident()?;
            p.expect(Tok::Semi)?;
            let d = refs(&domain);
            sig.add_function(
                &name,
                &d.iter().map(String::as_str).collect::<Vec<_>>(),
                &codomain,
            )?;
        }
        "rel" => {
            p.bump();
            let name = p.ident()?;
            let domain = if *p.peek() == Tok::Colon {
                p.bump();
                sort_list(p, &[Tok::Semi])?
            } else {
                Vec::new()
            };
            p.expect(Tok::Semi)?;
            sig.add_relation(&name, &domain.iter().map(String::as_str).collect::<Vec<_>>())?;
        }
        "metric" => {
            p.bump();
            let name = p.ident()?;
            p.expect(Tok::Colon)?;
            let sort = p.ident()?;
            p.expect(Tok::Semi)?;
            sig.add_metric(&name, &sort)?;
        }
        "native" => {
            p.bump();
            let name = p.ident()?;
            p.expect(Tok::Colon)?;
            let arity = match p.bump() {
                Tok::Number(n) => n
                    .parse::<usize>()
                    .or_else(|_| p.error("arity must be an integer"))?,
                _ => return p.error("expected arity"),
            };
            p.keyword("lipschitz")?;
            let l = p.rational()?;
            p.expect(Tok::Semi)?;
            sig.add_native(&name, arity, l)?;
        }
        "modulus" => {
            p.bump();
            let name = p.ident()?;
            p.expect(Tok::LBrace)?;
            let mut pairs = Vec::new();
            while *p.peek() != Tok::RBrace {
                let delta = p.rational()?;
                p.expect(Tok::Arrow)?;
                let eps = p.rational()?;
                p.expect(Tok::Semi)?;
                pairs.push((delta, eps));
            }
            p.expect(Tok::RBrace)?;
            sig.set_modulus(&name, Modulus::new(pairs)?)?;
        }
        _ => return Ok(false),
    }
    Ok(true)
}

/// Parses a `.cms` signature file.
pub fn parse_signature(text: &str) -> Result<Signature> {
    let mut sig = Signature::new();
    let empty = Signature::new();
    let mut p = Parser::new(text, &empty)?;
    while !p.at_eof() {
        if !declaration(&mut p, &mut sig)? {
            return p.error(format!("expected declaration, found {:?}", p.peek()));
        }
    }
    Ok(sig)
}

/// Parses a `.cmt` theory file: declarations followed by `axiom φ;` lines.
pub fn parse_theory(text: &str) -> Result<Theory> {
    let toks = lex(text)?;
    // Declarations come first; collect them, then parse axioms against the
    // finished signature.
    let mut sig = Signature::new();
    let empty = Signature::new();
    let mut p = Parser::new(text, &empty)?;
    while !p.at_eof() && !p.is_keyword("axiom") {
        if !declaration(&mut p, &mut sig)? {
            return p.error(format!("expected declaration or axiom, found {:?}", p.peek()));
        }
    }
    let start = p.pos;
    drop(p);
    let mut p = Parser {
        toks,
        pos: start,
        sig: &sig,
        scope: Vec::new(),
        free: IndexMap::new(),
    };
    let mut axioms = Vec::new();
    while !p.at_eof() {
        p.keyword("axiom")?;
        let f = p.formula()?;
        p.expect(Tok::Semi)?;
        let free = p.take_free();
        if let Some(v) = free.first() {
            return Err(Error::Check(format!("axiom has free variable `{}`", v.name)));
        }
        axioms.push(f);
    }
    let sig = std::sync::Arc::new(sig);
    Theory::new(sig, axioms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn m0_sig() -> Signature {
        parse_signature(
            "sort S; metric d : S; rel R : S; fn f : S -> S; fn e : -> S;\n\
             modulus R { 0.6 -> 0.6; }",
        )
        .unwrap()
    }

    #[test]
    fn parses_inf() {
        let sig = m0_sig();
        let f = parse_formula(&sig, "inf x:S. R(x)").unwrap();
        let x = Variable::new("x", "S");
        assert_eq!(
            f,
            Formula::inf(vec![x.clone()], Formula::atom("R", vec![Term::Var(x)]))
        );
    }

    #[test]
    fn abs_desugars() {
        let sig = m0_sig();
        let f = parse_formula(&sig, "sup x:S. |R(x) - 0.25|").unwrap();
        let x = Variable::new("x", "S");
        let r = Formula::atom("R", vec![Term::Var(x.clone())]);
        let q = Formula::Const(ratio(1, 4));
        assert_eq!(
            f,
            Formula::sup(
                vec![x],
                Formula::max(Formula::monus(r.clone(), q.clone()), Formula::monus(q, r))
            )
        );
    }

    #[test]
    fn literal_versus_halving() {
        let sig = m0_sig();
        assert_eq!(parse_formula(&sig, "1/2").unwrap(), Formula::Const(ratio(1, 2)));
        assert_eq!(
            parse_formula(&sig, "(1)/2").unwrap(),
            Formula::half(Formula::one())
        );
        assert_eq!(
            parse_formula(&sig, "1/3/2").unwrap(),
            Formula::half(Formula::Const(ratio(1, 3)))
        );
    }

    #[test]
    fn lattice_sugar() {
        let sig = m0_sig();
        let f = parse_formula(&sig, "R(x) /\\ R(e)").unwrap();
        assert!(matches!(f, Formula::Max(_, _)));
        let f = parse_formula(&sig, "R(x) \\/ R(e)").unwrap();
        assert!(matches!(f, Formula::Min(_, _)));
    }

    #[test]
    fn errors_are_positioned() {
        let sig = m0_sig();
        match parse_formula(&sig, "sup x:S R(x)") {
            Err(Error::Syntax { line: 1, col, .. }) => assert_eq!(col, 9),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_formula(&sig, "Q(x)"),
            Err(Error::UnknownSymbol(_))
        ));
        assert!(matches!(
            parse_formula(&sig, "R(x) + d(x, x, x)"),
            Err(Error::Sort(_))
        ));
    }

    #[test]
    fn repeated_binder_rejected() {
        let sig = m0_sig();
        assert!(parse_formula(&sig, "sup x:S, x:S. d(x,x)").is_err());
    }

    #[test]
    fn theory_file() {
        let t = parse_theory("sort S; metric d : S; rel R : S;\naxiom inf x:S. R(x);\n").unwrap();
        assert_eq!(t.axioms.len(), 1);
        assert!(parse_theory("sort S; rel R : S; axiom R(x);").is_err());
    }

    #[test]
    fn modulus_sorted_by_epsilon() {
        let sig = parse_signature(
            "sort S; metric d : S; rel R : S; modulus R { 0.1 -> 0.2; 0.5 -> 0.9; }",
        )
        .unwrap();
        let m = sig.relation("R").unwrap().modulus.clone().unwrap();
        assert_eq!(m.pairs()[0], (ratio(1, 2), ratio(9, 10)));
    }
}
