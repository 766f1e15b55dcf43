//! Recursive-descent parser for terms, formulas, ODE systems and problem
//! files. Errors carry line/column positions.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ast::{CmpOp, Formula, ODESystem, Sequent, Term, Var};
use crate::Q;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Int(BigInt),
    Dec(BigInt, u32), // mantissa, decimal places
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Prime,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Assign, // :=
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
    And,
    Or,
    Not,
    Imply,
    Equiv,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct SpannedTok {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn lex(src: &str) -> Result<Vec<SpannedTok>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    macro_rules! push {
        ($t:expr, $n:expr) => {{
            toks.push(SpannedTok { tok: $t, line, col });
            i += $n;
            col += $n;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '"' => {
                let (l, c0) = (line, col);
                let mut s = String::new();
                i += 1;
                col += 1;
                while i < chars.len() && chars[i] != '"' {
                    if chars[i] == '\n' {
                        return Err(ParseError { line: l, col: c0, msg: "unterminated string".into() });
                    }
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                if i >= chars.len() {
                    return Err(ParseError { line: l, col: c0, msg: "unterminated string".into() });
                }
                i += 1;
                col += 1;
                toks.push(SpannedTok { tok: Tok::Str(s), line: l, col: c0 });
            }
            '0'..='9' => {
                let (l, c0) = (line, col);
                let mut s = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    col += 1;
                    let mut frac = String::new();
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        frac.push(chars[i]);
                        i += 1;
                        col += 1;
                    }
                    let mantissa: BigInt = format!("{}{}", s, frac).parse().unwrap();
                    toks.push(SpannedTok {
                        tok: Tok::Dec(mantissa, frac.len() as u32),
                        line: l,
                        col: c0,
                    });
                } else {
                    toks.push(SpannedTok { tok: Tok::Int(s.parse().unwrap()), line: l, col: c0 });
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let (l, c0) = (line, col);
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                toks.push(SpannedTok { tok: Tok::Ident(s), line: l, col: c0 });
            }
            '+' => push!(Tok::Plus, 1),
            '*' => push!(Tok::Star, 1),
            '/' => push!(Tok::Slash, 1),
            '^' => push!(Tok::Caret, 1),
            '\'' => push!(Tok::Prime, 1),
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            '{' => push!(Tok::LBrace, 1),
            '}' => push!(Tok::RBrace, 1),
            '[' => push!(Tok::LBracket, 1),
            ']' => push!(Tok::RBracket, 1),
            ',' => push!(Tok::Comma, 1),
            ';' => push!(Tok::Semi, 1),
            '&' => push!(Tok::And, 1),
            '|' => push!(Tok::Or, 1),
            '=' => push!(Tok::Eq, 1),
            ':' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::Assign, 2)
                } else {
                    push!(Tok::Colon, 1)
                }
            }
            '!' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::Ne, 2)
                } else {
                    push!(Tok::Not, 1)
                }
            }
            '>' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::Ge, 2)
                } else {
                    push!(Tok::Gt, 1)
                }
            }
            '<' => {
                if i + 2 < chars.len() && chars[i + 1] == '-' && chars[i + 2] == '>' {
                    push!(Tok::Equiv, 3)
                } else if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::Le, 2)
                } else {
                    push!(Tok::Lt, 1)
                }
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1] == '>' {
                    push!(Tok::Imply, 2)
                } else {
                    push!(Tok::Minus, 1)
                }
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    msg: format!("unexpected character '{}'", other),
                })
            }
        }
    }
    toks.push(SpannedTok { tok: Tok::Eof, line, col });
    Ok(toks)
}

pub(crate) struct Parser {
    toks: Vec<SpannedTok>,
    pub pos: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let s = &self.toks[self.pos];
        Err(ParseError { line: s.line, col: s.col, msg: msg.into() })
    }

    pub fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {}", what))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    pub fn eat_ident(&mut self, kw: &str) -> bool {
        if let Tok::Ident(s) = self.peek() {
            if s == kw {
                self.next();
                return true;
            }
        }
        false
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    // -------- terms --------

    pub fn term(&mut self) -> Result<Term, ParseError> {
        self.additive()
    }

    fn additive(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.next();
                    let rhs = self.multiplicative()?;
                    lhs = Term::add(lhs, rhs);
                }
                Tok::Minus => {
                    self.next();
                    let rhs = self.multiplicative()?;
                    lhs = Term::sub(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn multiplicative(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.next();
                    let rhs = self.unary()?;
                    lhs = Term::mul(lhs, rhs);
                }
                Tok::Slash => {
                    return self.err("division is not in the term language (rational constants only)")
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Minus {
            self.next();
            let t = self.unary()?;
            return Ok(Term::neg(t));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Term, ParseError> {
        let base = self.term_atom()?;
        if *self.peek() == Tok::Caret {
            self.next();
            let exp = match self.peek().clone() {
                Tok::Int(n) => {
                    self.next();
                    n
                }
                _ => return self.err("non-natural exponent"),
            };
            if exp < BigInt::zero() {
                return self.err("non-natural exponent");
            }
            let Ok(e) = u32::try_from(exp) else {
                return self.err("exponent too large");
            };
            if e == 0 {
                return Ok(Term::Const(Q::one()));
            }
            let mut acc = base.clone();
            for _ in 1..e {
                acc = Term::mul(acc, base.clone());
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn rational(&mut self) -> Result<Q, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                // rational literal `a/b`
                if *self.peek() == Tok::Slash {
                    if let Tok::Int(_) = self.peek2() {
                        self.next();
                        if let Tok::Int(d) = self.next() {
                            if d.is_zero() {
                                return self.err("zero denominator");
                            }
                            return Ok(Q::new(n, d));
                        }
                        unreachable!()
                    }
                }
                Ok(Q::from_integer(n))
            }
            Tok::Dec(mantissa, places) => {
                self.next();
                let mut den = BigInt::one();
                for _ in 0..places {
                    den *= 10;
                }
                Ok(Q::new(mantissa, den))
            }
            _ => self.err("expected number"),
        }
    }

    fn term_atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Int(_) | Tok::Dec(..) => Ok(Term::Const(self.rational()?)),
            Tok::Ident(name) => {
                match name.as_str() {
                    "true" | "false" | "forall" | "exists" => {
                        return self.err(format!("'{}' is not a term", name))
                    }
                    _ => {}
                }
                self.next();
                Ok(Term::Var(Var::from(name)))
            }
            Tok::LParen => {
                self.next();
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => self.err("expected term"),
        }
    }

    // -------- formulas --------

    pub fn formula(&mut self) -> Result<Formula, ParseError> {
        self.equiv_level()
    }

    fn equiv_level(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_level()?;
        match self.peek() {
            Tok::Imply => {
                self.next();
                let rhs = self.equiv_level()?;
                Ok(Formula::imply(lhs, rhs))
            }
            Tok::Equiv => {
                self.next();
                let rhs = self.equiv_level()?;
                Ok(Formula::Equiv(Box::new(lhs), Box::new(rhs)))
            }
            _ => Ok(lhs),
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and_level()?;
        while *self.peek() == Tok::Or {
            self.next();
            let rhs = self.and_level()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.not_level()?;
        while *self.peek() == Tok::And {
            self.next();
            let rhs = self.not_level()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_level(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.next();
                let f = self.not_level()?;
                Ok(Formula::not(f))
            }
            _ => self.formula_primary(),
        }
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek() {
            Tok::Eq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            Tok::Ge => Some(CmpOp::Ge),
            Tok::Gt => Some(CmpOp::Gt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Lt => Some(CmpOp::Lt),
            _ => None,
        }
    }

    fn formula_primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if name == "true" => {
                self.next();
                Ok(Formula::True)
            }
            Tok::Ident(name) if name == "false" => {
                self.next();
                Ok(Formula::False)
            }
            Tok::Ident(name) if name == "forall" || name == "exists" => {
                self.next();
                let v = Var::from(self.expect_ident()?);
                self.expect(Tok::LParen, "'(' after quantifier binder")?;
                let body = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(if name == "forall" {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                })
            }
            Tok::LBracket => {
                self.next();
                let ode = self.braced_ode()?;
                self.expect(Tok::RBracket, "']'")?;
                let body = self.not_level()?;
                Ok(Formula::boxm(ode, body))
            }
            Tok::Lt if *self.peek2() == Tok::LBrace => {
                self.next();
                let ode = self.braced_ode()?;
                self.expect(Tok::Gt, "'>'")?;
                let body = self.not_level()?;
                Ok(Formula::diamond(ode, body))
            }
            _ => {
                // Try a comparison chain first, falling back to a
                // parenthesized formula.
                let save = self.pos;
                match self.comparison() {
                    Ok(f) => Ok(f),
                    Err(e) => {
                        self.pos = save;
                        if *self.peek() == Tok::LParen {
                            self.next();
                            let f = self.formula()?;
                            self.expect(Tok::RParen, "')'")?;
                            Ok(f)
                        } else {
                            Err(e)
                        }
                    }
                }
            }
        }
    }

    fn comparison(&mut self) -> Result<Formula, ParseError> {
        let first = self.term()?;
        let Some(op) = self.cmp_op() else {
            return self.err("expected comparison operator");
        };
        self.next();
        let mut prev = self.term()?;
        let mut acc = Formula::cmp(first, op, prev.clone());
        // chained comparisons: -1 <= u <= 1
        while let Some(op) = self.cmp_op() {
            self.next();
            let next = self.term()?;
            acc = Formula::and(acc, Formula::cmp(prev, op, next.clone()));
            prev = next;
        }
        Ok(acc)
    }

    /// `{ u' = t, v' = t & Q }` with the braces.
    pub fn braced_ode(&mut self) -> Result<ODESystem, ParseError> {
        self.expect(Tok::LBrace, "'{'")?;
        let ode = self.ode_body()?;
        self.expect(Tok::RBrace, "'}'")?;
        Ok(ode)
    }

    /// `u' = t, v' = t [& Q]` without braces.
    pub fn ode_body(&mut self) -> Result<ODESystem, ParseError> {
        let mut eqs = Vec::new();
        loop {
            let v = Var::from(self.expect_ident()?);
            self.expect(Tok::Prime, "' after ODE variable")?;
            self.expect(Tok::Eq, "'=' in ODE equation")?;
            let rhs = self.term()?;
            if eqs.iter().any(|(w, _)| *w == v) {
                return self.err(format!("duplicate ODE variable {}", v));
            }
            eqs.push((v, rhs));
            if *self.peek() == Tok::Comma {
                self.next();
                continue;
            }
            break;
        }
        let domain = if *self.peek() == Tok::And {
            self.next();
            self.formula()?
        } else {
            Formula::True
        };
        Ok(ODESystem::new(eqs, domain))
    }
}

/// Parses a term.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    if !p.at_eof() {
        return p.err("trailing input after term");
    }
    Ok(t)
}

/// Parses a formula.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src)?;
    let f = p.formula()?;
    if !p.at_eof() {
        return p.err("trailing input after formula");
    }
    Ok(f)
}

/// Parses a brace-free ODE system `u' = t, ... [& Q]`.
pub fn parse_ode(src: &str) -> Result<ODESystem, ParseError> {
    let mut p = Parser::new(src)?;
    let ode = p.ode_body()?;
    if !p.at_eof() {
        return p.err("trailing input after ODE system");
    }
    Ok(ode)
}

/// Parses a sequent `A, B |- C` written as `A, B ==> C`? Not exposed in the
/// problem grammar; used by the derivation loader.
pub(crate) fn parse_sequent_inner(p: &mut Parser) -> Result<Sequent, ParseError> {
    let mut ants = Vec::new();
    if !p.eat_ident("entails") {
        loop {
            let f = p.formula()?;
            ants.push(f);
            if *p.peek() == Tok::Comma {
                p.next();
                continue;
            }
            if p.eat_ident("entails") {
                break;
            }
            return p.err("expected ',' or 'entails' in sequent");
        }
    }
    let succ = p.formula()?;
    Ok(Sequent::new(ants, succ))
}

/// Parses `Gamma entails phi` sequent syntax.
pub fn parse_sequent(src: &str) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(src)?;
    let s = parse_sequent_inner(&mut p)?;
    if !p.at_eof() {
        return p.err("trailing input after sequent");
    }
    Ok(s)
}
