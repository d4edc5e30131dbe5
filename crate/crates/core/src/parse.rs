//! Recursive-descent parser for polynomial expressions.
//!
//! Grammar:
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := base ("^" posint)?
//! base   := ident | rational | "(" expr ")" | "-" factor
//! ```
//! Identifiers must name ring variables; rationals are `num` or `num/den`.
//! Errors carry 1-based line and column positions.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::poly::{Polynomial, Ring};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, line: 1, column: 1 }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.column, message: message.into() }
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.bump(c);
                continue;
            }
            let (line, column) = (self.line, self.column);
            let tok = match c {
                '+' => {
                    self.bump(c);
                    Tok::Plus
                }
                '-' => {
                    self.bump(c);
                    Tok::Minus
                }
                '*' => {
                    self.bump(c);
                    Tok::Star
                }
                '^' => {
                    self.bump(c);
                    Tok::Caret
                }
                '/' => {
                    self.bump(c);
                    Tok::Slash
                }
                '(' => {
                    self.bump(c);
                    Tok::LParen
                }
                ')' => {
                    self.bump(c);
                    Tok::RParen
                }
                _ if c.is_ascii_digit() => {
                    let start = self.pos;
                    while let Some(d) = self.src[self.pos..].chars().next() {
                        if d.is_ascii_digit() {
                            self.bump(d);
                        } else {
                            break;
                        }
                    }
                    let digits = &self.src[start..self.pos];
                    Tok::Int(digits.parse().expect("digit run"))
                }
                _ if c.is_ascii_alphabetic() || c == '_' => {
                    let start = self.pos;
                    while let Some(d) = self.src[self.pos..].chars().next() {
                        if d.is_ascii_alphanumeric() || d == '_' {
                            self.bump(d);
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(self.src[start..self.pos].to_string())
                }
                _ => return Err(self.error(format!("unexpected character `{c}`"))),
            };
            out.push(Spanned { tok, line, column });
        }
        Ok(out)
    }
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    ring: &'a Arc<Ring>,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError { line, column, message: message.into() }
    }

    fn advance(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.add(&rhs).expect("same ring");
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.sub(&rhs).expect("same ring");
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = acc.mul(&rhs).expect("same ring");
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.advance() {
                Some(Tok::Int(n)) => {
                    if n.is_zero() {
                        return Err(self.error("exponent must be a positive integer"));
                    }
                    let k: u32 = n
                        .try_into()
                        .map_err(|_| self.error("exponent too large"))?;
                    return Ok(base.pow(k));
                }
                _ => {
                    self.pos = self.pos.saturating_sub(1);
                    return Err(self.error("expected a positive integer exponent"));
                }
            }
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Polynomial, ParseError> {
        let (line, column) = self.here();
        match self.advance() {
            Some(Tok::Ident(name)) => Polynomial::var(self.ring, &name).map_err(|_| ParseError {
                line,
                column,
                message: format!(
                    "unknown variable `{name}` (ring variables: {})",
                    self.ring.vars().join(", ")
                ),
            }),
            Some(Tok::Int(n)) => {
                // A rational literal: integer optionally followed by "/ den".
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.advance() {
                        Some(Tok::Int(d)) => {
                            if d.is_zero() {
                                self.pos = self.pos.saturating_sub(1);
                                return Err(self.error("zero denominator"));
                            }
                            Ok(Polynomial::constant(self.ring, Rational::new(n, d)))
                        }
                        _ => {
                            self.pos = self.pos.saturating_sub(1);
                            Err(self.error("expected an integer denominator"))
                        }
                    }
                } else {
                    Ok(Polynomial::constant(self.ring, Rational::new(n, BigInt::one())))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Minus) => Ok(self.factor()?.neg()),
            Some(other) => Err(ParseError {
                line,
                column,
                message: format!("unexpected token `{other:?}`"),
            }),
            None => Err(ParseError { line, column, message: "unexpected end of input".into() }),
        }
    }
}

/// Parses an expression into a polynomial over `ring`.
pub fn parse_polynomial(src: &str, ring: &Arc<Ring>) -> Result<Polynomial, ParseError> {
    let toks = Lexer::new(src).tokenize()?;
    let end = toks
        .last()
        .map(|s| (s.line, s.column + 1))
        .unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, ring, end };
    let poly = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.error("trailing input after expression"));
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use std::collections::BTreeMap;

    fn ring() -> Arc<Ring> {
        Ring::new(vec!["x", "y"]).unwrap()
    }

    #[test]
    fn parses_the_basics() {
        let r = ring();
        let p = parse_polynomial("x^2 + 2*x*y - 1/2", &r).unwrap();
        let mut pt = BTreeMap::new();
        pt.insert("x".into(), int(1));
        pt.insert("y".into(), int(2));
        assert_eq!(p.evaluate(&pt).unwrap(), rat(9, 2));
    }

    #[test]
    fn precedence_and_unary_minus() {
        let r = ring();
        let parse = |s: &str| parse_polynomial(s, &r).unwrap();
        assert_eq!(parse("-x^2"), parse("-(x^2)"));
        assert_eq!(parse("x - -y"), parse("x + y"));
        assert_eq!(parse("2*x + 3*y^2"), parse("(2*x) + (3*(y^2))"));
        assert_eq!(parse("-2^2"), parse("-4"));
        assert_eq!(parse("(x + y)^2"), parse("x^2 + 2*x*y + y^2"));
    }

    #[test]
    fn error_positions_are_one_based() {
        let r = ring();
        let e = parse_polynomial("x + z", &r).unwrap_err();
        assert_eq!((e.line, e.column), (1, 5));
        assert!(e.message.contains("unknown variable"));

        let e = parse_polynomial("x +\n* y", &r).unwrap_err();
        assert_eq!(e.line, 2);

        let e = parse_polynomial("x^0", &r).unwrap_err();
        assert!(e.message.contains("positive"));

        let e = parse_polynomial("1/0", &r).unwrap_err();
        assert!(e.message.contains("zero denominator"));

        let e = parse_polynomial("x + ", &r).unwrap_err();
        assert!(e.message.contains("end of input"));

        let e = parse_polynomial("x y", &r).unwrap_err();
        assert!(e.message.contains("trailing"));
    }

    #[test]
    fn rational_literals() {
        let r = ring();
        let parse = |s: &str| parse_polynomial(s, &r).unwrap();
        assert_eq!(parse("3/6"), parse("1/2"));
        assert_eq!(parse("-3/6*x"), parse("x").scale(&rat(-1, 2)));
        // `/` only forms literals, so variables cannot be divided.
        assert!(parse_polynomial("x/2", &r).is_err());
    }
}
