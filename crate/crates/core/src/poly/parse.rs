//! Recursive-descent parser for polynomial expressions.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := atom ('^' integer)?
//! atom    := integer ('/' integer)? | 'sqrt' '(' integer ')' | ident | '(' expr ')'
//! ```
//!
//! So `-x^2` is `-(x^2)` and `2*x^2` is `2*(x^2)`. Fractions are literals
//! only: `/` must sit between two integer literals.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{MultiPoly, VarSet};
use crate::scalar::{split_square, QuadScalar, Rational};

const MAX_EXPONENT: u32 = 64;

/// Parse failure with a 1-based character column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
            Tok::Star => f.write_str("*"),
            Tok::Slash => f.write_str("/"),
            Tok::Caret => f.write_str("^"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::End => f.write_str("end of expression"),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

impl Lexer {
    fn run(text: &str) -> Result<Self, ParseError> {
        let chars: Vec<char> = text.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                toks.push((Tok::Int(s.parse().unwrap()), col));
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            let t = match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                other => {
                    return Err(ParseError {
                        column: col,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            toks.push((t, col));
            i += 1;
        }
        toks.push((Tok::End, chars.len() + 1));
        Ok(Lexer { toks })
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a VarSet,
    radicand: Option<u32>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, column: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            let col = self.column();
            self.err(col, format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<MultiPoly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = &acc + &rhs;
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = &acc - &rhs;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.unary()?;
            acc = &acc * &rhs;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MultiPoly, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-&self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MultiPoly, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (tok, col) = self.bump();
        match tok {
            Tok::Int(n) => {
                let e: u32 = match u32::try_from(&n) {
                    Ok(e) if e <= MAX_EXPONENT => e,
                    _ => return self.err(col, format!("exponent must be at most {MAX_EXPONENT}")),
                };
                Ok(base.pow(e))
            }
            _ => self.err(col, "`^` takes a nonnegative integer exponent"),
        }
    }

    fn atom(&mut self) -> Result<MultiPoly, ParseError> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Int(n) => {
                let mut value = Rational::from_integer(n);
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let (den, dcol) = self.bump();
                    match den {
                        Tok::Int(d) if !d.is_zero() => value /= Rational::from_integer(d),
                        Tok::Int(_) => return self.err(dcol, "zero denominator"),
                        _ => return self.err(dcol, "`/` is only allowed in fraction literals"),
                    }
                }
                Ok(MultiPoly::constant(self.vars, QuadScalar::from_rational(value)))
            }
            Tok::Ident(name) if name == "sqrt" && !self.vars.contains("sqrt") => {
                self.expect(Tok::LParen, "`(` after sqrt")?;
                let (arg, acol) = self.bump();
                let n = match arg {
                    Tok::Int(n) => n,
                    _ => return self.err(acol, "sqrt takes a nonnegative integer literal"),
                };
                self.expect(Tok::RParen, "`)`")?;
                let n = match u64::try_from(&n) {
                    Ok(n) if n <= u32::MAX as u64 => n,
                    _ => return self.err(acol, "sqrt argument too large"),
                };
                let value = self.sqrt_value(n, col)?;
                Ok(MultiPoly::constant(self.vars, value))
            }
            Tok::Ident(name) => match self.vars.index_of(&name) {
                Some(_) => Ok(MultiPoly::var(self.vars, &name).unwrap()),
                None => self.err(col, format!("unknown identifier `{name}`")),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::End => self.err(col, "unexpected end of expression"),
            other => self.err(col, format!("unexpected `{other}`")),
        }
    }

    fn sqrt_value(&mut self, n: u64, col: usize) -> Result<QuadScalar, ParseError> {
        if n == 0 {
            return Ok(QuadScalar::zero());
        }
        let (s, k) = split_square(n);
        let s = Rational::from_integer(BigInt::from(s));
        if k == 1 {
            return Ok(QuadScalar::from_rational(s));
        }
        let k = k as u32;
        match self.radicand {
            Some(m) if m != k => {
                return self.err(col, format!("mixed radicands: sqrt({k}) after sqrt({m})"))
            }
            _ => self.radicand = Some(k),
        }
        Ok(QuadScalar::new(Rational::zero(), s, k).expect("square-free radicand"))
    }
}

/// Parses and fully expands an expression over the declared variables.
pub fn parse_polynomial(text: &str, vars: &VarSet) -> Result<MultiPoly, ParseError> {
    let lexer = Lexer::run(text)?;
    let mut p = Parser {
        toks: lexer.toks,
        pos: 0,
        vars,
        radicand: None,
    };
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        let col = p.column();
        return p.err(col, "unexpected trailing input");
    }
    Ok(out)
}

/// Parses a constant expression such as `-1/3`, `2*sqrt(2)` or `1 - sqrt(2)`.
pub fn parse_scalar(text: &str) -> Result<QuadScalar, ParseError> {
    let none = VarSet::new(Vec::<String>::new()).unwrap();
    let p = parse_polynomial(text, &none)?;
    Ok(p.constant_value().expect("no variables"))
}
