//! Operator text grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' uint)?
//! atom   := uint | 'x' | 'D' | '(' expr ')'
//! ```
//! `/` is only allowed between operands free of `D`.

use num_bigint::BigInt;
use thiserror::Error;

use crate::scalar::Rat;

use super::operator::DiffOperator;
use super::ratfunc::RatFunc;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

pub fn parse_operator(text: &str) -> Result<DiffOperator, ParseError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let op = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(op)
}

impl std::str::FromStr for DiffOperator {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_operator(s)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<DiffOperator, ParseError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<DiffOperator, ParseError> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            if c == b'*' {
                acc = &acc * &rhs;
                continue;
            }
            let (Some(num), Some(den)) = (as_function(&acc), as_function(&rhs)) else {
                return Err(ParseError {
                    pos: at,
                    msg: "division is only defined between D-free operands".into(),
                });
            };
            if den.is_zero() {
                return Err(ParseError {
                    pos: at,
                    msg: "division by zero".into(),
                });
            }
            acc = DiffOperator::scalar(&num / &den);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<DiffOperator, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<DiffOperator, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let Some(e) = self.uint() else {
                return Err(self.err("exponent must be a nonnegative integer"));
            };
            let e: u32 = e
                .try_into()
                .map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<DiffOperator, ParseError> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(DiffOperator::x())
            }
            Some(b'D') => {
                self.pos += 1;
                Ok(DiffOperator::d())
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint().unwrap();
                Ok(DiffOperator::constant(Rat::from(n)))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn uint(&mut self) -> Option<BigInt> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.s[start..self.pos]).ok()?.parse().ok()
    }
}

fn as_function(p: &DiffOperator) -> Option<RatFunc> {
    match p.rank() {
        None => Some(RatFunc::zero()),
        Some(0) => Some(p.coeff(0)),
        _ => None,
    }
}
