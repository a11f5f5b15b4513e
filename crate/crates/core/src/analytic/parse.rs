//! Recursive-descent parser for the expression language:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' ['-' | '+'] integer)?
//! primary := number | 'z' | 'i' | 'exp' '(' expr ')' | '(' expr ')'
//! ```

use thiserror::Error;

use super::expr::AnalyticExpr;
use crate::scalar::{ci, Real};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
}

pub fn parse_expression<T: Real>(src: &str) -> Result<AnalyticExpr<T>, ParseError> {
    let mut p = Parser {
        chars: src.chars().collect(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.err(format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::SyntaxError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr<T: Real>(&mut self) -> Result<AnalyticExpr<T>, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = AnalyticExpr::add(lhs, self.term()?);
            } else if self.eat('-') {
                lhs = AnalyticExpr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term<T: Real>(&mut self) -> Result<AnalyticExpr<T>, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = AnalyticExpr::mul(lhs, self.unary()?);
            } else if self.eat('/') {
                lhs = AnalyticExpr::div(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary<T: Real>(&mut self) -> Result<AnalyticExpr<T>, ParseError> {
        if self.eat('-') {
            return Ok(AnalyticExpr::neg(self.unary()?));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power<T: Real>(&mut self) -> Result<AnalyticExpr<T>, ParseError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let negative = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("exponent must be an integer literal"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        let n: i32 = digits.parse().map_err(|_| ParseError::SyntaxError {
            pos: start,
            msg: "exponent out of range".into(),
        })?;
        Ok(AnalyticExpr::powi(base, if negative { -n } else { n }))
    }

    fn primary<T: Real>(&mut self) -> Result<AnalyticExpr<T>, ParseError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.is_alphanumeric() || *c == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match name.as_str() {
                    "z" => Ok(AnalyticExpr::z()),
                    "i" => Ok(AnalyticExpr::constant(ci())),
                    "exp" => {
                        if !self.eat('(') {
                            return Err(self.err("expected `(` after exp"));
                        }
                        let e = self.expr()?;
                        if !self.eat(')') {
                            return Err(self.err("expected `)`"));
                        }
                        Ok(AnalyticExpr::exp(e))
                    }
                    _ => Err(ParseError::UnknownIdentifier { name, pos: start }),
                }
            }
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
        }
    }

    fn number<T: Real>(&mut self) -> Result<AnalyticExpr<T>, ParseError> {
        let start = self.pos;
        let digit = |c: Option<&char>| c.is_some_and(|c| c.is_ascii_digit());
        while digit(self.chars.get(self.pos)) {
            self.pos += 1;
        }
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            while digit(self.chars.get(self.pos)) {
                self.pos += 1;
            }
        }
        if matches!(self.chars.get(self.pos), Some('e') | Some('E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if digit(self.chars.get(self.pos)) {
                while digit(self.chars.get(self.pos)) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let v: f64 = text.parse().map_err(|_| ParseError::SyntaxError {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })?;
        Ok(AnalyticExpr::real(T::lit(v)))
    }
}
