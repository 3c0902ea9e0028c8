//! Tiny arithmetic expression evaluator for system files.
//!
//! Grammar:
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := NUMBER | CONST | '(' expr ')' | '-' factor | 'sqrt' '(' expr ')'
//! CONST  := 'phi' | 'pi'
//! ```
//! `phi` is the golden ratio `(1+√5)/2`, so coordinates like `phi/2` or
//! `sqrt(10-2*sqrt(5))/4` can be written exactly in a file format that only
//! carries text.

use std::fmt;

use thiserror::Error;

use crate::scalar::{cast, Real};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("malformed number {0:?}")]
    BadNumber(String),
    #[error("unknown identifier {0:?}")]
    UnknownIdent(String),
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("trailing input")]
    TrailingInput,
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative number")]
    NegativeSqrt,
}

/// Evaluation error with the byte offset where it happened.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{kind} at offset {pos}")]
pub struct ExprError {
    pub kind: ExprErrorKind,
    pub pos: usize,
}

impl ExprError {
    fn at(kind: ExprErrorKind, pos: usize) -> Self {
        ExprError { kind, pos }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "{x}"),
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Slash => write!(f, "/"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // optional exponent
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| ExprError::at(ExprErrorKind::BadNumber(text.to_string()), start))?;
                out.push((Tok::Num(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '_' | '0'..='9')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            other => return Err(ExprError::at(ExprErrorKind::UnexpectedChar(other), i)),
        }
    }
    Ok(out)
}

struct Parser<'a, R> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    _marker: std::marker::PhantomData<R>,
}

impl<R: Real> Parser<'_, R> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<R, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc += self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc -= self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<R, ExprError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc *= self.factor()?;
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let at = self.here();
                    let rhs = self.factor()?;
                    if rhs == R::zero() {
                        return Err(ExprError::at(ExprErrorKind::DivisionByZero, at));
                    }
                    acc /= rhs;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<R, ExprError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Num(x)) => Ok(cast(x)),
            Some(Tok::Minus) => Ok(-self.factor()?),
            Some(Tok::LParen) => {
                let v = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(v),
                    _ => Err(ExprError::at(ExprErrorKind::Expected(")"), self.here())),
                }
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "phi" => Ok((R::one() + cast::<R>(5.0).sqrt()) / cast(2.0)),
                "pi" => Ok(R::PI()),
                "sqrt" => {
                    match self.bump() {
                        Some(Tok::LParen) => {}
                        _ => return Err(ExprError::at(ExprErrorKind::Expected("("), self.here())),
                    }
                    let arg_at = self.here();
                    let v = self.expr()?;
                    match self.bump() {
                        Some(Tok::RParen) => {}
                        _ => return Err(ExprError::at(ExprErrorKind::Expected(")"), self.here())),
                    }
                    if v < R::zero() {
                        return Err(ExprError::at(ExprErrorKind::NegativeSqrt, arg_at));
                    }
                    Ok(v.sqrt())
                }
                _ => Err(ExprError::at(ExprErrorKind::UnknownIdent(name), at)),
            },
            None => Err(ExprError::at(ExprErrorKind::UnexpectedEnd, self.end)),
            Some(_) => Err(ExprError::at(ExprErrorKind::Expected("a value"), at)),
        }
    }
}

/// Evaluates an expression in the file grammar to a scalar.
pub fn eval_expr<R: Real>(src: &str) -> Result<R, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser::<R> {
        toks: &toks,
        pos: 0,
        end: src.len(),
        _marker: std::marker::PhantomData,
    };
    let v = p.expr()?;
    if p.pos != toks.len() {
        return Err(ExprError::at(ExprErrorKind::TrailingInput, p.here()));
    }
    Ok(v)
}
