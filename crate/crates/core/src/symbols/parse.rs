//! Text form of polynomial symbols.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' integer)?
//! primary := number | 'i' | ident | '(' expr ')'
//! ident   := ('c' | 'cstar' | 'n') digits?
//! ```
//!
//! `c_j` is `ψ_j`, `cstar_j` is `ψ*_j` and `n_j` is `cstar_j*c_j`. Mode
//! numbers are 1-based and default to 1. Whitespace is ignored.

use alloc::format;
use alloc::string::{String, ToString};

use num_complex::Complex64;

use super::PolySymbol;
use crate::error::{Error, Result};

/// Parses `text` into a symbol over `modes` modes. Errors carry the byte
/// offset of the offending token.
pub fn parse_symbol(text: &str, modes: usize) -> Result<PolySymbol> {
    if modes == 0 {
        return Err(Error::InvalidConfig("at least one mode is required".into()));
    }
    let mut p = Parser {
        src: text,
        pos: 0,
        modes,
    };
    p.skip_ws();
    if p.pos == text.len() {
        return Err(p.error("empty symbol"));
    }
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    modes: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(ch) = self.peek() {
            if ch.is_whitespace() {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<PolySymbol> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<PolySymbol> {
        let mut acc = self.unary()?;
        while self.eat('*') {
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<PolySymbol> {
        if self.eat('-') {
            return Ok(-&self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<PolySymbol> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(ch) if ch.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a non-negative integer exponent"));
        }
        let exponent: u32 = self.src[start..self.pos].parse().map_err(|_| Error::Parse {
            offset: start,
            message: "exponent out of range".to_string(),
        })?;
        if exponent > 64 {
            return Err(Error::Parse {
                offset: start,
                message: format!("exponent {exponent} exceeds 64"),
            });
        }
        let mut out = PolySymbol::constant(self.modes, Complex64::new(1.0, 0.0));
        for _ in 0..exponent {
            out = &out * &base;
        }
        Ok(out)
    }

    fn primary(&mut self) -> Result<PolySymbol> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(ch) if ch.is_ascii_digit() || ch == '.' => self.number(),
            Some(ch) if ch.is_ascii_alphabetic() => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == '_') {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                let digits_start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let mode = if digits_start == self.pos {
                    1
                } else {
                    self.src[digits_start..self.pos].parse::<usize>().unwrap_or(0)
                };
                let name = name.trim_end_matches('_');
                if name == "i" && digits_start == self.pos {
                    return Ok(PolySymbol::constant(self.modes, Complex64::new(0.0, 1.0)));
                }
                if mode == 0 || mode > self.modes {
                    return Err(Error::Parse {
                        offset: start,
                        message: format!("mode {mode} out of range 1..={}", self.modes),
                    });
                }
                let j = mode - 1;
                let d = self.modes;
                match name {
                    "c" => Ok(PolySymbol::psi(d, j)),
                    "cstar" => Ok(PolySymbol::psi_star(d, j)),
                    "n" => Ok(PolySymbol::number(d, j)),
                    _ => Err(Error::Parse {
                        offset: start,
                        message: format!("unknown identifier '{name}'"),
                    }),
                }
            }
            Some(ch) => Err(self.error(format!("unexpected character '{ch}'"))),
        }
    }

    fn number(&mut self) -> Result<PolySymbol> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let value: f64 = self.src[start..end].parse().map_err(|_| Error::Parse {
            offset: start,
            message: format!("malformed number '{}'", &self.src[start..end]),
        })?;
        self.pos = end;
        Ok(PolySymbol::constant(self.modes, Complex64::new(value, 0.0)))
    }
}
