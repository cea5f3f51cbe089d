//! Recursive-descent parser for scalar expressions.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := rational | symbol | '(' expr ')' | factor '^' natural | '-' factor
//! ```
//!
//! A leading `-` is accepted on any factor so printed forms with a negative
//! first term read back unchanged.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{Scalar, ScalarError, SymbolTable};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    table: &'a SymbolTable,
}

pub(super) fn parse_scalar(text: &str, table: &SymbolTable) -> Result<Scalar, ScalarError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, table };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let v = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(v)
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ScalarError {
        ScalarError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = if c == b'*' { &acc * &rhs } else { acc.try_div(&rhs)? };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Scalar, ScalarError> {
        let mut base = self.atom()?;
        while let Some(b'^') = self.peek() {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.error("expected a natural exponent"));
            }
            let e: u32 = digits.parse().map_err(|_| ScalarError::Syntax {
                pos: start,
                msg: "exponent too large".into(),
            })?;
            base = base.pow(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Scalar, ScalarError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.digits();
                let n: BigInt = digits.parse().expect("ascii digits");
                Ok(Scalar::from_rational(BigRational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                self.table.symbol(name)
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }
}
