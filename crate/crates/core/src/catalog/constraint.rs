//! Concrete syntax for single-metric constraints.
//!
//! ```text
//! constraint := concept op number [unit]
//!             | number '<=' concept '<=' number [unit]
//! op         := '>=' | '<=' | '='
//! ```
//!
//! `MTTF >= 99.5 %`, `FrameRate = 30 fps` and `60 <= FrameRate <= 72` are all
//! valid. The unit may follow the number directly (`99.5%`).

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtLeast(f64),
    AtMost(f64),
    Exactly(f64),
    Between(f64, f64),
}

/// Parsed but unresolved constraint: names are not yet checked against an
/// ontology and values are in the written unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintExpr {
    pub concept: String,
    pub bound: Bound,
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error("expected {expected} at offset {offset} in '{text}'")]
    Expected {
        expected: &'static str,
        offset: usize,
        text: String,
    },
    #[error("empty range {lo} > {hi} in '{text}'")]
    EmptyRange { lo: f64, hi: f64, text: String },
}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn error(&self, expected: &'static str) -> SyntaxError {
        SyntaxError::Expected {
            expected,
            offset: self.pos,
            text: self.text.to_string(),
        }
    }

    fn at_number(&self) -> bool {
        let mut chars = self.rest().chars();
        match chars.next() {
            Some(c) if c.is_ascii_digit() || c == '.' => true,
            Some('-') | Some('+') => chars.next().is_some_and(|c| c.is_ascii_digit() || c == '.'),
            _ => false,
        }
    }

    fn number(&mut self) -> Result<f64, SyntaxError> {
        self.skip_ws();
        if !self.at_number() {
            return Err(self.error("a number"));
        }
        let bytes = self.rest().as_bytes();
        let mut end = 0;
        if bytes[0] == b'-' || bytes[0] == b'+' {
            end = 1;
        }
        let digits = |from: usize| {
            let mut i = from;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            i
        };
        end = digits(end);
        if end < bytes.len() && bytes[end] == b'.' {
            end = digits(end + 1);
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut exp = end + 1;
            if exp < bytes.len() && (bytes[exp] == b'-' || bytes[exp] == b'+') {
                exp += 1;
            }
            let after = digits(exp);
            if after > exp {
                end = after;
            }
        }
        let value: f64 = self.rest()[..end]
            .parse()
            .map_err(|_| self.error("a number"))?;
        self.pos += end;
        Ok(value)
    }

    fn ident(&mut self) -> Result<&'a str, SyntaxError> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_alphabetic() || c == '_' => {}
            _ => return Err(self.error("a metric concept name")),
        }
        let end = chars
            .find(|&(_, c)| !(c.is_alphanumeric() || c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += end;
        Ok(&rest[..end])
    }

    fn op(&mut self) -> Result<&'static str, SyntaxError> {
        self.skip_ws();
        for op in [">=", "<=", "="] {
            if self.rest().starts_with(op) {
                self.pos += op.len();
                return Ok(op);
            }
        }
        Err(self.error("one of '>=', '<=', '='"))
    }

    fn literal(&mut self, lit: &'static str) -> Result<(), SyntaxError> {
        self.skip_ws();
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.error(lit))
        }
    }

    fn unit(&mut self) -> Result<Option<String>, SyntaxError> {
        self.skip_ws();
        let rest = self.rest().trim_end();
        if rest.is_empty() {
            return Ok(None);
        }
        if rest.chars().any(char::is_whitespace) || rest.starts_with(['<', '>', '=']) {
            return Err(self.error("a single unit name or end of input"));
        }
        self.pos = self.text.len();
        Ok(Some(rest.to_string()))
    }
}

impl ConstraintExpr {
    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        let mut s = Scanner { text, pos: 0 };
        s.skip_ws();
        if s.at_number() {
            let lo = s.number()?;
            s.literal("<=")?;
            let concept = s.ident()?.to_string();
            s.literal("<=")?;
            let hi = s.number()?;
            let unit = s.unit()?;
            if lo > hi {
                return Err(SyntaxError::EmptyRange {
                    lo,
                    hi,
                    text: text.to_string(),
                });
            }
            return Ok(ConstraintExpr {
                concept,
                bound: Bound::Between(lo, hi),
                unit,
            });
        }
        let concept = s.ident()?.to_string();
        let op = s.op()?;
        let value = s.number()?;
        let unit = s.unit()?;
        let bound = match op {
            ">=" => Bound::AtLeast(value),
            "<=" => Bound::AtMost(value),
            _ => Bound::Exactly(value),
        };
        Ok(ConstraintExpr {
            concept,
            bound,
            unit,
        })
    }
}

/// Renders in the grammar accepted by [`ConstraintExpr::parse`].
impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            Bound::AtLeast(v) => write!(f, "{} >= {}", self.concept, v)?,
            Bound::AtMost(v) => write!(f, "{} <= {}", self.concept, v)?,
            Bound::Exactly(v) => write!(f, "{} = {}", self.concept, v)?,
            Bound::Between(lo, hi) => write!(f, "{} <= {} <= {}", lo, self.concept, hi)?,
        }
        if let Some(unit) = &self.unit {
            write!(f, " {unit}")?;
        }
        Ok(())
    }
}
