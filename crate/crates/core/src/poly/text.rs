use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::{Monomial, MonomialOrder, Polynomial, Term, VarId, VarTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unexpected `{found}` at byte {pos}")]
    Unexpected { found: String, pos: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("exponent must be a positive integer")]
    BadExponent,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Star,
    Caret,
    Plus,
    Minus,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'*' => out.push((start, Tok::Star)),
            b'^' => out.push((start, Tok::Caret)),
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'0'..=b'9' => {
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Num(s[start..i].parse().expect("digits"))));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(s[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = s[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Unexpected {
                    found: ch.to_string(),
                    pos: start,
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Parses text such as `-2*x*y + 3*z^2 - 1`. Powers collapse (`x^k = x`).
pub fn parse_poly(
    s: &str,
    table: &VarTable,
    order: MonomialOrder,
) -> Result<Polynomial, ParseError> {
    let toks = lex(s)?;
    let mut pos = 0;
    let mut terms = Vec::new();
    let unexpected = |i: usize| -> ParseError {
        match toks.get(i) {
            Some((p, t)) => ParseError::Unexpected {
                found: format!("{t:?}"),
                pos: *p,
            },
            None => ParseError::UnexpectedEnd,
        }
    };
    if toks.is_empty() {
        return Err(ParseError::UnexpectedEnd);
    }
    loop {
        let mut coeff = BigInt::one();
        while let Some((_, t @ (Tok::Plus | Tok::Minus))) = toks.get(pos) {
            if *t == Tok::Minus {
                coeff = -coeff;
            }
            pos += 1;
        }
        let mut vars: Vec<VarId> = Vec::new();
        loop {
            match toks.get(pos) {
                Some((_, Tok::Num(n))) => {
                    coeff *= n;
                    pos += 1;
                }
                Some((_, Tok::Ident(name))) => {
                    let v = table
                        .get(name)
                        .ok_or_else(|| ParseError::UnknownVariable(name.clone()))?;
                    pos += 1;
                    if let Some((_, Tok::Caret)) = toks.get(pos) {
                        match toks.get(pos + 1) {
                            Some((_, Tok::Num(e))) if e.is_positive() => pos += 2,
                            Some(_) => return Err(ParseError::BadExponent),
                            None => return Err(ParseError::UnexpectedEnd),
                        }
                    }
                    vars.push(v);
                }
                _ => return Err(unexpected(pos)),
            }
            match toks.get(pos) {
                Some((_, Tok::Star)) => pos += 1,
                _ => break,
            }
        }
        terms.push(Term {
            coeff,
            mono: Monomial::from_vars(vars),
        });
        match toks.get(pos) {
            None => break,
            Some((_, Tok::Plus | Tok::Minus)) => {}
            Some(_) => return Err(unexpected(pos)),
        }
    }
    Ok(Polynomial::from_terms(order, terms))
}

/// Renders terms in order, variables of each monomial from largest to
/// smallest, e.g. `l16*t01+l16*t10+l20-t01-t10`.
pub fn format_poly(p: &Polynomial, table: &VarTable) -> String {
    Display { poly: p, table }.to_string()
}

pub(crate) struct Display<'a> {
    pub poly: &'a Polynomial,
    pub table: &'a VarTable,
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (i, t) in self.poly.terms().iter().enumerate() {
            let neg = t.coeff.is_negative();
            if neg {
                f.write_str("-")?;
            } else if i > 0 {
                f.write_str("+")?;
            }
            let mag = t.coeff.abs();
            let mut first = true;
            if !mag.is_one() || t.mono.is_one() {
                write!(f, "{mag}")?;
                first = false;
            }
            for v in t.mono.vars() {
                if !first {
                    f.write_str("*")?;
                }
                f.write_str(self.table.name(*v))?;
                first = false;
            }
            debug_assert!(!mag.is_zero());
        }
        Ok(())
    }
}
