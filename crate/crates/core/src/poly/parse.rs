//! Text syntax for polynomials: `2*x1^2*x2 - 1/3*x3`, parentheses allowed.
//! Variables are `x1..xN` (1-based); `x` is accepted when N = 1.

use super::MultiPoly;
use crate::error::{CoreError, Result};
use crate::scalar::{parse_rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn err(input: &str, reason: impl Into<String>) -> CoreError {
    CoreError::Parse { input: input.to_string(), reason: reason.into() }
}

fn lex(input: &str, n_vars: usize) -> Result<Vec<Tok>> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1
            }
            '*' => {
                out.push(Tok::Star);
                i += 1
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            'x' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let idx = if j == start {
                    if n_vars != 1 {
                        return Err(err(input, "bare `x` only allowed in one variable"));
                    }
                    0
                } else {
                    let k: usize = chars[start..j].iter().collect::<String>().parse().map_err(|_| err(input, "bad variable"))?;
                    if k == 0 || k > n_vars {
                        return Err(err(input, format!("variable x{k} outside x1..x{n_vars}")));
                    }
                    k - 1
                };
                out.push(Tok::Var(idx));
                i = j;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                // scientific exponent
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '-' || chars[k] == '+') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                out.push(Tok::Num(chars[i..j].iter().collect()));
                i = j;
            }
            other => return Err(err(input, format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    input: &'a str,
    toks: Vec<Tok>,
    pos: usize,
    n: usize,
}

impl<S: Scalar> MultiPoly<S> {
    fn as_constant(&self) -> Option<S> {
        if self.is_zero() {
            return Some(S::zero());
        }
        if self.n_terms() == 1 {
            let (m, c) = self.terms().next()?;
            if m.degree() == 0 {
                return Some(c.clone());
            }
        }
        None
    }
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr<S: Scalar>(&mut self) -> Result<MultiPoly<S>> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                self.term::<S>()?.neg()
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term::<S>()?
            }
            _ => self.term::<S>()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term::<S>()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term::<S>()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term<S: Scalar>(&mut self) -> Result<MultiPoly<S>> {
        let mut acc = self.factor::<S>()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor::<S>()?)?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let d = self.factor::<S>()?;
                    let c = d.as_constant().ok_or_else(|| err(self.input, "division by a non-constant"))?;
                    if c.is_zero() {
                        return Err(err(self.input, "division by zero"));
                    }
                    acc = acc.scale(&S::one().div(&c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor<S: Scalar>(&mut self) -> Result<MultiPoly<S>> {
        let base = match self.next() {
            Some(Tok::Num(s)) => {
                let q = parse_rational(&s).ok_or_else(|| err(self.input, format!("bad number {s}")))?;
                MultiPoly::constant(S::from_rational(&q), self.n)
            }
            Some(Tok::Var(i)) => MultiPoly::var(i, self.n)?,
            Some(Tok::LParen) => {
                let e = self.expr::<S>()?;
                if self.next() != Some(Tok::RParen) {
                    return Err(err(self.input, "missing `)`"));
                }
                e
            }
            Some(Tok::Minus) => return Ok(self.factor::<S>()?.neg()),
            other => return Err(err(self.input, format!("unexpected token {other:?}"))),
        };
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.next() {
                Some(Tok::Num(s)) => {
                    let e: u32 = s.parse().map_err(|_| err(self.input, "exponent must be a nonnegative integer"))?;
                    return base.pow(e);
                }
                _ => return Err(err(self.input, "exponent must be a nonnegative integer")),
            }
        }
        Ok(base)
    }
}

/// Parse a polynomial in `n_vars` variables.
pub fn parse_poly<S: Scalar>(input: &str, n_vars: usize) -> Result<MultiPoly<S>> {
    let toks = lex(input, n_vars)?;
    if toks.is_empty() {
        return Err(err(input, "empty expression"));
    }
    let mut p = Parser { input, toks, pos: 0, n: n_vars };
    let out = p.expr::<S>()?;
    if p.pos != p.toks.len() {
        return Err(err(input, "trailing input"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    #[test]
    fn parses_and_round_trips() {
        let f: MultiPoly<Rational> = parse_poly("2*x1^2*x2 - 1/3*x3", 3).unwrap();
        assert_eq!(f.coefficient(&[0, 0, 1]), ratio(-1, 3));
        let g: MultiPoly<Rational> = parse_poly(&f.to_string(), 3).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_poly::<Rational>("x4", 3).is_err());
        assert!(parse_poly::<Rational>("x1/x2", 2).is_err());
        assert!(parse_poly::<Rational>("x1 +", 2).is_err());
        assert!(parse_poly::<Rational>("x1^-1", 2).is_err());
    }

    #[test]
    fn unary_minus_and_float_literals() {
        let f: MultiPoly<f64> = parse_poly("-(x + 0.5)^2", 1).unwrap();
        assert!((f.eval(&[1.0]).unwrap() + 2.25).abs() < 1e-15);
        let g: MultiPoly<f64> = parse_poly("1e-3*x1", 1).unwrap();
        assert!((g.eval(&[2.0]).unwrap() - 2e-3).abs() < 1e-18);
    }
}
