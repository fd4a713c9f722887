//! Line-oriented text form of a [`PauliOperator`].
//!
//! ```text
//! # comment
//! 1 IIII
//! u XXXX
//! 1/2 - 3/4*i*u^2*v ZZZZ
//! ```
//!
//! Each non-blank line is `<polynomial> <word>`: the last whitespace-separated
//! token is the Pauli word over `IXYZ`; everything before it is the
//! coefficient. Lines naming the same word are summed. Polynomial grammar:
//!
//! ```text
//! poly   := [sign] term (sign term)*
//! sign   := '+' | '-'
//! term   := factor ('*' factor)*
//! factor := number | 'i' | ('u' | 'v') ['^' integer]
//! number := digits ['/' digits] | digits '.' digits
//! ```
//!
//! Decimal literals are converted to the exact rational they denote
//! (`0.1` is `1/10`). Whitespace inside the polynomial is ignored.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::operator::PauliOperator;
use super::poly::{BivariatePolynomial, GaussianRational};
use super::string::PauliString;
use crate::error::{Error, Result};

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

fn parse_number(text: &str, line: usize) -> Result<BigRational> {
    let bad = || Error::Parse {
        line,
        message: format!("bad number '{text}'"),
    };
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return parse_err(line, "zero denominator");
        }
        Ok(BigRational::new(num, den))
    } else if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        Ok(BigRational::new(digits, scale))
    } else {
        Ok(BigRational::from_integer(text.parse().map_err(|_| bad())?))
    }
}

fn parse_term(text: &str, line: usize) -> Result<BivariatePolynomial> {
    let mut coeff = GaussianRational::one();
    let (mut du, mut dv) = (0u32, 0u32);
    for factor in text.split('*') {
        if factor.is_empty() {
            return parse_err(line, format!("empty factor in '{text}'"));
        }
        let (base, exp) = match factor.split_once('^') {
            Some((b, e)) => {
                let e: u32 = e.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad exponent in '{factor}'"),
                })?;
                (b, Some(e))
            }
            None => (factor, None),
        };
        match (base, exp) {
            ("u", e) => du += e.unwrap_or(1),
            ("v", e) => dv += e.unwrap_or(1),
            ("i", None) => coeff = &coeff * &GaussianRational::i(),
            (num, None) if num.starts_with(|c: char| c.is_ascii_digit()) => {
                coeff =
                    &coeff * &GaussianRational::new(parse_number(num, line)?, BigRational::zero());
            }
            _ => return parse_err(line, format!("unknown factor '{factor}'")),
        }
    }
    Ok(BivariatePolynomial::monomial(coeff, du, dv))
}

/// Parse a coefficient polynomial such as `1 - 1/2*i*u^2*v`.
pub fn parse_polynomial(text: &str, line: usize) -> Result<BivariatePolynomial> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return parse_err(line, "missing coefficient");
    }
    let mut total = BivariatePolynomial::zero();
    let mut negative = false;
    let mut start = 0;
    let bytes = compact.as_bytes();
    let mut pending_sign = true;
    for (idx, &b) in bytes.iter().enumerate() {
        if b == b'+' || b == b'-' {
            if idx > start {
                let term = parse_term(&compact[start..idx], line)?;
                total = if negative {
                    &total - &term
                } else {
                    &total + &term
                };
            } else if !pending_sign {
                return parse_err(line, format!("dangling sign in '{text}'"));
            }
            negative = b == b'-';
            start = idx + 1;
            pending_sign = false;
        }
    }
    if start >= compact.len() {
        return parse_err(line, format!("'{text}' ends with a sign"));
    }
    let term = parse_term(&compact[start..], line)?;
    Ok(if negative {
        &total - &term
    } else {
        &total + &term
    })
}

pub fn parse_operator(text: &str) -> Result<PauliOperator> {
    let mut op: Option<PauliOperator> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((coeff, word)) = line.rsplit_once(char::is_whitespace) else {
            return parse_err(line_no, "expected '<coefficient> <word>'");
        };
        let (string, n) = PauliString::parse(word).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let coeff = parse_polynomial(coeff, line_no)?;
        let target = op.get_or_insert_with(|| PauliOperator::zero(n));
        if target.n_sites() != n {
            return parse_err(
                line_no,
                format!(
                    "word '{word}' has {n} letters, expected {}",
                    target.n_sites()
                ),
            );
        }
        target.add_term(string, coeff);
    }
    op.ok_or(Error::Parse {
        line: 0,
        message: "no terms".into(),
    })
}

/// Canonical text: one line per string in lexicographic order.
///
/// The zero operator has no lines and cannot be parsed back; it is written as
/// `0 I…I` instead.
pub fn format_operator(op: &PauliOperator) -> String {
    let n = op.n_sites();
    if op.is_zero() {
        return format!("0 {}\n", "I".repeat(n.max(1)));
    }
    let mut out = String::new();
    for (s, c) in op.terms() {
        out.push_str(&format!("{c} {}\n", s.word(n)));
    }
    out
}

impl std::str::FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_operator(s)
    }
}

impl std::fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_operator(self))
    }
}
