//! Point grammar.
//!
//! A point is a comma-separated list of complex coordinates. Each coordinate is
//! one of `a`, `bi`, `a+bi` or `a-bi`, where `a` and `b` are decimal floats
//! (exponents allowed) and a bare `i`, `+i` or `-i` stands for `±1` times `i`.
//! Whitespace around coordinates is ignored. Non-finite values are rejected.

use geodisc::C64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PointError {
    #[error("empty coordinate at position {0}")]
    Empty(usize),
    #[error("coordinate {pos} ('{text}') is not a complex number")]
    Malformed { pos: usize, text: String },
    #[error("coordinate {0} is not finite")]
    NotFinite(usize),
    #[error("expected {expected} coordinates, found {found}")]
    Dimension { expected: usize, found: usize },
}

fn real(s: &str) -> Option<f64> {
    // reject forms f64::from_str would also accept, like "inf" or "nan"
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b)) {
        return None;
    }
    s.parse().ok()
}

fn imag(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => real(s),
    }
}

/// Index of the sign separating the real and imaginary parts, if any.
fn split_at(body: &str) -> Option<usize> {
    let b = body.as_bytes();
    (1..b.len())
        .rev()
        .find(|&j| (b[j] == b'+' || b[j] == b'-') && !matches!(b[j - 1], b'e' | b'E'))
}

pub fn parse_complex(text: &str, pos: usize) -> Result<C64, PointError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(PointError::Empty(pos));
    }
    let bad = || PointError::Malformed { pos, text: s.to_string() };
    let z = match s.strip_suffix('i') {
        Some(body) => match split_at(body) {
            Some(j) => C64::new(real(&body[..j]).ok_or_else(bad)?, imag(&body[j..]).ok_or_else(bad)?),
            None => C64::new(0.0, imag(body).ok_or_else(bad)?),
        },
        None => C64::new(real(s).ok_or_else(bad)?, 0.0),
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(PointError::NotFinite(pos));
    }
    Ok(z)
}

pub fn parse_point(text: &str) -> Result<Vec<C64>, PointError> {
    text.split(',').enumerate().map(|(i, s)| parse_complex(s, i)).collect()
}

pub fn parse_point_dim(text: &str, n: usize) -> Result<Vec<C64>, PointError> {
    let p = parse_point(text)?;
    if p.len() != n {
        return Err(PointError::Dimension { expected: n, found: p.len() });
    }
    Ok(p)
}

/// Inverse of [`parse_complex`] with 17 significant digits.
pub fn format_complex(z: C64) -> String {
    format!("{:.16e}{:+.16e}i", z.re, z.im)
}

pub fn format_point(p: &[C64]) -> String {
    p.iter().map(|z| format_complex(*z)).collect::<Vec<_>>().join(",")
}
