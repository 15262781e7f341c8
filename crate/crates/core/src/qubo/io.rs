//! Plain-text coordinate format for external QUBO solvers.
//!
//! ```text
//! qubo n_bits 2 constant 3.0000000000000000e0
//! l 0 1.0000000000000000e0
//! l 1 0.0000000000000000e0
//! q 0 1 -2.0000000000000000e0
//! ```
//!
//! Every linear coefficient is written (zeros included), followed by the
//! stored quadratic entries in ascending `(i, j)` order. Coefficients carry
//! 17 significant digits so they read back exactly.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::model::{Polynomial, QuboModel};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("reading QUBO file: {0}")]
    Io(#[from] std::io::Error),
    #[error("QUBO file has no header line")]
    MissingHeader,
    #[error("quadratic entry ({0},{1}) given twice")]
    Duplicate(u32, u32),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

pub fn export_qubo(model: &QuboModel, mut sink: impl Write) -> std::io::Result<()> {
    writeln!(
        sink,
        "qubo n_bits {} constant {:.16e}",
        model.n_bits(),
        model.constant()
    )?;
    for (i, c) in model.linear().iter().enumerate() {
        writeln!(sink, "l {i} {c:.16e}")?;
    }
    for &(i, j, c) in model.quadratic() {
        writeln!(sink, "q {i} {j} {c:.16e}")?;
    }
    sink.flush()
}

pub fn import_qubo(source: impl BufRead) -> Result<QuboModel, FormatError> {
    let mut poly: Option<Polynomial> = None;
    let mut raw = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| FormatError::Syntax {
            line: lineno,
            message,
        };
        let fields: Vec<&str> = body.split_whitespace().collect();

        let Some(p) = poly.as_mut() else {
            match fields.as_slice() {
                ["qubo", "n_bits", n, "constant", c] => {
                    let n: usize = n.parse().map_err(|_| err(format!("bad bit count {n:?}")))?;
                    let mut p = Polynomial::zero(n);
                    p.constant = parse_coeff(c).ok_or_else(|| err(format!("bad constant {c:?}")))?;
                    poly = Some(p);
                    continue;
                }
                _ => return Err(FormatError::MissingHeader),
            }
        };

        let index = |s: &str| -> Result<u32, FormatError> {
            match s.parse::<u32>() {
                Ok(i) if (i as usize) < p.n_bits => Ok(i),
                _ => Err(err(format!("bit index {s:?} out of range"))),
            }
        };
        match fields.as_slice() {
            ["l", i, c] => {
                let i = index(i)?;
                p.linear[i as usize] = parse_coeff(c).ok_or_else(|| err(format!("bad coefficient {c:?}")))?;
            }
            ["q", i, j, c] => {
                let (i, j) = (index(i)?, index(j)?);
                if i >= j {
                    return Err(err(format!("quadratic entry ({i},{j}) must have i < j")));
                }
                let c = parse_coeff(c).ok_or_else(|| err(format!("bad coefficient {c:?}")))?;
                raw.push((i, j, c));
            }
            _ => return Err(err(format!("unrecognized line {body:?}"))),
        }
    }
    let mut p = poly.ok_or(FormatError::MissingHeader)?;
    raw.sort_by_key(|&(i, j, _)| (i, j));
    if let Some(w) = raw.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
        return Err(FormatError::Duplicate(w[0].0, w[0].1));
    }
    p.quadratic = raw;
    Ok(QuboModel::from_polynomial(p))
}

fn parse_coeff(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}
