//! Symmetric 20x20 residue contact matrix and its text loader.
//!
//! File format, line oriented:
//!
//! ```text
//! # comment
//! C M F I L V W Y A G T S N Q D E H R K P     <- alphabet order line
//! C C 5.44
//! C M 4.99
//! ...
//! ```
//!
//! The first non-comment line lists the 20 one-letter codes (separated by
//! whitespace or not). Every following data line is `A B value`. Either one
//! triangle or both may be given; a duplicate of a pair must repeat the same
//! value. Values are taken as-is: the chain energy is `-sum C(a_i, a_j)` over
//! contacts, so attractive pairs carry positive entries.

use std::io::BufRead;

use thiserror::Error;

use crate::sequence::{AminoAcid, SequenceError};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("reading contact matrix: {0}")]
    Io(#[from] std::io::Error),
    #[error("contact matrix has no alphabet line")]
    MissingAlphabet,
    #[error("alphabet line must list each of the 20 codes exactly once: {0}")]
    BadAlphabet(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Code {
        line: usize,
        #[source]
        source: SequenceError,
    },
    #[error("line {line}: pair ({a},{b}) given as {first} and {second}")]
    Conflict {
        line: usize,
        a: char,
        b: char,
        first: f64,
        second: f64,
    },
    #[error("missing contact energy for pair ({0},{1})")]
    MissingPair(char, char),
}

/// Pair contact energies `C(a, b)`, symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMatrix {
    entries: [[f64; 20]; 20],
    /// Order in which the source file listed the alphabet.
    alphabet: Vec<AminoAcid>,
}

impl ContactMatrix {
    /// Builds a matrix from `f(a, b)`, evaluated for `a <= b` only.
    pub fn from_fn(mut f: impl FnMut(AminoAcid, AminoAcid) -> f64) -> Self {
        let mut entries = [[0.0; 20]; 20];
        for a in AminoAcid::all() {
            for b in AminoAcid::all().filter(|b| *b >= a) {
                let v = f(a, b);
                entries[a.index()][b.index()] = v;
                entries[b.index()][a.index()] = v;
            }
        }
        Self {
            entries,
            alphabet: AminoAcid::all().collect(),
        }
    }

    pub fn uniform(value: f64) -> Self {
        Self::from_fn(|_, _| value)
    }

    #[inline]
    pub fn get(&self, a: AminoAcid, b: AminoAcid) -> f64 {
        self.entries[a.index()][b.index()]
    }

    pub fn alphabet(&self) -> &[AminoAcid] {
        &self.alphabet
    }

    pub fn load(reader: impl BufRead) -> Result<Self, MatrixError> {
        let mut alphabet: Option<Vec<AminoAcid>> = None;
        let mut seen: [[Option<f64>; 20]; 20] = [[None; 20]; 20];

        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if alphabet.is_none() {
                alphabet = Some(parse_alphabet(body)?);
                continue;
            }

            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(MatrixError::Syntax {
                    line: lineno,
                    message: format!("expected `A B value`, got {body:?}"),
                });
            }
            let code = |s: &str| -> Result<AminoAcid, MatrixError> {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => AminoAcid::from_code(c)
                        .map_err(|source| MatrixError::Code { line: lineno, source }),
                    _ => Err(MatrixError::Syntax {
                        line: lineno,
                        message: format!("expected a one-letter code, got {s:?}"),
                    }),
                }
            };
            let a = code(fields[0])?;
            let b = code(fields[1])?;
            let value: f64 = fields[2].parse().map_err(|_| MatrixError::Syntax {
                line: lineno,
                message: format!("bad value {:?}", fields[2]),
            })?;
            if !value.is_finite() {
                return Err(MatrixError::Syntax {
                    line: lineno,
                    message: format!("non-finite value {value}"),
                });
            }

            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            match seen[lo.index()][hi.index()] {
                Some(prev) if prev != value => {
                    return Err(MatrixError::Conflict {
                        line: lineno,
                        a: lo.code(),
                        b: hi.code(),
                        first: prev,
                        second: value,
                    })
                }
                _ => seen[lo.index()][hi.index()] = Some(value),
            }
        }

        let alphabet = alphabet.ok_or(MatrixError::MissingAlphabet)?;
        // Report the first missing pair in file alphabet order.
        for (i, &a) in alphabet.iter().enumerate() {
            for &b in &alphabet[i..] {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                if seen[lo.index()][hi.index()].is_none() {
                    return Err(MatrixError::MissingPair(a.code(), b.code()));
                }
            }
        }

        let mut m = Self::from_fn(|a, b| seen[a.index()][b.index()].unwrap_or_default());
        m.alphabet = alphabet;
        Ok(m)
    }
}

fn parse_alphabet(line: &str) -> Result<Vec<AminoAcid>, MatrixError> {
    let codes: Vec<char> = line.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || MatrixError::BadAlphabet(line.to_string());
    if codes.len() != 20 {
        return Err(bad());
    }
    let mut used = [false; 20];
    let mut out = Vec::with_capacity(20);
    for c in codes {
        let aa = AminoAcid::from_code(c).map_err(|_| bad())?;
        if std::mem::replace(&mut used[aa.index()], true) {
            return Err(bad());
        }
        out.push(aa);
    }
    Ok(out)
}
