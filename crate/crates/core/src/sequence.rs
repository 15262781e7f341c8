//! Amino-acid alphabet, sequences, and the FASTA-style sequence file.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// The 20 canonical one-letter codes in alphabetical order.
pub const ALPHABET: &[u8; 20] = b"ACDEFGHIKLMNPQRSTVWY";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SequenceError {
    #[error("unknown amino-acid code {0:?}")]
    UnknownCode(char),
    #[error("sequence must contain at least 2 residues, got {0}")]
    TooShort(usize),
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<SequenceError>,
    },
}

/// One of the 20 canonical amino acids, stored as its index in [`ALPHABET`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AminoAcid(u8);

impl AminoAcid {
    pub fn from_code(code: char) -> Result<Self, SequenceError> {
        let upper = code.to_ascii_uppercase();
        ALPHABET
            .iter()
            .position(|&c| c as char == upper)
            .map(|i| AminoAcid(i as u8))
            .ok_or(SequenceError::UnknownCode(code))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn code(self) -> char {
        ALPHABET[self.0 as usize] as char
    }

    pub fn all() -> impl Iterator<Item = AminoAcid> {
        (0..20u8).map(AminoAcid)
    }
}

impl fmt::Display for AminoAcid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    residues: Vec<AminoAcid>,
}

impl Sequence {
    pub fn new(residues: Vec<AminoAcid>) -> Result<Self, SequenceError> {
        if residues.len() < 2 {
            return Err(SequenceError::TooShort(residues.len()));
        }
        Ok(Self { residues })
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn residues(&self) -> &[AminoAcid] {
        &self.residues
    }

    pub fn get(&self, i: usize) -> AminoAcid {
        self.residues[i]
    }
}

impl FromStr for Sequence {
    type Err = SequenceError;

    /// Parses one-letter codes; whitespace is ignored so grouped blocks of
    /// ten are accepted as printed.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let residues = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(AminoAcid::from_code)
            .collect::<Result<Vec<_>, _>>()?;
        Sequence::new(residues)
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.residues {
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedSequence {
    pub name: Option<String>,
    pub sequence: Sequence,
}

/// Parses a sequence file: one sequence per line, optionally preceded by a
/// `>name` header. A header applies to the next sequence line only. Blank
/// lines and `#` comments are skipped.
pub fn parse_sequence_file(text: &str) -> Result<Vec<NamedSequence>, SequenceError> {
    let mut out = Vec::new();
    let mut pending_name = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('>') {
            pending_name = Some(name.trim().to_string());
            continue;
        }
        let sequence = line.parse::<Sequence>().map_err(|e| SequenceError::Line {
            line: lineno + 1,
            source: Box::new(e),
        })?;
        out.push(NamedSequence {
            name: pending_name.take(),
            sequence,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grouped_blocks() {
        let s: Sequence = "FRTRPLNHDF YNYKIWEPFK PADFPKAWDR MLDHVWDSMA SWGHQHCS"
            .parse()
            .unwrap();
        assert_eq!(s.len(), 48);
        assert_eq!(s.get(0).code(), 'F');
        assert_eq!(s.get(47).code(), 'S');
    }

    #[test]
    fn rejects_unknown_and_short() {
        assert_eq!(
            "ACXD".parse::<Sequence>(),
            Err(SequenceError::UnknownCode('X'))
        );
        assert_eq!("A".parse::<Sequence>(), Err(SequenceError::TooShort(1)));
    }

    #[test]
    fn sequence_file_with_headers() {
        let text = "# test\n>one\nACDE FGH\n\nKLMN\n>three\nPQRS\n";
        let seqs = parse_sequence_file(text).unwrap();
        assert_eq!(seqs.len(), 3);
        assert_eq!(seqs[0].name.as_deref(), Some("one"));
        assert_eq!(seqs[0].sequence.to_string(), "ACDEFGH");
        assert_eq!(seqs[1].name, None);
        assert_eq!(seqs[2].name.as_deref(), Some("three"));
    }

    #[test]
    fn sequence_file_error_names_line() {
        let err = parse_sequence_file("ACDE\nAB1\n").unwrap_err();
        assert!(matches!(err, SequenceError::Line { line: 2, .. }));
    }
}
