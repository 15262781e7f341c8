//! Chain conformations on a lattice and the structural observables computed
//! from them: contacts, contact energy, contact order and nativeness.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::contact::ContactMatrix;
use crate::lattice::Lattice;
use crate::sequence::Sequence;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("sequence has {sequence} residues but conformation has {conformation}")]
    LengthMismatch { sequence: usize, conformation: usize },
    #[error("invalid conformation: {0}")]
    Invalid(ValidityReport),
    #[error("contact set is empty")]
    NoContacts,
}

/// A chain placement: `path[i]` is the site of residue `i` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conformation {
    path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Residue placed on a site index outside the lattice.
    OutOfRange { residue: usize, site: usize },
    /// Residue placed on a site already used by an earlier residue.
    RepeatedSite {
        residue: usize,
        earlier: usize,
        site: usize,
    },
    /// Consecutive residues `residue` and `residue + 1` are not neighbors.
    Disconnected {
        residue: usize,
        from: usize,
        to: usize,
    },
}

impl fmt::Display for Violation {
    // Residues are reported 1-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::OutOfRange { residue, site } => {
                write!(f, "residue {} on out-of-range site {site}", residue + 1)
            }
            Violation::RepeatedSite {
                residue,
                earlier,
                site,
            } => write!(
                f,
                "self-avoidance: residues {} and {} share site {site}",
                earlier + 1,
                residue + 1
            ),
            Violation::Disconnected { residue, from, to } => write!(
                f,
                "connectivity: bond ({},{}) joins non-adjacent sites {from} and {to}",
                residue + 1,
                residue + 2
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Unordered residue pairs `(i, j)`, `i + 1 < j`, on neighboring sites.
/// Iteration order is ascending `(i, j)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContactSet {
    pairs: BTreeSet<(usize, usize)>,
}

impl ContactSet {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            pairs: pairs
                .into_iter()
                .map(|(i, j)| if i < j { (i, j) } else { (j, i) })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i.min(j), i.max(j)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn overlap(&self, other: &ContactSet) -> usize {
        self.pairs.intersection(&other.pairs).count()
    }

    /// Mean sequence separation `|i - j|` over all contacts.
    pub fn contact_order(&self) -> Result<f64, ModelError> {
        if self.pairs.is_empty() {
            return Err(ModelError::NoContacts);
        }
        let total: usize = self.pairs.iter().map(|&(i, j)| j - i).sum();
        Ok(total as f64 / self.pairs.len() as f64)
    }
}

/// Checks a raw path against a lattice, collecting every violation.
pub fn validate_path(path: &[usize], lattice: &Lattice) -> ValidityReport {
    let mut violations = Vec::new();
    let mut owner = vec![usize::MAX; lattice.site_count()];
    for (i, &site) in path.iter().enumerate() {
        if site >= lattice.site_count() {
            violations.push(Violation::OutOfRange { residue: i, site });
            continue;
        }
        if owner[site] != usize::MAX {
            violations.push(Violation::RepeatedSite {
                residue: i,
                earlier: owner[site],
                site,
            });
        } else {
            owner[site] = i;
        }
    }
    for (i, w) in path.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if a < lattice.site_count() && b < lattice.site_count() && !lattice.are_neighbors(a, b) {
            violations.push(Violation::Disconnected {
                residue: i,
                from: a,
                to: b,
            });
        }
    }
    ValidityReport { violations }
}

impl Conformation {
    /// Validates `path` on `lattice`.
    pub fn new(path: Vec<usize>, lattice: &Lattice) -> Result<Self, ModelError> {
        let report = validate_path(&path, lattice);
        if report.is_valid() {
            Ok(Self { path })
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    /// Wraps a path known to be valid (e.g. produced by enumeration).
    pub(crate) fn from_valid(path: Vec<usize>) -> Self {
        Self { path }
    }

    pub fn from_bytes(bytes: &[u8], lattice: &Lattice) -> Result<Self, ModelError> {
        Self::new(bytes.iter().map(|&b| b as usize).collect(), lattice)
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    /// True when the chain fills every lattice site.
    pub fn is_compact(&self, lattice: &Lattice) -> bool {
        self.path.len() == lattice.site_count()
    }

    pub fn validate(&self, lattice: &Lattice) -> ValidityReport {
        validate_path(&self.path, lattice)
    }

    pub fn contact_set(&self, lattice: &Lattice) -> ContactSet {
        let mut pairs = BTreeSet::new();
        for_each_contact(&self.path, lattice, |i, j| {
            pairs.insert((i, j));
        });
        ContactSet { pairs }
    }

    /// Contact energy `-sum C(a_i, a_j)` over contacts, accumulated in
    /// ascending `(i, j)` order.
    pub fn energy(
        &self,
        lattice: &Lattice,
        seq: &Sequence,
        matrix: &ContactMatrix,
    ) -> Result<f64, ModelError> {
        if seq.len() != self.path.len() {
            return Err(ModelError::LengthMismatch {
                sequence: seq.len(),
                conformation: self.path.len(),
            });
        }
        Ok(path_energy(&self.path, lattice, seq, matrix))
    }

    pub fn contact_order(&self, lattice: &Lattice) -> Result<f64, ModelError> {
        self.contact_set(lattice).contact_order()
    }

    /// Fraction of `native` contacts present in this conformation.
    pub fn nativeness(&self, lattice: &Lattice, native: &ContactSet) -> Result<f64, ModelError> {
        if native.is_empty() {
            return Err(ModelError::NoContacts);
        }
        let shared = self.contact_set(lattice).overlap(native);
        Ok(shared as f64 / native.len() as f64)
    }
}

/// Visits contacts `(i, j)` of a valid path in ascending `(i, j)` order.
///
/// Shared by every energy routine so that sums are formed in one order.
pub(crate) fn for_each_contact(path: &[usize], lattice: &Lattice, mut f: impl FnMut(usize, usize)) {
    let mut residue_at = vec![usize::MAX; lattice.site_count()];
    for (i, &s) in path.iter().enumerate() {
        residue_at[s] = i;
    }
    let mut partners = [0usize; 6];
    for (i, &s) in path.iter().enumerate() {
        let mut k = 0;
        for &m in lattice.neighbors(s) {
            let j = residue_at[m];
            if j != usize::MAX && j > i + 1 {
                partners[k] = j;
                k += 1;
            }
        }
        partners[..k].sort_unstable();
        for &j in &partners[..k] {
            f(i, j);
        }
    }
}

pub(crate) fn path_energy(
    path: &[usize],
    lattice: &Lattice,
    seq: &Sequence,
    matrix: &ContactMatrix,
) -> f64 {
    let mut e = 0.0;
    for_each_contact(path, lattice, |i, j| {
        e -= matrix.get(seq.get(i), seq.get(j));
    });
    e
}
