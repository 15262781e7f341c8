//! Maximally compact lattice proteins: a QUBO encoding solved by simulated
//! annealing, and exact enumeration of every compact structure for
//! reference.

pub mod anneal;
pub mod conformation;
pub mod contact;
pub mod enumeration;
pub mod lattice;
pub mod qubo;
pub mod sequence;

pub use conformation::{Conformation, ContactSet, ModelError, ValidityReport, Violation};
pub use contact::{ContactMatrix, MatrixError};
pub use lattice::{Lattice, LatticeError, MAX_SITES};
pub use sequence::{parse_sequence_file, AminoAcid, NamedSequence, Sequence, SequenceError};
