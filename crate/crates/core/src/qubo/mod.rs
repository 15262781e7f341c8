//! Field-like QUBO encoding: one bit per (residue, site) pair, with the
//! contact energy plus three penalty terms enforcing a valid chain.

mod bits;
mod io;
mod model;
mod terms;

pub use bits::{decode, encode, BitState, DecodeReport, PenaltyViolation};
pub use io::{export_qubo, import_qubo, FormatError};
pub use model::{build_qubo, LagrangeParams, Polynomial, QuboError, QuboModel};
pub use terms::{eval_terms, TermEnergies};
