//! Classification of matrix-group representations whose characters are fixed
//! by an anti-holomorphic involution, with constructive conjugation into an
//! explicit real form of the ambient classical group.

pub mod classifier;
pub mod commutant;
pub mod decomp;
pub mod error;
pub mod formsolver;
pub mod grouprep;
pub mod harness;
pub mod invariants;
pub mod matcore;
pub mod reducible;

pub use error::{Error, Result};
pub use grouprep::{Family, GroupKind, RealFormTag, Representation};
pub use matcore::{ComplexMatrix, Signature, Tolerance};
