//! Exact linear algebra for limiting mixed Hodge structures of semistable
//! log smooth degenerations.
//!
//! Everything is generic over [`Field`]; the pipeline runs over [`Q`] with a
//! Hodge layer over [`Qi`].

pub mod combinatorics;
pub mod degeneration;
pub mod field;
pub mod filtration;
pub mod hl;
pub mod linalg;
pub mod monodromy;
pub mod spectral;
pub mod suite;

pub use field::{Field, Q, Qi};
