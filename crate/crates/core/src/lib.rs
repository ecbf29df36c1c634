//! Ribbon graph complexes: enumeration, the vertex-splitting and
//! corner-connecting differentials, and exact cohomology.

pub mod cache;
pub mod canonical;
pub mod complex;
pub mod differential;
pub mod enumerate;
pub mod error;
pub mod gc;
pub mod identities;
pub mod linalg;
pub mod modular;
pub mod perm;
pub mod report;
pub mod ribbon;

pub use canonical::{automorphisms, canonical_form, orientation_sign, to_oriented_class, Orientation, OrientedClass, Parity};
pub use error::{ComplexError, LinalgError, RibbonError};
pub use ribbon::{Corner, RibbonGraph};
