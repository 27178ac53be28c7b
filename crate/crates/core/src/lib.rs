//! Twisted conjugacy classes of finite symplectic groups `Sp(2n, Z_m)`.
//!
//! Groups are enumerated by closure under generators into an element
//! arena; automorphisms are permutation tables over that arena; twisted
//! classes are orbits of `a . x = a x phi(a)^-1`. The [`certify`] module
//! cross-checks class counts through independent constructions and emits
//! JSON certificates.

pub mod automorphism;
pub mod certify;
pub mod error;
pub mod fixtures;
pub mod group;
pub mod modring;
pub mod partition;
pub mod semidirect;
pub mod symplectic;
pub mod validation;

pub use automorphism::{Automorphism, Character, Descriptor};
pub use certify::{
    growth_scan, order_certificate, prop32_certificate, quotient_epi_check, refined_split_check,
    semidirect_oracle, shift_bijection_check, torus_block_certificate, BlockMethod, Certificate,
    GrowthRow, RingReduction, Verdict,
};
pub use error::{Error, Result};
pub use group::{generate_group, ElementId, FiniteGroup, DEFAULT_CAP};
pub use modring::{ModMatrix, Modulus, TorusElement};
pub use partition::{ordinary_classes, twisted_classes, ClassId, Partition, PartitionKind};
pub use semidirect::{Pair, SemidirectGroup};
pub use symplectic::{sp_order, standard_generators};
pub use validation::ValidationBudget;
