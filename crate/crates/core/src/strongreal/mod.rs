//! Strongly-real Beauville structures.
//!
//! A Beauville structure `{(x1, y1), (x2, y2)}` of a group `G` is *strongly
//! real* when some automorphism `θ` of `G` and elements `g1, g2 ∈ G` satisfy
//!
//! ```text
//! g1 · θ(x1) · g1⁻¹ = x1⁻¹    g1 · θ(y1) · g1⁻¹ = y1⁻¹
//! g2 · θ(x2) · g2⁻¹ = x2⁻¹    g2 · θ(y2) · g2⁻¹ = y2⁻¹
//! ```
//!
//! i.e. `θ` simultaneously inverts both generating pairs up to conjugation.
//! This module provides:
//!
//! - [`aut`]: automorphisms of two-generator p-groups — brute-force
//!   enumeration, parametrized families for the split metacyclic and
//!   class-2 groups, induced action on the Frattini quotient, and
//!   exhaustive search for conjugating elements ([`inversion_witness`]).
//! - [`congruence`]: the mod-`2^e` linear system whose solution produces a
//!   conjugating element for the triangle-curve quotient 2-groups.
//! - [`witness`]: witness construction and verification — transfer moves
//!   between the pairs `(x, y)` and `(xy, x)` / `(xy, y)`, the inversion
//!   defect identity, and the constructive witness for triangle-quotient
//!   groups ([`triangle_quotient_witness`]).
//! - [`classify`]: exhaustive classification of all Beauville structures of
//!   a group as strongly real or not.

pub mod aut;
pub mod classify;
pub mod congruence;
pub mod witness;

pub use aut::{
    brute_force_automorphisms, class2_aut, extend_to_automorphism, in_class2_family,
    induced_matrix_mod_frattini, inversion_witness, is_minus_identity, metacyclic_aut,
    Automorphism,
};
pub use classify::{
    classify_structures, classify_structures_sampled, Classification, ClassificationReport,
    SampledClassification,
};
pub use congruence::CongruenceParams;
pub use witness::{
    inversion_automorphism, inversion_defect, transfer_witness, transfer_witness_forward,
    triangle_quotient_witness, verify_witness, DefectSide, StrongRealWitness, TransferBasis,
    TriangleWitness,
};
