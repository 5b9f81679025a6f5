//! Computation engine for finite p-groups given by power-conjugate
//! presentations, with machinery for finding and verifying mixed
//! ramification structures (pairs of generating pairs whose conjugate
//! cyclic subgroups avoid each other) and their strong-reality data.
//!
//! The crate is organised bottom-up:
//!
//! - [`pcgroup`] — presentations, normal-form arithmetic, rank tables and
//!   characteristic subgroups;
//! - [`families`] — parametrised constructions of the group families the
//!   tools target, with validation against independent models;
//! - [`beauville`] — generating pairs, conjugate-cyclic-subgroup unions and
//!   structure search;
//! - [`strongreal`] — automorphisms, inversion witnesses and the
//!   classification of structures by strong reality.

pub mod beauville;
mod error;
pub mod families;
pub mod pcgroup;
pub mod strongreal;

pub use error::{Error, Result};
