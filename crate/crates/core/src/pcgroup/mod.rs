//! Finite p-groups given by power-conjugate presentations.
//!
//! A presentation lists generators `g_1 < g_2 < ... < g_n`, each with a
//! relative order that is a power of the prime, a power relation expressing
//! `g_i^{r_i}` as a word in later generators, and conjugation relations
//! expressing `g_j^{g_i}` (for `i < j`) as a word in generators `>= j`.
//! Every element then has a unique normal form `g_1^{e_1} ... g_n^{e_n}`
//! with `0 <= e_i < r_i`, and the group order is the product of the `r_i`.
//!
//! Conventions used throughout the crate: `a^g = g⁻¹ a g` and
//! `[u, v] = u⁻¹ v⁻¹ u v`.

mod collect;
mod element;
mod group;
mod parser;
mod presentation;
mod set;
mod subgroups;

pub use element::Element;
pub use group::{BuildOptions, DerivedDef, GroupCaps, GroupTable};
pub(crate) use presentation::is_prime;
pub use parser::parse;
pub use presentation::{PcPresentation, Word};
pub use set::ElementSet;
pub use subgroups::{ConjClasses, FrattiniQuotient, RegularityCheck};
