//! Group elements in exponent-vector normal form.

use serde::{Deserialize, Serialize};

/// A group element `g_1^{e_1} ... g_n^{e_n}` stored as its exponent vector,
/// with `0 <= e_i < r_i`.  Elements are plain data; all arithmetic lives on
/// [`GroupTable`](super::GroupTable), which also validates that a vector's
/// length and ranges match the group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(pub(crate) Vec<u32>);

impl Element {
    /// Builds an element from raw exponents.  Range checks happen when the
    /// element is first used with a group.
    pub fn from_exps(exps: Vec<u32>) -> Self {
        Element(exps)
    }

    /// The identity of a group with `n` pc generators.
    pub fn identity(n: usize) -> Self {
        Element(vec![0; n])
    }

    /// The exponent vector.
    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    /// True if every exponent is zero.
    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl From<Vec<u32>> for Element {
    fn from(v: Vec<u32>) -> Self {
        Element(v)
    }
}
