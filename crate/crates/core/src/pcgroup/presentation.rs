//! Power-conjugate presentations of finite p-groups.
//!
//! A presentation lists generators `g_1, ..., g_n` in a fixed order together
//! with a relative order `r_i` (a power of the prime) for each generator, a
//! power relation `g_i^{r_i} = w_i` with `w_i` a word over `g_{i+1}, ..., g_n`,
//! and conjugate relations `g_j^{g_i} = w_ij` (for `i < j`) with `w_ij` a word
//! over `g_j, ..., g_n`.  Missing power relations default to the identity and
//! missing conjugate relations mean the two generators commute.
//!
//! Every group element then has a unique normal form
//! `g_1^{e_1} ... g_n^{e_n}` with `0 <= e_i < r_i`, provided the presentation
//! is consistent; consistency is probed when a [`GroupTable`] is built.
//!
//! [`GroupTable`]: super::GroupTable

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// A word over the pc generators: a product of `gen^exp` factors, stored as
/// `(generator index, exponent)` pairs with exponents in `[1, r_gen)`.
/// The empty word is the identity.
pub type Word = Vec<(usize, u64)>;

/// A power-conjugate presentation.  See the module docs for the conventions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcPresentation {
    /// The prime `p`.
    pub prime: u64,
    /// Generator names, in pc order (`g_1` first).
    pub gens: Vec<String>,
    /// Relative order `r_i` of each generator; a power of `prime`.
    pub rel_orders: Vec<u64>,
    /// `power_rels[i]` is the word equal to `g_i^{r_i}`, over generators with
    /// index `> i`.  Empty word = identity.
    pub power_rels: Vec<Word>,
    /// `conj_rels[(i, j)]` (with `i < j`) is the word equal to `g_j^{g_i} =
    /// g_i^{-1} g_j g_i`, over generators with index `>= j`.  Absent entries
    /// mean `g_i` and `g_j` commute.
    pub conj_rels: BTreeMap<(usize, usize), Word>,
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PcPresentation {
    /// Presentation of the trivial group.
    pub fn trivial(prime: u64) -> Self {
        PcPresentation {
            prime,
            gens: Vec::new(),
            rel_orders: Vec::new(),
            power_rels: Vec::new(),
            conj_rels: BTreeMap::new(),
        }
    }

    /// Number of pc generators.
    pub fn n_gens(&self) -> usize {
        self.gens.len()
    }

    /// Product of the relative orders, i.e. the group order if the
    /// presentation is consistent.  `None` on u64 overflow.
    pub fn order(&self) -> Option<u64> {
        self.rel_orders
            .iter()
            .try_fold(1u64, |acc, &r| acc.checked_mul(r))
    }

    /// Index of a generator by name.
    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g == name)
    }

    /// Structural validation: prime is prime, relative orders are powers of
    /// it, words stay within their allowed generator range with reduced
    /// exponents, and generator names are usable identifiers.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Error::InvalidParams(msg);
        if !is_prime(self.prime) {
            return Err(bad(format!("{} is not prime", self.prime)));
        }
        let n = self.gens.len();
        if self.rel_orders.len() != n || self.power_rels.len() != n {
            return Err(bad("generator/relation list length mismatch".into()));
        }
        for (idx, name) in self.gens.iter().enumerate() {
            let ok = !name.is_empty()
                && name.chars().next().unwrap().is_ascii_alphabetic()
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(bad(format!("generator name {name:?} is not an identifier")));
            }
            if self.gens[..idx].contains(name) {
                return Err(bad(format!("duplicate generator name {name:?}")));
            }
        }
        for (i, &r) in self.rel_orders.iter().enumerate() {
            let mut m = r;
            while m > 1 && m % self.prime == 0 {
                m /= self.prime;
            }
            if r < 2 || m != 1 {
                return Err(bad(format!(
                    "relative order {r} of {} is not a positive power of {}",
                    self.gens[i], self.prime
                )));
            }
        }
        let check_word = |w: &Word, min: usize, what: &str| -> Result<()> {
            for &(g, e) in w {
                if g >= n {
                    return Err(bad(format!("{what}: generator index {g} out of range")));
                }
                if g < min {
                    return Err(bad(format!(
                        "{what}: generator {} appears before index {min}",
                        self.gens[g]
                    )));
                }
                if e == 0 || e >= self.rel_orders[g] {
                    return Err(bad(format!(
                        "{what}: exponent {e} of {} out of range [1, {})",
                        self.gens[g], self.rel_orders[g]
                    )));
                }
            }
            Ok(())
        };
        for (i, w) in self.power_rels.iter().enumerate() {
            check_word(w, i + 1, &format!("power relation of {}", self.gens[i]))?;
        }
        for (&(i, j), w) in &self.conj_rels {
            if i >= j || j >= n {
                return Err(bad(format!("conjugate relation indices ({i}, {j}) invalid")));
            }
            check_word(w, j, &format!("conjugate relation {}^{}", self.gens[j], self.gens[i]))?;
        }
        Ok(())
    }

    fn fmt_word(&self, w: &Word, out: &mut String) {
        for (k, &(g, e)) in w.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push_str(&self.gens[g]);
            if e != 1 {
                out.push_str(&format!("^{e}"));
            }
        }
    }
}

impl fmt::Display for PcPresentation {
    /// Canonical text form, re-parsable by [`parse`](super::parse).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "prime {};", self.prime)?;
        for (name, r) in self.gens.iter().zip(&self.rel_orders) {
            writeln!(f, "gen {name} order {r};")?;
        }
        for (i, w) in self.power_rels.iter().enumerate() {
            let mut s = String::new();
            self.fmt_word(w, &mut s);
            if s.is_empty() {
                writeln!(f, "pow {} = ;", self.gens[i])?;
            } else {
                writeln!(f, "pow {} = {s};", self.gens[i])?;
            }
        }
        for (&(i, j), w) in &self.conj_rels {
            let mut s = String::new();
            self.fmt_word(w, &mut s);
            writeln!(f, "conj {}^{} = {s};", self.gens[j], self.gens[i])?;
        }
        Ok(())
    }
}
