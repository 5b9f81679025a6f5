//! The mod-`2^e` congruence system behind the triangle-quotient witness.
//!
//! For a triangle-quotient group generated by `x, y` of order `2^e`, write
//! two elements of a generating pair (modulo the inverted part of the
//! centre) as
//!
//! ```text
//! u = x^{1+2i₁} y^{2j₁} z^{k₁}      v = y^{1+2j₂} x^{2i₂} z^{k₂}
//! ```
//!
//! A conjugating element of the shape `g = u^S y^{2k₁n − 2j₁}` inverts both
//! `u` and `v` under the pair-inversion automorphism precisely when `R, S`
//! solve the two congruences
//!
//! ```text
//! (1+2i₁) S ≡ 2i₂ (R − 1) − 2k₂ m      (mod 2^e)     "powers of x"
//! 2j₁ (S − 1) + 2k₁ n ≡ (1+2j₂) R      (mod 2^e)     "powers of y"
//! ```
//!
//! where `n = (1+2i₁)⁻¹` and `m = (1+2j₂)⁻¹` mod `2^e`.  The system is
//! linear with odd determinant, so it has a unique solution.  A third
//! congruence accounting for the powers of `z`,
//!
//! ```text
//! (1+2i₁) j₁ S(S−1) + k₁ S ≡ (1+2j₂) i₂ R(R−1) − k₂ R   (mod 2^{e−1})
//! ```
//!
//! is then satisfied automatically; property tests check this exhaustively
//! for small `e`.

use serde::{Deserialize, Serialize};

/// Inverse of an odd residue mod `2^e` (Newton iteration).
pub(crate) fn inv_mod_pow2(a: u64, e: u32) -> u64 {
    assert!(a % 2 == 1, "only odd residues are invertible mod 2^e");
    let mask = mask(e);
    let mut x = 1u64;
    for _ in 0..7 {
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x))) & mask;
    }
    debug_assert_eq!(a.wrapping_mul(x) & mask, 1 & mask);
    x
}

fn mask(e: u32) -> u64 {
    if e >= 64 {
        u64::MAX
    } else {
        (1u64 << e) - 1
    }
}

/// Exponent data of the pair `(u, v)` together with the modular inverses
/// `n` and `m` needed by the congruence system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceParams {
    pub e: u32,
    pub i1: u64,
    pub j1: u64,
    pub k1: u64,
    pub i2: u64,
    pub j2: u64,
    pub k2: u64,
    /// `(1 + 2 i1)⁻¹ mod 2^e`.
    pub n: u64,
    /// `(1 + 2 j2)⁻¹ mod 2^e`.
    pub m: u64,
}

impl CongruenceParams {
    /// Reduces the exponents mod `2^e` and computes the inverses.
    pub fn new(e: u32, i1: u64, j1: u64, k1: u64, i2: u64, j2: u64, k2: u64) -> CongruenceParams {
        assert!((1..=63).contains(&e));
        let msk = mask(e);
        let (i1, j1, k1, i2, j2, k2) =
            (i1 & msk, j1 & msk, k1 & msk, i2 & msk, j2 & msk, k2 & msk);
        let n = inv_mod_pow2((1 + 2 * i1) & msk, e);
        let m = inv_mod_pow2((1 + 2 * j2) & msk, e);
        CongruenceParams {
            e,
            i1,
            j1,
            k1,
            i2,
            j2,
            k2,
            n,
            m,
        }
    }

    fn coefficients(&self) -> (u64, u64, u64, u64, u64, u64, u64) {
        let msk = mask(self.e);
        let a = (1 + 2 * self.i1) & msk;
        let b = (2 * self.i2) & msk;
        let c = 2u64.wrapping_mul(self.k2).wrapping_mul(self.m) & msk;
        let d = (2 * self.j1) & msk;
        let ee = 2u64.wrapping_mul(self.k1).wrapping_mul(self.n) & msk;
        let f = (1 + 2 * self.j2) & msk;
        (a, b, c, d, ee, f, msk)
    }

    /// The unique solution `(R, S)` of the two congruences mod `2^e`.
    pub fn solve(&self) -> (u64, u64) {
        let (a, b, c, d, ee, f, msk) = self.coefficients();
        // Eliminating S:  R (a f − d b) ≡ a e − a d − d b − d c.
        let denom = a.wrapping_mul(f).wrapping_sub(d.wrapping_mul(b)) & msk;
        let num = a
            .wrapping_mul(ee)
            .wrapping_sub(a.wrapping_mul(d))
            .wrapping_sub(d.wrapping_mul(b))
            .wrapping_sub(d.wrapping_mul(c))
            & msk;
        let r = num.wrapping_mul(inv_mod_pow2(denom, self.e)) & msk;
        let s = self
            .n
            .wrapping_mul(b.wrapping_mul(r.wrapping_sub(1)).wrapping_sub(c))
            & msk;
        (r, s)
    }

    /// `(1+2i₁) S ≡ 2i₂(R−1) − 2k₂ m (mod 2^e)`.
    pub fn x_congruence_holds(&self, r: u64, s: u64) -> bool {
        let (a, b, c, _d, _e, _f, msk) = self.coefficients();
        a.wrapping_mul(s) & msk == b.wrapping_mul(r.wrapping_sub(1)).wrapping_sub(c) & msk
    }

    /// `2j₁(S−1) + 2k₁ n ≡ (1+2j₂) R (mod 2^e)`.
    pub fn y_congruence_holds(&self, r: u64, s: u64) -> bool {
        let (_a, _b, _c, d, ee, f, msk) = self.coefficients();
        d.wrapping_mul(s.wrapping_sub(1)).wrapping_add(ee) & msk == f.wrapping_mul(r) & msk
    }

    /// `(1+2i₁) j₁ S(S−1) + k₁ S ≡ (1+2j₂) i₂ R(R−1) − k₂ R (mod 2^{e−1})`.
    pub fn z_congruence_holds(&self, r: u64, s: u64) -> bool {
        let msk = mask(self.e - 1);
        let lhs = (1 + 2 * self.i1)
            .wrapping_mul(self.j1)
            .wrapping_mul(s)
            .wrapping_mul(s.wrapping_sub(1))
            .wrapping_add(self.k1.wrapping_mul(s));
        let rhs = (1 + 2 * self.j2)
            .wrapping_mul(self.i2)
            .wrapping_mul(r)
            .wrapping_mul(r.wrapping_sub(1))
            .wrapping_sub(self.k2.wrapping_mul(r));
        lhs & msk == rhs & msk
    }
}
