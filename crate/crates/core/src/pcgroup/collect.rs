//! Collection-from-the-left arithmetic on exponent vectors.
//!
//! The collector turns a pc presentation's rewrite rules into normal-form
//! multiplication.  To append `g_i^s` to a normal form
//! `g_1^{e_1} ... g_n^{e_n}`, the factor is pushed left past the tail
//! `g_{i+1}^{e_{i+1}} ... g_n^{e_n}` by conjugating the tail
//! (`T g = g T^g`), the exponent of `g_i` absorbs `s` with the power relation
//! substituted on overflow, and the remaining work happens strictly inside
//! the tail subgroup — which bounds the recursion depth by the number of
//! generators.
//!
//! Conjugation of a tail by `g_i^s` is done componentwise via precomputed
//! ladders `g_j^(g_i^(2^b))`, so the cost of a single multiplication is
//! logarithmic in the exponents rather than linear.  For groups small enough
//! to get rank tables (see [`GroupTable`](super::GroupTable)) the collector
//! is only used to seed those tables.

use super::presentation::{PcPresentation, Word};

/// Exponent-vector arithmetic derived from a presentation.  All methods take
/// and return full-length exponent vectors in normal form.
pub(crate) struct Collector {
    n: usize,
    radices: Vec<u64>,
    /// Value of `g_i^{r_i}` as a normal form (support `> i`).
    power_vals: Vec<Vec<u32>>,
    /// `ladder[i][j][b]` = normal form of `g_j^(g_i^(2^b))` for `j > i`,
    /// present only while `2^b < r_i`.  `ladder[i][j]` is empty when `g_j`
    /// commutes with `g_i` (the common case).
    ladder: Vec<Vec<Vec<Vec<u32>>>>,
    /// True if every generator past `i` commutes with `g_i`.
    tail_trivial: Vec<bool>,
}

impl Collector {
    pub fn new(pres: &PcPresentation) -> Collector {
        let n = pres.n_gens();
        let radices = pres.rel_orders.clone();
        let mut c = Collector {
            n,
            radices,
            power_vals: vec![Vec::new(); n],
            ladder: vec![Vec::new(); n],
            tail_trivial: vec![true; n],
        };
        // Build bottom-up: relations of g_i only involve generators > i, so
        // everything needed to evaluate them is already in place.  Within a
        // fixed i, rungs are built with j descending because squaring the
        // rung for g_j needs the (already final) rungs of every g_{j'}, j'>j.
        for i in (0..n).rev() {
            c.power_vals[i] = c.eval_word(&pres.power_rels[i]);
            let mut rungs: Vec<Vec<Vec<u32>>> = vec![Vec::new(); n];
            for j in ((i + 1)..n).rev() {
                let base = match pres.conj_rels.get(&(i, j)) {
                    Some(w) => c.eval_word(w),
                    None => continue,
                };
                if base == c.gen_vec(j) {
                    continue; // explicit trivial relation
                }
                c.tail_trivial[i] = false;
                // Square up: g_j^(g_i^(2^(b+1))) = (g_j^(g_i^(2^b)))^(g_i^(2^b)).
                let mut levels = vec![base];
                let mut span = 2u64;
                while span < c.radices[i] {
                    let b = levels.len() - 1;
                    let prev = levels[b].clone();
                    let next = c.conj_by_gen_pow2(&prev, i, b, &rungs, Some((j, &levels)));
                    levels.push(next);
                    span *= 2;
                }
                rungs[j] = levels;
            }
            c.ladder[i] = rungs;
        }
        c
    }

    fn gen_vec(&self, i: usize) -> Vec<u32> {
        let mut v = vec![0u32; self.n];
        v[i] = 1;
        v
    }

    pub fn identity(&self) -> Vec<u32> {
        vec![0u32; self.n]
    }

    /// Evaluates a presentation word as a normal form.
    pub fn eval_word(&self, w: &Word) -> Vec<u32> {
        let mut acc = self.identity();
        for &(g, e) in w {
            acc = self.mul_gen_pow(acc, g, e);
        }
        acc
    }

    /// `u * v`.
    pub fn mul(&self, u: &[u32], v: &[u32]) -> Vec<u32> {
        let mut acc = u.to_vec();
        for (j, &e) in v.iter().enumerate() {
            if e != 0 {
                acc = self.mul_gen_pow(acc, j, e as u64);
            }
        }
        acc
    }

    /// `u * g_i^k` for any `k >= 0`.
    pub fn mul_gen_pow(&self, u: Vec<u32>, i: usize, k: u64) -> Vec<u32> {
        let r = self.radices[i];
        let q = k / r;
        let s = k % r;
        let mut out = u;
        if s != 0 {
            // u = H * g_i^{e_i} * T  =>  u * g_i^s = H * g_i^{e_i+s} * T^(g_i^s).
            let tail_conj = if self.tail_trivial[i] || out[i + 1..].iter().all(|&e| e == 0) {
                None
            } else {
                Some(self.conj_tail(&out, i, s))
            };
            let mut e = out[i] as u64 + s;
            let mut overflow = false;
            if e >= r {
                e -= r;
                overflow = true;
            }
            out[i] = e as u32;
            match (overflow && !self.power_vals[i].is_empty(), tail_conj) {
                (true, Some(t)) => {
                    let suffix = self.mul(&self.power_vals[i], &t);
                    out[i + 1..].copy_from_slice(&suffix[i + 1..]);
                }
                (true, None) => {
                    // Tail was unchanged; fold the power-relation value in.
                    let tail: Vec<u32> = {
                        let mut t = self.identity();
                        t[i + 1..].copy_from_slice(&out[i + 1..]);
                        t
                    };
                    let suffix = self.mul(&self.power_vals[i], &tail);
                    out[i + 1..].copy_from_slice(&suffix[i + 1..]);
                }
                (false, Some(t)) => out[i + 1..].copy_from_slice(&t[i + 1..]),
                (false, None) => {}
            }
        }
        if q != 0 && !self.power_vals[i].is_empty() {
            // g_i^(q*r_i) = (g_i^{r_i})^q, which commutes with g_i.
            let wq = self.pow_u(&self.power_vals[i].clone(), q);
            out = self.mul(&out, &wq);
        }
        out
    }

    /// Conjugates the tail (indices `> i`) of `u` by `g_i^s`; returns a
    /// vector whose entries at indices `<= i` are zero.
    fn conj_tail(&self, u: &[u32], i: usize, s: u64) -> Vec<u32> {
        let mut acc = self.identity();
        for (j, &e) in u.iter().enumerate().skip(i + 1) {
            if e == 0 {
                continue;
            }
            let cj = self.conj_gen_by_gen_pow(j, i, s);
            let cj_pow = self.pow_u(&cj, e as u64);
            acc = self.mul(&acc, &cj_pow);
        }
        acc
    }

    /// `g_j^(g_i^s)` via the binary ladder.
    fn conj_gen_by_gen_pow(&self, j: usize, i: usize, s: u64) -> Vec<u32> {
        if self.ladder[i][j].is_empty() {
            return self.gen_vec(j);
        }
        let mut cur = self.gen_vec(j);
        let mut b = 0usize;
        let mut rem = s;
        while rem != 0 {
            if rem & 1 == 1 {
                cur = self.conj_by_gen_pow2(&cur, i, b, &self.ladder[i], None);
            }
            rem >>= 1;
            b += 1;
        }
        cur
    }

    /// Conjugates a normal form `e` (support `> i`) by `g_i^(2^b)`,
    /// componentwise over `e`'s factors.  During ladder construction the
    /// levels of the rung currently being built (and its index) are passed
    /// via `building`; an empty rung always means the component commutes.
    fn conj_by_gen_pow2(
        &self,
        e: &[u32],
        i: usize,
        b: usize,
        rungs: &[Vec<Vec<u32>>],
        building: Option<(usize, &[Vec<u32>])>,
    ) -> Vec<u32> {
        let mut acc = self.identity();
        for j in (i + 1)..self.n {
            if e[j] == 0 {
                continue;
            }
            let base = match building {
                Some((bj, lv)) if bj == j => lv[b].clone(),
                _ if !rungs[j].is_empty() => rungs[j][b].clone(),
                _ => self.gen_vec(j),
            };
            let powed = self.pow_u(&base, e[j] as u64);
            acc = self.mul(&acc, &powed);
        }
        acc
    }

    /// `u^k` for `k >= 0` by square-and-multiply.
    pub fn pow_u(&self, u: &[u32], mut k: u64) -> Vec<u32> {
        let mut acc = self.identity();
        let mut base = u.to_vec();
        while k != 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k != 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// `u^k` for any signed `k`.
    pub fn pow(&self, u: &[u32], k: i64) -> Vec<u32> {
        if k >= 0 {
            self.pow_u(u, k as u64)
        } else {
            self.pow_u(&self.inv(u), k.unsigned_abs())
        }
    }

    /// `u^{-1}`.  With `u = g_i^e * R` (first nonzero exponent at `i`):
    /// `u^{-1} = R^{-1} * g_i^{r_i - e} * (g_i^{r_i})^{-1}`, all powers of
    /// `g_i` commuting with each other.
    pub fn inv(&self, u: &[u32]) -> Vec<u32> {
        let i = match u.iter().position(|&e| e != 0) {
            Some(i) => i,
            None => return self.identity(),
        };
        let e = u[i] as u64;
        let mut rest = u.to_vec();
        rest[i] = 0;
        let rinv = self.inv(&rest);
        let mut out = self.mul_gen_pow(rinv, i, self.radices[i] - e);
        if !self.power_vals[i].is_empty() {
            let winv = self.inv(&self.power_vals[i].clone());
            out = self.mul(&out, &winv);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcgroup::parse;

    fn q8_collector() -> Collector {
        // Quaternion group: x^2 = z, y^2 = z, y^x = y z, z central.
        let pres = parse(
            "prime 2;\n gen x order 2;\n gen y order 2;\n gen z order 2;\n\
            pow x = z;\n pow y = z;\n conj y^x = y z;\n",
        )
        .unwrap();
        Collector::new(&pres)
    }

    #[test]
    fn q8_arithmetic() {
        let c = q8_collector();
        let x = vec![1, 0, 0];
        let y = vec![0, 1, 0];
        // x*x = z, y*y = z.
        assert_eq!(c.mul(&x, &x), vec![0, 0, 1]);
        assert_eq!(c.mul(&y, &y), vec![0, 0, 1]);
        // y*x = x*y*z (from y^x = yz).
        assert_eq!(c.mul(&y, &x), vec![1, 1, 1]);
        // x^4 = 1, and x^{-1} = x z.
        assert_eq!(c.pow(&x, 4), vec![0, 0, 0]);
        assert_eq!(c.inv(&x), vec![1, 0, 1]);
        assert_eq!(c.mul(&x, &c.inv(&x)), vec![0, 0, 0]);
    }

    #[test]
    fn inverse_is_two_sided_everywhere() {
        let c = q8_collector();
        for ex in 0..2 {
            for ey in 0..2 {
                for ez in 0..2 {
                    let u = vec![ex, ey, ez];
                    let ui = c.inv(&u);
                    assert_eq!(c.mul(&u, &ui), vec![0, 0, 0]);
                    assert_eq!(c.mul(&ui, &u), vec![0, 0, 0]);
                }
            }
        }
    }
}
