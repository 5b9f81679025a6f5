//! Group construction: consistency verification, rank arithmetic, tables.
//!
//! [`GroupTable::build`] checks that a pc presentation is *consistent* — that
//! its normal forms really form a group whose order is the product of the
//! relative orders — by collecting every critical overlap of the rewrite
//! rules both ways (`g_k(g_jg_i)` vs `(g_kg_j)g_i` and the power-relation
//! overlaps) and comparing results.  An inconsistent presentation is rejected
//! rather than silently describing a smaller group.
//!
//! Elements are used in two representations: [`Element`] exponent vectors
//! (always available, arithmetic via collection) and dense ranks in
//! `0..order` (mixed-radix, last generator varying fastest).  Per-generator
//! multiplication tables and a full conjugation table are built lazily and
//! gated by [`GroupCaps`], so construction of a group never pays for tables
//! that are not used.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::collect::Collector;
use super::element::Element;
use super::presentation::{PcPresentation, Word};
use super::set::ElementSet;
use super::subgroups::SubgroupCaches;
use crate::error::{Error, Result};

/// Size gates controlling how much memory a group may consume.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupCaps {
    /// Hard ceiling on group order accepted by [`GroupTable::build_with`].
    pub max_order: u64,
    /// Largest order for which per-generator multiplication tables are
    /// built; rank-level operations are unavailable above this.
    pub table_cap: u64,
    /// Largest order for which the dense `order × order` conjugation table
    /// may be materialized.
    pub conj_table_cap: u64,
}

impl Default for GroupCaps {
    fn default() -> Self {
        GroupCaps {
            max_order: 1 << 24,
            table_cap: 1 << 20,
            conj_table_cap: 1 << 12,
        }
    }
}

/// Declares that generator `gen` equals the commutator `[left, right]` of
/// two earlier generators (`left, right < gen`).  Maps defined on the
/// distinguished generators extend to such generators by applying the same
/// commutator expression to the images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedDef {
    pub gen: usize,
    pub left: usize,
    pub right: usize,
}

/// Options for [`GroupTable::build_with`].
#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Ordered generating tuple singled out for structure searches and map
    /// extension.  Defaults to every generator without a derived definition,
    /// in index order.
    pub distinguished: Option<Vec<usize>>,
    /// Commutator definitions for the remaining generators.
    pub derived_defs: Vec<DerivedDef>,
    pub caps: GroupCaps,
}

/// A verified group together with its arithmetic engines and caches.
pub struct GroupTable {
    pres: PcPresentation,
    collector: Collector,
    order: u64,
    n: usize,
    /// `place[i]` = product of relative orders after position `i`.
    place: Vec<u64>,
    distinguished: Vec<usize>,
    derived_defs: Vec<DerivedDef>,
    caps: GroupCaps,
    tables: OnceLock<MulTables>,
    conj_table: OnceLock<ConjTable>,
    pub(crate) sub: SubgroupCaches,
    pub(crate) sigma_cache: Mutex<HashMap<[u64; 3], Arc<ElementSet>>>,
    pub(crate) gen_pairs: OnceLock<Arc<Vec<(u64, u64)>>>,
}

impl fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupTable")
            .field("gens", &self.pres.gens)
            .field("order", &self.order)
            .finish_non_exhaustive()
    }
}

impl GroupTable {
    pub fn build(pres: PcPresentation) -> Result<GroupTable> {
        Self::build_with(pres, BuildOptions::default())
    }

    pub fn build_with(pres: PcPresentation, opts: BuildOptions) -> Result<GroupTable> {
        pres.validate()?;
        let caps = opts.caps;
        let order = pres.order().ok_or(Error::TooLarge {
            what: "group order",
            needed: u64::MAX,
            cap: caps.max_order,
        })?;
        if order > caps.max_order {
            return Err(Error::TooLarge {
                what: "group order",
                needed: order,
                cap: caps.max_order,
            });
        }
        let n = pres.n_gens();
        let collector = Collector::new(&pres);
        check_consistency(&pres, &collector)?;

        let mut place = vec![1u64; n];
        for i in (0..n.saturating_sub(1)).rev() {
            place[i] = place[i + 1] * pres.rel_orders[i + 1];
        }

        let derived_defs = opts.derived_defs;
        for d in &derived_defs {
            if d.gen >= n || d.left >= d.gen || d.right >= d.gen || d.left == d.right {
                return Err(Error::InvalidParams(format!(
                    "derived definition {:?} is out of range",
                    d
                )));
            }
            let l = gen_vec(n, d.left);
            let r = gen_vec(n, d.right);
            let comm = collector.mul(
                &collector.mul(&collector.inv(&l), &collector.inv(&r)),
                &collector.mul(&l, &r),
            );
            if comm != gen_vec(n, d.gen) {
                return Err(Error::InvalidParams(format!(
                    "generator {} is not the commutator [{}, {}]",
                    pres.gens[d.gen], pres.gens[d.left], pres.gens[d.right]
                )));
            }
        }
        let distinguished = match opts.distinguished {
            Some(d) => {
                let mut seen = vec![false; n];
                for &i in &d {
                    if i >= n || seen[i] {
                        return Err(Error::InvalidParams(format!(
                            "bad distinguished generator index {i}"
                        )));
                    }
                    seen[i] = true;
                }
                d
            }
            None => (0..n)
                .filter(|i| derived_defs.iter().all(|d| d.gen != *i))
                .collect(),
        };

        Ok(GroupTable {
            pres,
            collector,
            order,
            n,
            place,
            distinguished,
            derived_defs,
            caps,
            tables: OnceLock::new(),
            conj_table: OnceLock::new(),
            sub: SubgroupCaches::default(),
            sigma_cache: Mutex::new(HashMap::new()),
            gen_pairs: OnceLock::new(),
        })
    }

    pub fn presentation(&self) -> &PcPresentation {
        &self.pres
    }

    pub fn prime(&self) -> u64 {
        self.pres.prime
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn n_gens(&self) -> usize {
        self.n
    }

    pub fn caps(&self) -> &GroupCaps {
        &self.caps
    }

    pub fn distinguished(&self) -> &[usize] {
        &self.distinguished
    }

    pub fn derived_defs(&self) -> &[DerivedDef] {
        &self.derived_defs
    }

    pub fn identity(&self) -> Element {
        Element(self.collector.identity())
    }

    pub fn generator(&self, i: usize) -> Element {
        assert!(i < self.n);
        Element(gen_vec(self.n, i))
    }

    /// Rank of a normal form: mixed-radix value, last generator fastest.
    pub fn rank(&self, u: &Element) -> u64 {
        debug_assert_eq!(u.0.len(), self.n);
        let mut r = 0u64;
        for i in 0..self.n {
            debug_assert!((u.0[i] as u64) < self.pres.rel_orders[i]);
            r += u.0[i] as u64 * self.place[i];
        }
        r
    }

    pub fn unrank(&self, r: u64) -> Element {
        debug_assert!(r < self.order);
        let e = (0..self.n)
            .map(|i| ((r / self.place[i]) % self.pres.rel_orders[i]) as u32)
            .collect();
        Element(e)
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Element {
        Element(self.collector.mul(&a.0, &b.0))
    }

    pub fn inverse(&self, a: &Element) -> Element {
        Element(self.collector.inv(&a.0))
    }

    pub fn power(&self, a: &Element, k: i64) -> Element {
        Element(self.collector.pow(&a.0, k))
    }

    /// `a^g = g⁻¹ a g`.
    pub fn conjugate(&self, a: &Element, g: &Element) -> Element {
        let gi = self.collector.inv(&g.0);
        Element(self.collector.mul(&self.collector.mul(&gi, &a.0), &g.0))
    }

    /// `[u, v] = u⁻¹ v⁻¹ u v`.
    pub fn commutator(&self, u: &Element, v: &Element) -> Element {
        let ui = self.collector.inv(&u.0);
        let vi = self.collector.inv(&v.0);
        Element(
            self.collector
                .mul(&self.collector.mul(&ui, &vi), &self.collector.mul(&u.0, &v.0)),
        )
    }

    /// Multiplicative order (always a power of the prime).
    pub fn order_of(&self, u: &Element) -> u64 {
        let p = self.prime();
        if let Ok(t) = self.tables() {
            let mut r = self.rank(u);
            let mut ord = 1u64;
            while r != 0 {
                r = t.pow(r, p);
                ord *= p;
            }
            ord
        } else {
            let mut v = u.0.clone();
            let mut ord = 1u64;
            while v.iter().any(|&e| e != 0) {
                v = self.collector.pow_u(&v, p);
                ord *= p;
            }
            ord
        }
    }

    pub fn element_from_word(&self, w: &Word) -> Element {
        Element(self.collector.eval_word(w))
    }

    /// Builds an element from signed generator powers, e.g.
    /// `[(0, 2), (1, -1)]` for `g₀² g₁⁻¹`.
    pub fn element_from_signed(&self, parts: &[(usize, i64)]) -> Element {
        let mut acc = self.collector.identity();
        for &(i, k) in parts {
            assert!(i < self.n);
            let g = self.collector.pow(&gen_vec(self.n, i), k);
            acc = self.collector.mul(&acc, &g);
        }
        Element(acc)
    }

    /// Parses a word in this group's generator names, e.g. `"x^2 y^-1"`.
    pub fn element_from_str(&self, s: &str) -> Result<Element> {
        let mut acc = self.collector.identity();
        for tok in s.split_whitespace() {
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let exp: i64 = e.parse().map_err(|_| {
                        Error::InvalidParams(format!("bad exponent in `{tok}`"))
                    })?;
                    (n, exp)
                }
                None => (tok, 1),
            };
            let i = self
                .pres
                .gen_index(name)
                .ok_or_else(|| Error::InvalidParams(format!("unknown generator `{name}`")))?;
            let g = self.collector.pow(&gen_vec(self.n, i), exp);
            acc = self.collector.mul(&acc, &g);
        }
        Ok(Element(acc))
    }

    /// Per-generator multiplication tables; errors above the table cap.
    pub(crate) fn tables(&self) -> Result<&MulTables> {
        if self.order > self.caps.table_cap {
            return Err(Error::TooLarge {
                what: "multiplication tables",
                needed: self.order,
                cap: self.caps.table_cap,
            });
        }
        Ok(self.tables.get_or_init(|| MulTables::build(self)))
    }

    /// Dense `x^g` table; errors above the conjugation-table cap.
    pub(crate) fn conjugation_table(&self) -> Result<&ConjTable> {
        if self.order > self.caps.conj_table_cap {
            return Err(Error::TooLarge {
                what: "conjugation table",
                needed: self.order,
                cap: self.caps.conj_table_cap,
            });
        }
        self.tables()?;
        Ok(self.conj_table.get_or_init(|| ConjTable::build(self)))
    }
}

pub(crate) fn gen_vec(n: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0u32; n];
    v[i] = 1;
    v
}

/// Collects every critical overlap of the rewrite rules both ways.  All
/// overlaps agreeing is equivalent to the presentation being consistent.
fn check_consistency(pres: &PcPresentation, c: &Collector) -> Result<()> {
    let n = pres.n_gens();
    let g = |i: usize| gen_vec(n, i);
    let fail = |what: String| Err(Error::InconsistentPresentation(what));
    // g_k (g_j g_i) vs (g_k g_j) g_i for k > j > i.
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let a = c.mul(&c.mul(&g(k), &g(j)), &g(i));
                let b = c.mul(&g(k), &c.mul(&g(j), &g(i)));
                if a != b {
                    return fail(format!(
                        "{} {} {} collects two ways",
                        pres.gens[k], pres.gens[j], pres.gens[i]
                    ));
                }
            }
        }
    }
    for i in 0..n {
        let ri = pres.rel_orders[i];
        for j in (i + 1)..n {
            let rj = pres.rel_orders[j];
            // g_j^{r_j} g_i vs g_j^{r_j - 1} (g_j g_i).
            let a = c.mul(&c.pow_u(&g(j), rj), &g(i));
            let b = c.mul(&c.pow_u(&g(j), rj - 1), &c.mul(&g(j), &g(i)));
            if a != b {
                return fail(format!(
                    "power relation of {} conflicts with conjugation by {}",
                    pres.gens[j], pres.gens[i]
                ));
            }
            // g_j g_i^{r_i} vs (g_j g_i) g_i^{r_i - 1}.
            let a = c.mul(&g(j), &c.pow_u(&g(i), ri));
            let b = c.mul(&c.mul(&g(j), &g(i)), &c.pow_u(&g(i), ri - 1));
            if a != b {
                return fail(format!(
                    "conjugation of {} conflicts with the power relation of {}",
                    pres.gens[j], pres.gens[i]
                ));
            }
        }
        // g_i g_i^{r_i} vs g_i^{r_i} g_i.
        let w = c.pow_u(&g(i), ri);
        if c.mul(&g(i), &w) != c.mul(&w, &g(i)) {
            return fail(format!(
                "power relation of {} does not commute with it",
                pres.gens[i]
            ));
        }
        // Square-and-multiply must reproduce the stored power value.
        if w != c.eval_word(&pres.power_rels[i]) {
            return fail(format!(
                "power of {} evaluates inconsistently",
                pres.gens[i]
            ));
        }
    }
    Ok(())
}

/// Per-generator permutation tables over ranks.
pub(crate) struct MulTables {
    n: usize,
    radices: Vec<u64>,
    place: Vec<u64>,
    gen_rank: Vec<u64>,
    /// `right_pow[i][b][r]` = rank of `r · g_i^(2^b)`; level 0 is `r · g_i`.
    right_pow: Vec<Vec<Vec<u64>>>,
    /// `left[i][r]` = rank of `g_i · r`.
    left: Vec<Vec<u64>>,
    inv: Vec<u64>,
    /// `conj_by_gen[i][r]` = rank of `g_i⁻¹ · r · g_i`.
    conj_by_gen: Vec<Vec<u64>>,
}

impl MulTables {
    fn build(g: &GroupTable) -> MulTables {
        let order = g.order as usize;
        let n = g.n;
        let radices = g.pres.rel_orders.clone();
        let place = g.place.clone();
        let gen_rank: Vec<u64> = (0..n).map(|i| g.place[i]).collect();

        let mut right_pow: Vec<Vec<Vec<u64>>> = Vec::with_capacity(n);
        for (i, &radix) in radices.iter().enumerate() {
            let base: Vec<u64> = (0..order as u64)
                .into_par_iter()
                .map(|r| g.rank(&Element(g.collector.mul_gen_pow(g.unrank(r).0, i, 1))))
                .collect();
            let mut levels = vec![base];
            let mut span = 2u64;
            while span < radix {
                let prev = levels.last().unwrap();
                let next: Vec<u64> = prev.par_iter().map(|&r| prev[r as usize]).collect();
                levels.push(next);
                span *= 2;
            }
            right_pow.push(levels);
        }

        let mut partial = MulTables {
            n,
            radices,
            place,
            gen_rank,
            right_pow,
            left: Vec::new(),
            inv: Vec::new(),
            conj_by_gen: Vec::new(),
        };

        let mut left = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = vec![0u64; order];
            partial.fill_row(partial.gen_rank[i], &mut row);
            left.push(row);
        }
        partial.left = left;

        partial.inv = (0..order as u64)
            .into_par_iter()
            .map(|r| g.rank(&Element(g.collector.inv(&g.unrank(r).0))))
            .collect();

        let mut conj = Vec::with_capacity(n);
        for i in 0..n {
            let mut linv = vec![0u64; order];
            for r in 0..order {
                linv[partial.left[i][r] as usize] = r as u64;
            }
            let row: Vec<u64> = (0..order)
                .into_par_iter()
                .map(|r| partial.right(i)[linv[r] as usize])
                .collect();
            conj.push(row);
        }
        partial.conj_by_gen = conj;
        partial
    }

    pub fn gen_rank(&self, i: usize) -> u64 {
        self.gen_rank[i]
    }

    fn right(&self, i: usize) -> &[u64] {
        &self.right_pow[i][0]
    }

    /// `a · b`, decomposing `b` into generator powers.
    pub fn mult(&self, a: u64, b: u64) -> u64 {
        let mut acc = a;
        for i in 0..self.n {
            let mut e = (b / self.place[i]) % self.radices[i];
            let mut bit = 0;
            while e != 0 {
                if e & 1 == 1 {
                    acc = self.right_pow[i][bit][acc as usize];
                }
                e >>= 1;
                bit += 1;
            }
        }
        acc
    }

    pub fn inv(&self, a: u64) -> u64 {
        self.inv[a as usize]
    }

    /// `a^g = g⁻¹ a g`.
    pub fn conj(&self, a: u64, g: u64) -> u64 {
        self.mult(self.mult(self.inv(g), a), g)
    }

    pub fn conj_by_gen(&self, i: usize, r: u64) -> u64 {
        self.conj_by_gen[i][r as usize]
    }

    pub fn pow(&self, a: u64, mut k: u64) -> u64 {
        let mut acc = 0u64;
        let mut base = a;
        while k != 0 {
            if k & 1 == 1 {
                acc = self.mult(acc, base);
            }
            k >>= 1;
            if k != 0 {
                base = self.mult(base, base);
            }
        }
        acc
    }

    /// Fills `out[y] = base · y` for every rank `y`, walking ranks as an
    /// exponent odometer so each step is a single table lookup.
    pub fn fill_row(&self, base: u64, out: &mut [u64]) {
        let n = self.n;
        out[0] = base;
        if out.len() == 1 {
            return;
        }
        let mut exps = vec![0u64; n];
        // prefix[k] = base · g_1^{e_1} ... g_k^{e_k}.
        let mut prefix = vec![base; n + 1];
        for y in out.iter_mut().skip(1) {
            let mut j = n - 1;
            loop {
                if exps[j] + 1 < self.radices[j] {
                    exps[j] += 1;
                    break;
                }
                exps[j] = 0;
                j -= 1;
            }
            prefix[j + 1] = self.right(j)[prefix[j + 1] as usize];
            for k in (j + 1)..n {
                prefix[k + 1] = prefix[k];
            }
            *y = prefix[n];
        }
    }
}

/// Dense conjugation table: `row(x)[g]` is the rank of `x^g`.
pub(crate) struct ConjTable {
    order: usize,
    data: Vec<u32>,
}

impl ConjTable {
    fn build(g: &GroupTable) -> ConjTable {
        let order = g.order as usize;
        let n = g.n;
        let t = g.tables().expect("tables gated before conjugation table");
        let mut data = vec![0u32; order * order];
        data.par_chunks_mut(order).enumerate().for_each(|(x, row)| {
            row[0] = x as u32;
            if order == 1 {
                return;
            }
            let mut exps = vec![0u64; n];
            // pc[k] = x conjugated by g_1^{e_1} ... g_k^{e_k}.
            let mut pc = vec![x as u64; n + 1];
            for slot in row.iter_mut().skip(1) {
                let mut j = n - 1;
                loop {
                    if exps[j] + 1 < t.radices[j] {
                        exps[j] += 1;
                        break;
                    }
                    exps[j] = 0;
                    j -= 1;
                }
                pc[j + 1] = t.conj_by_gen[j][pc[j + 1] as usize];
                for k in (j + 1)..n {
                    pc[k + 1] = pc[k];
                }
                *slot = pc[n] as u32;
            }
        });
        ConjTable { order, data }
    }

    pub fn row(&self, x: u64) -> &[u32] {
        let x = x as usize;
        &self.data[x * self.order..(x + 1) * self.order]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcgroup::parse;

    fn metacyclic_25_25() -> GroupTable {
        let pres = parse(
            "prime 5;\n gen b order 25;\n gen a order 25;\n conj a^b = a^6;\n",
        )
        .unwrap();
        GroupTable::build(pres).unwrap()
    }

    #[test]
    fn rank_unrank_roundtrip() {
        let g = metacyclic_25_25();
        assert_eq!(g.order(), 625);
        for r in 0..625 {
            assert_eq!(g.rank(&g.unrank(r)), r);
        }
        assert_eq!(g.rank(&g.identity()), 0);
    }

    #[test]
    fn tables_match_collector() {
        let g = metacyclic_25_25();
        let t = g.tables().unwrap();
        for a in (0..625).step_by(17) {
            for b in (0..625).step_by(13) {
                let via_tables = t.mult(a, b);
                let via_collector = g.rank(&g.multiply(&g.unrank(a), &g.unrank(b)));
                assert_eq!(via_tables, via_collector);
            }
            assert_eq!(t.mult(a, t.inv(a)), 0);
        }
    }

    #[test]
    fn conjugation_table_matches_elementwise() {
        let g = metacyclic_25_25();
        let ct = g.conjugation_table().unwrap();
        for x in (0..625).step_by(31) {
            let row = ct.row(x);
            for h in (0..625).step_by(23) {
                let want = g.rank(&g.conjugate(&g.unrank(x), &g.unrank(h)));
                assert_eq!(row[h as usize] as u64, want);
            }
        }
    }

    #[test]
    fn inconsistent_presentation_rejected() {
        // x ↦ x² has order 2, not 3, so conjugation by an order-3 generator
        // cannot act this way.
        let pres = parse(
            "prime 3;\n gen a order 3;\n gen b order 3;\n conj b^a = b^2;\n",
        )
        .unwrap();
        match GroupTable::build(pres) {
            Err(Error::InconsistentPresentation(_)) => {}
            other => panic!("expected inconsistency, got {:?}", other.map(|g| g.order())),
        }
    }

    #[test]
    fn order_of_and_powers() {
        let g = metacyclic_25_25();
        let a = g.element_from_str("a").unwrap();
        let b = g.element_from_str("b").unwrap();
        assert_eq!(g.order_of(&a), 25);
        assert_eq!(g.order_of(&b), 25);
        assert_eq!(g.order_of(&g.identity()), 1);
        let ab = g.multiply(&a, &b);
        assert_eq!(g.power(&ab, -1), g.inverse(&ab));
        // a^b = a^6.
        assert_eq!(g.conjugate(&a, &b), g.power(&a, 6));
        // [a, b] = a⁻¹ a^b = a^5.
        assert_eq!(g.commutator(&a, &b), g.power(&a, 5));
    }
}
