//! Characteristic subgroups and structural invariants, computed on demand.
//!
//! Everything here works on ranks and therefore requires the multiplication
//! tables; results are cached on the group.  Subgroups are returned as
//! [`ElementSet`] bitsets over ranks.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::element::Element;
use super::group::GroupTable;
use super::set::ElementSet;
use crate::error::{Error, Result};

#[derive(Default)]
pub(crate) struct SubgroupCaches {
    center: OnceLock<ElementSet>,
    derived: OnceLock<ElementSet>,
    frattini: OnceLock<ElementSet>,
    agemo: Mutex<HashMap<u32, Arc<ElementSet>>>,
    exponent: OnceLock<u64>,
    nilpotency: OnceLock<u32>,
    conj_classes: OnceLock<ConjClasses>,
    cyclic_ids: OnceLock<Vec<u64>>,
    frattini_q: OnceLock<FrattiniQuotient>,
}

/// Conjugacy classes over ranks.  `class_id[r]` indexes into `classes`;
/// class 0 is the identity's and each class lists its members ascending.
pub struct ConjClasses {
    pub class_id: Vec<u32>,
    pub classes: Vec<Vec<u64>>,
}

/// Outcome of the regularity test `(xy)^p ≡ x^p y^p mod ℧₁(⟨x,y⟩′)`.
/// When the group is too large for the exhaustive pair scan the test runs
/// on a deterministic sample and says so.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularityCheck {
    pub regular: bool,
    pub exhaustive: bool,
    pub pairs_checked: u64,
}

/// Coordinates of every element in the elementary-abelian quotient by the
/// Frattini subgroup, with respect to a fixed basis of coset
/// representatives.
pub struct FrattiniQuotient {
    pub dim: usize,
    pub p: u64,
    /// Ranks of the chosen coset representatives.
    pub basis: Vec<u64>,
    coords: Vec<u8>,
}

impl FrattiniQuotient {
    pub fn coords_of(&self, r: u64) -> &[u8] {
        let r = r as usize;
        &self.coords[r * self.dim..(r + 1) * self.dim]
    }
}

impl GroupTable {
    /// Subgroup generated by the given ranks.
    pub fn closure(&self, gens: &[u64]) -> Result<ElementSet> {
        let t = self.tables()?;
        let mut set = ElementSet::empty(self.order());
        set.insert(0);
        let mut queue = vec![0u64];
        while let Some(x) = queue.pop() {
            for &g in gens {
                let y = t.mult(x, g);
                if set.insert(y) {
                    queue.push(y);
                }
            }
        }
        Ok(set)
    }

    /// Smallest subgroup containing `seeds` that is closed under
    /// conjugation by the group's generators (hence normal).
    pub fn normal_closure(&self, seeds: &[u64]) -> Result<ElementSet> {
        let t = self.tables()?;
        let n = self.n_gens();
        let mut gens: Vec<u64> = seeds.iter().copied().filter(|&s| s != 0).collect();
        gens.sort_unstable();
        gens.dedup();
        let mut set = self.closure(&gens)?;
        loop {
            let mut new_gen = None;
            'scan: for x in set.iter() {
                for i in 0..n {
                    let c = t.conj_by_gen(i, x);
                    if !set.contains(c) {
                        new_gen = Some(c);
                        break 'scan;
                    }
                }
            }
            match new_gen {
                Some(c) => {
                    gens.push(c);
                    set = self.closure(&gens)?;
                }
                None => return Ok(set),
            }
        }
    }

    /// Elements commuting with everything.
    pub fn center(&self) -> Result<&ElementSet> {
        let t = self.tables()?;
        Ok(self.sub.center.get_or_init(|| {
            let n = self.n_gens();
            let mut set = ElementSet::empty(self.order());
            for r in 0..self.order() {
                if (0..n).all(|i| t.conj_by_gen(i, r) == r) {
                    set.insert(r);
                }
            }
            set
        }))
    }

    /// Elements commuting with `a`.
    pub fn centralizer(&self, a: &Element) -> Result<ElementSet> {
        let t = self.tables()?;
        let ar = self.rank(a);
        let mut set = ElementSet::empty(self.order());
        for g in 0..self.order() {
            if t.conj(ar, g) == ar {
                set.insert(g);
            }
        }
        Ok(set)
    }

    /// Derived subgroup: normal closure of the generator commutators.
    pub fn derived_subgroup(&self) -> Result<&ElementSet> {
        self.tables()?;
        if let Some(s) = self.sub.derived.get() {
            return Ok(s);
        }
        let t = self.tables()?;
        let n = self.n_gens();
        let mut seeds = Vec::new();
        for i in 0..n {
            let gi = t.gen_rank(i);
            for j in (i + 1)..n {
                let gj = t.gen_rank(j);
                let comm = t.mult(t.mult(t.inv(gi), t.inv(gj)), t.mult(gi, gj));
                seeds.push(comm);
            }
        }
        let set = self.normal_closure(&seeds)?;
        Ok(self.sub.derived.get_or_init(|| set))
    }

    /// Subgroup generated by all `p^k`-th powers.
    pub fn agemo(&self, k: u32) -> Result<Arc<ElementSet>> {
        let t = self.tables()?;
        if let Some(s) = self.sub.agemo.lock().unwrap().get(&k) {
            return Ok(Arc::clone(s));
        }
        let q = self.prime().pow(k);
        let mut powers: Vec<u64> = (0..self.order())
            .into_par_iter()
            .map(|r| t.pow(r, q))
            .collect();
        powers.sort_unstable();
        powers.dedup();
        let set = Arc::new(self.closure(&powers)?);
        self.sub
            .agemo
            .lock()
            .unwrap()
            .entry(k)
            .or_insert_with(|| Arc::clone(&set));
        Ok(set)
    }

    /// Frattini subgroup: for a p-group, the product of the derived
    /// subgroup and the subgroup of p-th powers.
    pub fn frattini(&self) -> Result<&ElementSet> {
        self.tables()?;
        if let Some(s) = self.sub.frattini.get() {
            return Ok(s);
        }
        let derived = self.derived_subgroup()?.clone();
        let pth = self.agemo(1)?;
        let mut gens: Vec<u64> = derived.iter().chain(pth.iter()).collect();
        gens.sort_unstable();
        gens.dedup();
        let set = self.closure(&gens)?;
        Ok(self.sub.frattini.get_or_init(|| set))
    }

    /// Largest element order.
    pub fn exponent(&self) -> Result<u64> {
        let t = self.tables()?;
        if let Some(&e) = self.sub.exponent.get() {
            return Ok(e);
        }
        let p = self.prime();
        let exp = (0..self.order())
            .into_par_iter()
            .map(|r| {
                let mut x = r;
                let mut ord = 1u64;
                while x != 0 {
                    x = t.pow(x, p);
                    ord *= p;
                }
                ord
            })
            .max()
            .unwrap_or(1);
        Ok(*self.sub.exponent.get_or_init(|| exp))
    }

    /// Length of the lower central series (0 for the trivial group,
    /// 1 for nontrivial abelian groups).
    pub fn nilpotency_class(&self) -> Result<u32> {
        let t = self.tables()?;
        if let Some(&c) = self.sub.nilpotency.get() {
            return Ok(c);
        }
        let n = self.n_gens();
        let mut class = 0u32;
        // γ₂ = derived subgroup; then γ_{k+1} = [γ_k, G].
        let mut gamma = if self.order() == 1 {
            ElementSet::empty(1)
        } else {
            class = 1;
            self.derived_subgroup()?.clone()
        };
        while gamma.len() > 1 {
            class += 1;
            let mut seeds = Vec::new();
            for x in gamma.iter() {
                for i in 0..n {
                    let g = t.gen_rank(i);
                    let comm = t.mult(t.mult(t.inv(x), t.inv(g)), t.mult(x, g));
                    seeds.push(comm);
                }
            }
            gamma = self.normal_closure(&seeds)?;
        }
        Ok(*self.sub.nilpotency.get_or_init(|| class))
    }

    /// Whether the derived subgroup lies in the p-th powers (4th powers for
    /// p = 2).
    pub fn is_powerful(&self) -> Result<bool> {
        let derived = self.derived_subgroup()?;
        let k = if self.prime() == 2 { 2 } else { 1 };
        let pows = self.agemo(k)?;
        Ok(derived.is_subset_of(&pows))
    }

    /// Tests `(xy)^p x^{-p} y^{-p} ∈ ℧₁(⟨x,y⟩′)` over element pairs —
    /// exhaustively up to `exhaustive_cap` elements, on a deterministic
    /// sample above it.
    pub fn is_regular(&self, exhaustive_cap: u64) -> Result<RegularityCheck> {
        use rand::{Rng, SeedableRng};
        let t = self.tables()?;
        let order = self.order();
        let p = self.prime();
        let check_pair = |x: u64, y: u64| -> Result<bool> {
            let lhs = t.mult(
                t.mult(t.pow(t.mult(x, y), p), t.inv(t.pow(x, p))),
                t.inv(t.pow(y, p)),
            );
            if lhs == 0 {
                return Ok(true);
            }
            // ⟨x,y⟩′ is the closure of [x,y] under conjugation by x and y.
            let comm = t.mult(t.mult(t.inv(x), t.inv(y)), t.mult(x, y));
            let mut gens = vec![comm];
            let mut sub = self.closure(&gens)?;
            loop {
                let mut fresh = None;
                'scan: for u in sub.iter() {
                    for &g in &[x, y] {
                        let c = t.conj(u, g);
                        if !sub.contains(c) {
                            fresh = Some(c);
                            break 'scan;
                        }
                    }
                }
                match fresh {
                    Some(c) => {
                        gens.push(c);
                        sub = self.closure(&gens)?;
                    }
                    None => break,
                }
            }
            let mut pth: Vec<u64> = sub.iter().map(|u| t.pow(u, p)).collect();
            pth.sort_unstable();
            pth.dedup();
            let target = self.closure(&pth)?;
            Ok(target.contains(lhs))
        };
        if order <= exhaustive_cap {
            let results: Vec<bool> = (0..order)
                .into_par_iter()
                .map(|x| (x..order).all(|y| check_pair(x, y).unwrap_or(false)))
                .collect();
            Ok(RegularityCheck {
                regular: results.iter().all(|&b| b),
                exhaustive: true,
                pairs_checked: order * (order + 1) / 2,
            })
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5e6a_11ab);
            let samples = 20_000u64;
            let mut ok = true;
            for _ in 0..samples {
                let x = rng.gen_range(0..order);
                let y = rng.gen_range(0..order);
                if !check_pair(x, y)? {
                    ok = false;
                    break;
                }
            }
            Ok(RegularityCheck {
                regular: ok,
                exhaustive: false,
                pairs_checked: samples,
            })
        }
    }

    /// Conjugacy classes, computed by orbit search under generator
    /// conjugation.
    pub fn conj_classes(&self) -> Result<&ConjClasses> {
        let t = self.tables()?;
        Ok(self.sub.conj_classes.get_or_init(|| {
            let order = self.order() as usize;
            let n = self.n_gens();
            let mut class_id = vec![u32::MAX; order];
            let mut classes: Vec<Vec<u64>> = Vec::new();
            for r in 0..order as u64 {
                if class_id[r as usize] != u32::MAX {
                    continue;
                }
                let id = classes.len() as u32;
                let mut members = vec![r];
                class_id[r as usize] = id;
                let mut queue = vec![r];
                while let Some(x) = queue.pop() {
                    for i in 0..n {
                        let y = t.conj_by_gen(i, x);
                        if class_id[y as usize] == u32::MAX {
                            class_id[y as usize] = id;
                            members.push(y);
                            queue.push(y);
                        }
                    }
                }
                members.sort_unstable();
                classes.push(members);
            }
            ConjClasses { class_id, classes }
        }))
    }

    /// Labels each rank with the smallest rank generating the same cyclic
    /// subgroup; two elements share a label iff they generate the same
    /// cyclic subgroup.
    pub fn cyclic_ids(&self) -> Result<&Vec<u64>> {
        let t = self.tables()?;
        Ok(self.sub.cyclic_ids.get_or_init(|| {
            let order = self.order() as usize;
            let p = self.prime();
            let mut ids = vec![u64::MAX; order];
            ids[0] = 0;
            for r in 1..order as u64 {
                if ids[r as usize] != u64::MAX {
                    continue;
                }
                // Walk ⟨r⟩; r^k generates it exactly when p ∤ k.
                let mut s = r;
                let mut k = 1u64;
                while s != 0 {
                    if !k.is_multiple_of(p) {
                        ids[s as usize] = r;
                    }
                    s = t.mult(s, r);
                    k += 1;
                }
            }
            ids
        }))
    }

    /// Coordinates in the quotient by the Frattini subgroup.
    pub fn frattini_quotient(&self) -> Result<&FrattiniQuotient> {
        let t = self.tables()?;
        if let Some(q) = self.sub.frattini_q.get() {
            return Ok(q);
        }
        let p = self.prime();
        if p > 255 {
            return Err(Error::InvalidParams(
                "Frattini-quotient coordinates need prime < 256".into(),
            ));
        }
        let phi = self.frattini()?;
        let order = self.order() as usize;

        let mut assigned = ElementSet::empty(self.order());
        let mut coords_flat: Vec<Vec<u8>> = vec![Vec::new(); order];
        for f in phi.iter() {
            assigned.insert(f);
        }
        let mut basis = Vec::new();
        loop {
            let mut next_rep = None;
            for r in 0..order as u64 {
                if !assigned.contains(r) {
                    next_rep = Some(r);
                    break;
                }
            }
            let b = match next_rep {
                Some(b) => b,
                None => break,
            };
            let k = basis.len();
            basis.push(b);
            let snapshot: Vec<u64> = assigned.iter().collect();
            for m in 1..p {
                let bm = t.pow(b, m);
                for &x in &snapshot {
                    let y = t.mult(x, bm);
                    debug_assert!(!assigned.contains(y));
                    assigned.insert(y);
                    let mut c = coords_flat[x as usize].clone();
                    c.resize(k, 0);
                    c.push(m as u8);
                    coords_flat[y as usize] = c;
                }
            }
        }
        let dim = basis.len();
        let mut coords = vec![0u8; order * dim];
        for r in 0..order {
            let c = &coords_flat[r];
            coords[r * dim..r * dim + c.len()].copy_from_slice(c);
        }
        let q = FrattiniQuotient {
            dim,
            p,
            basis,
            coords,
        };
        Ok(self.sub.frattini_q.get_or_init(|| q))
    }

    /// Whether the pair's images span the quotient by the Frattini
    /// subgroup — equivalent to the pair generating the group.
    pub fn is_generating_pair(&self, x: &Element, y: &Element) -> Result<bool> {
        let q = self.frattini_quotient()?;
        Ok(self.is_generating_pair_ranks(self.rank(x), self.rank(y), q))
    }

    pub(crate) fn is_generating_pair_ranks(
        &self,
        x: u64,
        y: u64,
        q: &FrattiniQuotient,
    ) -> bool {
        let cx = q.coords_of(x);
        let cy = q.coords_of(y);
        match q.dim {
            0 => true,
            1 => cx[0] != 0 || cy[0] != 0,
            2 => {
                let det = (cx[0] as i64 * cy[1] as i64 - cx[1] as i64 * cy[0] as i64)
                    .rem_euclid(q.p as i64);
                det != 0
            }
            _ => false,
        }
    }

    /// All unordered generating pairs `(a, b)` with `a < b` as ranks,
    /// ascending lexicographically.
    pub fn generating_pairs_unordered(&self) -> Result<Arc<Vec<(u64, u64)>>> {
        if let Some(pairs) = self.gen_pairs.get() {
            return Ok(Arc::clone(pairs));
        }
        let q = self.frattini_quotient()?;
        let order = self.order();
        let pairs: Vec<(u64, u64)> = (0..order)
            .into_par_iter()
            .flat_map_iter(|a| {
                ((a + 1)..order)
                    .filter(move |&b| self.is_generating_pair_ranks(a, b, q))
                    .map(move |b| (a, b))
            })
            .collect();
        let arc = Arc::new(pairs);
        Ok(Arc::clone(self.gen_pairs.get_or_init(|| arc)))
    }
}

#[cfg(test)]
mod tests {
    use crate::pcgroup::{parse, GroupTable};

    fn build(src: &str) -> GroupTable {
        GroupTable::build(parse(src).unwrap()).unwrap()
    }

    fn q8() -> GroupTable {
        build(
            "prime 2;\n gen x order 2;\n gen y order 2;\n gen z order 2;\n\
             pow x = z;\n pow y = z;\n conj y^x = y z;\n",
        )
    }

    #[test]
    fn q8_structure() {
        let g = q8();
        assert_eq!(g.order(), 8);
        let z = g.center().unwrap();
        assert_eq!(z.len(), 2);
        let d = g.derived_subgroup().unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(g.exponent().unwrap(), 4);
        assert_eq!(g.nilpotency_class().unwrap(), 2);
        let phi = g.frattini().unwrap();
        assert_eq!(phi.len(), 2);
        let q = g.frattini_quotient().unwrap();
        assert_eq!(q.dim, 2);
        // Exactly one involution in the quaternion group.
        let involutions = (0..8)
            .filter(|&r| g.order_of(&g.unrank(r)) == 2)
            .count();
        assert_eq!(involutions, 1);
    }

    #[test]
    fn elementary_abelian_25() {
        let g = build("prime 5;\n gen x order 5;\n gen y order 5;\n");
        assert_eq!(g.order(), 25);
        assert_eq!(g.center().unwrap().len(), 25);
        assert_eq!(g.derived_subgroup().unwrap().len(), 1);
        assert_eq!(g.frattini().unwrap().len(), 1);
        assert_eq!(g.nilpotency_class().unwrap(), 1);
        assert_eq!(g.exponent().unwrap(), 5);
        let q = g.frattini_quotient().unwrap();
        assert_eq!(q.dim, 2);
        // Generating pairs: pairs of independent vectors in F₅², unordered:
        // (25² − 25 − 24·5·... ) — count by brute double loop instead.
        let pairs = g.generating_pairs_unordered().unwrap();
        let mut brute = 0usize;
        for a in 0..25u64 {
            for b in (a + 1)..25 {
                let ca = q.coords_of(a);
                let cb = q.coords_of(b);
                if (ca[0] as i64 * cb[1] as i64 - ca[1] as i64 * cb[0] as i64) % 5 != 0 {
                    brute += 1;
                }
            }
        }
        assert_eq!(pairs.len(), brute);
        // Closure really generates the group for the first few pairs.
        for &(a, b) in pairs.iter().take(5) {
            assert_eq!(g.closure(&[a, b]).unwrap().len(), 25);
        }
    }

    #[test]
    fn metacyclic_subgroups() {
        let g = build("prime 5;\n gen b order 25;\n gen a order 25;\n conj a^b = a^6;\n");
        // G′ = ⟨a^5⟩ of order 5; Φ = ⟨a^5, b^5⟩-ish of index 25.
        assert_eq!(g.derived_subgroup().unwrap().len(), 5);
        assert_eq!(g.frattini().unwrap().len(), 25);
        assert_eq!(g.nilpotency_class().unwrap(), 2);
        assert!(g.is_powerful().unwrap());
        let reg = g.is_regular(1024).unwrap();
        assert!(reg.exhaustive);
        assert!(reg.regular);
        // Center: elements a^{5s} b^{5t}? — just check the size is 25.
        assert_eq!(g.center().unwrap().len(), 25);
    }

    #[test]
    fn cyclic_ids_partition() {
        let g = q8();
        let ids = g.cyclic_ids().unwrap();
        // Q8: ⟨1⟩, ⟨z⟩ and three cyclic subgroups of order 4.
        let mut distinct: Vec<u64> = ids.clone();
        distinct.sort_unstable();
        distinct.dedup();
        assert_eq!(distinct.len(), 5);
        // Every element's id generates the same subgroup.
        let t_ids = ids.clone();
        for r in 0..8u64 {
            let id = t_ids[r as usize];
            assert_eq!(g.order_of(&g.unrank(r)), g.order_of(&g.unrank(id)));
        }
    }

    #[test]
    fn conj_classes_of_q8() {
        let g = q8();
        let cc = g.conj_classes().unwrap();
        // Q8 has 5 conjugacy classes: 1, z, and three classes of size 2.
        assert_eq!(cc.classes.len(), 5);
        let mut sizes: Vec<usize> = cc.classes.iter().map(|c| c.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 2, 2, 2]);
    }
}
