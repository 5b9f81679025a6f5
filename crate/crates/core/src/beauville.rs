//! Generating pairs and mixed ramification structures.
//!
//! For a generating pair `(x, y)` write `Σ(x, y)` for the union of all
//! conjugates of the three cyclic subgroups `⟨x⟩`, `⟨y⟩` and `⟨xy⟩` — i.e.
//! the union of the conjugacy classes of all their members.  A *structure*
//! is an unordered pair of unordered generating pairs whose Σ-sets meet
//! only in the identity.
//!
//! Σ only depends on the triple of cyclic subgroups, and swapping `x` and
//! `y` replaces `⟨xy⟩` by the conjugate subgroup `⟨yx⟩`, so Σ-sets are
//! memoized per group keyed by the sorted cyclic-subgroup labels.  For
//! whole-group questions, [`StructurePrep`] groups the generating pairs by
//! their (deduplicated) Σ-set and answers existence and counting through a
//! small class-compatibility matrix instead of iterating pairs of pairs.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcgroup::{Element, ElementSet, GroupTable};

/// The union of all conjugates of `⟨x⟩ ∪ ⟨y⟩ ∪ ⟨xy⟩`.
pub fn sigma(g: &GroupTable, x: &Element, y: &Element) -> Result<Arc<ElementSet>> {
    sigma_by_ranks(g, g.rank(x), g.rank(y))
}

pub(crate) fn sigma_by_ranks(g: &GroupTable, a: u64, b: u64) -> Result<Arc<ElementSet>> {
    let t = g.tables()?;
    let ids = g.cyclic_ids()?;
    let xy = t.mult(a, b);
    let mut key = [
        ids[a as usize],
        ids[b as usize],
        ids[xy as usize],
    ];
    key.sort_unstable();
    sigma_by_key(g, key)
}

/// Σ from sorted cyclic-subgroup labels (each label is the smallest rank
/// generating the subgroup).
fn sigma_by_key(g: &GroupTable, key: [u64; 3]) -> Result<Arc<ElementSet>> {
    if let Some(s) = g.sigma_cache.lock().unwrap().get(&key) {
        return Ok(Arc::clone(s));
    }
    let t = g.tables()?;
    let cc = g.conj_classes()?;
    let mut set = ElementSet::empty(g.order());
    set.insert(0);
    for &gen in &key {
        let mut u = gen;
        while u != 0 {
            for &m in &cc.classes[cc.class_id[u as usize] as usize] {
                set.insert(m);
            }
            u = t.mult(u, gen);
        }
    }
    let arc = Arc::new(set);
    let mut cache = g.sigma_cache.lock().unwrap();
    let entry = cache.entry(key).or_insert_with(|| Arc::clone(&arc));
    Ok(Arc::clone(entry))
}

/// Two generating pairs forming a candidate structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeauvilleStructure {
    pub x1: Element,
    pub y1: Element,
    pub x2: Element,
    pub y2: Element,
}

/// Whether both pairs generate and their Σ-sets meet only in the identity.
pub fn is_beauville_structure(g: &GroupTable, s: &BeauvilleStructure) -> Result<bool> {
    if !g.is_generating_pair(&s.x1, &s.y1)? || !g.is_generating_pair(&s.x2, &s.y2)? {
        return Ok(false);
    }
    let s1 = sigma(g, &s.x1, &s.y1)?;
    let s2 = sigma(g, &s.x2, &s.y2)?;
    Ok(s1.intersection_is_identity_only(&s2))
}

/// Generating pairs grouped by Σ-set, with the pairwise compatibility
/// matrix of the distinct Σ-sets.
pub struct StructurePrep<'g> {
    g: &'g GroupTable,
    pairs: Arc<Vec<(u64, u64)>>,
    /// Index into `distinct` for each pair.
    class_of_pair: Vec<u32>,
    distinct: Vec<Arc<ElementSet>>,
    counts: Vec<u64>,
    /// `compat[q1][q2]` — the two Σ-sets intersect only in the identity.
    compat: Vec<Vec<bool>>,
}

impl<'g> StructurePrep<'g> {
    pub fn new(g: &'g GroupTable) -> Result<StructurePrep<'g>> {
        let t = g.tables()?;
        let ids = g.cyclic_ids()?;
        let pairs = g.generating_pairs_unordered()?;

        let keys: Vec<[u64; 3]> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let xy = t.mult(a, b);
                let mut k = [ids[a as usize], ids[b as usize], ids[xy as usize]];
                k.sort_unstable();
                k
            })
            .collect();
        let mut uniq = keys.clone();
        uniq.par_sort_unstable();
        uniq.dedup();
        let sets = uniq
            .par_iter()
            .map(|&k| sigma_by_key(g, k))
            .collect::<Result<Vec<_>>>()?;

        // Distinct Σ-sets by content, in first-occurrence order over the
        // sorted keys.
        let mut distinct: Vec<Arc<ElementSet>> = Vec::new();
        let mut content_index: std::collections::HashMap<&ElementSet, u32> =
            std::collections::HashMap::new();
        let mut class_of_key: Vec<u32> = Vec::with_capacity(sets.len());
        for s in &sets {
            let idx = match content_index.get(s.as_ref()) {
                Some(&i) => i,
                None => {
                    let i = distinct.len() as u32;
                    distinct.push(Arc::clone(s));
                    content_index.insert(s.as_ref(), i);
                    i
                }
            };
            class_of_key.push(idx);
        }
        drop(content_index);

        let key_index: std::collections::HashMap<[u64; 3], u32> = uniq
            .iter()
            .zip(&class_of_key)
            .map(|(&k, &c)| (k, c))
            .collect();
        let class_of_pair: Vec<u32> = keys.iter().map(|k| key_index[k]).collect();
        let mut counts = vec![0u64; distinct.len()];
        for &c in &class_of_pair {
            counts[c as usize] += 1;
        }

        let q = distinct.len();
        let compat: Vec<Vec<bool>> = (0..q)
            .into_par_iter()
            .map(|q1| {
                (0..q)
                    .map(|q2| {
                        q1 != q2 && distinct[q1].intersection_is_identity_only(&distinct[q2])
                    })
                    .collect()
            })
            .collect();

        Ok(StructurePrep {
            g,
            pairs,
            class_of_pair,
            distinct,
            counts,
            compat,
        })
    }

    pub fn group(&self) -> &'g GroupTable {
        self.g
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair_ranks(&self, idx: usize) -> (u64, u64) {
        self.pairs[idx]
    }

    pub fn pair_elements(&self, idx: usize) -> (Element, Element) {
        let (a, b) = self.pairs[idx];
        (self.g.unrank(a), self.g.unrank(b))
    }

    pub fn n_sigma_classes(&self) -> usize {
        self.distinct.len()
    }

    pub fn sigma_class_of_pair(&self, idx: usize) -> u32 {
        self.class_of_pair[idx]
    }

    pub fn sigma_set(&self, class: u32) -> &Arc<ElementSet> {
        &self.distinct[class as usize]
    }

    pub fn pairs_in_class(&self, class: u32) -> u64 {
        self.counts[class as usize]
    }

    /// Whether the pairs at the two indices form a structure.
    pub fn compatible(&self, i1: usize, i2: usize) -> bool {
        self.compat[self.class_of_pair[i1] as usize][self.class_of_pair[i2] as usize]
    }

    pub fn classes_compatible(&self, q1: u32, q2: u32) -> bool {
        self.compat[q1 as usize][q2 as usize]
    }

    /// Number of structures (unordered pairs of generating pairs whose
    /// Σ-sets meet only in the identity).
    pub fn count_structures(&self) -> u64 {
        let q = self.distinct.len();
        let mut total = 0u64;
        for q1 in 0..q {
            for q2 in (q1 + 1)..q {
                if self.compat[q1][q2] {
                    total += self.counts[q1] * self.counts[q2];
                }
            }
        }
        total
    }

    /// Index pairs `(i1, i2)` with `i1 < i2` of all structures, ascending.
    /// Beware: this can be astronomically long; prefer
    /// [`count_structures`](Self::count_structures) or sampling for large
    /// groups.
    pub fn structure_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.pairs.len();
        (0..n).flat_map(move |i1| {
            ((i1 + 1)..n)
                .filter(move |&i2| self.compatible(i1, i2))
                .map(move |i2| (i1, i2))
        })
    }

    /// First structure in index order, if any.
    pub fn any_structure(&self) -> Option<BeauvilleStructure> {
        // Existence only depends on Σ-classes, so scan one representative
        // pair per class against everything.
        let q = self.distinct.len();
        let mut rep: Vec<Option<usize>> = vec![None; q];
        for (i, &c) in self.class_of_pair.iter().enumerate() {
            if rep[c as usize].is_none() {
                rep[c as usize] = Some(i);
            }
        }
        let mut best: Option<(usize, usize)> = None;
        for q1 in 0..q {
            for q2 in (q1 + 1)..q {
                if !self.compat[q1][q2] {
                    continue;
                }
                let (a, b) = (rep[q1].unwrap(), rep[q2].unwrap());
                let cand = (a.min(b), a.max(b));
                if best.is_none_or(|cur| cand < cur) {
                    best = Some(cand);
                }
            }
        }
        best.map(|(i1, i2)| {
            let (x1, y1) = self.pair_elements(i1);
            let (x2, y2) = self.pair_elements(i2);
            BeauvilleStructure { x1, y1, x2, y2 }
        })
    }
}

/// Whether the group admits any structure — decided exhaustively through
/// the Σ-class compatibility matrix.
pub fn is_beauville_group(g: &GroupTable) -> Result<bool> {
    let prep = StructurePrep::new(g)?;
    let q = prep.n_sigma_classes();
    for q1 in 0..q {
        for q2 in (q1 + 1)..q {
            if prep.compat[q1][q2] {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// How [`find_beauville_structure`] should look.
#[derive(Debug, Clone, Copy)]
pub enum FindStrategy {
    /// Prefer the distinguished generating pair, then scan pair indices in
    /// order; complete (reports nonexistence reliably).
    DeterministicScan,
    /// Try `budget` random candidate pairs of pairs; inconclusive on
    /// exhaustion.
    SeededRandom { seed: u64, budget: u64 },
}

/// Outcome of a structure search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SearchOutcome {
    Found(BeauvilleStructure),
    NoneExists,
    Unknown { tried: u64 },
}

pub fn find_beauville_structure(g: &GroupTable, strategy: FindStrategy) -> Result<SearchOutcome> {
    match strategy {
        FindStrategy::DeterministicScan => {
            let prep = StructurePrep::new(g)?;
            // Try to anchor on the distinguished generating pair.
            let d = g.distinguished();
            if d.len() == 2 {
                let t = g.tables()?;
                let (a, b) = (t.gen_rank(d[0]), t.gen_rank(d[1]));
                let anchor = (a.min(b), a.max(b));
                if let Ok(i1) = prep.pairs.binary_search(&anchor) {
                    for i2 in 0..prep.pairs.len() {
                        if i2 != i1 && prep.compatible(i1, i2) {
                            let (x2, y2) = prep.pair_elements(i2);
                            return Ok(SearchOutcome::Found(BeauvilleStructure {
                                x1: g.unrank(a),
                                y1: g.unrank(b),
                                x2,
                                y2,
                            }));
                        }
                    }
                }
            }
            match prep.any_structure() {
                Some(s) => Ok(SearchOutcome::Found(s)),
                None => Ok(SearchOutcome::NoneExists),
            }
        }
        FindStrategy::SeededRandom { seed, budget } => {
            let order = g.order();
            let q = g.frattini_quotient()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for tried in 0..budget {
                let x1 = rng.gen_range(0..order);
                let y1 = rng.gen_range(0..order);
                let x2 = rng.gen_range(0..order);
                let y2 = rng.gen_range(0..order);
                if !g.is_generating_pair_ranks(x1, y1, q)
                    || !g.is_generating_pair_ranks(x2, y2, q)
                {
                    continue;
                }
                let s1 = sigma_by_ranks(g, x1, y1)?;
                let s2 = sigma_by_ranks(g, x2, y2)?;
                if s1.intersection_is_identity_only(&s2) {
                    let _ = tried;
                    return Ok(SearchOutcome::Found(BeauvilleStructure {
                        x1: g.unrank(x1),
                        y1: g.unrank(y1),
                        x2: g.unrank(x2),
                        y2: g.unrank(y2),
                    }));
                }
            }
            Ok(SearchOutcome::Unknown { tried: budget })
        }
    }
}

/// For a two-generator group of nilpotency class 2 and odd order, decides
/// structure existence from the subgroup of `p^{e−1}`-th powers, where
/// `p^e` is the exponent: structures exist iff `p ≥ 5` and that subgroup
/// has order at least `p²`.
pub fn class2_structure_criterion(g: &GroupTable) -> Result<bool> {
    if g.nilpotency_class()? != 2 {
        return Err(Error::NotClass2);
    }
    let p = g.prime();
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    let exp = g.exponent()?;
    let e = exp.ilog(p);
    let powers = g.agemo(e - 1)?;
    Ok(p >= 5 && powers.len() >= p * p)
}

/// Searches for an element `a` outside the Frattini subgroup, of maximal
/// order, whose `p^{e−1}`-th power lies in *every* generating pair's Σ-set
/// (`p^e` the exponent).  Such an element forces every two Σ-sets to share
/// a nontrivial member, so no structure can exist.
pub fn blocking_power_element(g: &GroupTable) -> Result<Option<(Element, Element)>> {
    let prep = StructurePrep::new(g)?;
    let t = g.tables()?;
    let phi = g.frattini()?;
    let exp = g.exponent()?;
    let p = g.prime();
    if exp == 1 {
        return Ok(None);
    }
    for a in 0..g.order() {
        if phi.contains(a) || {
            let mut x = a;
            let mut ord = 1u64;
            while x != 0 {
                x = t.pow(x, p);
                ord *= p;
            }
            ord != exp
        } {
            continue;
        }
        let blocker = t.pow(a, exp / p);
        if blocker != 0 && prep.distinct.iter().all(|s| s.contains(blocker)) {
            return Ok(Some((g.unrank(a), g.unrank(blocker))));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{construct, FamilyParams};

    fn c5x5() -> Arc<GroupTable> {
        use crate::pcgroup::parse;
        use std::sync::OnceLock;
        static G: OnceLock<Arc<GroupTable>> = OnceLock::new();
        Arc::clone(G.get_or_init(|| {
            Arc::new(
                GroupTable::build(parse("prime 5;\n gen x order 5;\n gen y order 5;\n").unwrap())
                    .unwrap(),
            )
        }))
    }

    #[test]
    fn sigma_is_symmetric_and_conjugation_invariant() {
        let g = construct(&FamilyParams::TriangleQuotient { e: 2 }).unwrap();
        let x = g.element_from_str("x").unwrap();
        let y = g.element_from_str("y").unwrap();
        let s_xy = sigma(&g, &x, &y).unwrap();
        let s_yx = sigma(&g, &y, &x).unwrap();
        assert_eq!(*s_xy, *s_yx);
        // Conjugating both pair members leaves Σ unchanged.
        let h = g.element_from_str("x y").unwrap();
        let s_conj = sigma(&g, &g.conjugate(&x, &h), &g.conjugate(&y, &h)).unwrap();
        assert_eq!(*s_xy, *s_conj);
        // Σ contains the pair, their product, and the identity.
        assert!(s_xy.contains(0));
        assert!(s_xy.contains(g.rank(&x)));
        assert!(s_xy.contains(g.rank(&y)));
        assert!(s_xy.contains(g.rank(&g.multiply(&x, &y))));
    }

    #[test]
    fn sigma_matches_naive_double_loop() {
        let g = c5x5();
        let x = g.element_from_str("x").unwrap();
        let y = g.element_from_str("y").unwrap();
        let fast = sigma(&g, &x, &y).unwrap();
        // Naive: iterate all conjugators and all powers directly.
        let t = g.tables().unwrap();
        let mut slow = ElementSet::empty(25);
        let (xr, yr) = (g.rank(&x), g.rank(&y));
        let xyr = t.mult(xr, yr);
        for h in 0..25 {
            for &base in &[xr, yr, xyr] {
                let mut u = 0u64;
                loop {
                    slow.insert(t.conj(u, h));
                    u = t.mult(u, base);
                    if u == 0 {
                        break;
                    }
                }
            }
        }
        assert_eq!(*fast, slow);
    }

    #[test]
    fn elementary_abelian_25_structure_count_matches_quadruple_loop() {
        let g = c5x5();
        let prep = StructurePrep::new(&g).unwrap();
        let fast = prep.count_structures();
        // Brute force over pairs of generating pairs.
        let t = g.tables().unwrap();
        let q = g.frattini_quotient().unwrap();
        let mut pairs = Vec::new();
        for a in 0..25u64 {
            for b in (a + 1)..25 {
                if g.is_generating_pair_ranks(a, b, q) {
                    pairs.push((a, b));
                }
            }
        }
        let sig = |a: u64, b: u64| {
            let mut s = ElementSet::empty(25);
            let ab = t.mult(a, b);
            for &base in &[a, b, ab] {
                let mut u = 0u64;
                loop {
                    s.insert(u); // abelian: conjugation is trivial
                    u = t.mult(u, base);
                    if u == 0 {
                        break;
                    }
                }
            }
            s
        };
        let sigmas: Vec<ElementSet> = pairs.iter().map(|&(a, b)| sig(a, b)).collect();
        let mut slow = 0u64;
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                if sigmas[i].intersection_is_identity_only(&sigmas[j]) {
                    slow += 1;
                }
            }
        }
        assert_eq!(fast, slow);
        assert!(fast > 0, "the rank-2 elementary abelian group for p = 5 admits structures");
        assert!(is_beauville_group(&g).unwrap());
    }

    #[test]
    fn quaternion_group_admits_no_structure() {
        let q8 = construct(&FamilyParams::Class2FiveTuple {
            p: 2,
            alpha: 1,
            beta: 1,
            gamma: 1,
            rho: 0,
            sigma: 0,
        })
        .unwrap();
        assert!(!is_beauville_group(&q8).unwrap());
        assert_eq!(
            find_beauville_structure(&q8, FindStrategy::DeterministicScan).unwrap(),
            SearchOutcome::NoneExists
        );
        // The obstruction: some maximal-order element's square lies in
        // every Σ-set (in fact z, the unique involution).
        let (_, blocker) = blocking_power_element(&q8).unwrap().unwrap();
        assert_eq!(q8.order_of(&blocker), 2);
    }

    #[test]
    fn metacyclic_structure_search_finds_one() {
        let g = construct(&FamilyParams::Metacyclic { p: 5, e: 2, i: 1 }).unwrap();
        match find_beauville_structure(&g, FindStrategy::DeterministicScan).unwrap() {
            SearchOutcome::Found(s) => {
                assert!(is_beauville_structure(&g, &s).unwrap());
                // The anchor is the distinguished pair (a, b).
                assert_eq!(s.x1, g.element_from_str("a").unwrap());
                assert_eq!(s.y1, g.element_from_str("b").unwrap());
            }
            other => panic!("expected a structure, got {other:?}"),
        }
        assert!(is_beauville_group(&g).unwrap());
        let random = find_beauville_structure(
            &g,
            FindStrategy::SeededRandom {
                seed: 7,
                budget: 100_000,
            },
        )
        .unwrap();
        match random {
            SearchOutcome::Found(s) => assert!(is_beauville_structure(&g, &s).unwrap()),
            other => panic!("random search should succeed here, got {other:?}"),
        }
    }

    #[test]
    fn criterion_matches_exhaustive_on_selected_groups()  {
        // Metacyclic p = 5: class 2, criterion says yes.
        let g = construct(&FamilyParams::Metacyclic { p: 5, e: 2, i: 1 }).unwrap();
        assert!(class2_structure_criterion(&g).unwrap());
        // p = 3 metacyclic: class 2, criterion says no.
        let g3 = construct(&FamilyParams::Metacyclic { p: 3, e: 2, i: 1 }).unwrap();
        assert!(!class2_structure_criterion(&g3).unwrap());
        assert!(!is_beauville_group(&g3).unwrap());
        // Q8 is class 2 but even: explicit error.
        let q8 = construct(&FamilyParams::Class2FiveTuple {
            p: 2,
            alpha: 1,
            beta: 1,
            gamma: 1,
            rho: 0,
            sigma: 0,
        })
        .unwrap();
        assert!(matches!(
            class2_structure_criterion(&q8),
            Err(Error::EvenPrime)
        ));
        // A class-3 group: explicit error.
        let tq = construct(&FamilyParams::TriangleQuotient { e: 2 }).unwrap();
        assert!(matches!(class2_structure_criterion(&tq), Err(Error::NotClass2)));
    }
}
