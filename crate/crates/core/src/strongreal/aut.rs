//! Automorphisms of two-generator finite p-groups.
//!
//! An automorphism is stored by its images of the pc generators.  Because
//! every group here is built from a consistent pc presentation, a tuple of
//! images defines an endomorphism iff it satisfies the defining relations,
//! and an endomorphism of a finite group is an automorphism iff the images
//! generate.  Both conditions are checked by [`Automorphism::new`]; for
//! p-groups generation is tested on the Frattini quotient.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{detect_class2_beauville, detect_metacyclic, FamilyParams};
use crate::pcgroup::{Element, GroupTable, Word};

/// Automorphism of a [`GroupTable`], stored as the images of the pc
/// generators in presentation order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Automorphism {
    images: Vec<Element>,
}

impl Automorphism {
    /// Builds an automorphism from generator images, verifying that the
    /// images satisfy the defining relations and generate the group.
    pub fn new(g: &GroupTable, images: Vec<Element>) -> Result<Automorphism> {
        if !images_form_automorphism(g, &images)? {
            return Err(Error::InvalidParams(
                "images do not define an automorphism".into(),
            ));
        }
        Ok(Automorphism { images })
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &Element {
        &self.images[i]
    }

    /// Applies the automorphism to an element via its normal form
    /// `u = g_1^{e_1} ... g_n^{e_n}`.
    pub fn apply(&self, g: &GroupTable, u: &Element) -> Element {
        let mut acc = g.identity();
        for (i, &e) in u.exps().iter().enumerate() {
            if e != 0 {
                acc = g.multiply(&acc, &g.power(&self.images[i], e as i64));
            }
        }
        acc
    }

    pub fn is_identity(&self, g: &GroupTable) -> bool {
        (0..g.n_gens()).all(|i| self.images[i] == g.generator(i))
    }

    /// The permutation of element ranks induced by the automorphism.
    ///
    /// With multiplication tables available, ranks are walked in odometer
    /// order maintaining prefix products of image powers, so the whole
    /// permutation costs about one table lookup per element.
    pub fn permutation(&self, g: &GroupTable) -> Vec<u32> {
        if let Ok(t) = g.tables() {
            let n = g.n_gens();
            let orders = &g.presentation().rel_orders;
            // pw[i][e] = rank of images[i]^e.
            let pw: Vec<Vec<u64>> = (0..n)
                .map(|i| {
                    let ir = g.rank(&self.images[i]);
                    let mut v = Vec::with_capacity(orders[i] as usize);
                    let mut acc = 0u64;
                    for _ in 0..orders[i] {
                        v.push(acc);
                        acc = t.mult(acc, ir);
                    }
                    v
                })
                .collect();
            let order = g.order() as usize;
            let mut out = vec![0u32; order];
            let mut digits = vec![0u64; n];
            // prefix[i+1] = θ(g_1)^{d_1} ... θ(g_i)^{d_i} as a rank.
            let mut prefix = vec![0u64; n + 1];
            for slot in out.iter_mut() {
                *slot = prefix[n] as u32;
                for i in (0..n).rev() {
                    digits[i] += 1;
                    if digits[i] < orders[i] {
                        // Lower digits just reset to zero, whose image
                        // powers are the identity, so every later prefix
                        // equals this one.
                        let v = t.mult(prefix[i], pw[i][digits[i] as usize]);
                        for entry in prefix.iter_mut().skip(i + 1) {
                            *entry = v;
                        }
                        break;
                    }
                    digits[i] = 0;
                }
            }
            return out;
        }
        (0..g.order())
            .into_par_iter()
            .map(|r| g.rank(&self.apply(g, &g.unrank(r))) as u32)
            .collect()
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, g: &GroupTable, other: &Automorphism) -> Automorphism {
        let images = other
            .images
            .iter()
            .map(|im| self.apply(g, im))
            .collect();
        Automorphism { images }
    }

    /// The inverse automorphism.
    pub fn inverse_aut(&self, g: &GroupTable) -> Automorphism {
        let perm = self.permutation(g);
        let mut inv = vec![0u32; perm.len()];
        for (r, &pr) in perm.iter().enumerate() {
            inv[pr as usize] = r as u32;
        }
        let images = (0..g.n_gens())
            .map(|i| g.unrank(inv[g.rank(&g.generator(i)) as usize] as u64))
            .collect();
        Automorphism { images }
    }
}

fn eval_images(g: &GroupTable, images: &[Element], w: &Word) -> Element {
    let mut acc = g.identity();
    for &(gi, e) in w {
        acc = g.multiply(&acc, &g.power(&images[gi], e as i64));
    }
    acc
}

/// Do the images span the Frattini quotient?  (For a p-group this is
/// exactly the condition that they generate.)
fn images_generate(g: &GroupTable, images: &[Element]) -> Result<bool> {
    let fq = g.frattini_quotient()?;
    let p = fq.p;
    let dim = fq.dim;
    let mut rows: Vec<Vec<u64>> = images
        .iter()
        .map(|im| {
            fq.coords_of(g.rank(im))
                .iter()
                .map(|&c| c as u64)
                .collect()
        })
        .collect();
    let mut rank = 0usize;
    for col in 0..dim {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_multiple_of(p)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = modinv_prime(rows[rank][col] % p, p);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] % p != 0 {
                let f = row[col] % p * inv % p;
                for c in col..dim {
                    row[c] = (row[c] + (p - f) * pivot_row[c]) % p;
                }
            }
        }
        rank += 1;
    }
    Ok(rank == dim)
}

fn images_form_automorphism(g: &GroupTable, images: &[Element]) -> Result<bool> {
    if images.len() != g.n_gens() {
        return Err(Error::InvalidParams(format!(
            "expected {} generator images, got {}",
            g.n_gens(),
            images.len()
        )));
    }
    if !images_generate(g, images)? {
        return Ok(false);
    }
    let pres = g.presentation();
    // Relation checks run on ranks when tables exist; collector words
    // otherwise.
    if let Ok(t) = g.tables() {
        let ranks: Vec<u64> = images.iter().map(|im| g.rank(im)).collect();
        let eval = |w: &Word| {
            w.iter()
                .fold(0u64, |acc, &(gi, e)| t.mult(acc, t.pow(ranks[gi], e)))
        };
        for (i, &rk) in ranks.iter().enumerate() {
            if t.pow(rk, pres.rel_orders[i]) != eval(&pres.power_rels[i]) {
                return Ok(false);
            }
        }
        for (&(i, j), w) in &pres.conj_rels {
            if t.conj(ranks[j], ranks[i]) != eval(w) {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    for i in 0..g.n_gens() {
        let lhs = g.power(&images[i], pres.rel_orders[i] as i64);
        if lhs != eval_images(g, images, &pres.power_rels[i]) {
            return Ok(false);
        }
    }
    for (&(i, j), w) in &pres.conj_rels {
        let lhs = g.conjugate(&images[j], &images[i]);
        if lhs != eval_images(g, images, w) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Extends a pair of images of the two distinguished generators to an
/// automorphism, or returns `None` if no extension exists.
///
/// Every pc generator must be either distinguished or defined as an
/// iterated commutator of earlier generators, so that the two images
/// determine all generator images.
pub fn extend_to_automorphism(
    g: &GroupTable,
    image_x: &Element,
    image_y: &Element,
) -> Result<Option<Automorphism>> {
    let dist = g.distinguished();
    if dist.len() != 2 {
        return Err(Error::InvalidParams(
            "extension requires exactly two distinguished generators".into(),
        ));
    }
    let n = g.n_gens();
    let mut covered = vec![false; n];
    covered[dist[0]] = true;
    covered[dist[1]] = true;
    let mut defs = g.derived_defs().to_vec();
    defs.sort_by_key(|d| d.gen);
    for d in &defs {
        covered[d.gen] = true;
    }
    if covered.iter().any(|c| !c) {
        return Err(Error::InvalidParams(
            "every generator must be distinguished or a derived commutator".into(),
        ));
    }
    if !g.is_generating_pair(image_x, image_y)? {
        return Ok(None);
    }
    let mut images = vec![g.identity(); n];
    images[dist[0]] = image_x.clone();
    images[dist[1]] = image_y.clone();
    for d in &defs {
        images[d.gen] = g.commutator(&images[d.left], &images[d.right]);
    }
    if images_form_automorphism(g, &images)? {
        Ok(Some(Automorphism { images }))
    } else {
        Ok(None)
    }
}

/// Enumerates the full automorphism group by scanning all pairs of images
/// of the distinguished generators, in ascending rank order.
pub fn brute_force_automorphisms(g: &GroupTable) -> Result<Vec<Automorphism>> {
    const CAP: u64 = 1 << 10;
    if g.order() > CAP {
        return Err(Error::TooLarge {
            what: "brute-force automorphism scan",
            needed: g.order(),
            cap: CAP,
        });
    }
    // Surface shape errors (wrong number of distinguished generators, ...)
    // once, before the scan silently drops them.
    let dist = g.distinguished().to_vec();
    extend_to_automorphism(g, &g.generator(dist[0]), &g.generator(dist[1]))?;
    let order = g.order();
    let auts: Vec<Automorphism> = (0..order)
        .into_par_iter()
        .flat_map_iter(|ia| {
            let gx = g.unrank(ia);
            (0..order)
                .filter_map(|ib| {
                    extend_to_automorphism(g, &gx, &g.unrank(ib))
                        .ok()
                        .flatten()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(auts)
}

/// Member of the parametrized automorphism family of the split metacyclic
/// group `⟨b, a | a^{p^e} = b^{p^e} = 1, a^b = a^{1+p^i}⟩`:
///
/// ```text
/// θ(a) = b^{m p^{e−i}} a^n      θ(b) = b^{1 + r p^{e−i}} a^s
/// ```
///
/// with `m, r` taken mod `p^i`, `n, s` mod `p^e`, and `p ∤ n`.
pub fn metacyclic_aut(g: &GroupTable, m: u64, n: u64, r: u64, s: u64) -> Result<Automorphism> {
    let Some(FamilyParams::Metacyclic { p, e, i }) = detect_metacyclic(g) else {
        return Err(Error::NotInFamily(
            "split metacyclic with a^b = a^{1+p^i}".into(),
        ));
    };
    if n.is_multiple_of(p) {
        return Err(Error::InvalidParams(format!(
            "exponent n = {n} must be coprime to p = {p}"
        )));
    }
    let pe = p.pow(e);
    let pei = p.pow(e - i);
    let m = m % p.pow(i);
    let r = r % p.pow(i);
    // Generators are (b, a) = indices (0, 1).
    let tb = g.element_from_signed(&[(0, ((1 + r * pei) % pe) as i64), (1, (s % pe) as i64)]);
    let ta = g.element_from_signed(&[(0, ((m * pei) % pe) as i64), (1, (n % pe) as i64)]);
    Automorphism::new(g, vec![tb, ta])
}

fn class2_family_group(g: &GroupTable) -> Result<(u64, u32, u32, u32, u32)> {
    let Some(FamilyParams::Class2Beauville { p, e, i, j, k }) = detect_class2_beauville(g) else {
        return Err(Error::NotInFamily(
            "two-generator class-2 group with a^{p^e}, b^{p^i}, c = [b,a]".into(),
        ));
    };
    if k == 0 || k >= j {
        return Err(Error::NotInFamily(
            "class-2 parametrized family requires 0 < k < j".into(),
        ));
    }
    Ok((p, e, i, j, k))
}

/// Member of the parametrized automorphism family of the class-2 group
/// `⟨a, b⟩` with `a^{p^e}`, `b` of order `p^i`, `c = [b, a]` of order
/// `p^j`, `b^{p^i} = c^{p^k}`, `0 < k < j ≤ i ≤ e`:
///
/// ```text
/// θ(a) = a^{1 + m p^{e−i}} b^n c_a      θ(b) = a^{r p^{e−i}} b^s c_b
/// ```
///
/// with `m, r` taken mod `p^i`, `n, s` mod `p^e` (the element order of
/// `b`, since `b^{p^i} = c^{p^k}` keeps powers of `b` alive up to
/// `p^{i+j−k} = p^e`), `p ∤ s`, and `c_a, c_b` in the derived subgroup.
pub fn class2_aut(
    g: &GroupTable,
    m: u64,
    n: u64,
    r: u64,
    s: u64,
    c_a: &Element,
    c_b: &Element,
) -> Result<Automorphism> {
    let (p, e, i, _j, _k) = class2_family_group(g)?;
    if s.is_multiple_of(p) {
        return Err(Error::InvalidParams(format!(
            "exponent s = {s} must be coprime to p = {p}"
        )));
    }
    let derived = g.derived_subgroup()?;
    if !derived.contains(g.rank(c_a)) || !derived.contains(g.rank(c_b)) {
        return Err(Error::InvalidParams(
            "central corrections must lie in the derived subgroup".into(),
        ));
    }
    let pi = p.pow(i);
    let pe = p.pow(e);
    let pei = p.pow(e - i);
    // m, r only matter mod p^i (they multiply p^{e−i} inside an order-p^e
    // power); n, s matter mod the element order of b, which is p^e.
    let (m, n, r, s) = (m % pi, n % pe, r % pi, s % pe);
    let a = g.generator(0);
    let b = g.generator(1);
    let ta = g.multiply(
        &g.multiply(
            &g.power(&a, (1 + m * pei) as i64),
            &g.power(&b, n as i64),
        ),
        c_a,
    );
    let tb = g.multiply(
        &g.multiply(&g.power(&a, (r * pei) as i64), &g.power(&b, s as i64)),
        c_b,
    );
    // c = [b, a] per the family's derived-generator definition.
    let tc = g.commutator(&tb, &ta);
    Automorphism::new(g, vec![ta, tb, tc])
}

/// Does the automorphism lie in the parametrized class-2 family?  The
/// family is exactly cut out by congruences on the normal-form exponents
/// of the generator images: `a`-exponent of `θ(a)` ≡ 1 and of `θ(b)` ≡ 0
/// mod `p^{e−i}`, and `b`-exponent of `θ(b)` coprime to `p`.
pub fn in_class2_family(g: &GroupTable, theta: &Automorphism) -> Result<bool> {
    let (p, e, i, _j, _k) = class2_family_group(g)?;
    let pe = p.pow(e);
    let pei = p.pow(e - i);
    let a_of_ta = theta.image(0).exps()[0] as u64;
    let a_of_tb = theta.image(1).exps()[0] as u64;
    let b_of_tb = theta.image(1).exps()[1] as u64;
    Ok(((a_of_ta + pe - 1) % pe).is_multiple_of(pei)
        && a_of_tb.is_multiple_of(pei)
        && !b_of_tb.is_multiple_of(p))
}

pub(crate) fn modinv_prime(a: u64, p: u64) -> u64 {
    // Fermat: a^{p−2} mod p.
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// The 2×2 matrix of the automorphism's action on `G/Φ(G)` in the basis
/// given by the two distinguished generators; entries mod `p`, column `k`
/// holding the coordinates of the image of the `k`-th distinguished
/// generator.
pub fn induced_matrix_mod_frattini(g: &GroupTable, theta: &Automorphism) -> Result<[[u64; 2]; 2]> {
    let fq = g.frattini_quotient()?;
    if fq.dim != 2 {
        return Err(Error::InvalidParams(format!(
            "Frattini quotient has dimension {}, need 2",
            fq.dim
        )));
    }
    let dist = g.distinguished();
    if dist.len() != 2 {
        return Err(Error::InvalidParams(
            "need exactly two distinguished generators".into(),
        ));
    }
    let p = fq.p;
    let x = g.generator(dist[0]);
    let y = g.generator(dist[1]);
    let cx = fq.coords_of(g.rank(&x));
    let cy = fq.coords_of(g.rank(&y));
    // Change of basis from the quotient's internal basis to (x̄, ȳ).
    let (b00, b01, b10, b11) = (cx[0] as u64, cy[0] as u64, cx[1] as u64, cy[1] as u64);
    let det = (b00 * b11 % p + p - b01 * b10 % p) % p;
    if det == 0 {
        return Err(Error::InvalidParams(
            "distinguished generators do not span the Frattini quotient".into(),
        ));
    }
    let dinv = modinv_prime(det, p);
    let binv = [
        [b11 * dinv % p, (p - b01 % p) % p * dinv % p],
        [(p - b10 % p) % p * dinv % p, b00 * dinv % p],
    ];
    let mut mat = [[0u64; 2]; 2];
    for (col, gen) in [&x, &y].into_iter().enumerate() {
        let im = theta.apply(g, gen);
        let c = fq.coords_of(g.rank(&im));
        mat[0][col] = (binv[0][0] * c[0] as u64 + binv[0][1] * c[1] as u64) % p;
        mat[1][col] = (binv[1][0] * c[0] as u64 + binv[1][1] * c[1] as u64) % p;
    }
    Ok(mat)
}

/// Is the matrix `−identity` mod `p`?  (For `p = 2` this coincides with the
/// identity.)
pub fn is_minus_identity(mat: &[[u64; 2]; 2], p: u64) -> bool {
    *mat == [[p - 1, 0], [0, p - 1]]
}

/// Least-rank element `g` with `θ(x) = (x⁻¹)^g` and `θ(y) = (y⁻¹)^g`, if
/// one exists.
///
/// Small groups are scanned exhaustively through the conjugation table;
/// larger ones restrict the scan to the coset `C_G(x⁻¹)·g₀` of solutions
/// of the first equation, where `g₀` comes from an orbit transversal of
/// the conjugacy class of `x⁻¹`.
pub fn inversion_witness(
    g: &GroupTable,
    theta: &Automorphism,
    x: &Element,
    y: &Element,
) -> Result<Option<Element>> {
    let tx = theta.apply(g, x);
    let ty = theta.apply(g, y);
    let xi = g.inverse(x);
    let yi = g.inverse(y);
    if g.order() <= g.caps().conj_table_cap {
        let ct = g.conjugation_table()?;
        let rx = ct.row(g.rank(&xi));
        let ry = ct.row(g.rank(&yi));
        let txr = g.rank(&tx) as u32;
        let tyr = g.rank(&ty) as u32;
        for gr in 0..g.order() as usize {
            if rx[gr] == txr && ry[gr] == tyr {
                return Ok(Some(g.unrank(gr as u64)));
            }
        }
        return Ok(None);
    }
    let t = g.tables()?;
    let xir = g.rank(&xi);
    let yir = g.rank(&yi);
    let txr = g.rank(&tx);
    let tyr = g.rank(&ty);
    // Orbit of x⁻¹ under conjugation, with a transversal element per orbit
    // member.
    let mut transversal: HashMap<u64, u64> = HashMap::new();
    transversal.insert(xir, 0);
    let mut queue = VecDeque::from([xir]);
    while let Some(v) = queue.pop_front() {
        let tv = transversal[&v];
        for i in 0..g.n_gens() {
            let v2 = t.conj_by_gen(i, v);
            if let Entry::Vacant(slot) = transversal.entry(v2) {
                slot.insert(t.mult(tv, t.gen_rank(i)));
                queue.push_back(v2);
            }
        }
    }
    let Some(&g0) = transversal.get(&txr) else {
        return Ok(None);
    };
    let cent = g.centralizer(&xi)?;
    let mut best: Option<u64> = None;
    for c in cent.iter() {
        let gr = t.mult(c, g0);
        if t.conj(yir, gr) == tyr && best.is_none_or(|b| gr < b) {
            best = Some(gr);
        }
    }
    Ok(best.map(|r| g.unrank(r)))
}
