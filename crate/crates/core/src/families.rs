//! Parametrised constructions of the group families the toolkit targets.
//!
//! Each family maps a small parameter tuple to a pc presentation together
//! with a distinguished generating pair and commutator definitions for the
//! remaining generators.  Constructed groups are memoized process-wide, so
//! repeated lookups of the same parameters share one [`GroupTable`].
//!
//! The `detect_*` functions answer the reverse question — whether an
//! arbitrary group *is* a canonical member of a family — by comparing its
//! presentation against the family template.  Family-specific algorithms
//! (such as the closed-form automorphism generators) use them as gates.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcgroup::{
    is_prime, BuildOptions, DerivedDef, GroupCaps, GroupTable, PcPresentation, Word,
};

/// Parameters naming one group in one of the supported families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyParams {
    /// Split metacyclic group `⟨b, a | a^{p^e} = b^{p^e} = 1,
    /// a^b = a^{1+p^i}⟩` of order `p^{2e}`, for `1 ≤ i ≤ e−1`.
    Metacyclic { p: u64, e: u32, i: u32 },
    /// Two-generator group of nilpotency class 2 with cyclic centre data:
    /// `x, y` of orders `p^alpha, p^beta`, `c = [x, y]` central of order
    /// `p^gamma`, `x^{p^alpha} = c^{p^rho}`, `y^{p^beta} = c^{p^sigma}`,
    /// subject to `alpha ≥ beta ≥ gamma ≥ 1` and `0 ≤ rho, sigma ≤ gamma`.
    Class2FiveTuple {
        p: u64,
        alpha: u32,
        beta: u32,
        gamma: u32,
        rho: u32,
        sigma: u32,
    },
    /// Two-generator class-2 group `⟨a, b⟩` with `a` of order `p^e`, `b` of
    /// order `p^i`, `c = [b, a]` central of order `p^j`, `b^{p^i} = c^{p^k}`,
    /// subject to `0 ≤ k ≤ j ≤ i ≤ e` and `e = i + j − k`.
    Class2Beauville {
        p: u64,
        e: u32,
        i: u32,
        j: u32,
        k: u32,
    },
    /// Class-2 group for `p ≥ 5`: `x, y` of order `p^n`, `z = [x, y]`
    /// central of order `p^r`, trivial power relations, `n ≥ r ≥ 1`.
    SpecialClass2 { p: u64, n: u32, r: u32 },
    /// 2-group of order `2^{5e−3}` and class 3 generated by `x, y` of order
    /// `2^e` with `z = [y, x]`, `t = [z, x]`, `w = [z, y]` of order
    /// `2^{e−1}`, `t` and `w` central; requires `e ≥ 2`.
    TriangleQuotient { e: u32 },
}

impl FamilyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        match *self {
            FamilyParams::Metacyclic { p, e, i } => {
                if !is_prime(p) {
                    return bad(format!("{p} is not prime"));
                }
                if i < 1 || i + 1 > e {
                    return bad(format!("need 1 ≤ i ≤ e−1, got e={e}, i={i}"));
                }
            }
            FamilyParams::Class2FiveTuple {
                p,
                alpha,
                beta,
                gamma,
                rho,
                sigma,
            } => {
                if !is_prime(p) {
                    return bad(format!("{p} is not prime"));
                }
                if !(alpha >= beta && beta >= gamma && gamma >= 1) {
                    return bad(format!(
                        "need alpha ≥ beta ≥ gamma ≥ 1, got {alpha}, {beta}, {gamma}"
                    ));
                }
                if rho > gamma || sigma > gamma {
                    return bad(format!(
                        "need rho, sigma ≤ gamma, got rho={rho}, sigma={sigma}, gamma={gamma}"
                    ));
                }
            }
            FamilyParams::Class2Beauville { p, e, i, j, k } => {
                if !is_prime(p) {
                    return bad(format!("{p} is not prime"));
                }
                if !(k <= j && j <= i && i <= e && j >= 1) {
                    return bad(format!("need 1 ≤ j ≤ i ≤ e and k ≤ j, got {e},{i},{j},{k}"));
                }
                if e != i + j - k {
                    return bad(format!("need e = i + j − k, got e={e}, i+j−k={}", i + j - k));
                }
            }
            FamilyParams::SpecialClass2 { p, n, r } => {
                if !is_prime(p) || p < 5 {
                    return bad(format!("need a prime p ≥ 5, got {p}"));
                }
                if !(n >= r && r >= 1) {
                    return bad(format!("need n ≥ r ≥ 1, got n={n}, r={r}"));
                }
            }
            FamilyParams::TriangleQuotient { e } => {
                if e < 2 {
                    return bad(format!("need e ≥ 2, got {e}"));
                }
            }
        }
        Ok(())
    }

    /// The group order, assuming the parameters validate.
    pub fn order(&self) -> Option<u64> {
        match *self {
            FamilyParams::Metacyclic { p, e, .. } => p.checked_pow(2 * e),
            FamilyParams::Class2FiveTuple {
                p,
                alpha,
                beta,
                gamma,
                ..
            } => p.checked_pow(alpha + beta + gamma),
            FamilyParams::Class2Beauville { p, e, i, j, .. } => p.checked_pow(e + i + j),
            FamilyParams::SpecialClass2 { p, n, r } => p.checked_pow(2 * n + r),
            FamilyParams::TriangleQuotient { e } => 2u64.checked_pow(5 * e - 3),
        }
    }
}

/// The canonical pc presentation for the family member.
pub fn presentation(params: &FamilyParams) -> Result<PcPresentation> {
    params.validate()?;
    let pres = match *params {
        FamilyParams::Metacyclic { p, e, i } => {
            let pe = p.pow(e);
            let mut conj = BTreeMap::new();
            conj.insert((0, 1), vec![(1usize, 1 + p.pow(i))]);
            PcPresentation {
                prime: p,
                gens: vec!["b".into(), "a".into()],
                rel_orders: vec![pe, pe],
                power_rels: vec![Vec::new(), Vec::new()],
                conj_rels: conj,
            }
        }
        FamilyParams::Class2FiveTuple {
            p,
            alpha,
            beta,
            gamma,
            rho,
            sigma,
        } => {
            let rc = p.pow(gamma);
            let power = |k: u32| -> Word {
                if p.pow(k) < rc {
                    vec![(2, p.pow(k))]
                } else {
                    Vec::new()
                }
            };
            let mut conj = BTreeMap::new();
            conj.insert((0, 1), vec![(1, 1), (2, rc - 1)]);
            PcPresentation {
                prime: p,
                gens: vec!["x".into(), "y".into(), "c".into()],
                rel_orders: vec![p.pow(alpha), p.pow(beta), rc],
                power_rels: vec![power(rho), power(sigma), Vec::new()],
                conj_rels: conj,
            }
        }
        FamilyParams::Class2Beauville { p, e, i, j, k } => {
            let rc = p.pow(j);
            let pow_b = if p.pow(k) < rc {
                vec![(2, p.pow(k))]
            } else {
                Vec::new()
            };
            let mut conj = BTreeMap::new();
            conj.insert((0, 1), vec![(1, 1), (2, 1)]);
            PcPresentation {
                prime: p,
                gens: vec!["a".into(), "b".into(), "c".into()],
                rel_orders: vec![p.pow(e), p.pow(i), rc],
                power_rels: vec![Vec::new(), pow_b, Vec::new()],
                conj_rels: conj,
            }
        }
        FamilyParams::SpecialClass2 { p, n, r } => {
            let rz = p.pow(r);
            let mut conj = BTreeMap::new();
            conj.insert((0, 1), vec![(1, 1), (2, rz - 1)]);
            PcPresentation {
                prime: p,
                gens: vec!["x".into(), "y".into(), "z".into()],
                rel_orders: vec![p.pow(n), p.pow(n), rz],
                power_rels: vec![Vec::new(); 3],
                conj_rels: conj,
            }
        }
        FamilyParams::TriangleQuotient { e } => {
            let full = 2u64.pow(e);
            let half = 2u64.pow(e - 1);
            let mut conj = BTreeMap::new();
            conj.insert((0, 1), vec![(1, 1), (2, 1)]); // y^x = y z
            conj.insert((0, 2), vec![(2, 1), (3, 1)]); // z^x = z t
            conj.insert((1, 2), vec![(2, 1), (4, 1)]); // z^y = z w
            PcPresentation {
                prime: 2,
                gens: vec![
                    "x".into(),
                    "y".into(),
                    "z".into(),
                    "t".into(),
                    "w".into(),
                ],
                rel_orders: vec![full, full, half, half, half],
                power_rels: vec![Vec::new(); 5],
                conj_rels: conj,
            }
        }
    };
    Ok(pres)
}

fn build_options(params: &FamilyParams) -> BuildOptions {
    let (distinguished, derived) = match params {
        FamilyParams::Metacyclic { .. } => (vec![1, 0], Vec::new()),
        FamilyParams::Class2FiveTuple { .. } | FamilyParams::SpecialClass2 { .. } => (
            vec![0, 1],
            vec![DerivedDef {
                gen: 2,
                left: 0,
                right: 1,
            }],
        ),
        FamilyParams::Class2Beauville { .. } => (
            vec![0, 1],
            vec![DerivedDef {
                gen: 2,
                left: 1,
                right: 0,
            }],
        ),
        FamilyParams::TriangleQuotient { .. } => (
            vec![0, 1],
            vec![
                DerivedDef {
                    gen: 2,
                    left: 1,
                    right: 0,
                },
                DerivedDef {
                    gen: 3,
                    left: 2,
                    right: 0,
                },
                DerivedDef {
                    gen: 4,
                    left: 2,
                    right: 1,
                },
            ],
        ),
    };
    BuildOptions {
        distinguished: Some(distinguished),
        derived_defs: derived,
        caps: GroupCaps::default(),
    }
}

fn cache() -> &'static Mutex<HashMap<FamilyParams, Arc<GroupTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<FamilyParams, Arc<GroupTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds (or fetches from the process-wide cache) the family member.
pub fn construct(params: &FamilyParams) -> Result<Arc<GroupTable>> {
    if let Some(g) = cache().lock().unwrap().get(params) {
        return Ok(Arc::clone(g));
    }
    let pres = presentation(params)?;
    let table = Arc::new(GroupTable::build_with(pres, build_options(params))?);
    let mut map = cache().lock().unwrap();
    let entry = map.entry(*params).or_insert(table);
    Ok(Arc::clone(entry))
}

/// Whether the group is presented exactly as a metacyclic family member;
/// returns its parameters if so.
pub fn detect_metacyclic(g: &GroupTable) -> Option<FamilyParams> {
    let pres = g.presentation();
    if pres.n_gens() != 2 {
        return None;
    }
    let p = pres.prime;
    let r = pres.rel_orders[0];
    if pres.rel_orders[1] != r || !pres.power_rels[0].is_empty() || !pres.power_rels[1].is_empty()
    {
        return None;
    }
    let e = r.checked_ilog(p)?;
    if p.pow(e) != r {
        return None;
    }
    let w = pres.conj_rels.get(&(0, 1))?;
    if w.len() != 1 || w[0].0 != 1 {
        return None;
    }
    let i = (w[0].1.checked_sub(1)?).checked_ilog(p)?;
    if 1 + p.pow(i) != w[0].1 || i < 1 || i >= e {
        return None;
    }
    Some(FamilyParams::Metacyclic { p, e, i })
}

/// Whether the group is presented exactly as a class-2 family member with
/// parameters `(p, e, i, j, k)`; returns them if so.
pub fn detect_class2_beauville(g: &GroupTable) -> Option<FamilyParams> {
    let pres = g.presentation();
    if pres.n_gens() != 3 {
        return None;
    }
    let p = pres.prime;
    let log = |r: u64| -> Option<u32> {
        let l = r.checked_ilog(p)?;
        (p.pow(l) == r).then_some(l)
    };
    let e = log(pres.rel_orders[0])?;
    let i = log(pres.rel_orders[1])?;
    let j = log(pres.rel_orders[2])?;
    if !pres.power_rels[0].is_empty() || !pres.power_rels[2].is_empty() {
        return None;
    }
    let k = match pres.power_rels[1].as_slice() {
        [] => j,
        [(2, exp)] => {
            let k = log(*exp)?;
            if k >= j {
                return None;
            }
            k
        }
        _ => return None,
    };
    if pres.conj_rels.get(&(0, 1))?.as_slice() != [(1, 1), (2, 1)] {
        return None;
    }
    if pres.conj_rels.contains_key(&(0, 2)) || pres.conj_rels.contains_key(&(1, 2)) {
        return None;
    }
    let params = FamilyParams::Class2Beauville { p, e, i, j, k };
    params.validate().ok()?;
    Some(params)
}

/// Whether the group is the canonical order-`2^{5e−3}` triangle-curve
/// quotient; returns `e` if so.
pub fn detect_triangle_quotient(g: &GroupTable) -> Option<u32> {
    let pres = g.presentation();
    if pres.prime != 2 || pres.n_gens() != 5 {
        return None;
    }
    let e = pres.rel_orders[0].checked_ilog2();
    let e = match e {
        Some(e) if e >= 2 && 2u64.pow(e) == pres.rel_orders[0] => e,
        _ => return None,
    };
    let half = 2u64.pow(e - 1);
    if pres.rel_orders.as_slice() != [2u64.pow(e), 2u64.pow(e), half, half, half] {
        return None;
    }
    if pres.power_rels.iter().any(|w| !w.is_empty()) {
        return None;
    }
    let want: BTreeMap<(usize, usize), Word> = [
        ((0, 1), vec![(1, 1), (2, 1)]),
        ((0, 2), vec![(2, 1), (3, 1)]),
        ((1, 2), vec![(2, 1), (4, 1)]),
    ]
    .into_iter()
    .collect();
    (pres.conj_rels == want).then_some(e)
}

/// All five-parameter class-2 tuples for the prime with order at most
/// `max_order`, in lexicographic parameter order.
pub fn enumerate_class2_tuples(p: u64, max_order: u64) -> Vec<FamilyParams> {
    let mut out = Vec::new();
    let mut alpha = 1u32;
    while p.checked_pow(alpha + 2).is_some_and(|o| o <= max_order) {
        for beta in 1..=alpha {
            for gamma in 1..=beta {
                let total = alpha + beta + gamma;
                if p.checked_pow(total).is_none_or(|o| o > max_order) {
                    continue;
                }
                for rho in 0..=gamma {
                    for sigma in 0..=gamma {
                        out.push(FamilyParams::Class2FiveTuple {
                            p,
                            alpha,
                            beta,
                            gamma,
                            rho,
                            sigma,
                        });
                    }
                }
            }
        }
        alpha += 1;
    }
    out
}
