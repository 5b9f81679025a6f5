//! Exhaustive classification of Beauville structures as strongly real or
//! not.
//!
//! The classifier works relative to a supplied set of automorphisms
//! (normally all of `Aut(G)`, from brute force or a certified parametrized
//! family).  Only automorphisms acting as `−identity` on `G/Φ(G)` can
//! witness any pair — conjugation is trivial modulo the Frattini subgroup —
//! so those are filtered first; if none survive, no structure is strongly
//! real and no per-structure work is needed.  Otherwise each generating
//! pair gets a bitset over the surviving automorphisms recording which of
//! them admit a conjugating element for that pair, and a structure is
//! strongly real iff the bitsets of its two pairs intersect.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::beauville::{is_beauville_structure, BeauvilleStructure, StructurePrep};
use crate::error::{Error, Result};
use crate::pcgroup::GroupTable;
use crate::strongreal::aut::{
    induced_matrix_mod_frattini, inversion_witness, is_minus_identity, Automorphism,
};
use crate::strongreal::witness::StrongRealWitness;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    PurelyStronglyReal,
    PurelyNonStronglyReal,
    Mixed,
}

/// Outcome of an exhaustive classification.
#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub verdict: Classification,
    pub total_structures: u64,
    pub strongly_real: u64,
    /// How many of the supplied automorphisms act as `−identity` mod Φ.
    pub admissible_automorphisms: usize,
    /// A strongly real structure with a verified witness, if any exists.
    pub example_strongly_real: Option<(BeauvilleStructure, StrongRealWitness)>,
    /// A structure that no supplied automorphism witnesses, if any exists.
    pub example_non_strongly_real: Option<BeauvilleStructure>,
}

#[derive(Clone, Default)]
struct Tally {
    sr: u64,
    nsr: u64,
    first_sr: Option<(usize, usize)>,
    first_nsr: Option<(usize, usize)>,
}

fn merge_first(a: Option<(usize, usize)>, b: Option<(usize, usize)>) -> Option<(usize, usize)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// Classifies every Beauville structure of `g` against the automorphism
/// set `auts`.  Errors with `InvalidParams` if the group has no Beauville
/// structure at all, and `TooLarge` if exhaustive per-pair witness scans
/// are infeasible (the `−identity` shortcut needs no scans and works at
/// any enumerable size).
pub fn classify_structures(g: &GroupTable, auts: &[Automorphism]) -> Result<ClassificationReport> {
    const PAIR_CAP: usize = 500_000;
    let prep = StructurePrep::new(g)?;
    let total = prep.count_structures();
    if total == 0 {
        return Err(Error::InvalidParams(
            "the group admits no Beauville structure".into(),
        ));
    }
    let p = g.prime();
    let mut admissible: Vec<usize> = Vec::new();
    for (i, th) in auts.iter().enumerate() {
        if is_minus_identity(&induced_matrix_mod_frattini(g, th)?, p) {
            admissible.push(i);
        }
    }
    if admissible.is_empty() {
        return Ok(ClassificationReport {
            verdict: Classification::PurelyNonStronglyReal,
            total_structures: total,
            strongly_real: 0,
            admissible_automorphisms: 0,
            example_strongly_real: None,
            example_non_strongly_real: prep.any_structure(),
        });
    }
    if g.order() > g.caps().conj_table_cap {
        return Err(Error::TooLarge {
            what: "exhaustive per-structure witness scan",
            needed: g.order(),
            cap: g.caps().conj_table_cap,
        });
    }
    if prep.n_pairs() > PAIR_CAP {
        return Err(Error::TooLarge {
            what: "exhaustive per-structure witness scan",
            needed: prep.n_pairs() as u64,
            cap: PAIR_CAP as u64,
        });
    }

    let ct = g.conjugation_table()?;
    let na = admissible.len();
    let theta_words = na.div_ceil(64);
    let order = g.order() as usize;
    let g_words = order.div_ceil(64);
    let perms: Vec<Vec<u32>> = admissible
        .par_iter()
        .map(|&ai| auts[ai].permutation(g))
        .collect();

    // Distinct elements appearing in generating pairs.
    let mut elems: Vec<u64> = Vec::with_capacity(prep.n_pairs() * 2);
    for q in 0..prep.n_pairs() {
        let (a, b) = prep.pair_ranks(q);
        elems.push(a);
        elems.push(b);
    }
    elems.sort_unstable();
    elems.dedup();
    let elem_index = |r: u64| elems.binary_search(&r).expect("pair element");

    // Per element, per admissible automorphism: the set of conjugators g
    // with (x⁻¹)^g = θ(x), as bitsets over g-ranks.
    let elem_bits: Vec<Vec<u64>> = elems
        .par_iter()
        .map(|&er| {
            let inv_r = g.rank(&g.inverse(&g.unrank(er)));
            let row = ct.row(inv_r);
            let mut bits = vec![0u64; na * g_words];
            for (ti, perm) in perms.iter().enumerate() {
                let target = perm[er as usize];
                let chunk = &mut bits[ti * g_words..(ti + 1) * g_words];
                for (gr, &val) in row.iter().enumerate() {
                    if val == target {
                        chunk[gr / 64] |= 1 << (gr % 64);
                    }
                }
            }
            bits
        })
        .collect();

    // Per pair: which admissible automorphisms admit a witness.
    let pair_bits: Vec<Vec<u64>> = (0..prep.n_pairs())
        .into_par_iter()
        .map(|q| {
            let (a, b) = prep.pair_ranks(q);
            let ba = &elem_bits[elem_index(a)];
            let bb = &elem_bits[elem_index(b)];
            let mut out = vec![0u64; theta_words];
            for ti in 0..na {
                let joint = (0..g_words)
                    .any(|w| ba[ti * g_words + w] & bb[ti * g_words + w] != 0);
                if joint {
                    out[ti / 64] |= 1 << (ti % 64);
                }
            }
            out
        })
        .collect();

    let n_pairs = prep.n_pairs();
    let tally = (0..n_pairs)
        .into_par_iter()
        .map(|q1| {
            let mut t = Tally::default();
            for q2 in q1 + 1..n_pairs {
                if !prep.compatible(q1, q2) {
                    continue;
                }
                let sr = (0..theta_words).any(|w| pair_bits[q1][w] & pair_bits[q2][w] != 0);
                if sr {
                    t.sr += 1;
                    if t.first_sr.is_none() {
                        t.first_sr = Some((q1, q2));
                    }
                } else {
                    t.nsr += 1;
                    if t.first_nsr.is_none() {
                        t.first_nsr = Some((q1, q2));
                    }
                }
            }
            t
        })
        .reduce(Tally::default, |a, b| Tally {
            sr: a.sr + b.sr,
            nsr: a.nsr + b.nsr,
            first_sr: merge_first(a.first_sr, b.first_sr),
            first_nsr: merge_first(a.first_nsr, b.first_nsr),
        });
    assert_eq!(
        tally.sr + tally.nsr,
        total,
        "structure tally must match the compatibility count"
    );

    let structure_at = |(q1, q2): (usize, usize)| {
        let (x1, y1) = prep.pair_elements(q1);
        let (x2, y2) = prep.pair_elements(q2);
        BeauvilleStructure { x1, y1, x2, y2 }
    };
    let example_strongly_real = match tally.first_sr {
        None => None,
        Some((q1, q2)) => {
            let s = structure_at((q1, q2));
            let ti = (0..na)
                .find(|&ti| {
                    let bit = |q: usize| pair_bits[q][ti / 64] >> (ti % 64) & 1 == 1;
                    bit(q1) && bit(q2)
                })
                .expect("intersection bit recorded a shared automorphism");
            let theta = auts[admissible[ti]].clone();
            let g1 = inversion_witness(g, &theta, &s.x1, &s.y1)?
                .expect("pair bitset recorded a witness");
            let g2 = inversion_witness(g, &theta, &s.x2, &s.y2)?
                .expect("pair bitset recorded a witness");
            let w = StrongRealWitness { theta, g1, g2 };
            debug_assert!(crate::strongreal::witness::verify_witness(g, &s, &w)?);
            Some((s, w))
        }
    };
    let verdict = if tally.nsr == 0 {
        Classification::PurelyStronglyReal
    } else if tally.sr == 0 {
        Classification::PurelyNonStronglyReal
    } else {
        Classification::Mixed
    };
    Ok(ClassificationReport {
        verdict,
        total_structures: total,
        strongly_real: tally.sr,
        admissible_automorphisms: na,
        example_strongly_real,
        example_non_strongly_real: tally.first_nsr.map(structure_at),
    })
}

/// Evidence counts from randomly sampled structures, for groups where the
/// exhaustive classifier is out of reach.  Each sampled structure is
/// checked directly: scan `auts` for one admitting conjugating elements
/// for both pairs.  Returns counts only — never a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampledClassification {
    pub samples: u64,
    pub strongly_real: u64,
    pub non_strongly_real: u64,
}

pub fn classify_structures_sampled(
    g: &GroupTable,
    auts: &[Automorphism],
    seed: u64,
    samples: u64,
) -> Result<SampledClassification> {
    let pairs = g.generating_pairs_unordered()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SampledClassification {
        samples: 0,
        strongly_real: 0,
        non_strongly_real: 0,
    };
    let mut tried = 0u64;
    let budget = samples.saturating_mul(100_000).max(1_000_000);
    while out.samples < samples {
        tried += 1;
        if tried > budget {
            return Err(Error::BudgetExhausted { candidates: tried });
        }
        let i = rng.gen_range(0..pairs.len());
        let j = rng.gen_range(0..pairs.len());
        if i == j {
            continue;
        }
        let (a, b) = pairs[i];
        let (c, d) = pairs[j];
        let s = BeauvilleStructure {
            x1: g.unrank(a),
            y1: g.unrank(b),
            x2: g.unrank(c),
            y2: g.unrank(d),
        };
        if !is_beauville_structure(g, &s)? {
            continue;
        }
        let mut witnessed = false;
        for th in auts {
            if inversion_witness(g, th, &s.x1, &s.y1)?.is_some()
                && inversion_witness(g, th, &s.x2, &s.y2)?.is_some()
            {
                witnessed = true;
                break;
            }
        }
        if witnessed {
            out.strongly_real += 1;
        } else {
            out.non_strongly_real += 1;
        }
        out.samples += 1;
    }
    Ok(out)
}
