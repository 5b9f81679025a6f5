//! End-to-end acceptance checks, one test per criterion.  Each test prints
//! a single `PASS`/`FAIL` line (visible with `--nocapture`) and then
//! asserts, so a failing criterion both shows up in the line and fails the
//! suite.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use beauville_core::beauville::{
    class2_structure_criterion, find_beauville_structure, is_beauville_group,
    is_beauville_structure, BeauvilleStructure, FindStrategy, SearchOutcome, StructurePrep,
};
use beauville_core::families::{construct, enumerate_class2_tuples, presentation, FamilyParams};
use beauville_core::pcgroup::{parse, Element, GroupTable};
use beauville_core::strongreal::{
    brute_force_automorphisms, class2_aut, classify_structures, extend_to_automorphism,
    in_class2_family, induced_matrix_mod_frattini, inversion_automorphism, inversion_defect,
    inversion_witness, is_minus_identity, metacyclic_aut, transfer_witness,
    transfer_witness_forward, triangle_quotient_witness, verify_witness, Classification,
    DefectSide, TransferBasis,
};

fn report(name: &str, ok: bool) {
    println!("acceptance {name}: {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "acceptance criterion failed: {name}");
}

fn metacyclic(p: u64, e: u32, i: u32) -> Arc<GroupTable> {
    construct(&FamilyParams::Metacyclic { p, e, i }).unwrap()
}

/// Every class-2 group of order at most 2⁷ in the five-parameter family
/// fails to be a Beauville group.
#[test]
fn c1_class2_two_groups_are_never_beauville() {
    let tuples = enumerate_class2_tuples(2, 128);
    let mut ok = tuples.len() == 54;
    for params in &tuples {
        let g = GroupTable::build(presentation(params).unwrap()).unwrap();
        ok &= !is_beauville_group(&g).unwrap();
    }
    report("c1 class-2 2-groups up to order 128 admit no structure", ok);
}

/// The split metacyclic group needs p ≥ 5: the (5,2,1) member admits a
/// verified structure, while (3,2,1) and (2,3,1) admit none.
#[test]
fn c2_metacyclic_structures_require_prime_at_least_five() {
    let g = metacyclic(5, 2, 1);
    let mut ok = match find_beauville_structure(&g, FindStrategy::DeterministicScan).unwrap() {
        SearchOutcome::Found(s) => is_beauville_structure(&g, &s).unwrap(),
        _ => false,
    };
    for (p, e, i) in [(3u64, 2u32, 1u32), (2, 3, 1)] {
        let g = GroupTable::build(
            presentation(&FamilyParams::Metacyclic { p, e, i }).unwrap(),
        )
        .unwrap();
        ok &= !is_beauville_group(&g).unwrap();
    }
    report("c2 metacyclic structure exists exactly at p = 5", ok);
}

/// Across all family five-tuples with p ∈ {2, 3, 5}, exhaustive structure
/// search agrees with the power-subgroup criterion: structures exist iff
/// p ≥ 5 and the subgroup of p^{e−1}-th powers has order at least p².
#[test]
fn c3_power_subgroup_criterion_matches_exhaustive_search() {
    let mut ok = true;
    for (p, max_order, expected) in [(2u64, 128u64, 54usize), (3, 243, 16), (5, 3125, 16)] {
        let tuples = enumerate_class2_tuples(p, max_order);
        ok &= tuples.len() == expected;
        for params in &tuples {
            let g = GroupTable::build(presentation(params).unwrap()).unwrap();
            let exhaustive = is_beauville_group(&g).unwrap();
            let criterion = if p == 2 {
                false
            } else {
                class2_structure_criterion(&g).unwrap()
            };
            ok &= exhaustive == criterion;
            if exhaustive != criterion {
                eprintln!("criterion mismatch at {params:?}");
            }
        }
    }
    report("c3 power-subgroup criterion matches exhaustive search", ok);
}

/// The four-parameter automorphism family of the metacyclic (5,2,1) group
/// consists of automorphisms and exhausts the full automorphism group.
#[test]
fn c4_metacyclic_automorphism_family_is_sound_and_complete() {
    use std::collections::HashSet;
    let g = metacyclic(5, 2, 1);
    let mut family: HashSet<Vec<Element>> = HashSet::new();
    let mut all_valid = true;
    for m in 0..5 {
        for r in 0..5 {
            for n in (0..25).filter(|n| n % 5 != 0) {
                for s in 0..25 {
                    // Constructors validate the map, so Ok means genuine.
                    match metacyclic_aut(&g, m, n, r, s) {
                        Ok(th) => {
                            family.insert(th.images().to_vec());
                        }
                        Err(_) => all_valid = false,
                    }
                }
            }
        }
    }
    let brute: HashSet<Vec<Element>> = brute_force_automorphisms(&g)
        .unwrap()
        .into_iter()
        .map(|th| th.images().to_vec())
        .collect();
    let ok = all_valid && family.len() == 12500 && family == brute;
    report("c4 metacyclic automorphism family equals brute force (12500)", ok);
}

/// In the order-5⁷ class-2 group, every sampled parameter tuple yields an
/// automorphism inside the family (soundness), and every randomly found
/// relation-preserving generating image lies in the family (completeness).
#[test]
fn c5_class2_automorphism_family_is_sound_and_complete() {
    let g = construct(&FamilyParams::Class2Beauville {
        p: 5,
        e: 3,
        i: 2,
        j: 2,
        k: 1,
    })
    .unwrap();
    let mut ok = g.order() == 78_125;
    let c = g.generator(2);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..10_000 {
        let m = rng.gen_range(0..25);
        let r = rng.gen_range(0..25);
        let n = rng.gen_range(0..125);
        let s = loop {
            let s = rng.gen_range(0..125);
            if s % 5 != 0 {
                break s;
            }
        };
        let ca = g.power(&c, rng.gen_range(0..25));
        let cb = g.power(&c, rng.gen_range(0..25));
        match class2_aut(&g, m, n, r, s, &ca, &cb) {
            Ok(th) => ok &= in_class2_family(&g, &th).unwrap(),
            Err(_) => ok = false,
        }
    }
    let mut found = 0u32;
    let mut trials = 0u64;
    while found < 1000 && trials < 2_000_000 {
        trials += 1;
        let a = g.unrank(rng.gen_range(0..g.order()));
        let b = g.unrank(rng.gen_range(0..g.order()));
        if let Some(th) = extend_to_automorphism(&g, &a, &b).unwrap() {
            found += 1;
            ok &= in_class2_family(&g, &th).unwrap();
        }
    }
    ok &= found == 1000;
    report("c5 class-2 automorphism family sound and complete", ok);
}

/// No family automorphism of either group acts as −identity on the
/// Frattini quotient; an inversion witness forces −identity action (so
/// none exists), and the exhaustive classifier finds no strongly real
/// structure in the metacyclic group.
#[test]
fn c6_no_inverting_automorphism_in_either_family() {
    let g = metacyclic(5, 2, 1);
    let mut ok = true;
    for m in 0..5 {
        for r in 0..5 {
            for n in (0..25).filter(|n| n % 5 != 0) {
                for s in 0..25 {
                    let th = metacyclic_aut(&g, m, n, r, s).unwrap();
                    ok &= !is_minus_identity(&induced_matrix_mod_frattini(&g, &th).unwrap(), 5);
                }
            }
        }
    }

    // The class-2 matrices depend only on n and s mod p.
    let g2 = construct(&FamilyParams::Class2Beauville {
        p: 5,
        e: 3,
        i: 2,
        j: 2,
        k: 1,
    })
    .unwrap();
    let id = g2.identity();
    for n in 0..5 {
        for s in 1..5 {
            let th = class2_aut(&g2, 0, n, 0, s, &id, &id).unwrap();
            let mat = induced_matrix_mod_frattini(&g2, &th).unwrap();
            ok &= mat == [[1, 0], [n, s]];
            ok &= !is_minus_identity(&mat, 5);
        }
    }

    // Witness existence forces −identity action: over sampled
    // automorphisms and *all* generating pairs, filter by the sound
    // necessary condition θ(x) ~ x⁻¹ (conjugacy), and fully scan whatever
    // survives.
    let auts = brute_force_automorphisms(&g).unwrap();
    let pairs = g.generating_pairs_unordered().unwrap();
    let cc = g.conj_classes().unwrap();
    let inv_rank: Vec<u32> = (0..g.order())
        .map(|r| g.rank(&g.inverse(&g.unrank(r))) as u32)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for _ in 0..1000 {
        let th = &auts[rng.gen_range(0..auts.len())];
        let minus = is_minus_identity(&induced_matrix_mod_frattini(&g, th).unwrap(), 5);
        let perm = th.permutation(&g);
        for &(a, b) in pairs.iter() {
            let inverted = |r: u64| {
                cc.class_id[perm[r as usize] as usize]
                    == cc.class_id[inv_rank[r as usize] as usize]
            };
            if !inverted(a) || !inverted(b) {
                continue;
            }
            if inversion_witness(&g, th, &g.unrank(a), &g.unrank(b))
                .unwrap()
                .is_some()
            {
                ok &= minus;
            }
        }
    }

    let report_mc = classify_structures(&g, &auts).unwrap();
    ok &= report_mc.verdict == Classification::PurelyNonStronglyReal;
    ok &= report_mc.admissible_automorphisms == 0;
    ok &= report_mc.total_structures == 562_500_000;
    ok &= report_mc.strongly_real == 0;
    ok &= report_mc.example_strongly_real.is_none();
    report("c6 inversion witnesses require -identity action; none exist", ok);
}

/// Every Beauville structure of the smallest triangle-quotient group gets a
/// verified constructive witness (no fallback search); the constructive
/// answer matches a brute-force automorphism scan on seeded samples; and
/// sampled structures of the order-4096 member all verify too.
#[test]
fn c7_triangle_quotient_constructive_witnesses() {
    let g = construct(&FamilyParams::TriangleQuotient { e: 2 }).unwrap();
    let prep = StructurePrep::new(&g).unwrap();
    let mut ok = prep.count_structures() == 589_824;
    let idx: Vec<(usize, usize)> = prep.structure_indices().collect();
    ok &= idx.len() == 589_824;
    let good = idx
        .par_iter()
        .filter(|&&(i1, i2)| {
            let (x1, y1) = prep.pair_elements(i1);
            let (x2, y2) = prep.pair_elements(i2);
            let s = BeauvilleStructure { x1, y1, x2, y2 };
            match triangle_quotient_witness(&g, &s) {
                Ok(tw) => tw.constructive && verify_witness(&g, &s, &tw.witness).unwrap(),
                Err(_) => false,
            }
        })
        .count();
    ok &= good == idx.len();

    // Constructive result agrees with an independent brute-force scan on
    // 100 seeded structures.
    let auts = brute_force_automorphisms(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let (i1, i2) = loop {
            let i1 = rng.gen_range(0..prep.n_pairs());
            let i2 = rng.gen_range(0..prep.n_pairs());
            if i1 != i2 && prep.compatible(i1, i2) {
                break (i1, i2);
            }
        };
        let (x1, y1) = prep.pair_elements(i1);
        let (x2, y2) = prep.pair_elements(i2);
        let s = BeauvilleStructure { x1, y1, x2, y2 };
        let tw = triangle_quotient_witness(&g, &s).unwrap();
        ok &= tw.constructive && verify_witness(&g, &s, &tw.witness).unwrap();
        let brute = auts.iter().find_map(|th| {
            let g1 = inversion_witness(&g, th, &s.x1, &s.y1).unwrap()?;
            let g2 = inversion_witness(&g, th, &s.x2, &s.y2).unwrap()?;
            Some((th.clone(), g1, g2))
        });
        match brute {
            Some((th, g1, g2)) => {
                let w = beauville_core::strongreal::StrongRealWitness { theta: th, g1, g2 };
                ok &= verify_witness(&g, &s, &w).unwrap();
            }
            None => ok = false,
        }
    }

    // Order-4096 member: sampled structures only.
    let g3 = construct(&FamilyParams::TriangleQuotient { e: 3 }).unwrap();
    let pairs3 = g3.generating_pairs_unordered().unwrap();
    let mut done = 0u32;
    let mut trials = 0u64;
    while done < 1000 && trials < 2_000_000 {
        trials += 1;
        let i = rng.gen_range(0..pairs3.len());
        let j = rng.gen_range(0..pairs3.len());
        if i == j {
            continue;
        }
        let (a, b) = pairs3[i];
        let (c, d) = pairs3[j];
        let s = BeauvilleStructure {
            x1: g3.unrank(a),
            y1: g3.unrank(b),
            x2: g3.unrank(c),
            y2: g3.unrank(d),
        };
        if !is_beauville_structure(&g3, &s).unwrap() {
            continue;
        }
        done += 1;
        match triangle_quotient_witness(&g3, &s) {
            Ok(tw) => ok &= tw.constructive && verify_witness(&g3, &s, &tw.witness).unwrap(),
            Err(_) => ok = false,
        }
    }
    ok &= done == 1000;
    report("c7 triangle-quotient witnesses verify on every structure", ok);
}

/// The identity suite behind the triangle-quotient witness construction:
/// the reordering identity, the inversion-defect identity, the transfer
/// moves, the centralizer shape, and the group/derived exponents.
#[test]
fn c8_triangle_identity_suite() {
    let mut ok = true;

    // Reordering identity, exhaustive for e ∈ {2, 3} over exponents past
    // the generator orders.
    for e in [2u32, 3] {
        let g = construct(&FamilyParams::TriangleQuotient { e }).unwrap();
        let top = 2i64.pow(e + 1);
        for a in 0..top {
            for b in 0..top {
                let lhs = g.multiply(
                    &g.power(&g.generator(1), b),
                    &g.power(&g.generator(0), a),
                );
                let rhs = g.element_from_signed(&[
                    (0, a),
                    (1, b),
                    (2, a * b),
                    (3, b * (a * (a - 1) / 2)),
                    (4, a * (b * (b - 1) / 2)),
                ]);
                ok &= lhs == rhs;
            }
        }
        ok &= g.exponent().unwrap() == 1 << e;
        let derived = g.derived_subgroup().unwrap();
        ok &= derived
            .iter()
            .map(|r| g.order_of(&g.unrank(r)))
            .max()
            .unwrap()
            == 1 << (e - 1);
    }

    // Defect identity, exhaustive at e = 2 for both handled shapes.
    let g = construct(&FamilyParams::TriangleQuotient { e: 2 }).unwrap();
    let theta0 = inversion_automorphism(&g).unwrap();
    for side in [DefectSide::XSide, DefectSide::YSide] {
        for lead in [1i64, 3] {
            for other in 0..4i64 {
                for k in 0..2i64 {
                    let a = match side {
                        DefectSide::XSide => {
                            g.element_from_signed(&[(0, lead), (1, other), (2, k)])
                        }
                        DefectSide::YSide => {
                            g.element_from_signed(&[(1, lead), (0, other), (2, k)])
                        }
                    };
                    let (d, arg) = inversion_defect(&g, &a, side).unwrap();
                    ok &= d == g.multiply(&a, &theta0.apply(&g, &a));
                    ok &= d == g.commutator(&g.inverse(&a), &arg);
                }
            }
        }
    }

    // Centralizers of odd-leading-exponent elements are ⟨u⟩·Z(G),
    // exhaustive at e = 2.
    let centre: Vec<u64> = g.center().unwrap().iter().collect();
    for lead in [1i64, 3] {
        for other in 0..4i64 {
            for k in 0..2i64 {
                for parts in [
                    [(0usize, lead), (1, other), (2, k)],
                    [(1, lead), (0, other), (2, k)],
                ] {
                    let u = g.element_from_signed(&parts);
                    let mut gens = centre.clone();
                    gens.push(g.rank(&u));
                    ok &= g.centralizer(&u).unwrap() == g.closure(&gens).unwrap();
                }
            }
        }
    }

    // Transfer moves on 10⁴ random instances across three groups: witness
    // existence is invariant under moving between (x, y) and either
    // product pair, and the explicit moves round-trip.
    let q8 = GroupTable::build_with(
        parse(
            "prime 2; gen a order 2; gen b order 2; gen c order 2;\n\
             pow a = c; pow b = c;\n\
             conj b^a = b c;",
        )
        .unwrap(),
        beauville_core::pcgroup::BuildOptions {
            distinguished: Some(vec![0, 1]),
            derived_defs: vec![beauville_core::pcgroup::DerivedDef {
                gen: 2,
                left: 1,
                right: 0,
            }],
            ..Default::default()
        },
    )
    .unwrap();
    let c5c5 =
        GroupTable::build(parse("prime 5; gen a order 5; gen b order 5;").unwrap()).unwrap();
    let tq2 = construct(&FamilyParams::TriangleQuotient { e: 2 }).unwrap();
    let groups: Vec<&GroupTable> = vec![&q8, &tq2, &c5c5];
    let auts: Vec<_> = groups
        .iter()
        .map(|g| brute_force_automorphisms(g).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for trial in 0..10_000u32 {
        let gi = (trial % 3) as usize;
        let g = groups[gi];
        let th = &auts[gi][rng.gen_range(0..auts[gi].len())];
        let x = g.unrank(rng.gen_range(0..g.order()));
        let y = g.unrank(rng.gen_range(0..g.order()));
        let xy = g.multiply(&x, &y);
        let base = inversion_witness(g, th, &x, &y).unwrap();
        let with_x = inversion_witness(g, th, &xy, &x).unwrap();
        let with_y = inversion_witness(g, th, &xy, &y).unwrap();
        ok &= base.is_some() == with_x.is_some();
        ok &= base.is_some() == with_y.is_some();
        if let Some(gw) = base {
            for basis in [TransferBasis::ProductWithX, TransferBasis::ProductWithY] {
                let h = transfer_witness_forward(g, th, &x, &y, &gw, basis).unwrap();
                ok &= transfer_witness(g, th, &x, &y, &h, basis).is_ok();
            }
        }
    }
    report("c8 reordering/defect/transfer/centralizer identity suite", ok);
}

/// The elementary abelian group of order 25 is a Beauville group and every
/// structure is strongly real, witnessed by plain inversion with trivial
/// conjugators.
#[test]
fn c9_elementary_abelian_25_is_purely_strongly_real() {
    let g = GroupTable::build(parse("prime 5; gen a order 5; gen b order 5;").unwrap()).unwrap();
    let mut ok = matches!(
        find_beauville_structure(&g, FindStrategy::DeterministicScan).unwrap(),
        SearchOutcome::Found(_)
    );
    let auts = brute_force_automorphisms(&g).unwrap();
    let rep = classify_structures(&g, &auts).unwrap();
    ok &= rep.verdict == Classification::PurelyStronglyReal;
    ok &= rep.strongly_real == rep.total_structures;
    ok &= rep.total_structures == 1440;
    match rep.example_strongly_real {
        Some((s, w)) => {
            ok &= w.g1.is_identity() && w.g2.is_identity();
            ok &= verify_witness(&g, &s, &w).unwrap();
        }
        None => ok = false,
    }
    report("c9 elementary abelian 25 is purely strongly real", ok);
}
