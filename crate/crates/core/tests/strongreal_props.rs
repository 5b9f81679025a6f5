//! Invariants of the automorphism and witness machinery: frozen
//! automorphism-group sizes, closure laws, the parametrized metacyclic
//! family against brute force, the congruence solver, the defect and
//! centralizer identities in the triangle-quotient groups, and agreement
//! between the exhaustive and sampled classifiers.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use beauville_core::families::{construct, FamilyParams};
use beauville_core::pcgroup::{parse, BuildOptions, DerivedDef, Element, GroupTable};
use beauville_core::strongreal::{
    brute_force_automorphisms, classify_structures, classify_structures_sampled,
    inversion_automorphism, inversion_defect, inversion_witness, metacyclic_aut, transfer_witness,
    transfer_witness_forward, Classification, CongruenceParams, DefectSide, TransferBasis,
};

fn q8() -> GroupTable {
    GroupTable::build_with(
        parse(
            "prime 2; gen a order 2; gen b order 2; gen c order 2;\n\
             pow a = c; pow b = c;\n\
             conj b^a = b c;",
        )
        .unwrap(),
        two_gen_opts(),
    )
    .unwrap()
}

fn d8() -> GroupTable {
    GroupTable::build_with(
        parse(
            "prime 2; gen a order 2; gen b order 2; gen c order 2;\n\
             pow b = c;\n\
             conj b^a = b c;",
        )
        .unwrap(),
        two_gen_opts(),
    )
    .unwrap()
}

fn c5c5() -> GroupTable {
    GroupTable::build(parse("prime 5; gen a order 5; gen b order 5;").unwrap()).unwrap()
}

fn two_gen_opts() -> BuildOptions {
    BuildOptions {
        distinguished: Some(vec![0, 1]),
        derived_defs: vec![DerivedDef {
            gen: 2,
            left: 1,
            right: 0,
        }],
        ..BuildOptions::default()
    }
}

fn tq2() -> Arc<GroupTable> {
    construct(&FamilyParams::TriangleQuotient { e: 2 }).unwrap()
}

fn metacyclic521() -> Arc<GroupTable> {
    construct(&FamilyParams::Metacyclic { p: 5, e: 2, i: 1 }).unwrap()
}

#[test]
fn frozen_automorphism_group_sizes() {
    assert_eq!(brute_force_automorphisms(&q8()).unwrap().len(), 24);
    assert_eq!(brute_force_automorphisms(&d8()).unwrap().len(), 8);
    assert_eq!(brute_force_automorphisms(&c5c5()).unwrap().len(), 480);
    assert_eq!(
        brute_force_automorphisms(&metacyclic521()).unwrap().len(),
        12500
    );
    assert_eq!(brute_force_automorphisms(&tq2()).unwrap().len(), 6144);
}

/// The four-parameter map family of the metacyclic group hits every
/// automorphism exactly once: 5·5 choices of `m, r`, 20 units `n`, 25
/// values of `s`.
#[test]
fn metacyclic_family_equals_brute_force() {
    let g = metacyclic521();
    let mut family: HashSet<Vec<Element>> = HashSet::new();
    for m in 0..5 {
        for r in 0..5 {
            for n in (0..25).filter(|n| n % 5 != 0) {
                for s in 0..25 {
                    let th = metacyclic_aut(&g, m, n, r, s).unwrap();
                    family.insert(th.images().to_vec());
                }
            }
        }
    }
    assert_eq!(family.len(), 12500);
    let brute: HashSet<Vec<Element>> = brute_force_automorphisms(&g)
        .unwrap()
        .into_iter()
        .map(|th| th.images().to_vec())
        .collect();
    assert_eq!(family, brute);
}

#[test]
fn automorphisms_closed_under_composition_and_inverse() {
    for g in [q8(), d8()] {
        let auts = brute_force_automorphisms(&g).unwrap();
        let keys: HashSet<Vec<Element>> =
            auts.iter().map(|th| th.images().to_vec()).collect();
        for th1 in &auts {
            assert!(keys.contains(th1.inverse_aut(&g).images()));
            assert!(th1.compose(&g, &th1.inverse_aut(&g)).is_identity(&g));
            for th2 in &auts {
                assert!(keys.contains(th1.compose(&g, th2).images()));
            }
        }
    }
    // Sampled closure in the metacyclic group, where 12500² compositions
    // would be wasteful.
    let g = metacyclic521();
    let auts = brute_force_automorphisms(&g).unwrap();
    let keys: HashSet<Vec<Element>> = auts.iter().map(|th| th.images().to_vec()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let th1 = &auts[rng.gen_range(0..auts.len())];
        let th2 = &auts[rng.gen_range(0..auts.len())];
        assert!(keys.contains(th1.compose(&g, th2).images()));
        assert!(keys.contains(th1.inverse_aut(&g).images()));
    }
}

/// Any solution of the `x`- and `y`-congruences satisfies the `z`-congruence
/// automatically, so the two-equation solver suffices.
#[test]
fn z_congruence_follows_from_the_other_two() {
    for e in [2u32, 3] {
        let top = 1u64 << e;
        for i1 in 0..top {
            for j1 in 0..top {
                for k1 in 0..top {
                    for i2 in 0..top {
                        for j2 in 0..top {
                            for k2 in 0..top {
                                let c = CongruenceParams::new(e, i1, j1, k1, i2, j2, k2);
                                let (r, s) = c.solve();
                                assert!(c.x_congruence_holds(r, s));
                                assert!(c.y_congruence_holds(r, s));
                                assert!(
                                    c.z_congruence_holds(r, s),
                                    "e={e} params=({i1},{j1},{k1},{i2},{j2},{k2})"
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for e in 4..=10u32 {
        let top = 1u64 << e;
        for _ in 0..2000 {
            let c = CongruenceParams::new(
                e,
                rng.gen_range(0..top),
                rng.gen_range(0..top),
                rng.gen_range(0..top),
                rng.gen_range(0..top),
                rng.gen_range(0..top),
                rng.gen_range(0..top),
            );
            let (r, s) = c.solve();
            assert!(c.x_congruence_holds(r, s));
            assert!(c.y_congruence_holds(r, s));
            assert!(c.z_congruence_holds(r, s), "e={e} params={c:?}");
        }
    }
}

/// `a·θ₀(a)` is the commutator of `a⁻¹` with the returned argument, for
/// every element of either handled shape in the smallest triangle group.
#[test]
fn defect_identity_exhaustive_small() {
    let g = tq2();
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
                    assert_eq!(d, g.multiply(&a, &theta0.apply(&g, &a)));
                    assert_eq!(d, g.commutator(&g.inverse(&a), &arg));
                }
            }
        }
    }
}

/// In the smallest triangle group the centralizer of any element with odd
/// leading exponent is exactly `⟨u⟩·Z(G)`.
#[test]
fn centralizer_is_cyclic_times_centre() {
    let g = tq2();
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
                    let expect = g.closure(&gens).unwrap();
                    assert_eq!(g.centralizer(&u).unwrap(), expect, "u = {u:?}");
                }
            }
        }
    }
}

/// A witness for `(x, y)` exists iff one exists for `(xy, x)` iff one exists
/// for `(xy, y)`, and the transfer moves convert between them.
#[test]
fn transfer_preserves_witness_existence() {
    let groups: Vec<Arc<GroupTable>> = vec![Arc::new(q8()), tq2(), Arc::new(c5c5())];
    let auts: Vec<_> = groups
        .iter()
        .map(|g| brute_force_automorphisms(g).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..10_000 {
        let gi = trial % groups.len();
        let g = &groups[gi];
        let theta = &auts[gi][rng.gen_range(0..auts[gi].len())];
        let x = g.unrank(rng.gen_range(0..g.order()));
        let y = g.unrank(rng.gen_range(0..g.order()));
        let xy = g.multiply(&x, &y);
        let base = inversion_witness(g, theta, &x, &y).unwrap();
        let with_x = inversion_witness(g, theta, &xy, &x).unwrap();
        let with_y = inversion_witness(g, theta, &xy, &y).unwrap();
        assert_eq!(base.is_some(), with_x.is_some());
        assert_eq!(base.is_some(), with_y.is_some());
        if let Some(gw) = base {
            for basis in [TransferBasis::ProductWithX, TransferBasis::ProductWithY] {
                let h = transfer_witness_forward(g, theta, &x, &y, &gw, basis).unwrap();
                transfer_witness(g, theta, &x, &y, &h, basis).unwrap();
            }
        }
        if let Some(h) = with_x {
            transfer_witness(g, theta, &x, &y, &h, TransferBasis::ProductWithX).unwrap();
        }
        if let Some(h) = with_y {
            transfer_witness(g, theta, &x, &y, &h, TransferBasis::ProductWithY).unwrap();
        }
    }
}

#[test]
fn sampled_classifier_agrees_with_exhaustive_on_triangle_group() {
    let g = tq2();
    let auts = brute_force_automorphisms(&g).unwrap();
    let report = classify_structures(&g, &auts).unwrap();
    assert_eq!(report.verdict, Classification::PurelyStronglyReal);
    assert_eq!(report.strongly_real, report.total_structures);
    let sampled = classify_structures_sampled(&g, &auts, 99, 150).unwrap();
    assert_eq!(sampled.samples, 150);
    assert_eq!(sampled.strongly_real, 150);
    assert_eq!(sampled.non_strongly_real, 0);
}
