//! The Σ-set of a pair — all conjugates of the three cyclic subgroups
//! `⟨x⟩, ⟨y⟩, ⟨xy⟩` — checked against a direct double-loop construction,
//! plus its symmetry and conjugation invariance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use beauville_core::beauville::sigma;
use beauville_core::families::{construct, FamilyParams};
use beauville_core::pcgroup::{parse, Element, ElementSet, GroupTable};

/// Σ by brute force: conjugate every power of x, y and xy by every group
/// element.
fn naive_sigma(g: &GroupTable, x: &Element, y: &Element) -> ElementSet {
    let mut out = ElementSet::empty(g.order());
    for base in [x.clone(), y.clone(), g.multiply(x, y)] {
        let mut u = g.identity();
        loop {
            for h in 0..g.order() {
                out.insert(g.rank(&g.conjugate(&u, &g.unrank(h))));
            }
            u = g.multiply(&u, &base);
            if u.is_identity() {
                break;
            }
        }
    }
    out
}

#[test]
fn sigma_matches_naive_on_all_quaternion_pairs() {
    let g = GroupTable::build(
        parse(
            "prime 2; gen a order 2; gen b order 2; gen c order 2;\n\
             pow a = c; pow b = c;\n\
             conj b^a = b c;",
        )
        .unwrap(),
    )
    .unwrap();
    for rx in 0..g.order() {
        for ry in 0..g.order() {
            let (x, y) = (g.unrank(rx), g.unrank(ry));
            assert_eq!(*sigma(&g, &x, &y).unwrap(), naive_sigma(&g, &x, &y));
        }
    }
}

#[test]
fn sigma_matches_naive_on_sampled_pairs() {
    let groups = [
        construct(&FamilyParams::Metacyclic { p: 5, e: 2, i: 1 }).unwrap(),
        construct(&FamilyParams::TriangleQuotient { e: 2 }).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for g in &groups {
        for _ in 0..20 {
            let x = g.unrank(rng.gen_range(0..g.order()));
            let y = g.unrank(rng.gen_range(0..g.order()));
            assert_eq!(*sigma(g, &x, &y).unwrap(), naive_sigma(g, &x, &y));
        }
    }
}

#[test]
fn sigma_is_symmetric_and_conjugation_invariant() {
    let g = construct(&FamilyParams::TriangleQuotient { e: 2 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..40 {
        let x = g.unrank(rng.gen_range(0..g.order()));
        let y = g.unrank(rng.gen_range(0..g.order()));
        let h = g.unrank(rng.gen_range(0..g.order()));
        // Σ(y, x) uses ⟨yx⟩ instead of ⟨xy⟩, but yx is a conjugate of xy,
        // so the union over all conjugates agrees.
        assert_eq!(sigma(&g, &x, &y).unwrap(), sigma(&g, &y, &x).unwrap());
        assert_eq!(
            sigma(&g, &g.conjugate(&x, &h), &g.conjugate(&y, &h)).unwrap(),
            sigma(&g, &x, &y).unwrap()
        );
    }
}
