//! Cross-module checks of the plane ↔ point-pair correspondence: round
//! trips from randomly generated spans, unit-pair equivariance, and the
//! orthocomplement and wedge reconstruction identities.

use num_traits::Zero;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use qg_core::klein::{inverse_klein, klein_pair, orthogonal_pair, wedge_from_pair, KleinPair};
use qg_core::planes::{
    discriminant, enumerate_planes, gram_form, orthocomplement, plane_from_span,
};
use qg_core::{Int, PureVec3, Quaternion};

fn quat(c: [i64; 4]) -> Quaternion {
    Quaternion::new(c[0].into(), c[1].into(), c[2].into(), c[3].into())
}

proptest! {
    /// Any saturated plane built from a random span round-trips through its
    /// associated pair, and the pair carries the plane's discriminant twice.
    #[test]
    fn random_span_round_trip(coords in prop::array::uniform8(-12i64..=12)) {
        let v1 = quat([coords[0], coords[1], coords[2], coords[3]]);
        let v2 = quat([coords[4], coords[5], coords[6], coords[7]]);
        let Ok(plane) = plane_from_span(&v1, &v2) else {
            return Ok(());
        };
        let k = klein_pair(&plane);
        let d = discriminant(&plane);
        prop_assert_eq!(k.a1.norm(), d.clone());
        prop_assert_eq!(k.a2.norm(), d.clone());
        prop_assert_eq!(discriminant(&orthocomplement(&plane)), d);
        let back = inverse_klein(&k.a1, &k.a2).expect("pair of a plane is admissible");
        prop_assert_eq!(&back, &plane);
        prop_assert_eq!(klein_pair(&back), k);
    }
}

/// The 24 Hurwitz units, stored doubled so every coordinate is an integer.
fn doubled_units() -> Vec<Quaternion> {
    let mut out = Vec::new();
    for c in 0..4 {
        for s in [2i64, -2] {
            let mut q = [0i64; 4];
            q[c] = s;
            out.push(quat(q));
        }
    }
    for s0 in [1i64, -1] {
        for s1 in [1i64, -1] {
            for s2 in [1i64, -1] {
                for s3 in [1i64, -1] {
                    out.push(quat([s0, s1, s2, s3]));
                }
            }
        }
    }
    out
}

/// v ↦ αvᾱ through the doubled representative 2α, so the division by
/// N(2α) = 4 is exact.
fn conj_pure(da: &Quaternion, v: &PureVec3) -> PureVec3 {
    let four = Int::from(4);
    let w = da.clone() * v.as_quat() * da.conj();
    assert!(w.coord(0).is_zero());
    let c = |i: usize| {
        let x = w.coord(i);
        assert!((x % &four).is_zero(), "unit conjugation stays integral");
        x / &four
    };
    PureVec3::new(c(1), c(2), c(3))
}

/// klein_pair(α·L·β̄) = (α a₁ ᾱ, β a₂ β̄) as canonical sign-classes, for
/// unit pairs whose two-sided action preserves Z⁴ (αβ̄ of integer type:
/// the index-3 subgroup where the conjugated span needs no rescaling).
#[test]
fn unit_pair_equivariance() {
    let units = doubled_units();
    let four = Int::from(4);
    let integral_pairs: Vec<(usize, usize)> = (0..units.len())
        .flat_map(|a| (0..units.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| {
            let prod = units[a].clone() * units[b].conj();
            (0..4).all(|i| (prod.coord(i) % &four).is_zero())
        })
        .collect();
    assert_eq!(integral_pairs.len(), 192);

    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed);
    let mut checked = 0;
    for d in [3i64, 5, 20, 50] {
        let planes = enumerate_planes(d);
        for plane in planes.iter().step_by(planes.len().div_ceil(4).max(1)) {
            let (v1, v2) = plane.basis_quats();
            let k = klein_pair(plane);
            for _ in 0..25 {
                let &(ai, bi) = integral_pairs.choose(&mut rng).unwrap();
                let (a, b) = (&units[ai], &units[bi]);
                let moved = plane_from_span(
                    &(a.clone() * v1.clone() * b.conj()),
                    &(a.clone() * v2.clone() * b.conj()),
                )
                .expect("unit action preserves independence");
                assert_eq!(discriminant(&moved), plane.disc);
                let expect = KleinPair::new(conj_pure(a, &k.a1), conj_pure(b, &k.a2));
                assert_eq!(klein_pair(&moved), expect, "D = {d}, pair ({ai},{bi})");
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 100 * 4);
}

/// Φ(L⊥) = [a₁, −a₂]: the orthocomplement's pair is the orthogonal pair.
#[test]
fn orthocomplement_flips_second_point() {
    for d in [1i64, 2, 3, 4, 5, 6, 8, 20, 50] {
        for plane in enumerate_planes(d) {
            let k = klein_pair(&plane);
            assert_eq!(klein_pair(&orthocomplement(&plane)), orthogonal_pair(&k));
        }
    }
}

/// For planes whose pair satisfies a₁ ≡ a₂ mod 2 the wedge rebuilt from the
/// pair alone matches the basis wedge as a sign-class, and its norm check
/// closes the loop with the Gram discriminant.
#[test]
fn wedge_reconstruction_matches_basis_wedge() {
    let two = Int::from(2);
    let mut rebuilt = 0;
    for d in [1i64, 2, 3, 5, 6, 10, 13, 50] {
        for plane in enumerate_planes(d) {
            let k = klein_pair(&plane);
            let congruent = k
                .a1
                .coords()
                .iter()
                .zip(k.a2.coords())
                .all(|(x, y)| ((x - &y) % &two).is_zero());
            if !congruent {
                continue;
            }
            let w = wedge_from_pair(&k.a1, &k.a2).unwrap();
            assert_eq!(
                w.clone().canonical_sign(),
                plane.wedge.clone().canonical_sign(),
                "D = {d}"
            );
            assert_eq!(w.norm(), plane.disc);
            assert_eq!(gram_form(&plane).disc(), Int::from(-4) * &plane.disc);
            rebuilt += 1;
        }
    }
    assert!(rebuilt > 100, "the congruent case must be well represented");
}
