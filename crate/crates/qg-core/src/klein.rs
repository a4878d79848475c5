//! The Klein map L ↦ [a₁(L), a₂(L)] and its exact inverse.
//!
//! For a Z-basis (v₁, v₂) of L ∩ Z⁴ the two associated points are the
//! traceless parts of v₁·conj(v₂) and conj(v₂)·v₁.  They have equal norm
//! (the discriminant), are congruent mod 2 and pair-primitive, and determine
//! L as the saturated kernel of x ↦ a₁x − xa₂.  The pair is only defined up
//! to simultaneous sign; [`KleinPair`] stores the canonical representative.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::planes::{orthocomplement, RationalPlane, Wedge};
use crate::quat_core::{kernel_saturated, IntScalar, Mat, PureVec, Quat};
use crate::{Error, Int, PureVec3, Quaternion, QuatF64, Result};

/// Equal-norm pair of integer points up to simultaneous sign; stored with
/// the first nonzero coordinate of a₁ positive (ties broken by a₂).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KleinPair {
    pub a1: PureVec3,
    pub a2: PureVec3,
}

fn leading_negative(v: &PureVec3) -> Option<bool> {
    v.coords().iter().find(|x| !x.is_zero()).map(|x| x.is_negative())
}

impl KleinPair {
    /// Canonicalize the simultaneous sign and store the pair.
    pub fn new(a1: PureVec3, a2: PureVec3) -> Self {
        let flip = leading_negative(&a1)
            .or_else(|| leading_negative(&a2))
            .unwrap_or(false);
        if flip {
            KleinPair { a1: -a1, a2: -a2 }
        } else {
            KleinPair { a1, a2 }
        }
    }

    /// Common norm of the two points (the discriminant of the plane).
    pub fn norm(&self) -> Int {
        self.a1.norm()
    }

    /// Both points halved; defined only when every coordinate is even.
    pub fn halved(&self) -> Option<KleinPair> {
        let two = Int::from(2);
        let half = |v: &PureVec3| {
            let c = v.coords();
            c.iter()
                .all(|x| x.mod_floor(&two).is_zero())
                .then(|| PureVec3::new(&c[0] / &two, &c[1] / &two, &c[2] / &two))
        };
        Some(KleinPair::new(half(&self.a1)?, half(&self.a2)?))
    }
}

/// The associated pair of a basis (v₁, v₂): traceless parts of v₁·conj(v₂)
/// and conj(v₂)·v₁.  The scalar part being subtracted is ⟨v₁,v₂⟩, an
/// integer, so no division ever occurs.
pub(crate) fn pair_from_rows(v1: &Quaternion, v2: &Quaternion) -> KleinPair {
    let t1 = v1.clone() * v2.conj();
    let t2 = v2.conj() * v1.clone();
    debug_assert_eq!(t1.x0, t2.x0);
    KleinPair::new(t1.pure_part(), t2.pure_part())
}

/// Klein map on the canonical basis of a plane.
pub fn klein_pair(plane: &RationalPlane) -> KleinPair {
    let (v1, v2) = plane.basis_quats();
    pair_from_rows(&v1, &v2)
}

/// True iff no odd prime divides both vectors and not both (w₁+w₂)/4 and
/// (w₁−w₂)/4 are integral.
pub fn is_pair_primitive(w1: &PureVec3, w2: &PureVec3) -> bool {
    let mut g = Int::from(0);
    for x in w1.coords().iter().chain(w2.coords().iter()) {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return false;
    }
    let two = Int::from(2);
    while g.is_even() {
        g = &g / &two;
    }
    if g != Int::from(1) {
        return false;
    }
    let four = Int::from(4);
    let sum_quartered = w1
        .coords()
        .iter()
        .zip(w2.coords())
        .all(|(a, b)| (a + &b).mod_floor(&four).is_zero());
    let diff_quartered = w1
        .coords()
        .iter()
        .zip(w2.coords())
        .all(|(a, b)| (a - &b).mod_floor(&four).is_zero());
    !(sum_quartered && diff_quartered)
}

/// 4×4 matrix, acting on column coordinates in the basis 1, i, j, k, of the
/// map x ↦ w₁x − xw₂.
pub fn commutator_matrix<T: IntScalar>(w1: &PureVec<T>, w2: &PureVec<T>) -> Mat<T> {
    let q1 = w1.as_quat();
    let q2 = w2.as_quat();
    let mut m = Mat::zero(4, 4);
    for c in 0..4 {
        let e = Quat::<T>::unit(c);
        let col = q1.clone() * e.clone() - e * q2.clone();
        for r in 0..4 {
            m[(r, c)] = col.coord(r).clone();
        }
    }
    m
}

/// Inverse Klein map: the saturated kernel of x ↦ w₁x − xw₂ as a canonical
/// plane.  Requires nonzero equal-norm pair-primitive input; the round trip
/// klein_pair(inverse_klein(w₁,w₂)) gives back (w₁,w₂) when w₁ ≡ w₂ mod 2
/// and (2w₁,2w₂) otherwise, up to simultaneous sign.
pub fn inverse_klein(w1: &PureVec3, w2: &PureVec3) -> Result<RationalPlane> {
    if w1.is_zero() || w2.is_zero() {
        return Err(Error::ZeroVector);
    }
    let (n1, n2) = (w1.norm(), w2.norm());
    if n1 != n2 {
        return Err(Error::UnequalNorms(n1.to_string(), n2.to_string()));
    }
    if !is_pair_primitive(w1, w2) {
        return Err(Error::NotPairPrimitive);
    }
    let k = kernel_saturated(&commutator_matrix(w1, w2));
    assert_eq!(
        k.rows(),
        2,
        "kernel of an equal-norm nonzero pure pair has rank 2"
    );
    Ok(RationalPlane::from_hnf_basis(k))
}

/// Pure wedge reconstructed from an associated pair with a₁ ≡ a₂ mod 2:
/// ½(−(a₁+a₂)₁, −(a₁+a₂)₂, −(a₁+a₂)₃, (a₂−a₁)₃, (a₁−a₂)₂, (a₂−a₁)₁).
/// Agrees with the wedge of the canonical basis of the plane up to sign.
pub fn wedge_from_pair(a1: &PureVec3, a2: &PureVec3) -> Result<Wedge> {
    let two = Int::from(2);
    let s = a1.clone() + a2.clone();
    let d = a2.clone() - a1.clone();
    for x in s.coords().iter().chain(d.coords().iter()) {
        if !x.mod_floor(&two).is_zero() {
            return Err(Error::ParityMismatch);
        }
    }
    let sc = s.coords();
    let dc = d.coords();
    Ok(Wedge([
        -&sc[0] / &two,
        -&sc[1] / &two,
        -&sc[2] / &two,
        &dc[2] / &two,
        -&dc[1] / &two,
        &dc[0] / &two,
    ]))
}

/// The pair of the orthogonal complement: [a₁, −a₂].
pub fn orthogonal_pair(k: &KleinPair) -> KleinPair {
    KleinPair::new(k.a1.clone(), -k.a2.clone())
}

/// An integral g ≠ 0 with g·a₁·g⁻¹ = a₂, found among conjugates of small
/// plane elements (any x ∈ L of nonzero norm gives g = conj(x), because
/// a₁x = xa₂ holds identically on L).
pub fn conjugator(plane: &RationalPlane) -> Quaternion {
    let pair = klein_pair(plane);
    let a1q = pair.a1.as_quat();
    let a2q = pair.a2.as_quat();
    let (v1, v2) = plane.basis_quats();
    let sum = v1.clone() + v2.clone();
    for x in [v1, v2, sum] {
        if x.norm().is_zero() {
            continue;
        }
        let g = x.conj();
        if g.clone() * a1q.clone() == a2q.clone() * g.clone() {
            return g;
        }
    }
    unreachable!("every plane basis vector has positive norm and conjugates a₁ to a₂");
}

fn quat_to_f64(q: &Quaternion) -> QuatF64 {
    let f = |x: &Int| x.to_f64().expect("coordinate fits in f64");
    QuatF64::new(f(&q.x0), f(&q.x1), f(&q.x2), f(&q.x3))
}

fn inv_f64(q: &QuatF64) -> QuatF64 {
    let n = q.norm();
    q.conj().scale(&(1.0 / n))
}

fn residual(a: &QuatF64, x: &QuatF64, b_inv: &QuatF64, target: &QuatF64) -> f64 {
    let moved = a.clone() * x.clone() * b_inv.clone() - target.clone();
    moved.norm().sqrt()
}

/// Numeric check that (h, ghg⁻¹) fixes L pointwise and (h, gh⁻¹g⁻¹) fixes
/// L⊥ pointwise, where h = cos θ + sin θ·a₁/√D and g is the conjugator.
/// Returns the maximal residual; errors if it exceeds `tol`.
pub fn twist_check(plane: &RationalPlane, theta: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParam("tolerance must be positive".into()));
    }
    let pair = klein_pair(plane);
    let d = plane.disc.to_f64().expect("disc fits in f64");
    let scale = theta.sin() / d.sqrt();
    let a1 = pair.a1.coords().map(|x| x.to_f64().expect("fits") * scale);
    let h = QuatF64::new(theta.cos(), a1[0], a1[1], a1[2]);
    let g = quat_to_f64(&conjugator(plane));
    let g_inv = inv_f64(&g);
    let beta_l = g.clone() * h.clone() * g_inv.clone();
    let beta_lp = g.clone() * inv_f64(&h) * g_inv.clone();

    let mut max_res = 0.0f64;
    let (v1, v2) = plane.basis_quats();
    let beta_l_inv = inv_f64(&beta_l);
    for v in [&v1, &v2] {
        let x = quat_to_f64(v);
        max_res = max_res.max(residual(&h, &x, &beta_l_inv, &x));
    }
    let perp = orthocomplement(plane);
    let (w1, w2) = perp.basis_quats();
    let beta_lp_inv = inv_f64(&beta_lp);
    for w in [&w1, &w2] {
        let x = quat_to_f64(w);
        max_res = max_res.max(residual(&h, &x, &beta_lp_inv, &x));
    }
    if max_res > tol {
        return Err(Error::TwistExceedsTol {
            plane: format!("{:?}", plane.basis.row_vecs()),
            residual: max_res,
        });
    }
    Ok(max_res)
}

/// Exponent pairs (m, n) of the four split-case isogenies
/// (s,t) ↦ s^m t^n: st⁻¹, st, s², t².
pub fn split_case_isogeny_table() -> [(i64, i64); 4] {
    [(1, -1), (1, 1), (2, 0), (0, 2)]
}
