//! Rational planes in Z⁴ and their enumeration by discriminant.
//!
//! A rational plane is stored as the canonical HNF basis of the saturated
//! rank-2 sublattice L ∩ Z⁴, together with its primitive Plücker wedge and
//! discriminant disc(L) = det Gram = ‖v₁∧v₂‖².  Enumeration of R_D runs
//! over pairs of integer points on the sphere of radius √D (congruent mod 2
//! and pair-primitive, up to simultaneous sign) and maps each pair through
//! the inverse Klein kernel; an independent Plücker-quadric brute force
//! serves as the validation oracle.
//!
//! The sweep internals run over machine integers (pair coordinates are
//! bounded by 2√D at desk scale); the kernel step widens to i128 and
//! certifies its output exactly, because Smith reduction can push
//! transformation entries past i64 even for small inputs.  The public
//! types stay exact.

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::forms_cm::BinaryForm;
use crate::quat_core::{content, kernel_saturated, Mat};
use crate::{Error, Int, IntMatrix, PureVec3, Quaternion, Result};

/// Plücker coordinates of a 2-plane, in the basis
/// 1∧i, 1∧j, 1∧k, i∧j, i∧k, j∧k.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wedge(pub [Int; 6]);

impl Wedge {
    pub fn norm(&self) -> Int {
        self.0.iter().map(|x| x * x).sum()
    }

    /// x₁₂x₃₄ − x₁₃x₂₄ + x₁₄x₂₃; zero exactly on pure wedges.
    pub fn plucker_relation(&self) -> Int {
        let w = &self.0;
        &w[0] * &w[5] - &w[1] * &w[4] + &w[2] * &w[3]
    }

    pub fn is_pure(&self) -> bool {
        self.plucker_relation().is_zero()
    }

    /// Flip the global sign so the first nonzero coordinate is positive.
    pub fn canonical_sign(mut self) -> Self {
        if let Some(first) = self.0.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                for x in self.0.iter_mut() {
                    *x = -x.clone();
                }
            }
        }
        self
    }

    fn from_i64(w: [i64; 6]) -> Self {
        Wedge(w.map(Int::from))
    }
}

/// Wedge v₁∧v₂ of two integer 4-vectors (rows), Plücker coordinate order
/// as in [`Wedge`].
fn wedge_of_rows(v1: &[Int], v2: &[Int]) -> Wedge {
    let p = |a: usize, b: usize| &v1[a] * &v2[b] - &v1[b] * &v2[a];
    Wedge([p(0, 1), p(0, 2), p(0, 3), p(1, 2), p(1, 3), p(2, 3)])
}

/// Saturated rank-2 sublattice of Z⁴ in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPlane {
    /// 2×4 basis in row HNF; rows are a Z-basis of L ∩ Z⁴.
    pub basis: IntMatrix,
    /// disc(L) = det Gram(basis) = ‖wedge‖².
    pub disc: Int,
    /// Primitive sign-canonical Plücker vector of the basis.
    pub wedge: Wedge,
}

impl RationalPlane {
    /// Wrap a basis already in HNF whose rows span a saturated sublattice.
    pub(crate) fn from_hnf_basis(basis: IntMatrix) -> Self {
        debug_assert_eq!((basis.rows(), basis.cols()), (2, 4));
        let wedge = wedge_of_rows(basis.row(0), basis.row(1)).canonical_sign();
        debug_assert!(wedge.is_pure());
        debug_assert_eq!(
            content(&wedge.0.to_vec()).expect("nonzero wedge"),
            Int::from(1),
            "saturated plane must have a primitive wedge"
        );
        let disc = wedge.norm();
        debug_assert_eq!(disc, gram_det(&basis));
        RationalPlane { basis, disc, wedge }
    }

    /// Basis rows as quaternions (v₁, v₂).
    pub fn basis_quats(&self) -> (Quaternion, Quaternion) {
        let q = |r: &[Int]| {
            Quaternion::new(r[0].clone(), r[1].clone(), r[2].clone(), r[3].clone())
        };
        (q(self.basis.row(0)), q(self.basis.row(1)))
    }
}

fn dot(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_det(basis: &IntMatrix) -> Int {
    let (v1, v2) = (basis.row(0), basis.row(1));
    let (g11, g12, g22) = (dot(v1, v1), dot(v1, v2), dot(v2, v2));
    &g11 * &g22 - &g12 * &g12
}

/// Canonical saturated plane spanned by two independent quaternions.
///
/// Saturation goes through the orthogonal complement twice: the kernel of
/// the span matrix is (span)⊥ ∩ Z⁴, and its kernel in turn is the saturation
/// of the span (the pairing is positive definite).
pub fn plane_from_span(v1: &Quaternion, v2: &Quaternion) -> Result<RationalPlane> {
    let rows = vec![
        vec![v1.x0.clone(), v1.x1.clone(), v1.x2.clone(), v1.x3.clone()],
        vec![v2.x0.clone(), v2.x1.clone(), v2.x2.clone(), v2.x3.clone()],
    ];
    let perp = kernel_saturated(&Mat::from_rows(rows));
    if perp.rows() != 2 {
        return Err(Error::DependentSpan);
    }
    Ok(RationalPlane::from_hnf_basis(kernel_saturated(&perp)))
}

pub fn discriminant(plane: &RationalPlane) -> Int {
    plane.disc.clone()
}

/// Saturated orthogonal complement L⊥ ∩ Z⁴.
pub fn orthocomplement(plane: &RationalPlane) -> RationalPlane {
    RationalPlane::from_hnf_basis(kernel_saturated(&plane.basis))
}

/// Gram form (Q(v₁), 2⟨v₁,v₂⟩, Q(v₂)) of the canonical basis; its classical
/// discriminant b²−4ac equals −4·disc(plane).
pub fn gram_form(plane: &RationalPlane) -> BinaryForm {
    let (v1, v2) = (plane.basis.row(0), plane.basis.row(1));
    let two = Int::from(2);
    BinaryForm::new(dot(v1, v1), two * dot(v1, v2), dot(v2, v2))
}

/// The lattice v⊥ ∩ Z³ with its Gram form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthoLattice3 {
    pub v: PureVec3,
    /// 2×3 basis in row HNF, saturated.
    pub basis: IntMatrix,
    pub gram_form: BinaryForm,
}

pub fn ortho_lattice(v: &PureVec3) -> Result<OrthoLattice3> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let m = Mat::from_rows(vec![v.coords().to_vec()]);
    let basis = kernel_saturated(&m);
    debug_assert_eq!(basis.rows(), 2);
    let (b1, b2) = (basis.row(0), basis.row(1));
    let two = Int::from(2);
    let gram_form = BinaryForm::new(dot(b1, b1), two * dot(b1, b2), dot(b2, b2));
    Ok(OrthoLattice3 {
        v: v.clone(),
        basis,
        gram_form,
    })
}

/// All integer points (x, y, z) with x²+y²+z² = D, lexicographic.
pub fn enumerate_sphere(d: i64) -> Vec<PureVec3> {
    assert!(d >= 1, "sphere radius² must be positive");
    fast::sphere_points(d)
        .into_iter()
        .map(|[x, y, z]| PureVec3::new(Int::from(x), Int::from(y), Int::from(z)))
        .collect()
}

/// R_D: every saturated plane of discriminant D, canonically sorted.
///
/// Pairs on the sphere of radius √D (congruent mod 2, pair-primitive, up to
/// simultaneous sign) map bijectively onto R_D.  For 4 | D every point on
/// that sphere has all-even coordinates, so the same planes arise a second
/// time from the sphere of radius √(D/4) via pairs that are incongruent
/// mod 2; both constructions run and their agreement is asserted.
pub fn enumerate_planes(d: i64) -> Vec<RationalPlane> {
    assert!(d >= 1, "discriminant must be positive");
    let mut bases = fast::plane_bases_from_sphere_pairs(d);
    bases.sort_unstable();
    if d % 4 == 0 {
        let mut quarter = fast::plane_bases_from_quarter_pairs(d / 4);
        quarter.sort_unstable();
        assert_eq!(
            bases, quarter,
            "the two enumeration branches must produce identical planes for 4 | D"
        );
    }
    bases.dedup();
    bases
        .into_iter()
        .map(|b| {
            let rows = b.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect();
            RationalPlane::from_hnf_basis(Mat::from_rows(rows))
        })
        .collect()
}

/// Whether R_D is nonempty, by early-exit pair scanning (no plane is built).
pub fn planes_exist(d: i64) -> bool {
    assert!(d >= 1);
    fast::any_valid_pair(d)
}

/// Independent count of R_D: primitive integer 6-vectors of norm² = D on
/// the Plücker quadric, up to sign.  Gated to D ≤ 500 (O(D^{5/2}) loops).
pub fn enumerate_planes_wedge_oracle(d: i64) -> (usize, Vec<Wedge>) {
    assert!((1..=500).contains(&d), "wedge oracle is gated to D ≤ 500");
    let mut found: Vec<[i64; 6]> = Vec::new();
    // Depth-first over the six coordinates with remaining-norm pruning;
    // sign classes are halved by requiring the first nonzero coordinate
    // positive (the all-zero vector fails the gcd test).
    let mut w = [0i64; 6];
    fn rec(w: &mut [i64; 6], idx: usize, rem: i64, any_nonzero: bool, out: &mut Vec<[i64; 6]>) {
        if idx == 6 {
            if rem == 0 {
                let plucker = w[0] * w[5] - w[1] * w[4] + w[2] * w[3];
                if plucker == 0 && gcd6(w) == 1 {
                    out.push(*w);
                }
            }
            return;
        }
        let s = rem.isqrt();
        let lo = if any_nonzero { -s } else { 0 };
        for x in lo..=s {
            w[idx] = x;
            rec(w, idx + 1, rem - x * x, any_nonzero || x > 0, out);
        }
        w[idx] = 0;
    }
    rec(&mut w, 0, d, false, &mut found);
    found.sort_unstable();
    let wedges: Vec<Wedge> = found.into_iter().map(Wedge::from_i64).collect();
    (wedges.len(), wedges)
}

fn gcd6(w: &[i64; 6]) -> i64 {
    let mut g = 0i64;
    for &x in w {
        g = gcd_i64(g, x);
    }
    g
}

pub(crate) fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `i64` sweep internals shared by the enumeration entry points.
pub(crate) mod fast {
    use super::*;

    pub(crate) fn sphere_points(d: i64) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        let sx = d.isqrt();
        for x in -sx..=sx {
            let rx = d - x * x;
            let sy = rx.isqrt();
            for y in -sy..=sy {
                let rz = rx - y * y;
                let z = rz.isqrt();
                if z * z == rz {
                    if z == 0 {
                        out.push([x, y, 0]);
                    } else {
                        out.push([x, y, -z]);
                        out.push([x, y, z]);
                    }
                }
            }
        }
        out
    }

    pub(crate) fn first_nonzero_positive(v: &[i64; 3]) -> bool {
        for &c in v {
            if c != 0 {
                return c > 0;
            }
        }
        false
    }

    pub(crate) fn congruent_mod2(v: &[i64; 3], w: &[i64; 3]) -> bool {
        (0..3).all(|i| (v[i] - w[i]) & 1 == 0)
    }

    pub(crate) fn pair_primitive(v: &[i64; 3], w: &[i64; 3]) -> bool {
        let mut g = 0i64;
        for &c in v.iter().chain(w.iter()) {
            g = gcd_i64(g, c);
        }
        if g == 0 {
            return false;
        }
        // no odd prime divides both vectors
        if (g >> g.trailing_zeros()) != 1 {
            return false;
        }
        // not both (v+w)/4 and (v−w)/4 integral
        let quartered = (0..3).all(|i| (v[i] + w[i]) & 3 == 0)
            && (0..3).all(|i| (v[i] - w[i]) & 3 == 0);
        !quartered
    }

    /// HNF basis rows of the saturated kernel of x ↦ w₁x − xw₂.
    ///
    /// The kernel runs over i128: Smith reduction occasionally pushes
    /// transformation entries past i64 even for sphere-sized inputs (first
    /// seen at D = 1811).  The output is certified exactly and anything
    /// suspect is recomputed over BigInt, so a silently wrapped intermediate
    /// in an unchecked build cannot escape.
    pub(crate) fn plane_basis(w1: &[i64; 3], w2: &[i64; 3]) -> [[i64; 4]; 2] {
        use crate::quat_core::PureVec;
        let p1 = PureVec::new(w1[0] as i128, w1[1] as i128, w1[2] as i128);
        let p2 = PureVec::new(w2[0] as i128, w2[1] as i128, w2[2] as i128);
        let m = crate::klein::commutator_matrix(&p1, &p2);
        let k = kernel_saturated(&m);
        if k.rows() == 2 {
            let mut b = [[0i64; 4]; 2];
            let fits = (0..2).all(|r| {
                (0..4).all(|c| match i64::try_from(k[(r, c)].clone()) {
                    Ok(x) => {
                        b[r][c] = x;
                        true
                    }
                    Err(_) => false,
                })
            });
            if fits && certified_kernel_basis(&m, &b) {
                return b;
            }
        }
        plane_basis_exact(w1, w2)
    }

    /// Exact post-check of a claimed kernel basis: rows lie in the kernel,
    /// the wedge is primitive (so the span is saturated), and the matrix is
    /// in canonical row HNF.  The kernel of a nonzero equal-norm pure pair
    /// is 2-dimensional, so a saturated rank-2 sublattice of it is the whole
    /// saturated kernel.  Every product here fits i128 for arbitrary i64
    /// basis entries and sphere-sized matrix entries.
    fn certified_kernel_basis(m: &Mat<i128>, b: &[[i64; 4]; 2]) -> bool {
        for row in b {
            for i in 0..4 {
                let s: i128 = (0..4).map(|j| m[(i, j)] * row[j] as i128).sum();
                if s != 0 {
                    return false;
                }
            }
        }
        let minor = |i: usize, j: usize| {
            b[0][i] as i128 * b[1][j] as i128 - b[0][j] as i128 * b[1][i] as i128
        };
        let mut g = 0i128;
        for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            g = num_integer::gcd(g, minor(i, j));
        }
        if g != 1 {
            return false;
        }
        let pivot = |r: &[i64; 4]| r.iter().position(|&x| x != 0);
        let (Some(c0), Some(c1)) = (pivot(&b[0]), pivot(&b[1])) else {
            return false;
        };
        c0 < c1 && b[0][c0] > 0 && b[1][c1] > 0 && b[0][c1] >= 0 && b[0][c1] < b[1][c1]
    }

    /// BigInt recomputation for a result the i128 path could not certify.
    fn plane_basis_exact(w1: &[i64; 3], w2: &[i64; 3]) -> [[i64; 4]; 2] {
        let big = |w: &[i64; 3]| {
            PureVec3::new(Int::from(w[0]), Int::from(w[1]), Int::from(w[2]))
        };
        let k = kernel_saturated(&crate::klein::commutator_matrix(&big(w1), &big(w2)));
        assert_eq!(
            k.rows(),
            2,
            "kernel of a nonzero equal-norm pure pair has rank 2"
        );
        let mut b = [[0i64; 4]; 2];
        for r in 0..2 {
            for c in 0..4 {
                b[r][c] = k[(r, c)]
                    .to_i64()
                    .expect("saturated kernel bases stay far inside i64");
            }
        }
        b
    }

    fn pairs_to_bases(pairs: Vec<([i64; 3], [i64; 3])>) -> Vec<[[i64; 4]; 2]> {
        if pairs.len() > 64 {
            pairs.par_iter().map(|(v, w)| plane_basis(v, w)).collect()
        } else {
            pairs.iter().map(|(v, w)| plane_basis(v, w)).collect()
        }
    }

    pub(crate) fn plane_bases_from_sphere_pairs(d: i64) -> Vec<[[i64; 4]; 2]> {
        let pts = sphere_points(d);
        let mut pairs = Vec::new();
        for v in pts.iter().filter(|v| first_nonzero_positive(v)) {
            for w in &pts {
                if congruent_mod2(v, w) && pair_primitive(v, w) {
                    pairs.push((*v, *w));
                }
            }
        }
        pairs_to_bases(pairs)
    }

    pub(crate) fn plane_bases_from_quarter_pairs(dq: i64) -> Vec<[[i64; 4]; 2]> {
        let pts = sphere_points(dq);
        let mut pairs = Vec::new();
        for v in pts.iter().filter(|v| first_nonzero_positive(v)) {
            for w in &pts {
                if !congruent_mod2(v, w) && pair_primitive(v, w) {
                    pairs.push((*v, *w));
                }
            }
        }
        pairs_to_bases(pairs)
    }

    pub(crate) fn any_valid_pair(d: i64) -> bool {
        let pts = sphere_points(d);
        for v in pts.iter().filter(|v| first_nonzero_positive(v)) {
            for w in &pts {
                if congruent_mod2(v, w) && pair_primitive(v, w) {
                    return true;
                }
            }
        }
        false
    }
}

/// Largest square divisor decomposition D = D′·f² with D′ square-free.
pub(crate) fn squarefree_decompose(d: i64) -> (i64, i64) {
    let mut dp = d;
    let mut f = 1i64;
    let mut p = 2i64;
    while p * p <= dp {
        while dp % (p * p) == 0 {
            dp /= p * p;
            f *= p;
        }
        p += 1;
    }
    (dp, f)
}

/// Whether d ≥ 1 has no repeated prime factor.
pub fn is_squarefree(d: i64) -> bool {
    squarefree_decompose(d).1 == 1
}

/// D ∈ 𝔻 ⟺ D mod 16 ∉ {0, 7, 12, 15}; the discriminants with R_D ≠ ∅.
pub fn in_disc_set(d: i64) -> bool {
    d >= 1 && !matches!(d % 16, 0 | 7 | 12 | 15)
}
