//! Binary quadratic forms: reduction, CM points, Gauss composition, class
//! groups, and the coherence check tying the four form classes of a plane
//! to the class group of discriminant −4D.
//!
//! Proper (SL₂) classes carry the group law; the GL₂ class of a form is its
//! proper class merged with the opposite class, and CM points are keyed by
//! the GL₂-reduced representative so equality is exact integer equality.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::klein::klein_pair;
use crate::planes::{
    enumerate_planes, gram_form, in_disc_set, is_squarefree, orthocomplement, ortho_lattice,
};
use crate::{Error, Int, Result};

/// ax² + bxy + cy², positive definite wherever it represents a lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryForm {
    pub a: Int,
    pub b: Int,
    pub c: Int,
}

impl BinaryForm {
    pub fn new(a: impl Into<Int>, b: impl Into<Int>, c: impl Into<Int>) -> Self {
        BinaryForm {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    pub fn coeffs(&self) -> (Int, Int, Int) {
        (self.a.clone(), self.b.clone(), self.c.clone())
    }

    /// Classical discriminant b² − 4ac.
    pub fn disc(&self) -> Int {
        &self.b * &self.b - Int::from(4) * &self.a * &self.c
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a.is_positive() && self.disc().is_negative()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn eval(&self, x: &Int, y: &Int) -> Int {
        &self.a * x * x + &self.b * x * y + &self.c * y * y
    }
}

/// gcd(a, b, c); the zero form has none.
pub fn form_content(f: &BinaryForm) -> Result<Int> {
    if f.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(f.a.gcd(&f.b).gcd(&f.c))
}

/// Largest k with pᵏ dividing the content.
pub fn ord_p_form(f: &BinaryForm, p: &Int) -> Result<u32> {
    let mut g = form_content(f)?;
    let mut k = 0;
    while g.mod_floor(p).is_zero() {
        g /= p;
        k += 1;
    }
    Ok(k)
}

/// The form divided by its content.
pub fn primitivize(f: &BinaryForm) -> Result<BinaryForm> {
    let g = form_content(f)?;
    Ok(BinaryForm {
        a: &f.a / &g,
        b: &f.b / &g,
        c: &f.c / &g,
    })
}

/// (a, −b, c): a representative of the inverse proper class.
pub fn opposite(f: &BinaryForm) -> BinaryForm {
    BinaryForm {
        a: f.a.clone(),
        b: -f.b.clone(),
        c: f.c.clone(),
    }
}

/// The identity class: x² − (Δ/4)y² or x² + xy + ((1−Δ)/4)y².
pub fn principal_form(delta: &Int) -> Result<BinaryForm> {
    check_discriminant(delta)?;
    let four = Int::from(4);
    Ok(if delta.mod_floor(&four).is_zero() {
        BinaryForm::new(Int::one(), Int::zero(), -delta / &four)
    } else {
        BinaryForm::new(Int::one(), Int::one(), (Int::one() - delta) / &four)
    })
}

fn check_discriminant(delta: &Int) -> Result<()> {
    let r = delta.mod_floor(&Int::from(4));
    if delta.is_negative() && (r.is_zero() || r.is_one()) {
        Ok(())
    } else {
        Err(Error::InvalidDiscriminant(delta.to_string()))
    }
}

/// Substitute (x, y) ↦ (px + qy, rx + sy) for a matrix [[p, q], [r, s]]
/// of determinant ±1.
pub fn apply_unimodular(f: &BinaryForm, m: [[i64; 2]; 2]) -> Result<BinaryForm> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det != 1 && det != -1 {
        return Err(Error::InvalidParam(format!(
            "substitution matrix has determinant {det}, need ±1"
        )));
    }
    let [p, q] = m[0].map(Int::from);
    let [r, s] = m[1].map(Int::from);
    let a = f.eval(&p, &r);
    let c = f.eval(&q, &s);
    let b = Int::from(2) * &f.a * &p * &q + &f.b * (&p * &s + &q * &r) + Int::from(2) * &f.c * &r * &s;
    Ok(BinaryForm { a, b, c })
}

/// Gaussian reduction to the canonical proper representative:
/// −a < b ≤ a ≤ c, with b ≥ 0 when a = c.
pub fn reduce_sl2(f: &BinaryForm) -> Result<BinaryForm> {
    if !f.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let disc = f.disc();
    let (mut a, mut b, mut c) = (f.a.clone(), f.b.clone(), f.c.clone());
    loop {
        let two_a = &a * Int::from(2);
        let mut r = b.mod_floor(&two_a);
        if r > a {
            r -= &two_a;
        }
        if r != b {
            b = r;
            c = (&b * &b - &disc) / (&a * Int::from(4));
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
        } else {
            break;
        }
    }
    if a == c && b.is_negative() {
        b = -b;
    }
    Ok(BinaryForm { a, b, c })
}

/// GL₂(Z)-canonical representative 0 ≤ b ≤ a ≤ c: the proper reduction
/// followed by the orientation-reversing sign flip on b.
pub fn reduce_gl2(f: &BinaryForm) -> Result<BinaryForm> {
    let mut g = reduce_sl2(f)?;
    if g.b.is_negative() {
        g.b = -g.b;
    }
    Ok(g)
}

/// A CM point on the modular surface, keyed by the GL₂-reduced primitive
/// form of its lattice shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CMPoint {
    pub reduced: BinaryForm,
}

impl CMPoint {
    /// Fundamental-domain coordinates (x, y) with z = x + iy: x = b/(2a)
    /// ∈ [0, 1/2], y = √(4ac − b²)/(2a) > 0, and x² + y² = c/a ≥ 1.
    pub fn z(&self) -> (f64, f64) {
        let f = |v: &Int| v.to_f64().expect("reduced coefficient fits in f64");
        let (a, b, c) = (f(&self.reduced.a), f(&self.reduced.b), f(&self.reduced.c));
        (b / (2.0 * a), (4.0 * a * c - b * b).sqrt() / (2.0 * a))
    }
}

/// CM point of a positive definite form; scaling invariant because the
/// form is primitivized first.
pub fn cm_point(f: &BinaryForm) -> Result<CMPoint> {
    let reduced = reduce_gl2(&primitivize(f)?)?;
    Ok(CMPoint { reduced })
}

/// A proper representative of g's class whose leading coefficient is
/// coprime to m, as (leading coefficient, middle coefficient).
fn coprime_representative(g: &BinaryForm, m: &Int) -> (Int, Int) {
    for bound in 1i64..=64 {
        for x in -bound..=bound {
            for y in -bound..=bound {
                if x.abs().max(y.abs()) != bound && bound != 1 {
                    continue;
                }
                if gcd_i64_pair(x, y) != 1 {
                    continue;
                }
                let (xi, yi) = (Int::from(x), Int::from(y));
                let val = g.eval(&xi, &yi);
                if !val.gcd(m).is_one() {
                    continue;
                }
                // extend (x, y) to an SL₂ matrix [[x, −β], [y, α]] with xα + yβ = 1
                let e = xi.extended_gcd(&yi);
                let (alpha, beta) = (e.x, e.y);
                let b = Int::from(2) * &g.a * &xi * (-&beta)
                    + &g.b * (&xi * &alpha - &beta * &yi)
                    + Int::from(2) * &g.c * &yi * &alpha;
                return (val, b);
            }
        }
    }
    unreachable!("a primitive form represents values coprime to any modulus at small height")
}

fn gcd_i64_pair(x: i64, y: i64) -> i64 {
    let (mut a, mut b) = (x.abs(), y.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Dirichlet composition of primitive forms of one discriminant: the
/// reduced representative of the product of the proper classes.
pub fn compose(f: &BinaryForm, g: &BinaryForm) -> Result<BinaryForm> {
    for h in [f, g] {
        if !h.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        if !form_content(h)?.is_one() {
            return Err(Error::ImprimitiveForm);
        }
    }
    let disc = f.disc();
    if g.disc() != disc {
        return Err(Error::DiscMismatch(disc.to_string(), g.disc().to_string()));
    }
    let f = reduce_sl2(f)?;
    let g = reduce_sl2(g)?;
    let (a2, b2) = coprime_representative(&g, &f.a);
    let (a1, b1) = (f.a, f.b);

    // B ≡ b₁ (mod 2a₁), B ≡ b₂ (mod 2a₂); solvable since both ≡ Δ (mod 2)
    // and gcd(a₁, a₂) = 1, via B = b₁ + 2a₁t with t ≡ (b₂−b₁)/2 · a₁⁻¹ (mod a₂).
    let e = a1.extended_gcd(&a2);
    debug_assert!(e.gcd.is_one());
    let a1_inv = e.x.mod_floor(&a2);
    let half_diff = (&b2 - &b1) / Int::from(2);
    let t = (half_diff * a1_inv).mod_floor(&a2);
    let big_a = &a1 * &a2;
    let big_b = &b1 + Int::from(2) * &a1 * &t;
    let num = &big_b * &big_b - &disc;
    debug_assert!((&num).mod_floor(&(Int::from(4) * &big_a)).is_zero());
    let big_c = num / (Int::from(4) * &big_a);
    reduce_sl2(&BinaryForm {
        a: big_a,
        b: big_b,
        c: big_c,
    })
}

/// The form class group of a negative discriminant: all reduced primitive
/// forms, sorted, with the principal form first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGroup {
    pub delta: Int,
    pub elements: Vec<BinaryForm>,
}

impl ClassGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> &BinaryForm {
        &self.elements[0]
    }

    /// Index of the class of an arbitrary primitive form of this discriminant.
    pub fn index_of(&self, f: &BinaryForm) -> Result<usize> {
        if f.disc() != self.delta {
            return Err(Error::DiscMismatch(
                self.delta.to_string(),
                f.disc().to_string(),
            ));
        }
        let r = reduce_sl2(f)?;
        self.elements
            .binary_search(&r)
            .map_err(|_| Error::ImprimitiveForm)
    }

    pub fn compose_indices(&self, i: usize, j: usize) -> usize {
        let h = compose(&self.elements[i], &self.elements[j]).expect("members compose");
        self.index_of(&h).expect("closed under composition")
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.index_of(&opposite(&self.elements[i]))
            .expect("closed under inversion")
    }

    /// Number of classes equal to their own inverse.
    pub fn two_torsion_count(&self) -> usize {
        (0..self.order())
            .filter(|&i| self.inverse_index(i) == i)
            .count()
    }
}

/// Enumerate all reduced primitive forms of discriminant delta by brute
/// force over −a < b ≤ a ≤ c with b ≥ 0 when a = c.
pub fn class_group(delta: &Int) -> Result<ClassGroup> {
    check_discriminant(delta)?;
    let abs = -delta.clone();
    let parity = delta.mod_floor(&Int::from(2));
    let a_max = (&abs / Int::from(3)).sqrt();
    let mut elements = Vec::new();
    let mut a = Int::one();
    while a <= a_max {
        let four_a = Int::from(4) * &a;
        let mut b = -&a + Int::one();
        while b <= a {
            if b.mod_floor(&Int::from(2)) == parity {
                let num = &b * &b + &abs;
                if num.mod_floor(&four_a).is_zero() {
                    let c = num / &four_a;
                    let reduced_tie = !(a == c && b.is_negative());
                    if c >= a && reduced_tie && a.gcd(&b).gcd(&c).is_one() {
                        elements.push(BinaryForm {
                            a: a.clone(),
                            b: b.clone(),
                            c,
                        });
                    }
                }
            }
            b += Int::one();
        }
        a += Int::one();
    }
    elements.sort();
    debug_assert!(elements[0].a.is_one(), "principal form sorts first");
    Ok(ClassGroup {
        delta: delta.clone(),
        elements,
    })
}

/// Outcome of the per-plane class-combination survey over R_D: the two
/// combinations c₁ = [q_L][q_{L⊥}][q_{Λ₁}]⁻¹ and c₂ = [q_L][q_{L⊥}]⁻¹[q_{Λ₂}]⁻¹
/// with value multisets and the 2-torsion budget they are measured against.
#[derive(Debug, Clone)]
pub struct CoherenceReport {
    pub d: i64,
    pub plane_count: usize,
    pub skipped: usize,
    pub c1: Vec<(BinaryForm, usize)>,
    pub c2: Vec<(BinaryForm, usize)>,
    pub class_number: usize,
    pub two_torsion: usize,
}

impl CoherenceReport {
    pub fn distinct_c1(&self) -> usize {
        self.c1.len()
    }

    pub fn distinct_c2(&self) -> usize {
        self.c2.len()
    }

    /// The empirical expectation: each combination takes at most
    /// 2·|2-torsion| values (proper-lift sign ambiguity times torsion).
    pub fn meets_documented_bound(&self) -> bool {
        let budget = 2 * self.two_torsion;
        self.distinct_c1() <= budget && self.distinct_c2() <= budget
    }
}

/// Proper lift of a form's GL₂ class by the convention b ≥ 0.
fn proper_lift(f: &BinaryForm) -> Result<BinaryForm> {
    reduce_gl2(&primitivize(f)?)
}

/// Survey c₁, c₂ over every plane of discriminant D. Requires square-free
/// D ≡ 1, 2 mod 4 with nonempty R_D; planes whose four primitivized forms
/// do not share the discriminant −4D are skipped and counted.
pub fn coherence_check(d: i64) -> Result<CoherenceReport> {
    if !(1..=1_000_000).contains(&d) || !is_squarefree(d) || !matches!(d % 4, 1 | 2) {
        return Err(Error::CoherenceUndefined(format!(
            "need square-free D ≡ 1, 2 mod 4, got {d}"
        )));
    }
    if !in_disc_set(d) {
        return Err(Error::CoherenceUndefined(format!(
            "R_{d} is empty (D outside the admissible residues)"
        )));
    }
    let delta = Int::from(-4 * d);
    let group = class_group(&delta)?;
    let mut c1_counts: BTreeMap<BinaryForm, usize> = BTreeMap::new();
    let mut c2_counts: BTreeMap<BinaryForm, usize> = BTreeMap::new();
    let mut skipped = 0usize;
    let planes = enumerate_planes(d);
    let plane_count = planes.len();
    for plane in &planes {
        let pair = klein_pair(plane);
        let forms = [
            gram_form(plane),
            gram_form(&orthocomplement(plane)),
            ortho_lattice(&pair.a1)?.gram_form,
            ortho_lattice(&pair.a2)?.gram_form,
        ];
        let mut lifts = Vec::with_capacity(4);
        for f in &forms {
            lifts.push(proper_lift(f)?);
        }
        if lifts.iter().any(|f| f.disc() != delta) {
            skipped += 1;
            continue;
        }
        let c1 = compose(&compose(&lifts[0], &lifts[1])?, &opposite(&lifts[2]))?;
        let c2 = compose(
            &compose(&lifts[0], &opposite(&lifts[1]))?,
            &opposite(&lifts[3]),
        )?;
        *c1_counts.entry(c1).or_insert(0) += 1;
        *c2_counts.entry(c2).or_insert(0) += 1;
    }
    Ok(CoherenceReport {
        d,
        plane_count,
        skipped,
        c1: c1_counts.into_iter().collect(),
        c2: c2_counts.into_iter().collect(),
        class_number: group.order(),
        two_torsion: group.two_torsion_count(),
    })
}
