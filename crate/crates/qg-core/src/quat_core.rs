//! Hamiltonian quaternions and the integer linear algebra substrate.
//!
//! Quaternions are generic over the scalar so the same arithmetic serves the
//! exact core (`BigInt`) and the numeric twist check (`f64`).  The matrix kit
//! (Hermite and Smith normal forms, saturated kernels) is generic over an
//! integer scalar; the public alias works over `BigInt`, while enumeration
//! hot paths instantiate it at `i64` where entry growth is provably small.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{Num, Signed};

use crate::{Error, Result};

/// Scalar usable in quaternion arithmetic.
pub trait Scalar: Num + Signed + Clone + fmt::Debug {}
impl<T: Num + Signed + Clone + fmt::Debug> Scalar for T {}

/// Integer scalar usable in exact lattice arithmetic.
pub trait IntScalar: Integer + Signed + Clone + fmt::Debug {}
impl<T: Integer + Signed + Clone + fmt::Debug> IntScalar for T {}

/// Quaternion x₀ + x₁i + x₂j + x₃k.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quat<T> {
    pub x0: T,
    pub x1: T,
    pub x2: T,
    pub x3: T,
}

/// Traceless quaternion x₁i + x₂j + x₃k, identified with a vector in Z³.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PureVec<T> {
    pub x1: T,
    pub x2: T,
    pub x3: T,
}

impl<T: Scalar> Quat<T> {
    pub fn new(x0: T, x1: T, x2: T, x3: T) -> Self {
        Quat { x0, x1, x2, x3 }
    }

    pub fn zero() -> Self {
        Quat::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn one() -> Self {
        Quat::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    /// Basis unit i, j or k (index 1, 2, 3); index 0 gives 1.
    pub fn unit(idx: usize) -> Self {
        let mut q = Quat::zero();
        *q.coord_mut(idx) = T::one();
        q
    }

    pub fn coord(&self, idx: usize) -> &T {
        match idx {
            0 => &self.x0,
            1 => &self.x1,
            2 => &self.x2,
            3 => &self.x3,
            _ => panic!("quaternion coordinate index {idx}"),
        }
    }

    fn coord_mut(&mut self, idx: usize) -> &mut T {
        match idx {
            0 => &mut self.x0,
            1 => &mut self.x1,
            2 => &mut self.x2,
            3 => &mut self.x3,
            _ => panic!("quaternion coordinate index {idx}"),
        }
    }

    /// Conjugate: negates the i, j, k parts.
    pub fn conj(&self) -> Self {
        Quat::new(
            self.x0.clone(),
            -self.x1.clone(),
            -self.x2.clone(),
            -self.x3.clone(),
        )
    }

    /// Trace x + conj(x) = 2x₀.
    pub fn trace(&self) -> T {
        self.x0.clone() + self.x0.clone()
    }

    /// Reduced norm x·conj(x) = x₀² + x₁² + x₂² + x₃².
    pub fn norm(&self) -> T {
        self.x0.clone() * self.x0.clone()
            + self.x1.clone() * self.x1.clone()
            + self.x2.clone() * self.x2.clone()
            + self.x3.clone() * self.x3.clone()
    }

    /// Traceless part as a 3-vector (valid when the trace is even or zero;
    /// the scalar part is simply dropped).
    pub fn pure_part(&self) -> PureVec<T> {
        PureVec {
            x1: self.x1.clone(),
            x2: self.x2.clone(),
            x3: self.x3.clone(),
        }
    }

    pub fn is_pure(&self) -> bool {
        self.x0.is_zero()
    }

    pub fn scale(&self, s: &T) -> Self {
        Quat::new(
            self.x0.clone() * s.clone(),
            self.x1.clone() * s.clone(),
            self.x2.clone() * s.clone(),
            self.x3.clone() * s.clone(),
        )
    }
}

impl<T: Scalar> Add for Quat<T> {
    type Output = Quat<T>;
    fn add(self, rhs: Quat<T>) -> Quat<T> {
        Quat::new(
            self.x0 + rhs.x0,
            self.x1 + rhs.x1,
            self.x2 + rhs.x2,
            self.x3 + rhs.x3,
        )
    }
}

impl<T: Scalar> Sub for Quat<T> {
    type Output = Quat<T>;
    fn sub(self, rhs: Quat<T>) -> Quat<T> {
        Quat::new(
            self.x0 - rhs.x0,
            self.x1 - rhs.x1,
            self.x2 - rhs.x2,
            self.x3 - rhs.x3,
        )
    }
}

impl<T: Scalar> Neg for Quat<T> {
    type Output = Quat<T>;
    fn neg(self) -> Quat<T> {
        Quat::new(-self.x0, -self.x1, -self.x2, -self.x3)
    }
}

impl<T: Scalar> Mul for Quat<T> {
    type Output = Quat<T>;

    /// Hamilton product with i² = j² = k² = −1, ij = k.
    fn mul(self, r: Quat<T>) -> Quat<T> {
        let (a0, a1, a2, a3) = (self.x0, self.x1, self.x2, self.x3);
        let (b0, b1, b2, b3) = (r.x0, r.x1, r.x2, r.x3);
        Quat::new(
            a0.clone() * b0.clone()
                - a1.clone() * b1.clone()
                - a2.clone() * b2.clone()
                - a3.clone() * b3.clone(),
            a0.clone() * b1.clone() + a1.clone() * b0.clone() + a2.clone() * b3.clone()
                - a3.clone() * b2.clone(),
            a0.clone() * b2.clone() - a1.clone() * b3.clone()
                + a2.clone() * b0.clone()
                + a3.clone() * b1.clone(),
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }
}

impl<T: Scalar> PureVec<T> {
    pub fn new(x1: T, x2: T, x3: T) -> Self {
        PureVec { x1, x2, x3 }
    }

    pub fn zero() -> Self {
        PureVec::new(T::zero(), T::zero(), T::zero())
    }

    pub fn as_quat(&self) -> Quat<T> {
        Quat::new(
            T::zero(),
            self.x1.clone(),
            self.x2.clone(),
            self.x3.clone(),
        )
    }

    pub fn coords(&self) -> [T; 3] {
        [self.x1.clone(), self.x2.clone(), self.x3.clone()]
    }

    pub fn norm(&self) -> T {
        self.x1.clone() * self.x1.clone()
            + self.x2.clone() * self.x2.clone()
            + self.x3.clone() * self.x3.clone()
    }

    pub fn dot(&self, o: &Self) -> T {
        self.x1.clone() * o.x1.clone()
            + self.x2.clone() * o.x2.clone()
            + self.x3.clone() * o.x3.clone()
    }

    pub fn is_zero(&self) -> bool {
        self.x1.is_zero() && self.x2.is_zero() && self.x3.is_zero()
    }

    pub fn scale(&self, s: &T) -> Self {
        PureVec::new(
            self.x1.clone() * s.clone(),
            self.x2.clone() * s.clone(),
            self.x3.clone() * s.clone(),
        )
    }
}

impl<T: Scalar> Neg for PureVec<T> {
    type Output = PureVec<T>;
    fn neg(self) -> PureVec<T> {
        PureVec::new(-self.x1, -self.x2, -self.x3)
    }
}

impl<T: Scalar> Add for PureVec<T> {
    type Output = PureVec<T>;
    fn add(self, r: PureVec<T>) -> PureVec<T> {
        PureVec::new(self.x1 + r.x1, self.x2 + r.x2, self.x3 + r.x3)
    }
}

impl<T: Scalar> Sub for PureVec<T> {
    type Output = PureVec<T>;
    fn sub(self, r: PureVec<T>) -> PureVec<T> {
        PureVec::new(self.x1 - r.x1, self.x2 - r.x2, self.x3 - r.x3)
    }
}

/// gcd of the entries of a nonzero vector.
pub fn content<T: IntScalar>(v: &[T]) -> Result<T> {
    let mut g = T::zero();
    for x in v {
        g = g.gcd(x);
    }
    if g.is_zero() {
        Err(Error::ZeroVector)
    } else {
        Ok(g)
    }
}

/// Dense row-major matrix over an integer scalar.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    e: Vec<T>,
}

impl<T: IntScalar> Mat<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            e: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            e: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.e[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let mut p: Mat<T> = Mat::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let t = a.clone() * o[(k, j)].clone();
                    p[(i, j)] = p[(i, j)].clone() + t;
                }
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| x.is_zero())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.e.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.e.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row a ← row a − q · row b
    fn row_sub(&mut self, a: usize, b: usize, q: &T) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let t = q.clone() * self[(b, j)].clone();
            self[(a, j)] = self[(a, j)].clone() - t;
        }
    }

    /// col a ← col a − q · col b
    fn col_sub(&mut self, a: usize, b: usize, q: &T) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let t = q.clone() * self[(i, b)].clone();
            self[(i, a)] = self[(i, a)].clone() - t;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            self[(a, j)] = -self[(a, j)].clone();
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.e[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.e[i * self.cols + j]
    }
}

/// Row Hermite normal form: returns (H, U) with H = U·M, U unimodular,
/// pivots positive, entries above each pivot reduced into [0, pivot).
pub fn hnf<T: IntScalar>(m: &Mat<T>) -> (Mat<T>, Mat<T>) {
    let mut h = m.clone();
    let mut u = Mat::identity(m.rows());
    let mut r = 0;
    for c in 0..h.cols() {
        if r == h.rows() {
            break;
        }
        // Euclid on the entries of column c below row r until one survives.
        loop {
            let mut piv: Option<usize> = None;
            for i in r..h.rows() {
                if !h[(i, c)].is_zero()
                    && piv.is_none_or(|p| h[(i, c)].abs() < h[(p, c)].abs())
                {
                    piv = Some(i);
                }
            }
            let Some(p) = piv else { break };
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..h.rows() {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = h[(i, c)].div_floor(&h[(r, c)]);
                h.row_sub(i, r, &q);
                u.row_sub(i, r, &q);
                if !h[(i, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = h[(i, c)].div_floor(&h[(r, c)]);
            h.row_sub(i, r, &q);
            u.row_sub(i, r, &q);
        }
        r += 1;
    }
    (h, u)
}

/// Smith normal form: returns (divisors, U, V) with U·M·V = diag(d₁,…),
/// d₁ | d₂ | …, all dᵢ ≥ 0, U and V unimodular.  The divisor list has
/// length min(rows, cols), zeros included.
pub fn snf<T: IntScalar>(m: &Mat<T>) -> (Vec<T>, Mat<T>, Mat<T>) {
    let mut s = m.clone();
    let mut u = Mat::identity(m.rows());
    let mut v = Mat::identity(m.cols());
    let n = m.rows().min(m.cols());
    let mut t = 0;
    while t < n {
        // Move the smallest nonzero entry of the trailing block to (t,t).
        let mut piv: Option<(usize, usize)> = None;
        for i in t..s.rows() {
            for j in t..s.cols() {
                if !s[(i, j)].is_zero()
                    && piv.is_none_or(|(a, b)| s[(i, j)].abs() < s[(a, b)].abs())
                {
                    piv = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = piv else { break };
        s.swap_rows(t, pi);
        u.swap_rows(t, pi);
        s.swap_cols(t, pj);
        v.swap_cols(t, pj);
        // Clear row t and column t by Euclid steps.
        let mut clean = false;
        while !clean {
            clean = true;
            for i in t + 1..s.rows() {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = s[(i, t)].div_floor(&s[(t, t)]);
                s.row_sub(i, t, &q);
                u.row_sub(i, t, &q);
                if !s[(i, t)].is_zero() {
                    s.swap_rows(t, i);
                    u.swap_rows(t, i);
                    clean = false;
                }
            }
            for j in t + 1..s.cols() {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = s[(t, j)].div_floor(&s[(t, t)]);
                s.col_sub(j, t, &q);
                v.col_sub(j, t, &q);
                if !s[(t, j)].is_zero() {
                    s.swap_cols(t, j);
                    v.swap_cols(t, j);
                    clean = false;
                }
            }
        }
        // Pivot must divide the whole trailing block before we advance.
        let mut fixed = true;
        'scan: for i in t + 1..s.rows() {
            for j in t + 1..s.cols() {
                if !s[(i, j)].mod_floor(&s[(t, t)]).is_zero() {
                    let one = T::one();
                    s.row_sub(t, i, &-one.clone());
                    u.row_sub(t, i, &-one);
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue;
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    let divisors = (0..n).map(|i| s[(i, i)].clone()).collect();
    (divisors, u, v)
}

/// Z-basis (rows, in HNF) of the saturated kernel (ker M ⊗ Q) ∩ Z^cols,
/// where M acts on column vectors.
pub fn kernel_saturated<T: IntScalar>(m: &Mat<T>) -> Mat<T> {
    let (div, _, v) = snf(m);
    let rank = div.iter().filter(|d| !d.is_zero()).count();
    // Columns of V beyond the rank map to zero and, V being unimodular,
    // span a direct summand of Z^cols: already saturated.
    let rows: Vec<Vec<T>> = (rank..m.cols())
        .map(|j| (0..m.cols()).map(|i| v[(i, j)].clone()).collect())
        .collect();
    if rows.is_empty() {
        return Mat::zero(0, m.cols());
    }
    let (h, _) = hnf(&Mat::from_rows(rows));
    h
}
