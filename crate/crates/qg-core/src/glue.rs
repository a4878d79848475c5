//! Glue groups 𝒢(Λ) = Λ*/Λ of integral lattices, their fractional forms,
//! the per-prime isotype formulas, and canonical isomorphism-type keys.
//!
//! With Λ = Zⁿ carrying a Gram matrix M, the glue group is Zⁿ/MZⁿ; Smith
//! normal form UMV = diag(d₁..dₙ) gives divisors and generators at once:
//! the i-th generator is the i-th column of V divided by dᵢ, and the
//! fractional form on generators is (VᵀMV)ᵢⱼ/(dᵢdⱼ) mod 1, kept as exact
//! reduced rationals throughout.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::planes::RationalPlane;
use crate::quat_core::{snf, Mat};
use crate::{Error, Int, IntMatrix, PureVec3, Rat, Result};

/// Size gate for element-by-element work (multisets, isomorphism search).
const ELEMENT_GATE: u64 = 10_000;

/// A glue group with its fractional form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlueGroup {
    /// Elementary divisors d₁ | d₂ | …, ones included; ∏dᵢ = disc.
    pub divisors: Vec<Int>,
    /// Fractional form on the SNF generators, entries in [0, 1).
    pub frac_form: Vec<Vec<Rat>>,
    /// Sorted (element order, q-value) multiset when the order is ≤ 10⁴.
    pub elements: Option<Vec<(Int, Rat)>>,
}

fn frac(r: Rat) -> Rat {
    let f = r.floor();
    r - f
}

fn det_int(m: &IntMatrix, size: usize) -> Int {
    match size {
        0 => Int::one(),
        1 => m[(0, 0)].clone(),
        _ => {
            let mut d = Int::zero();
            for c in 0..size {
                let mut minor = Mat::zero(size - 1, size - 1);
                for r in 1..size {
                    let mut cc = 0;
                    for c2 in 0..size {
                        if c2 == c {
                            continue;
                        }
                        minor[(r - 1, cc)] = m[(r, c2)].clone();
                        cc += 1;
                    }
                }
                let term = &m[(0, c)] * det_int(&minor, size - 1);
                if c % 2 == 0 {
                    d += term;
                } else {
                    d -= term;
                }
            }
            d
        }
    }
}

fn check_gram(gram: &IntMatrix) -> Result<()> {
    let n = gram.rows();
    if gram.cols() != n {
        return Err(Error::BadGram);
    }
    for i in 0..n {
        for j in 0..i {
            if gram[(i, j)] != gram[(j, i)] {
                return Err(Error::BadGram);
            }
        }
    }
    for k in 1..=n {
        if !det_int(gram, k).is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
    }
    Ok(())
}

/// Glue group of an integral Gram matrix.
pub fn glue_group(gram: &IntMatrix) -> Result<GlueGroup> {
    check_gram(gram)?;
    let n = gram.rows();
    let (divisors, _u, v) = snf(gram);
    debug_assert_eq!(
        divisors.iter().product::<Int>(),
        det_int(gram, n),
        "∏dᵢ = disc for a positive definite Gram"
    );
    let w = v.transpose().matmul(&gram.matmul(&v));
    let mut frac_form = vec![vec![Rat::from(Int::zero()); n]; n];
    for i in 0..n {
        for j in 0..n {
            frac_form[i][j] = frac(Rat::new(
                w[(i, j)].clone(),
                &divisors[i] * &divisors[j],
            ));
        }
    }
    let elements = element_multiset(&divisors, &w);
    Ok(GlueGroup {
        divisors,
        frac_form,
        elements,
    })
}

/// Sorted (order, q) multiset of Zⁿ/diag(d)Zⁿ with q(t) = Σtᵢtⱼwᵢⱼ/(dᵢdⱼ),
/// or None beyond the size gate.
fn element_multiset(divisors: &[Int], w: &Mat<Int>) -> Option<Vec<(Int, Rat)>> {
    let mut size = 1u64;
    for d in divisors {
        size = size.checked_mul(d.to_u64()?)?;
        if size > ELEMENT_GATE {
            return None;
        }
    }
    let mut ms = multiset_fast(divisors, w)
        .unwrap_or_else(|| multiset_exact(divisors, w));
    ms.sort();
    Some(ms)
}

/// Odometer over ∏ [0, dᵢ).
fn each_tuple(divisors: &[i64], mut visit: impl FnMut(&[i64])) {
    let k = divisors.len();
    let mut t = vec![0i64; k];
    loop {
        visit(&t);
        let mut i = 0;
        loop {
            if i == k {
                return;
            }
            t[i] += 1;
            if t[i] < divisors[i] {
                break;
            }
            t[i] = 0;
            i += 1;
        }
    }
}

fn order_of(t: &[i64], divisors: &[i64]) -> i64 {
    let mut ord = 1i64;
    for (ti, di) in t.iter().zip(divisors) {
        let o = di / ti.gcd(di);
        ord = ord.lcm(&o);
    }
    ord
}

/// i128 path over a common denominator dₙ²; None on any overflow risk.
pub(crate) fn multiset_fast(divisors: &[Int], w: &Mat<Int>) -> Option<Vec<(Int, Rat)>> {
    let k = divisors.len();
    let d: Vec<i64> = divisors.iter().map(|x| x.to_i64()).collect::<Option<_>>()?;
    let dn = *d.last()?;
    let den = (dn as i128).checked_mul(dn as i128)?;
    let mut num = vec![vec![0i128; k]; k];
    for i in 0..k {
        for j in 0..k {
            let scale = den / (d[i] as i128 * d[j] as i128);
            num[i][j] = w[(i, j)].to_i128()?.checked_mul(scale)?;
        }
    }
    // worst-case accumulated magnitude: k² · dₙ² · max|num|
    let max_num = num
        .iter()
        .flatten()
        .map(|x| x.unsigned_abs())
        .max()
        .unwrap_or(0);
    let cap = (k as u128 * k as u128).checked_mul(den as u128)?;
    if max_num > (i128::MAX as u128 / 2) / cap {
        return None;
    }
    let mut ms = Vec::new();
    each_tuple(&d, |t| {
        let mut acc: i128 = 0;
        for i in 0..k {
            if t[i] == 0 {
                continue;
            }
            for j in 0..k {
                if t[j] == 0 {
                    continue;
                }
                acc += t[i] as i128 * t[j] as i128 * num[i][j];
            }
        }
        let q = acc.rem_euclid(den);
        ms.push((
            Int::from(order_of(t, &d)),
            Rat::new(Int::from(q), Int::from(den)),
        ));
    });
    Some(ms)
}

/// Exact rational path, same contract as the fast one.
pub(crate) fn multiset_exact(divisors: &[Int], w: &Mat<Int>) -> Vec<(Int, Rat)> {
    let k = divisors.len();
    let d: Vec<i64> = divisors
        .iter()
        .map(|x| x.to_i64().expect("gated divisor fits i64"))
        .collect();
    let mut f = vec![vec![Rat::from(Int::zero()); k]; k];
    for i in 0..k {
        for j in 0..k {
            f[i][j] = Rat::new(w[(i, j)].clone(), &divisors[i] * &divisors[j]);
        }
    }
    let mut ms = Vec::new();
    each_tuple(&d, |t| {
        let mut acc = Rat::from(Int::zero());
        for i in 0..k {
            if t[i] == 0 {
                continue;
            }
            for j in 0..k {
                if t[j] == 0 {
                    continue;
                }
                acc += Rat::from(Int::from(t[i] * t[j])) * &f[i][j];
            }
        }
        ms.push((Int::from(order_of(t, &d)), frac(acc)));
    });
    ms
}

impl GlueGroup {
    /// |𝒢| = ∏ dᵢ = disc of the Gram.
    pub fn order(&self) -> Int {
        self.divisors.iter().product()
    }

    /// Canonical key: divisors plus an order-independent digest of the
    /// (element order, q-value) multiset. Equal keys mean isomorphic at
    /// invariant level; beyond the size gate the key degrades to divisors
    /// only and says so.
    pub fn type_key(&self) -> String {
        let divs: Vec<String> = self.divisors.iter().map(|d| d.to_string()).collect();
        match &self.elements {
            Some(ms) => {
                let den = match self.divisors.last() {
                    Some(dmax) => dmax * dmax,
                    None => Int::one(),
                };
                let mut digest = 0u64;
                for (o, q) in ms {
                    let num = (q.numer() * &den) / q.denom();
                    digest = digest.wrapping_add(element_digest(
                        o.to_u64().expect("gated order fits u64"),
                        num.to_u64().expect("gated numerator fits u64"),
                    ));
                }
                format!("d={};q#={:016x}", divs.join(","), digest)
            }
            None => format!("d={};q=unavailable(order>gate)", divs.join(",")),
        }
    }
}

/// How far two glue groups were certified equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoVerdict {
    /// A differing invariant or an exhausted generator search.
    Distinct,
    /// A form-preserving isomorphism was found by the exact search.
    Isomorphic,
    /// Divisors agree but both groups exceed the element gate, so only
    /// divisor-level equality was checked.
    DivisorMatchOnly,
}

/// Exact isomorphism-of-forms test under the size gate, divisor comparison
/// beyond it.
pub fn glue_iso_verdict(g1: &GlueGroup, g2: &GlueGroup) -> IsoVerdict {
    if g1.divisors != g2.divisors {
        return IsoVerdict::Distinct;
    }
    let (e1, e2) = match (&g1.elements, &g2.elements) {
        (Some(a), Some(b)) => (a, b),
        _ => return IsoVerdict::DivisorMatchOnly,
    };
    if e1 != e2 {
        return IsoVerdict::Distinct;
    }
    if generator_search(g1, g2) {
        IsoVerdict::Isomorphic
    } else {
        IsoVerdict::Distinct
    }
}

/// True when the two glue groups are isomorphic as far as testable.
pub fn glue_iso_equal(g1: &GlueGroup, g2: &GlueGroup) -> bool {
    glue_iso_verdict(g1, g2) != IsoVerdict::Distinct
}

/// Search for images of g1's generators among g2's elements matching order
/// and q, requiring the bilinear values on generator pairs and full span.
fn generator_search(g1: &GlueGroup, g2: &GlueGroup) -> bool {
    let d: Vec<i64> = g1
        .divisors
        .iter()
        .map(|x| x.to_i64().expect("gated"))
        .collect();
    let k = d.len();
    // all elements of g2 as coordinate tuples with their q-values
    let mut candidates: Vec<Vec<(Vec<i64>, Rat)>> = vec![Vec::new(); k];
    let f2 = &g2.frac_form;
    each_tuple(&d, |t| {
        let mut q = Rat::from(Int::zero());
        for i in 0..k {
            for j in 0..k {
                if t[i] != 0 && t[j] != 0 {
                    q += Rat::from(Int::from(t[i] * t[j])) * &f2[i][j];
                }
            }
        }
        let q = frac(q);
        let ord = order_of(t, &d);
        for slot in 0..k {
            if Int::from(ord) == g1.divisors[slot] && q == g1.frac_form[slot][slot] {
                candidates[slot].push((t.to_vec(), q.clone()));
            }
        }
    });

    let bilinear = |x: &[i64], y: &[i64]| {
        let mut b = Rat::from(Int::zero());
        for i in 0..k {
            for j in 0..k {
                if x[i] != 0 && y[j] != 0 {
                    b += Rat::from(Int::from(x[i] * y[j])) * &f2[i][j];
                }
            }
        }
        frac(b)
    };

    fn spans_fully(chosen: &[Vec<i64>], d: &[i64]) -> bool {
        let k = d.len();
        let mut rows: Vec<Vec<Int>> = chosen
            .iter()
            .map(|x| x.iter().map(|&v| Int::from(v)).collect())
            .collect();
        for (i, di) in d.iter().enumerate() {
            let mut row = vec![Int::zero(); k];
            row[i] = Int::from(*di);
            rows.push(row);
        }
        let (divs, _, _) = snf(&Mat::from_rows(rows));
        divs.iter().all(|x| x.is_one())
    }

    fn dfs(
        slot: usize,
        chosen: &mut Vec<Vec<i64>>,
        candidates: &[Vec<(Vec<i64>, Rat)>],
        g1: &GlueGroup,
        d: &[i64],
        bilinear: &dyn Fn(&[i64], &[i64]) -> Rat,
    ) -> bool {
        if slot == candidates.len() {
            return spans_fully(chosen, d);
        }
        'next: for (cand, _) in &candidates[slot] {
            for (prev, prev_vec) in chosen.iter().enumerate() {
                if bilinear(prev_vec, cand) != g1.frac_form[prev][slot] {
                    continue 'next;
                }
            }
            chosen.push(cand.clone());
            if dfs(slot + 1, chosen, candidates, g1, d, bilinear) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    let mut chosen = Vec::new();
    dfs(0, &mut chosen, &candidates, g1, &d, &bilinear)
}

/// Integral 2×2 Gram matrix of the plane's canonical basis.
pub fn gram_of_plane(plane: &RationalPlane) -> IntMatrix {
    let dot = |a: &[Int], b: &[Int]| -> Int { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let (r0, r1) = (plane.basis.row(0), plane.basis.row(1));
    Mat::from_rows(vec![
        vec![dot(r0, r0), dot(r0, r1)],
        vec![dot(r1, r0), dot(r1, r1)],
    ])
}

/// Glue group of the plane lattice L(Z); always defined, order D.
pub fn glue_of_plane(plane: &RationalPlane) -> GlueGroup {
    glue_group(&gram_of_plane(plane)).expect("plane Gram is symmetric positive definite")
}

/// Canonical isotype key used to partition R_D; same string as
/// `glue_of_plane(plane).type_key()` but computed on machine integers,
/// falling back to the exact path when anything overflows.
pub fn glue_type_key(plane: &RationalPlane) -> String {
    let gram = gram_of_plane(plane);
    fast_type_key(&gram)
        .unwrap_or_else(|| glue_group(&gram).expect("plane Gram is positive definite").type_key())
}

/// 2×2 Smith normal form over i128 with column-operation tracking:
/// returns (positive divisors d₁ | d₂, V) with UMV = diag(d₁, d₂).
fn snf2_i128(orig: [[i128; 2]; 2]) -> Option<([i128; 2], [[i128; 2]; 2])> {
    let mut m = orig;
    let mut v = [[1i128, 0], [0, 1]];
    let col_op = |m: &mut [[i128; 2]; 2], v: &mut [[i128; 2]; 2], dst: usize, src: usize, q: i128| {
        for r in 0..2 {
            m[r][dst] -= q * m[r][src];
            v[r][dst] -= q * v[r][src];
        }
    };
    let col_swap = |m: &mut [[i128; 2]; 2], v: &mut [[i128; 2]; 2]| {
        for r in 0..2 {
            m[r].swap(0, 1);
            v[r].swap(0, 1);
        }
    };
    for _ in 0..256 {
        if m[0][0] == 0 {
            if m[0][1] != 0 {
                col_swap(&mut m, &mut v);
            } else if m[1][0] != 0 || m[1][1] != 0 {
                m.swap(0, 1);
            } else {
                break;
            }
            continue;
        }
        if m[0][1] != 0 {
            let q = m[0][1].div_euclid(m[0][0]);
            col_op(&mut m, &mut v, 1, 0, q);
            if m[0][1] != 0 {
                col_swap(&mut m, &mut v);
            }
            continue;
        }
        if m[1][0] != 0 {
            let q = m[1][0].div_euclid(m[0][0]);
            for c in 0..2 {
                m[1][c] -= q * m[0][c];
            }
            if m[1][0] != 0 {
                m.swap(0, 1);
            }
            continue;
        }
        // diagonal; enforce the divisor chain, else mix the columns
        if m[1][1] % m[0][0] != 0 {
            col_op(&mut m, &mut v, 0, 1, -1);
            continue;
        }
        let d = [m[0][0].abs(), m[1][1].abs()];
        if d[0] == 0 || d[1] == 0 {
            return None;
        }
        return Some((d, v));
    }
    None
}

/// SplitMix64 finalizer, the mixing stage of the element digest.
fn splitmix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    z
}

/// Digest of one glue element, given its order and the numerator of its
/// q-value over the common denominator d_max². The multiset digest is the
/// wrapping sum of these, hence independent of enumeration order.
fn element_digest(ord: u64, num: u64) -> u64 {
    splitmix64(splitmix64(ord ^ 0x9e37_79b9_7f4a_7c15) ^ num)
}

/// tab[t] = d / gcd(t, d), the order of t in Z/d, filled by overwriting
/// multiples of each divisor in ascending order so the largest divisor
/// of both t and d wins.
fn order_table(d: u64) -> Vec<u64> {
    let mut divs = Vec::new();
    let mut e = 1;
    while e * e <= d {
        if d % e == 0 {
            divs.push(e);
            if e != d / e {
                divs.push(d / e);
            }
        }
        e += 1;
    }
    divs.sort_unstable();
    let mut tab = vec![0u64; d as usize];
    for &e in &divs {
        let o = d / e;
        let mut t = 0usize;
        while t < tab.len() {
            tab[t] = o;
            t += e as usize;
        }
    }
    tab
}

/// The plane type key on machine integers: closed 2×2 SNF, fractional
/// form over the common denominator d₂², and the digest of the element
/// multiset. None when the Gram leaves i64 range.
fn fast_type_key(gram: &IntMatrix) -> Option<String> {
    if gram.rows() != 2 || gram.cols() != 2 {
        return None;
    }
    let g = |i: usize, j: usize| gram[(i, j)].to_i64().map(i128::from);
    let m = [[g(0, 0)?, g(0, 1)?], [g(1, 0)?, g(1, 1)?]];
    if m[0][1] != m[1][0] || m[0][0] <= 0 || m[0][0] * m[1][1] - m[0][1] * m[1][0] <= 0 {
        return None;
    }
    let (d, v) = snf2_i128(m)?;
    debug_assert_eq!(d[1] % d[0], 0, "SNF divisor chain");
    debug_assert_eq!(d[0] * d[1], m[0][0] * m[1][1] - m[0][1] * m[1][0]);
    if (d[0] * d[1]) as u128 > ELEMENT_GATE as u128 {
        return Some(format!("d={},{};q=unavailable(order>gate)", d[0], d[1]));
    }
    // W = VᵀMV; numerators of the form over the common denominator d₂²
    let mut w = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = 0i128;
            for r in 0..2 {
                for c in 0..2 {
                    acc = acc.checked_add(v[r][i].checked_mul(m[r][c])?.checked_mul(v[c][j])?)?;
                }
            }
            w[i][j] = acc;
        }
    }
    let den = d[1].checked_mul(d[1])?;
    let mut n = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            n[i][j] = w[i][j]
                .checked_mul(d[1] / d[i])?
                .checked_mul(d[1] / d[j])?
                .rem_euclid(den);
        }
    }
    // everything below den = d₂² ≤ gate² fits u64 comfortably
    let (d0, d1, den64) = (d[0] as u64, d[1] as u64, den as u64);
    let nn = |i: usize, j: usize| n[i][j] as u64;
    let o2 = order_table(d1);
    let o1s = order_table(d0);
    let two_n11 = 2 * nn(1, 1) % den64;
    let mut digest = 0u64;
    for s in 0..d0 {
        let o1 = o1s[s as usize];
        // q(s,t) mod den by first/second differences: q(s,t+1) − q(s,t)
        // = 2n₀₁s + n₁₁(2t+1), so cur/inc walk the t-row with additions only
        let mut cur = (nn(0, 0) * s % den64) * s % den64;
        let mut inc = (2 * nn(0, 1) * s + nn(1, 1)) % den64;
        for ot in &o2 {
            let ord = if o1 == 1 { *ot } else { o1.lcm(ot) };
            digest = digest.wrapping_add(element_digest(ord, cur));
            cur += inc;
            if cur >= den64 {
                cur -= den64;
            }
            inc += two_n11;
            if inc >= den64 {
                inc -= den64;
            }
        }
    }
    Some(format!("d={},{};q#={:016x}", d0, d1, digest))
}

fn ord_p_i64(mut n: i64, p: i64) -> u32 {
    let mut k = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

fn ord_p_content(v: &PureVec3, p: i64) -> u32 {
    let pi = Int::from(p);
    let mut g = crate::quat_core::content(&v.coords().to_vec()).expect("nonzero point");
    let mut k = 0;
    while g.mod_floor(&pi).is_zero() {
        g /= &pi;
        k += 1;
    }
    k
}

/// p-part of the glue group for odd p, as divisor exponents (k, n−k) with
/// n = ord_p(D) and k = max(ord_p(a₁), ord_p(a₂)).
pub fn local_type_odd(d: i64, a1: &PureVec3, a2: &PureVec3, p: i64) -> (u32, u32) {
    debug_assert!(p >= 3 && p % 2 == 1, "odd primes only");
    let n = ord_p_i64(d, p);
    let k = ord_p_content(a1, p).max(ord_p_content(a2, p));
    debug_assert!(2 * k <= n, "plane data satisfies n ≥ 2k");
    (k, n - k)
}

/// 2-part of the glue group: trivial for odd D, else Z/2 × Z/2^{n−1} with
/// n = ord₂(D) ∈ {1, 2, 3}; proven only for D in the admissible set.
pub fn local_type_two(d: i64) -> Result<(u32, u32)> {
    if !crate::planes::in_disc_set(d) {
        return Err(Error::InvalidParam(format!(
            "2-adic glue formula needs D in the admissible set, got {d}"
        )));
    }
    let n = ord_p_i64(d, 2);
    Ok(if n == 0 { (0, 0) } else { (1, n - 1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planes::{enumerate_planes, gram_form, in_disc_set};
    use crate::forms_cm::form_content;
    use crate::klein::klein_pair;
    use std::collections::BTreeMap;

    #[test]
    fn fast_type_key_matches_exact_path() {
        for d in [1i64, 2, 3, 4, 5, 8, 18, 45, 50, 72, 121, 147, 200] {
            for plane in enumerate_planes(d) {
                assert_eq!(
                    glue_type_key(&plane),
                    glue_of_plane(&plane).type_key(),
                    "D = {d}"
                );
            }
        }
        // beyond the element gate both paths degrade to the divisor key
        let big = diag(&[101, 101]);
        assert_eq!(
            fast_type_key(&big).unwrap(),
            glue_group(&big).unwrap().type_key()
        );
        assert!(fast_type_key(&big).unwrap().contains("unavailable"));
    }

    fn diag(entries: &[i64]) -> IntMatrix {
        let n = entries.len();
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Int::from(entries[i]);
        }
        m
    }

    fn mat2(rows: [[i64; 2]; 2]) -> IntMatrix {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect())
    }

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d))
    }

    #[test]
    fn two_two_example() {
        let g = glue_group(&diag(&[2, 2])).unwrap();
        assert_eq!(g.divisors, vec![Int::from(2), Int::from(2)]);
        assert_eq!(g.frac_form[0][0], rat(1, 2));
        assert_eq!(g.frac_form[1][1], rat(1, 2));
        assert_eq!(g.frac_form[0][1], rat(0, 1));
        let ms = g.elements.as_ref().unwrap();
        assert_eq!(ms.len(), 4);
        assert_eq!(
            *ms,
            vec![
                (Int::from(1), rat(0, 1)),
                (Int::from(2), rat(0, 1)),
                (Int::from(2), rat(1, 2)),
                (Int::from(2), rat(1, 2)),
            ]
        );
    }

    #[test]
    fn trivial_group() {
        let g = glue_group(&diag(&[1, 1])).unwrap();
        assert_eq!(g.divisors, vec![Int::from(1), Int::from(1)]);
        assert_eq!(g.order(), Int::from(1));
        assert_eq!(g.elements.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn five_ten_example() {
        let g = glue_group(&diag(&[5, 10])).unwrap();
        assert_eq!(g.divisors, vec![Int::from(5), Int::from(10)]);
        assert_eq!(g.order(), Int::from(50));
        assert_eq!(g.elements.as_ref().unwrap().len(), 50);

        // same group from the actual plane of the (5, 0, 10) Gram form
        let plane = enumerate_planes(50)
            .into_iter()
            .find(|p| {
                let (a, b, c) = gram_form(p).coeffs();
                (a, b, c) == (Int::from(5), Int::from(0), Int::from(10))
            })
            .expect("the worked D=50 plane is enumerated");
        let gp = glue_of_plane(&plane);
        assert_eq!(gp.divisors, g.divisors);
        assert_eq!(glue_iso_verdict(&g, &gp), IsoVerdict::Isomorphic);
    }

    #[test]
    fn gram_validation() {
        let bad = Mat::from_rows(vec![
            vec![Int::from(1), Int::from(2)],
            vec![Int::from(3), Int::from(1)],
        ]);
        assert_eq!(glue_group(&bad), Err(Error::BadGram));
        let wide = Mat::zero(2, 3);
        assert_eq!(glue_group(&wide), Err(Error::BadGram));
        assert_eq!(
            glue_group(&diag(&[1, -1])),
            Err(Error::NotPositiveDefinite)
        );
        assert_eq!(
            glue_group(&mat2([[1, 3], [3, 1]])),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn fast_and_exact_paths_agree() {
        for gram in [
            diag(&[2, 2]),
            diag(&[5, 10]),
            diag(&[1, 1]),
            mat2([[10, 5], [5, 5]]),
            mat2([[2, 1], [1, 3]]),
            mat2([[6, 2], [2, 8]]),
        ] {
            let (d, _, v) = snf(&gram);
            let w = v.transpose().matmul(&gram.matmul(&v));
            let mut fast = multiset_fast(&d, &w).expect("small cases stay in range");
            let mut exact = multiset_exact(&d, &w);
            fast.sort();
            exact.sort();
            assert_eq!(fast, exact);
        }
    }

    #[test]
    fn iso_detects_unit_scaling() {
        // Z/5 with q(g) = 1/5 versus q(g) = 2/5 (nonsquare unit): distinct
        let a = glue_group(&diag(&[1, 5])).unwrap();
        let c = glue_group(&mat2([[3, 1], [1, 2]])).unwrap();
        assert_eq!(a.divisors, c.divisors);
        assert_eq!(glue_iso_verdict(&a, &c), IsoVerdict::Distinct);
        assert!(!glue_iso_equal(&a, &c));

        // two nonsquare-class Grams: found isomorphic by the exact search
        let d = glue_group(&mat2([[2, 1], [1, 3]])).unwrap();
        assert_eq!(glue_iso_verdict(&c, &d), IsoVerdict::Isomorphic);

        // reflexivity on a 2-group
        let g = glue_group(&diag(&[2, 2])).unwrap();
        assert_eq!(glue_iso_verdict(&g, &g), IsoVerdict::Isomorphic);

        // mismatched divisors
        let h = glue_group(&diag(&[1, 8])).unwrap();
        let k = glue_group(&mat2([[2, 0], [0, 4]])).unwrap();
        assert_eq!(glue_iso_verdict(&h, &k), IsoVerdict::Distinct);
    }

    #[test]
    fn divisors_factor_through_local_formulas() {
        for d in (1..=120i64).filter(|&d| in_disc_set(d)) {
            for plane in enumerate_planes(d) {
                let pair = klein_pair(&plane);
                let g = glue_of_plane(&plane);
                assert_eq!(g.order(), Int::from(d), "|𝒢| = D at D={d}");

                // formulas give group factors; the divisor chain wants the
                // smaller exponent first (Z/2 × Z/2⁰ reads as chain (1, 2))
                let mut d1 = 1i64;
                let mut d2 = 1i64;
                let mut push = |p: i64, k: u32, rest: u32| {
                    d1 *= p.pow(k.min(rest));
                    d2 *= p.pow(k.max(rest));
                };
                let (k2, rest2) = local_type_two(d).unwrap();
                push(2, k2, rest2);
                let mut m = d >> ord_p_i64(d, 2);
                let mut p = 3i64;
                while p * p <= m {
                    if m % p == 0 {
                        let (k, rest) = local_type_odd(d, &pair.a1, &pair.a2, p);
                        push(p, k, rest);
                        while m % p == 0 {
                            m /= p;
                        }
                    }
                    p += 2;
                }
                if m > 1 {
                    let (k, rest) = local_type_odd(d, &pair.a1, &pair.a2, m);
                    push(m, k, rest);
                }
                assert_eq!(
                    g.divisors,
                    vec![Int::from(d1), Int::from(d2)],
                    "local factorization at D={d}"
                );
            }
        }
    }

    #[test]
    fn first_divisor_odd_part_matches_form_content() {
        let odd_part = |mut n: Int| {
            while n.is_even() {
                n /= Int::from(2);
            }
            n
        };
        for d in (1..=100i64).filter(|&d| in_disc_set(d)) {
            for plane in enumerate_planes(d) {
                let g = glue_of_plane(&plane);
                let c = form_content(&gram_form(&plane)).unwrap();
                assert_eq!(
                    odd_part(g.divisors[0].clone()),
                    odd_part(c),
                    "d₁ odd part at D={d}"
                );
            }
        }
    }

    #[test]
    fn local_type_examples() {
        let a1 = PureVec3::new(Int::from(0), Int::from(5), Int::from(-5));
        let a2 = PureVec3::new(Int::from(0), Int::from(-7), Int::from(-1));
        assert_eq!(local_type_odd(50, &a1, &a2, 5), (1, 1));
        assert_eq!(local_type_odd(50, &a1, &a2, 3), (0, 0));

        let b1 = PureVec3::new(Int::from(3), Int::from(0), Int::from(0));
        let b2 = PureVec3::new(Int::from(1), Int::from(2), Int::from(2));
        assert_eq!(local_type_odd(9, &b1, &b2, 3), (1, 1));

        assert_eq!(local_type_two(4).unwrap(), (1, 1));
        assert_eq!(local_type_two(3).unwrap(), (0, 0));
        assert_eq!(local_type_two(50).unwrap(), (1, 0));
        assert_eq!(local_type_two(8).unwrap(), (1, 2));
        assert!(local_type_two(7).is_err());
        assert!(local_type_two(16).is_err());
    }

    #[test]
    fn crt_multiset_consistency() {
        for gram in [diag(&[2, 18]), diag(&[5, 10]), mat2([[6, 2], [2, 8]]), diag(&[12, 12])] {
            let g = glue_group(&gram).unwrap();
            let ms = g.elements.as_ref().unwrap();
            let order = g.order().to_i64().unwrap();

            let mut primes = vec![];
            let mut m = order;
            let mut p = 2i64;
            while p * p <= m {
                if m % p == 0 {
                    primes.push(p);
                    while m % p == 0 {
                        m /= p;
                    }
                }
                p += 1;
            }
            if m > 1 {
                primes.push(m);
            }

            let p_part = |p: i64| -> Vec<(Int, Rat)> {
                ms.iter()
                    .filter(|(o, _)| {
                        let mut o = o.to_i64().unwrap();
                        while o % p == 0 {
                            o /= p;
                        }
                        o == 1
                    })
                    .cloned()
                    .collect()
            };

            let mut product: Vec<(Int, Rat)> = vec![(Int::from(1), rat(0, 1))];
            for p in primes {
                let part = p_part(p);
                let mut next = Vec::with_capacity(product.len() * part.len());
                for (o1, q1) in &product {
                    for (o2, q2) in &part {
                        next.push((o1.lcm(o2), frac(q1 + q2)));
                    }
                }
                product = next;
            }
            product.sort();
            assert_eq!(&product, ms, "CRT recombination for {gram:?}");
        }
    }

    #[test]
    fn type_keys_partition_planes() {
        // every D=4 plane shares one key
        let keys: Vec<String> = enumerate_planes(4).iter().map(glue_type_key).collect();
        assert!(!keys.is_empty());
        assert!(keys.iter().all(|k| k == &keys[0]));

        // square-free D: divisors always (1, D)
        for d in [2i64, 5, 6, 10] {
            for plane in enumerate_planes(d) {
                let g = glue_of_plane(&plane);
                assert_eq!(g.divisors, vec![Int::from(1), Int::from(d)]);
            }
        }

        // D = 50 splits into Z/5 × Z/10 and Z/1 × Z/50 isotypes
        let mut by_divisors: BTreeMap<Vec<Int>, usize> = BTreeMap::new();
        for plane in enumerate_planes(50) {
            *by_divisors
                .entry(glue_of_plane(&plane).divisors)
                .or_insert(0) += 1;
        }
        assert_eq!(by_divisors.len(), 2);
        assert!(by_divisors.contains_key(&vec![Int::from(5), Int::from(10)]));
        assert!(by_divisors.contains_key(&vec![Int::from(1), Int::from(50)]));
    }
}
