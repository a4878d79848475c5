//! Equidistribution diagnostics: spherical Weyl sums over the paired
//! sphere directions, cusp-tail statistics of the CM points on the
//! modular surface, and joint-correlation tests across all six factors.
//!
//! The test-function library is pinned in code and versioned in every
//! report so discrepancy numbers stay comparable across runs.

use std::sync::OnceLock;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::forms_cm::{cm_point, CMPoint};
use crate::glue::glue_type_key;
use crate::klein::klein_pair;
use crate::planes::{
    enumerate_planes, gram_form, in_disc_set, is_squarefree, ortho_lattice, orthocomplement,
    RationalPlane,
};
use crate::{Error, Result};

/// Version tag for the pinned test-function library.
pub const LIB_VERSION: &str = "tfl-1";

/// Tail height used by the cusp indicator functions in the library.
pub const T_TAIL: f64 = 1.5;

/// One plane's sample: its two sphere directions and the floating
/// fundamental-domain coordinates of its four CM points.
///
/// Rows must stay heap-free: a deep sweep holds a whole D's worth at
/// once, and the largest D carry hundreds of thousands of planes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub d: i64,
    pub a1_dir: [f64; 3],
    pub a2_dir: [f64; 3],
    pub z_xy: [(f64, f64); 4],
}

/// Per-D diagnostics: discrepancies per sphere slot, tail deviations per
/// CM slot, and the joint-correlation matrix over the pinned library.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub d: i64,
    pub library: &'static str,
    pub sample_size: usize,
    pub sphere_disc: [f64; 2],
    pub cusp_dev: [f64; 4],
    pub joint: Vec<Vec<f64>>,
}

/// Probability-normalized real spherical harmonics of degrees 2 and 4
/// (E[Y] = 0 and E[Y²] = 1 under the uniform measure on S²), as
/// harmonic polynomials in the unit vector.
pub fn harmonics(lmax: u32) -> Result<Vec<(u32, fn(&[f64; 3]) -> f64)>> {
    if lmax < 2 || lmax % 2 != 0 {
        return Err(Error::InvalidParam(format!(
            "need even lmax ≥ 2, got {lmax}"
        )));
    }
    if lmax > 4 {
        return Err(Error::InvalidParam(format!(
            "the pinned harmonic library covers degrees 2 and 4, got lmax {lmax}"
        )));
    }
    let deg2: [fn(&[f64; 3]) -> f64; 5] = [
        |v| 15f64.sqrt() * v[0] * v[1],
        |v| 15f64.sqrt() * v[1] * v[2],
        |v| 15f64.sqrt() * v[0] * v[2],
        |v| 5f64.sqrt() / 2.0 * (3.0 * v[2] * v[2] - 1.0),
        |v| 15f64.sqrt() / 2.0 * (v[0] * v[0] - v[1] * v[1]),
    ];
    let deg4: [fn(&[f64; 3]) -> f64; 9] = [
        |v| 1.5 * 35f64.sqrt() * v[0] * v[1] * (v[0] * v[0] - v[1] * v[1]),
        |v| 0.75 * 70f64.sqrt() * v[1] * v[2] * (3.0 * v[0] * v[0] - v[1] * v[1]),
        |v| 1.5 * 5f64.sqrt() * v[0] * v[1] * (7.0 * v[2] * v[2] - 1.0),
        |v| 0.75 * 10f64.sqrt() * v[1] * v[2] * (7.0 * v[2] * v[2] - 3.0),
        |v| {
            let z2 = v[2] * v[2];
            0.375 * (35.0 * z2 * z2 - 30.0 * z2 + 3.0)
        },
        |v| 0.75 * 10f64.sqrt() * v[0] * v[2] * (7.0 * v[2] * v[2] - 3.0),
        |v| 0.75 * 5f64.sqrt() * (v[0] * v[0] - v[1] * v[1]) * (7.0 * v[2] * v[2] - 1.0),
        |v| 0.75 * 70f64.sqrt() * v[0] * v[2] * (v[0] * v[0] - 3.0 * v[1] * v[1]),
        |v| {
            let (x2, y2) = (v[0] * v[0], v[1] * v[1]);
            0.375 * 35f64.sqrt() * (x2 * x2 - 6.0 * x2 * y2 + y2 * y2)
        },
    ];
    let mut lib: Vec<(u32, fn(&[f64; 3]) -> f64)> =
        deg2.iter().map(|&f| (2, f)).collect();
    if lmax >= 4 {
        lib.extend(deg4.iter().map(|&f| (4, f)));
    }
    Ok(lib)
}

/// Maximal absolute Weyl sum over the even-degree harmonic library:
/// max_Y |mean(Y(dir))|. Zero in the limit for uniformly spread classes.
pub fn sphere_weyl(dirs: &[[f64; 3]], lmax: u32) -> Result<f64> {
    if dirs.is_empty() {
        return Err(Error::EmptyInput("no directions given".into()));
    }
    let lib = harmonics(lmax)?;
    let n = dirs.len() as f64;
    Ok(lib
        .iter()
        .map(|(_, y)| (dirs.iter().map(|v| y(v)).sum::<f64>() / n).abs())
        .fold(0.0, f64::max))
}

/// Empirical vs expected mass of the cusp neighborhood Im z > T in the
/// modular surface, from the heights Im z; the expected tail under the
/// normalized hyperbolic measure is 3/(πT).
pub fn cusp_tail(heights: &[f64], t: f64) -> Result<(f64, f64)> {
    if t < 1.0 {
        return Err(Error::InvalidParam(format!(
            "tail height must satisfy T ≥ 1, got {t}"
        )));
    }
    let expected = 3.0 / (std::f64::consts::PI * t);
    if heights.is_empty() {
        return Err(Error::EmptyInput("no CM points given".into()));
    }
    let above = heights.iter().filter(|&&y| y > t).count();
    Ok((above as f64 / heights.len() as f64, expected))
}

/// Which factor of the product space a test function reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Sphere1,
    Sphere2,
    Z(usize),
}

/// One centered test function from the pinned library.
#[derive(Clone)]
pub struct TestFn {
    pub name: &'static str,
    pub slot: Slot,
    eval: fn(&ExperimentRow) -> f64,
    mean: f64,
}

impl TestFn {
    pub fn centered(&self, row: &ExperimentRow) -> f64 {
        (self.eval)(row) - self.mean
    }
}

impl std::fmt::Debug for TestFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TestFn({}, {:?})", self.name, self.slot)
    }
}

/// Mean of cos(2πx) over the fundamental domain under dx dy / y²,
/// normalized by the domain area π/6. Nonzero because the bulge cuts
/// away small x below y = 1.
fn cos_x_domain_mean() -> f64 {
    static MEAN: OnceLock<f64> = OnceLock::new();
    *MEAN.get_or_init(|| {
        // inner x-integral is closed-form: ∫_{x₀}^{1/2} cos(2πx) dx
        // = −sin(2πx₀)/(2π) with x₀ = √(1−y²) for y < 1, else 0
        let g = |y: f64| {
            let x0 = (1.0 - y * y).max(0.0).sqrt();
            -(2.0 * std::f64::consts::PI * x0).sin() / (2.0 * std::f64::consts::PI) / (y * y)
        };
        let (lo, hi) = (3f64.sqrt() / 2.0, 1.0);
        let n = 20_000usize;
        let h = (hi - lo) / n as f64;
        let mut acc = g(lo) + g(hi);
        for k in 1..n {
            acc += g(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        (acc * h / 3.0) / (std::f64::consts::PI / 6.0)
    })
}

/// The pinned library: one degree-2 harmonic per sphere slot, and a
/// centered tail indicator plus a centered cos(2πx) per CM slot.
pub fn test_library() -> Vec<TestFn> {
    let tail_mean = 3.0 / (std::f64::consts::PI * T_TAIL);
    let mut lib = vec![
        TestFn {
            name: "s1_y22",
            slot: Slot::Sphere1,
            eval: |r| 15f64.sqrt() / 2.0 * (r.a1_dir[0] * r.a1_dir[0] - r.a1_dir[1] * r.a1_dir[1]),
            mean: 0.0,
        },
        TestFn {
            name: "s2_y2m2",
            slot: Slot::Sphere2,
            eval: |r| 15f64.sqrt() * r.a2_dir[0] * r.a2_dir[1],
            mean: 0.0,
        },
    ];
    let tails: [fn(&ExperimentRow) -> f64; 4] = [
        |r| if r.z_xy[0].1 > T_TAIL { 1.0 } else { 0.0 },
        |r| if r.z_xy[1].1 > T_TAIL { 1.0 } else { 0.0 },
        |r| if r.z_xy[2].1 > T_TAIL { 1.0 } else { 0.0 },
        |r| if r.z_xy[3].1 > T_TAIL { 1.0 } else { 0.0 },
    ];
    let cosines: [fn(&ExperimentRow) -> f64; 4] = [
        |r| (2.0 * std::f64::consts::PI * r.z_xy[0].0).cos(),
        |r| (2.0 * std::f64::consts::PI * r.z_xy[1].0).cos(),
        |r| (2.0 * std::f64::consts::PI * r.z_xy[2].0).cos(),
        |r| (2.0 * std::f64::consts::PI * r.z_xy[3].0).cos(),
    ];
    let tail_names = ["z1_tail", "z2_tail", "z3_tail", "z4_tail"];
    let cos_names = ["z1_cosx", "z2_cosx", "z3_cosx", "z4_cosx"];
    for i in 0..4 {
        lib.push(TestFn {
            name: tail_names[i],
            slot: Slot::Z(i),
            eval: tails[i],
            mean: tail_mean,
        });
        lib.push(TestFn {
            name: cos_names[i],
            slot: Slot::Z(i),
            eval: cosines[i],
            mean: cos_x_domain_mean(),
        });
    }
    lib
}

/// Empirical means of all pairwise products of centered test functions;
/// under joint equidistribution every entry tends to 0.
pub fn joint_correlation(rows: &[ExperimentRow], fns: &[TestFn]) -> Result<Vec<Vec<f64>>> {
    if rows.len() < 2 {
        return Err(Error::EmptyInput("need at least two rows".into()));
    }
    let n = rows.len() as f64;
    let values: Vec<Vec<f64>> = fns
        .iter()
        .map(|f| rows.iter().map(|r| f.centered(r)).collect())
        .collect();
    Ok((0..fns.len())
        .map(|i| {
            (0..fns.len())
                .map(|j| {
                    values[i]
                        .iter()
                        .zip(&values[j])
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        / n
                })
                .collect()
        })
        .collect())
}

fn unit_dir(coords: [crate::Int; 3], d: i64) -> [f64; 3] {
    let s = (d as f64).sqrt();
    let dir = std::array::from_fn(|i| coords[i].to_f64().expect("sphere point fits f64") / s);
    debug_assert!(
        (dir.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12,
        "direction must be unit length"
    );
    dir
}

fn row_for(d: i64, plane: &RationalPlane) -> ExperimentRow {
    let pair = klein_pair(plane);
    let forms = [
        gram_form(plane),
        gram_form(&orthocomplement(plane)),
        ortho_lattice(&pair.a1).expect("nonzero sphere point").gram_form,
        ortho_lattice(&pair.a2).expect("nonzero sphere point").gram_form,
    ];
    let z: [CMPoint; 4] = std::array::from_fn(|i| {
        cm_point(&forms[i]).expect("plane forms are positive definite")
    });
    let z_xy = std::array::from_fn(|i| {
        let (x, y) = z[i].z();
        debug_assert!((0.0..=0.5).contains(&x) && x * x + y * y >= 1.0 - 1e-12);
        (x, y)
    });
    ExperimentRow {
        d,
        a1_dir: unit_dir(pair.a1.coords(), d),
        a2_dir: unit_dir(pair.a2.coords(), d),
        z_xy,
    }
}

/// One row per plane above disc D, in the canonical plane order.
pub fn experiment_rows(d: i64) -> Vec<ExperimentRow> {
    enumerate_planes(d).iter().map(|p| row_for(d, p)).collect()
}

/// Rows above disc D for the planes whose glue type matches `key`.
fn isotype_rows(d: i64, key: &str) -> Vec<ExperimentRow> {
    enumerate_planes(d)
        .iter()
        .filter(|p| glue_type_key(p) == key)
        .map(|p| row_for(d, p))
        .collect()
}

/// Which D, and which planes per D, an experiment takes in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExperimentMode {
    All,
    SquareFree,
    /// Restrict every D to planes sharing the glue type of the plane at
    /// `index` in the canonical order above disc `d`.
    Isotype { d: i64, index: usize },
}

/// Diagnostics for one D, over the given subset of its planes.
fn report_for(d: i64, rows: &[ExperimentRow]) -> StatsReport {
    let a1: Vec<[f64; 3]> = rows.iter().map(|r| r.a1_dir).collect();
    let a2: Vec<[f64; 3]> = rows.iter().map(|r| r.a2_dir).collect();
    let sphere_disc = [
        sphere_weyl(&a1, 4).expect("nonempty rows"),
        sphere_weyl(&a2, 4).expect("nonempty rows"),
    ];
    let cusp_dev: [f64; 4] = std::array::from_fn(|i| {
        let ys: Vec<f64> = rows.iter().map(|r| r.z_xy[i].1).collect();
        let (emp, exp) = cusp_tail(&ys, T_TAIL).expect("T_TAIL ≥ 1, nonempty");
        (emp - exp).abs()
    });
    let joint = if rows.len() >= 2 {
        joint_correlation(rows, &test_library()).expect("≥ 2 rows")
    } else {
        Vec::new()
    };
    let report = StatsReport {
        d,
        library: LIB_VERSION,
        sample_size: rows.len(),
        sphere_disc,
        cusp_dev,
        joint,
    };
    debug_assert!(
        report.sphere_disc.iter().all(|x| x.is_finite())
            && report.cusp_dev.iter().all(|x| x.is_finite())
            && report.joint.iter().flatten().all(|x| x.is_finite())
    );
    report
}

/// Sweep D in [d_from, d_to] with the splitting filter −D a nonzero
/// square mod p and mod q, and emit one report per surviving D, ordered.
pub fn run_experiment(
    d_from: i64,
    d_to: i64,
    p: i64,
    q: i64,
    mode: ExperimentMode,
) -> Result<Vec<StatsReport>> {
    if p == q {
        return Err(Error::InvalidParam(format!(
            "splitting primes must differ, got p = q = {p}"
        )));
    }
    let isotype_key = match &mode {
        ExperimentMode::Isotype { d, index } => {
            let planes = enumerate_planes(*d);
            let plane = planes.get(*index).ok_or_else(|| {
                Error::InvalidParam(format!(
                    "isotype reference {d}:{index} is out of range ({} planes)",
                    planes.len()
                ))
            })?;
            Some(glue_type_key(plane))
        }
        _ => None,
    };
    let admissible: Vec<i64> = (d_from.max(1)..=d_to)
        .map(|d| -> Result<(i64, bool)> {
            let split = crate::counting::legendre(-d, p)? == 1
                && crate::counting::legendre(-d, q)? == 1;
            Ok((d, split && in_disc_set(d)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter_map(|(d, keep)| {
            let sf_ok = !matches!(mode, ExperimentMode::SquareFree) || is_squarefree(d);
            (keep && sf_ok).then_some(d)
        })
        .collect();
    // one D's rows exist at a time per worker: a deep sweep produces tens
    // of millions of rows in total, far past what fits in memory at once
    Ok(admissible
        .into_par_iter()
        .filter_map(|d| {
            let rows = match &isotype_key {
                Some(key) => isotype_rows(d, key),
                None => experiment_rows(d),
            };
            (!rows.is_empty()).then(|| report_for(d, &rows))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        (1..=n)
            .map(|k| {
                let mut x = (std::f64::consts::PI * (k as f64 - 0.25) / (n as f64 + 0.5)).cos();
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0f64, x);
                    for j in 2..=n {
                        let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                        p0 = p1;
                        p1 = pj;
                    }
                    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-15 {
                        break;
                    }
                }
                let (mut p0, mut p1) = (1.0f64, x);
                for j in 2..=n {
                    let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = pj;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    }

    /// Integrate f over S² against the uniform probability measure with
    /// a product rule exact for polynomials of this degree.
    fn sphere_mean(f: impl Fn(&[f64; 3]) -> f64) -> f64 {
        let nodes = gauss_legendre(16);
        let m = 32usize;
        let mut acc = 0.0;
        for &(t, w) in &nodes {
            let s = (1.0 - t * t).sqrt();
            for k in 0..m {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                acc += w * f(&[s * phi.cos(), s * phi.sin(), t]) / m as f64;
            }
        }
        acc / 2.0
    }

    #[test]
    fn harmonics_probability_normalized() {
        let lib = harmonics(4).unwrap();
        assert_eq!(lib.len(), 14);
        for (deg, y) in &lib {
            assert!(sphere_mean(y).abs() < 1e-12, "E[Y] ≠ 0 at degree {deg}");
            assert!(
                (sphere_mean(|v| y(v) * y(v)) - 1.0).abs() < 1e-12,
                "E[Y²] ≠ 1 at degree {deg}"
            );
        }
        assert!(harmonics(3).is_err());
        assert!(harmonics(0).is_err());
        assert!(harmonics(6).is_err());
    }

    #[test]
    fn weyl_sum_examples() {
        let axes: Vec<[f64; 3]> = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        // all degree-2 harmonics vanish on the axis orbit
        assert!(sphere_weyl(&axes, 2).unwrap() < 1e-15);
        // degree 4 detects the cubical clustering
        assert!(sphere_weyl(&axes, 4).unwrap() > 1.0);

        let single = vec![[0.0, 0.0, 1.0]];
        let disc = sphere_weyl(&single, 2).unwrap();
        assert!((disc - 5f64.sqrt()).abs() < 1e-12);
        assert!(disc > 0.0);

        assert!(matches!(sphere_weyl(&[], 2), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn weyl_sum_antipodal_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dirs: Vec<[f64; 3]> = (0..50).map(|_| random_dir(&mut rng)).collect();
        let doubled: Vec<[f64; 3]> = dirs
            .iter()
            .cloned()
            .chain(dirs.iter().map(|v| [-v[0], -v[1], -v[2]]))
            .collect();
        let half = sphere_weyl(&dirs, 4).unwrap();
        let full = sphere_weyl(&doubled, 4).unwrap();
        assert!((half - full).abs() < 1e-12);
    }

    #[test]
    fn cusp_tail_against_integration_oracle() {
        let y_i = unit_point().z().1;
        for t in [1.0f64, 1.5, 2.0, 5.0, 20.0] {
            let (_, expected) = cusp_tail(&[y_i], t).unwrap();
            // oracle: ∫_{y>T, 0≤x≤1/2} dx dy/y² / (π/6) via y = T·e^u
            let n = 4000usize;
            let h = 40.0 / n as f64;
            let g = |u: f64| (-u as f64).exp() / t;
            let mut acc = g(0.0) + g(40.0);
            for k in 1..n {
                acc += g(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            let oracle = 0.5 * (acc * h / 3.0) / (std::f64::consts::PI / 6.0);
            assert!(
                (expected - oracle).abs() < 1e-6,
                "tail formula vs integration at T = {t}"
            );
        }
        let (_, e2) = cusp_tail(&[y_i], 2.0).unwrap();
        assert!((e2 - 3.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        let (_, einf) = cusp_tail(&[y_i], 1e9).unwrap();
        assert!(einf < 1e-8);

        let at_i = vec![y_i; 5];
        let (emp, _) = cusp_tail(&at_i, 2.0).unwrap();
        assert_eq!(emp, 0.0);

        assert!(cusp_tail(&at_i, 0.5).is_err());
        assert!(cusp_tail(&[], 2.0).is_err());
    }

    /// The CM point i (reduced form x² + y²).
    fn unit_point() -> CMPoint {
        cm_point(&crate::forms_cm::BinaryForm::new(1, 0, 1)).unwrap()
    }

    fn random_dir(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let g: [f64; 3] = std::array::from_fn(|_| {
                let (u1, u2): (f64, f64) = (rng.gen_range(1e-12..1.0), rng.gen());
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            });
            let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-6 {
                return std::array::from_fn(|i| g[i] / n);
            }
        }
    }

    /// A point with the hyperbolic distribution on the fundamental domain.
    fn random_domain_point(rng: &mut ChaCha8Rng) -> (f64, f64) {
        loop {
            let y = 3f64.sqrt() / 2.0 / (1.0 - rng.gen_range(0.0..1.0f64));
            let x = rng.gen_range(0.0..0.5f64);
            if x * x + y * y >= 1.0 {
                return (x, y);
            }
        }
    }

    fn synthetic_row(rng: &mut ChaCha8Rng) -> ExperimentRow {
        ExperimentRow {
            d: 0,
            a1_dir: random_dir(rng),
            a2_dir: random_dir(rng),
            z_xy: std::array::from_fn(|_| random_domain_point(rng)),
        }
    }

    #[test]
    fn joint_correlation_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<ExperimentRow> = (0..4096).map(|_| synthetic_row(&mut rng)).collect();
        let lib = test_library();
        let m = joint_correlation(&rows, &lib).unwrap();

        // independent uniform factors: cross-slot entries are O(N^{-1/2})
        let mut cross = Vec::new();
        for i in 0..lib.len() {
            for j in 0..lib.len() {
                if lib[i].slot != lib[j].slot {
                    cross.push(m[i][j].abs());
                    assert!(
                        m[i][j].abs() < 0.1,
                        "{} × {} = {}",
                        lib[i].name,
                        lib[j].name,
                        m[i][j]
                    );
                }
            }
        }
        // negative control: variances dwarf the cross terms
        cross.sort_by(f64::total_cmp);
        let median = cross[cross.len() / 2];
        let min_diag = (0..lib.len()).map(|i| m[i][i]).fold(f64::INFINITY, f64::min);
        assert!(min_diag > 0.0);
        assert!(min_diag > 5.0 * median);

        // duplicated factor: correlation is the shared variance, far from 0
        let tail1 = lib.iter().position(|f| f.name == "z1_tail").unwrap();
        let p = 2.0 / std::f64::consts::PI;
        assert!((m[tail1][tail1] - p * (1.0 - p)).abs() < 0.05);

        assert!(joint_correlation(&rows[..1], &lib).is_err());
    }

    #[test]
    fn experiment_rows_invariants() {
        for d in [3i64, 4, 5, 50] {
            let rows = experiment_rows(d);
            assert_eq!(rows.len(), enumerate_planes(d).len());
            for r in &rows {
                for dir in [r.a1_dir, r.a2_dir] {
                    let n = dir.iter().map(|x| x * x).sum::<f64>();
                    assert!((n - 1.0).abs() < 1e-12);
                }
                for &(x, y) in &r.z_xy {
                    assert!((0.0..=0.5).contains(&x), "x out of domain");
                    assert!(x * x + y * y >= 1.0 - 1e-12, "below the unit circle");
                }
            }
        }
    }

    #[test]
    fn splitting_filter() {
        // −5 ≡ 0 mod 5: not a nonzero square, so D = 5 is excluded
        let reports = run_experiment(5, 5, 5, 13, ExperimentMode::All).unwrap();
        assert!(reports.is_empty());

        // −2 is a square mod 3 but not mod 7
        let reports = run_experiment(2, 2, 3, 7, ExperimentMode::All).unwrap();
        assert!(reports.is_empty());

        // D = 311 passes both Legendre filters but sits in the excluded
        // residue 7 mod 16
        assert_eq!(crate::counting::legendre(-311, 3).unwrap(), 1);
        assert_eq!(crate::counting::legendre(-311, 7).unwrap(), 1);
        assert!(!in_disc_set(311));
        let reports = run_experiment(300, 320, 3, 7, ExperimentMode::All).unwrap();
        assert!(reports.iter().all(|r| r.d != 311));

        let reports = run_experiment(50, 60, 3, 7, ExperimentMode::All).unwrap();
        let d59: Vec<i64> = reports.iter().map(|r| r.d).collect();
        assert!(d59.contains(&59));
        for r in &reports {
            assert_eq!(r.d % 3, 2);
            assert!([3, 5, 6].contains(&(r.d % 7)));
            assert!(in_disc_set(r.d));
            assert_eq!(r.sample_size, enumerate_planes(r.d).len());
            assert!(r.sphere_disc.iter().all(|x| x.is_finite()));
            assert!(r.cusp_dev.iter().all(|x| x.is_finite()));
            assert_eq!(r.library, LIB_VERSION);
        }

        assert!(run_experiment(1, 10, 3, 3, ExperimentMode::All).is_err());
        assert!(run_experiment(1, 10, 2, 5, ExperimentMode::All).is_err());
        assert!(run_experiment(1, 10, 3, 9, ExperimentMode::All).is_err());
    }

    #[test]
    fn squarefree_and_isotype_modes() {
        let all = run_experiment(1, 80, 3, 7, ExperimentMode::All).unwrap();
        let sf = run_experiment(1, 80, 3, 7, ExperimentMode::SquareFree).unwrap();
        let sf_ds: Vec<i64> = sf.iter().map(|r| r.d).collect();
        assert!(sf.len() <= all.len());
        assert!(sf_ds.iter().all(|&d| is_squarefree(d)));

        // restrict to the glue type of the first plane above D = 50;
        // −50 is a nonzero square mod 3 and mod 11, so D = 50 survives
        let iso = run_experiment(
            50,
            50,
            3,
            11,
            ExperimentMode::Isotype { d: 50, index: 0 },
        )
        .unwrap();
        let all_50 = run_experiment(50, 50, 3, 11, ExperimentMode::All).unwrap();
        assert_eq!(all_50.len(), 1);
        assert_eq!(iso.len(), 1);
        let ref_key = glue_type_key(&enumerate_planes(50)[0]);
        let expected = enumerate_planes(50)
            .iter()
            .filter(|p| glue_type_key(p) == ref_key)
            .count();
        assert_eq!(iso[0].sample_size, expected);
        // D = 50 carries two glue types, so the restriction is proper
        assert!(iso[0].sample_size < all_50[0].sample_size);
        assert!(iso[0].sample_size > 0);

        assert!(run_experiment(
            1,
            10,
            3,
            7,
            ExperimentMode::Isotype { d: 3, index: 99 }
        )
        .is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_experiment(1, 60, 3, 7, ExperimentMode::All).unwrap();
        let b = run_experiment(1, 60, 3, 7, ExperimentMode::All).unwrap();
        assert_eq!(a, b);
    }
}
