//! The acceptance gate: ten executable criteria covering the worked
//! examples, correspondence round-trips, existence and oracle sweeps,
//! local form and glue identities, finite-field counts, class-group
//! coherence, and the equidistribution trend.
//!
//! Each criterion reports one deterministic pass/fail line; the CLI
//! selftest and the integration suite both run the same functions.

use std::time::Instant;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::counting::{legendre, rp_alpha, w_count_mod_p, CountMethod};
use crate::forms_cm::{
    class_group, coherence_check, form_content, reduce_gl2, BinaryForm, CoherenceReport,
};
use crate::glue::{glue_group, gram_of_plane, local_type_odd, local_type_two};
use crate::klein::{inverse_klein, klein_pair, KleinPair};
use crate::planes::{
    enumerate_planes, enumerate_planes_wedge_oracle, gram_form, in_disc_set, is_squarefree,
    ortho_lattice, orthocomplement, plane_from_span, planes_exist,
};
use crate::quat_core::{content, PureVec};
use crate::stats::{run_experiment, test_library, ExperimentMode};
use crate::{Int, Quaternion, Result};

/// Sweep sizes: `Full` runs the documented bounds, `Quick` a reduced
/// version with the same structure (used by `selftest --quick`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Full,
    Quick,
}

pub const CRITERION_COUNT: usize = 10;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub millis: u128,
}

/// The deterministic log line for a criterion (no timing, so logs of
/// repeated runs are byte-identical).
pub fn format_line(r: &CriterionResult) -> String {
    format!(
        "criterion {:02} {} {}: {}",
        r.id,
        if r.pass { "PASS" } else { "FAIL" },
        r.title,
        r.detail
    )
}

const TITLES: [&str; CRITERION_COUNT] = [
    "worked examples exact",
    "correspondence round-trip",
    "existence criterion",
    "wedge oracle equivalence",
    "discriminant identities",
    "local form analysis",
    "glue local formulas",
    "finite-field counts",
    "class group and coherence",
    "equidistribution trend",
];

/// Wall-clock budgets in milliseconds, enforced at full scale where the
/// criterion states one.
fn budget_millis(id: usize) -> Option<u128> {
    match id {
        1 => Some(1_000),
        2 => Some(120_000),
        3 => Some(600_000),
        8 => Some(60_000),
        10 => Some(1_800_000),
        _ => None,
    }
}

pub fn run_criterion(id: usize, scale: Scale) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => c1_worked_examples(),
        2 => c2_round_trip(scale),
        3 => c3_existence(scale),
        4 => c4_wedge_oracle(scale),
        5 => c5_disc_identities(scale),
        6 => c6_local_forms(scale),
        7 => c7_glue_formulas(scale),
        8 => c8_finite_field_counts(),
        9 => c9_class_group(scale),
        10 => c10_equidistribution(scale),
        _ => panic!("criterion id out of range: {id}"),
    };
    let millis = start.elapsed().as_millis();
    let (mut pass, mut detail) = match outcome {
        Ok((p, d)) => (p, d),
        Err(e) => (false, format!("error: {e}")),
    };
    if scale == Scale::Full {
        if let Some(limit) = budget_millis(id) {
            if millis > limit {
                pass = false;
                detail.push_str("; time budget exceeded");
            }
        }
    }
    CriterionResult {
        id,
        title: TITLES[id - 1],
        pass,
        detail,
        millis,
    }
}

pub fn run_all(scale: Scale) -> Vec<CriterionResult> {
    (1..=CRITERION_COUNT).map(|id| run_criterion(id, scale)).collect()
}

fn quat(c: [i64; 4]) -> Quaternion {
    Quaternion::new(c[0].into(), c[1].into(), c[2].into(), c[3].into())
}

fn pure(c: [i64; 3]) -> PureVec<Int> {
    PureVec::new(c[0].into(), c[1].into(), c[2].into())
}

fn c1_worked_examples() -> Result<(bool, String)> {
    let cases: [([i64; 4], [i64; 4], i64, [i64; 3], [i64; 3], (i64, i64, i64)); 3] = [
        ([1, 1, 0, 0], [0, 1, 1, 0], 3, [-1, -1, -1], [-1, -1, 1], (2, 2, 2)),
        ([1, 1, 0, 0], [0, 0, 1, 1], 4, [0, 0, -2], [0, -2, 0], (2, 0, 2)),
        ([1, 2, 0, 0], [0, 0, 1, 3], 50, [0, 5, -5], [0, -7, -1], (5, 0, 10)),
    ];
    for (v1c, v2c, d, raw1, raw2, form) in cases {
        let (v1, v2) = (quat(v1c), quat(v2c));
        let plane = plane_from_span(&v1, &v2)?;
        if plane.disc != Int::from(d) {
            return Ok((false, format!("disc mismatch at D = {d}")));
        }
        let p1 = (v1.clone() * v2.conj()).pure_part();
        let p2 = (v2.conj() * v1.clone()).pure_part();
        if p1 != pure(raw1) || p2 != pure(raw2) {
            return Ok((false, format!("printed associated points differ at D = {d}")));
        }
        if klein_pair(&plane) != KleinPair::new(p1, p2) {
            return Ok((false, format!("pair class mismatch at D = {d}")));
        }
        let reduced = reduce_gl2(&gram_form(&plane))?;
        if reduced != BinaryForm::new(form.0, form.1, form.2) {
            return Ok((false, format!("reduced form mismatch at D = {d}")));
        }
    }
    Ok((true, "3 worked planes: points, discs {3,4,50}, forms bit-exact".into()))
}

fn c2_round_trip(scale: Scale) -> Result<(bool, String)> {
    let bound = match scale {
        Scale::Full => 500,
        Scale::Quick => 60,
    };
    let per_d: Vec<(usize, usize)> = (1..=bound)
        .into_par_iter()
        .filter(|&d| in_disc_set(d))
        .map(|d| {
            let planes = enumerate_planes(d);
            let ok = planes
                .iter()
                .filter(|p| {
                    let k = klein_pair(p);
                    match inverse_klein(&k.a1, &k.a2) {
                        Ok(q) => &q == *p && klein_pair(&q) == k,
                        Err(_) => false,
                    }
                })
                .count();
            (ok, planes.len())
        })
        .collect();
    let total: usize = per_d.iter().map(|&(_, n)| n).sum();
    let good: usize = per_d.iter().map(|&(ok, _)| ok).sum();
    Ok((
        good == total,
        format!("{good}/{total} planes round-trip over D ≤ {bound}"),
    ))
}

fn c3_existence(scale: Scale) -> Result<(bool, String)> {
    let bound = match scale {
        Scale::Full => 2000,
        Scale::Quick => 200,
    };
    let mismatches: Vec<i64> = (1..=bound)
        .into_par_iter()
        .filter(|&d| planes_exist(d) != in_disc_set(d))
        .collect();
    Ok((
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("R_D emptiness matches D mod 16 ∈ {{0,7,12,15}} for all D ≤ {bound}")
        } else {
            format!("mismatches at D = {mismatches:?}")
        },
    ))
}

fn c4_wedge_oracle(scale: Scale) -> Result<(bool, String)> {
    let bound = match scale {
        Scale::Full => 200,
        Scale::Quick => 40,
    };
    let bad: Vec<i64> = (1..=bound)
        .into_par_iter()
        .filter(|&d| {
            let mut oracle: Vec<[Int; 6]> = enumerate_planes_wedge_oracle(d)
                .1
                .into_iter()
                .map(|w| w.0)
                .collect();
            let mut pipeline: Vec<[Int; 6]> =
                enumerate_planes(d).into_iter().map(|p| p.wedge.0).collect();
            oracle.sort();
            pipeline.sort();
            oracle != pipeline
        })
        .collect();
    Ok((
        bad.is_empty(),
        if bad.is_empty() {
            format!("wedge sets equal for all D ≤ {bound}")
        } else {
            format!("wedge set differs at D = {bad:?}")
        },
    ))
}

fn c5_disc_identities(scale: Scale) -> Result<(bool, String)> {
    let bound = match scale {
        Scale::Full => 500,
        Scale::Quick => 60,
    };
    let counts: Vec<(usize, usize)> = (1..=bound)
        .into_par_iter()
        .filter(|&d| in_disc_set(d))
        .map(|d| {
            let dd = Int::from(d);
            let planes = enumerate_planes(d);
            let ok = planes
                .iter()
                .filter(|p| {
                    let k = klein_pair(p);
                    k.a1.norm() == dd
                        && k.a2.norm() == dd
                        && p.disc == dd
                        && orthocomplement(p).disc == dd
                        && p.wedge.norm() == dd
                })
                .count();
            (ok, planes.len())
        })
        .collect();
    let total: usize = counts.iter().map(|&(_, n)| n).sum();
    let good: usize = counts.iter().map(|&(ok, _)| ok).sum();
    Ok((
        good == total,
        format!("{good}/{total} planes satisfy all five equalities over D ≤ {bound}"),
    ))
}

fn ord_p_small(n: &Int, p: i64) -> u32 {
    let mut n = n.to_i64().expect("content fits i64");
    let mut k = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

fn odd_primes_of(mut n: i64) -> Vec<i64> {
    let mut out = Vec::new();
    while n % 2 == 0 {
        n /= 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn c6_local_forms(scale: Scale) -> Result<(bool, String)> {
    let bound = match scale {
        Scale::Full => 1000,
        Scale::Quick => 120,
    };
    let form_failures: Vec<i64> = (1..=bound)
        .into_par_iter()
        .filter(|&d| in_disc_set(d))
        .filter(|&d| {
            !enumerate_planes(d).iter().all(|plane| {
                let q = gram_form(plane);
                let cq = form_content(&q).expect("nonzero form");
                let k = klein_pair(plane);
                let c1 = content(&k.a1.coords()).expect("nonzero point");
                let c2 = content(&k.a2.coords()).expect("nonzero point");
                let mixed = (&cq * &c1 * &c2).to_i64().unwrap_or(i64::MAX);
                let odd_ok = odd_primes_of(mixed).into_iter().all(|p| {
                    ord_p_small(&cq, p) == ord_p_small(&c1, p).max(ord_p_small(&c2, p))
                });
                let two_ok = ord_p_small(&cq, 2) <= 4;
                let sf_ok = !is_squarefree(d) || cq == Int::from(1) || cq == Int::from(2);
                odd_ok && two_ok && sf_ok
            })
        })
        .collect();

    let parity_failures: Vec<i64> = (1..=bound)
        .into_par_iter()
        .filter(|&d| {
            let expected = Int::from(if d % 4 == 3 { 2 } else { 1 });
            !crate::planes::fast::sphere_points(d)
                .into_iter()
                .filter(|v| crate::planes::gcd_i64(crate::planes::gcd_i64(v[0], v[1]), v[2]) == 1)
                .all(|v| {
                    assert_ne!(d % 4, 0, "no primitive points on 4 | D spheres");
                    let lat = ortho_lattice(&pure([v[0], v[1], v[2]])).expect("nonzero");
                    form_content(&lat.gram_form).expect("definite form") == expected
                })
        })
        .collect();

    let pass = form_failures.is_empty() && parity_failures.is_empty();
    Ok((
        pass,
        if pass {
            format!("content identities and parity rule hold for all D, norms ≤ {bound}")
        } else {
            format!("form failures {form_failures:?}, parity failures {parity_failures:?}")
        },
    ))
}

fn c7_glue_formulas(scale: Scale) -> Result<(bool, String)> {
    let bound = match scale {
        Scale::Full => 500,
        Scale::Quick => 80,
    };
    let failures: Vec<i64> = (1..=bound)
        .into_par_iter()
        .filter(|&d| in_disc_set(d))
        .filter(|&d| {
            !enumerate_planes(d).iter().all(|plane| {
                let g = glue_group(&gram_of_plane(plane)).expect("plane gram");
                if g.order() != Int::from(d) {
                    return false;
                }
                let k = klein_pair(plane);
                let (mut d1, mut d2) = (1i64, 1i64);
                for p in odd_primes_of(d) {
                    let (e1, e2) = local_type_odd(d, &k.a1, &k.a2, p);
                    d1 *= p.pow(e1.min(e2));
                    d2 *= p.pow(e1.max(e2));
                }
                let (t1, t2) = local_type_two(d).expect("D in the existence set");
                d1 *= 2i64.pow(t1.min(t2));
                d2 *= 2i64.pow(t1.max(t2));
                g.divisors == vec![Int::from(d1), Int::from(d2)]
            })
        })
        .collect();
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!("SNF glue factors match the local product and |G| = D for all D ≤ {bound}")
        } else {
            format!("local product mismatch at D = {failures:?}")
        },
    ))
}

fn c8_finite_field_counts() -> Result<(bool, String)> {
    for p in [3i64, 5, 7, 11, 13] {
        for alpha in 0..p {
            if rp_alpha(p, alpha, CountMethod::Formula)? != rp_alpha(p, alpha, CountMethod::Brute)? {
                return Ok((false, format!("sphere count formula fails at p={p}, α={alpha}")));
            }
        }
    }
    let mut fraction_exceptions = Vec::new();
    for p in [3i64, 5, 7] {
        let mut total = 0i64;
        let mut square_side = 0i64;
        for alpha in 0..p {
            let w = w_count_mod_p(p, alpha)?;
            let r = rp_alpha(p, alpha, CountMethod::Formula)?;
            let expected = if alpha == 0 { r * r - 1 } else { r * r };
            if w != expected {
                return Ok((false, format!("wedge-count identity fails at p={p}, α={alpha}")));
            }
            total += w;
            if alpha != 0 && legendre(-alpha, p)? == 1 {
                square_side += w;
            }
        }
        if 3 * square_side > 2 * total || 3 * (total - square_side) > 2 * total {
            fraction_exceptions.push((p, square_side, total));
        }
    }
    Ok((
        fraction_exceptions.is_empty(),
        if fraction_exceptions.is_empty() {
            "sphere formula exact for p ≤ 13; wedge identity exact and both density \
             sides ≤ 2/3 for p ∈ {3,5,7}"
                .into()
        } else {
            format!("density fraction exceptions: {fraction_exceptions:?}")
        },
    ))
}

fn c9_class_group(scale: Scale) -> Result<(bool, String)> {
    let (axiom_bound, coherence_bound) = match scale {
        Scale::Full => (200, 300),
        Scale::Quick => (40, 60),
    };
    let axiom_failures: Vec<i64> = (1..=axiom_bound)
        .into_par_iter()
        .filter(|&d| {
            let cg = match class_group(&Int::from(-4 * d)) {
                Ok(cg) => cg,
                Err(_) => return true,
            };
            let n = cg.order();
            let ok_identity = (0..n).all(|i| cg.compose_indices(0, i) == i);
            let ok_inverse = (0..n).all(|i| cg.compose_indices(i, cg.inverse_index(i)) == 0);
            let ok_assoc = (0..n).all(|i| {
                (0..n).all(|j| {
                    (0..n).all(|k| {
                        cg.compose_indices(cg.compose_indices(i, j), k)
                            == cg.compose_indices(i, cg.compose_indices(j, k))
                    })
                })
            });
            !(ok_identity && ok_inverse && ok_assoc)
        })
        .collect();

    let h4 = class_group(&Int::from(-4))?;
    let h20 = class_group(&Int::from(-20))?;
    let oracle_ok = h4.order() == 1
        && h4.elements == vec![BinaryForm::new(1, 0, 1)]
        && h20.order() == 2
        && h20.elements == vec![BinaryForm::new(1, 0, 5), BinaryForm::new(2, 2, 3)];

    // the ≤ 2·|2-torsion| count is a documented empirical expectation, not a
    // theorem: c1/c2 need only be constant per packet, and packet counts can
    // exceed it; excess is a reported finding, errors are failures
    let coherence_ds: Vec<i64> = (1..=coherence_bound)
        .filter(|&d| is_squarefree(d) && (d % 4 == 1 || d % 4 == 2))
        .collect();
    let reports: Vec<(i64, Result<CoherenceReport>)> = coherence_ds
        .into_par_iter()
        .map(|d| (d, coherence_check(d)))
        .collect();
    let mut errors = Vec::new();
    let mut excess = Vec::new();
    let mut met = 0usize;
    let mut total = 0usize;
    for (d, r) in &reports {
        match r {
            Err(e) => errors.push(format!("D={d}: {e}")),
            Ok(rep) => {
                total += 1;
                if rep.meets_documented_bound() {
                    met += 1;
                } else {
                    excess.push((*d, rep.distinct_c1(), rep.distinct_c2(), 2 * rep.two_torsion));
                }
            }
        }
    }

    let pass = axiom_failures.is_empty() && oracle_ok && errors.is_empty();
    let excess_note = if excess.is_empty() {
        "none".to_string()
    } else {
        format!("{excess:?}")
    };
    Ok((
        pass,
        if pass {
            format!(
                "axioms exhaustive for D ≤ {axiom_bound}; h(−4)=1, h(−20)=2 with printed \
                 elements; coherence over square-free D ≤ {coherence_bound}: {met}/{total} \
                 meet the 2·|2-torsion| expectation, excess findings (D, c1, c2, expected): \
                 {excess_note}"
            )
        } else {
            format!(
                "axiom failures {axiom_failures:?}; oracle ok: {oracle_ok}; coherence \
                 errors: {errors:?}; excess findings (D, c1, c2, expected): {excess_note}"
            )
        },
    ))
}

fn c10_equidistribution(scale: Scale) -> Result<(bool, String)> {
    let (bound, single_thread) = match scale {
        Scale::Full => (3000, true),
        Scale::Quick => (600, false),
    };
    let body = || -> Result<(bool, String)> {
        let reports = run_experiment(1, bound, 3, 7, ExperimentMode::All)?;
        let n = reports.len();
        if n < 8 {
            return Ok((false, format!("only {n} admissible D ≤ {bound}")));
        }
        let q = n.div_ceil(4);
        let sphere: Vec<f64> = reports
            .iter()
            .map(|r| (r.sphere_disc[0] + r.sphere_disc[1]) / 2.0)
            .collect();
        let cusp: Vec<f64> = reports
            .iter()
            .map(|r| r.cusp_dev.iter().sum::<f64>() / 4.0)
            .collect();
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let (s_bot, s_top) = (mean(&sphere[..q]), mean(&sphere[n - q..]));
        let (c_bot, c_top) = (mean(&cusp[..q]), mean(&cusp[n - q..]));

        // pooled control matrix over the ten largest D: per-D joint entries
        // are means of per-row products, so the union's matrix is exactly
        // their sample-size-weighted average
        let control: Vec<_> = reports[n - 10.min(n)..]
            .iter()
            .filter(|r| !r.joint.is_empty())
            .collect();
        if control.is_empty() {
            return Ok((false, format!("no control reports near D = {bound}")));
        }
        let lib = test_library();
        let total: f64 = control.iter().map(|r| r.sample_size as f64).sum();
        let mut m = vec![vec![0.0f64; lib.len()]; lib.len()];
        for r in &control {
            let w = r.sample_size as f64 / total;
            for i in 0..lib.len() {
                for j in 0..lib.len() {
                    m[i][j] += w * r.joint[i][j];
                }
            }
        }
        let mut cross: Vec<f64> = Vec::new();
        for i in 0..lib.len() {
            for j in 0..lib.len() {
                if lib[i].slot != lib[j].slot {
                    cross.push(m[i][j].abs());
                }
            }
        }
        cross.sort_by(f64::total_cmp);
        let median = cross[cross.len() / 2];
        let min_diag = (0..lib.len()).map(|i| m[i][i]).fold(f64::INFINITY, f64::min);
        let control_ok = min_diag > 5.0 * median;

        let pass = s_top < s_bot && c_top < c_bot && control_ok;
        Ok((
            pass,
            format!(
                "{n} admissible D ≤ {bound}; sphere {s_bot:.5}→{s_top:.5}, cusp \
                 {c_bot:.5}→{c_top:.5}, control min diag {min_diag:.4} vs 5×median {:.4}",
                5.0 * median
            ),
        ))
    };
    if single_thread {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool");
        pool.install(body)
    } else {
        body()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_scale_runs_clean() {
        for id in [1usize, 4, 8] {
            let r = run_criterion(id, Scale::Quick);
            assert!(r.pass, "{}", format_line(&r));
            assert_eq!(r.title, TITLES[id - 1]);
        }
    }

    #[test]
    fn format_is_stable() {
        let r = CriterionResult {
            id: 3,
            title: "existence criterion",
            pass: true,
            detail: "ok".into(),
            millis: 17,
        };
        assert_eq!(format_line(&r), "criterion 03 PASS existence criterion: ok");
    }
}
