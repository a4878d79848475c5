//! The six subcommands: record construction and the per-command CSV
//! projections, all streamed through an `Emitter` in deterministic order.

use qg_core::acceptance::{format_line, run_all, Scale};
use qg_core::counting::{r3, r3_prim_survey, rp_alpha, w_count_mod_p_extended, CountMethod};
use qg_core::forms_cm::{class_group, cm_point, BinaryForm};
use qg_core::glue::{glue_of_plane, glue_type_key};

use qg_core::planes::{
    enumerate_planes, enumerate_planes_wedge_oracle, gram_form, is_squarefree, ortho_lattice,
    orthocomplement, RationalPlane,
};
use qg_core::stats::{run_experiment, ExperimentMode};
use qg_core::Int;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{
    csv_ints, input_err, invariant_err, json_i64, json_int, json_int_slice, CliError, CliResult,
    Emitter, Sink,
};

/// D values processed per parallel batch, bounding record memory.
const BATCH: usize = 64;

/// Reference to one plane, written as `D:INDEX` on the command line.
#[derive(Debug, Clone, Copy)]
pub struct IsotypeRef {
    pub d: i64,
    pub index: usize,
}

pub fn parse_isotype(s: &str) -> Result<IsotypeRef, String> {
    let (d, index) = s
        .split_once(':')
        .ok_or_else(|| format!("expected D:INDEX, got {s:?}"))?;
    let d: i64 = d.parse().map_err(|_| format!("bad discriminant in {s:?}"))?;
    let index: usize = index.parse().map_err(|_| format!("bad index in {s:?}"))?;
    if d < 1 {
        return Err("discriminant must be ≥ 1".into());
    }
    Ok(IsotypeRef { d, index })
}

/// Expand `--disc D` or `--from A --to B` into an inclusive D list.
pub fn disc_range(disc: Option<i64>, from: Option<i64>, to: Option<i64>) -> CliResult<Vec<i64>> {
    match (disc, from, to) {
        (Some(d), None, None) => {
            if d < 1 {
                return Err(CliError::Usage("--disc must be ≥ 1".into()));
            }
            Ok(vec![d])
        }
        (None, Some(a), Some(b)) => {
            if a < 1 || b < a {
                return Err(CliError::Usage("need 1 ≤ --from ≤ --to".into()));
            }
            Ok((a..=b).collect())
        }
        _ => Err(CliError::Usage(
            "give exactly one of --disc D or --from A --to B".into(),
        )),
    }
}

/// Resolve an isotype reference to the glue key of the named plane.
fn isotype_key(r: IsotypeRef) -> CliResult<String> {
    let planes = enumerate_planes(r.d);
    if r.index >= planes.len() {
        return Err(CliError::Usage(format!(
            "isotype index {} out of range: disc {} has {} planes",
            r.index,
            r.d,
            planes.len()
        )));
    }
    Ok(glue_type_key(&planes[r.index]))
}

fn form_triple(f: &BinaryForm) -> Vec<Int> {
    let (a, b, c) = f.coeffs();
    vec![a, b, c]
}

/// Full JSON record plus CSV projection for one plane. The associated
/// points are the raw pure parts of the canonical basis (the sign-canonical
/// class representative is recoverable by flipping both simultaneously).
fn plane_record(d: i64, plane: &RationalPlane) -> CliResult<(Value, Vec<String>)> {
    let (v1, v2) = plane.basis_quats();
    let p1 = (v1.clone() * v2.conj()).pure_part();
    let p2 = (v2.conj() * v1).pure_part();
    let a1 = p1.coords().to_vec();
    let a2 = p2.coords().to_vec();
    let forms = [
        gram_form(plane),
        gram_form(&orthocomplement(plane)),
        ortho_lattice(&p1).map_err(invariant_err)?.gram_form,
        ortho_lattice(&p2).map_err(invariant_err)?.gram_form,
    ];
    let mut zs = Vec::with_capacity(4);
    for f in &forms {
        let p = cm_point(f).map_err(invariant_err)?;
        let (x, y) = p.z();
        zs.push((form_triple(&p.reduced), x, y));
    }
    let glue = glue_of_plane(plane);
    let key = glue_type_key(plane);

    let basis: Vec<Value> = (0..2)
        .map(|i| json_int_slice(plane.basis.row(i)))
        .collect();
    let triples: Vec<Vec<Int>> = forms.iter().map(form_triple).collect();
    let z_json = |z: &(Vec<Int>, f64, f64)| json!({"form": json_int_slice(&z.0), "x": z.1, "y": z.2});
    let record = json!({
        "v": 1,
        "D": json_i64(d),
        "basis": basis,
        "wedge": json_int_slice(&plane.wedge.0),
        "a1": json_int_slice(&a1),
        "a2": json_int_slice(&a2),
        "q_L": json_int_slice(&triples[0]),
        "q_Lperp": json_int_slice(&triples[1]),
        "q_a1": json_int_slice(&triples[2]),
        "q_a2": json_int_slice(&triples[3]),
        "z1": z_json(&zs[0]),
        "z2": z_json(&zs[1]),
        "z3": z_json(&zs[2]),
        "z4": z_json(&zs[3]),
        "glue_divisors": json_int_slice(&glue.divisors),
        "glue_key": key,
    });

    let mut row = vec![d.to_string(), csv_ints(&a1), csv_ints(&a2)];
    row.extend(triples.iter().map(|t| csv_ints(t)));
    for (_, x, y) in &zs {
        row.push(x.to_string());
        row.push(y.to_string());
    }
    row.push(csv_ints(&glue.divisors));
    row.push(key);
    Ok((record, row))
}

pub const ENUMERATE_HEADER: &[&str] = &[
    "D", "a1", "a2", "q_L", "q_Lperp", "q_a1", "q_a2", "z1_x", "z1_y", "z2_x", "z2_y", "z3_x",
    "z3_y", "z4_x", "z4_y", "glue_divisors", "glue_key",
];

/// Compare the sphere-pair enumeration against the direct wedge count.
fn oracle_check(d: i64, planes: &[RationalPlane]) -> CliResult<()> {
    let (count, wedges) = enumerate_planes_wedge_oracle(d);
    let mut got: Vec<[Int; 6]> = planes.iter().map(|p| p.wedge.0.clone()).collect();
    let mut want: Vec<[Int; 6]> = wedges.into_iter().map(|w| w.0).collect();
    got.sort_unstable();
    want.sort_unstable();
    if count != planes.len() || got != want {
        return Err(CliError::Invariant(format!(
            "wedge oracle mismatch at D={d}: {} planes vs {count} wedges",
            planes.len()
        )));
    }
    Ok(())
}

pub struct EnumerateOpts {
    pub ds: Vec<i64>,
    pub oracle: bool,
    pub squarefree: bool,
    pub isotype_of: Option<IsotypeRef>,
}

pub fn cmd_enumerate(opts: EnumerateOpts, mut emitter: Emitter) -> CliResult<()> {
    if opts.squarefree && opts.isotype_of.is_some() {
        return Err(CliError::Usage(
            "--squarefree and --isotype-of are mutually exclusive".into(),
        ));
    }
    if opts.oracle {
        if let Some(&max) = opts.ds.iter().max() {
            if max > 500 {
                return Err(CliError::Usage(
                    "--oracle only supports D ≤ 500 (the direct count is exponential)".into(),
                ));
            }
        }
    }
    let key = opts.isotype_of.map(isotype_key).transpose()?;
    let build = |d: i64| -> CliResult<Vec<(Value, Vec<String>)>> {
        if opts.squarefree && !is_squarefree(d) {
            return Ok(Vec::new());
        }
        let planes = enumerate_planes(d);
        if opts.oracle {
            oracle_check(d, &planes)?;
        }
        planes
            .iter()
            .filter(|p| key.as_deref().is_none_or(|k| glue_type_key(p) == k))
            .map(|p| plane_record(d, p))
            .collect()
    };
    for chunk in opts.ds.chunks(BATCH) {
        let built: Vec<_> = chunk.par_iter().map(|&d| build(d)).collect();
        for per_d in built {
            for (record, row) in per_d? {
                emitter.emit(&record, &row)?;
            }
        }
    }
    emitter.finish()
}

pub struct StatsOpts {
    pub from: i64,
    pub to: i64,
    pub p: i64,
    pub q: i64,
    pub squarefree: bool,
    pub isotype_of: Option<IsotypeRef>,
}

pub const STATS_HEADER: &[&str] = &[
    "D",
    "library",
    "sample_size",
    "sphere_disc_a1",
    "sphere_disc_a2",
    "cusp_dev_z1",
    "cusp_dev_z2",
    "cusp_dev_z3",
    "cusp_dev_z4",
];

pub fn cmd_stats(opts: StatsOpts, mut emitter: Emitter) -> CliResult<()> {
    let mode = match (opts.squarefree, opts.isotype_of) {
        (true, Some(_)) => {
            return Err(CliError::Usage(
                "--squarefree and --isotype-of are mutually exclusive".into(),
            ))
        }
        (true, None) => ExperimentMode::SquareFree,
        (false, Some(r)) => ExperimentMode::Isotype { d: r.d, index: r.index },
        (false, None) => ExperimentMode::All,
    };
    let reports = run_experiment(opts.from, opts.to, opts.p, opts.q, mode).map_err(input_err)?;
    for r in reports {
        let record = json!({
            "v": 1,
            "D": json_i64(r.d),
            "library": r.library,
            "sample_size": r.sample_size,
            "sphere_disc": r.sphere_disc.to_vec(),
            "cusp_dev": r.cusp_dev.to_vec(),
            "joint": r.joint,
        });
        let mut row = vec![r.d.to_string(), r.library.to_string(), r.sample_size.to_string()];
        row.extend(r.sphere_disc.iter().map(|x| x.to_string()));
        row.extend(r.cusp_dev.iter().map(|x| x.to_string()));
        emitter.emit(&record, &row)?;
    }
    emitter.finish()
}

pub struct CountOpts {
    pub disc: Option<i64>,
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub p: Option<i64>,
}

pub const COUNT_SPHERE_HEADER: &[&str] = &[
    "D",
    "r3",
    "r3_prim",
    "prim_formula",
    "prim_formula_corrected",
    "formula_matches",
    "corrected_matches",
];

pub const COUNT_P_HEADER: &[&str] = &["p", "alpha", "r_p", "r_p_brute", "w_mod_p"];

pub fn count_header(opts: &CountOpts) -> &'static [&'static str] {
    if opts.p.is_some() {
        COUNT_P_HEADER
    } else {
        COUNT_SPHERE_HEADER
    }
}

pub fn cmd_count(opts: CountOpts, mut emitter: Emitter) -> CliResult<()> {
    if let Some(p) = opts.p {
        if opts.disc.is_some() || opts.from.is_some() || opts.to.is_some() {
            return Err(CliError::Usage(
                "--p tabulates a finite field; leave out --disc/--from/--to".into(),
            ));
        }
        for alpha in 0..p {
            let formula = rp_alpha(p, alpha, CountMethod::Formula).map_err(input_err)?;
            let brute = rp_alpha(p, alpha, CountMethod::Brute).map_err(input_err)?;
            let w = if p <= 11 {
                Some(w_count_mod_p_extended(p, alpha).map_err(input_err)?)
            } else {
                None
            };
            let record = json!({
                "v": 1,
                "p": json_i64(p),
                "alpha": json_i64(alpha),
                "r_p": json_i64(formula),
                "r_p_brute": json_i64(brute),
                "w_mod_p": w.map(json_i64),
            });
            let row = vec![
                p.to_string(),
                alpha.to_string(),
                formula.to_string(),
                brute.to_string(),
                w.map(|x| x.to_string()).unwrap_or_default(),
            ];
            emitter.emit(&record, &row)?;
        }
        return emitter.finish();
    }
    let ds = disc_range(opts.disc, opts.from, opts.to)?;
    let (lo, hi) = (ds[0], *ds.last().expect("nonempty range"));
    for rec in r3_prim_survey(lo, hi) {
        let all = r3(rec.d);
        let record = json!({
            "v": 1,
            "D": json_i64(rec.d),
            "r3": json_i64(all),
            "r3_prim": json_i64(rec.brute),
            "prim_formula": json_i64(rec.displayed),
            "prim_formula_corrected": json_i64(rec.corrected),
            "formula_matches": rec.displayed_matches(),
            "corrected_matches": rec.corrected_matches(),
        });
        let row = vec![
            rec.d.to_string(),
            all.to_string(),
            rec.brute.to_string(),
            rec.displayed.to_string(),
            rec.corrected.to_string(),
            rec.displayed_matches().to_string(),
            rec.corrected_matches().to_string(),
        ];
        emitter.emit(&record, &row)?;
    }
    emitter.finish()
}

pub const GLUE_HEADER: &[&str] = &["D", "index", "glue_divisors", "glue_order", "glue_key"];

pub fn cmd_glue(ds: Vec<i64>, mut emitter: Emitter) -> CliResult<()> {
    let build = |d: i64| -> Vec<(Value, Vec<String>)> {
        enumerate_planes(d)
            .iter()
            .enumerate()
            .map(|(i, plane)| {
                let g = glue_of_plane(plane);
                let key = glue_type_key(plane);
                let order = g.order();
                let record = json!({
                    "v": 1,
                    "D": json_i64(d),
                    "index": i,
                    "glue_divisors": json_int_slice(&g.divisors),
                    "glue_order": json_int(&order),
                    "glue_key": key,
                });
                let row = vec![
                    d.to_string(),
                    i.to_string(),
                    csv_ints(&g.divisors),
                    order.to_string(),
                    key,
                ];
                (record, row)
            })
            .collect()
    };
    for chunk in ds.chunks(BATCH) {
        let built: Vec<_> = chunk.par_iter().map(|&d| build(d)).collect();
        for per_d in built {
            for (record, row) in per_d {
                emitter.emit(&record, &row)?;
            }
        }
    }
    emitter.finish()
}

pub const CLASSGROUP_HEADER: &[&str] = &["disc", "h", "two_torsion", "forms"];

pub fn cmd_classgroup(disc: i64, mut emitter: Emitter) -> CliResult<()> {
    let cg = class_group(&Int::from(disc)).map_err(input_err)?;
    let forms: Vec<Vec<Int>> = cg.elements.iter().map(form_triple).collect();
    let record = json!({
        "v": 1,
        "disc": json_i64(disc),
        "h": cg.order(),
        "two_torsion": cg.two_torsion_count(),
        "forms": forms.iter().map(|t| json_int_slice(t)).collect::<Vec<_>>(),
    });
    let row = vec![
        disc.to_string(),
        cg.order().to_string(),
        cg.two_torsion_count().to_string(),
        forms.iter().map(|t| csv_ints(t)).collect::<Vec<_>>().join("; "),
    ];
    emitter.emit(&record, &row)?;
    emitter.finish()
}

/// Run the acceptance criteria and print one deterministic line each.
pub fn cmd_selftest(quick: bool, mut sink: Sink) -> CliResult<()> {
    let scale = if quick { Scale::Quick } else { Scale::Full };
    let results = run_all(scale);
    let passed = results.iter().filter(|r| r.pass).count();
    for r in &results {
        sink.line(&format_line(r))?;
    }
    sink.line(&format!(
        "selftest {} ({passed}/{})",
        if passed == results.len() { "PASS" } else { "FAIL" },
        results.len()
    ))?;
    sink.finish()?;
    if passed != results.len() {
        return Err(CliError::Invariant(format!(
            "{} of {} acceptance criteria failed",
            results.len() - passed,
            results.len()
        )));
    }
    Ok(())
}
