//! End-to-end tests driving the installed `qg` binary: output schemas,
//! determinism, exit codes, and flag/config precedence.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qg"))
        .args(args)
        .env_remove("QG_THREADS")
        .output()
        .expect("spawn qg")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let s = String::from_utf8(out.stderr.clone()).expect("utf8 stderr");
    serde_json::from_str(s.trim()).unwrap_or_else(|e| panic!("stderr not JSON ({e}): {s}"))
}

fn temp_path(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("qg-cli-test-{}-{tag}", std::process::id()))
}

#[test]
fn selftest_determinism() {
    let a = qg(&["selftest", "--quick"]);
    let b = qg(&["selftest", "--quick"]);
    assert!(a.status.success(), "first selftest run failed");
    assert!(b.status.success(), "second selftest run failed");
    let pass = a.stdout == b.stdout && !a.stdout.is_empty();
    println!(
        "criterion 11 {} selftest determinism: two --quick runs {} ({} bytes)",
        if pass { "PASS" } else { "FAIL" },
        if pass { "byte-identical" } else { "differ" },
        a.stdout.len()
    );
    assert!(pass, "selftest runs must be byte-identical");
    let text = stdout_str(&a);
    assert!(text.ends_with("selftest PASS (10/10)\n"));
    for i in 1..=10 {
        assert!(
            text.contains(&format!("criterion {i:02} PASS")),
            "missing criterion {i:02} PASS line"
        );
    }
}

#[test]
fn enumerate_worked_example_disc_3() {
    let out = qg(&["enumerate", "--disc", "3"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 32, "|R_3| = 32");
    let expected = concat!(
        r#"{"v":1,"D":3,"basis":[[1,0,-1,0],[0,1,1,0]],"wedge":[1,1,0,1,0,0],"#,
        r#""a1":[-1,-1,-1],"a2":[-1,-1,1],"q_L":[2,-2,2],"q_Lperp":[3,0,1],"#,
        r#""q_a1":[2,2,2],"q_a2":[2,2,2],"#,
        r#""z1":{"form":[1,1,1],"x":0.5,"y":0.8660254037844386},"#,
        r#""z2":{"form":[1,0,3],"x":0.0,"y":1.7320508075688772},"#,
        r#""z3":{"form":[1,1,1],"x":0.5,"y":0.8660254037844386},"#,
        r#""z4":{"form":[1,1,1],"x":0.5,"y":0.8660254037844386},"#,
        r#""glue_divisors":[1,3],"glue_key":"d=1,3;q#=0e0709dbab334bfa"}"#
    );
    assert!(
        lines.contains(&expected),
        "the span(1+i, i+j) record with a1 = (-1,-1,-1) must appear verbatim"
    );
}

#[test]
fn enumerate_empty_disc_7() {
    let out = qg(&["enumerate", "--disc", "7"]);
    assert!(out.status.success(), "empty R_D is not an error");
    assert!(out.stdout.is_empty());
}

#[test]
fn enumerate_glue_trivial_disc_1() {
    let out = qg(&["glue", "--disc", "1"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert_eq!(text.lines().count(), 6, "|R_1| = 6");
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["glue_divisors"], serde_json::json!([1, 1]));
        assert_eq!(v["glue_order"], serde_json::json!(1));
        assert_eq!(v["glue_key"], "d=1,1;q#=445018e305810b78");
    }
}

#[test]
fn jsonl_lines_reserialize_byte_identically() {
    for args in [
        ["enumerate", "--disc", "3"].as_slice(),
        ["enumerate", "--disc", "20"].as_slice(),
        ["count", "--from", "1", "--to", "30"].as_slice(),
        ["count", "--p", "5"].as_slice(),
        ["glue", "--from", "1", "--to", "12"].as_slice(),
        ["classgroup", "--disc", "-84"].as_slice(),
        ["stats", "--from", "1", "--to", "60", "--p", "3", "--q", "7"].as_slice(),
    ] {
        let out = qg(args);
        assert!(out.status.success(), "{args:?} failed");
        for line in stdout_str(&out).lines() {
            let v: serde_json::Value =
                serde_json::from_str(line).unwrap_or_else(|e| panic!("{args:?}: {e}"));
            assert_eq!(
                serde_json::to_string(&v).unwrap(),
                line,
                "{args:?}: line must round-trip through a JSON parser unchanged"
            );
            assert_eq!(
                v.as_object().and_then(|o| o.keys().next().map(String::as_str)),
                Some("v"),
                "schema version leads every record"
            );
        }
    }
}

#[test]
fn classgroup_oracle_record() {
    let out = qg(&["classgroup", "--disc", "-20"]);
    assert!(out.status.success());
    assert_eq!(
        stdout_str(&out).trim_end(),
        r#"{"v":1,"disc":-20,"h":2,"two_torsion":2,"forms":[[1,0,5],[2,2,3]]}"#
    );
    let out = qg(&["classgroup", "--disc", "-4"]);
    let v: serde_json::Value = serde_json::from_str(stdout_str(&out).trim_end()).unwrap();
    assert_eq!(v["h"], serde_json::json!(1));
    assert_eq!(v["forms"], serde_json::json!([[1, 0, 1]]));
}

#[test]
fn count_p_mode_records() {
    let out = qg(&["count", "--p", "3"]);
    assert!(out.status.success());
    let lines: Vec<String> = stdout_str(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3, "one record per alpha in 0..p");
    let first: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(first["r_p"], serde_json::json!(9));
    assert_eq!(first["w_mod_p"], serde_json::json!(80), "3^4 - 1 at alpha = 0");
    let out13 = qg(&["count", "--p", "13"]);
    let any: serde_json::Value =
        serde_json::from_str(stdout_str(&out13).lines().next().unwrap()).unwrap();
    assert!(any["w_mod_p"].is_null(), "wedge counts stay brute-force-sized, p ≤ 11 only");
}

#[test]
fn squarefree_filter_drops_square_multiples() {
    let out = qg(&["enumerate", "--from", "1", "--to", "9", "--squarefree"]);
    assert!(out.status.success());
    let ds: Vec<i64> = stdout_str(&out)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["D"].as_i64().unwrap())
        .collect();
    assert!(!ds.is_empty());
    assert!(ds.iter().all(|d| [1, 2, 3, 5, 6].contains(d)), "4, 8, 9 filtered out: {ds:?}");
}

#[test]
fn isotype_filter_selects_matching_glue_key() {
    let all = qg(&["enumerate", "--disc", "3"]);
    let records: Vec<serde_json::Value> = stdout_str(&all)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let key0 = records[0]["glue_key"].as_str().unwrap().to_string();
    let matching = records
        .iter()
        .filter(|r| r["glue_key"].as_str() == Some(&key0))
        .count();
    assert!(matching < records.len(), "D = 3 carries more than one glue type");

    let filtered = qg(&["enumerate", "--disc", "3", "--isotype-of", "3:0"]);
    assert!(filtered.status.success());
    let kept: Vec<serde_json::Value> = stdout_str(&filtered)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(kept.len(), matching);
    assert!(kept.iter().all(|r| r["glue_key"].as_str() == Some(&key0)));
}

#[test]
fn usage_errors_exit_2_with_json_stderr() {
    for args in [
        ["enumerate", "--disc", "3", "--from", "1", "--to", "5"].as_slice(),
        ["enumerate"].as_slice(),
        ["enumerate", "--from", "5", "--to", "1"].as_slice(),
        ["enumerate", "--disc", "0"].as_slice(),
        ["count", "--p", "3", "--from", "1", "--to", "2"].as_slice(),
        ["enumerate", "--disc", "3", "--squarefree", "--isotype-of", "3:0"].as_slice(),
        ["enumerate", "--disc", "3", "--isotype-of", "3"].as_slice(),
        ["enumerate", "--disc", "600", "--oracle"].as_slice(),
        ["classgroup", "--disc", "5"].as_slice(),
        ["classgroup", "--disc", "-5"].as_slice(),
        ["nonsense-subcommand"].as_slice(),
    ] {
        let out = qg(args);
        assert_eq!(out.status.code(), Some(2), "{args:?} must exit 2");
        assert!(out.stdout.is_empty(), "{args:?} must not emit records");
        let err = stderr_json(&out);
        assert_eq!(err["error"]["kind"], "usage", "{args:?}");
        assert!(err["error"]["message"].is_string(), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_0() {
    let help = qg(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout_str(&help).contains("Usage"));
    let version = qg(&["--version"]);
    assert_eq!(version.status.code(), Some(0));
}

#[test]
fn csv_projection_parses_with_stable_headers() {
    let out = qg(&["enumerate", "--disc", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "D,a1,a2,q_L,q_Lperp,q_a1,q_a2,z1_x,z1_y,z2_x,z2_y,z3_x,z3_y,z4_x,z4_y,glue_divisors,glue_key"
    );
    assert_eq!(lines.count(), 32);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec.expect("well-formed CSV row");
        assert_eq!(rec.len(), 17);
        assert_eq!(&rec[0], "3");
    }

    let stats = qg(&["stats", "--from", "1", "--to", "60", "--p", "3", "--q", "7", "--format", "csv"]);
    let stats_text = stdout_str(&stats);
    assert!(stats_text.starts_with("D,library,sample_size,"));
    let mut rdr = csv::Reader::from_reader(stats_text.as_bytes());
    let widths: Vec<usize> = rdr.records().map(|r| r.unwrap().len()).collect();
    assert!(!widths.is_empty());
    assert!(widths.iter().all(|&w| w == widths[0]));
}

#[test]
fn stats_rows_are_admissible_discs() {
    let out = qg(&["stats", "--from", "1", "--to", "120", "--p", "3", "--q", "7"]);
    assert!(out.status.success());
    let mut seen = 0;
    for line in stdout_str(&out).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let d = v["D"].as_i64().unwrap();
        assert_eq!(d % 3, 2, "D = {d} fails the split condition at 3");
        assert!([3, 5, 6].contains(&(d % 7)), "D = {d} fails the inert condition at 7");
        assert!(qg_core::planes::in_disc_set(d));
        assert_eq!(v["library"], "tfl-1");
        assert_eq!(v["sphere_disc"].as_array().unwrap().len(), 2);
        assert_eq!(v["cusp_dev"].as_array().unwrap().len(), 4);
        assert_eq!(v["joint"].as_array().unwrap().len(), 10);
        seen += 1;
    }
    assert!(seen >= 5, "the window 1..=120 holds several admissible D");
}

#[test]
fn config_file_and_flag_precedence() {
    let conf = temp_path("conf");
    std::fs::write(&conf, "# defaults for sweeps\nformat=csv\nthreads=2\n").unwrap();
    let conf_arg = conf.to_str().unwrap();

    let from_config = qg(&["--config", conf_arg, "glue", "--disc", "1"]);
    assert!(from_config.status.success());
    assert!(
        stdout_str(&from_config).starts_with("D,index,"),
        "config format=csv applies"
    );

    let flag_wins = qg(&["--config", conf_arg, "--format", "jsonl", "glue", "--disc", "1"]);
    assert!(stdout_str(&flag_wins).starts_with(r#"{"v":1,"#), "flag overrides config");

    let bad = temp_path("badconf");
    std::fs::write(&bad, "format=csv\nmystery=value\n").unwrap();
    let rejected = qg(&["--config", bad.to_str().unwrap(), "glue", "--disc", "1"]);
    assert_eq!(rejected.status.code(), Some(2));
    assert_eq!(stderr_json(&rejected)["error"]["kind"], "usage");

    std::fs::remove_file(&conf).ok();
    std::fs::remove_file(&bad).ok();
}

#[test]
fn out_flag_matches_stdout_bytes() {
    let to_stdout = qg(&["enumerate", "--disc", "20"]);
    let path = temp_path("out.jsonl");
    let to_file = qg(&["--out", path.to_str().unwrap(), "enumerate", "--disc", "20"]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, to_stdout.stdout);
    std::fs::remove_file(&path).ok();
}

#[test]
fn thread_count_does_not_change_bytes() {
    let one = qg(&["--threads", "1", "enumerate", "--from", "1", "--to", "25"]);
    let four = qg(&["--threads", "4", "enumerate", "--from", "1", "--to", "25"]);
    let seeded = qg(&["--threads", "4", "--seed", "7", "enumerate", "--from", "1", "--to", "25"]);
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, seeded.stdout);
}
