use std::process::Command;

use krn_cli::selftest::{self, SelftestArgs};
use krn_cli::{run, EXIT_NUMERIC, EXIT_OK, EXIT_SELFTEST, EXIT_USAGE};
use krn_core::measure::{KernelJson, KernelMorphism};
use serde_json::Value;

const CANTOR: &str = "(p0! +[0.5] p1!) ; ((dup ; (p0! +[0.5] p1!)))*";

fn krn(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_krn")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn with_krn(args: &[&str]) -> krn_cli::Outcome {
    run(std::iter::once("krn").chain(args.iter().copied()))
}

#[test]
fn bayes_reports_the_conjugate_posterior() {
    let (code, out, _) = krn(&[
        "bayes", "--m", "7", "--n", "5", "--prior", "normal:0:1", "--likelihood-var", "1", "--obs", "0.5", "--exact",
        "--query", "gt:1",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["summary"]["mean"].as_f64().unwrap() - 0.25).abs() <= 0.02);
    assert!((v["summary"]["variance"].as_f64().unwrap() - 0.5).abs() <= 0.02);
    assert!((v["summary"]["queries"][0]["probability"].as_f64().unwrap() - 0.14437).abs() <= 0.02);
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2 * 7 * 5 + 2);
    assert!(cells[0]["density"].is_null() && cells[0]["left"].is_null());
    let total: f64 = cells.iter().map(|c| c["mass"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() <= 1e-9);
}

#[test]
fn bayes_usage_and_numeric_errors() {
    assert_eq!(krn(&["bayes", "--m", "0", "--n", "5", "--likelihood-var", "1", "--obs", "0.5"]).0, 2);
    assert_eq!(with_krn(&["bayes", "--m", "2", "--n", "2", "--likelihood-var", "-1", "--obs", "0"]).code, EXIT_USAGE);
    // a prior too wide for the integration window
    let wide = with_krn(&["bayes", "--m", "2", "--n", "2", "--prior", "normal:0:100", "--likelihood-var", "1", "--obs", "0"]);
    assert_eq!(wide.code, EXIT_NUMERIC, "{}", wide.stderr);
    let uniform = with_krn(&["bayes", "--m", "2", "--n", "2", "--prior", "uniform:0:1", "--likelihood-var", "1", "--obs", "0", "--exact"]);
    assert_eq!(uniform.code, EXIT_USAGE);
}

#[test]
fn bayes_csv_and_negative_observation() {
    let out = with_krn(&["bayes", "--m", "2", "--n", "2", "--likelihood-var", "1", "--obs", "-0.7", "--format", "csv", "--exact"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let mut lines = out.stdout.lines();
    assert_eq!(lines.next(), Some("index,left,right,mass,density"));
    assert!(lines.next().unwrap().starts_with("0,-inf,-2,"));
    assert!(out.stdout.contains("\nquantity,approximate,exact,deviation\n"));
    // exact posterior mean for obs −0.7 with unit variances
    assert!(out.stdout.contains("mean,") && out.stdout.contains(",-0.35,"));
}

#[test]
fn bayes_emits_a_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("posterior.gp");
    let out = with_krn(&[
        "bayes", "--m", "3", "--n", "2", "--likelihood-var", "1", "--obs", "0.5", "--exact", "--emit-plot",
        script.to_str().unwrap(),
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let gp = std::fs::read_to_string(&script).unwrap();
    assert!(gp.contains("'posterior.dat'") && gp.contains("exact(x)"));
    let data = std::fs::read_to_string(dir.path().join("posterior.dat")).unwrap();
    assert_eq!(data.lines().count(), 1 + 2 * 3 * 2);
}

#[test]
fn output_is_deterministic() {
    let args = ["bayes", "--m", "3", "--n", "2", "--likelihood-var", "1", "--obs", "0.5", "--exact"];
    assert_eq!(krn(&args).1, krn(&args).1);
    let args = ["converge", "--m", "3", "--levels", "1,2"];
    assert_eq!(krn(&args).1, krn(&args).1);
}

#[test]
fn dagger_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("k.json");
    let text = r#"{"labels_in":["x0","x1","x2"],"labels_out":["y0","y1"],"mu":[0.2,0.3,0.5],
        "matrix":[[0.1,0.9],[0.6,0.4],[1.0,0.0]]}"#;
    std::fs::write(&input, text).unwrap();
    let (code, once, _) = krn(&["dagger", input.to_str().unwrap()]);
    assert_eq!(code, 0);
    let mid = dir.path().join("d.json");
    std::fs::write(&mid, &once).unwrap();
    let (code, twice, _) = krn(&["dagger", mid.to_str().unwrap()]);
    assert_eq!(code, 0);
    let original = KernelJson::parse(text).unwrap();
    let back = KernelJson::parse(&twice).unwrap();
    assert_eq!(back.labels_in, original.labels_in);
    assert_eq!(back.labels_out, original.labels_out);
    for (r, s) in back.matrix.iter().zip(&original.matrix) {
        for (a, b) in r.iter().zip(s) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn dagger_of_identity_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("id.json");
    let text = r#"{"labels_in":["a","b"],"labels_out":["a","b"],"mu":[0.25,0.75],"matrix":[[1,0],[0,1]]}"#;
    std::fs::write(&input, text).unwrap();
    let out = KernelJson::parse(&krn(&["dagger", input.to_str().unwrap()]).1).unwrap();
    assert_eq!(out.matrix, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
}

#[test]
fn dagger_rejects_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.json");
    std::fs::write(&input, "{\"labels_in\": [\"a\"],\n  \"labels_out\": [\"b\"], \"mu\": [1.0], \"matrix\": [[0.5]]}").unwrap();
    let (code, _, err) = krn(&["dagger", input.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("matrix"), "{err}");
    let (code, _, _) = krn(&["dagger", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn converge_sweep() {
    let (code, out, _) = krn(&["converge", "--m", "7", "--levels", "1,2,4,8,16", "--interval", "0,1"]);
    assert_eq!(code, 0);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    let gaps: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(gaps[4] < gaps[0] && gaps[4] <= 0.01, "{gaps:?}");
    // runtime column empty without --timing
    assert!(rows.iter().all(|r| r[7].is_empty()));

    let (_, out, _) = krn(&["converge", "--levels", "4", "--interval", "0,0"]);
    let gap: f64 = out.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert_eq!(gap, 0.0);

    let (_, out, _) = krn(&["converge", "--m", "2", "--levels", "1", "--interval", "-1,0.5", "--timing"]);
    let last = out.lines().nth(1).unwrap();
    assert!(last.contains("\"(-1,0.5]\"") && !last.ends_with(','));
}

#[test]
fn converge_custom_partitions() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, "[-1, 0, 1]").unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[0, 0.5, 0.25]").unwrap();
    let (code, out, _) = krn(&["converge", "--partition", good.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 2);
    let (code, _, err) = krn(&["converge", "--partition", good.to_str().unwrap(), "--partition", bad.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn netkat_cantor_queries() {
    let (code, out, err) = krn(&[
        "netkat", "--program", CANTOR, "--level", "3", "--input", "(0)", "--query", "member:(1)", "--query",
        "member:(1,0)", "--query", "superset-all-level",
    ]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let p: Vec<f64> = v["answers"].as_array().unwrap().iter().map(|a| a["probability"].as_f64().unwrap()).collect();
    assert_eq!(p, vec![0.5, 0.25, 1.0]);
    assert_eq!(v["chain_states"], 14);
}

#[test]
fn netkat_program_from_file_and_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cantor.pnk");
    std::fs::write(&file, format!("{CANTOR}\n")).unwrap();
    let at = format!("@{}", file.display());
    let out = with_krn(&["netkat", "--program", &at, "--level", "3", "--query", "member:(0,1)", "--mc", "20000,30,7"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    let a = &v["answers"][0];
    assert_eq!(a["probability"], 0.25);
    assert!(a["deviation"].as_f64().unwrap() <= 4.0 * a["monte_carlo_stderr"].as_f64().unwrap());
}

#[test]
fn netkat_errors() {
    let out = with_krn(&["netkat", "--program", "dup ;", "--level", "3", "--query", "member:(1)"]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("position 5"), "{}", out.stderr);
    let out = with_krn(&["netkat", "--program", CANTOR, "--level", "3", "--query", "member:(1)", "--state-budget", "2"]);
    assert_eq!(out.code, EXIT_NUMERIC);
    assert!(out.stderr.contains("--mc"), "{}", out.stderr);
    // with --mc the estimate is still produced
    let out = with_krn(&[
        "netkat", "--program", CANTOR, "--level", "3", "--query", "member:(1)", "--pair-budget", "2", "--mc", "1000,20,1",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.contains("\"probability\": null"));
    let out = with_krn(&["netkat", "--program", CANTOR, "--level", "2", "--query", "member:(1,0,1)"]);
    assert_eq!(out.code, EXIT_USAGE);
    let out = with_krn(&["netkat", "--program", "(dup)* ; p0!", "--level", "2", "--query", "member:(1)"]);
    assert_eq!(out.code, EXIT_USAGE);
    let out = with_krn(&["netkat", "--program", CANTOR, "--level", "3", "--query", "member:(2)"]);
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn selftest_passes_and_validates_cases() {
    let (code, out, err) = krn(&["selftest", "--seed", "5", "--cases", "60"]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("suite dagger: 7/7"));
    assert_eq!(krn(&["selftest", "--cases", "0"]).0, 2);
}

fn transposed(f: &KernelMorphism) -> KernelMorphism {
    let t = f.matrix().transpose();
    let rows: Vec<Vec<f64>> = (0..t.nrows())
        .map(|l| {
            let s: f64 = t.row(l).sum();
            if s > 0.0 {
                t.row(l).iter().map(|v| v / s).collect()
            } else {
                vec![1.0 / t.ncols() as f64; t.ncols()]
            }
        })
        .collect();
    KernelMorphism::from_rows(f.target().clone(), f.source().labels().to_vec(), &rows).unwrap()
}

#[test]
fn selftest_catches_a_transposed_dagger() {
    let out = selftest::run(&SelftestArgs { seed: 1, cases: 50 }, transposed);
    assert_eq!(out.code, EXIT_SELFTEST);
    assert!(out.stderr.contains("FAILED dagger/involution"), "{}", out.stderr);
    assert!(out.stderr.contains("--seed 1 --cases 50"));
}
