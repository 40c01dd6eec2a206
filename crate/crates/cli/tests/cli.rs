//! End-to-end runs of the command-line front end.

use std::path::Path;

use annulus_radial::run;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("annulus-radial").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(r: &Run) -> Value {
    serde_json::from_str(&r.stdout).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const UNIT_KERNEL: &str = "[kernel]\nalpha = 1.0\nbeta = 1.0\ngamma = 1.0\ndelta = 1.0\nr0 = 1.0\nN = 3\n";

fn synthetic(g: &str, extra: &str) -> String {
    format!(
        "{UNIT_KERNEL}\n[weights]\nsynthetic = \"1\"\n\n[system]\nn = 1\ng = [\"{g}\"]\n\n\
         [numerics]\ngrid_size = 129\ncutoff = 0.0\n\n{extra}"
    )
}

#[test]
fn kernel_check_passes_for_defaults() {
    let r = cli(&["kernel"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().filter(|l| l.starts_with("PASS")).count(), 3);
    assert!(r.stdout.lines().any(|l| l.starts_with("INFO wp = ")));
}

#[test]
fn kernel_table_is_symmetric() {
    let r = cli(&["kernel", "table", "--grid", "5"]);
    assert_eq!(r.code, 0);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("s,t,xi"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    let at = |i: usize, j: usize| rows[5 * i + j][2];
    for i in 0..5 {
        for j in 0..5 {
            assert!((at(i, j) - at(j, i)).abs() <= 1e-15);
            assert!(at(i, j) > 0.0);
        }
    }
}

#[test]
fn degenerate_kernel_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = UNIT_KERNEL.replace("alpha = 1.0", "alpha = 0.0").replace("beta = 1.0", "beta = 0.0");
    let path = write_config(dir.path(), "bad.toml", &text);
    let r = cli(&["kernel", "--config", &path]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.starts_with("error:"), "{}", r.stderr);
}

#[test]
fn unknown_keys_and_arguments_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "typo.toml", &format!("{UNIT_KERNEL}\n[numerics]\ngrid = 5\n"));
    assert_eq!(cli(&["constants", "--config", &path]).code, 2);
    assert_eq!(cli(&["constants", "--bogus"]).code, 2);
    assert_eq!(cli(&["reproduce", "--example", "7"]).code, 2);
    assert_eq!(cli(&["constants", "--config", "/nonexistent.toml"]).code, 2);
    assert_eq!(cli(&["--help"]).code, 0);
}

#[test]
fn synthetic_constants_converge() {
    let r = cli(&["constants"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    let q1 = v["constants"]["constants"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "Q1")
        .unwrap();
    assert_eq!(q1["status"], "converged");
    assert!(q1["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn example_constants_are_reported_divergent() {
    let r = cli(&["constants", "--example", "1"]);
    assert_eq!(r.code, 3);
    assert!(r.stdout.contains("divergent_suspected"));
}

#[test]
fn non_conjugate_exponents_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{UNIT_KERNEL}R1 = 1.0\nR2 = 2.0\n\n[weights]\nfactors = [\"1\", \"1\"]\np = [2.0, 2.0]\n\n\
         [system]\nn = 1\ng = [\"1\"]\n\n[numerics]\nq = 2.0\n"
    );
    let path = write_config(dir.path(), "p.toml", &text);
    let r = cli(&["constants", "--config", &path]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn zero_nonlinearity_fails_the_lower_window() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "z.toml", &synthetic("0", "[windows]\na1 = 0.1\na2 = 1.0\n"));
    let r = cli(&["check", "--which", "krasnoselskii", "--config", &path]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["verdict"], "fail");
    let j5 = v["windows"].as_array().unwrap().iter().find(|w| w["hypothesis_id"] == "J5").unwrap();
    assert_eq!(j5["verdict"], "fail");
}

#[test]
fn missing_windows_are_a_config_error() {
    let r = cli(&["check", "--which", "avery-henderson"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("a'"), "{}", r.stderr);
}

#[test]
fn uniqueness_reports_both_contraction_variants() {
    let r = cli(&["check", "--example", "4", "--which", "uniqueness"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    let u = &json(&r)["uniqueness"];
    assert_eq!(u["without_wp"]["status"], "divergent_suspected");
    assert_eq!(u["with_wp"]["status"], "divergent_suspected");
    for l in u["lipschitz_estimates"].as_array().unwrap() {
        assert!(l.as_f64().unwrap() <= 1e-4 * (1.0 + 1e-6));
    }
}

#[test]
fn zero_nonlinearity_solves_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "z.toml", &synthetic("0", ""));
    let r = cli(&["solve", "--config", &path, "--init", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = &json(&r)["solve"];
    assert_eq!(s["converged"], true);
    assert_eq!(s["iterates"], 1);
    assert_eq!(s["component_sup_norms"][0].as_f64(), Some(0.0));
}

#[test]
fn example_four_solve_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let r = cli(&["solve", "--example", "4", "--grid", "400", "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,r,u1,u2"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    for row in &rows {
        assert!((row[0] * row[1] - 1.0).abs() <= 1e-12, "{row:?}");
        assert!(row[2] > 0.0 && row[3] > 0.0);
    }
    assert!(out.join("report.json").exists());
    assert!(out.join("trace.json").exists());
}

#[test]
fn explosive_nonlinearity_reports_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "d.toml", &synthetic("100*u", ""));
    let r = cli(&["solve", "--config", &path, "--init", "1"]);
    assert_eq!(r.code, 4, "{}", r.stderr);
    let s = &json(&r)["solve"];
    assert_eq!(s["converged"], false);
    assert!(s["failure"].as_str().unwrap().contains("divergence"));
}

#[test]
fn multistart_finds_one_solution_for_a_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "m.toml",
        &synthetic("1 + u/100", "[windows]\na1 = 0.1\na2 = 1.0\n"),
    );
    let r = cli(&["solve", "--config", &path, "--multistart"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(json(&r)["solve"]["distinct_solutions"], 1);
}

#[test]
fn reproduce_output_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    for example in ["1", "2", "3", "4"] {
        let a = dir.path().join(format!("a{example}"));
        let b = dir.path().join(format!("b{example}"));
        let ra = cli(&["reproduce", "--example", example, "--out", a.to_str().unwrap()]);
        let rb = cli(&["reproduce", "--example", example, "--out", b.to_str().unwrap()]);
        assert_eq!(ra.code, 0);
        assert_eq!(ra.stdout, rb.stdout);
        let fa = std::fs::read(a.join("report.json")).unwrap();
        let fb = std::fs::read(b.join("report.json")).unwrap();
        assert_eq!(fa, fb);
        assert!(!json(&ra)["discrepancies"].as_array().unwrap().is_empty());
    }
}
