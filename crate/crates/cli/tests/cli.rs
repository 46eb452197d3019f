use std::path::{Path, PathBuf};
use std::process::Command;

use anosov_forge::report::parse_orbit_csv;
use anosov_forge::{Dynamics, ReportDocument};
use anosov_forge_cli::{run, EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_PASS};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str], env: Option<&Path>) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("anosov-forge").chain(args.iter().copied());
    let code = run(argv, env.map(PathBuf::from), &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = "suite = [\"feasibility\", \"conjugacies\", \"no_fixed_points\"]\nsamples = 200\ngrid = 50\n";

#[test]
fn small_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("report.json");
    let r = cli(&["--config", cfg.to_str().unwrap(), "verify", "--out", out.to_str().unwrap()], None);
    assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
    let doc = ReportDocument::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc.pass);
    assert_eq!(doc.checks.len(), 3);
    assert_eq!(doc.config.samples, 200);
    assert_eq!(r.stderr.lines().filter(|l| l.starts_with("PASS ")).count(), 3);
    assert!(r.stdout.is_empty());
}

#[test]
fn default_verify_reports_failures_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let r = cli(&["verify", "--out", out.to_str().unwrap()], None);
    assert_eq!(r.code, EXIT_CHECK_FAILED);
    let doc = ReportDocument::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!doc.pass);
    let failing: Vec<&str> = doc.failing().map(|c| c.name.as_str()).collect();
    assert_eq!(failing, ["final_norm_unstable_lower", "hyperbolicity"]);
    assert!(doc.witness.is_some() && doc.hyperbolicity.is_some());
    assert!(r.stderr.contains("FAIL hyperbolicity"));
}

#[test]
fn verify_to_stdout_with_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let r = cli(&["verify", "--timing"], Some(&cfg));
    assert_eq!(r.code, EXIT_PASS);
    let doc = ReportDocument::from_json(&r.stdout).unwrap();
    assert_eq!(doc.timing.unwrap().len(), 3);
}

#[test]
fn flag_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", SMALL);
    let bad = write(dir.path(), "bad.toml", "epsilon = 0.5\n");
    assert_eq!(cli(&["alpha"], Some(&bad)).code, EXIT_ERROR);
    let r = cli(&["--config", good.to_str().unwrap(), "verify"], Some(&bad));
    assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
}

#[test]
fn orbit_rows_are_iterates() {
    let r = cli(&["orbit", "--point", "0,0", "--steps", "3"], None);
    assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
    let rows = parse_orbit_csv(&r.stdout).unwrap();
    assert_eq!(rows.len(), 4);
    let d = Dynamics::default();
    for w in rows.windows(2) {
        assert_eq!(d.f(w[0].1).unwrap(), w[1].1);
    }
    let back = cli(&["orbit", "--point", "-1.5,0.25", "--steps", "-2"], None);
    let rows = parse_orbit_csv(&back.stdout).unwrap();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), [-2, -1, 0]);
}

#[test]
fn orbit_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("orbit.csv");
    let r = cli(&["orbit", "--point", "0.5,0.1", "--steps", "5", "--out", out.to_str().unwrap()], None);
    assert_eq!(r.code, EXIT_PASS);
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("n,x,y\n"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn plots() {
    let dir = tempfile::tempdir().unwrap();
    let fol = dir.path().join("f.svg");
    let r = cli(&["plot", "foliation", "--out", fol.to_str().unwrap(), "--view", "-3,5,-3,3"], None);
    assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
    let svg = std::fs::read_to_string(&fol).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("stroke-dasharray"));
    assert!(svg.contains("p<tspan") && svg.contains("q<tspan"));

    let bare = dir.path().join("b.svg");
    assert_eq!(cli(&["plot", "foliation", "--bare", "--out", bare.to_str().unwrap()], None).code, EXIT_PASS);
    let svg = std::fs::read_to_string(&bare).unwrap();
    assert!(svg.contains("id=\"axes\"") && !svg.contains("<polyline") && !svg.contains("<circle"));

    let reeb = dir.path().join("r.svg");
    assert_eq!(cli(&["plot", "reeb", "--out", reeb.to_str().unwrap()], None).code, EXIT_PASS);
    assert!(std::fs::read_to_string(&reeb).unwrap().contains("id=\"boundary\""));
}

#[test]
fn witness_and_alpha() {
    let r = cli(&["witness", "--tol", "1e-3"], None);
    assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
    let w: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(w["distance"].as_f64().unwrap() < 1e-3);
    assert!(w["steps"].as_u64().unwrap() <= 60);

    let a = cli(&["alpha"], None);
    assert_eq!(a.code, EXIT_PASS);
    assert!(a.stdout.trim().parse::<f64>().unwrap() > 0.0);
}

#[test]
fn errors_exit_two_and_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("epsilon = 0.5\n", "epsilon"),
        ("samples = 0\n", "samples"),
        ("box = [1.0, -1.0, 0.0, 1.0]\n", "box"),
        ("unknown_key = 1\n", "unknown_key"),
        ("lambda = \n", "lambda"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{i}.toml"), text);
        let r = cli(&["--config", cfg.to_str().unwrap(), "alpha"], None);
        assert_eq!(r.code, EXIT_ERROR, "{text}");
        assert!(r.stderr.starts_with("error: ") && r.stderr.contains(needle), "{text}: {}", r.stderr);
    }
    let missing = cli(&["--config", "/nonexistent/x.toml", "alpha"], None);
    assert_eq!(missing.code, EXIT_ERROR);
    assert!(missing.stderr.contains("/nonexistent/x.toml"));
    assert_eq!(cli(&["orbit", "--point", "1", "--steps", "2"], None).code, EXIT_ERROR);
    assert_eq!(cli(&["plot", "sphere", "--out", "x.svg"], None).code, EXIT_ERROR);
    assert_eq!(cli(&[], None).code, EXIT_ERROR);
    assert_eq!(cli(&["--help"], None).code, EXIT_PASS);
}

#[test]
fn binary_reads_the_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_anosov-forge"))
        .arg("verify")
        .env("ANOSOV_FORGE_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    let doc = ReportDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(doc.checks.len(), 3);

    let bad = write(dir.path(), "bad.toml", "k = -1.0\n");
    let out = Command::new(env!("CARGO_BIN_EXE_anosov-forge"))
        .arg("alpha")
        .env("ANOSOV_FORGE_CONFIG", &bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
}
