use std::process::{Command, Output};

use rankr::{sci, DeflationJson, TraceJson};

fn rankr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

const CYCLIC: [&str; 8] = ["run", "cyclic4", "--t", "0.9999", "--rank", "3", "--x0", "0.8,1.2,-0.8,-1.2"];

#[test]
fn circle_run_reaches_the_circle() {
    let o = rankr(&["run", "circle", "--rank", "1", "--x0", "1.8,0.6", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let t: TraceJson = serde_json::from_str(&stdout(&o)).unwrap();
    let x = &t.steps.last().unwrap().x;
    assert!((x[0][0] - 0.928428592).abs() < 1e-6);
    assert!((x[0][0].powi(2) + x[1][0].powi(2) - 1.0).abs() < 1e-10);
    assert_eq!(t.rank_used, 1);
}

#[test]
fn circle_table_format() {
    let o = rankr(&["run", "circle", "--rank", "1", "--x0", "1.8,0.6"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "Step  0:  residual = 1.2e+01");
    assert!(lines.next().unwrap().starts_with("Step  1:  residual = "));
}

#[test]
fn oversized_rank_is_a_usage_error() {
    let o = rankr(&["run", "circle", "--rank", "5"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid rank"));
}

#[test]
fn cyclic_residual_plateaus() {
    let o = rankr(&CYCLIC);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().filter(|l| l.starts_with("Step")).collect();
    assert_eq!(rows[0], "Step  0:  residual = 7.8e-02");
    for r in &rows[rows.len() - 3..] {
        assert!(r.contains("residual = 1.0e-04"), "{r}");
    }
}

#[test]
fn table_and_json_agree() {
    let table = stdout(&rankr(&CYCLIC));
    let mut args = CYCLIC.to_vec();
    args.extend(["--format", "json"]);
    let t: TraceJson = serde_json::from_str(&stdout(&rankr(&args))).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| l.starts_with("Step")).collect();
    assert_eq!(rows.len(), t.steps.len());
    for (row, s) in rows.iter().zip(&t.steps) {
        let want = match s.shift {
            Some(h) => format!("Step {:2}:  residual = {}  shift = {}", s.k, sci(s.residual), sci(h)),
            None => format!("Step {:2}:  residual = {}", s.k, sci(s.residual)),
        };
        assert_eq!(*row, want);
    }
    assert_eq!(t.status, "StationaryPoint");
}

#[test]
fn csv_columns() {
    let mut args = CYCLIC.to_vec();
    args.extend(["--format", "csv"]);
    let out = stdout(&rankr(&args));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,residual,shift"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert!(first[2].is_empty());
    for l in lines {
        let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 3);
    }
}

#[test]
fn max_iterations_exit_code() {
    let o = rankr(&["run", "circle", "--rank", "1", "--x0", "1.8,0.6", "--max-iter", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn rank_probe() {
    let last = |o: &Output| stdout(o).lines().last().unwrap().to_string();
    assert_eq!(last(&rankr(&["rank", "circle", "--x", "0.6,0.8", "--theta", "1e-8"])), "rank = 1");
    assert_eq!(last(&rankr(&["rank", "circle", "--x", "2,2"])), "rank = 2");
    assert_eq!(last(&rankr(&["rank", "ultrasingular-branch", "--x", "0,0,2,0.5"])), "rank = 1");
    assert_eq!(
        last(&rankr(&["rank", "circle", "--x", "2,2", "--theta", "0.5", "--relative"])),
        "rank = 1"
    );
    assert_eq!(code(&rankr(&["rank", "circle", "--x", "1,2,3"])), 1);
}

#[test]
fn deflate_branch() {
    let o = rankr(&[
        "deflate", "ultrasingular-branch", "--x0", "0.001,0.003,0.499,2.002", "--dim", "1", "--format", "json",
    ]);
    assert_eq!(code(&o), 0);
    let d: DeflationJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(d.depth_used, 1);
    assert!(d.semiregular);
    let last = d.levels.last().unwrap();
    assert_eq!(last.rank, 7);
    assert_eq!(last.nullity, 1);
    let x = &last.trace.steps.last().unwrap().x;
    assert!((x[2][0] * x[3][0] - 1.0).abs() < 1e-10);
}

#[test]
fn deflate_refusals() {
    let o = rankr(&["deflate", "circle", "--x0", "0.6,0.8", "--dim", "1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nothing to deflate"));
    assert_eq!(code(&rankr(&["deflate", "circle", "--dim", "1", "--max-depth", "0"])), 1);
}

#[test]
fn seeds_are_reproducible() {
    let args = ["deflate", "ultrasingular-branch", "--dim", "1", "--seed", "7", "--format", "json"];
    let a = stdout(&rankr(&args));
    let b = stdout(&rankr(&args));
    assert_eq!(a, b);
    let mut other = args;
    other[4] = "8";
    assert_ne!(a, stdout(&rankr(&other)));
}

#[test]
fn unknown_inputs() {
    assert_eq!(code(&rankr(&["run", "no-such-system"])), 1);
    assert_eq!(code(&rankr(&["run", "circle", "--x0", "1,x"])), 1);
    assert_eq!(code(&rankr(&["run", "circle", "--rank", "one"])), 1);
    assert_eq!(code(&rankr(&["run", "circle", "--t", "1"])), 1);
    assert_eq!(code(&rankr(&["bogus"])), 1);
    assert_eq!(code(&rankr(&["--help"])), 0);
}

#[test]
fn poly_file_systems() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("parabola.json");
    std::fs::write(&path, r#"{"vars": ["x", "y"], "equations": ["y - x^2", "2*y - 2*x^2"]}"#).unwrap();
    let p = path.to_str().unwrap();
    let o = rankr(&["run", p, "--rank", "1", "--x0", "1.1,0.9", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let t: TraceJson = serde_json::from_str(&stdout(&o)).unwrap();
    let x = &t.steps.last().unwrap().x;
    assert!((x[1][0] - x[0][0].powi(2)).abs() < 1e-12);

    assert_eq!(code(&rankr(&["run", p, "--rank", "1"])), 1);
    std::fs::write(&path, r#"{"vars": ["x"], "equations": ["x +* 1"]}"#).unwrap();
    assert_eq!(code(&rankr(&["run", p, "--x0", "1"])), 1);
}

#[test]
fn list_names_everything() {
    let out = stdout(&rankr(&["list"]));
    for name in rankr_core::catalog::NAMES {
        assert!(out.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name}");
    }
}
