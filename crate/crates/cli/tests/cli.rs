use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SOLVED: &str = "\
534678912
672195348
198342567
859761423
426853791
713924856
961537284
287419635
345286179";

/// 4×4 puzzle with four clues on the diagonal.
const SMALL: &str = "1... .4.. ..3. ...2";

/// Square with one diagonal; maximum cut 4 with weight-1 edges.
const SQUARE: &str = "4 5\n1 2 1\n2 3 1\n3 4 1\n1 4 1\n1 3 1\n";

fn hopsweep(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopsweep"))
        .args(args)
        .env("HOPSWEEP_OUT", out)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Zero every `wall_seconds` field.
fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            for (k, x) in m.iter_mut() {
                if k == "wall_seconds" {
                    *x = Value::from(0.0);
                } else {
                    strip_timing(x);
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn complete_board_exits_immediately() {
    let dir = TempDir::new().unwrap();
    let board = write(&dir, "solved.txt", SOLVED);
    let out = dir.path().join("run");
    let o = hopsweep(&["sudoku", board.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["free_variables"], 0);
    assert_eq!(report["verified"], true);
}

#[test]
fn conflicting_clues_are_named() {
    let dir = TempDir::new().unwrap();
    let board = write(&dir, "bad.txt", &format!("55{}", ".".repeat(79)));
    let o = hopsweep(&["sudoku", board.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains('5'), "{}", stderr(&o));
}

#[test]
fn small_sudoku_writes_report_and_traces() {
    let dir = TempDir::new().unwrap();
    let board = write(&dir, "small.txt", SMALL);
    let out = dir.path().join("run");
    let o = hopsweep(
        &["sudoku", board.to_str().unwrap(), "--bond-dim", "8", "--steps", "6", "--sweeps", "3", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("[1]"));

    let report = read_json(&out.join("report.json"));
    assert_eq!(report["verified"], true);
    assert_eq!(report["energy"], 0.0);
    let free = report["free_variables"].as_u64().unwrap() as usize;
    assert_eq!(report["n_up"], 16 - 4);
    assert_eq!(report["report"]["params"]["sweep"]["max_bond"], 8);
    assert_eq!(report["report"]["seed"], 0);

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("step,a,b,energy,sx_total,sz_total"));
    assert_eq!(lines.count(), 6);
    let heat = fs::read_to_string(out.join("heatmap.csv")).unwrap();
    let mut lines = heat.lines();
    assert_eq!(lines.next(), Some("step,site,sz_value"));
    assert_eq!(lines.count(), 6 * free);
    assert!(out.join("solution.txt").exists());
}

#[test]
fn maxcut_matches_a_brute_force_reference() {
    let dir = TempDir::new().unwrap();
    let graph = write(&dir, "square.txt", SQUARE);
    let g = graph.to_str().unwrap();
    let o = hopsweep(&["oracle", g], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("ground energy -4"), "{text}");
    assert!(text.contains("best cut 4"), "{text}");

    let out = dir.path().join("run");
    let o = hopsweep(&["maxcut", g, "--reference", "-4", "--bond-dim", "4", "--restarts", "3", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["cut"], 4.0);
    assert_eq!(report["matches_reference"], true);

    // An impossible reference completes without reaching it.
    let o = hopsweep(&["maxcut", g, "--reference", "-5", "--bond-dim", "4", "--restarts", "1"], &dir.path().join("miss"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn reports_are_reproducible_and_independent_of_jobs() {
    let dir = TempDir::new().unwrap();
    let board = write(&dir, "small.txt", SMALL);
    let b = board.to_str().unwrap();
    let mut reports = Vec::new();
    let mut codes = Vec::new();
    for (name, jobs) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out = dir.path().join(name);
        let o = hopsweep(
            &["sudoku", b, "--init", "random:2", "--bond-dim", "4", "--steps", "3", "--sweeps", "1", "--eta", "0.2", "--seed", "5", "--restarts", "4", "--target-energy", "-1", "--jobs", jobs],
            &out,
        );
        assert_ne!(o.status.code(), Some(1), "{}", stderr(&o));
        codes.push(o.status.code());
        let mut v = read_json(&out.join("report.json"));
        strip_timing(&mut v);
        v["config"]["jobs"] = Value::Null;
        reports.push(v);
    }
    assert_eq!(reports[0]["report"]["restarts"], 4);
    assert!(codes.iter().all(|c| *c == codes[0]));
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
}

#[test]
fn analyze_counts_couplings_by_distance() {
    let dir = TempDir::new().unwrap();
    let qubo = write(
        &dir,
        "four.json",
        r#"{"n": 4, "entries": [[1, 1, 1.0], [1, 2, 1.0], [1, 3, -1.0], [2, 4, 2.0], [3, 3, -2.0]]}"#,
    );
    let out = dir.path().join("profile");
    let o = hopsweep(&["analyze", qubo.to_str().unwrap(), "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let hz = fs::read_to_string(out.join("hz.csv")).unwrap();
    assert_eq!(hz.lines().count(), 1 + 4);
    let rho = fs::read_to_string(out.join("rho.csv")).unwrap();
    let rows: Vec<&str> = rho.lines().collect();
    assert_eq!(rows[0], "d,count,rho");
    let parse = |row: &str| -> (usize, f64) {
        let f: Vec<&str> = row.split(',').collect();
        (f[1].parse().unwrap(), f[2].parse().unwrap())
    };
    assert_eq!(parse(rows[1]), (1, 1.0 / 3.0));
    assert_eq!(parse(rows[2]), (2, 1.0));
    assert_eq!(parse(rows[3]), (0, 0.0));
}

#[test]
fn oracle_refuses_large_instances() {
    let dir = TempDir::new().unwrap();
    let edges: Vec<String> = (1..30).map(|i| format!("{i} {} 1", i + 1)).collect();
    let graph = write(&dir, "chain.txt", &format!("30 29\n{}\n", edges.join("\n")));
    let o = hopsweep(&["oracle", graph.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("exceeds the cap"), "{}", stderr(&o));
}

#[test]
fn config_files_reject_unknown_keys() {
    let dir = TempDir::new().unwrap();
    let board = write(&dir, "small.txt", SMALL);
    let config = write(&dir, "run.json", r#"{"drive": {"steps": 4}}"#);
    let o = hopsweep(&["sudoku", board.to_str().unwrap(), "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("steps"), "{}", stderr(&o));
}

#[test]
fn output_directory_defaults_to_the_environment() {
    let dir = TempDir::new().unwrap();
    let board = write(&dir, "solved.txt", SOLVED);
    let out = dir.path().join("from-env");
    let o = hopsweep(&["sudoku", board.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("report.json").exists());
}
