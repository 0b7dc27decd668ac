use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcs-kit"))
        .args(args)
        .env("FCS_KIT_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const BEAM_SPLITTER: &str = r#"{"rows":2,"cols":2,"data":[[0.70710678118654757,0],[0.70710678118654757,0],[-0.70710678118654757,0],[0.70710678118654757,0]]}"#;

fn single_fermion() -> &'static str {
    r#"{"flavor":"fermion","factors":[{"local_modes":2,"amps":[{"occ":[1,0],"re":1,"im":0}]}]}"#
}

#[test]
fn permanent_of_small_matrices() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.json", r#"{"rows":2,"cols":2,"data":[[1,0],[2,0],[3,0],[4,0]]}"#);
    let out = run(&["permanent", &m], "1");
    assert!(out.status.success());
    assert_eq!(stdout(&out), "10\n");

    let id = write(dir.path(), "id.json", r#"{"rows":3,"cols":3,"data":[[1,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[1,0]]}"#);
    assert_eq!(stdout(&run(&["permanent", &id], "1")), "1\n");

    let v = write(dir.path(), "v.json", r#"{"dim":2,"u":[[[1,0],[1,0]]],"v":[[[1,0],[1,0]]]}"#);
    assert_eq!(stdout(&run(&["permanent", "--lowrank", &v], "1")), "5\n");
    let dense_v = write(dir.path(), "dv.json", r#"{"rows":2,"cols":2,"data":[[1,0],[1,0],[1,0],[1,0]]}"#);
    let out = stdout(&run(&["permanent", "--lowrank", &dense_v], "1"));
    let value: f64 = out.trim().parse().unwrap();
    assert!((value - 5.0).abs() < 1e-12, "{out}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let broken = write(dir.path(), "broken.json", "{\"rows\":");
    assert_eq!(run(&["permanent", &broken], "1").status.code(), Some(2));
    assert_eq!(run(&["permanent", "/nonexistent/file.json"], "1").status.code(), Some(2));

    let n = 31;
    let data = vec!["[0,0]"; n * n].join(",");
    let big = write(dir.path(), "big.json", &format!(r#"{{"rows":{n},"cols":{n},"data":[{data}]}}"#));
    assert_eq!(run(&["permanent", &big], "1").status.code(), Some(3));

    let spec = write(dir.path(), "spec.json", r#"{"u0":{"rows":1,"cols":1,"data":[[1,0]]},"counted":[]}"#);
    let doubled = write(dir.path(), "b2.json", r#"{"flavor":"boson","factors":[{"local_modes":1,"amps":[{"occ":[2],"re":1,"im":0}]}]}"#);
    assert_eq!(run(&["chi", "--state", &doubled, "--spec", &spec], "1").status.code(), Some(4));

    let singular = write(
        dir.path(),
        "sing.json",
        r#"{"u0":{"rows":2,"cols":2,"data":[[1,0],[2,0],[2,0],[4,0]]},"counted":[{"mode":0,"z":[0,0]}]}"#,
    );
    assert_eq!(run(&["chi", "--state", &write(dir.path(), "f.json", single_fermion()), "--spec", &singular], "1").status.code(), Some(5));
    assert_eq!(run(&["bogus"], "1").status.code(), Some(2));
}

#[test]
fn chi_and_probabilities() {
    let dir = TempDir::new().unwrap();
    let state = write(dir.path(), "state.json", single_fermion());
    let spec = write(dir.path(), "spec.json", &format!(r#"{{"u0":{BEAM_SPLITTER},"counted":[{{"mode":0,"z":[-1,0]}}]}}"#));
    let out = stdout(&run(&["chi", "--state", &state, "--spec", &spec], "1"));
    let value: f64 = out.trim().split(['+', 'i']).next().unwrap().parse().unwrap_or(f64::NAN);
    assert!(value.abs() < 1e-15, "{out}");

    let csv = stdout(&run(&["chi", "--state", &state, "--spec", &spec, "--probs"], "1"));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "n0,probability");
    for (row, n) in rows[1..].iter().zip(["0", "1"]) {
        let (occ, p) = row.split_once(',').unwrap();
        assert_eq!(occ, n);
        assert!((p.parse::<f64>().unwrap() - 0.5).abs() < 1e-10);
    }
    let probs = stdout(&run(&["probs", "--state", &state, "--spec", &spec], "1"));
    assert_eq!(probs, csv);

    let samples = stdout(&run(&["probs", "--state", &state, "--spec", &spec, "--samples", "50", "--seed", "3"], "1"));
    assert_eq!(samples.lines().count(), 51);
    assert_eq!(samples, stdout(&run(&["probs", "--state", &state, "--spec", &spec, "--samples", "50", "--seed", "3"], "1")));

    let ones = write(
        dir.path(),
        "ones.json",
        r#"{"u0":{"rows":3,"cols":3,"data":[[1,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[1,0]]},"counted":[{"mode":1,"z":[1,0]}]}"#,
    );
    assert_eq!(stdout(&run(&["chi", "--preset", "single_boson:3", "--spec", &ones], "1")), "1\n");
}

#[test]
fn oracle_compare_families() {
    for (family, sizes) in [
        ("lowrank-permanent", "2..6"),
        ("fermion-lowrank", "1..3"),
        ("psi4-reduction", "1..2"),
        ("fcs", "2,3"),
    ] {
        let out = run(&["oracle-compare", "--family", family, "--sizes", sizes, "--seed", "4", "--instances", "3"], "1");
        let text = stdout(&out);
        assert!(out.status.success(), "{family}: {text}");
        assert!(text.trim_end().ends_with("PASS"), "{text}");
    }
}

#[test]
fn expand_state_preset() {
    let out = stdout(&run(&["expand-state", "--preset", "psi4:2"], "1"));
    assert!(out.starts_with(r#"{"flavor":"fermion","modes":8,"amps":["#));
    assert_eq!(out.matches("\"occ\"").count(), 4);
    assert_eq!(run(&["expand-state", "--preset", "nope:1"], "1").status.code(), Some(2));
}

#[test]
fn bench_writes_csv_and_slope() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bench.csv");
    let out = run(
        &["bench", "--algorithm", "lowrank-permanent", "--sizes", "8,16", "--k", "1", "--output", path.to_str().unwrap()],
        "1",
    );
    assert!(out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("loglog_slope="));
    let csv = std::fs::read_to_string(path).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn output_is_identical_across_thread_budgets() {
    let a = run(&["oracle-compare", "--family", "fermion-lowrank", "--sizes", "2..3", "--seed", "9"], "1");
    let b = run(&["oracle-compare", "--family", "fermion-lowrank", "--sizes", "2..3", "--seed", "9"], "4");
    assert_eq!(a.stdout, b.stdout);
}
