use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use finadapt::corpus::{get_instance, NAMES};
use finadapt::io::{parse_instance, parse_solution, solution_to_json, SolutionFile};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finadapt")).args(args).env_remove("FINADAPT_TOL").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn reference_file(dir: &TempDir, name: &str) -> PathBuf {
    let e = get_instance(name).unwrap();
    let file = SolutionFile::from_solution(&e.reference_solutions[0], None);
    put(dir, &format!("{name}-ref.json"), &solution_to_json(&file))
}

fn objective_in(path: &Path) -> f64 {
    parse_solution(&std::fs::read_to_string(path).unwrap()).unwrap().objective.unwrap()
}

#[test]
fn solve_square_k2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sq.json");
    let o = run(&["solve", "--k", "2", "--method", "enum", "--instance", "corpus:square", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!((objective_in(&out) - 2.0).abs() < 1e-7);
    let file = parse_solution(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.k, Some(2));
    assert!(file.pieces.is_some());
}

#[test]
fn solve_r_with_enumeration_is_a_mismatch() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["solve", "--k", "2", "--method", "enum", "--instance", "corpus:R", "--out", s(&out)]);
    assert_eq!(code(&o), 5);
}

#[test]
fn solve_interval_static_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("i.json");
    let o = run(&["solve", "--k", "1", "--instance", "corpus:interval", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("INFEASIBLE"));
    let file = parse_solution(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(file.x.is_none());
}

#[test]
fn one_dimensional_method_needs_a_segment() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.json");
    let o = run(&["solve", "--k", "2", "--method", "1d", "--instance", "corpus:square", "--out", s(&out)]);
    assert_eq!(code(&o), 5);
    let o = run(&["solve", "--k", "2", "--method", "1d", "--instance", "corpus:interval", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!((objective_in(&out) - 1.0).abs() < 1e-7);
}

#[test]
fn milp_flag_consistency() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.json");
    let o = run(&["solve", "--k", "3", "--method", "milp", "--instance", "corpus:square", "--out", s(&out)]);
    assert_eq!(code(&o), 4);
    let o = run(&["solve", "--k", "2", "--method", "milp", "--instance", "corpus:square", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert!((objective_in(&out) - 2.0).abs() < 1e-6);
}

#[test]
fn bad_flags_are_input_errors() {
    assert_eq!(code(&run(&["solve", "--k", "4", "--instance", "corpus:P", "--out", "x"])), 4);
    assert_eq!(code(&run(&["frobnicate"])), 4);
    assert_eq!(code(&run(&["solve", "--k", "2", "--instance", "corpus:nope", "--out", "x"])), 4);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn thread_count_does_not_change_the_file() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    run(&["solve", "--k", "2", "--instance", "corpus:square", "--threads", "1", "--out", s(&a)]);
    run(&["solve", "--k", "2", "--instance", "corpus:square", "--threads", "3", "--out", s(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn verify_reference_of_p() {
    let dir = TempDir::new().unwrap();
    let sol = reference_file(&dir, "P");
    let o = run(&["verify", "--instance", "corpus:P", "--solution", s(&sol)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn verify_uncovered_point_prints_witness() {
    let dir = TempDir::new().unwrap();
    let sol = put(&dir, "bad.json", r#"{"x": [0, 0, 0, 0], "ys": [[5]]}"#);
    let o = run(&["verify", "--instance", "corpus:P", "--solution", s(&sol)]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("witness"));
}

#[test]
fn verify_wrong_objective_is_rejected() {
    let dir = TempDir::new().unwrap();
    let e = get_instance("P").unwrap();
    let mut file = SolutionFile::from_solution(&e.reference_solutions[0], None);
    file.objective = Some(file.objective.unwrap() - 1.0);
    let sol = put(&dir, "wrong.json", &solution_to_json(&file));
    assert_eq!(code(&run(&["verify", "--instance", "corpus:P", "--solution", s(&sol)])), 2);
}

#[test]
fn truncated_json_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let full = finadapt::io::instance_to_json(&get_instance("P").unwrap().instance);
    let inst = put(&dir, "cut.json", &full[..full.len() / 2]);
    let sol = reference_file(&dir, "P");
    let o = run(&["verify", "--instance", s(&inst), "--solution", s(&sol)]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    let bad_sol = put(&dir, "cut-sol.json", "{\"x\": [0,");
    assert_eq!(code(&run(&["verify", "--instance", "corpus:P", "--solution", s(&bad_sol)])), 4);
}

#[test]
fn lowerbound_scenarios() {
    let dir = TempDir::new().unwrap();
    let q = put(&dir, "q.json", "[0, 0.3333333333333333, 0.6666666666666666, 1]");
    let o = run(&["lowerbound", "--instance", "corpus:Q", "--k", "3", "--scenarios", s(&q)]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("INFEASIBLE"));

    let p3 = put(&dir, "p3.json", "[0, 0.5, 1]");
    let o = run(&["lowerbound", "--instance", "corpus:P", "--k", "2", "--scenarios", s(&p3)]);
    assert_eq!(code(&o), 0);
    assert!((stdout(&o).trim().parse::<f64>().unwrap() - 2.0).abs() < 1e-6);

    let p1 = put(&dir, "p1.json", "[[0]]");
    let o = run(&["lowerbound", "--instance", "corpus:P", "--k", "2", "--scenarios", s(&p1)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).trim().parse::<f64>().unwrap().abs() < 1e-6);

    let outside = put(&dir, "out.json", "[2]");
    assert_eq!(code(&run(&["lowerbound", "--instance", "corpus:P", "--k", "2", "--scenarios", s(&outside)])), 4);
}

#[test]
fn lowerbound_grid() {
    let o = run(&["lowerbound", "--instance", "corpus:P", "--k", "2", "--grid", "3"]);
    assert_eq!(code(&o), 0);
    assert!((stdout(&o).trim().parse::<f64>().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(code(&run(&["lowerbound", "--instance", "corpus:P", "--k", "2", "--grid", "1"])), 4);
    assert_eq!(code(&run(&["lowerbound", "--instance", "corpus:P", "--k", "2"])), 4);
}

#[test]
fn render_r_reference() {
    let dir = TempDir::new().unwrap();
    let sol = reference_file(&dir, "R");
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    assert_eq!(code(&run(&["render", "--instance", "corpus:R", "--solution", s(&sol), "--out", s(&a)])), 0);
    assert_eq!(code(&run(&["render", "--instance", "corpus:R", "--solution", s(&sol), "--out", s(&b)])), 0);
    let svg = std::fs::read_to_string(&a).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polygon").count(), 3);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn render_square_solution() {
    let dir = TempDir::new().unwrap();
    let sol = dir.path().join("sq.json");
    let svg = dir.path().join("sq.svg");
    run(&["solve", "--k", "2", "--instance", "corpus:square", "--out", s(&sol)]);
    assert_eq!(code(&run(&["render", "--instance", "corpus:square", "--solution", s(&sol), "--out", s(&svg)])), 0);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("y2 = "));
}

#[test]
fn render_one_dimensional_is_a_mismatch() {
    let dir = TempDir::new().unwrap();
    let sol = reference_file(&dir, "interval");
    let svg = dir.path().join("i.svg");
    assert_eq!(code(&run(&["render", "--instance", "corpus:interval", "--solution", s(&sol), "--out", s(&svg)])), 5);
}

#[test]
fn export_round_trip_keeps_the_objective() {
    let dir = TempDir::new().unwrap();
    for name in NAMES {
        let path = dir.path().join(format!("{name}.json"));
        assert_eq!(code(&run(&["export", "--name", name, "--out", s(&path)])), 0);
        let parsed = parse_instance(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(parsed, get_instance(name).unwrap().instance, "{name}");

        let direct = dir.path().join(format!("{name}-direct.json"));
        let via_file = dir.path().join(format!("{name}-file.json"));
        let corpus_src = format!("corpus:{name}");
        let a = run(&["solve", "--k", "2", "--instance", &corpus_src, "--out", s(&direct)]);
        let b = run(&["solve", "--k", "2", "--instance", s(&path), "--out", s(&via_file)]);
        assert_eq!(code(&a), code(&b), "{name}");
        if code(&a) == 5 {
            continue;
        }
        let fa = parse_solution(&std::fs::read_to_string(&direct).unwrap()).unwrap();
        let fb = parse_solution(&std::fs::read_to_string(&via_file).unwrap()).unwrap();
        assert_eq!(fa.objective.map(f64::to_bits), fb.objective.map(f64::to_bits), "{name}");
    }
}

#[test]
fn tolerance_override_from_environment() {
    let bad = Command::new(env!("CARGO_BIN_EXE_finadapt"))
        .args(["lowerbound", "--instance", "corpus:P", "--k", "2", "--grid", "2"])
        .env("FINADAPT_TOL", "feasibility=-1")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 4);
    let ok = Command::new(env!("CARGO_BIN_EXE_finadapt"))
        .args(["lowerbound", "--instance", "corpus:P", "--k", "2", "--grid", "2"])
        .env("FINADAPT_TOL", "1e-8")
        .output()
        .unwrap();
    assert_eq!(code(&ok), 0);
}
