use std::path::Path;
use std::process::{Command, Output};

use pqspectra::io::parse_hypergraph;
use pqspectra::labeling::{CertificateReport, ImpliedBound, Verdict};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pqspectra"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

/// Biadjacency `[[1,1],[0,1]]`.
const TRIANGULAR: &str = "t0 -> h0\nt0 -> h1\nt1 -> h1\n";

fn c4_files(dir: &TempDir) -> (String, String) {
    let graph = r#"{"r":2,"s":1,"arcs":[
        {"tail":["o0","b0"],"head":["w0"]},
        {"tail":["o1","b1"],"head":["w0"]},
        {"tail":["o2","b1"],"head":["w1"]},
        {"tail":["o3","b0"],"head":["w1"]}]}"#;
    let alpha = 2f64.powf(-(0.25 + 0.5));
    let mut entries = Vec::new();
    for (arc, (o, b, w)) in [("o0", "b0", "w0"), ("o1", "b1", "w0"), ("o2", "b1", "w1"), ("o3", "b0", "w1")]
        .iter()
        .enumerate()
    {
        entries.push(format!(r#"{{"vertex":"{o}","arc":{arc},"value":1}}"#));
        entries.push(format!(r#"{{"vertex":"{b}","arc":{arc},"value":0.5}}"#));
        entries.push(format!(r#"{{"vertex":"{w}","arc":{arc},"value":0.5}}"#));
    }
    let cert = format!(
        r#"{{"mode":"parabolic","alpha":{alpha:?},"entries":[{}]}}"#,
        entries.join(",")
    );
    (write(dir, "c4.json", graph), write(dir, "c4cert.json", &cert))
}

#[test]
fn solve_prints_golden_ratio() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "tri.txt", TRIANGULAR);
    let out = run(&["solve", &g, "--p", "2", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let want = format!("lambda={:.8}", (1.0 + 5f64.sqrt()) / 2.0);
    assert_eq!(want, "lambda=1.61803399");
    assert!(stdout(&out).lines().any(|l| l == want), "{}", stdout(&out));
}

#[test]
fn certify_cycle_certificate() {
    let dir = TempDir::new().unwrap();
    let (g, cert) = c4_files(&dir);
    let out = run(&["certify", &g, "--p", "4", "--q", "2", "--cert", &cert]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for line in ["verdict=normal", "consistent=true", "bound=equality 1.18920712"] {
        assert!(text.lines().any(|l| l == line), "missing {line} in\n{text}");
    }

    let out = run(&["certify", &g, "--p", "4", "--q", "2", "--cert", &cert, "--format", "json"]);
    let rep: CertificateReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep.verdict, Verdict::Normal);
    assert!(matches!(rep.implied_bound, ImpliedBound::Exact(c) if (c - 2f64.powf(0.25)).abs() < 1e-12));
}

#[test]
fn components_of_directed_path() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "path.txt", "a -> b\nb -> c\n");
    let out = run(&["components", &g]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("connected=false\n"));
    assert!(text.contains("component[0]=0\n"));
    assert!(text.contains("component[1]=1\n"));
}

#[test]
fn line_header_sets_arity() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "one.txt", "#r=2 s=1\na b -> c\n");
    let out = run(&["solve", &g, "--p", "3", "--q", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let want = format!("lambda={:.8}", 2f64.powf(-2.0 / 3.0));
    assert!(stdout(&out).contains(&want));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "tri.txt", TRIANGULAR);
    let missing = dir.path().join("missing.txt");
    let missing = missing.to_str().unwrap();
    assert_eq!(run(&["solve", missing, "--p", "2", "--q", "2"]).status.code(), Some(1));

    let overlap = write(&dir, "bad.txt", "a -> b\nc -> c\n");
    let out = run(&["solve", &overlap, "--p", "2", "--q", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("arc 1"));

    let garbled = write(&dir, "garbled.txt", "a -> b\nc d\n");
    let out = run(&["solve", &garbled, "--p", "2", "--q", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2:1"));

    assert_eq!(run(&["solve", &g, "--p", "2"]).status.code(), Some(3));
    assert_eq!(run(&["solve", &g, "--p", "0.5", "--q", "2"]).status.code(), Some(3));
    assert_eq!(run(&["scan", &g, "--grid", "2,3"]).status.code(), Some(3));
    assert_eq!(run(&["components", &g, "--format", "csv"]).status.code(), Some(3));
    assert_eq!(run(&["power", &g, "--k", "0"]).status.code(), Some(3));

    let out = run(&["solve", &g, "--p", "2", "--q", "2", "--max-iters", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("converged=false"));
}

#[test]
fn output_is_deterministic_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.txt", "a b -> c\nb d -> e\nd f -> c\n");
    for args in [
        vec!["solve", &g, "--p", "1.5", "--q", "1.2"],
        vec!["oracle", &g, "--p", "3", "--q", "3", "--starts", "5"],
        vec!["scan", &g],
    ] {
        let first = run(&args);
        let again = run(&args);
        let mut threaded = args.clone();
        threaded.extend(["--threads", "2"]);
        let threaded = run(&threaded);
        assert_eq!(first.stdout, again.stdout);
        assert_eq!(first.stdout, threaded.stdout);
    }
}

#[test]
fn scan_emits_csv() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "tri.txt", TRIANGULAR);
    let out = run(&["scan", &g, "--grid", "2,3x3,4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,q,e,lambda,scaled,pqloglambda,converged"));
    assert_eq!(lines.count(), 4);
    let first = text.lines().nth(1).unwrap();
    assert!(first.starts_with("2.00000000,3.00000000,0.83333333,"));
}

#[test]
fn power_graph_round_trips() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "edge.json", r#"{"r":1,"s":1,"arcs":[{"tail":["u"],"head":["v"]}]}"#);
    let out = run(&["power", &g, "--k", "1", "--a", "1", "--b", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((value["predicted_rho"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let graph = parse_hypergraph(value["graph"].to_string().as_bytes()).unwrap();
    assert_eq!((graph.r(), graph.s(), graph.arc_count()), (2, 2, 1));

    let text = stdout(&run(&["power", &g, "--k", "1", "--a", "1", "--b", "1"]));
    assert!(text.starts_with("predicted_rho=0.50000000\n"));
    let file = text.lines().nth(1).unwrap().strip_prefix("graph=").unwrap();
    let path = write(&dir, "pow.json", file);
    let out = run(&["solve", &path, "--p", "4", "--q", "4"]);
    assert!(stdout(&out).contains("lambda=0.50000000"));
}

#[test]
fn bounds_bracket_solution() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "star.txt", "c -> a\nc -> b\nc -> d\n");
    let out = run(&["bounds", &g, "--p", "2", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("lower_min_degree=1.73205081\n"));
    assert!(text.contains("upper_degree_product_max=1.73205081\n"));
    assert!(text.contains("lambda=1.73205081\n"));
    assert!(text.contains("sandwich=ok\n"));
}

#[test]
fn reads_stdin() {
    let mut child = bin()
        .args(["solve", "-", "--p", "2", "--q", "2"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(TRIANGULAR.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(stdout(&out).contains("lambda=1.61803399"));
    assert!(!Path::new("-").exists());
}
