//! End-to-end runs of the `ssg` binary.

use std::path::Path;
use std::process::{Command, Output};

use ssg::cli::SolveReport;

fn ssg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_fig1(dir: &Path) -> String {
    let path = dir.join("fig1.ssg");
    std::fs::write(&path, ssg::serialize_game(&ssg::generators::fig1())).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn solve_fig1_with_every_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_fig1(dir.path());
    for algo in ["bvi", "vi", "si", "topo-bvi", "topo-si", "hop-local"] {
        let out = ssg(&["solve", &file, "--algo", algo, "--eps", "1e-6", "--json", "--warm-start", "vi"]);
        assert_eq!(out.status.code(), Some(0), "{algo}: {}", String::from_utf8_lossy(&out.stderr));
        let report: SolveReport = serde_json::from_str(&stdout(&out)).unwrap();
        assert!((report.initial_value - 0.5).abs() <= 1e-6, "{algo}");
    }
}

#[test]
fn solve_text_output_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_fig1(dir.path());
    let a = ssg(&["solve", &file, "--algo", "si", "--exact-rational"]);
    let b = ssg(&["solve", &file, "--algo", "si", "--exact-rational"]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("initial 0 value 0.5"), "{text}");
    assert!(text.contains("(1/2)") && text.contains("action c"));
}

#[test]
fn hm_under_iteration_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("hm30.ssg");
    let file = file.to_str().unwrap();
    assert_eq!(ssg(&["gen", "hm", "30", "-o", file]).status.code(), Some(0));
    let out = ssg(&["solve", file, "--algo", "bvi", "--max-iterations", "10000"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn encode_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_fig1(dir.path());
    let lp = dir.path().join("fig1.lp");
    let out = ssg(&["encode", &file, "--form", "hop", "--format", "lp-style", "-o", lp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&lp).unwrap().contains("Binaries"));

    let prog = dir.path().join("fig1.prog");
    let prog = prog.to_str().unwrap();
    assert_eq!(ssg(&["encode", &file, "--form", "qp", "--format", "native", "-o", prog]).status.code(), Some(0));

    let good = dir.path().join("good.json");
    std::fs::write(&good, stdout(&ssg(&["solve", &file, "--algo", "si", "--json"]))).unwrap();
    let out = ssg(&["verify", &file, "--program", prog, "--values", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS"));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 1 1 0\n").unwrap();
    let out = ssg(&["verify", &file, "--program", prog, "--values", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn encoding_errors_exit_five() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("bigmec.ssg");
    let big = big.to_str().unwrap();
    assert_eq!(ssg(&["gen", "bigmec", "100", "-o", big]).status.code(), Some(0));
    assert_eq!(ssg(&["encode", big, "--form", "hop"]).status.code(), Some(5));

    let rnd = dir.path().join("r.ssg");
    let rnd = rnd.to_str().unwrap();
    ssg(&["gen", "random", "--seed", "3", "--states", "5", "--actions", "4", "-o", rnd]);
    let game = ssg::parse_game(&std::fs::read_to_string(rnd).unwrap()).unwrap();
    if game.max_actions() > 2 {
        assert_eq!(ssg(&["encode", rnd, "--form", "qp"]).status.code(), Some(5));
        assert_eq!(ssg(&["encode", rnd, "--form", "qp", "--two-act"]).status.code(), Some(0));
    }
    assert_eq!(ssg(&["encode", rnd, "--stopping", "1/100"]).status.code(), Some(0));
    assert_eq!(ssg(&["encode", rnd, "--stopping", "2"]).status.code(), Some(1));
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.ssg");
    std::fs::write(&file, "states 2\nbogus line\n").unwrap();
    let out = ssg(&["solve", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    write_fig1(dir.path());
    let big = dir.path().join("bigmec.ssg");
    ssg(&["gen", "bigmec", "3", "-o", big.to_str().unwrap()]);
    let csv = dir.path().join("out.csv");
    let out = ssg(&["bench", dir.path().to_str().unwrap(), "--algos", "bvi,si,hop-local", "-o", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,states,max_acts,avg_acts,mecs,algo,value,iters,seconds,status");
    assert_eq!(lines.len(), 1 + 2 * 3);
    let fig1_bvi = lines.iter().find(|l| l.starts_with("fig1,") && l.contains(",bvi,")).unwrap();
    let cols: Vec<&str> = fig1_bvi.split(',').collect();
    assert_eq!(&cols[..6], &["fig1", "4", "2", "1.25", "1", "bvi"]);
    assert!((cols[6].parse::<f64>().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(cols[9], "OK");
    let big_hop = lines.iter().find(|l| l.starts_with("bigmec,") && l.contains(",hop-local,")).unwrap();
    assert!(big_hop.ends_with(",OK"), "{big_hop}");
}
