use std::path::Path;
use std::process::{Command, Output};

fn graphon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphon")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const TWO_BLOCK: &str = "stepgraphon 2\n0.5 0.5\n0.9 0.1\n0.1 0.9\n";

#[test]
fn sample_estimate_cutnorm_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "w.txt", TWO_BLOCK);
    let a = dir.path().join("a.txt");
    let a = a.to_str().unwrap();
    stdout(&graphon(&["sample", "--graphon", &w, "--n", "20", "--seed", "3", "--out", a]));
    let text = std::fs::read_to_string(a).unwrap();
    assert!(text.starts_with("matrix 20\n"));
    let again = stdout(&graphon(&["sample", "--graphon", &w, "--n", "20", "--seed", "3"]));
    assert_eq!(again, text);

    for est in ["adjacency", "mean", "svt", "rls"] {
        let out = stdout(&graphon(&["estimate", "--adjacency", a, "--estimator", est, "--k", "2"]));
        assert!(out.starts_with("matrix 20\n"), "{est}");
    }
    let small = write(dir.path(), "b.txt", "matrix 2\n1.0 -1.0\n-1.0 1.0\n");
    let cut = stdout(&graphon(&["cutnorm", "--matrix", &small]));
    assert_eq!(value(&cut, "value"), "0.25");
    assert_eq!(value(&cut, "upperBound"), "false");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "w.txt", TWO_BLOCK);
    let bad_rho = graphon(&["sample", "--graphon", &w, "--n", "10", "--rho", "1.5"]);
    assert_eq!(bad_rho.status.code(), Some(2));
    let garbled = write(dir.path(), "g.txt", "stepgraphon two\n");
    assert_eq!(graphon(&["sample", "--graphon", &garbled, "--n", "10"]).status.code(), Some(2));

    let n = 30;
    let mut big = format!("matrix {n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| if (i + j) % 3 == 0 { "1.0".into() } else { "-0.5".into() }).collect();
        big.push_str(&row.join(" "));
        big.push('\n');
    }
    let big = write(dir.path(), "big.txt", &big);
    assert_eq!(graphon(&["cutnorm", "--matrix", &big, "--method", "exact"]).status.code(), Some(3));
    let auto = stdout(&graphon(&["cutnorm", "--matrix", &big]));
    assert_eq!(value(&auto, "upperBound"), "false");
    assert_eq!(value(&auto, "method"), "heuristic");
}

#[test]
fn risk_csv_is_byte_identical_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "risk.cfg", "n=16\nn=24\nn=32\nn=48\nk=2\nreps=4\nestimator=adjacency\nmetric=cut\nmetric=frobenius\n");
    let run = |name: &str| -> String {
        let out = dir.path().join(name);
        stdout(&graphon(&["risk", "--config", &config, "--seed", "7", "--out", out.to_str().unwrap()]));
        std::fs::read_to_string(out).unwrap()
    };
    let first = run("a.csv");
    let second = run("b.csv");
    assert_eq!(first, second);
    assert!(first.starts_with("n,k,rho,estimator,metric,mean_risk,stderr,reps,theory\n"));
    assert_eq!(first.lines().count(), 9);

    let other = stdout(&graphon(&["risk", "--config", &config, "--seed", "8"]));
    assert_ne!(other, first);

    let csv = dir.path().join("a.csv");
    let fit = stdout(&graphon(&["slope", "--csv", csv.to_str().unwrap(), "--metric", "cut"]));
    let slope: f64 = value(&fit, "slope").parse().unwrap();
    assert!(slope < 0.0, "{fit}");
    assert_eq!(value(&fit, "points"), "4");
    let degenerate = graphon(&["slope", "--csv", csv.to_str().unwrap()]);
    assert_eq!(degenerate.status.code(), Some(2));
}

#[test]
fn distance_regularity_packing() {
    let dir = tempfile::tempdir().unwrap();
    let w1 = write(dir.path(), "w1.txt", "stepgraphon 1\n1.0\n0.5\n");
    let w2 = write(dir.path(), "w2.txt", "stepgraphon 2\n0.5 0.5\n0.6 0.4\n0.4 0.6\n");
    let d = stdout(&graphon(&["distance", "--w1", &w1, "--w2", &w2]));
    let upper: f64 = value(&d, "upper").parse().unwrap();
    assert!((upper - 0.025).abs() < 1e-12);
    let lower: f64 = value(&d, "lower").parse().unwrap();
    assert!(lower > 0.0 && lower <= upper);

    let w = write(dir.path(), "c.txt", "stepgraphon 2\n0.5 0.5\n0.9 0.9\n0.9 0.9\n");
    let r = stdout(&graphon(&["regularity", "--graphon", &w, "--q0", "16"]));
    assert_eq!(value(&r, "terms"), "1");
    assert_eq!(value(&r, "k0"), "4");

    let p = stdout(&graphon(&["packing", "--kind", "matrix", "--n", "64"]));
    assert_eq!(value(&p, "size"), "55");
    assert_eq!(value(&p, "fanoReady"), "true");
    let two = stdout(&graphon(&["packing", "--kind", "graphon", "--n", "100", "--k", "2"]));
    assert_eq!(value(&two, "size"), "2");
    assert_eq!(graphon(&["packing", "--kind", "graphon", "--n", "100", "--k", "3"]).status.code(), Some(2));
}
