use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use feuilletage::encodings::read_process_csv;
use feuilletage::feuilletage::read_edge_list;
use feuilletage::permmaps::{validate_nested_ncp, NestedNcp};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feuilletage"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    let out = dir.to_str().unwrap();
    all.extend(["--out", out]);
    run(&all)
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sample_writes_one_file_per_layer_and_an_edge_list() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), &["sample", "--n", "1000", "--depth", "3", "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(listing(tmp.path()), ["feuilletage.edges", "layer_1.csv", "layer_2.csv", "layer_3.csv"]);
    for name in listing(tmp.path()) {
        let text = fs::read_to_string(tmp.path().join(&name)).unwrap();
        assert!(text.starts_with("# feuilletage sample n=1000 depth=3 seed=7 replicates=1"), "{name}");
    }
    for j in 1..=3usize {
        let text = fs::read(tmp.path().join(format!("layer_{j}.csv"))).unwrap();
        let (layer, n, c, l) = read_process_csv(text.as_slice()).unwrap();
        assert_eq!((layer, n), (j, 1000));
        assert_eq!(c.n_edges(), 1000 << (j - 1));
        l.check_corner_consistency(&c).unwrap();
    }
    let edges = fs::read(tmp.path().join("feuilletage.edges")).unwrap();
    let (nv, e) = read_edge_list(edges.as_slice()).unwrap();
    assert_eq!((nv, e.len()), (1003, 4000));
}

#[test]
fn sample_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sample", "--n", "500", "--depth", "4", "--seed", "3", "--replicates", "3", "--svg", "--ncp"];
    assert!(run_in(a.path(), &args).status.success());
    let mut with_threads = args.to_vec();
    with_threads.extend(["--threads", "1"]);
    assert!(run_in(b.path(), &with_threads).status.success());
    assert_eq!(listing(a.path()), ["r0", "r1", "r2"]);
    for r in ["r0", "r1", "r2"] {
        let names = listing(&a.path().join(r));
        assert_eq!(names.len(), 4 + 4 + 1 + 1);
        for name in names {
            let x = fs::read(a.path().join(r).join(&name)).unwrap();
            let y = fs::read(b.path().join(r).join(&name)).unwrap();
            assert_eq!(x, y, "{r}/{name}");
        }
    }
    let r0 = fs::read(a.path().join("r0/feuilletage.edges")).unwrap();
    let r1 = fs::read(a.path().join("r1/feuilletage.edges")).unwrap();
    assert_ne!(r0, r1);
}

#[test]
fn sample_outputs_decode() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), &["sample", "--n", "40", "--depth", "3", "--seed", "1", "--svg", "--ncp"]);
    assert!(o.status.success());
    let ncp = NestedNcp::from_text(&fs::read_to_string(tmp.path().join("nested.ncp")).unwrap()).unwrap();
    assert_eq!((ncp.corner_count, ncp.depth()), (320, 3));
    validate_nested_ncp(&ncp).unwrap();
    let svg = fs::read_to_string(tmp.path().join("layer_2.svg")).unwrap();
    assert!(svg.starts_with("<!-- feuilletage sample n=40 depth=3 seed=1"));
    assert!(svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn depth_one_exports_the_tree() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_in(tmp.path(), &["sample", "--n", "250", "--depth", "1"]).status.success());
    let edges = fs::read(tmp.path().join("feuilletage.edges")).unwrap();
    let (nv, e) = read_edge_list(edges.as_slice()).unwrap();
    assert_eq!((nv, e.len()), (251, 250));
}

#[test]
fn simplified_edges_have_no_loops_or_repeats() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_in(tmp.path(), &["sample", "--n", "300", "--depth", "3", "--simplify-edges"]).status.success());
    let text = fs::read_to_string(tmp.path().join("feuilletage.edges")).unwrap();
    assert!(text.lines().next().unwrap().ends_with("simplify-edges replicate=0"));
    let (_, e) = read_edge_list(text.as_bytes()).unwrap();
    assert!(e.iter().all(|(u, v)| u < v));
    assert!(e.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn verify_passes_at_four() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--max-n", "4", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().last(), Some("PASS"));
    assert!(out.lines().all(|l| l.starts_with("PASS")));
    assert!(out.contains("cvs n=4 count=2268 expected=2268"));
    let witnesses = fs::read_to_string(tmp.path().join("witnesses.csv")).unwrap();
    assert_eq!(witnesses.lines().count(), 2);
}

#[test]
fn verify_guard_is_a_usage_error() {
    for n in ["99", "0", "6"] {
        let o = run(&["verify", "--max-n", n]);
        assert_eq!(o.status.code(), Some(2), "max-n {n}");
    }
}

#[test]
fn corrupted_table_fails_verification() {
    let o = run(&["verify", "--max-n", "2", "--corrupt-table"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert_eq!(out.lines().last(), Some("FAIL"));
    assert!(out.lines().any(|l| l.starts_with("FAIL cvs n=2")));
}

#[test]
fn bad_arguments_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["sample", "--depth", "2"],
        vec!["sample", "--n", "0", "--depth", "2"],
        vec!["sample", "--n", "10", "--depth", "0"],
        vec!["sample", "--n", "10", "--depth", "2", "--threads", "0"],
        vec!["sample", "--n", "1099511627776", "--depth", "2"],
        vec!["stats", "--n", "10", "--depth", "2", "--fit-grid", "3:2"],
        vec!["frobnicate"],
    ] {
        let o = run_in(tmp.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn stats_writes_summaries_and_plots() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), &["stats", "--n", "65536", "--depth", "2", "--replicates", "200", "--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names = listing(tmp.path());
    assert_eq!(names, ["balls.csv", "balls.svg", "profile.csv", "profile.svg", "summary.csv"]);
    let summary = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("# feuilletage stats n=65536 depth=2 seed=1 replicates=200"));
    let mass: f64 = lines
        .next()
        .unwrap()
        .split_whitespace()
        .find_map(|t| t.strip_prefix("mass="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mass - 65538.0 / 65536.0).abs() < 1e-9);
    assert_eq!(lines.next(), Some("x,mean,stderr"));
    let balls = fs::read_to_string(tmp.path().join("balls.csv")).unwrap();
    assert_eq!(balls.lines().nth(1), Some("r,N_r,ratio"));
    let profile = fs::read_to_string(tmp.path().join("profile.csv")).unwrap();
    assert_eq!(profile.lines().nth(1), Some("r,count"));
    let svg = fs::read_to_string(tmp.path().join("profile.svg")).unwrap();
    assert!(svg.starts_with("<!-- feuilletage stats n=65536"));
    assert!(stdout(&o).contains("mass=1.0000305"));
}

#[test]
fn stats_fit_grid_reports_an_exponent() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(
        tmp.path(),
        &["stats", "--n", "1024", "--depth", "2", "--replicates", "40", "--fit-grid", "8:12", "--no-svg", "--width", "300"],
    );
    assert!(o.status.success());
    let names = listing(tmp.path());
    assert_eq!(names, ["balls.csv", "profile.csv", "scaling.csv", "summary.csv"]);
    let scaling = fs::read_to_string(tmp.path().join("scaling.csv")).unwrap();
    assert!(scaling.starts_with("# feuilletage stats n=1024 depth=2 seed=0 replicates=40 fit-grid=8:12\n"));
    assert_eq!(scaling.lines().count(), 3 + 5);
    let exponent: f64 = stdout(&o)
        .split_whitespace()
        .find_map(|t| t.strip_prefix("exponent="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.1..0.4).contains(&exponent), "{exponent}");
}
