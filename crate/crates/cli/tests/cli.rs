use std::path::Path;
use std::process::{Command, Output};

use ptfsense::hypercube::{average_sensitivity_exact, TruthTable};
use ptfsense::poly::parse_ptf;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptfsense")).args(args).current_dir(dir).output().expect("spawn ptfsense")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn gen_then_as_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let g = run(&["gen", "--n", "8", "--d", "2", "--dist", "unit-gaussian", "--seed", "1", "-o", "a.ptf"], dir.path());
    assert!(g.status.success(), "{}", stderr(&g));
    let o = run(&["as", "a.ptf"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "n,d,delta,value,half_width,samples,seed,method");
    let value: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    let f = parse_ptf::<f64>(&std::fs::read_to_string(dir.path().join("a.ptf")).unwrap()).unwrap();
    assert_eq!(value, average_sensitivity_exact(&TruthTable::from_ptf(&f).unwrap()));
}

#[test]
fn verify_suite_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["verify", "--suite", "combas", "--seed", "1", "--out", "r.csv"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("suite,instance,lhs,rhs,achieved_constant,passed,seed\n"));
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));

    let failing = run(&["verify", "--suite", "realizable", "--trials", "2"], dir.path());
    assert_eq!(failing.status.code(), Some(2));
    let unknown = run(&["verify", "--suite", "nope"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn file_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["ns", "missing.ptf", "--delta", "0.1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.ptf"));

    std::fs::write(dir.path().join("bad.ptf"), "PTF v1\nn=2 theta=0\n1.0 : 0 5\n").unwrap();
    let o = run(&["as", "bad.ptf"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["as", "--bogus", "x.ptf"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn empty_sweep_grid_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--n", "3", "--dist", "majority", "-o", "m.ptf"], dir.path());
    let o = run(&["sweep", "ns", "m.ptf", "--grid"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty grid"));
}

#[test]
fn dictator_gns_sweep_tracks_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--n", "1", "--dist", "dictator", "-o", "d.ptf"], dir.path());
    let o = run(
        &["sweep", "gns", "d.ptf", "--grid", "0.01,0.1,0.5", "--samples", "200000", "--svg", "d.svg"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("delta,gns,gns_halfwidth,qnorm_closed,qnorm_mc,slope_window\n"));
    for line in out.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').take(3).map(|c| c.parse().unwrap()).collect();
        let exact = (1.0 - cols[0]).acos() / std::f64::consts::PI;
        assert!((cols[1] - exact).abs() <= cols[2], "{line}");
    }
    let svg = std::fs::read_to_string(dir.path().join("d.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("stroke-dasharray"));
}

#[test]
fn output_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--n", "24", "--d", "2", "--seed", "4", "-o", "p.ptf"], dir.path());
    let args = |w: &'static str| {
        vec!["--workers", w, "ns", "p.ptf", "--delta", "0.05,0.2", "--method", "mc", "--samples", "30000", "--seed", "9"]
    };
    let one = run(&args("1"), dir.path());
    let eight = run(&args("8"), dir.path());
    assert!(one.status.success());
    assert_eq!(one.stdout, eight.stdout);
    let v1 = run(&["--workers", "1", "verify", "--suite", "gns", "--samples", "20000"], dir.path());
    let v8 = run(&["--workers", "8", "verify", "--suite", "gns", "--samples", "20000"], dir.path());
    assert_eq!(v1.stdout, v8.stdout);
}

#[test]
fn exact_limit_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--n", "8", "--d", "2", "-o", "p.ptf"], dir.path());
    let exe = env!("CARGO_BIN_EXE_ptfsense");
    let exact = Command::new(exe)
        .args(["as", "p.ptf", "--method", "exact"])
        .env("PTFSENSE_EXACT_LIMIT", "4")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(exact.status.code(), Some(1));
    let auto = Command::new(exe)
        .args(["as", "p.ptf", "--samples", "1000"])
        .env("PTFSENSE_EXACT_LIMIT", "4")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(stdout(&auto).trim_end().ends_with(",mc"));
    let bad = Command::new(exe).args(["as", "p.ptf"]).env("PTFSENSE_EXACT_LIMIT", "x").current_dir(dir.path()).output();
    assert_eq!(bad.unwrap().status.code(), Some(1));
}

#[test]
fn learn_emits_one_row() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--n", "6", "--d", "2", "-o", "t.ptf"], dir.path());
    let o = run(
        &["learn", "--target", "t.ptf", "--noise", "0.05", "--samples", "4000", "--degree", "2", "--seed", "3"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "error,opt,excess,D,m,seed");
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&cols[1..], ["0.05", cols[2], "2", "4000", "3"]);
    let error: f64 = cols[0].parse().unwrap();
    let excess: f64 = cols[2].parse().unwrap();
    assert!((error - 0.05 - excess).abs() < 1e-12);
}

#[test]
fn restrict_and_structure_commands() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--n", "5", "--dist", "majority", "-o", "m.ptf"], dir.path());
    let r = run(&["restrict", "m.ptf", "--assign", "0=+1,1=-1", "-o", "r.ptf"], dir.path());
    assert!(r.status.success(), "{}", stderr(&r));
    let restricted = parse_ptf::<f64>(&std::fs::read_to_string(dir.path().join("r.ptf")).unwrap()).unwrap();
    assert_eq!(restricted.poly.support(), vec![2, 3, 4]);

    let ci = stdout(&run(&["critical-index", "m.ptf", "--epsilon", "0.9"], dir.path()));
    assert_eq!(ci, "epsilon,critical_index,n\n0.9,0,5\n");
    let reg = stdout(&run(&["regular", "m.ptf", "--epsilon", "0.5,0.4"], dir.path()));
    assert!(reg.contains("0.5,true,") && reg.contains("0.4,false,"));
    let w = stdout(&run(&["weights", "m.ptf"], dir.path()));
    assert_eq!(w.lines().count(), 6);
    let f = stdout(&run(&["fourier", "m.ptf", "--tol", "0.3"], dir.path()));
    // Five level-1 coefficients and the top one, all 3/8.
    assert_eq!(f.lines().count(), 7);
    assert!(f.contains("x0*x1*x2*x3*x4,0.375"));
    let e = stdout(&run(&["eval", "m.ptf", "--point", "1,1,-1,-1,-1"], dir.path()));
    assert_eq!(e, "value,sign\n-1,-1\n");
    let d = run(&["decompose", "m.ptf", "--epsilon", "0.5", "--tree", "t.txt"], dir.path());
    assert_eq!(stdout(&d), "epsilon,depth,regular_mass,determined_mass,capped_mass\n0.5,0,1,0,0\n");
    assert!(std::fs::read_to_string(dir.path().join("t.txt")).unwrap().starts_with("- regular"));
}
