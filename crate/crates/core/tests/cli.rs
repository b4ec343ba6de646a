use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn crnwd(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_crnwd"))
        .args(args)
        .current_dir(dir)
        .env("CRNWD_THREADS", "2")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let (code, out, err) = crnwd(dir, args);
    assert_eq!(code, 0, "{args:?}\n{out}\n{err}");
    out
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

fn same_tree(a: &Path, b: &Path) {
    let mut names: Vec<_> = fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mut other: Vec<_> = fs::read_dir(b)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    other.sort();
    assert_eq!(names, other);
    for n in names {
        assert_eq!(
            fs::read(a.join(&n)).unwrap(),
            fs::read(b.join(&n)).unwrap(),
            "{n:?} differs"
        );
    }
}

#[test]
fn build_mwt_has_fourteen_reactions() {
    let t = TempDir::new().unwrap();
    ok(
        t.path(),
        &[
            "build", "mwt", "--kd", "3", "--kt", "4", "--pl", "50", "--pt", "50", "--u", "10",
            "--r", "5", "--out", "m",
        ],
    );
    let model = read(t.path().join("m/model.crn"));
    assert_eq!(model.lines().filter(|l| l.contains("->")).count(), 14);
}

#[test]
fn build_oscillator_initial_state() {
    let t = TempDir::new().unwrap();
    ok(
        t.path(),
        &[
            "build",
            "oscillator",
            "--total",
            "1000",
            "--split",
            "80,10,10",
            "--out",
            "o",
        ],
    );
    assert_eq!(
        read(t.path().join("o/init.txt")),
        "A = 800\nB = 100\nC = 100\nH = 0\n"
    );
}

#[test]
fn build_composed_demo_shares_h_and_d() {
    let t = TempDir::new().unwrap();
    ok(
        t.path(),
        &["build", "composed-demo", "--total", "300", "--out", "c"],
    );
    let model = read(t.path().join("c/model.crn"));
    let init = read(t.path().join("c/init.txt"));
    for sp in ["A", "B", "C", "H", "D", "Y", "U", "R"] {
        assert!(
            init.lines().any(|l| l.starts_with(&format!("{sp} ="))),
            "{sp} missing"
        );
    }
    assert_eq!(init.lines().filter(|l| l.starts_with("H =")).count(), 1);
    assert!(
        model.contains("D + C"),
        "recovery is not catalyzed by D:\n{model}"
    );
}

#[test]
fn unknown_kind_is_config_error() {
    let t = TempDir::new().unwrap();
    assert_eq!(crnwd(t.path(), &["build", "teapot", "--out", "x"]).0, 3);
    assert_eq!(
        crnwd(t.path(), &["build", "mwt", "--kd", "0", "--out", "x"]).0,
        3
    );
}

#[test]
fn simulate_grid_rows_and_manifest_rerun() {
    let t = TempDir::new().unwrap();
    ok(
        t.path(),
        &[
            "simulate", "--kind", "mwt", "--t-end", "10", "--grid", "1.0", "--runs", "3", "--seed",
            "5", "--out", "a",
        ],
    );
    let csv = read(t.path().join("a/run_0.csv"));
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.starts_with("time,L0,L1,L2,Y,T0,"));
    assert_eq!(csv.lines().nth(11).unwrap().split(',').next(), Some("10"));
    let manifest = read(t.path().join("a/manifest.txt"));
    assert!(manifest.contains("command = simulate"));
    assert!(manifest.contains("run_2 = "));
    ok(
        t.path(),
        &["simulate", "--config", "a/manifest.txt", "--out", "b"],
    );
    same_tree(&t.path().join("a"), &t.path().join("b"));
}

#[test]
fn cli_flags_override_config() {
    let t = TempDir::new().unwrap();
    fs::write(
        t.path().join("cfg.txt"),
        "seed = 3\n[model]\nkind = unary-ladder\n[sim]\nt_end = 4\ngrid = 2\n",
    )
    .unwrap();
    ok(
        t.path(),
        &[
            "simulate", "--config", "cfg.txt", "--t-end", "6", "--out", "o",
        ],
    );
    assert_eq!(read(t.path().join("o/run_0.csv")).lines().count(), 5);
    assert!(read(t.path().join("o/manifest.txt")).contains("t_end = 6"));
}

#[test]
fn heartbeat_stops_once_a_or_b_dies_out() {
    let t = TempDir::new().unwrap();
    ok(
        t.path(),
        &[
            "simulate",
            "--kind",
            "oscillator",
            "--total",
            "30",
            "--t-end",
            "30",
            "--grid",
            "0.25",
            "--runs",
            "20",
            "--out",
            "o",
        ],
    );
    let mut extinct_runs = 0;
    for i in 0..20 {
        let csv = read(t.path().join(format!("o/run_{i}.csv")));
        let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        let col = |n: &str| header.iter().position(|h| *h == n).unwrap();
        let (ia, ib, ih) = (col("A"), col("B"), col("H"));
        let mut dead = false;
        let mut last_h = i64::MAX;
        for row in csv.lines().skip(1) {
            let v: Vec<i64> = row.split(',').map(|x| x.parse().unwrap_or(0)).collect();
            let (a, b, h) = (v[ia], v[ib], v[ih]);
            if dead {
                assert!(h <= last_h, "run {i}: H rose after extinction");
            }
            // with A or B gone the heartbeat reaction can never fire again
            if (a == 0 || b == 0) && !dead {
                dead = true;
                extinct_runs += 1;
            }
            last_h = h;
        }
    }
    assert!(extinct_runs > 0);
}

#[test]
fn parse_normalizes_and_rejects() {
    let t = TempDir::new().unwrap();
    fs::write(
        t.path().join("m.crn"),
        "X1 -> X2\nH ->{0.1} 0\ninit X1 = 3\n",
    )
    .unwrap();
    let out = ok(t.path(), &["parse", "m.crn"]);
    assert!(out.contains("X1 ->{1} X2"));
    assert!(out.contains("H ->{0.1} 0"));
    assert_eq!(crnwd(t.path(), &["parse", "m.crn", "--strict"]).0, 3);
    fs::write(t.path().join("bad.crn"), "A ->{0} B\n").unwrap();
    let (code, _, err) = crnwd(t.path(), &["parse", "bad.crn"]);
    assert_eq!(code, 3);
    assert!(err.contains("bad.crn"));
}

#[test]
fn check_exit_codes() {
    let t = TempDir::new().unwrap();
    let base = [
        "check", "--kind", "mwt", "--kd", "2", "--pl", "3", "--kt", "2", "--pt", "3", "--caps", "5",
    ];
    fs::write(t.path().join("hold.txt"), "P>=0.5 [ F<=10 Alarm ]\n").unwrap();
    fs::write(
        t.path().join("fail.txt"),
        "P>=0.5 [ F<=10 Alarm ]\nP>=0.99 [ G<=5 !Alarm ]\n",
    )
    .unwrap();
    let run = |file: &str| crnwd(t.path(), &[&base[..], &["--formulas", file]].concat()).0;
    assert_eq!(run("hold.txt"), 0);
    assert_eq!(run("fail.txt"), 1);
    assert_eq!(run("missing.txt"), 3);
    let exact = crnwd(
        t.path(),
        &["check", "--kind", "mwt", "--formulas", "hold.txt"],
    )
    .0;
    assert_eq!(exact, 3, "exact mode without caps");
}

#[test]
fn statistical_undecided_exit_code() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("f.txt"), "P>=0.5 [ F<=1 X1 >= 1 ]\n").unwrap();
    // exact value 1 - e^{-1} ~ 0.632 for a ladder with u = 1 starting at X0
    let exact = ok(
        t.path(),
        &[
            "check",
            "--kind",
            "unary-ladder",
            "--k",
            "1",
            "--caps",
            "1",
            "--formulas",
            "f.txt",
        ],
    );
    assert!(exact.contains("0.632"), "{exact}");
    let (code, out, _) = crnwd(
        t.path(),
        &[
            "check",
            "--kind",
            "unary-ladder",
            "--k",
            "1",
            "--mode",
            "statistical",
            "--runs",
            "10",
            "--formulas",
            "f.txt",
            "--seed",
            "1",
        ],
    );
    assert_eq!(code, 2, "{out}");
}

#[test]
fn leaf_goals_report_nine_verdicts() {
    let t = TempDir::new().unwrap();
    let model = [
        "--kind", "mwt", "--kd", "2", "--pl", "3", "--kt", "2", "--pt", "3",
    ];
    let client = [
        "--client-u",
        "2",
        "--client-v",
        "6",
        "--eps",
        "0.3",
        "--delta",
        "0.3",
    ];
    let exact = [
        &["check"][..],
        &model,
        &client,
        &["--goals", "mwt-leaves", "--caps", "5", "--out", "e"],
    ]
    .concat();
    let code = crnwd(t.path(), &exact).0;
    assert!(code == 0 || code == 1);
    let csv = read(t.path().join("e/report.csv"));
    assert_eq!(csv.lines().count(), 10, "{csv}");
    assert!(csv.lines().skip(1).all(|l| l.contains(",exact,")));
}

#[test]
fn params_synth_then_check() {
    let t = TempDir::new().unwrap();
    ok(
        t.path(),
        &[
            "params", "synth", "--u", "10", "--v", "20", "--eps", "0.05", "--delta", "0.05",
            "--out", "p",
        ],
    );
    let text = read(t.path().join("p/params.txt"));
    assert!(text.contains("w_h = "));
    let out = ok(
        t.path(),
        &[
            "params",
            "check",
            "--params",
            "p/params.txt",
            "--u",
            "10",
            "--v",
            "20",
            "--eps",
            "0.05",
            "--delta",
            "0.05",
        ],
    );
    assert!(out.contains("satisfied"));
    let broken = text.replace("w_on = 2.0", "w_on = 9.0");
    fs::write(t.path().join("broken.txt"), broken).unwrap();
    let (code, out, _) = crnwd(
        t.path(),
        &[
            "params",
            "check",
            "--params",
            "broken.txt",
            "--u",
            "10",
            "--v",
            "20",
            "--eps",
            "0.05",
            "--delta",
            "0.05",
        ],
    );
    assert_eq!(code, 1);
    assert!(out.contains("constr7"), "{out}");
    assert_eq!(crnwd(t.path(), &["params", "synth", "--u", "10"]).0, 3);
    assert_eq!(crnwd(t.path(), &["params", "explode"]).0, 3);
}

#[test]
fn demo_recovery_outputs() {
    let t = TempDir::new().unwrap();
    let out = ok(
        t.path(),
        &[
            "demo-recovery",
            "--total",
            "300",
            "--runs",
            "10",
            "--inject-zero",
            "B",
            "--at-time",
            "20",
            "--out",
            "d",
        ],
    );
    assert!(out.contains("recovery_fraction"));
    let csv = read(t.path().join("d/summary.csv"));
    assert_eq!(csv.lines().count(), 11);
    assert!(read(t.path().join("d/run_0.csv")).starts_with("time,"));
    ok(
        t.path(),
        &["demo-recovery", "--config", "d/manifest.txt", "--out", "d2"],
    );
    same_tree(&t.path().join("d"), &t.path().join("d2"));
    assert_eq!(
        crnwd(t.path(), &["demo-recovery", "--total", "2", "--out", "x"]).0,
        3
    );
    assert_eq!(
        crnwd(
            t.path(),
            &["demo-recovery", "--inject-zero", "B", "--out", "x"]
        )
        .0,
        3
    );
}

#[test]
fn sweep_first_passage_nondecreasing() {
    let t = TempDir::new().unwrap();
    ok(
        t.path(),
        &[
            "sweep",
            "--kind",
            "unary-ladder",
            "--axis",
            "kd=2:8:1",
            "--metric",
            "first-passage",
            "--out",
            "s",
        ],
    );
    let csv = read(t.path().join("s/sweep.csv"));
    let vals: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 7);
    assert!((vals[0] - 3.0).abs() < 1e-9);
    assert!(vals.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn sweep_guards() {
    let t = TempDir::new().unwrap();
    assert_eq!(
        crnwd(
            t.path(),
            &[
                "sweep",
                "--kind",
                "unary-ladder",
                "--axis",
                "k=5:1:1",
                "--out",
                "s"
            ]
        )
        .0,
        3
    );
    assert_eq!(
        crnwd(t.path(), &["sweep", "--kind", "unary-ladder", "--out", "s"]).0,
        3
    );
    assert_eq!(
        crnwd(
            t.path(),
            &[
                "sweep",
                "--kind",
                "unary-ladder",
                "--axis",
                "bogus=1:2:1",
                "--out",
                "s"
            ]
        )
        .0,
        3
    );
    let big = [
        "sweep",
        "--kind",
        "unary-ladder",
        "--axis",
        "k=1:101:1",
        "--axis",
        "u=1:100:1",
        "--out",
        "s",
    ];
    assert_eq!(crnwd(t.path(), &big).0, 3);
}

#[test]
fn sweep_single_point_matches_check() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("f.txt"), "P>=0.5 [ F<=3 Alarm ]\n").unwrap();
    let model = [
        "--kind",
        "mwt",
        "--kd",
        "2",
        "--pl",
        "3",
        "--kt",
        "2",
        "--pt",
        "3",
        "--caps",
        "5",
        "--formulas",
        "f.txt",
    ];
    ok(
        t.path(),
        &[
            &["sweep"][..],
            &model,
            &["--axis", "u=1", "--metric", "probability", "--out", "s"],
        ]
        .concat(),
    );
    let csv = read(t.path().join("s/sweep.csv"));
    let p: f64 = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    crnwd(
        t.path(),
        &[&["check"][..], &model, &["--u", "1", "--out", "c"]].concat(),
    );
    let report = read(t.path().join("c/report.csv"));
    let q: f64 = report
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((p - q).abs() < 1e-6, "{p} vs {q}");
}

#[test]
fn sweep_is_reproducible() {
    let t = TempDir::new().unwrap();
    let args = [
        "sweep",
        "--kind",
        "mwt",
        "--kd",
        "2",
        "--pl",
        "3",
        "--kt",
        "2",
        "--pt",
        "3",
        "--metric",
        "detection-delay",
        "--axis",
        "u=1,2",
        "--runs",
        "30",
        "--seed",
        "4",
        "--out",
        "a",
    ];
    ok(t.path(), &args);
    ok(
        t.path(),
        &["sweep", "--config", "a/manifest.txt", "--out", "b"],
    );
    same_tree(&t.path().join("a"), &t.path().join("b"));
}

#[test]
fn statistical_intervals_contain_exact_values() {
    let t = TempDir::new().unwrap();
    fs::write(
        t.path().join("f.txt"),
        "P>=0.5 [ F<=3 Alarm ]\nP>=0.5 [ G<=2 !ThH ]\nP>=0.5 [ (!Alarm) W (ThH) ]\n",
    )
    .unwrap();
    let model = [
        "check",
        "--kind",
        "mwt",
        "--kd",
        "2",
        "--pl",
        "3",
        "--kt",
        "2",
        "--pt",
        "3",
        "--formulas",
        "f.txt",
    ];
    crnwd(
        t.path(),
        &[&model[..], &["--caps", "5", "--out", "e"]].concat(),
    );
    crnwd(
        t.path(),
        &[
            &model[..],
            &[
                "--mode",
                "statistical",
                "--runs",
                "4000",
                "--horizon",
                "50",
                "--out",
                "s",
            ],
        ]
        .concat(),
    );
    let rows = |dir: &str| -> Vec<Vec<String>> {
        read(t.path().join(dir).join("report.csv"))
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(String::from).collect())
            .collect()
    };
    for (e, s) in rows("e").iter().zip(rows("s")) {
        let p: f64 = e[3].parse().unwrap();
        let (lo, hi): (f64, f64) = (s[4].parse().unwrap(), s[5].parse().unwrap());
        assert!(lo <= p && p <= hi, "{}: {p} outside [{lo}, {hi}]", e[0]);
    }
}
