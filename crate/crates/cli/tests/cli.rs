use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_wlra");
const HEADER: &str = "dataset,solver,rank,trial,seed,loss,seconds,iterations,params";

fn wlra(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(HEADER));
    lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_files_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = (dir.path().join("x"), dir.path().join("y"));
    for out in [&x, &y] {
        let o = wlra(&[
            "generate",
            "--mog",
            "n=40",
            "d=10",
            "k=3",
            "r=2",
            "seed=1",
            &format!("out={}", path(out)),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for file in ["A.csv", "W.csv", "labels.csv", "instance.json"] {
        assert_eq!(
            fs::read(x.join(file)).unwrap(),
            fs::read(y.join(file)).unwrap(),
            "{file}"
        );
    }
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(x.join("instance.json")).unwrap()).unwrap();
    assert_eq!(sidecar["kind"], "mog");
    assert_eq!(sidecar["spec"]["n"], 40);
    assert_eq!(sidecar["generator"], "chacha8/seed_from_u64");

    let o = wlra(&[
        "generate",
        "--planted",
        "n=30",
        "d=20",
        "k=3",
        "r=2",
        "noise=0",
        "seed=7",
        "--format",
        "bin",
        "--out",
        path(&y),
    ]);
    assert!(o.status.success());
    assert!(y.join("A_true.bin").exists() && y.join("W.bin").exists());
}

#[test]
fn run_row_count_and_zero_opt() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("planted");
    let o = wlra(&[
        "generate",
        "--planted",
        "n=30",
        "d=20",
        "k=3",
        "r=2",
        "noise=0",
        "seed=7",
        "--out",
        path(&data),
    ]);
    assert!(o.status.success());
    let out = dir.path().join("results.csv");
    let o = wlra(&[
        "run",
        "--data",
        path(&data),
        "--solvers",
        "svd_w,svd,em",
        "--ranks",
        "1..4",
        "--trials",
        "2",
        "--weight-rank",
        "2",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 3 * 4 * 2);
    let mut keys: Vec<(String, usize, usize)> = rows
        .iter()
        .map(|r| (r[1].clone(), r[2].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    let sorted = {
        let mut k = keys.clone();
        k.sort();
        k
    };
    assert_eq!(keys, sorted);
    keys.dedup();
    assert_eq!(keys.len(), 24);
    for r in rows.iter().filter(|r| r[1] == "svd_w" && r[2] == "3") {
        assert!(r[5].parse::<f64>().unwrap() <= 1e-12, "{r:?}");
    }
}

#[test]
fn losses_are_deterministic_across_worker_counts() {
    let run = |jobs: &str| {
        let o = wlra(&[
            "run",
            "--planted",
            "n=25",
            "d=15",
            "k=2",
            "r=2",
            "noise=0.1",
            "seed=3",
            "--solvers",
            "svd_w,sample,adam,css,svd_w_randomized",
            "--ranks",
            "1,2",
            "--trials",
            "3",
            "--epochs",
            "10",
            "--jobs",
            jobs,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        rows(&stdout(&o))
            .into_iter()
            .map(|mut r| {
                r.remove(6);
                r
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn instance_trials_vary_the_instance() {
    let o = wlra(&[
        "run",
        "--mog",
        "n=60",
        "d=12",
        "k=2",
        "r=2",
        "seed=10",
        "--solvers",
        "svd",
        "--ranks",
        "2",
        "--trials",
        "3",
        "--instance-trials",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&stdout(&o));
    let seeds: Vec<&str> = rows.iter().map(|r| r[4].as_str()).collect();
    assert_eq!(seeds, ["10", "11", "12"]);
    assert_ne!(rows[0][5], rows[1][5]);
}

#[test]
fn mixture_ordering_through_the_cli() {
    let o = wlra(&[
        "run",
        "--mog",
        "n=1000",
        "d=50",
        "k=5",
        "r=3",
        "seed=0",
        "--solvers",
        "svd_w,svd",
        "--ranks",
        "1..20",
        "--trials",
        "5",
        "--instance-trials",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut means: BTreeMap<(String, usize), f64> = BTreeMap::new();
    for r in rows(&stdout(&o)) {
        *means
            .entry((r[1].clone(), r[2].parse().unwrap()))
            .or_default() += r[5].parse::<f64>().unwrap() / 5.0;
    }
    for rank in 1..=20 {
        assert!(
            means[&("svd_w".into(), rank)] < means[&("svd".into(), rank)],
            "rank {rank}"
        );
    }
}

#[test]
fn report_matches_independent_means() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = wlra(&[
        "run",
        "--mog",
        "n=80",
        "d=12",
        "k=2",
        "r=2",
        "seed=4",
        "--solvers",
        "svd_w,em,greedy",
        "--ranks",
        "1,2,3",
        "--trials",
        "3",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success());
    let mut expect: BTreeMap<(String, usize), (f64, f64)> = BTreeMap::new();
    for r in rows(&fs::read_to_string(&out).unwrap()) {
        let e = expect
            .entry((r[1].clone(), r[2].parse().unwrap()))
            .or_default();
        e.0 += r[5].parse::<f64>().unwrap() / 3.0;
        e.1 += r[6].parse::<f64>().unwrap() / 3.0;
    }
    let summary = dir.path().join("s.csv");
    let o = wlra(&[
        "report",
        path(&out),
        "--ranks",
        "1,3",
        "--csv",
        path(&summary),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().next().unwrap().contains("mean_loss"));
    let text = fs::read_to_string(&summary).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("dataset,solver,rank,trials,mean_loss,mean_seconds")
    );
    let mut seen = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let rank: usize = f[2].parse().unwrap();
        assert!(rank == 1 || rank == 3);
        let (loss, secs) = expect[&(f[1].to_string(), rank)];
        assert!((f[4].parse::<f64>().unwrap() - loss).abs() <= 1e-12 * loss.abs());
        assert!((f[5].parse::<f64>().unwrap() - secs).abs() <= 1e-9);
        seen += 1;
    }
    assert_eq!(seen, 6);
}

#[test]
fn report_rejects_malformed_csv_with_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(
        &bad,
        format!("{HEADER}\nd,svd,1,0,0,1.0,0.1,1,4\nd,svd,1,0,0,oops,0.1,1,4\n"),
    )
    .unwrap();
    let o = wlra(&["report", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 3"), "{}", stderr(&o));
    fs::write(&bad, "dataset,solver,rank\n").unwrap();
    let o = wlra(&["report", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("header"));
}

#[test]
fn usage_errors_exit_one() {
    let o = wlra(&[
        "run",
        "--mog",
        "n=50",
        "d=10",
        "k=2",
        "r=2",
        "--solvers",
        "svd,nope",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("svd_w_then_em"));
    assert_eq!(
        wlra(&["generate", "--mog", "n=5", "bogus=1", "d=3", "k=1", "r=1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        wlra(&["run", "--mog", "n=50", "d=10", "k=2", "r=2", "--ranks", "3,2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        wlra(&["comm-demo", "--n", "10", "--r", "3"]).status.code(),
        Some(1)
    );
    assert_eq!(wlra(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn missing_data_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wlra(&["run", "--data", path(&dir.path().join("absent"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent"));
}

#[test]
fn comm_demo_reports_recovery_and_bits() {
    let o = wlra(&["comm-demo", "--n", "12", "--r", "3", "--s", "2", "--k", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(
        text.contains("svd_w: loss") && text.contains("recovery success"),
        "{text}"
    );
    assert!(text.contains("s*r*k = 12"));
    assert!(text.contains("plain svd: recovery fails at seed"), "{text}");
}

#[test]
fn gnuplot_script_written() {
    let dir = tempfile::tempdir().unwrap();
    let gp = dir.path().join("plot.gp");
    let o = wlra(&[
        "run",
        "--planted",
        "n=20",
        "d=10",
        "k=2",
        "--solvers",
        "svd,svd_w",
        "--ranks",
        "1,2",
        "--trials",
        "1",
        "--gnuplot",
        path(&gp),
    ]);
    assert!(o.status.success());
    let script = fs::read_to_string(gp).unwrap();
    assert!(script.starts_with("set logscale y") && script.contains("title \"svd_w\""));
}
