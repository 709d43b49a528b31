use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use remshare::optim::{random_problem, write_problem, Goal};

const SMALL: &[&str] = &[
    "--override",
    "campaign.iterations=2",
    "--override",
    "campaign.horizon_ms=40",
    "--override",
    "campaign.threads=2",
];

fn remshare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_remshare")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, cmd: &str, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--out", dir.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    remshare(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a CSV written with a leading comment and a header.
fn data_rows(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "), "{}", path.display());
    lines.skip(1).map(str::to_owned).collect()
}

#[test]
fn run_writes_outputs_that_echo_the_seed_and_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "run", &["--override", "campaign.seed=77", "--override", "scheme.name=\"cbrs\""]);
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 77);
    assert_eq!(json["summary"]["seed"], 77);
    assert_eq!(json["config"]["scheme"]["name"], "cbrs");
    assert_eq!(json["summary"]["scheme"], "cbrs");
    let hash = json["config_hash"].as_str().unwrap();
    for name in ["ues.csv", "cdf_outdoor.csv", "cdf_indoor.csv"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().next().unwrap(), format!("# config_hash={hash} seed=77"));
    }
    assert!(!data_rows(&dir.path().join("ues.csv")).is_empty());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run_in(d.path(), "run", &[]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["summary.json", "ues.csv", "cdf_outdoor.csv", "cdf_indoor.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn malformed_config_exits_2_with_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[campaign]\niterations = = 3\n").unwrap();
    let o = remshare(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let missing = dir.path().join("nope.toml");
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--config", missing.to_str().unwrap(), "--out", out],
        vec!["run", "--out", out, "--override", "campaign.no_such_key=1"],
        vec!["run", "--out", out, "--override", "campaign.iterations=0"],
        vec!["run", "--out", out, "--override", "scheme.name=\"nonsense\""],
        vec!["compare", "--out", out, "--schemes", "dynamic,nonsense"],
        vec!["frobnicate"],
    ];
    for args in cases {
        assert_eq!(remshare(&args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(remshare(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_needs_a_semi_static_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "sweep", &["--gammas", "-10"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!dir.path().join("sweep.csv").exists());
}

#[test]
fn single_gamma_sweep_has_baseline_and_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "sweep", &["--override", "scheme.name=\"semi_static\"", "--gammas", "-10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 2, "{rows:?}");
}

#[test]
fn duplicate_schemes_in_compare_give_identical_cdfs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "compare", &["--schemes", "off,dynamic"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let twice = tempfile::tempdir().unwrap();
    let o = run_in(twice.path(), "compare", &["--schemes", "dynamic,dynamic"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for net in ["outdoor", "indoor"] {
        let name = format!("cdf_dynamic_{net}.csv");
        assert_eq!(fs::read(dir.path().join(&name)).unwrap(), fs::read(twice.path().join(&name)).unwrap());
    }
    // off has no indoor UEs to report
    assert!(data_rows(&dir.path().join("cdf_off_indoor.csv")).is_empty());
    assert_eq!(data_rows(&dir.path().join("comparison.csv")).len(), 4);
}

#[test]
fn moving_writes_one_row_per_window() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        "moving",
        &[
            "--override",
            "moving.duration_ms=1000",
            "--override",
            "moving.iterations=1",
            "--override",
            "scheme.name=\"modified_lsa\"",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("moving.csv"));
    assert_eq!(rows.len(), 5);
}

#[test]
fn oracle_agrees_on_random_and_dumped_problems() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = remshare(&["oracle", "--instances", "10", "--seed", "3", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&dir.path().join("oracle.csv")).len(), 30);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let path = dir.path().join("problem.txt");
    write_problem(&random_problem(&mut rng, Goal::MaxMin), fs::File::create(&path).unwrap()).unwrap();
    let o = remshare(&["oracle", "--problem", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    fs::write(&path, "not a problem\n").unwrap();
    assert_eq!(remshare(&["oracle", "--problem", path.to_str().unwrap()]).status.code(), Some(2));
}
