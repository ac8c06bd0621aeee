use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lnmix::draws::Draws;
use lnmix::rjmcmc::PriorConfig;

fn lnmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lnmix")).args(args).output().expect("spawn lnmix")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Small simulated dataset: returns the CSV path.
fn small_data(dir: &Path, seed: &str) -> PathBuf {
    let spec = dir.join("small.toml");
    fs::write(
        &spec,
        "n = 500\ngroups = 5\n[dgp]\nfamily = \"mixture\"\nweights = [0.4, 0.6]\nmus = [2.0, 3.0]\nsigma2s = [0.2, 0.1]\n",
    )
    .unwrap();
    let out = dir.join(format!("small-{seed}.csv"));
    let o = lnmix(&["simulate", "--spec", s(&spec), "--out", s(&out), "--seed", seed]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = configs().join("sim1.toml");
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    for (path, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let o = lnmix(&["simulate", "--spec", s(&spec), "--out", s(path), "--seed", seed]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(a.with_extension("raw.csv")).unwrap(), fs::read(b.with_extension("raw.csv")).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 11, "header plus ten groups");
}

#[test]
fn gb2_spec_gives_increasing_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim2.csv");
    let o = lnmix(&["simulate", "--spec", s(&configs().join("sim2.toml")), "--out", s(&out), "--no-raw"]);
    assert_eq!(code(&o), 0);
    assert!(!out.with_extension("raw.csv").exists());
    let data = lnmix::model::GroupedData::read_csv(fs::File::open(&out).unwrap()).unwrap();
    assert!(data.boundaries().windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn malformed_spec_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.toml");
    fs::write(&spec, "n = 100\ngroups = 5\n[dgp]\nfamily = \"mixture\"\nweights = [0.5, \n").unwrap();
    let out = dir.path().join("x.csv");
    let o = lnmix(&["simulate", "--spec", s(&spec), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert!(!out.exists());
}

#[test]
fn shipped_prior_file_is_the_default() {
    let text = fs::read_to_string(configs().join("prior.toml")).unwrap();
    let prior: PriorConfig = toml::from_str(&text).unwrap();
    assert_eq!(prior, PriorConfig::default());
}

#[test]
fn zero_iterations_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path(), "1");
    let out = dir.path().join("fit");
    let o = lnmix(&["fit", "--data", s(&data), "--iterations", "0", "--burn-in", "0", "--out", s(&out)]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn invalid_prior_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path(), "1");
    let prior = dir.path().join("prior.toml");
    fs::write(&prior, "lambda0 = -1.0\n").unwrap();
    let o = lnmix(&["fit", "--data", s(&data), "--prior", s(&prior), "--out", s(&dir.path().join("f"))]);
    assert_eq!(code(&o), 2);
    fs::write(&prior, "lambda_zero = 3.0\n").unwrap();
    let o = lnmix(&["fit", "--data", s(&data), "--prior", s(&prior), "--out", s(&dir.path().join("f"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_data_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = s(&dir.path().join("o")).to_string();
    for cmd in ["fit", "fit-gb2"] {
        let o = lnmix(&[cmd, "--data", s(&missing), "--out", &out]);
        assert_eq!(code(&o), 2, "{cmd}");
    }
}

#[test]
fn four_chains_get_distinct_reproducible_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path(), "2");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = lnmix(&[
            "fit", "--data", s(&data), "--iterations", "300", "--burn-in", "100", "--thin", "5", "--chains", "4", "--seed",
            "7", "--out", s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (1..=4).map(|i| Draws::read(&out.join(format!("chain-{i}.csv"))).unwrap()).collect::<Vec<_>>()
    };
    let first = run("a");
    let mut seeds: Vec<u64> = first.iter().map(|d| d.meta.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), 4);
    let second = run("b");
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a.meta.seed, b.meta.seed);
        assert_eq!(a.records, b.records);
    }
}

#[test]
fn report_writes_every_output_and_checks_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path(), "3");
    let fit = dir.path().join("fit");
    let o = lnmix(&[
        "fit", "--data", s(&data), "--iterations", "2000", "--burn-in", "500", "--thin", "5", "--chains", "2", "--out",
        s(&fit),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (c1, c2) = (fit.join("chain-1.csv"), fit.join("chain-2.csv"));

    let rep = dir.path().join("rep");
    let o = lnmix(&[
        "report", "--draws", s(&c1), s(&c2), "--data", s(&data), "--grid", "1:100:40", "--out", s(&rep),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(rep.join("summary.json")).unwrap()).unwrap();
    for key in ["model", "parameters", "gini", "log_ml", "r_posterior", "gastwirth"] {
        assert!(summary.get(key).is_some(), "summary lacks {key}");
    }
    assert_eq!(summary["draws"], 600);
    let pred = fs::read_to_string(rep.join("predictive.csv")).unwrap();
    assert!(pred.starts_with("x,density\n"));
    assert_eq!(pred.lines().count(), 41);
    let ginis = fs::read_to_string(rep.join("gini_draws.csv")).unwrap();
    assert_eq!(ginis.lines().count(), 601);
    let rpost = fs::read_to_string(rep.join("r_posterior.csv")).unwrap();
    let total: f64 = rpost.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);

    // Draws fitted to other data are refused.
    let other = small_data(dir.path(), "4");
    let o = lnmix(&["report", "--draws", s(&c1), "--data", s(&other), "--out", s(&dir.path().join("r2"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hash"));

    // Conditioning on a component count the chain never visited.
    let visited = Draws::read(&c1).unwrap().r_values();
    let absent = (1..=50).find(|r| !visited.contains(r)).unwrap().to_string();
    let o = lnmix(&["report", "--draws", s(&c1), "--data", s(&data), "--condition-r", &absent, "--out", s(&dir.path().join("r3"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("conditioning"));
    assert!(!dir.path().join("r3").join("summary.json").exists());
}

#[test]
fn forced_extreme_step_size_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path(), "5");
    let out = dir.path().join("gb2");
    let o = lnmix(&[
        "fit-gb2", "--data", s(&data), "--iterations", "2000", "--burn-in", "500", "--step-size", "1000", "--no-adapt",
        "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let draws = Draws::read(&out.join("chain-1.csv")).unwrap();
    assert!(draws.meta.warnings.iter().any(|w| w.contains("acceptance")));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}
