use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn radoboost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radoboost"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn dataset(dir: &Path) -> PathBuf {
    let mut csv = String::from("f1,f2,f3,label\n");
    for i in 0..40 {
        let t = i as f64 / 10.0;
        let y = if (i * 7) % 5 < 2 { "yes" } else { "no" };
        let shift = if y == "yes" { 1.0 } else { -1.0 };
        csv += &format!("{},{},{},{y}\n", t.sin() + shift, (t * 1.7).cos() - 0.5 * shift, t - 2.0);
    }
    let path = dir.join("data.csv");
    fs::write(&path, csv).unwrap();
    path
}

#[test]
fn dp_budget_prints_the_reporting_budget() {
    let out = radoboost(&["dp-budget", "--epsilon", "1", "--n", "100", "--m", "1000"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "1.00501e-3");
}

#[test]
fn verify_relu_is_exact() {
    let out = radoboost(&["verify", "--pair", "relu", "--m", "6", "--trials", "50"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("max residual 0.0e0"), "{}", stdout(&out));
}

#[test]
fn verify_all_pairs_pass() {
    let out = radoboost(&["verify", "--m", "5", "--trials", "20"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.ends_with(" ok")).count(), 4);
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = radoboost(&["train", "--out", "model.json"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--rados"));
    assert_eq!(code(&radoboost(&[])), 1);
    assert_eq!(code(&radoboost(&["--help"])), 0);
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = radoboost(&[
        "gen",
        "--data",
        p(&dir.path().join("absent.csv")),
        "--n",
        "5",
        "--out",
        p(&dir.path().join("r.csv")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn pipeline_runs_end_to_end_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(dir.path());
    let rados = dir.path().join("rados.csv");
    let dp = dir.path().join("dp.csv");
    let model = dir.path().join("model.json");
    let model2 = dir.path().join("model2.json");

    let gen = ["gen", "--data", p(&data), "--n", "40", "--seed", "3", "--out", p(&rados)];
    assert_eq!(code(&radoboost(&gen)), 0);
    let first = fs::read(&rados).unwrap();

    // Refuses to overwrite, then regenerates identically with --force.
    assert_eq!(code(&radoboost(&gen)), 1);
    let mut forced = gen.to_vec();
    forced.push("--force");
    assert_eq!(code(&radoboost(&forced)), 0);
    assert_eq!(fs::read(&rados).unwrap(), first);

    let protect = ["protect", "--rados", p(&rados), "--epsilon", "50", "--seed", "9", "--out", p(&dp)];
    assert_eq!(code(&radoboost(&protect)), 0);
    let dp_first = fs::read(&dp).unwrap();
    let mut again = protect.to_vec();
    again.push("--force");
    assert_eq!(code(&radoboost(&again)), 0);
    assert_eq!(fs::read(&dp).unwrap(), dp_first);

    for (out, threads) in [(&model, "1"), (&model2, "3")] {
        let train = [
            "train", "--rados", p(&rados), "--reg", "lasso", "--omega", "0.01", "--T", "60", "--threads", threads,
            "--out", p(out),
        ];
        let res = radoboost(&train);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    }
    assert_eq!(fs::read(&model).unwrap(), fs::read(&model2).unwrap());

    let eval = radoboost(&["eval", "--model", p(&model), "--data", p(&data)]);
    assert_eq!(code(&eval), 0);
    let line = stdout(&eval);
    assert!(line.starts_with("m 40 error ") && line.contains("support"), "{line}");
}

#[test]
fn degenerate_training_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let csv = "a,label\n1,p\n-1,n\n2,p\n";
    let data = dir.path().join("sep.csv");
    fs::write(&data, csv).unwrap();
    let rados = dir.path().join("r.csv");
    assert_eq!(code(&radoboost(&["gen", "--data", p(&data), "--n", "2", "--out", p(&rados)])), 0);
    // Identical rados make the only feature's edge exactly 1.
    fs::write(&rados, "a\n2\n2\n").unwrap();
    let out = radoboost(&["train", "--rados", p(&rados), "--reg", "lasso", "--T", "5", "--out", p(&dir.path().join("m.json"))]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn experiment_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    dataset(dir.path());
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        "dataset_path = \"data.csv\"\nlabel_column = \"label\"\nfolds = 4\nT = 30\nselect = [\"last\", \"best\"]\n\
         [[grid]]\nregularizer = \"ridge\"\nomegas = [0.0, 0.1]\n",
    )
    .unwrap();
    let out = radoboost(&["experiment", "--config", p(&config)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let results = fs::read_to_string(dir.path().join("exp.results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 2 * 2);
    assert!(results.starts_with("domain,regularizer,omega,select,"));
}
