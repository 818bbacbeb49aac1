use std::path::Path;
use std::process::{Command, Output};

fn gfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = "\
gen.n_traces = 6
gen.duration = 1.5
train.epochs = 2
train.hidden = 4
train.batch_size = 3
train.bptt = 50
loop.duration = 12
";

fn small_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("small.cfg");
    std::fs::write(&p, SMALL).unwrap();
    p
}

#[test]
fn generate_writes_manifest_and_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("d");
    let o = gfl(&["generate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("manifest.txt").exists());
    assert_eq!(std::fs::read_dir(out.join("traces")).unwrap().count(), 6);
}

#[test]
fn n_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("d");
    let o = gfl(&["generate", "--config", s(&cfg), "--n", "3", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_dir(out.join("traces")).unwrap().count(), 3);
}

#[test]
fn missing_config_fails_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d");
    let o = gfl(&["generate", "--config", s(&tmp.path().join("nope.cfg")), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn bad_config_value_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "gen.n_traces = many\n").unwrap();
    let o = gfl(&["generate", "--config", s(&cfg), "--out", s(&tmp.path().join("d"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&gfl(&["frobnicate"])), 2);
    assert_eq!(code(&gfl(&["simulate", "--out", "/tmp/x", "--estimator", "psychic"])), 2);
}

#[test]
fn refuses_to_overwrite_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("d");
    assert_eq!(code(&gfl(&["generate", "--config", s(&cfg), "--out", s(&out)])), 0);
    let before = std::fs::read(out.join("manifest.txt")).unwrap();
    let o = gfl(&["generate", "--config", s(&cfg), "--seed", "9", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert_eq!(std::fs::read(out.join("manifest.txt")).unwrap(), before);
    let o = gfl(&["generate", "--config", s(&cfg), "--seed", "9", "--out", s(&out), "--force"]);
    assert_eq!(code(&o), 0);
    assert_ne!(std::fs::read(out.join("manifest.txt")).unwrap(), before);
}

#[test]
fn train_then_eval_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let data = tmp.path().join("d");
    let model = tmp.path().join("m");
    assert_eq!(code(&gfl(&["generate", "--config", s(&cfg), "--out", s(&data)])), 0);
    let o = gfl(&["train", "--config", s(&cfg), "--data", s(&data), "--out", s(&model), "--jobs", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("model  mean") && stdout.contains("lsm    mean"), "{stdout}");

    let summary = std::fs::read_to_string(model.join("train_summary.txt")).unwrap();
    let best: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("val_mean_loss = "))
        .expect("val_mean in summary")
        .parse()
        .unwrap();

    let ckpt = model.join("model.ckpt");
    let o = gfl(&[
        "eval", "--config", s(&cfg), "--data", s(&data), "--checkpoint", s(&ckpt), "--oracle", "--out", s(&tmp.path().join("e")),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(tmp.path().join("e/eval.csv")).unwrap();
    let row = |name: &str| -> f64 {
        table
            .lines()
            .find(|l| l.starts_with(&format!("{name},")))
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert_eq!(row("oracle"), 0.0);
    assert!((row("recurrent") - best).abs() < 1e-9, "{} vs {best}", row("recurrent"));

    // Two epochs on six traces cannot beat a tenth of the baseline.
    let o = gfl(&["eval", "--config", s(&cfg), "--data", s(&data), "--checkpoint", s(&ckpt), "--assert"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn eval_of_missing_dataset_is_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gfl(&["eval", "--data", s(&tmp.path().join("none"))]);
    assert_eq!(code(&o), 3);
}

#[test]
fn simulate_writes_contract_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("runs");
    let o = gfl(&["simulate", "--config", s(&cfg), "--out", s(&out), "--scenario", "spring"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("spring_oracle.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,F_d,F,x,v_d,k_hat,k_true,e");
    assert_eq!(csv.lines().count(), 1 + 1201);
    let summary = std::fs::read_to_string(out.join("spring_oracle.summary")).unwrap();
    assert!(summary.contains("diverged = false"), "{summary}");
}

#[test]
fn simulate_low_eta_diverges() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = tmp.path().join("runs");
    // 0.6 N/mm on a 2 N/mm spring: η = 0.3.
    let o = gfl(&["simulate", "--config", s(&cfg), "--out", s(&out), "--estimator", "fixed:0.6"]);
    assert_eq!(code(&o), 0);
    let summary = std::fs::read_to_string(out.join("spring_fixed-0.6.summary")).unwrap();
    assert!(summary.contains("diverged = true"), "{summary}");
}

#[test]
fn simulate_from_generated_plant_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let data = tmp.path().join("d");
    let o = gfl(&["generate", "--config", s(&cfg), "--n", "1", "--plants", "--out", s(&data)]);
    assert_eq!(code(&o), 0);
    let plant = data.join("plants/plant_00000.txt");
    let o = gfl(&[
        "simulate", "--config", s(&cfg), "--out", s(&tmp.path().join("r")), "--plant", s(&plant), "--estimator", "lsm", "--duration", "1.5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("r/plant_00000_lsm.csv").exists());
}

#[test]
fn recurrent_without_checkpoint_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gfl(&["simulate", "--out", s(tmp.path()), "--estimator", "recurrent"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn stability_defaults_and_assert() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gfl(&["stability", "--assert", "--out", s(tmp.path())]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("minimum norm 0.707107 at I = 0.5000, P = 1.0000"), "{stdout}");
    assert!(stdout.contains("0.633975 < eta < 2.366025"), "{stdout}");
    assert!(tmp.path().join("stability.csv").exists());
}

#[test]
fn stability_range_without_minimum() {
    let o = gfl(&["stability", "--i-range", "0:0.3", "--p-range", "0:0.4", "--step", "0.1", "--assert"]);
    assert_eq!(code(&o), 4);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("I = 0.3000, P = 0.4000"), "{stdout}");
}

#[test]
fn stability_interval_stable_across_runs() {
    let a = gfl(&["stability", "--tol", "1e-4", "--step", "0.05"]);
    let b = gfl(&["stability", "--tol", "1e-4", "--step", "0.05"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn report_tables_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let runs = tmp.path().join("runs");
    for est in ["oracle", "lsm"] {
        let o = gfl(&["simulate", "--config", s(&cfg), "--out", s(&runs), "--estimator", est, "--duration", "30"]);
        assert_eq!(code(&o), 0);
    }
    let o = gfl(&["report", "--runs", s(&runs)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(runs.join("report/report.csv")).unwrap();
    assert_eq!(table.lines().count(), 3, "{table}");
    assert!(runs.join("report/spring_lsm.svg").exists());
}

#[test]
fn report_of_short_runs_is_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let runs = tmp.path().join("runs");
    assert_eq!(code(&gfl(&["simulate", "--config", s(&cfg), "--out", s(&runs)])), 0);
    assert_eq!(code(&gfl(&["report", "--runs", s(&runs)])), 3);
    assert!(!runs.join("report").exists());
}

#[test]
fn report_of_empty_dir_fails() {
    let tmp = tempfile::tempdir().unwrap();
    assert_ne!(code(&gfl(&["report", "--runs", s(tmp.path())])), 0);
}
