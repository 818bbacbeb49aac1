//! Command-line front end of the `gfl` binary.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 runtime error,
//! 4 failed `--assert` check.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::control::{
    convergence_interval, simulate_closed_loop, stability_map, EstimatorMode, LoopConfig, Scenario,
};
use crate::error::Error;
use crate::estimators::{read_checkpoint, write_checkpoint, Checkpoint};
use crate::kv::{write_atomic, KvFile};
use crate::metrics::{compare_runs, load_runs, summarize};
use crate::plant;
use crate::scenario::{generate_dataset, synthesize_trace, trace_rng, Dataset, GenConfig};
use crate::training::{evaluate, train_with, EstimatorKind, TrainConfig};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_ASSERT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gfl", version, about = "Grasp-force tracking with learned stiffness estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Experiment config (key = value; sections `gen.`, `train.`, `loop.`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides every seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 is the reproducibility reference.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Allow replacing existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset of random grasping processes.
    Generate {
        #[arg(long)]
        out: PathBuf,
        /// Number of traces, overriding the config.
        #[arg(long)]
        n: Option<usize>,
        /// Also write the sampled plant of every trace under `plants/`.
        #[arg(long)]
        plants: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Train the recurrent estimator on a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Score estimators on a dataset split.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// `val` or `train`.
        #[arg(long, default_value = "val")]
        split: String,
        /// Also score the true stiffness (zero loss by construction).
        #[arg(long)]
        oracle: bool,
        /// Fail with exit code 4 unless the trained model scores below 1.0
        /// and below a tenth of the least-squares baseline.
        #[arg(long)]
        assert: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the closed-loop force controller.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        /// spring, two-regime, plastic or viscoelastic.
        #[arg(long, default_value = "spring")]
        scenario: String,
        /// Plant file to use instead of a named scenario.
        #[arg(long)]
        plant: Option<PathBuf>,
        /// oracle, lsm, fixed:<k>, or recurrent (needs --checkpoint).
        #[arg(long, default_value = "oracle")]
        estimator: String,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        duration: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Spectral-norm map of the error recursion and the convergence interval.
    Stability {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "0:1.5", value_parser = parse_range)]
        i_range: (f64, f64),
        #[arg(long, default_value = "0:2", value_parser = parse_range)]
        p_range: (f64, f64),
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        /// Root-finding tolerance of the interval endpoints.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Fail with exit code 4 unless the minimum is 0.707 at (0.5, 1.0)
        /// and the interval is (0.634, 2.366).
        #[arg(long)]
        assert: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate and plot the runs in a simulation output directory.
    Report {
        #[arg(long)]
        runs: PathBuf,
        /// Defaults to `<runs>/report`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    if hi < lo {
        return Err("hi must not be below lo".into());
    }
    Ok((lo, hi))
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// All config sections of an experiment.
#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    pub gen: GenConfig,
    pub train: TrainConfig,
    pub sim: LoopConfig,
}

impl ExperimentConfig {
    pub fn from_kv(kv: &KvFile) -> crate::Result<Self> {
        Ok(Self {
            gen: GenConfig::from_kv(&kv.section("gen"))?,
            train: TrainConfig::from_kv(&kv.section("train"))?,
            sim: LoopConfig::from_kv(&kv.section("loop"))?,
        })
    }

    pub fn to_kv(&self) -> KvFile {
        let mut kv = KvFile::new();
        for (k, v) in self.gen.to_kv().entries() {
            kv.set(format!("gen.{k}"), v);
        }
        for (k, v) in self.train.to_kv().entries() {
            kv.set(format!("train.{k}"), v);
        }
        self.sim.to_kv(&mut kv, "loop.");
        kv
    }
}

fn load_config(common: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        None => ExperimentConfig::default(),
        Some(path) => {
            let kv = KvFile::read(path).map_err(|e| CliError::config(e.to_string()))?;
            ExperimentConfig::from_kv(&kv).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(seed) = common.seed {
        cfg.gen.seed = seed;
        cfg.train.seed = seed;
        cfg.sim.seed = seed;
    }
    Ok(cfg)
}

fn setup_jobs(common: &Common) -> CliResult<()> {
    if let Some(n) = common.jobs {
        if n == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Refuses to replace existing files unless `--force` was given.
fn guard(paths: &[PathBuf], force: bool) -> CliResult<()> {
    if force {
        return Ok(());
    }
    match paths.iter().find(|p| p.exists()) {
        Some(p) => Err(CliError::config(format!(
            "{} already exists; pass --force to overwrite",
            p.display()
        ))),
        None => Ok(()),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

fn cmd_generate(out: &Path, n: Option<usize>, plants: bool, common: &Common) -> CliResult<()> {
    let mut cfg = load_config(common)?.gen;
    if let Some(n) = n {
        cfg.n_traces = n;
    }
    cfg.validate()?;
    guard(&[out.to_path_buf()], common.force)?;
    // build next to the target and move into place, so failures leave nothing behind
    let staging = out.with_file_name(format!(
        ".{}.partial",
        out.file_name().and_then(|s| s.to_str()).unwrap_or("dataset")
    ));
    if staging.exists() {
        std::fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    let result = (|| -> crate::Result<usize> {
        let summary = generate_dataset(&cfg, &staging)?;
        if plants {
            let dir = staging.join("plants");
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            for i in 0..cfg.n_traces {
                let sampled = synthesize_trace(&cfg, &mut trace_rng(cfg.seed, i as u64))?;
                plant::io::write(&sampled.plant, &dir.join(format!("plant_{i:05}.txt")))?;
            }
        }
        Ok(summary.files.len())
    })();
    let count = match result {
        Ok(c) => c,
        Err(e) => {
            let _ = std::fs::remove_dir_all(&staging);
            return Err(e.into());
        }
    };
    if out.exists() {
        std::fs::remove_dir_all(out).map_err(|e| Error::io(out, e))?;
    }
    std::fs::rename(&staging, out).map_err(|e| Error::io(out, e))?;
    println!(
        "wrote {count} traces ({} train, {} val) to {}",
        cfg.n_train(),
        cfg.n_val(),
        out.display()
    );
    Ok(())
}

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const TRAIN_REPORT_FILE: &str = "train_report.csv";
pub const TRAIN_SUMMARY_FILE: &str = "train_summary.txt";

fn cmd_train(data: &Path, out: &Path, epochs: Option<usize>, common: &Common) -> CliResult<()> {
    let mut cfg = load_config(common)?.train;
    if let Some(e) = epochs {
        cfg.epochs = e;
    }
    cfg.validate()?;
    let targets: Vec<PathBuf> = [CHECKPOINT_FILE, TRAIN_REPORT_FILE, TRAIN_SUMMARY_FILE]
        .iter()
        .map(|f| out.join(f))
        .collect();
    guard(&targets, common.force)?;
    let dataset = Dataset::load(data)?;
    let clock = Instant::now();
    let (ckpt, report) = train_with(&dataset, &cfg, |r| {
        println!(
            "epoch {:>3}  train {:.6}  val {:.6}  ({:.0} s)",
            r.epoch,
            r.train_loss,
            r.val_loss,
            clock.elapsed().as_secs_f64()
        );
    })?;
    create_dir(out)?;
    write_checkpoint(&ckpt, &targets[0])?;
    write_atomic(&targets[1], report.to_csv().as_bytes())?;
    let mut summary = report.summary();
    for (k, v) in cfg.to_kv().entries() {
        summary.set(format!("train.{k}"), v);
    }
    summary.set("dataset_hash", &dataset.config_hash);
    summary.write(&targets[2])?;
    println!("kept epoch {} after {:.1} s", report.best_epoch, report.wall_clock.as_secs_f64());
    println!("model  mean {:.6}  var {:.6}", report.val.mean, report.val.var);
    println!("lsm    mean {:.6}  var {:.6}", report.lsm_val.mean, report.lsm_val.var);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    data: &Path,
    checkpoint: Option<&Path>,
    split: &str,
    oracle: bool,
    assert: bool,
    out: Option<&Path>,
    common: &Common,
) -> CliResult<()> {
    let cfg = load_config(common)?.train;
    let dataset = Dataset::load(data)?;
    let traces = match split {
        "val" => &dataset.val,
        "train" => &dataset.train,
        other => return Err(CliError::config(format!("unknown split `{other}`"))),
    };
    let ckpt: Option<Checkpoint> = checkpoint.map(read_checkpoint).transpose()?;
    let lsm = ckpt.as_ref().map_or(cfg.lsm, |c| c.lsm);
    let skip = if cfg.val_skip_warmup { lsm.window } else { 0 };
    let mut rows = Vec::new();
    if oracle {
        rows.push(("oracle", evaluate(&EstimatorKind::Oracle, traces, lsm, skip)?));
    }
    let baseline = evaluate(&EstimatorKind::Lsm, traces, lsm, skip)?;
    rows.push(("lsm", baseline.clone()));
    let model = match &ckpt {
        Some(c) => {
            let s = evaluate(&EstimatorKind::Recurrent(&c.params), traces, lsm, skip)?;
            rows.push(("recurrent", s.clone()));
            Some(s)
        }
        None => None,
    };
    let mut table = String::from("estimator,mean_loss,var_loss\n");
    for (name, s) in &rows {
        println!("{name:<10} mean {:.9}  var {:.9}", s.mean, s.var);
        table.push_str(&format!("{name},{},{}\n", s.mean, s.var));
    }
    if let Some(dir) = out {
        let path = dir.join("eval.csv");
        guard(&[path.clone()], common.force)?;
        create_dir(dir)?;
        write_atomic(&path, table.as_bytes())?;
    }
    if assert {
        let Some(m) = model else {
            return Err(CliError::config("--assert needs --checkpoint"));
        };
        let ok = m.mean < 1.0 && m.mean < 0.1 * baseline.mean;
        println!(
            "{}: model mean {:.4} vs limit min(1.0, {:.4})",
            if ok { "PASS" } else { "FAIL" },
            m.mean,
            0.1 * baseline.mean
        );
        if !ok {
            return Err(CliError {
                code: EXIT_ASSERT,
                message: "estimator check failed".into(),
            });
        }
    }
    Ok(())
}

/// Parses `oracle`, `lsm`, `fixed:<k>` or `recurrent`.
fn parse_mode<'a>(spec: &str, ckpt: Option<&'a Checkpoint>, lsm: crate::estimators::LsmConfig) -> CliResult<EstimatorMode<'a>> {
    match spec {
        "oracle" => Ok(EstimatorMode::Oracle),
        "lsm" => Ok(EstimatorMode::Lsm(lsm)),
        "recurrent" => ckpt
            .map(EstimatorMode::Recurrent)
            .ok_or_else(|| CliError::config("recurrent estimator needs --checkpoint")),
        other => {
            let k = other
                .strip_prefix("fixed:")
                .and_then(|k| k.parse::<f64>().ok())
                .ok_or_else(|| CliError::config(format!("unknown estimator `{other}`")))?;
            Ok(EstimatorMode::Fixed(k))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    out: &Path,
    scenario: &str,
    plant_file: Option<&Path>,
    estimator: &str,
    checkpoint: Option<&Path>,
    duration: Option<f64>,
    common: &Common,
) -> CliResult<()> {
    let exp = load_config(common)?;
    let mut cfg = exp.sim;
    if let Some(d) = duration {
        cfg.duration = d;
    }
    cfg.validate()?;
    let (name, plant) = match plant_file {
        Some(p) => {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("plant").to_string();
            (stem, plant::io::read(p)?)
        }
        None => {
            let sc: Scenario = scenario.parse()?;
            (sc.name().to_string(), sc.plant(cfg.duration, exp.gen.bounds.f_max)?)
        }
    };
    let ckpt = checkpoint.map(read_checkpoint).transpose()?;
    let mode = parse_mode(estimator, ckpt.as_ref(), exp.train.lsm)?;
    let label = mode.label();
    let stem = format!("{name}_{label}");
    let csv = out.join(format!("{stem}.csv"));
    let summary_path = out.join(format!("{stem}.summary"));
    guard(&[csv.clone(), summary_path.clone()], common.force)?;
    let result = simulate_closed_loop(&plant, &cfg, mode)?;
    let window = cfg.target.period().unwrap_or(cfg.duration / 3.0);
    let mut kv = KvFile::new();
    kv.set("scenario", &name);
    kv.set("estimator", &label);
    kv.set("csv", format!("{stem}.csv"));
    kv.set("window", window);
    for (k, v) in result.summary().entries() {
        kv.set(k, v);
    }
    if let Ok((perf, _)) = summarize(&result, window, &name, &label) {
        kv.set("asymptotic_error_N", perf.asymptotic_error);
        kv.set("probing_time_s", perf.probing_time.time);
        kv.set("probing_settled", perf.probing_time.settled);
    }
    cfg.to_kv(&mut kv, "loop.");
    create_dir(out)?;
    write_atomic(&csv, result.to_csv().as_bytes())?;
    kv.write(&summary_path)?;
    println!(
        "{stem}: {} steps, diverged = {}, rms error {} N",
        result.len(),
        result.diverged,
        kv.get("rms_error_N").unwrap_or("?")
    );
    Ok(())
}

fn cmd_stability(
    out: Option<&Path>,
    i_range: (f64, f64),
    p_range: (f64, f64),
    step: f64,
    tol: f64,
    assert: bool,
    common: &Common,
) -> CliResult<()> {
    let map = stability_map(i_range, p_range, step)?;
    let (lo, hi) = convergence_interval(tol)?;
    let (i, p, n) = map.argmin;
    println!("minimum norm {n:.6} at I = {i:.4}, P = {p:.4}");
    println!("convergence interval {lo:.6} < eta < {hi:.6}");
    if let Some(dir) = out {
        let csv = dir.join("stability.csv");
        let txt = dir.join("stability.txt");
        guard(&[csv.clone(), txt.clone()], common.force)?;
        create_dir(dir)?;
        write_atomic(&csv, map.to_csv().as_bytes())?;
        let mut kv = KvFile::new();
        kv.set("min_norm", n);
        kv.set("argmin_I", i);
        kv.set("argmin_P", p);
        kv.set("eta_lo", lo);
        kv.set("eta_hi", hi);
        kv.set("step", step);
        kv.write(&txt)?;
    }
    if assert {
        let ok = (n - 0.707).abs() <= 1e-3
            && (i - 0.5).abs() <= step + 1e-12
            && (p - 1.0).abs() <= step + 1e-12
            && (lo - 0.634).abs() <= 0.005
            && (hi - 2.366).abs() <= 0.005;
        println!("{}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            return Err(CliError {
                code: EXIT_ASSERT,
                message: "stability check failed".into(),
            });
        }
    }
    Ok(())
}

fn cmd_report(runs_dir: &Path, out: Option<&Path>, common: &Common) -> CliResult<()> {
    let out = out.map_or_else(|| runs_dir.join("report"), Path::to_path_buf);
    let runs = load_runs(runs_dir)?;
    if runs.is_empty() {
        return Err(CliError {
            code: EXIT_RUNTIME,
            message: format!("no runs found in {}", runs_dir.display()),
        });
    }
    let mut targets = vec![out.join(crate::metrics::TABLE_FILE)];
    targets.extend(runs.iter().map(|r| out.join(format!("{}.svg", r.stem()))));
    guard(&targets, common.force)?;
    compare_runs(&runs, &out)?;
    for r in &runs {
        let s = &r.summary;
        println!(
            "{:<14} {:<12} asymptotic {:.5} N  probing {:.2} s{}",
            s.scenario,
            s.estimator,
            s.asymptotic_error,
            s.probing_time.time,
            if s.diverged { "  (diverged)" } else { "" }
        );
    }
    println!("wrote {} runs to {}", runs.len(), out.display());
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Generate { out, n, plants, common } => {
            setup_jobs(common)?;
            cmd_generate(out, *n, *plants, common)
        }
        Command::Train {
            data,
            out,
            epochs,
            common,
        } => {
            setup_jobs(common)?;
            cmd_train(data, out, *epochs, common)
        }
        Command::Eval {
            data,
            checkpoint,
            split,
            oracle,
            assert,
            out,
            common,
        } => {
            setup_jobs(common)?;
            cmd_eval(data, checkpoint.as_deref(), split, *oracle, *assert, out.as_deref(), common)
        }
        Command::Simulate {
            out,
            scenario,
            plant,
            estimator,
            checkpoint,
            duration,
            common,
        } => {
            setup_jobs(common)?;
            cmd_simulate(out, scenario, plant.as_deref(), estimator, checkpoint.as_deref(), *duration, common)
        }
        Command::Stability {
            out,
            i_range,
            p_range,
            step,
            tol,
            assert,
            common,
        } => {
            setup_jobs(common)?;
            cmd_stability(out.as_deref(), *i_range, *p_range, *step, *tol, *assert, common)
        }
        Command::Report { runs, out, common } => {
            setup_jobs(common)?;
            cmd_report(runs, out.as_deref(), common)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
