//! `excursion`: run excursion-metric forecasting experiments from JSON
//! configs.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use excursion_forecast::distributions::MarginalModel;
use excursion_forecast::harness::{self, ExperimentSpec};
use excursion_forecast::metrics::{self, PairedSample};
use excursion_forecast::{fmt_f64, RngStream};

use config::ConfigError;

#[derive(Parser, Debug)]
#[command(name = "excursion", version, about = "Excursion-metric forecasting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the training path and write it as CSV.
    Simulate(RunArgs),
    /// Fit predictor weights at every prediction point.
    Fit(RunArgs),
    /// Fit, then score the predictors on fresh replicates.
    Evaluate(RunArgs),
    /// Time one online solve.
    Benchmark(BenchArgs),
    /// Gini and excursion metric of a synthetic bivariate sample.
    DemoMetrics(DemoArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluation replicates, overriding the config.
    #[arg(long)]
    replicates: Option<usize>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Prediction point to time (default: first point off the forecast sample).
    #[arg(long)]
    t: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
enum Pairs {
    Independent,
    Comonotone,
    Countermonotone,
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long, value_enum, default_value = "independent")]
    pairs: Pairs,
    /// Number of pairs.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the excursion curve and copula diagonal here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Versions {
    excursion_forecast: String,
    excursion_cli: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    command: String,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<ExperimentSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    demo: Option<DemoEcho>,
    versions: Versions,
    outputs: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DemoEcho {
    pairs: Pairs,
    n: usize,
}

fn versions() -> Versions {
    Versions {
        excursion_forecast: excursion_forecast::VERSION.to_string(),
        excursion_cli: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load(args: &RunArgs) -> Result<ExperimentSpec> {
    let mut spec = config::load_spec(&args.config)?;
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(r) = args.replicates {
        spec.replicates = r;
    }
    spec.validate().map_err(lib_error)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating output directory {}", args.out.display()))?;
    Ok(spec)
}

fn lib_error(e: excursion_forecast::Error) -> anyhow::Error {
    match config::from_library(&e) {
        Some(c) => c.into(),
        None => e.into(),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(ConfigError {
                path: None,
                key: Some("--threads".into()),
                message: "must be at least 1".into(),
            }
            .into());
        }
        b = b.num_threads(n);
    }
    Ok(b.build()?.install(f))
}

fn manifest(command: &str, spec: &ExperimentSpec, outputs: &[&str]) -> Manifest {
    Manifest {
        command: command.into(),
        seed: spec.seed,
        config: Some(spec.clone()),
        demo: None,
        versions: versions(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    }
}

fn simulate(args: &RunArgs) -> Result<()> {
    let spec = load(args)?;
    let path = harness::simulate_training(&spec).map_err(lib_error)?;
    let mut w = create(&args.out, "training.csv")?;
    path.write_csv(&mut w)?;
    w.flush()?;
    write_manifest(&args.out, &manifest("simulate", &spec, &["training.csv"]))?;
    println!("wrote {} points to {}", path.len(), args.out.join("training.csv").display());
    Ok(())
}

fn fit(args: &RunArgs, evaluate: bool) -> Result<()> {
    let spec = load(args)?;
    let (fit, eval) = with_threads(args.threads, || -> excursion_forecast::Result<_> {
        let fit = harness::run_fit(&spec)?;
        let eval = if evaluate { Some(harness::run_eval(&spec, &fit)?) } else { None };
        Ok((fit, eval))
    })?
    .map_err(lib_error)?;

    let mut w = create(&args.out, "weights.csv")?;
    fit.write_weights_csv(&mut w)?;
    w.flush()?;
    let mut outputs = vec!["weights.csv"];
    if let Some(eval) = &eval {
        let mut w = create(&args.out, "eval.csv")?;
        eval.write_csv(&mut w)?;
        w.flush()?;
        outputs.push("eval.csv");
    }
    let command = if evaluate { "evaluate" } else { "fit" };
    write_manifest(&args.out, &manifest(command, &spec, &outputs))?;
    println!(
        "{}: {} fits at {} points, outputs in {}",
        spec.name,
        fit.points.len(),
        spec.targets()?.len(),
        args.out.display()
    );
    Ok(())
}

fn benchmark(args: &BenchArgs) -> Result<()> {
    let spec = load(&args.run)?;
    let r = harness::run_table1_benchmark(&spec, args.t).map_err(lib_error)?;
    let mut w = create(&args.run.out, "benchmark.csv")?;
    writeln!(w, "t,rows,iterations,seconds,error")?;
    let err = r.error.as_ref().map(|e| e.to_string().replace(',', ";")).unwrap_or_default();
    writeln!(w, "{},{},{},{},{}", fmt_f64(r.t), r.rows, spec.descent.max_iter, fmt_f64(r.seconds), err)?;
    w.flush()?;
    write_manifest(&args.run.out, &manifest("benchmark", &spec, &["benchmark.csv"]))?;
    println!("t = {}: {} rows, {} iterations in {:.4} s", r.t, r.rows, spec.descent.max_iter, r.seconds);
    match r.error {
        Some(e) => Err(anyhow::Error::from(e).context("solve aborted (timing reported above)")),
        None => Ok(()),
    }
}

fn demo(args: &DemoArgs) -> Result<()> {
    if args.n < 10 {
        return Err(ConfigError {
            path: None,
            key: Some("--n".into()),
            message: "need at least 10 pairs".into(),
        }
        .into());
    }
    let normal = MarginalModel::standard_normal();
    let mut rng = RngStream::new(args.seed, 0);
    let a = normal.sample(&mut rng, args.n)?;
    let b = match args.pairs {
        Pairs::Independent => normal.sample(&mut rng, args.n)?,
        Pairs::Comonotone => a.clone(),
        Pairs::Countermonotone => a.iter().map(|x| -x).collect(),
    };
    let s = PairedSample::new(a, b)?;
    let clock = Instant::now();
    let gini = metrics::gini_empirical(&s)?;
    let secs = clock.elapsed().as_secs_f64();
    let excursion = metrics::excursion_metric_empirical(&s, &normal)?;
    println!("pairs = {:?}, n = {}", args.pairs, args.n);
    println!("gini = {gini:.6}");
    println!("excursion_metric = {excursion:.6}");
    println!("gini_seconds = {secs:.3}");

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        let levels: Vec<f64> = (1..200).map(|k| normal.quantile(k as f64 / 200.0)).collect::<Result<_, _>>()?;
        let mut w = create(dir, "delta.csv")?;
        metrics::write_delta_csv(&s, &levels, &mut w)?;
        w.flush()?;
        let mut w = create(dir, "diagonal.csv")?;
        metrics::write_diagonal_csv(&s, &mut w)?;
        w.flush()?;
        write_manifest(
            dir,
            &Manifest {
                command: "demo-metrics".into(),
                seed: args.seed,
                config: None,
                demo: Some(DemoEcho {
                    pairs: args.pairs,
                    n: args.n,
                }),
                versions: versions(),
                outputs: vec!["delta.csv".into(), "diagonal.csv".into()],
            },
        )?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Fit(a) => fit(&a, false),
        Command::Evaluate(a) => fit(&a, true),
        Command::Benchmark(a) => benchmark(&a),
        Command::DemoMetrics(a) => demo(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
