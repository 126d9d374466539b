//! mixgan: train a multi-generator GAN whose generators claim distinct
//! modes, verify its closed-form identities, and score the results.
//!
//! One executable, selected by `--task`:
//!
//! ```text
//! mixgan --task verify
//! mixgan --task train-synthetic --seed 7 --out runs/demo
//! mixgan --task train-synthetic --seeds 0,1,2,3
//! mixgan --task train-mnist --mnist-images train-images-idx3-ubyte \
//!        --mnist-labels train-labels-idx1-ubyte --digits 0,1
//! mixgan --task sample --checkpoint runs/demo/checkpoint.mggan \
//!        --generator mixture --n 1000 --out runs/demo
//! mixgan --task metrics --samples-a a.csv --samples-b b.csv \
//!        --centers "-2,0;2,0" --radius 0.5
//! ```
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or config
//! error, 3 numerical divergence during training.

mod commands;
mod config;
mod train;

use std::path::PathBuf;

use clap::Parser;

use config::{load_overlay, output_root, RunConfig, Task};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, or input files. Exit 2.
    Usage(String),
    /// A verification check failed. Exit 1.
    VerificationFailed,
    /// Training hit a non-finite loss. Exit 3.
    NumericalDivergence(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed => 1,
            CliError::Usage(_) => 2,
            CliError::NumericalDivergence(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::VerificationFailed => write!(f, "verification failed"),
            CliError::NumericalDivergence(msg) => write!(f, "{msg}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "mixgan",
    version,
    about = "Multi-generator GAN trainer and divergence verifier"
)]
struct Cli {
    /// Task: verify, train-synthetic, train-mnist, sample, or metrics.
    #[arg(long)]
    task: Option<String>,

    /// JSON config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Number of generators.
    #[arg(long)]
    k: Option<usize>,

    /// Supplementary discriminator layout: full, pairwise-single, none.
    #[arg(long)]
    supplementary_mode: Option<String>,

    /// Train generators on flipped targets (non-saturating loss).
    #[arg(long)]
    flip_labels: Option<bool>,

    /// Latent dimension.
    #[arg(long)]
    latent_dim: Option<usize>,

    /// Generator hidden widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    gen_hidden: Option<Vec<usize>>,

    /// Supplementary discriminator hidden widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    sup_hidden: Option<Vec<usize>>,

    #[arg(long)]
    iterations: Option<u64>,

    #[arg(long)]
    batch_size: Option<usize>,

    /// Adam learning rate.
    #[arg(long)]
    lr: Option<f64>,

    #[arg(long)]
    seed: Option<u64>,

    /// Seed sweep: independent parallel runs in disjoint subdirectories.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,

    /// Digit pair for train-mnist, e.g. 0,1.
    #[arg(long, value_delimiter = ',')]
    digits: Option<Vec<u8>>,

    #[arg(long)]
    mnist_images: Option<PathBuf>,

    #[arg(long)]
    mnist_labels: Option<PathBuf>,

    /// Output directory (default: $MIXGAN_OUT/<task>-seed<seed>).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    snapshot_interval: Option<u64>,

    /// For sample: generator index (1-based) or "mixture".
    #[arg(long)]
    generator: Option<String>,

    #[arg(long)]
    checkpoint: Option<PathBuf>,

    /// Sample count for the sample task.
    #[arg(long)]
    n: Option<usize>,

    #[arg(long)]
    samples_a: Option<PathBuf>,

    #[arg(long)]
    samples_b: Option<PathBuf>,

    /// Mode centers as "x,y;x,y".
    #[arg(long, allow_hyphen_values = true)]
    centers: Option<String>,

    /// Assignment radius for metrics.
    #[arg(long)]
    radius: Option<f64>,

    /// Bins per dimension for the empirical JS estimate.
    #[arg(long)]
    bins: Option<usize>,

    /// Binning range as lo,hi (shared across dimensions).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    range: Option<Vec<f64>>,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overlay = match &cli.config {
        Some(path) => Some(load_overlay(path)?),
        None => None,
    };
    let task = match (&cli.task, overlay.as_ref().and_then(|o| o.task)) {
        (Some(s), _) => Task::parse(s)?,
        (None, Some(t)) => t,
        (None, None) => {
            return Err(CliError::Usage(
                "--task is required (verify, train-synthetic, train-mnist, sample, metrics)"
                    .into(),
            ))
        }
    };

    match task {
        Task::Verify => commands::cmd_verify(cli.seed.unwrap_or(0)),
        Task::TrainSynthetic | Task::TrainMnist => run_train(task, cli, overlay),
        Task::Sample => {
            let checkpoint = cli
                .checkpoint
                .ok_or_else(|| CliError::Usage("sample requires --checkpoint PATH".into()))?;
            let selector = cli.generator.unwrap_or_else(|| "mixture".to_string());
            let n = cli.n.unwrap_or(100);
            let out_dir = cli.out.unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&out_dir).map_err(|e| {
                CliError::Usage(format!("cannot create {}: {e}", out_dir.display()))
            })?;
            commands::cmd_sample(
                &checkpoint,
                n,
                &selector,
                cli.seed.unwrap_or(0),
                &out_dir.join("samples.csv"),
            )
        }
        Task::Metrics => {
            let samples_a = cli
                .samples_a
                .ok_or_else(|| CliError::Usage("metrics requires --samples-a FILE".into()))?;
            let samples_b = cli
                .samples_b
                .ok_or_else(|| CliError::Usage("metrics requires --samples-b FILE".into()))?;
            let centers = match &cli.centers {
                Some(spec) => commands::parse_centers(spec)?,
                None => vec![vec![-2.0, 0.0], vec![2.0, 0.0]],
            };
            let radius = cli.radius.unwrap_or(0.5);
            let bins = cli.bins.unwrap_or(32);
            let range = match cli.range.as_deref() {
                Some([lo, hi]) => (*lo, *hi),
                Some(_) => return Err(CliError::Usage("--range expects exactly lo,hi".into())),
                None => (-4.0, 4.0),
            };
            let out_dir = cli.out.unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&out_dir).map_err(|e| {
                CliError::Usage(format!("cannot create {}: {e}", out_dir.display()))
            })?;
            commands::cmd_metrics(
                &samples_a,
                &samples_b,
                &centers,
                radius,
                bins,
                range,
                &out_dir.join("metrics_report.csv"),
            )
        }
    }
}

fn run_train(task: Task, cli: Cli, overlay: Option<config::ConfigOverlay>) -> Result<(), CliError> {
    let mut config = RunConfig::defaults(task);
    if let Some(overlay) = &overlay {
        config.apply_overlay(overlay);
    }
    apply_flags(&mut config, &cli)?;
    config.task = task;

    if let Some(seeds) = &cli.seeds {
        let root = cli
            .out
            .clone()
            .unwrap_or_else(|| output_root().join(task_dir_name(task, None)));
        let dirs = train::run_seed_sweep(&config, seeds, &root)?;
        for dir in dirs {
            println!("run complete: {}", dir.display());
        }
        Ok(())
    } else {
        let out_dir = cli
            .out
            .clone()
            .unwrap_or_else(|| output_root().join(task_dir_name(task, Some(config.seed))));
        train::run_training(&config, &out_dir)?;
        println!("run complete: {}", out_dir.display());
        Ok(())
    }
}

fn task_dir_name(task: Task, seed: Option<u64>) -> String {
    let base = match task {
        Task::TrainSynthetic => "train-synthetic",
        Task::TrainMnist => "train-mnist",
        _ => "run",
    };
    match seed {
        Some(s) => format!("{base}-seed{s}"),
        None => base.to_string(),
    }
}

fn apply_flags(config: &mut RunConfig, cli: &Cli) -> Result<(), CliError> {
    if let Some(v) = cli.k {
        config.k = v;
    }
    if let Some(v) = &cli.supplementary_mode {
        config.supplementary_mode = v.clone();
    }
    if let Some(v) = cli.flip_labels {
        config.flip_labels = v;
    }
    if let Some(v) = cli.latent_dim {
        config.latent_dim = v;
    }
    if let Some(v) = &cli.gen_hidden {
        config.gen_hidden = v.clone();
    }
    if let Some(v) = &cli.sup_hidden {
        config.sup_hidden = Some(v.clone());
    }
    if let Some(v) = cli.iterations {
        config.iterations = v;
    }
    if let Some(v) = cli.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = cli.lr {
        config.lr = v;
    }
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = cli.snapshot_interval {
        config.snapshot_interval = v;
    }
    if let Some(digits) = &cli.digits {
        match digits.as_slice() {
            [a, b] => config.digits = [*a, *b],
            _ => return Err(CliError::Usage("--digits expects exactly a,b".into())),
        }
    }
    if let Some(v) = &cli.mnist_images {
        config.mnist_images = Some(v.clone());
    }
    if let Some(v) = &cli.mnist_labels {
        config.mnist_labels = Some(v.clone());
    }
    if let Some(spec) = &cli.centers {
        config.synthetic_centers = commands::parse_centers(spec)?;
    }
    if let Some(v) = cli.radius {
        config.assignment_radius = v;
    }
    Ok(())
}
