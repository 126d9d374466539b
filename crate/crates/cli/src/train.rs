//! Training runs: dataset assembly, the game loop, and artifact export.

use std::path::{Path, PathBuf};

use mixgan_core::data::{
    filter_digits, load_idx_images, load_idx_labels, sample_gaussian_mixture, GaussianMixtureSpec,
    ImageDataset,
};
use mixgan_core::game::{GameError, GameState, RunOutput};
use mixgan_core::metrics::{
    assign_modes, export_csv, export_grid, histogram_js, mean_image_affinity, separation_report,
    Binning, CsvTable,
};
use mixgan_core::models::LatentSampler;
use mixgan_core::rng;

use crate::config::{RunConfig, Task};
use crate::CliError;

/// Rows sampled per generator for metric snapshots and final reports.
const EVAL_SAMPLES: usize = 2_000;

pub fn run_training(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out_dir.display())))?;
    config.save(&out_dir.join("config.json"))?;

    match config.task {
        Task::TrainSynthetic => run_synthetic(config, out_dir),
        Task::TrainMnist => run_mnist(config, out_dir),
        _ => Err(CliError::Usage("not a training task".into())),
    }
}

fn map_game_error(e: GameError) -> CliError {
    match e {
        GameError::NonFiniteLoss { model, iteration } => CliError::NumericalDivergence(format!(
            "non-finite loss in sub-model {model} at iteration {iteration}"
        )),
        other => CliError::Usage(other.to_string()),
    }
}

fn losses_table(output: &RunOutput, sup_count: usize, k: usize) -> CsvTable {
    let mut header = vec!["iteration".to_string(), "loss_h".to_string()];
    header.extend((1..=sup_count).map(|i| format!("loss_h{i}")));
    header.extend((1..=k).map(|i| format!("loss_g{i}")));
    let mut table = CsvTable::new(header);
    for record in &output.losses {
        let mut row = vec![record.iteration as f64, record.adversarial];
        row.extend_from_slice(&record.supplementary);
        row.extend_from_slice(&record.generators);
        table.push(row);
    }
    table
}

fn snapshots_table(output: &RunOutput, columns: &[String]) -> CsvTable {
    let mut header = vec!["iteration".to_string()];
    header.extend_from_slice(columns);
    let mut table = CsvTable::new(header);
    for snap in &output.snapshots {
        let mut row = vec![snap.iteration as f64];
        for c in columns {
            let v = snap
                .values
                .iter()
                .find(|(name, _)| name == c)
                .map_or(f64::NAN, |(_, v)| *v);
            row.push(v);
        }
        table.push(row);
    }
    table
}

/// Evaluation latents come from streams derived per purpose, so metric
/// sampling never perturbs the training streams.
fn eval_latents(config: &RunConfig, label: &str) -> LatentSampler {
    LatentSampler::new(config.latent_dim, rng::derive_seed(config.seed, label))
}

// ── Synthetic task ──────────────────────────────────────────────────

const SYNTH_SNAPSHOT_COLUMNS: [&str; 7] = [
    "purity_g1",
    "purity_g2",
    "overlap",
    "histogram_js",
    "success",
    "unassigned_g1",
    "unassigned_g2",
];

fn synthetic_snapshot(
    state: &GameState,
    iteration: u64,
    config: &RunConfig,
    centers: &[Vec<f64>],
) -> Vec<(String, f64)> {
    let mut sampler = eval_latents(config, &format!("snapshot:{iteration}"));
    let mut values: Vec<(String, f64)> = SYNTH_SNAPSHOT_COLUMNS
        .iter()
        .map(|c| (c.to_string(), f64::NAN))
        .collect();
    let za = sampler.sample(EVAL_SAMPLES);
    let zb = sampler.sample(EVAL_SAMPLES);
    let (sa, sb) = match (state.generate(0, &za), state.generate(1, &zb)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return values,
    };
    let (ha, hb) = match (
        assign_modes(&sa, centers, config.assignment_radius),
        assign_modes(&sb, centers, config.assignment_radius),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return values,
    };
    values[5].1 = ha.unassigned as f64;
    values[6].1 = hb.unassigned as f64;
    if let Ok(report) = separation_report(&ha, &hb) {
        values[0].1 = report.purity[0];
        values[1].1 = report.purity[1];
        values[2].1 = report.overlap;
        values[3].1 = report.histogram_js;
        values[4].1 = if report.success { 1.0 } else { 0.0 };
    }
    values
}

fn run_synthetic(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let k = config.k;
    if k != 2 {
        // The separation report and snapshot columns are defined pairwise.
        return Err(CliError::Usage(
            "train-synthetic is defined for k = 2".into(),
        ));
    }
    let spec = GaussianMixtureSpec::new(
        config.synthetic_centers.clone(),
        vec![config.synthetic_sigma; config.synthetic_centers.len()],
        vec![1.0 / config.synthetic_centers.len() as f64; config.synthetic_centers.len()],
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let (dataset, _) = sample_gaussian_mixture(
        &spec,
        config.synthetic_dataset_size,
        rng::derive_seed(config.seed, "data"),
    );

    let centers = config.synthetic_centers.clone();
    let mut state = GameState::new(config.game_config()?).map_err(map_game_error)?;
    let output = state
        .run(&dataset, |state, iteration| {
            synthetic_snapshot(state, iteration, config, &centers)
        })
        .map_err(map_game_error)?;

    export_csv(
        &losses_table(&output, state.supplementaries().len(), k),
        &out_dir.join("losses.csv"),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let columns: Vec<String> = SYNTH_SNAPSHOT_COLUMNS.iter().map(|s| s.to_string()).collect();
    export_csv(
        &snapshots_table(&output, &columns),
        &out_dir.join("snapshots.csv"),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;

    state
        .save_checkpoint(&out_dir.join("checkpoint.mggan"))
        .map_err(|e| CliError::Usage(e.to_string()))?;

    // Final per-generator samples, the mixture with provenance, and the
    // separation report.
    let mut sampler = eval_latents(config, "final-eval");
    let dim = config.data_dim();
    let coord_header: Vec<String> = (0..dim).map(|d| format!("x{d}")).collect();
    let mut per_generator = Vec::new();
    for g in 0..k {
        let z = sampler.sample(EVAL_SAMPLES);
        let samples = state.generate(g, &z).map_err(map_game_error)?;
        let mut table = CsvTable::new(coord_header.clone());
        for i in 0..EVAL_SAMPLES {
            table.push(samples.row(i).to_vec());
        }
        export_csv(&table, &out_dir.join(format!("samples_g{}.csv", g + 1)))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        per_generator.push(samples);
    }
    write_mixture_samples(&mut state, &coord_header, out_dir)?;

    let ha = assign_modes(&per_generator[0], &centers, config.assignment_radius)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let hb = assign_modes(&per_generator[1], &centers, config.assignment_radius)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut report_table = CsvTable::new(
        [
            "dominant_g1",
            "dominant_g2",
            "purity_g1",
            "purity_g2",
            "overlap",
            "histogram_js",
            "success",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    );
    match separation_report(&ha, &hb) {
        Ok(report) => {
            let lo: Vec<f64> = (0..dim).map(|_| -4.0).collect();
            let hi: Vec<f64> = (0..dim).map(|_| 4.0).collect();
            let bins = vec![32; dim];
            let js = histogram_js(
                &per_generator[0],
                &per_generator[1],
                &Binning::new(lo, hi, bins),
            )
            .map_err(|e| CliError::Usage(e.to_string()))?;
            report_table.push(vec![
                report.dominant[0] as f64,
                report.dominant[1] as f64,
                report.purity[0],
                report.purity[1],
                report.overlap,
                js,
                if report.success { 1.0 } else { 0.0 },
            ]);
        }
        Err(_) => {
            report_table.push(vec![f64::NAN; 7]);
        }
    }
    export_csv(&report_table, &out_dir.join("report.csv"))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(())
}

fn write_mixture_samples(
    state: &mut GameState,
    coord_header: &[String],
    out_dir: &Path,
) -> Result<(), CliError> {
    let (batch, provenance) = state
        .draw_mixture_batch(EVAL_SAMPLES)
        .map_err(map_game_error)?;
    let mut header = coord_header.to_vec();
    header.push("generator".to_string());
    let mut table = CsvTable::new(header);
    for (i, &origin) in provenance.iter().enumerate().take(EVAL_SAMPLES) {
        let mut row = batch.row(i).to_vec();
        row.push((origin + 1) as f64);
        table.push(row);
    }
    export_csv(&table, &out_dir.join("samples_mixture.csv"))
        .map_err(|e| CliError::Usage(e.to_string()))
}

// ── Image task ──────────────────────────────────────────────────────

fn run_mnist(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let images_path = config.mnist_images.clone().ok_or_else(|| {
        CliError::Usage("train-mnist requires --mnist-images PATH".into())
    })?;
    let labels_path = config.mnist_labels.clone().ok_or_else(|| {
        CliError::Usage("train-mnist requires --mnist-labels PATH".into())
    })?;
    let images = load_idx_images(&images_path).map_err(|e| CliError::Usage(e.to_string()))?;
    let labels = load_idx_labels(&labels_path).map_err(|e| CliError::Usage(e.to_string()))?;
    let dataset = ImageDataset::new(images, labels).map_err(|e| CliError::Usage(e.to_string()))?;
    let [a, b] = config.digits;
    let filtered = filter_digits(&dataset, a, b).map_err(|e| CliError::Usage(e.to_string()))?;

    // Per-class mean images drive the affinity snapshots.
    let class_means: Vec<Vec<f64>> = [a, b]
        .iter()
        .map(|&digit| {
            let rows: Vec<usize> = filtered
                .labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == digit)
                .map(|(i, _)| i)
                .collect();
            let mut mean = vec![0.0; 784];
            for &r in &rows {
                for (acc, &v) in mean.iter_mut().zip(filtered.images.row(r)) {
                    *acc += v / rows.len() as f64;
                }
            }
            mean
        })
        .collect();

    let mut state = GameState::new(config.game_config()?).map_err(map_game_error)?;
    let columns: Vec<String> = affinity_columns(a, b);
    let snapshot_config = config.clone();
    let means = class_means.clone();
    let output = state
        .run(&filtered.images, |state, iteration| {
            mnist_snapshot(state, iteration, &snapshot_config, &means)
        })
        .map_err(map_game_error)?;

    export_csv(
        &losses_table(&output, state.supplementaries().len(), config.k),
        &out_dir.join("losses.csv"),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    export_csv(
        &snapshots_table(&output, &columns),
        &out_dir.join("snapshots.csv"),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    state
        .save_checkpoint(&out_dir.join("checkpoint.mggan"))
        .map_err(|e| CliError::Usage(e.to_string()))?;

    // Sample grids: one row of real digits, one grid per generator.
    let grid_rows = 4;
    let grid_cols = 8;
    export_grid(
        &filtered.images,
        1,
        grid_cols,
        &out_dir.join("grid_real.pgm"),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut sampler = eval_latents(config, "final-eval");
    for g in 0..config.k {
        let z = sampler.sample(grid_rows * grid_cols);
        let samples = state.generate(g, &z).map_err(map_game_error)?;
        export_grid(
            &samples,
            grid_rows,
            grid_cols,
            &out_dir.join(format!("grid_g{}.pgm", g + 1)),
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn affinity_columns(a: u8, b: u8) -> Vec<String> {
    vec![
        format!("affinity_g1_digit{a}"),
        format!("affinity_g1_digit{b}"),
        format!("affinity_g2_digit{a}"),
        format!("affinity_g2_digit{b}"),
        "distinct_argmax".to_string(),
    ]
}

fn mnist_snapshot(
    state: &GameState,
    iteration: u64,
    config: &RunConfig,
    class_means: &[Vec<f64>],
) -> Vec<(String, f64)> {
    let [a, b] = config.digits;
    let columns = affinity_columns(a, b);
    let mut values: Vec<(String, f64)> =
        columns.iter().map(|c| (c.clone(), f64::NAN)).collect();
    let mut sampler = eval_latents(config, &format!("snapshot:{iteration}"));
    let mut argmaxes = Vec::new();
    for g in 0..2 {
        let z = sampler.sample(256);
        let samples = match state.generate(g, &z) {
            Ok(s) => s,
            Err(_) => return values,
        };
        match mean_image_affinity(&samples, class_means) {
            Ok(affinity) => {
                values[g * 2].1 = affinity[0];
                values[g * 2 + 1].1 = affinity[1];
                argmaxes.push(if affinity[0] >= affinity[1] { 0 } else { 1 });
            }
            Err(_) => return values,
        }
    }
    values[4].1 = if argmaxes[0] != argmaxes[1] { 1.0 } else { 0.0 };
    values
}

/// Runs one seed per thread, each into its own subdirectory.
pub fn run_seed_sweep(
    base: &RunConfig,
    seeds: &[u64],
    out_root: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let mut dirs = Vec::new();
    std::thread::scope(|scope| -> Result<(), CliError> {
        let mut handles = Vec::new();
        for &seed in seeds {
            let mut config = base.clone();
            config.seed = seed;
            let dir = out_root.join(format!("seed-{seed}"));
            dirs.push(dir.clone());
            handles.push(scope.spawn(move || run_training(&config, &dir)));
        }
        for handle in handles {
            handle.join().expect("training thread panicked")?;
        }
        Ok(())
    })?;
    Ok(dirs)
}
