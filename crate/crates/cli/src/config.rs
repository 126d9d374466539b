//! Run configuration: task defaults, JSON config files, and flag overlays.
//!
//! Precedence is flags > config file > task defaults. A resolved config is
//! serialized verbatim into the run directory; re-running from that file
//! reproduces every CSV artifact byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mixgan_core::adam::AdamHyper;
use mixgan_core::game::{GameConfig, SupplementaryMode};
use mixgan_core::models::OutputActivation;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Verify,
    TrainSynthetic,
    TrainMnist,
    Sample,
    Metrics,
}

impl Task {
    pub fn parse(s: &str) -> Result<Task, CliError> {
        match s {
            "verify" => Ok(Task::Verify),
            "train-synthetic" => Ok(Task::TrainSynthetic),
            "train-mnist" => Ok(Task::TrainMnist),
            "sample" => Ok(Task::Sample),
            "metrics" => Ok(Task::Metrics),
            other => Err(CliError::Usage(format!(
                "unknown task {other:?}; expected verify, train-synthetic, train-mnist, sample, or metrics"
            ))),
        }
    }
}

/// A fully resolved run description; every training artifact directory
/// carries one as `config.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: Task,
    pub k: usize,
    pub supplementary_mode: String,
    pub flip_labels: bool,
    pub latent_dim: usize,
    pub gen_hidden: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_hidden: Option<Vec<usize>>,
    pub batch_size: usize,
    pub iterations: u64,
    pub lr: f64,
    pub seed: u64,
    pub snapshot_interval: u64,
    /// Two-Gaussian target for the synthetic task.
    pub synthetic_centers: Vec<Vec<f64>>,
    pub synthetic_sigma: f64,
    pub synthetic_dataset_size: usize,
    pub assignment_radius: f64,
    /// Digit pair for the image task; labels are used only to filter.
    pub digits: [u8; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mnist_images: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mnist_labels: Option<PathBuf>,
}

/// Partial config as read from a JSON file; unset fields fall back to the
/// task defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverlay {
    pub task: Option<Task>,
    pub k: Option<usize>,
    pub supplementary_mode: Option<String>,
    pub flip_labels: Option<bool>,
    pub latent_dim: Option<usize>,
    pub gen_hidden: Option<Vec<usize>>,
    pub sup_hidden: Option<Vec<usize>>,
    pub batch_size: Option<usize>,
    pub iterations: Option<u64>,
    pub lr: Option<f64>,
    pub seed: Option<u64>,
    pub snapshot_interval: Option<u64>,
    pub synthetic_centers: Option<Vec<Vec<f64>>>,
    pub synthetic_sigma: Option<f64>,
    pub synthetic_dataset_size: Option<usize>,
    pub assignment_radius: Option<f64>,
    pub digits: Option<[u8; 2]>,
    pub mnist_images: Option<PathBuf>,
    pub mnist_labels: Option<PathBuf>,
}

impl RunConfig {
    /// Task defaults: the full image setup for train-mnist, the
    /// desk-scale analog for train-synthetic.
    pub fn defaults(task: Task) -> RunConfig {
        let mnist = matches!(task, Task::TrainMnist);
        RunConfig {
            task,
            k: 2,
            supplementary_mode: "pairwise-single".to_string(),
            flip_labels: true,
            latent_dim: if mnist { 100 } else { 8 },
            gen_hidden: if mnist { vec![240] } else { vec![32] },
            sup_hidden: None,
            batch_size: 64,
            iterations: if mnist { 20_000 } else { 6_000 },
            lr: 1e-3,
            seed: 0,
            snapshot_interval: 1_000,
            synthetic_centers: vec![vec![-2.0, 0.0], vec![2.0, 0.0]],
            synthetic_sigma: 0.1,
            synthetic_dataset_size: 8_192,
            assignment_radius: 0.5,
            digits: [0, 1],
            mnist_images: None,
            mnist_labels: None,
        }
    }

    pub fn apply_overlay(&mut self, overlay: &ConfigOverlay) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &overlay.$field {
                    self.$field = v.clone();
                }
            };
        }
        take!(k);
        take!(supplementary_mode);
        take!(flip_labels);
        take!(latent_dim);
        take!(gen_hidden);
        take!(batch_size);
        take!(iterations);
        take!(lr);
        take!(seed);
        take!(snapshot_interval);
        take!(synthetic_centers);
        take!(synthetic_sigma);
        take!(synthetic_dataset_size);
        take!(assignment_radius);
        take!(digits);
        if overlay.sup_hidden.is_some() {
            self.sup_hidden = overlay.sup_hidden.clone();
        }
        if overlay.mnist_images.is_some() {
            self.mnist_images = overlay.mnist_images.clone();
        }
        if overlay.mnist_labels.is_some() {
            self.mnist_labels = overlay.mnist_labels.clone();
        }
    }

    pub fn parse_supplementary_mode(&self) -> Result<SupplementaryMode, CliError> {
        match self.supplementary_mode.as_str() {
            "full" => Ok(SupplementaryMode::Full),
            "pairwise-single" | "pairwise_single" => Ok(SupplementaryMode::PairwiseSingle),
            "none" => Ok(SupplementaryMode::None),
            other => Err(CliError::Usage(format!(
                "unknown supplementary mode {other:?}; expected full, pairwise-single, or none"
            ))),
        }
    }

    pub fn data_dim(&self) -> usize {
        match self.task {
            Task::TrainMnist => 784,
            _ => self.synthetic_centers.first().map_or(2, Vec::len),
        }
    }

    pub fn game_config(&self) -> Result<GameConfig, CliError> {
        Ok(GameConfig {
            k: self.k,
            latent_dim: self.latent_dim,
            data_dim: self.data_dim(),
            gen_hidden: self.gen_hidden.clone(),
            sup_hidden: self.sup_hidden.clone(),
            output_activation: match self.task {
                Task::TrainMnist => OutputActivation::Sigmoid,
                _ => OutputActivation::Identity,
            },
            supplementary_mode: self.parse_supplementary_mode()?,
            flip_labels: self.flip_labels,
            batch_size: self.batch_size,
            total_iterations: self.iterations,
            snapshot_interval: self.snapshot_interval,
            seed: self.seed,
            adam: AdamHyper {
                lr: self.lr,
                ..AdamHyper::default()
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Usage(format!("config serialization failed: {e}")))?;
        std::fs::write(path, json + "\n")
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

pub fn load_overlay(path: &Path) -> Result<ConfigOverlay, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Default output root: `MIXGAN_OUT` when set, else `runs`.
pub fn output_root() -> PathBuf {
    std::env::var_os("MIXGAN_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}
