//! The two-team minimax game: losses and the alternating training schedule.
//!
//! One iteration gives every sub-model a single Adam step, in a fixed
//! order: the adversarial discriminator first, then each supplementary
//! discriminator, then every generator against a snapshot of the freshly
//! updated discriminators. Discriminator updates are implemented as descent
//! on the negated objective, which is arithmetically identical to ascent.
//! The `flip_labels` switch only changes the generators' adversarial term,
//! from descent on `mean(log(1-h(fake)))` to descent on `-mean(log h(fake))`
//! (the non-saturating form); the supplementary terms are already in
//! descent-toward-target form in both modes. Every sub-step draws fresh
//! latents.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::adam::{adam_step, AdamHyper, AdamState};
use crate::data::{BatchIterator, DataError};
use crate::models::{
    build_discriminator, build_generator, load_named_tensors, save_named_tensors, CheckpointError,
    LatentSampler, Mlp, MlpSpec, ModelError, OutputActivation, StagedMlp,
};
use crate::rng;
use crate::tape::{NodeId, Tape};
use crate::tensor::{Tensor, TensorError, LOG_FLOOR};

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("expected a real batch of {expected} rows, got {got}")]
    BatchSize { expected: usize, got: usize },
    #[error("mismatched batch sizes: {0} vs {1}")]
    BatchMismatch(usize, usize),
    #[error("non-finite loss in sub-model {model} at iteration {iteration}")]
    NonFiniteLoss { model: String, iteration: u64 },
    #[error("dataset has {rows} rows, smaller than batch size {batch}")]
    DatasetTooSmall { rows: usize, batch: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// How the supplementary discriminators are arranged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupplementaryMode {
    /// K discriminators, one per generator, each trained one-vs-rest.
    Full,
    /// A single discriminator separating g1 from g2; K = 2 only.
    PairwiseSingle,
    /// No supplementary discriminators; K = 1 only (a vanilla GAN).
    None,
}

/// Full description of a game instance.
#[derive(Debug, Clone)]
pub struct GameConfig {
    pub k: usize,
    pub latent_dim: usize,
    pub data_dim: usize,
    /// Hidden widths of each generator; discriminators use the inverse
    /// architecture.
    pub gen_hidden: Vec<usize>,
    /// Hidden widths of the supplementary discriminators when they should
    /// differ from the inverse-generator default (weaker classifiers).
    pub sup_hidden: Option<Vec<usize>>,
    pub output_activation: OutputActivation,
    pub supplementary_mode: SupplementaryMode,
    pub flip_labels: bool,
    pub batch_size: usize,
    pub total_iterations: u64,
    pub snapshot_interval: u64,
    pub seed: u64,
    pub adam: AdamHyper,
}

impl GameConfig {
    /// The image setup: two generators 100 -> 240 -> 784, a single
    /// supplementary discriminator, label flipping, Adam at 1e-3.
    pub fn mnist_default(seed: u64) -> GameConfig {
        GameConfig {
            k: 2,
            latent_dim: 100,
            data_dim: 784,
            gen_hidden: vec![240],
            sup_hidden: None,
            output_activation: OutputActivation::Sigmoid,
            supplementary_mode: SupplementaryMode::PairwiseSingle,
            flip_labels: true,
            batch_size: 64,
            total_iterations: 20_000,
            snapshot_interval: 1_000,
            seed,
            adam: AdamHyper::default(),
        }
    }

    /// Desk-scale 2-D setup: two generators 8 -> 32 -> 2 with identity
    /// outputs against a two-Gaussian target.
    pub fn synthetic_default(seed: u64) -> GameConfig {
        GameConfig {
            k: 2,
            latent_dim: 8,
            data_dim: 2,
            gen_hidden: vec![32],
            sup_hidden: None,
            output_activation: OutputActivation::Identity,
            supplementary_mode: SupplementaryMode::PairwiseSingle,
            flip_labels: true,
            batch_size: 64,
            total_iterations: 6_000,
            snapshot_interval: 1_000,
            seed,
            adam: AdamHyper::default(),
        }
    }

    pub fn generator_spec(&self) -> Result<MlpSpec, ModelError> {
        let mut sizes = vec![self.latent_dim];
        sizes.extend_from_slice(&self.gen_hidden);
        sizes.push(self.data_dim);
        MlpSpec::new(sizes, self.output_activation)
    }

    /// Inverse of the generator architecture with a single sigmoid output.
    fn adversarial_spec(&self) -> Result<MlpSpec, ModelError> {
        let gen = self.generator_spec()?;
        let mut sizes: Vec<usize> = gen.layer_sizes.iter().rev().copied().collect();
        *sizes.last_mut().unwrap() = 1;
        MlpSpec::new(sizes, OutputActivation::Sigmoid)
    }

    fn supplementary_spec(&self) -> Result<MlpSpec, ModelError> {
        match &self.sup_hidden {
            None => self.adversarial_spec(),
            Some(hidden) => {
                let mut sizes = vec![self.data_dim];
                sizes.extend_from_slice(hidden);
                sizes.push(1);
                MlpSpec::new(sizes, OutputActivation::Sigmoid)
            }
        }
    }

    fn supplementary_count(&self) -> usize {
        match self.supplementary_mode {
            SupplementaryMode::Full => self.k,
            SupplementaryMode::PairwiseSingle => 1,
            SupplementaryMode::None => 0,
        }
    }

    fn validate(&self) -> Result<(), GameError> {
        if self.k == 0 {
            return Err(GameError::InvalidConfig("k must be at least 1".into()));
        }
        match self.supplementary_mode {
            SupplementaryMode::PairwiseSingle if self.k != 2 => {
                return Err(GameError::InvalidConfig(
                    "pairwise_single requires exactly 2 generators".into(),
                ));
            }
            SupplementaryMode::None if self.k != 1 => {
                return Err(GameError::InvalidConfig(
                    "running without supplementary discriminators requires k = 1".into(),
                ));
            }
            SupplementaryMode::Full if self.k < 2 => {
                return Err(GameError::InvalidConfig(
                    "full supplementary mode requires at least 2 generators".into(),
                ));
            }
            _ => {}
        }
        if self.batch_size < self.k {
            return Err(GameError::InvalidConfig(format!(
                "batch size {} cannot represent every one of {} generators",
                self.batch_size, self.k
            )));
        }
        Ok(())
    }

    /// Trainable parameters across all sub-models.
    pub fn total_parameter_count(&self) -> Result<usize, ModelError> {
        let gen = self.generator_spec()?.parameter_count();
        let adv = self.adversarial_spec()?.parameter_count();
        let sup = self.supplementary_spec()?.parameter_count();
        Ok(self.k * gen + adv + self.supplementary_count() * sup)
    }
}

/// Adam moments for each parameter tensor of one model.
struct ModelOptimizer {
    states: Vec<AdamState>,
}

impl ModelOptimizer {
    fn new(mlp: &Mlp, hyper: AdamHyper) -> Self {
        ModelOptimizer {
            states: mlp
                .params()
                .iter()
                .map(|p| AdamState::new(p.numel(), hyper))
                .collect(),
        }
    }

    fn step(&mut self, mlp: &mut Mlp, grads: &[Tensor]) {
        for ((param, grad), state) in mlp
            .params_mut()
            .into_iter()
            .zip(grads)
            .zip(self.states.iter_mut())
        {
            adam_step(param, grad.values(), state);
        }
    }
}

/// Losses of one completed iteration, in the direction each sub-model
/// minimizes them.
#[derive(Debug, Clone)]
pub struct LossRecord {
    pub iteration: u64,
    pub adversarial: f64,
    pub supplementary: Vec<f64>,
    pub generators: Vec<f64>,
}

/// A named metric snapshot taken at a consistent parameter state.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub iteration: u64,
    pub values: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub losses: Vec<LossRecord>,
    pub snapshots: Vec<Snapshot>,
}

/// The live game: models, optimizer states, and the random streams.
pub struct GameState {
    config: GameConfig,
    generators: Vec<Mlp>,
    supplementaries: Vec<Mlp>,
    adversarial: Mlp,
    gen_opt: Vec<ModelOptimizer>,
    sup_opt: Vec<ModelOptimizer>,
    adv_opt: ModelOptimizer,
    latent: LatentSampler,
    mixture_rng: ChaCha8Rng,
    iteration: u64,
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<Self, GameError> {
        config.validate()?;
        let gen_spec = config.generator_spec()?;
        let sup_spec = config.supplementary_spec()?;
        let generators: Vec<Mlp> = (0..config.k)
            .map(|i| {
                build_generator(
                    gen_spec.clone(),
                    rng::derive_seed(config.seed, &format!("model:g{}", i + 1)),
                )
            })
            .collect();
        let adversarial =
            build_discriminator(&gen_spec, rng::derive_seed(config.seed, "model:h"));
        let supplementaries: Vec<Mlp> = (0..config.supplementary_count())
            .map(|i| {
                Mlp::init(
                    sup_spec.clone(),
                    rng::derive_seed(config.seed, &format!("model:h{}", i + 1)),
                )
            })
            .collect();

        let gen_opt = generators
            .iter()
            .map(|m| ModelOptimizer::new(m, config.adam))
            .collect();
        let sup_opt = supplementaries
            .iter()
            .map(|m| ModelOptimizer::new(m, config.adam))
            .collect();
        let adv_opt = ModelOptimizer::new(&adversarial, config.adam);
        let latent = LatentSampler::new(config.latent_dim, config.seed);
        let mixture_rng = rng::stream(config.seed, "mixture");

        Ok(GameState {
            config,
            generators,
            supplementaries,
            adversarial,
            gen_opt,
            sup_opt,
            adv_opt,
            latent,
            mixture_rng,
            iteration: 0,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn generators(&self) -> &[Mlp] {
        &self.generators
    }

    pub fn supplementaries(&self) -> &[Mlp] {
        &self.supplementaries
    }

    pub fn adversarial(&self) -> &Mlp {
        &self.adversarial
    }

    /// Direct access to the sub-models, for tests and surgical setups.
    pub fn models_mut(&mut self) -> (&mut Vec<Mlp>, &mut Vec<Mlp>, &mut Mlp) {
        (
            &mut self.generators,
            &mut self.supplementaries,
            &mut self.adversarial,
        )
    }

    /// Clones of the latent and mixture streams, for predicting upcoming
    /// draws without consuming them.
    pub fn stream_probe(&self) -> (LatentSampler, ChaCha8Rng) {
        (self.latent.clone(), self.mixture_rng.clone())
    }

    /// Samples rows from generator `k` using caller-provided latents.
    pub fn generate(&self, k: usize, latents: &Tensor) -> Result<Tensor, GameError> {
        Ok(self.generators[k].infer(latents)?)
    }

    /// A fresh equi-probable mixture batch with provenance, consuming the
    /// training streams. With a single generator no choice is drawn.
    pub fn draw_mixture_batch(&mut self, n: usize) -> Result<(Tensor, Vec<usize>), GameError> {
        let assignment: Vec<usize> = if self.config.k == 1 {
            vec![0; n]
        } else {
            (0..n)
                .map(|_| self.mixture_rng.gen_range(0..self.config.k))
                .collect()
        };
        let latents = self.latent.sample(n);
        let batch = sample_mixture_with_assignment(&self.generators, &latents, &assignment)?;
        Ok((batch, assignment))
    }

    /// One adversarial discriminator update. Returns the minimized loss
    /// value, `-L_h`.
    pub fn step_adversarial(&mut self, real_batch: &Tensor) -> Result<f64, GameError> {
        let (fake, _) = self.draw_mixture_batch(self.config.batch_size)?;
        let mut tape = Tape::new();
        let staged = StagedMlp::stage(&mut tape, &self.adversarial);
        let real_id = tape.leaf(real_batch.clone());
        let fake_id = tape.leaf(fake);
        let l_h = adversarial_loss(&mut tape, &staged, real_id, fake_id)?;
        let loss = tape.neg(l_h);
        let value = tape.value(loss).item();
        self.check_finite(value, "h")?;
        tape.backward(loss)?;
        let grads = staged.grads(&tape);
        self.adv_opt.step(&mut self.adversarial, &grads);
        Ok(value)
    }

    /// One update per supplementary discriminator, each on fresh batches
    /// from every generator. Returns the minimized values, `-L_hk`.
    pub fn step_supplementaries(&mut self) -> Result<Vec<f64>, GameError> {
        let mut values = Vec::with_capacity(self.supplementaries.len());
        for si in 0..self.supplementaries.len() {
            let mut batches = Vec::with_capacity(self.config.k);
            for j in 0..self.config.k {
                let z = self.latent.sample(self.config.batch_size);
                batches.push(self.generators[j].infer(&z)?);
            }
            let mut tape = Tape::new();
            let staged = StagedMlp::stage(&mut tape, &self.supplementaries[si]);
            let batch_ids: Vec<NodeId> = batches.into_iter().map(|b| tape.leaf(b)).collect();
            let l_hk = supplementary_loss(&mut tape, &staged, &batch_ids, si)?;
            let loss = tape.neg(l_hk);
            let value = tape.value(loss).item();
            self.check_finite(value, &format!("h{}", si + 1))?;
            tape.backward(loss)?;
            let grads = staged.grads(&tape);
            self.sup_opt[si].step(&mut self.supplementaries[si], &grads);
            values.push(value);
        }
        Ok(values)
    }

    /// One update per generator against the current discriminators, which
    /// stay fixed throughout, so every generator sees the same snapshot.
    /// Returns each generator's minimized slice value.
    pub fn step_generators(&mut self) -> Result<Vec<f64>, GameError> {
        let mut values = Vec::with_capacity(self.config.k);
        for k in 0..self.config.k {
            let z = self.latent.sample(self.config.batch_size);
            let mut tape = Tape::new();
            let staged_gen = StagedMlp::stage(&mut tape, &self.generators[k]);
            let z_id = tape.leaf(z);
            let fake = staged_gen.forward(&mut tape, z_id)?;
            let staged_adv = StagedMlp::stage(&mut tape, &self.adversarial);
            let staged_sups: Vec<StagedMlp> = self
                .supplementaries
                .iter()
                .map(|s| StagedMlp::stage(&mut tape, s))
                .collect();
            let loss = generator_slice_loss(
                &mut tape,
                &staged_adv,
                &staged_sups,
                self.config.supplementary_mode,
                k,
                self.config.flip_labels,
                fake,
            )?;
            let value = tape.value(loss).item();
            self.check_finite(value, &format!("g{}", k + 1))?;
            tape.backward(loss)?;
            let grads = staged_gen.grads(&tape);
            self.gen_opt[k].step(&mut self.generators[k], &grads);
            values.push(value);
        }
        Ok(values)
    }

    /// One full iteration: adversarial update, supplementary updates,
    /// then all generator updates.
    pub fn train_step(&mut self, real_batch: &Tensor) -> Result<LossRecord, GameError> {
        if real_batch.shape()[0] != self.config.batch_size {
            return Err(GameError::BatchSize {
                expected: self.config.batch_size,
                got: real_batch.shape()[0],
            });
        }
        let adversarial = self.step_adversarial(real_batch)?;
        let supplementary = self.step_supplementaries()?;
        let generators = self.step_generators()?;
        self.iteration += 1;
        Ok(LossRecord {
            iteration: self.iteration,
            adversarial,
            supplementary,
            generators,
        })
    }

    /// Runs the configured number of iterations over shuffled real batches,
    /// recording losses every iteration and metric snapshots at iteration
    /// 0, at every `snapshot_interval`, and at the end.
    pub fn run<F>(&mut self, dataset: &Tensor, mut snapshot_fn: F) -> Result<RunOutput, GameError>
    where
        F: FnMut(&GameState, u64) -> Vec<(String, f64)>,
    {
        let rows = dataset.shape()[0];
        if rows < self.config.batch_size {
            return Err(GameError::DatasetTooSmall {
                rows,
                batch: self.config.batch_size,
            });
        }
        let mut batches = BatchIterator::new(rows, self.config.batch_size, self.config.seed)?;
        let mut output = RunOutput::default();
        let interval = self.config.snapshot_interval;
        output.snapshots.push(Snapshot {
            iteration: self.iteration,
            values: snapshot_fn(self, self.iteration),
        });
        for _ in 0..self.config.total_iterations {
            let real = batches.next_batch(dataset);
            let record = self.train_step(&real)?;
            let at_interval = interval > 0 && record.iteration % interval == 0;
            let last = record.iteration == self.config.total_iterations;
            output.losses.push(record);
            if at_interval || last {
                output.snapshots.push(Snapshot {
                    iteration: self.iteration,
                    values: snapshot_fn(self, self.iteration),
                });
            }
        }
        Ok(output)
    }

    fn check_finite(&self, value: f64, model: &str) -> Result<(), GameError> {
        if value.is_finite() {
            Ok(())
        } else {
            Err(GameError::NonFiniteLoss {
                model: model.to_string(),
                iteration: self.iteration,
            })
        }
    }

    // ── Checkpointing ───────────────────────────────────────────────

    /// Writes all model parameters plus a meta tensor into the binary
    /// container. Optimizer moments are not persisted: a checkpoint serves
    /// sampling and evaluation, while training reproducibility comes from
    /// (config, seed).
    pub fn save_checkpoint(&self, path: &Path) -> Result<(), CheckpointError> {
        let meta = Tensor::new(
            vec![6],
            vec![
                1.0, // container revision
                self.config.k as f64,
                self.config.latent_dim as f64,
                self.config.data_dim as f64,
                match self.config.output_activation {
                    OutputActivation::Sigmoid => 0.0,
                    OutputActivation::Identity => 1.0,
                },
                self.iteration as f64,
            ],
        )
        .expect("fixed meta shape");
        let mut entries = vec![("meta".to_string(), meta)];
        for (i, g) in self.generators.iter().enumerate() {
            push_model_entries(&mut entries, &format!("g{}", i + 1), g);
        }
        push_model_entries(&mut entries, "h", &self.adversarial);
        for (i, s) in self.supplementaries.iter().enumerate() {
            push_model_entries(&mut entries, &format!("h{}", i + 1), s);
        }
        save_named_tensors(path, &entries)
    }
}

fn push_model_entries(entries: &mut Vec<(String, Tensor)>, prefix: &str, mlp: &Mlp) {
    for (name, param) in mlp.param_names().into_iter().zip(mlp.params()) {
        entries.push((format!("{prefix}.{name}"), param.clone()));
    }
}

/// Generators reconstructed from a checkpoint, for sampling.
pub struct GeneratorBundle {
    pub generators: Vec<Mlp>,
    pub latent_dim: usize,
    pub data_dim: usize,
    pub output_activation: OutputActivation,
    pub iteration: u64,
}

impl GeneratorBundle {
    pub fn k(&self) -> usize {
        self.generators.len()
    }

    /// Samples `n` rows from one generator (0-based index).
    pub fn sample_generator(&self, index: usize, n: usize, seed: u64) -> Result<Tensor, GameError> {
        let mut latents = LatentSampler::new(self.latent_dim, seed);
        Ok(self.generators[index].infer(&latents.sample(n))?)
    }

    /// Samples `n` rows from the equi-probable mixture, with provenance.
    pub fn sample_mixture(&self, n: usize, seed: u64) -> Result<(Tensor, Vec<usize>), GameError> {
        let mut latents = LatentSampler::new(self.latent_dim, seed);
        let mut chooser = rng::stream(seed, "mixture");
        let assignment: Vec<usize> = if self.k() == 1 {
            vec![0; n]
        } else {
            (0..n).map(|_| chooser.gen_range(0..self.k())).collect()
        };
        let batch = sample_mixture_with_assignment(&self.generators, &latents.sample(n), &assignment)?;
        Ok((batch, assignment))
    }
}

/// Loads the generator stack back out of a checkpoint file.
pub fn load_generators(path: &Path) -> Result<GeneratorBundle, CheckpointError> {
    let entries = load_named_tensors(path)?;
    let meta = entries
        .iter()
        .find(|(n, _)| n == "meta")
        .ok_or(CheckpointError::Truncated { context: "meta" })?
        .1
        .values()
        .to_vec();
    if meta.len() < 6 {
        return Err(CheckpointError::Truncated { context: "meta" });
    }
    let k = meta[1] as usize;
    let latent_dim = meta[2] as usize;
    let data_dim = meta[3] as usize;
    let output_activation = if meta[4] == 0.0 {
        OutputActivation::Sigmoid
    } else {
        OutputActivation::Identity
    };
    let iteration = meta[5] as u64;

    let mut generators = Vec::with_capacity(k);
    for i in 0..k {
        let prefix = format!("g{}.", i + 1);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for layer in 0.. {
            let wname = format!("{prefix}layer{layer}.weight");
            let bname = format!("{prefix}layer{layer}.bias");
            let found = (
                entries.iter().find(|(n, _)| *n == wname),
                entries.iter().find(|(n, _)| *n == bname),
            );
            match found {
                (Some((_, w)), Some((_, b))) => {
                    weights.push(w.clone());
                    biases.push(b.clone());
                }
                _ => break,
            }
        }
        if weights.is_empty() {
            return Err(CheckpointError::Truncated {
                context: "generator layers",
            });
        }
        let mut sizes: Vec<usize> = vec![weights[0].shape()[0]];
        sizes.extend(weights.iter().map(|w| w.shape()[1]));
        let spec = MlpSpec::new(sizes, output_activation).map_err(|_| {
            CheckpointError::Truncated {
                context: "generator spec",
            }
        })?;
        let mlp = Mlp::from_parameters(spec, weights, biases).map_err(|_| {
            CheckpointError::Truncated {
                context: "generator params",
            }
        })?;
        generators.push(mlp);
    }
    Ok(GeneratorBundle {
        generators,
        latent_dim,
        data_dim,
        output_activation,
        iteration,
    })
}

// ── Loss construction ───────────────────────────────────────────────

/// `mean(log h(real)) + mean(log(1-h(fake)))`, the adversarial objective
/// `L_h` the discriminator maximizes.
pub fn adversarial_loss(
    tape: &mut Tape,
    h: &StagedMlp,
    real: NodeId,
    fake: NodeId,
) -> Result<NodeId, GameError> {
    let (nr, _) = tape.value(real).dims2("adversarial_loss")?;
    let (nf, _) = tape.value(fake).dims2("adversarial_loss")?;
    if nr != nf {
        return Err(GameError::BatchMismatch(nr, nf));
    }
    let on_real = h.forward(tape, real)?;
    let log_real = tape.log_clamped(on_real, LOG_FLOOR);
    let real_term = tape.mean(log_real);
    let on_fake = h.forward(tape, fake)?;
    let miss_fake = tape.one_minus(on_fake);
    let log_fake = tape.log_clamped(miss_fake, LOG_FLOOR);
    let fake_term = tape.mean(log_fake);
    Ok(tape.add(real_term, fake_term)?)
}

/// `mean(log h_k(x_own)) + Σ_{j != own} mean(log(1-h_k(x_j)))`, the k-th
/// supplementary objective `L_hk` over one batch per generator. With two
/// batches and `own = 0` this is the pairwise single-discriminator loss.
pub fn supplementary_loss(
    tape: &mut Tape,
    h_k: &StagedMlp,
    batches_by_generator: &[NodeId],
    own: usize,
) -> Result<NodeId, GameError> {
    let first = tape.value(batches_by_generator[0]).shape()[0];
    for &b in batches_by_generator {
        let rows = tape.value(b).shape()[0];
        if rows != first {
            return Err(GameError::BatchMismatch(first, rows));
        }
    }
    let mut total: Option<NodeId> = None;
    for (j, &batch) in batches_by_generator.iter().enumerate() {
        let out = h_k.forward(tape, batch)?;
        let term = if j == own {
            let lp = tape.log_clamped(out, LOG_FLOOR);
            tape.mean(lp)
        } else {
            let miss = tape.one_minus(out);
            let lq = tape.log_clamped(miss, LOG_FLOOR);
            tape.mean(lq)
        };
        total = Some(match total {
            Some(t) => tape.add(t, term)?,
            None => term,
        });
    }
    Ok(total.expect("at least one generator batch"))
}

/// Generator `k`'s slice of the value function as a descent objective on
/// its own samples `fake`: the adversarial term
///
/// - analytic: `mean(log(1-h(fake)))`
/// - flipped:  `-mean(log h(fake))`
///
/// minus its supplementary terms, i.e. plus `-mean(log h_k(fake))` and
/// `-mean(log(1-h_j(fake)))` for j != k (or the single-discriminator
/// analogues in pairwise mode).
pub fn generator_slice_loss(
    tape: &mut Tape,
    adversarial: &StagedMlp,
    supplementaries: &[StagedMlp],
    mode: SupplementaryMode,
    k: usize,
    flip_labels: bool,
    fake: NodeId,
) -> Result<NodeId, GameError> {
    let h_out = adversarial.forward(tape, fake)?;
    let mut total = if flip_labels {
        let lp = tape.log_clamped(h_out, LOG_FLOOR);
        let m = tape.mean(lp);
        tape.neg(m)
    } else {
        let miss = tape.one_minus(h_out);
        let lq = tape.log_clamped(miss, LOG_FLOOR);
        tape.mean(lq)
    };

    fn sup_term(
        tape: &mut Tape,
        sup: &StagedMlp,
        fake: NodeId,
        claims_own: bool,
    ) -> Result<NodeId, GameError> {
        let out = sup.forward(tape, fake)?;
        let term = if claims_own {
            // Cooperate with the owning discriminator: push h_k(fake) up.
            let lp = tape.log_clamped(out, LOG_FLOOR);
            let m = tape.mean(lp);
            tape.neg(m)
        } else {
            // Push the other discriminators' responses down.
            let miss = tape.one_minus(out);
            let lq = tape.log_clamped(miss, LOG_FLOOR);
            let m = tape.mean(lq);
            tape.neg(m)
        };
        Ok(term)
    }

    match mode {
        SupplementaryMode::None => {}
        SupplementaryMode::Full => {
            for (j, sup) in supplementaries.iter().enumerate() {
                let term = sup_term(tape, sup, fake, j == k)?;
                total = tape.add(total, term)?;
            }
        }
        SupplementaryMode::PairwiseSingle => {
            let term = sup_term(tape, &supplementaries[0], fake, k == 0)?;
            total = tape.add(total, term)?;
        }
    }
    Ok(total)
}

/// Maps each latent row through the generator chosen by `assignment`.
/// Test hook behind [`GameState::draw_mixture_batch`]; a round-robin
/// assignment puts exactly one sample on each generator.
pub fn sample_mixture_with_assignment(
    generators: &[Mlp],
    latents: &Tensor,
    assignment: &[usize],
) -> Result<Tensor, GameError> {
    let (n, _) = latents.dims2("sample_mixture")?;
    if assignment.len() != n {
        return Err(GameError::BatchMismatch(assignment.len(), n));
    }
    let data_dim = generators[0].spec().output_dim();
    let mut out = Tensor::zeros(vec![n, data_dim]);
    for (g_idx, generator) in generators.iter().enumerate() {
        let rows: Vec<usize> = assignment
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == g_idx)
            .map(|(i, _)| i)
            .collect();
        if rows.is_empty() {
            continue;
        }
        let sub = latents.gather_rows(&rows);
        let mapped = generator.infer(&sub)?;
        for (local, &row) in rows.iter().enumerate() {
            let src = mapped.row(local).to_vec();
            out.values_mut()[row * data_dim..(row + 1) * data_dim].copy_from_slice(&src);
        }
    }
    Ok(out)
}

/// Tape-free `L_h` evaluation with the same clamping as the taped loss.
pub fn adversarial_loss_value(h: &Mlp, real: &Tensor, fake: &Tensor) -> Result<f64, GameError> {
    let on_real = h.infer(real)?.log_clamped(LOG_FLOOR).mean();
    let on_fake = h.infer(fake)?;
    let ones = Tensor::filled(on_fake.shape().to_vec(), 1.0);
    let miss = ones.sub(&on_fake)?.log_clamped(LOG_FLOOR).mean();
    Ok(on_real + miss)
}
