//! Generator and discriminator MLPs, latent sampling, and checkpoint I/O.
//!
//! The default image configuration is a 2-layer network (one hidden layer,
//! one output layer): generators 100 -> 240 -> 784 with sigmoid outputs and
//! discriminators with the inverse architecture 784 -> 240 -> 1. Hidden
//! width 240 puts the full two-generator model at 803,650 trainable
//! parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rng;
use crate::tape::{NodeId, Tape};
use crate::tensor::{Tensor, TensorError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("an MLP spec needs at least an input and an output size")]
    TooFewLayers,
    #[error("layer {0} has zero width")]
    ZeroWidthLayer(usize),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad checkpoint magic {observed:?}, expected {expected:?}")]
    BadMagic { expected: String, observed: String },
    #[error("checkpoint truncated while reading {context}")]
    Truncated { context: &'static str },
    #[error("tensor name is not valid UTF-8")]
    BadName,
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenActivation {
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    /// Images: outputs in (0, 1).
    Sigmoid,
    /// Unbounded synthetic data.
    Identity,
}

/// Architecture of a feed-forward fully connected network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
}

impl MlpSpec {
    pub fn new(
        layer_sizes: Vec<usize>,
        output_activation: OutputActivation,
    ) -> Result<Self, ModelError> {
        if layer_sizes.len() < 2 {
            return Err(ModelError::TooFewLayers);
        }
        if let Some(i) = layer_sizes.iter().position(|&s| s == 0) {
            return Err(ModelError::ZeroWidthLayer(i));
        }
        Ok(MlpSpec {
            layer_sizes,
            hidden_activation: HiddenActivation::Relu,
            output_activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Weights plus biases across all layers.
    pub fn parameter_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }
}

/// A multi-layer perceptron: per-layer weight matrices and bias vectors.
#[derive(Debug, Clone)]
pub struct Mlp {
    spec: MlpSpec,
    weights: Vec<Tensor>,
    biases: Vec<Tensor>,
}

impl Mlp {
    /// Builds with uniform Glorot init: weights in
    /// +/- sqrt(6/(fan_in+fan_out)), biases zero.
    pub fn init(spec: MlpSpec, seed: u64) -> Self {
        let mut r = rng::stream(seed, "init");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in spec.layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let values = (0..fan_in * fan_out)
                .map(|_| r.gen_range(-bound..bound))
                .collect();
            weights.push(Tensor::new(vec![fan_in, fan_out], values).unwrap());
            biases.push(Tensor::zeros(vec![fan_out]));
        }
        Mlp {
            spec,
            weights,
            biases,
        }
    }

    /// Reassembles a model from explicit parameters (checkpoint loading).
    pub fn from_parameters(
        spec: MlpSpec,
        weights: Vec<Tensor>,
        biases: Vec<Tensor>,
    ) -> Result<Self, ModelError> {
        let expected = spec.layer_sizes.len() - 1;
        if weights.len() != expected || biases.len() != expected {
            return Err(ModelError::TooFewLayers);
        }
        for (i, w) in spec.layer_sizes.windows(2).enumerate() {
            if weights[i].shape() != [w[0], w[1]] || biases[i].shape() != [w[1]] {
                return Err(ModelError::Tensor(TensorError::ShapeLenMismatch {
                    shape: weights[i].shape().to_vec(),
                    len: w[0] * w[1],
                }));
            }
        }
        Ok(Mlp {
            spec,
            weights,
            biases,
        })
    }

    /// All-zero parameters; with a sigmoid output every forward value is 0.5.
    pub fn zeroed(spec: MlpSpec) -> Self {
        let weights = spec
            .layer_sizes
            .windows(2)
            .map(|w| Tensor::zeros(vec![w[0], w[1]]))
            .collect();
        let biases = spec
            .layer_sizes
            .windows(2)
            .map(|w| Tensor::zeros(vec![w[1]]))
            .collect();
        Mlp {
            spec,
            weights,
            biases,
        }
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.spec.parameter_count()
    }

    /// Parameters in a fixed order: w0, b0, w1, b1, ...
    pub fn params(&self) -> Vec<&Tensor> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w, b])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w, b])
            .collect()
    }

    /// Stable parameter names aligned with [`Mlp::params`].
    pub fn param_names(&self) -> Vec<String> {
        (0..self.weights.len())
            .flat_map(|i| [format!("layer{i}.weight"), format!("layer{i}.bias")])
            .collect()
    }

    /// Forward pass without a tape, for sampling and metrics. Uses the same
    /// kernels as the taped forward, so the arithmetic is identical.
    pub fn infer(&self, x: &Tensor) -> Result<Tensor, TensorError> {
        let mut h = x.clone();
        let last = self.weights.len() - 1;
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            h = h.matmul(w)?.add_bias(b)?;
            if i < last {
                h = h.relu();
            } else if self.spec.output_activation == OutputActivation::Sigmoid {
                h = h.sigmoid();
            }
        }
        Ok(h)
    }
}

/// An [`Mlp`] whose parameters are registered as leaves on a tape, so one
/// set of parameter nodes accumulates gradients across multiple forward
/// applications in the same loss.
pub struct StagedMlp {
    weight_ids: Vec<NodeId>,
    bias_ids: Vec<NodeId>,
    output_activation: OutputActivation,
}

impl StagedMlp {
    pub fn stage(tape: &mut Tape, mlp: &Mlp) -> Self {
        StagedMlp {
            weight_ids: mlp.weights.iter().map(|w| tape.leaf(w.clone())).collect(),
            bias_ids: mlp.biases.iter().map(|b| tape.leaf(b.clone())).collect(),
            output_activation: mlp.spec.output_activation,
        }
    }

    pub fn forward(&self, tape: &mut Tape, x: NodeId) -> Result<NodeId, TensorError> {
        let mut h = x;
        let last = self.weight_ids.len() - 1;
        for (i, (&w, &b)) in self.weight_ids.iter().zip(&self.bias_ids).enumerate() {
            h = tape.matmul(h, w)?;
            h = tape.add_bias(h, b)?;
            if i < last {
                h = tape.relu(h);
            } else if self.output_activation == OutputActivation::Sigmoid {
                h = tape.sigmoid(h);
            }
        }
        Ok(h)
    }

    /// Parameter node ids in [`Mlp::params`] order.
    pub fn param_ids(&self) -> Vec<NodeId> {
        self.weight_ids
            .iter()
            .zip(&self.bias_ids)
            .flat_map(|(&w, &b)| [w, b])
            .collect()
    }

    /// Gradients for every parameter, in [`Mlp::params`] order.
    pub fn grads(&self, tape: &Tape) -> Vec<Tensor> {
        self.param_ids()
            .iter()
            .map(|&id| tape.grad_tensor(id))
            .collect()
    }
}

/// Builds a generator from its spec. Distinct seeds give distinct weights.
pub fn build_generator(spec: MlpSpec, seed: u64) -> Mlp {
    Mlp::init(spec, seed)
}

/// Builds a discriminator with the inverse architecture of the given
/// generator (layer sizes reversed, final size 1) and a sigmoid output.
pub fn build_discriminator(generator_spec: &MlpSpec, seed: u64) -> Mlp {
    let mut sizes: Vec<usize> = generator_spec.layer_sizes.iter().rev().copied().collect();
    *sizes.last_mut().unwrap() = 1;
    let spec = MlpSpec::new(sizes, OutputActivation::Sigmoid).expect("valid reversed spec");
    Mlp::init(spec, seed)
}

/// Seeded sampler for latent vectors, i.i.d. uniform on [-1, 1).
#[derive(Debug, Clone)]
pub struct LatentSampler {
    dimension: usize,
    rng: ChaCha8Rng,
}

impl LatentSampler {
    pub fn new(dimension: usize, seed: u64) -> Self {
        LatentSampler {
            dimension,
            rng: rng::stream(seed, "latent"),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// An `n x dim` batch of latent vectors.
    pub fn sample(&mut self, n: usize) -> Tensor {
        let values = (0..n * self.dimension)
            .map(|_| self.rng.gen_range(-1.0..1.0))
            .collect();
        Tensor::new(vec![n, self.dimension], values).unwrap()
    }
}

// ── Checkpoint container ────────────────────────────────────────────
//
// Layout (all integers u64 little-endian, all floats f64 little-endian):
//   magic "MGGAN1"
//   per tensor, until end of file: name length, name bytes, rank, dims,
//   values

const CHECKPOINT_MAGIC: &[u8; 6] = b"MGGAN1";

pub fn save_named_tensors(
    path: &Path,
    entries: &[(String, Tensor)],
) -> Result<(), CheckpointError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CHECKPOINT_MAGIC)?;
    for (name, tensor) in entries {
        w.write_all(&(name.len() as u64).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(tensor.shape().len() as u64).to_le_bytes())?;
        for &d in tensor.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for &v in tensor.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_named_tensors(path: &Path) -> Result<Vec<(String, Tensor)>, CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 6];
    read_exact(&mut r, &mut magic, "magic")?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic {
            expected: String::from_utf8_lossy(CHECKPOINT_MAGIC).into_owned(),
            observed: String::from_utf8_lossy(&magic).into_owned(),
        });
    }
    let mut entries = Vec::new();
    // Records run to end of file; EOF is only valid on a record boundary.
    while let Some(name_len) = read_u64_or_eof(&mut r)? {
        let mut name_bytes = vec![0u8; name_len as usize];
        read_exact(&mut r, &mut name_bytes, "name")?;
        let name = String::from_utf8(name_bytes).map_err(|_| CheckpointError::BadName)?;
        let rank = read_u64(&mut r, "rank")? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(read_u64(&mut r, "dims")? as usize);
        }
        let numel: usize = shape.iter().product();
        let mut values = Vec::with_capacity(numel);
        let mut buf = [0u8; 8];
        for _ in 0..numel {
            read_exact(&mut r, &mut buf, "values")?;
            values.push(f64::from_le_bytes(buf));
        }
        entries.push((name, Tensor::new(shape, values)?));
    }
    Ok(entries)
}

fn read_exact(
    r: &mut impl Read,
    buf: &mut [u8],
    context: &'static str,
) -> Result<(), CheckpointError> {
    r.read_exact(buf)
        .map_err(|_| CheckpointError::Truncated { context })
}

fn read_u64(r: &mut impl Read, context: &'static str) -> Result<u64, CheckpointError> {
    let mut buf = [0u8; 8];
    read_exact(r, &mut buf, context)?;
    Ok(u64::from_le_bytes(buf))
}

/// None on a clean end of file; an error if the file ends mid-field.
fn read_u64_or_eof(r: &mut impl Read) -> Result<Option<u64>, CheckpointError> {
    let mut buf = [0u8; 8];
    let mut filled = 0;
    while filled < 8 {
        let got = r
            .read(&mut buf[filled..])
            .map_err(CheckpointError::Io)?;
        if got == 0 {
            return if filled == 0 {
                Ok(None)
            } else {
                Err(CheckpointError::Truncated {
                    context: "name length",
                })
            };
        }
        filled += got;
    }
    Ok(Some(u64::from_le_bytes(buf)))
}
