//! Real-data sources: synthetic Gaussian mixtures and MNIST IDX files.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::rng;
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad IDX magic: expected {expected:#010x}, observed {observed:#010x}")]
    BadMagic { expected: u32, observed: u32 },
    #[error("IDX payload truncated: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("images and labels disagree: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("label {value} at index {index} outside 0..=9")]
    BadLabel { index: usize, value: u8 },
    #[error("digit filter {a},{b} needs two distinct digits in 0..=9")]
    InvalidDigitPair { a: u8, b: u8 },
    #[error("no images matched the digit filter {{{a},{b}}}")]
    EmptyFilter { a: u8, b: u8 },
    #[error("batch size {batch} exceeds dataset size {rows}")]
    BatchTooLarge { batch: usize, rows: usize },
    #[error("invalid gaussian mixture spec: {0}")]
    InvalidSpec(String),
}

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// A mixture of isotropic Gaussian modes in R^d.
#[derive(Debug, Clone)]
pub struct GaussianMixtureSpec {
    pub centers: Vec<Vec<f64>>,
    pub sigmas: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussianMixtureSpec {
    pub fn new(
        centers: Vec<Vec<f64>>,
        sigmas: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self, DataError> {
        if centers.is_empty() {
            return Err(DataError::InvalidSpec("no modes".into()));
        }
        let d = centers[0].len();
        if centers.iter().any(|c| c.len() != d) {
            return Err(DataError::InvalidSpec("centers of unequal dimension".into()));
        }
        if sigmas.len() != centers.len() || weights.len() != centers.len() {
            return Err(DataError::InvalidSpec(
                "centers, sigmas, weights must have equal length".into(),
            ));
        }
        if sigmas.iter().any(|&s| s.is_nan() || s <= 0.0) {
            return Err(DataError::InvalidSpec("sigma must be positive".into()));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(DataError::InvalidSpec("weights must sum to 1".into()));
        }
        Ok(GaussianMixtureSpec {
            centers,
            sigmas,
            weights,
        })
    }

    /// Desk-scale default: two modes at (-2, 0) and (+2, 0), sigma 0.1,
    /// equal weights.
    pub fn two_modes_default() -> Self {
        GaussianMixtureSpec::new(
            vec![vec![-2.0, 0.0], vec![2.0, 0.0]],
            vec![0.1, 0.1],
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    pub fn dimension(&self) -> usize {
        self.centers[0].len()
    }
}

/// `n` i.i.d. draws: pick a mode by weight, add isotropic Gaussian noise.
/// Returns the batch and the mode index of each row.
pub fn sample_gaussian_mixture(
    spec: &GaussianMixtureSpec,
    n: usize,
    seed: u64,
) -> (Tensor, Vec<usize>) {
    let mut r = rng::stream(seed, "data");
    sample_gaussian_mixture_with(spec, n, &mut r)
}

pub fn sample_gaussian_mixture_with(
    spec: &GaussianMixtureSpec,
    n: usize,
    r: &mut ChaCha8Rng,
) -> (Tensor, Vec<usize>) {
    let d = spec.dimension();
    let mode_picker = WeightedIndex::new(&spec.weights).expect("validated weights");
    let mut values = Vec::with_capacity(n * d);
    let mut provenance = Vec::with_capacity(n);
    for _ in 0..n {
        let mode = mode_picker.sample(r);
        provenance.push(mode);
        let sigma = spec.sigmas[mode];
        for &c in &spec.centers[mode] {
            let noise: f64 = r.sample(StandardNormal);
            values.push(c + sigma * noise);
        }
    }
    (Tensor::new(vec![n, d], values).unwrap(), provenance)
}

/// Images as an `n x 784` matrix in [0, 1] plus digit labels.
#[derive(Debug, Clone)]
pub struct ImageDataset {
    pub images: Tensor,
    pub labels: Vec<u8>,
}

impl ImageDataset {
    pub fn new(images: Tensor, labels: Vec<u8>) -> Result<Self, DataError> {
        let rows = images.shape()[0];
        if rows != labels.len() {
            return Err(DataError::CountMismatch {
                images: rows,
                labels: labels.len(),
            });
        }
        if let Some((index, &value)) = labels.iter().enumerate().find(|(_, &l)| l > 9) {
            return Err(DataError::BadLabel { index, value });
        }
        Ok(ImageDataset { images, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn read_be_u32(r: &mut impl Read) -> Result<u32, DataError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(DataError::Io)?;
    Ok(u32::from_be_bytes(buf))
}

fn read_payload(r: &mut impl Read, expected: usize) -> Result<Vec<u8>, DataError> {
    let mut data = Vec::with_capacity(expected);
    r.take(expected as u64).read_to_end(&mut data)?;
    if data.len() != expected {
        return Err(DataError::Truncated {
            expected,
            got: data.len(),
        });
    }
    Ok(data)
}

/// Parses an IDX image file (big-endian magic 0x00000803, count, rows,
/// cols, then unsigned bytes) into an `n x (rows*cols)` matrix rescaled
/// to [0, 1] by /255.
pub fn load_idx_images(path: &Path) -> Result<Tensor, DataError> {
    let mut r = BufReader::new(File::open(path)?);
    let magic = read_be_u32(&mut r)?;
    if magic != IMAGE_MAGIC {
        return Err(DataError::BadMagic {
            expected: IMAGE_MAGIC,
            observed: magic,
        });
    }
    let count = read_be_u32(&mut r)? as usize;
    let rows = read_be_u32(&mut r)? as usize;
    let cols = read_be_u32(&mut r)? as usize;
    let data = read_payload(&mut r, count * rows * cols)?;
    let values = data.iter().map(|&b| f64::from(b) / 255.0).collect();
    Ok(Tensor::new(vec![count, rows * cols], values).unwrap())
}

/// Parses an IDX label file (magic 0x00000801, count, bytes).
pub fn load_idx_labels(path: &Path) -> Result<Vec<u8>, DataError> {
    let mut r = BufReader::new(File::open(path)?);
    let magic = read_be_u32(&mut r)?;
    if magic != LABEL_MAGIC {
        return Err(DataError::BadMagic {
            expected: LABEL_MAGIC,
            observed: magic,
        });
    }
    let count = read_be_u32(&mut r)? as usize;
    read_payload(&mut r, count)
}

/// Keeps only images labeled `a` or `b`, preserving order. Labels are used
/// for filtering only; training consumers receive images alone.
pub fn filter_digits(ds: &ImageDataset, a: u8, b: u8) -> Result<ImageDataset, DataError> {
    if a == b || a > 9 || b > 9 {
        return Err(DataError::InvalidDigitPair { a, b });
    }
    let keep: Vec<usize> = ds
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == a || l == b)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(DataError::EmptyFilter { a, b });
    }
    let images = ds.images.gather_rows(&keep);
    let labels = keep.iter().map(|&i| ds.labels[i]).collect();
    ImageDataset::new(images, labels)
}

/// Epoch-wise shuffling batch source over the rows of a matrix. Each epoch
/// applies a fresh seeded permutation; the final partial batch is dropped.
pub struct BatchIterator {
    order: Vec<usize>,
    position: usize,
    batch_size: usize,
    rng: ChaCha8Rng,
}

impl BatchIterator {
    pub fn new(rows: usize, batch_size: usize, seed: u64) -> Result<Self, DataError> {
        if batch_size > rows {
            return Err(DataError::BatchTooLarge {
                batch: batch_size,
                rows,
            });
        }
        let mut it = BatchIterator {
            order: (0..rows).collect(),
            position: 0,
            batch_size,
            rng: rng::stream(seed, "shuffle"),
        };
        it.reshuffle();
        Ok(it)
    }

    fn reshuffle(&mut self) {
        // Fisher-Yates over the row order.
        for i in (1..self.order.len()).rev() {
            let j = self.rng.gen_range(0..=i);
            self.order.swap(i, j);
        }
        self.position = 0;
    }

    /// Row indices of the next batch, reshuffling at epoch boundaries.
    pub fn next_indices(&mut self) -> &[usize] {
        if self.position + self.batch_size > self.order.len() {
            self.reshuffle();
        }
        let batch = &self.order[self.position..self.position + self.batch_size];
        self.position += self.batch_size;
        batch
    }

    /// The next batch gathered out of `data`.
    pub fn next_batch(&mut self, data: &Tensor) -> Tensor {
        let indices = self.next_indices().to_vec();
        data.gather_rows(&indices)
    }
}
