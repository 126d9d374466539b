//! Multi-generator adversarial training with mode separation.
//!
//! One adversarial discriminator pits a mixture of `K` generators against
//! real data while supplementary discriminators push the generator
//! distributions apart, so the mixture covers the target and each generator
//! claims a distinct mode. The building blocks:
//!
//! - [`tensor`] / [`tape`] / [`adam`]: a dense f64 tensor type, reverse-mode
//!   automatic differentiation, and the Adam optimizer, enough for 2-layer
//!   MLPs.
//! - [`divergences`]: exact finite-support KL/JS machinery and the three
//!   algebraic routes to the game's value function, used as the numerical
//!   oracle for everything else.
//! - [`models`]: generator/discriminator builders, latent sampling, and a
//!   binary checkpoint container.
//! - [`game`]: the losses and the alternating training schedule, in both the
//!   analytical and label-flipped forms.
//! - [`data`]: synthetic Gaussian-mixture targets and the MNIST IDX loader.
//! - [`metrics`]: mode-ownership histograms, separation reports, and PGM/CSV
//!   exporters.
//! - [`verify`]: the self-check suite behind `mixgan --task verify`.

pub mod adam;
pub mod data;
pub mod divergences;
pub mod game;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod tape;
pub mod tensor;
pub mod verify;

pub use tensor::{Tensor, TensorError};
