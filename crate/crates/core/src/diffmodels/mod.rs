//! Dense MLP kernel with exact reverse-mode gradients, Adam, and MSE fitting.

mod adam;
mod checkpoint;
mod fit;
mod matrix;
mod mlp;

pub use adam::AdamState;
pub use checkpoint::{MAGIC as CHECKPOINT_MAGIC, VERSION as CHECKPOINT_VERSION};
pub use fit::{fit_mse, mse, two_stage_fit, FitOptions, DEFAULT_MAX_FULL_BATCH};
pub use matrix::{axpy, dot, DenseMatrix};
pub use mlp::{layer_sizes, BatchTrace, MlpModel};
