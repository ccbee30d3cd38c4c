//! Minimal neural-network substrate: MLPs with ELU activations, a
//! diagonal-Gaussian policy head, reverse-mode gradients and Adam.

mod adam;
mod checkpoint;
mod gaussian;
mod mlp;

pub use adam::AdamState;
pub use checkpoint::{Checkpoint, CheckpointRecord, NetRole};
pub use gaussian::{gaussian_kl, GaussianHead};
pub use mlp::{elu, elu_deriv, Mlp, MlpCache, MlpGrads};

use ndarray::{LinalgScalar, ScalarOperand};

/// Scalar types the network stack can run on.
///
/// `f64` is used by the gradient-check suite (finite differences need the
/// headroom), `f32` by the training loops.
pub trait Scalar:
    num_traits::Float
    + num_traits::NumAssignOps
    + LinalgScalar
    + ScalarOperand
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Tag written into checkpoint files.
    const DTYPE: u8;
    const BYTE_WIDTH: usize;

    fn from_f64(x: f64) -> Self;
    fn as_f64(self) -> f64;
    fn write_le(self, out: &mut Vec<u8>);
    /// Reads `BYTE_WIDTH` bytes, little endian.
    fn read_le(bytes: &[u8]) -> Self;
}

impl Scalar for f32 {
    const DTYPE: u8 = 1;
    const BYTE_WIDTH: usize = 4;

    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes[..4].try_into().unwrap())
    }
}

impl Scalar for f64 {
    const DTYPE: u8 = 2;
    const BYTE_WIDTH: usize = 8;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes[..8].try_into().unwrap())
    }
}
