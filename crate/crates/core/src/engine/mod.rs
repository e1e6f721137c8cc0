//! CPU tensors, layer kernels and the compiled forward pass.

mod conv;
mod network;
mod ops;
mod tensor;

use std::fmt;
use std::str::FromStr;

pub use conv::{
    batch_norm, conv2d, conv2d_direct, conv2d_gemm, fold_batchnorm, output_extent, ConvAlgorithm, ConvSpec,
    BATCHNORM_EPSILON,
};
pub use network::{CompileOptions, CompiledNetwork, HeadOutput};
pub use ops::{maxpool, route_concat, shortcut_add, upsample, upsample2x};
pub use tensor::Tensor;

/// Slope of the negative half of [`Activation::Leaky`].
pub const LEAKY_SLOPE: f32 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Linear,
    Leaky,
    Logistic,
    Relu,
}

impl Activation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Leaky => "leaky",
            Activation::Logistic => "logistic",
            Activation::Relu => "relu",
        }
    }

    #[inline]
    pub fn apply(&self, x: f32) -> f32 {
        match self {
            Activation::Linear => x,
            Activation::Leaky => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_SLOPE * x
                }
            }
            Activation::Logistic => sigmoid(x),
            Activation::Relu => x.max(0.0),
        }
    }

    pub fn apply_slice(&self, values: &mut [f32]) {
        match self {
            Activation::Linear => {}
            Activation::Leaky => values.iter_mut().for_each(|v| {
                if *v < 0.0 {
                    *v *= LEAKY_SLOPE
                }
            }),
            _ => values.iter_mut().for_each(|v| *v = self.apply(*v)),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "linear" => Activation::Linear,
            "leaky" => Activation::Leaky,
            "logistic" => Activation::Logistic,
            "relu" => Activation::Relu,
            other => return Err(format!("unknown activation `{other}`")),
        })
    }
}

#[inline]
pub fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}
