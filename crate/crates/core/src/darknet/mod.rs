//! Darknet model files: the `.cfg` network description and the `.weights`
//! parameter blob.

mod cfg;
pub mod reference;
mod weights;

pub use cfg::{
    load_config, parse_config, ConfigWarning, ConvParams, Layer, LayerKind, LayerSpec, NetHeader, NetworkConfig,
    Shape, YoloParams,
};
pub use weights::{
    conv_block_floats, load_weights, load_weights_file, payload_float_count, BatchNorm, ConvBias, ConvWeights,
    WeightStore, WeightsHeader,
};
