//! Darknet `.weights` loading.
//!
//! Little-endian throughout. The file starts with three `i32` (major, minor,
//! revision) and an images-seen counter that is a `u64` when
//! `major * 10 + minor >= 2` and a `u32` otherwise. Then come raw `f32`
//! blocks, one per convolutional layer in layer order:
//!
//! * with `batch_normalize=1`: beta, gamma, running mean, running variance
//!   (each `filters` long), then the kernel;
//! * without: bias (`filters` long), then the kernel.
//!
//! Kernels are laid out `[out_channels][in_channels][size][size]`. The
//! payload has to be consumed exactly: short files and trailing bytes are
//! both errors.

use std::path::Path;

use super::cfg::{ConvParams, Layer, NetworkConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightsHeader {
    pub major: i32,
    pub minor: i32,
    pub revision: i32,
    pub seen: u64,
}

impl WeightsHeader {
    /// Header of the files written by current Darknet (`0.2.0`, 64-bit seen).
    pub const CURRENT: WeightsHeader = WeightsHeader { major: 0, minor: 2, revision: 0, seen: 0 };

    /// Size in bytes of the header for this version.
    pub fn byte_len(&self) -> usize {
        if self.wide_seen() {
            20
        } else {
            16
        }
    }

    fn wide_seen(&self) -> bool {
        self.major * 10 + self.minor >= 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub beta: Vec<f32>,
    pub gamma: Vec<f32>,
    pub mean: Vec<f32>,
    pub variance: Vec<f32>,
}

impl BatchNorm {
    /// `gamma = 1, beta = 0, mean = 0, variance = 1`.
    pub fn identity(channels: usize) -> Self {
        BatchNorm {
            beta: vec![0.0; channels],
            gamma: vec![1.0; channels],
            mean: vec![0.0; channels],
            variance: vec![1.0; channels],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvBias {
    Plain(Vec<f32>),
    BatchNorm(BatchNorm),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights {
    pub out_channels: usize,
    pub in_channels: usize,
    pub size: usize,
    pub bias: ConvBias,
    /// `[out_channels][in_channels][size][size]`.
    pub kernel: Vec<f32>,
}

impl ConvWeights {
    pub fn zeros(params: &ConvParams, in_channels: usize) -> Self {
        let out = params.filters;
        let bias = if params.batch_normalize {
            ConvBias::BatchNorm(BatchNorm::identity(out))
        } else {
            ConvBias::Plain(vec![0.0; out])
        };
        ConvWeights {
            out_channels: out,
            in_channels,
            size: params.size,
            bias,
            kernel: vec![0.0; out * in_channels * params.size * params.size],
        }
    }

    pub fn kernel_len(&self) -> usize {
        self.out_channels * self.in_channels * self.size * self.size
    }
}

/// Number of `f32` values stored for one convolutional layer.
pub fn conv_block_floats(params: &ConvParams, in_channels: usize) -> usize {
    let per_channel = if params.batch_normalize { 4 } else { 1 };
    params.filters * per_channel + params.filters * in_channels * params.size * params.size
}

/// Total `f32` payload a weight file for `config` must contain.
pub fn payload_float_count(config: &NetworkConfig) -> usize {
    config
        .layers
        .iter()
        .map(|spec| match &spec.layer {
            Layer::Convolutional(p) => conv_block_floats(p, spec.input_shape.channels),
            _ => 0,
        })
        .sum()
}

/// Loaded parameters, indexed by layer. Non-convolutional layers hold `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStore {
    pub header: WeightsHeader,
    pub layers: Vec<Option<ConvWeights>>,
}

impl WeightStore {
    /// Builds a store from in-memory blocks, checking them against `config`.
    pub fn new(header: WeightsHeader, layers: Vec<Option<ConvWeights>>, config: &NetworkConfig) -> Result<Self> {
        let store = WeightStore { header, layers };
        store.check(config)?;
        Ok(store)
    }

    /// All-zero kernels and biases, identity batch-norm.
    pub fn zeros(config: &NetworkConfig) -> Self {
        let layers = config
            .layers
            .iter()
            .map(|spec| match &spec.layer {
                Layer::Convolutional(p) => Some(ConvWeights::zeros(p, spec.input_shape.channels)),
                _ => None,
            })
            .collect();
        WeightStore { header: WeightsHeader::CURRENT, layers }
    }

    pub fn conv(&self, layer: usize) -> Option<&ConvWeights> {
        self.layers.get(layer).and_then(Option::as_ref)
    }

    pub fn float_count(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .map(|w| {
                let bias = match &w.bias {
                    ConvBias::Plain(b) => b.len(),
                    ConvBias::BatchNorm(bn) => bn.beta.len() + bn.gamma.len() + bn.mean.len() + bn.variance.len(),
                };
                bias + w.kernel.len()
            })
            .sum()
    }

    /// Serializes in the Darknet layout read by [`load_weights`].
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.header.byte_len() + 4 * self.float_count());
        out.extend_from_slice(&self.header.major.to_le_bytes());
        out.extend_from_slice(&self.header.minor.to_le_bytes());
        out.extend_from_slice(&self.header.revision.to_le_bytes());
        if self.header.wide_seen() {
            out.extend_from_slice(&self.header.seen.to_le_bytes());
        } else {
            out.extend_from_slice(&(self.header.seen as u32).to_le_bytes());
        }
        let mut put = |values: &[f32]| values.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
        for w in self.layers.iter().flatten() {
            match &w.bias {
                ConvBias::Plain(b) => put(b),
                ConvBias::BatchNorm(bn) => {
                    put(&bn.beta);
                    put(&bn.gamma);
                    put(&bn.mean);
                    put(&bn.variance);
                }
            }
            put(&w.kernel);
        }
        out
    }

    fn check(&self, config: &NetworkConfig) -> Result<()> {
        if self.layers.len() != config.layers.len() {
            return Err(Error::Load {
                layer: None,
                byte_offset: 0,
                message: format!("{} weight slots for {} layers", self.layers.len(), config.layers.len()),
            });
        }
        for (index, (spec, slot)) in config.layers.iter().zip(&self.layers).enumerate() {
            let bad = |message: String| Error::Load { layer: Some(index), byte_offset: 0, message };
            match (&spec.layer, slot) {
                (Layer::Convolutional(p), Some(w)) => {
                    let in_c = spec.input_shape.channels;
                    if (w.out_channels, w.in_channels, w.size) != (p.filters, in_c, p.size) {
                        return Err(bad(format!(
                            "block is {}x{}x{}x{}, layer needs {}x{in_c}x{}x{}",
                            w.out_channels, w.in_channels, w.size, w.size, p.filters, p.size, p.size
                        )));
                    }
                    if w.kernel.len() != w.kernel_len() {
                        return Err(bad(format!("kernel holds {} values, expected {}", w.kernel.len(), w.kernel_len())));
                    }
                    match (&w.bias, p.batch_normalize) {
                        (ConvBias::Plain(b), false) if b.len() == p.filters => {}
                        (ConvBias::BatchNorm(bn), true)
                            if [&bn.beta, &bn.gamma, &bn.mean, &bn.variance].iter().all(|v| v.len() == p.filters) =>
                        {
                            check_variance(&bn.variance, index, 0)?;
                        }
                        _ => return Err(bad("bias block does not match batch_normalize / filters".into())),
                    }
                }
                (Layer::Convolutional(_), None) => return Err(bad("missing weights".into())),
                (_, Some(_)) => return Err(bad("weights given for a layer without parameters".into())),
                (_, None) => {}
            }
        }
        Ok(())
    }
}

fn check_variance(variance: &[f32], layer: usize, byte_offset: u64) -> Result<()> {
    if let Some((c, v)) = variance.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0) {
        return Err(Error::Load {
            layer: Some(layer),
            byte_offset,
            message: format!("batch-norm variance of channel {c} is {v}; must be non-negative"),
        });
    }
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let chunk = self.bytes.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(chunk)
    }

    fn header_field<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let at = self.pos as u64;
        self.take(N).map(|c| c.try_into().expect("length checked")).ok_or_else(|| Error::Load {
            layer: None,
            byte_offset: at,
            message: format!("file ends inside the header ({what})"),
        })
    }

    fn floats(&mut self, n: usize, layer: usize, what: &str) -> Result<Vec<f32>> {
        let at = self.pos as u64;
        let remaining = self.bytes.len() - self.pos;
        let chunk = self.take(n * 4).ok_or_else(|| Error::Load {
            layer: Some(layer),
            byte_offset: at,
            message: format!("truncated: {what} needs {n} floats ({} bytes), only {remaining} bytes remain", n * 4),
        })?;
        Ok(chunk.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect())
    }
}

/// Parses a weight file for `config`.
pub fn load_weights(bytes: &[u8], config: &NetworkConfig) -> Result<WeightStore> {
    let mut reader = Reader { bytes, pos: 0 };
    let major = i32::from_le_bytes(reader.header_field("major")?);
    let minor = i32::from_le_bytes(reader.header_field("minor")?);
    let revision = i32::from_le_bytes(reader.header_field("revision")?);
    if !(0..1000).contains(&major) || !(0..1000).contains(&minor) || revision < 0 {
        return Err(Error::Load {
            layer: None,
            byte_offset: 0,
            message: format!("unsupported weights version {major}.{minor}.{revision}"),
        });
    }
    let mut header = WeightsHeader { major, minor, revision, seen: 0 };
    header.seen = if header.wide_seen() {
        u64::from_le_bytes(reader.header_field("seen")?)
    } else {
        u32::from_le_bytes(reader.header_field("seen")?) as u64
    };

    let mut layers = Vec::with_capacity(config.layers.len());
    let mut last_conv = None;
    for (index, spec) in config.layers.iter().enumerate() {
        let Layer::Convolutional(p) = &spec.layer else {
            layers.push(None);
            continue;
        };
        last_conv = Some(index);
        let out = p.filters;
        let in_c = spec.input_shape.channels;
        let bias = if p.batch_normalize {
            let beta = reader.floats(out, index, "batch-norm beta")?;
            let gamma = reader.floats(out, index, "batch-norm gamma")?;
            let mean = reader.floats(out, index, "batch-norm mean")?;
            let at = reader.pos as u64;
            let variance = reader.floats(out, index, "batch-norm variance")?;
            check_variance(&variance, index, at)?;
            ConvBias::BatchNorm(BatchNorm { beta, gamma, mean, variance })
        } else {
            ConvBias::Plain(reader.floats(out, index, "bias")?)
        };
        let kernel = reader.floats(out * in_c * p.size * p.size, index, "kernel")?;
        layers.push(Some(ConvWeights { out_channels: out, in_channels: in_c, size: p.size, bias, kernel }));
    }

    let trailing = bytes.len() - reader.pos;
    if trailing != 0 {
        return Err(Error::Load {
            layer: last_conv,
            byte_offset: reader.pos as u64,
            message: format!(
                "{trailing} trailing bytes after the last parameter block; the file does not match this configuration"
            ),
        });
    }
    Ok(WeightStore { header, layers })
}

pub fn load_weights_file(path: &Path, config: &NetworkConfig) -> Result<WeightStore> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_weights(&bytes, config)
}
