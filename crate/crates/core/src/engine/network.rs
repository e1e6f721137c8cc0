use super::conv::{batch_norm, conv2d, fold_batchnorm, ConvAlgorithm, ConvSpec, BATCHNORM_EPSILON};
use super::ops::{maxpool, route_concat, shortcut_add, upsample};
use super::tensor::Tensor;
use super::Activation;
use crate::darknet::{BatchNorm, ConvBias, Layer, NetHeader, NetworkConfig, WeightStore, YoloParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    /// Fold batch-norm into kernel and bias at compile time. When off the
    /// normalization runs as a separate step after each convolution.
    pub fold_batchnorm: bool,
    pub algorithm: ConvAlgorithm,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { fold_batchnorm: true, algorithm: ConvAlgorithm::Im2colGemm }
    }
}

impl CompileOptions {
    /// Direct convolution, unfolded batch-norm.
    pub fn naive() -> Self {
        CompileOptions { fold_batchnorm: false, algorithm: ConvAlgorithm::Direct }
    }
}

#[derive(Debug, Clone)]
struct CompiledConv {
    kernel: Tensor,
    bias: Vec<f32>,
    /// Present only when batch-norm is not folded.
    batch_norm: Option<BatchNorm>,
    spec: ConvSpec,
}

#[derive(Debug, Clone)]
enum Op {
    Conv(CompiledConv),
    Shortcut(Activation),
    Route,
    Upsample(usize),
    Maxpool { size: usize, stride: usize, padding: usize },
    Yolo(YoloParams),
}

#[derive(Debug, Clone)]
struct Step {
    op: Op,
    inputs: Vec<usize>,
    /// Index of the last layer that reads this output.
    last_use: usize,
}

/// Raw output of one detection head.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadOutput {
    pub layer: usize,
    /// `(batch, anchors * (5 + classes), grid_height, grid_width)` logits.
    pub tensor: Tensor,
    pub grid_width: usize,
    pub grid_height: usize,
    pub mask: Vec<usize>,
    /// Anchors selected by `mask`, in network-input pixels.
    pub anchors: Vec<(f32, f32)>,
    pub classes: usize,
    pub input_width: usize,
    pub input_height: usize,
}

#[derive(Debug, Clone)]
pub struct CompiledNetwork {
    net: NetHeader,
    steps: Vec<Step>,
    options: CompileOptions,
}

impl CompiledNetwork {
    pub fn compile(config: &NetworkConfig, weights: &WeightStore, options: CompileOptions) -> Result<Self> {
        if weights.layers.len() != config.layers.len() {
            return Err(Error::Shape(format!(
                "weights cover {} layers, network has {}",
                weights.layers.len(),
                config.layers.len()
            )));
        }
        let mut steps = Vec::with_capacity(config.layers.len());
        for (index, spec) in config.layers.iter().enumerate() {
            let op = match &spec.layer {
                Layer::Convolutional(p) => {
                    let w = weights.conv(index).ok_or_else(|| Error::Runtime {
                        layer: index,
                        message: "convolutional layer has no weights".into(),
                    })?;
                    let in_c = spec.input_shape.channels;
                    if w.out_channels != p.filters || w.in_channels != in_c || w.size != p.size {
                        return Err(Error::Shape(format!(
                            "layer {index}: weights are {}x{}x{}x{}, layer needs {}x{in_c}x{}x{}",
                            w.out_channels, w.in_channels, w.size, w.size, p.filters, p.size, p.size
                        )));
                    }
                    let kernel = Tensor::new([p.filters, in_c, p.size, p.size], w.kernel.clone())?;
                    let conv_spec = ConvSpec { stride: p.stride, padding: p.padding, activation: p.activation };
                    let at_layer = |e: Error| match e {
                        Error::Data { message, .. } => Error::Runtime { layer: index, message },
                        other => other,
                    };
                    match &w.bias {
                        ConvBias::Plain(bias) => {
                            Op::Conv(CompiledConv { kernel, bias: bias.clone(), batch_norm: None, spec: conv_spec })
                        }
                        ConvBias::BatchNorm(bn) if options.fold_batchnorm => {
                            let (kernel, bias) = fold_batchnorm(&kernel, bn, BATCHNORM_EPSILON).map_err(at_layer)?;
                            Op::Conv(CompiledConv { kernel, bias, batch_norm: None, spec: conv_spec })
                        }
                        ConvBias::BatchNorm(bn) => {
                            if let Some(c) = bn.variance.iter().position(|v| v.is_nan() || *v < 0.0) {
                                return Err(Error::Runtime {
                                    layer: index,
                                    message: format!("batch-norm variance of channel {c} is negative"),
                                });
                            }
                            Op::Conv(CompiledConv {
                                kernel,
                                bias: vec![0.0; p.filters],
                                batch_norm: Some(bn.clone()),
                                spec: conv_spec,
                            })
                        }
                    }
                }
                Layer::Shortcut { activation, .. } => Op::Shortcut(*activation),
                Layer::Route { .. } => Op::Route,
                Layer::Upsample { stride } => Op::Upsample(*stride),
                Layer::Maxpool { size, stride, padding } => {
                    Op::Maxpool { size: *size, stride: *stride, padding: *padding }
                }
                Layer::Yolo(params) => Op::Yolo(params.clone()),
            };
            steps.push(Step { op, inputs: spec.inputs.clone(), last_use: index });
        }
        for j in 0..steps.len() {
            for i in steps[j].inputs.clone() {
                steps[i].last_use = steps[i].last_use.max(j);
            }
        }
        Ok(CompiledNetwork { net: config.net, steps, options })
    }

    pub fn net(&self) -> NetHeader {
        self.net
    }

    pub fn options(&self) -> CompileOptions {
        self.options
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn check_input(&self, input: &Tensor) -> Result<()> {
        let [b, c, h, w] = input.dims();
        if b == 0 || (c, h, w) != (self.net.channels, self.net.height, self.net.width) {
            return Err(Error::Shape(format!(
                "input is {b}x{c}x{h}x{w}, network expects Nx{}x{}x{}",
                self.net.channels, self.net.height, self.net.width
            )));
        }
        Ok(())
    }

    fn run_step(&self, index: usize, input: &Tensor, outputs: &[Option<Tensor>]) -> Result<Tensor> {
        let step = &self.steps[index];
        let get = |i: usize| -> Result<&Tensor> {
            outputs[i].as_ref().ok_or_else(|| Error::Runtime {
                layer: index,
                message: format!("output of layer {i} was released before use"),
            })
        };
        let first = match step.inputs.first() {
            Some(&i) => get(i)?,
            None => input,
        };
        let out = match &step.op {
            Op::Conv(c) => {
                let mut spec = c.spec;
                if c.batch_norm.is_some() {
                    spec.activation = Activation::Linear;
                }
                let mut out = conv2d(first, &c.kernel, &c.bias, &spec, self.options.algorithm)?;
                if let Some(bn) = &c.batch_norm {
                    batch_norm(&mut out, bn, BATCHNORM_EPSILON)?;
                    c.spec.activation.apply_slice(out.data_mut());
                }
                out
            }
            Op::Shortcut(activation) => shortcut_add(first, get(step.inputs[1])?, *activation)?,
            Op::Route => {
                let parts = step.inputs.iter().map(|&i| get(i)).collect::<Result<Vec<_>>>()?;
                route_concat(&parts)?
            }
            Op::Upsample(factor) => upsample(first, *factor)?,
            Op::Maxpool { size, stride, padding } => maxpool(first, *size, *stride, *padding)?,
            Op::Yolo(_) => first.clone(),
        };
        if let Some([n, c, y, x]) = out.first_non_finite() {
            return Err(Error::Runtime {
                layer: index,
                message: format!(
                    "non-finite value {} at batch {n}, channel {c}, row {y}, column {x}",
                    out.get([n, c, y, x])
                ),
            });
        }
        Ok(out)
    }

    /// Runs the network and returns the detection-head outputs in layer order.
    pub fn forward(&self, input: &Tensor) -> Result<Vec<HeadOutput>> {
        self.check_input(input)?;
        let mut outputs: Vec<Option<Tensor>> = vec![None; self.steps.len()];
        let mut heads = Vec::new();
        for index in 0..self.steps.len() {
            let out = self.run_step(index, input, &outputs)?;
            if let Op::Yolo(params) = &self.steps[index].op {
                heads.push(self.head(index, params, out.clone()));
            }
            outputs[index] = Some(out);
            for &i in &self.steps[index].inputs {
                if self.steps[i].last_use <= index {
                    outputs[i] = None;
                }
            }
            if self.steps[index].last_use <= index {
                outputs[index] = None;
            }
        }
        Ok(heads)
    }

    /// Every layer's output, for inspection and testing.
    pub fn forward_all(&self, input: &Tensor) -> Result<Vec<Tensor>> {
        self.check_input(input)?;
        let mut outputs: Vec<Option<Tensor>> = vec![None; self.steps.len()];
        for index in 0..self.steps.len() {
            outputs[index] = Some(self.run_step(index, input, &outputs)?);
        }
        Ok(outputs.into_iter().flatten().collect())
    }

    fn head(&self, layer: usize, params: &YoloParams, tensor: Tensor) -> HeadOutput {
        HeadOutput {
            layer,
            grid_width: tensor.width(),
            grid_height: tensor.height(),
            tensor,
            mask: params.mask.clone(),
            anchors: params.masked_anchors(),
            classes: params.classes,
            input_width: self.net.width,
            input_height: self.net.height,
        }
    }
}
