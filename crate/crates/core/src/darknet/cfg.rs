//! Darknet `.cfg` parsing and shape propagation.
//!
//! The format is INI-like: `[section]` headers, `key=value` lines, and full
//! line comments starting with `#` or `;`. As in Darknet, all whitespace
//! inside a line is dropped, so `mask = 6, 7,8` reads as `mask=6,7,8`.
//!
//! Key semantics follow Darknet:
//!
//! * `[convolutional]`: `filters` (1), `size` (1), `stride` (1),
//!   `padding` (0), `pad` (0; when non-zero the padding becomes `size / 2`,
//!   overriding `padding`), `batch_normalize` (0), `activation` (`logistic`).
//! * `[shortcut]`: `from` (required), `activation` (`linear`).
//! * `[route]`: `layers` (required, comma separated).
//! * `[upsample]`: `stride` (2).
//! * `[maxpool]`: `stride` (1), `size` (`stride`), `padding` (`size - 1`).
//! * `[yolo]`: `anchors` (required), `num` (anchor count), `mask` (all
//!   anchors), `classes` (20).
//!
//! Layer references that are negative are relative to the referencing layer;
//! non-negative ones are absolute layer indices (the `[net]` header is not a
//! layer). Unknown keys are kept and reported as warnings.

use std::fmt::Write as _;
use std::path::Path;

use crate::engine::Activation;
use crate::error::{Error, Result};

/// Feature-map shape, batch axis excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Shape { channels, height, width }
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Convolutional,
    Shortcut,
    Route,
    Upsample,
    Maxpool,
    Yolo,
}

impl LayerKind {
    pub fn section_name(&self) -> &'static str {
        match self {
            LayerKind::Convolutional => "convolutional",
            LayerKind::Shortcut => "shortcut",
            LayerKind::Route => "route",
            LayerKind::Upsample => "upsample",
            LayerKind::Maxpool => "maxpool",
            LayerKind::Yolo => "yolo",
        }
    }

    fn from_section(name: &str) -> Option<LayerKind> {
        Some(match name {
            "convolutional" | "conv" => LayerKind::Convolutional,
            "shortcut" => LayerKind::Shortcut,
            "route" => LayerKind::Route,
            "upsample" => LayerKind::Upsample,
            "maxpool" | "max" => LayerKind::Maxpool,
            "yolo" => LayerKind::Yolo,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvParams {
    pub filters: usize,
    pub size: usize,
    pub stride: usize,
    /// Zero-padding added on every side.
    pub padding: usize,
    pub batch_normalize: bool,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YoloParams {
    /// Indices into `anchors` used by this head.
    pub mask: Vec<usize>,
    /// `(width, height)` in network-input pixels.
    pub anchors: Vec<(f32, f32)>,
    pub classes: usize,
}

impl YoloParams {
    pub fn masked_anchors(&self) -> Vec<(f32, f32)> {
        self.mask.iter().map(|&m| self.anchors[m]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Convolutional(ConvParams),
    /// Adds the output of layer `from` to the previous layer's output.
    Shortcut { from: usize, activation: Activation },
    /// Concatenates the listed layers along the channel axis.
    Route { layers: Vec<usize> },
    Upsample { stride: usize },
    Maxpool { size: usize, stride: usize, padding: usize },
    Yolo(YoloParams),
}

impl Layer {
    pub fn kind(&self) -> LayerKind {
        match self {
            Layer::Convolutional(_) => LayerKind::Convolutional,
            Layer::Shortcut { .. } => LayerKind::Shortcut,
            Layer::Route { .. } => LayerKind::Route,
            Layer::Upsample { .. } => LayerKind::Upsample,
            Layer::Maxpool { .. } => LayerKind::Maxpool,
            Layer::Yolo(_) => LayerKind::Yolo,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub layer: Layer,
    /// Absolute indices of the layers read by this one. Empty for layer 0,
    /// which reads the network input.
    pub inputs: Vec<usize>,
    pub input_shape: Shape,
    pub output_shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetHeader {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigWarning {
    pub line: usize,
    pub section: String,
    pub key: String,
}

impl std::fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: unknown key `{}` in [{}] ignored", self.line, self.key, self.section)
    }
}

#[derive(Debug, Clone)]
struct RawOption {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
struct RawSection {
    name: String,
    line: usize,
    options: Vec<RawOption>,
}

impl RawSection {
    fn find(&self, key: &str) -> Option<&RawOption> {
        self.options.iter().rev().find(|o| o.key == key)
    }
}

/// A parsed and shape-checked network description.
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    pub net: NetHeader,
    pub layers: Vec<LayerSpec>,
    pub warnings: Vec<ConfigWarning>,
    sections: Vec<RawSection>,
}

/// Semantic equality: header, resolved layers and the key/value text of every
/// section. Source line numbers and warnings are not compared.
impl PartialEq for NetworkConfig {
    fn eq(&self, other: &Self) -> bool {
        self.net == other.net
            && self.layers == other.layers
            && self.sections.len() == other.sections.len()
            && self.sections.iter().zip(&other.sections).all(|(a, b)| {
                a.name == b.name
                    && a.options.len() == b.options.len()
                    && a.options.iter().zip(&b.options).all(|(x, y)| x.key == y.key && x.value == y.value)
            })
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: None, line, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<RawSection>> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line_no, format!("malformed section header `{}`", raw.trim())))?;
            sections.push(RawSection { name: name.to_ascii_lowercase(), line: line_no, options: Vec::new() });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(line_no, format!("expected `key=value`, got `{}`", raw.trim())))?;
        if key.is_empty() {
            return Err(parse_error(line_no, "empty key"));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| parse_error(line_no, "option outside of any section"))?;
        section.options.push(RawOption { key: key.to_string(), value: value.to_string(), line: line_no });
    }
    Ok(sections)
}

struct Options<'a> {
    section: &'a RawSection,
    known: &'static [&'static str],
}

impl<'a> Options<'a> {
    fn int(&self, key: &str) -> Result<Option<i64>> {
        match self.section.find(key) {
            None => Ok(None),
            Some(opt) => opt
                .value
                .parse::<i64>()
                .map(Some)
                .map_err(|_| parse_error(opt.line, format!("`{key}` expects an integer, got `{}`", opt.value))),
        }
    }

    fn positive(&self, key: &str, default: usize) -> Result<usize> {
        match self.int(key)? {
            None => Ok(default),
            Some(v) if v > 0 => Ok(v as usize),
            Some(v) => Err(parse_error(self.line_of(key), format!("`{key}` must be positive, got {v}"))),
        }
    }

    fn non_negative(&self, key: &str, default: usize) -> Result<usize> {
        match self.int(key)? {
            None => Ok(default),
            Some(v) if v >= 0 => Ok(v as usize),
            Some(v) => Err(parse_error(self.line_of(key), format!("`{key}` must be non-negative, got {v}"))),
        }
    }

    fn int_list(&self, key: &str) -> Result<Option<Vec<i64>>> {
        let Some(opt) = self.section.find(key) else {
            return Ok(None);
        };
        opt.value
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<i64>()
                    .map_err(|_| parse_error(opt.line, format!("`{key}` expects integers, got `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn float_list(&self, key: &str) -> Result<Option<Vec<f32>>> {
        let Some(opt) = self.section.find(key) else {
            return Ok(None);
        };
        opt.value
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f32>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_error(opt.line, format!("`{key}` expects numbers, got `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn activation(&self, default: Activation) -> Result<Activation> {
        match self.section.find("activation") {
            None => Ok(default),
            Some(opt) => opt.value.parse::<Activation>().map_err(|_| {
                parse_error(opt.line, format!("unsupported activation `{}`", opt.value))
            }),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.section.find(key).map_or(self.section.line, |o| o.line)
    }

    fn warnings(&self) -> Vec<ConfigWarning> {
        self.section
            .options
            .iter()
            .filter(|o| !self.known.contains(&o.key.as_str()))
            .map(|o| ConfigWarning { line: o.line, section: self.section.name.clone(), key: o.key.clone() })
            .collect()
    }
}

const NET_KEYS: &[&str] = &[
    "width", "height", "channels", "batch", "subdivisions", "momentum", "decay", "angle", "saturation",
    "exposure", "hue", "learning_rate", "burn_in", "max_batches", "policy", "steps", "scales", "max_crop",
    "min_crop", "flip", "mosaic", "aspect", "power", "gamma", "step",
];
const CONV_KEYS: &[&str] = &["filters", "size", "stride", "pad", "padding", "batch_normalize", "activation"];
const SHORTCUT_KEYS: &[&str] = &["from", "activation"];
const ROUTE_KEYS: &[&str] = &["layers"];
const UPSAMPLE_KEYS: &[&str] = &["stride"];
const MAXPOOL_KEYS: &[&str] = &["size", "stride", "padding"];
const YOLO_KEYS: &[&str] =
    &["mask", "anchors", "classes", "num", "jitter", "ignore_thresh", "truth_thresh", "random"];

fn resolve_reference(reference: i64, index: usize, line: usize) -> Result<usize> {
    let absolute = if reference < 0 { index as i64 + reference } else { reference };
    if absolute < 0 {
        return Err(parse_error(line, format!("layer reference {reference} points before the first layer")));
    }
    if absolute as usize >= index {
        return Err(parse_error(
            line,
            format!("layer {index} references layer {absolute}; only earlier layers may be referenced"),
        ));
    }
    Ok(absolute as usize)
}

fn build(sections: Vec<RawSection>) -> Result<NetworkConfig> {
    let first = sections.first().ok_or_else(|| parse_error(1, "configuration has no sections"))?;
    if first.name != "net" && first.name != "network" {
        return Err(parse_error(first.line, format!("first section must be [net], found [{}]", first.name)));
    }
    let header = Options { section: first, known: NET_KEYS };
    let width = header.int("width")?.filter(|v| *v > 0);
    let height = header.int("height")?.filter(|v| *v > 0);
    let (Some(width), Some(height)) = (width, height) else {
        return Err(parse_error(first.line, "[net] needs positive `width` and `height`"));
    };
    let net = NetHeader { width: width as usize, height: height as usize, channels: header.positive("channels", 3)? };
    let mut warnings = header.warnings();

    let mut layers: Vec<LayerSpec> = Vec::with_capacity(sections.len() - 1);
    let mut classes: Option<(usize, usize)> = None;
    for section in &sections[1..] {
        let index = layers.len();
        let kind = LayerKind::from_section(&section.name)
            .ok_or_else(|| parse_error(section.line, format!("unsupported layer kind [{}]", section.name)))?;
        let input_shape = layers
            .last()
            .map_or(Shape::new(net.channels, net.height, net.width), |l| l.output_shape);
        let previous: Vec<usize> = if index == 0 { Vec::new() } else { vec![index - 1] };

        let (known, spec) = match kind {
            LayerKind::Convolutional => {
                let opts = Options { section, known: CONV_KEYS };
                let size = opts.positive("size", 1)?;
                let pad = opts.non_negative("pad", 0)?;
                let mut padding = opts.non_negative("padding", 0)?;
                if pad != 0 {
                    padding = size / 2;
                }
                let params = ConvParams {
                    filters: opts.positive("filters", 1)?,
                    size,
                    stride: opts.positive("stride", 1)?,
                    padding,
                    batch_normalize: opts.non_negative("batch_normalize", 0)? != 0,
                    activation: opts.activation(Activation::Logistic)?,
                };
                let out = |extent: usize| -> Result<usize> {
                    if extent + 2 * padding < size {
                        return Err(parse_error(
                            section.line,
                            format!("kernel size {size} exceeds padded input extent {}", extent + 2 * padding),
                        ));
                    }
                    Ok((extent + 2 * padding - size) / params.stride + 1)
                };
                let output_shape = Shape::new(params.filters, out(input_shape.height)?, out(input_shape.width)?);
                (CONV_KEYS, LayerSpec { layer: Layer::Convolutional(params), inputs: previous, input_shape, output_shape })
            }
            LayerKind::Shortcut => {
                let opts = Options { section, known: SHORTCUT_KEYS };
                let line = opts.line_of("from");
                let from = match opts.int_list("from")?.as_deref() {
                    Some([single]) => *single,
                    _ => return Err(parse_error(line, "[shortcut] needs a single `from` reference")),
                };
                if index == 0 {
                    return Err(parse_error(section.line, "[shortcut] cannot be the first layer"));
                }
                let from = resolve_reference(from, index, line)?;
                let other = layers[from].output_shape;
                if other != input_shape {
                    return Err(parse_error(
                        line,
                        format!(
                            "shortcut adds layer {from} ({}x{}x{}) to layer {} ({}x{}x{}); shapes must be identical",
                            other.channels, other.height, other.width,
                            index - 1, input_shape.channels, input_shape.height, input_shape.width
                        ),
                    ));
                }
                let activation = opts.activation(Activation::Linear)?;
                (
                    SHORTCUT_KEYS,
                    LayerSpec {
                        layer: Layer::Shortcut { from, activation },
                        inputs: vec![index - 1, from],
                        input_shape,
                        output_shape: input_shape,
                    },
                )
            }
            LayerKind::Route => {
                let opts = Options { section, known: ROUTE_KEYS };
                let line = opts.line_of("layers");
                let refs = opts.int_list("layers")?.filter(|r| !r.is_empty());
                let refs = refs.ok_or_else(|| parse_error(line, "[route] needs `layers`"))?;
                let resolved = refs
                    .iter()
                    .map(|&r| resolve_reference(r, index, line))
                    .collect::<Result<Vec<_>>>()?;
                let first_shape = layers[resolved[0]].output_shape;
                let mut channels = 0;
                for &r in &resolved {
                    let s = layers[r].output_shape;
                    if (s.height, s.width) != (first_shape.height, first_shape.width) {
                        return Err(parse_error(
                            line,
                            format!(
                                "route concatenates layer {} ({}x{}) with layer {r} ({}x{}); spatial dims differ",
                                resolved[0], first_shape.height, first_shape.width, s.height, s.width
                            ),
                        ));
                    }
                    channels += s.channels;
                }
                let output_shape = Shape::new(channels, first_shape.height, first_shape.width);
                (
                    ROUTE_KEYS,
                    LayerSpec { layer: Layer::Route { layers: resolved.clone() }, inputs: resolved, input_shape, output_shape },
                )
            }
            LayerKind::Upsample => {
                let opts = Options { section, known: UPSAMPLE_KEYS };
                let stride = opts.positive("stride", 2)?;
                let output_shape =
                    Shape::new(input_shape.channels, input_shape.height * stride, input_shape.width * stride);
                (UPSAMPLE_KEYS, LayerSpec { layer: Layer::Upsample { stride }, inputs: previous, input_shape, output_shape })
            }
            LayerKind::Maxpool => {
                let opts = Options { section, known: MAXPOOL_KEYS };
                let stride = opts.positive("stride", 1)?;
                let size = opts.positive("size", stride)?;
                let padding = opts.non_negative("padding", size - 1)?;
                let out = |extent: usize| -> Result<usize> {
                    if extent + padding < size {
                        return Err(parse_error(section.line, format!("pool size {size} exceeds input extent")));
                    }
                    Ok((extent + padding - size) / stride + 1)
                };
                let output_shape = Shape::new(input_shape.channels, out(input_shape.height)?, out(input_shape.width)?);
                (
                    MAXPOOL_KEYS,
                    LayerSpec { layer: Layer::Maxpool { size, stride, padding }, inputs: previous, input_shape, output_shape },
                )
            }
            LayerKind::Yolo => {
                let opts = Options { section, known: YOLO_KEYS };
                let anchor_line = opts.line_of("anchors");
                let values = opts
                    .float_list("anchors")?
                    .ok_or_else(|| parse_error(section.line, "[yolo] needs `anchors`"))?;
                if values.is_empty() || values.len() % 2 != 0 {
                    return Err(parse_error(anchor_line, "`anchors` must hold width,height pairs"));
                }
                if values.iter().any(|v| *v <= 0.0) {
                    return Err(parse_error(anchor_line, "anchor dimensions must be positive"));
                }
                let anchors: Vec<(f32, f32)> = values.chunks(2).map(|p| (p[0], p[1])).collect();
                let num = opts.positive("num", anchors.len())?;
                if num != anchors.len() {
                    return Err(parse_error(
                        opts.line_of("num"),
                        format!("num={num} but {} anchors are listed", anchors.len()),
                    ));
                }
                let mask = match opts.int_list("mask")? {
                    None => (0..num).collect(),
                    Some(m) => {
                        let line = opts.line_of("mask");
                        m.iter()
                            .map(|&i| {
                                if i < 0 || i as usize >= num {
                                    Err(parse_error(line, format!("mask index {i} outside 0..{num}")))
                                } else {
                                    Ok(i as usize)
                                }
                            })
                            .collect::<Result<Vec<_>>>()?
                    }
                };
                if mask.is_empty() {
                    return Err(parse_error(opts.line_of("mask"), "`mask` is empty"));
                }
                let class_count = opts.positive("classes", 20)?;
                match classes {
                    Some((c, first_layer)) if c != class_count => {
                        return Err(parse_error(
                            opts.line_of("classes"),
                            format!("classes={class_count} disagrees with classes={c} of yolo layer {first_layer}"),
                        ));
                    }
                    None => classes = Some((class_count, index)),
                    _ => {}
                }
                let expected = mask.len() * (5 + class_count);
                if input_shape.channels != expected {
                    return Err(parse_error(
                        section.line,
                        format!(
                            "yolo layer expects {} x (5 + {class_count}) = {expected} input channels, got {}",
                            mask.len(),
                            input_shape.channels
                        ),
                    ));
                }
                (
                    YOLO_KEYS,
                    LayerSpec {
                        layer: Layer::Yolo(YoloParams { mask, anchors, classes: class_count }),
                        inputs: previous,
                        input_shape,
                        output_shape: input_shape,
                    },
                )
            }
        };
        warnings.extend(Options { section, known }.warnings());
        layers.push(spec);
    }

    Ok(NetworkConfig { net, layers, warnings, sections })
}

/// Parses `.cfg` text.
pub fn parse_config(text: &str) -> Result<NetworkConfig> {
    build(lex(text)?)
}

pub fn load_config(path: &Path) -> Result<NetworkConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| e.with_path(path))
}

impl NetworkConfig {
    /// Line of the section header that declared `layer`.
    pub fn layer_line(&self, layer: usize) -> Option<usize> {
        self.sections.get(layer + 1).map(|s| s.line)
    }

    pub fn input_shape(&self) -> Shape {
        Shape::new(self.net.channels, self.net.height, self.net.width)
    }

    /// Indices of the `[yolo]` layers in order.
    pub fn yolo_layers(&self) -> Vec<usize> {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, l)| l.layer.kind() == LayerKind::Yolo)
            .map(|(i, _)| i)
            .collect()
    }

    /// Class count shared by the yolo layers.
    pub fn classes(&self) -> Option<usize> {
        self.layers.iter().find_map(|l| match &l.layer {
            Layer::Yolo(y) => Some(y.classes),
            _ => None,
        })
    }

    /// Anchor table of the first yolo layer.
    pub fn anchors(&self) -> Option<&[(f32, f32)]> {
        self.layers.iter().find_map(|l| match &l.layer {
            Layer::Yolo(y) => Some(y.anchors.as_slice()),
            _ => None,
        })
    }

    /// Checks what a detector needs beyond a valid layer graph: at least one
    /// yolo layer.
    pub fn validate_detector(&self) -> Result<()> {
        if self.yolo_layers().is_empty() {
            return Err(parse_error(self.sections[0].line, "network has no [yolo] layer"));
        }
        Ok(())
    }

    /// Same network with a different input resolution, shapes re-propagated.
    pub fn with_input_size(&self, width: usize, height: usize) -> Result<NetworkConfig> {
        let mut sections = self.sections.clone();
        let net = &mut sections[0];
        for (key, value) in [("width", width), ("height", height)] {
            match net.options.iter_mut().rev().find(|o| o.key == key) {
                Some(opt) => opt.value = value.to_string(),
                None => net.options.push(RawOption { key: key.to_string(), value: value.to_string(), line: net.line }),
            }
        }
        build(sections)
    }

    /// Canonical `.cfg` text: one `key=value` per line, sections separated by
    /// a blank line. Comments are not preserved.
    pub fn to_cfg_string(&self) -> String {
        let mut out = String::new();
        for (i, section) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{}]", section.name);
            for opt in &section.options {
                let _ = writeln!(out, "{}={}", opt.key, opt.value);
            }
        }
        out
    }
}
