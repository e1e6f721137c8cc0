use crate::darknet::reference::{YOLOV3_ANCHORS, YOLOV3_MASKS};
use crate::engine::{HeadOutput, Tensor};
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

/// Default minimum `objectness * class` score kept by decoding.
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.25;

/// `tw`/`th` logits are clamped here before `exp` so wild weights produce
/// huge but finite boxes.
const MAX_SIZE_LOGIT: f64 = 50.0;

/// Anchor priors shared by all heads, plus each head's mask into them.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    anchors: Vec<(f32, f32)>,
    masks: Vec<Vec<usize>>,
}

impl AnchorSet {
    pub fn new(anchors: Vec<(f32, f32)>, masks: Vec<Vec<usize>>) -> Result<Self> {
        if let Some((w, h)) = anchors.iter().find(|(w, h)| !(*w > 0.0 && *h > 0.0 && w.is_finite() && h.is_finite())) {
            return Err(Error::argument("anchors", format!("anchor {w}x{h} must have positive dimensions")));
        }
        for mask in &masks {
            if let Some(m) = mask.iter().find(|&&m| m >= anchors.len()) {
                return Err(Error::argument("mask", format!("index {m} with only {} anchors", anchors.len())));
            }
        }
        Ok(AnchorSet { anchors, masks })
    }

    pub fn yolov3() -> Self {
        AnchorSet {
            anchors: YOLOV3_ANCHORS.iter().map(|&(w, h)| (w as f32, h as f32)).collect(),
            masks: YOLOV3_MASKS.iter().map(|m| m.to_vec()).collect(),
        }
    }

    pub fn anchors(&self) -> &[(f32, f32)] {
        &self.anchors
    }

    pub fn masks(&self) -> &[Vec<usize>] {
        &self.masks
    }

    /// Anchors of head `head`, in mask order.
    pub fn head(&self, head: usize) -> Option<Vec<(f32, f32)>> {
        Some(self.masks.get(head)?.iter().map(|&m| self.anchors[m]).collect())
    }
}

/// One scored box from a detection head. `bbox` is in network-input pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub class_id: usize,
    pub confidence: f64,
    pub bbox: BoundingBox,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Decodes batch item `batch` of a raw head tensor laid out as
/// `anchors * (tx, ty, tw, th, objectness, class logits...)` channels.
///
/// For cell `(i, j)` and anchor `(pw, ph)` the box center is
/// `((i + σ(tx)) / grid_w, (j + σ(ty)) / grid_h)` and its size is
/// `(pw·e^tw, ph·e^th)`, scaled to network pixels. Each class yields its own
/// candidate with score `σ(objectness)·σ(class)`; scores below
/// `score_threshold` are dropped.
pub fn decode(
    raw: &Tensor,
    batch: usize,
    anchors: &[(f32, f32)],
    net_width: usize,
    net_height: usize,
    classes: usize,
    score_threshold: f64,
) -> Result<Vec<Candidate>> {
    if !(0.0..=1.0).contains(&score_threshold) {
        return Err(Error::argument("score_threshold", format!("{score_threshold} is outside [0, 1]")));
    }
    let [b, channels, grid_h, grid_w] = raw.dims();
    let per_anchor = 5 + classes;
    if channels != anchors.len() * per_anchor {
        return Err(Error::Shape(format!(
            "head has {channels} channels, {} anchors with {classes} classes need {}",
            anchors.len(),
            anchors.len() * per_anchor
        )));
    }
    if batch >= b {
        return Err(Error::Shape(format!("batch item {batch} of {b}")));
    }
    let (nw, nh) = (net_width as f64, net_height as f64);
    let mut out = Vec::new();
    for (a, &(pw, ph)) in anchors.iter().enumerate() {
        let plane = |k: usize| raw.plane(batch, a * per_anchor + k);
        let (tx, ty, tw, th, to) = (plane(0), plane(1), plane(2), plane(3), plane(4));
        for j in 0..grid_h {
            for i in 0..grid_w {
                let cell = j * grid_w + i;
                let objectness = sigmoid(to[cell] as f64);
                if objectness < score_threshold || objectness == 0.0 {
                    continue;
                }
                let cx = (i as f64 + sigmoid(tx[cell] as f64)) / grid_w as f64 * nw;
                let cy = (j as f64 + sigmoid(ty[cell] as f64)) / grid_h as f64 * nh;
                let w = pw as f64 * (tw[cell] as f64).min(MAX_SIZE_LOGIT).exp();
                let h = ph as f64 * (th[cell] as f64).min(MAX_SIZE_LOGIT).exp();
                let bbox = BoundingBox::from_center(cx, cy, w, h)?;
                for class_id in 0..classes {
                    let score = objectness * sigmoid(plane(5 + class_id)[cell] as f64);
                    if score >= score_threshold && score > 0.0 {
                        out.push(Candidate { class_id, confidence: score, bbox });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// [`decode`] with the layout taken from the head itself.
pub fn decode_head(head: &HeadOutput, batch: usize, score_threshold: f64) -> Result<Vec<Candidate>> {
    decode(
        &head.tensor,
        batch,
        &head.anchors,
        head.input_width,
        head.input_height,
        head.classes,
        score_threshold,
    )
}
