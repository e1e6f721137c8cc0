//! From raw head tensors to final per-image detections: letterboxing,
//! anchor decoding, un-letterboxing and per-class non-max suppression.

mod decode;
mod letterbox;
mod nms;

pub use decode::{decode, decode_head, AnchorSet, Candidate, DEFAULT_SCORE_THRESHOLD};
pub use letterbox::{letterbox, LetterboxTransform, LETTERBOX_FILL};
pub use nms::{nms, Scored, DEFAULT_NMS_THRESHOLD};

use crate::engine::{CompiledNetwork, HeadOutput, Tensor};
use crate::error::{Error, Result};
use crate::eval::Detection;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorOptions {
    pub score_threshold: f64,
    pub nms_threshold: f64,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        DetectorOptions { score_threshold: DEFAULT_SCORE_THRESHOLD, nms_threshold: DEFAULT_NMS_THRESHOLD }
    }
}

impl DetectorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.score_threshold) {
            return Err(Error::argument("conf", format!("{} is outside [0, 1]", self.score_threshold)));
        }
        if !(self.nms_threshold > 0.0 && self.nms_threshold <= 1.0) {
            return Err(Error::argument("nms", format!("{} is outside (0, 1]", self.nms_threshold)));
        }
        Ok(())
    }
}

/// Maps head outputs of one letterboxed image back to source-image
/// detections: decode, unmap, clamp to the image, drop empty boxes, NMS.
pub fn postprocess_heads(
    heads: &[HeadOutput],
    transform: &LetterboxTransform,
    image_id: &str,
    options: &DetectorOptions,
) -> Result<Vec<Detection>> {
    options.validate()?;
    let (w, h) = (transform.src_width as f64, transform.src_height as f64);
    let mut detections = Vec::new();
    for head in heads {
        for c in decode_head(head, 0, options.score_threshold)? {
            let bbox = transform.unmap_box(&c.bbox).clamp_to(w, h);
            if bbox.area() > 0.0 {
                detections.push(Detection::new(image_id, c.class_id, c.confidence, bbox)?);
            }
        }
    }
    nms(&detections, options.nms_threshold)
}

/// A compiled network plus the decode / NMS settings.
#[derive(Debug, Clone)]
pub struct Detector {
    network: CompiledNetwork,
    options: DetectorOptions,
}

impl Detector {
    pub fn new(network: CompiledNetwork, options: DetectorOptions) -> Result<Self> {
        options.validate()?;
        Ok(Detector { network, options })
    }

    pub fn network(&self) -> &CompiledNetwork {
        &self.network
    }

    pub fn options(&self) -> DetectorOptions {
        self.options
    }

    /// Runs the full pipeline on a `(1, 3, H, W)` image in `[0, 1]`.
    pub fn detect(&self, image: &Tensor, image_id: &str) -> Result<Vec<Detection>> {
        if image.batch() != 1 {
            return Err(Error::Shape(format!("detect takes one image, got a batch of {}", image.batch())));
        }
        let net = self.network.net();
        let (input, transform) = letterbox(image, net.width, net.height)?;
        let heads = self.network.forward(&input)?;
        postprocess_heads(&heads, &transform, image_id, &self.options)
    }
}
