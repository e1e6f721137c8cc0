use super::decode::Candidate;
use crate::error::{Error, Result};
use crate::eval::Detection;
use crate::geometry::BoundingBox;

/// Default IOU above which a lower-scored box of the same class is dropped.
pub const DEFAULT_NMS_THRESHOLD: f64 = 0.45;

/// Anything with a class, a score and a box.
pub trait Scored {
    fn class_id(&self) -> usize;
    fn confidence(&self) -> f64;
    fn bbox(&self) -> &BoundingBox;
}

impl Scored for Candidate {
    fn class_id(&self) -> usize {
        self.class_id
    }
    fn confidence(&self) -> f64 {
        self.confidence
    }
    fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }
}

impl Scored for Detection {
    fn class_id(&self) -> usize {
        self.class_id
    }
    fn confidence(&self) -> f64 {
        self.confidence
    }
    fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }
}

/// Greedy per-class non-max suppression.
///
/// Walks the input in descending confidence (ties keep input order), keeps
/// each box not yet suppressed and suppresses every later box of the same
/// class whose IOU with it is strictly greater than `iou_threshold`. The
/// survivors come back in that walk order.
pub fn nms<T: Scored + Clone>(items: &[T], iou_threshold: f64) -> Result<Vec<T>> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::argument("nms_threshold", format!("{iou_threshold} is outside (0, 1]")));
    }
    if let Some(bad) = items.iter().find(|d| d.confidence().is_nan()) {
        return Err(Error::data(format!("NaN confidence for class {}", bad.class_id())));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].confidence().total_cmp(&items[a].confidence()));

    let mut suppressed = vec![false; items.len()];
    let mut kept = Vec::new();
    for (rank, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        kept.push(items[i].clone());
        for &j in &order[rank + 1..] {
            if !suppressed[j]
                && items[j].class_id() == items[i].class_id()
                && items[i].bbox().iou(items[j].bbox()) > iou_threshold
            {
                suppressed[j] = true;
            }
        }
    }
    Ok(kept)
}
