//! Axis-aligned boxes in continuous pixel coordinates.
//!
//! The origin is the top-left corner, x grows rightward and y downward.
//! Areas are purely geometric: a box spanning `0..2` covers two units, there
//! is no inclusive `+1` pixel convention.

use crate::error::{Error, Result};

/// Canonical corner-form box: `x_min <= x_max`, `y_min <= y_max`, all finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl BoundingBox {
    /// Builds a box from two opposite corners. Flipped corners are swapped
    /// into canonical order; NaN or infinite coordinates are rejected.
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidBox(format!(
                "non-finite coordinate in ({x0}, {y0}, {x1}, {y1})"
            )));
        }
        Ok(BoundingBox {
            x_min: x0.min(x1),
            y_min: y0.min(y1),
            x_max: x0.max(x1),
            y_max: y0.max(y1),
        })
    }

    /// Center-size form in pixels.
    pub fn from_center(cx: f64, cy: f64, width: f64, height: f64) -> Result<Self> {
        if !(width >= 0.0 && height >= 0.0) {
            return Err(Error::InvalidBox(format!(
                "width and height must be non-negative, got {width}x{height}"
            )));
        }
        let (hw, hh) = (width / 2.0, height / 2.0);
        BoundingBox::new(cx - hw, cy - hh, cx + hw, cy + hh)
    }

    /// Center-size form normalized by the image dimensions (YOLO annotation
    /// convention).
    pub fn from_normalized_center(
        cx: f64,
        cy: f64,
        width: f64,
        height: f64,
        image_width: f64,
        image_height: f64,
    ) -> Result<Self> {
        if !(image_width > 0.0 && image_height > 0.0) {
            return Err(Error::InvalidBox(format!(
                "image dimensions must be positive, got {image_width}x{image_height}"
            )));
        }
        BoundingBox::from_center(
            cx * image_width,
            cy * image_height,
            width * image_width,
            height * image_height,
        )
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// `(cx, cy, width, height)` in pixels.
    pub fn to_center(&self) -> (f64, f64, f64, f64) {
        (
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
            self.width(),
            self.height(),
        )
    }

    /// `(cx, cy, width, height)` divided by the image dimensions.
    pub fn to_normalized_center(&self, image_width: f64, image_height: f64) -> (f64, f64, f64, f64) {
        let (cx, cy, w, h) = self.to_center();
        (cx / image_width, cy / image_height, w / image_width, h / image_height)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() == 0.0
    }

    /// Overlap rectangle, or `None` when the boxes do not overlap with
    /// positive area (touching edges count as disjoint).
    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let x_min = self.x_min.max(other.x_min);
        let y_min = self.y_min.max(other.y_min);
        let x_max = self.x_max.min(other.x_max);
        let y_max = self.y_max.min(other.y_max);
        if x_min >= x_max || y_min >= y_max {
            return None;
        }
        Some(BoundingBox { x_min, y_min, x_max, y_max })
    }

    /// Intersection over union. Two degenerate boxes have IOU 0, never NaN.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let inter = self.intersection(other).map_or(0.0, |b| b.area());
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            return 0.0;
        }
        (inter / union).clamp(0.0, 1.0)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Result<BoundingBox> {
        BoundingBox::new(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)
    }

    /// Scales about the origin; a negative factor mirrors the box, which is
    /// then re-canonicalized.
    pub fn scale(&self, sx: f64, sy: f64) -> Result<BoundingBox> {
        BoundingBox::new(self.x_min * sx, self.y_min * sy, self.x_max * sx, self.y_max * sy)
    }

    /// Clips the box into `[0, width] x [0, height]`.
    pub fn clamp_to(&self, width: f64, height: f64) -> BoundingBox {
        BoundingBox {
            x_min: self.x_min.clamp(0.0, width),
            y_min: self.y_min.clamp(0.0, height),
            x_max: self.x_max.clamp(0.0, width),
            y_max: self.y_max.clamp(0.0, height),
        }
    }
}

/// Free-function form of [`BoundingBox::iou`].
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    a.iou(b)
}
