use crate::engine::Tensor;
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

/// Gray level used for the padding bands, in normalized `[0, 1]` units.
pub const LETTERBOX_FILL: f32 = 0.5;

/// Aspect-preserving fit of a source image into the network input.
///
/// A source point `p` maps to `p * scale + pad` in network pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LetterboxTransform {
    pub scale: f64,
    pub pad_x: f64,
    pub pad_y: f64,
    pub src_width: usize,
    pub src_height: usize,
    pub net_width: usize,
    pub net_height: usize,
}

impl LetterboxTransform {
    pub fn new(src_width: usize, src_height: usize, net_width: usize, net_height: usize) -> Result<Self> {
        if src_width == 0 || src_height == 0 || net_width == 0 || net_height == 0 {
            return Err(Error::argument(
                "dims",
                format!("letterbox {src_width}x{src_height} into {net_width}x{net_height}: all dims must be positive"),
            ));
        }
        let scale = (net_width as f64 / src_width as f64).min(net_height as f64 / src_height as f64);
        let mut t = LetterboxTransform { scale, pad_x: 0.0, pad_y: 0.0, src_width, src_height, net_width, net_height };
        let (cw, ch) = t.content_size();
        t.pad_x = ((net_width - cw) / 2) as f64;
        t.pad_y = ((net_height - ch) / 2) as f64;
        Ok(t)
    }

    /// Size of the resampled image inside the padding, in network pixels.
    pub fn content_size(&self) -> (usize, usize) {
        let w = ((self.src_width as f64 * self.scale).round() as usize).clamp(1, self.net_width);
        let h = ((self.src_height as f64 * self.scale).round() as usize).clamp(1, self.net_height);
        (w, h)
    }

    pub fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.pad_x == 0.0 && self.pad_y == 0.0
    }

    /// Source image point to network point.
    pub fn map_point(&self, x: f64, y: f64) -> (f64, f64) {
        (x * self.scale + self.pad_x, y * self.scale + self.pad_y)
    }

    /// Network point back to source image point.
    pub fn unmap_point(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.pad_x) / self.scale, (y - self.pad_y) / self.scale)
    }

    pub fn map_box(&self, b: &BoundingBox) -> BoundingBox {
        let (x0, y0) = self.map_point(b.x_min(), b.y_min());
        let (x1, y1) = self.map_point(b.x_max(), b.y_max());
        BoundingBox::new(x0, y0, x1, y1).expect("affine image of a finite box is finite")
    }

    pub fn unmap_box(&self, b: &BoundingBox) -> BoundingBox {
        let (x0, y0) = self.unmap_point(b.x_min(), b.y_min());
        let (x1, y1) = self.unmap_point(b.x_max(), b.y_max());
        BoundingBox::new(x0, y0, x1, y1).expect("affine image of a finite box is finite")
    }

    /// Resamples a `(1, C, src_height, src_width)` image into the network
    /// input, bilinear inside the content area and gray outside it.
    pub fn apply(&self, image: &Tensor) -> Result<Tensor> {
        let [b, c, h, w] = image.dims();
        if (h, w) != (self.src_height, self.src_width) {
            return Err(Error::Shape(format!(
                "letterbox built for {}x{}, image is {w}x{h}",
                self.src_width, self.src_height
            )));
        }
        if self.is_identity() {
            return Ok(image.clone());
        }
        let (nw, nh) = (self.net_width, self.net_height);
        let (cw, ch) = self.content_size();
        let (px, py) = (self.pad_x as usize, self.pad_y as usize);
        let taps = |dst: usize, pad: usize, extent: usize| -> (usize, usize, f32) {
            let s = ((dst - pad) as f64 + 0.5) / self.scale - 0.5;
            let s = s.clamp(0.0, (extent - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(extent - 1);
            (i0, i1, (s - i0 as f64) as f32)
        };
        let xs: Vec<_> = (px..px + cw).map(|x| taps(x, px, w)).collect();
        let ys: Vec<_> = (py..py + ch).map(|y| taps(y, py, h)).collect();

        let mut out = Tensor::filled([b, c, nh, nw], LETTERBOX_FILL);
        let dst = out.data_mut();
        for n in 0..b {
            for k in 0..c {
                let src = image.plane(n, k);
                let base = (n * c + k) * nh * nw;
                for (j, &(y0, y1, fy)) in ys.iter().enumerate() {
                    let row = &mut dst[base + (py + j) * nw + px..base + (py + j) * nw + px + cw];
                    for (d, &(x0, x1, fx)) in row.iter_mut().zip(&xs) {
                        let top = src[y0 * w + x0] * (1.0 - fx) + src[y0 * w + x1] * fx;
                        let bottom = src[y1 * w + x0] * (1.0 - fx) + src[y1 * w + x1] * fx;
                        *d = top * (1.0 - fy) + bottom * fy;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Letterboxes `image` into `net_width x net_height`.
pub fn letterbox(image: &Tensor, net_width: usize, net_height: usize) -> Result<(Tensor, LetterboxTransform)> {
    let t = LetterboxTransform::new(image.width(), image.height(), net_width, net_height)?;
    Ok((t.apply(image)?, t))
}
