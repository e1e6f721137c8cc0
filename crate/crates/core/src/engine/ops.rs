use super::tensor::Tensor;
use super::Activation;
use crate::error::{Error, Result};

/// Elementwise `a + b`, then the activation. Shapes must be identical.
pub fn shortcut_add(a: &Tensor, b: &Tensor, activation: Activation) -> Result<Tensor> {
    if a.dims() != b.dims() {
        return Err(Error::Shape(format!("shortcut of {:?} and {:?}", a.dims(), b.dims())));
    }
    let mut out = a.clone();
    for (o, v) in out.data_mut().iter_mut().zip(b.data()) {
        *o += *v;
    }
    activation.apply_slice(out.data_mut());
    Ok(out)
}

/// Concatenation along the channel axis, in argument order.
pub fn route_concat(parts: &[&Tensor]) -> Result<Tensor> {
    let first = parts.first().ok_or_else(|| Error::Shape("route with no inputs".into()))?;
    let [batch, _, h, w] = first.dims();
    for p in parts {
        let [pb, _, ph, pw] = p.dims();
        if (pb, ph, pw) != (batch, h, w) {
            return Err(Error::Shape(format!(
                "route joins {h}x{w} with {ph}x{pw}; spatial dimensions must match"
            )));
        }
    }
    let channels: usize = parts.iter().map(|p| p.channels()).sum();
    let mut data = Vec::with_capacity(batch * channels * h * w);
    for n in 0..batch {
        for p in parts {
            data.extend_from_slice(p.item(n));
        }
    }
    Tensor::new([batch, channels, h, w], data)
}

/// Nearest-neighbour upsampling by an integer factor.
pub fn upsample(input: &Tensor, factor: usize) -> Result<Tensor> {
    if factor == 0 {
        return Err(Error::Shape("upsample factor must be at least 1".into()));
    }
    let [b, c, h, w] = input.dims();
    let (oh, ow) = (h * factor, w * factor);
    let mut out = Tensor::zeros([b, c, oh, ow]);
    let dst = out.data_mut();
    for n in 0..b {
        for ch in 0..c {
            let src = input.plane(n, ch);
            let base = (n * c + ch) * oh * ow;
            for y in 0..oh {
                let src_row = &src[(y / factor) * w..(y / factor + 1) * w];
                let dst_row = &mut dst[base + y * ow..base + (y + 1) * ow];
                for (x, d) in dst_row.iter_mut().enumerate() {
                    *d = src_row[x / factor];
                }
            }
        }
    }
    Ok(out)
}

pub fn upsample2x(input: &Tensor) -> Result<Tensor> {
    upsample(input, 2)
}

/// Max pooling with Darknet's padding rule: `padding` is the total extra
/// extent, split with `padding / 2` before the input. Cells outside the
/// input are ignored. Output extent is `(in + padding - size) / stride + 1`.
pub fn maxpool(input: &Tensor, size: usize, stride: usize, padding: usize) -> Result<Tensor> {
    let [b, c, h, w] = input.dims();
    if size == 0 || stride == 0 || h + padding < size || w + padding < size {
        return Err(Error::Shape(format!("maxpool size {size} stride {stride} on {h}x{w}")));
    }
    let oh = (h + padding - size) / stride + 1;
    let ow = (w + padding - size) / stride + 1;
    let offset = (padding / 2) as isize;
    let mut out = Tensor::zeros([b, c, oh, ow]);
    let dst = out.data_mut();
    for n in 0..b {
        for ch in 0..c {
            let src = input.plane(n, ch);
            let base = (n * c + ch) * oh * ow;
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = f32::NEG_INFINITY;
                    for ky in 0..size {
                        let iy = (oy * stride + ky) as isize - offset;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for kx in 0..size {
                            let ix = (ox * stride + kx) as isize - offset;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            best = best.max(src[iy as usize * w + ix as usize]);
                        }
                    }
                    dst[base + oy * ow + ox] = best;
                }
            }
        }
    }
    Ok(out)
}
