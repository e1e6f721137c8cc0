//! 2-D convolution, two independent routes:
//!
//! * [`conv2d_direct`] accumulates `weight * input_row` into each output
//!   row, one kernel tap at a time.
//! * [`conv2d_gemm`] lowers the input with im2col and runs a single matrix
//!   product per batch item.
//!
//! Both compute `out[o][y][x] = bias[o] + sum_{i,ky,kx} w[o][i][ky][kx] *
//! in[i][y*s + ky - p][x*s + kx - p]` with zeros outside the input, then the
//! activation.

use super::tensor::Tensor;
use super::Activation;
use crate::darknet::BatchNorm;
use crate::error::{Error, Result};

/// Batch-norm epsilon used when folding and when normalizing explicitly.
pub const BATCHNORM_EPSILON: f32 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub stride: usize,
    /// Zero-padding on each side.
    pub padding: usize,
    pub activation: Activation,
}

impl ConvSpec {
    /// "Same" padding for an odd kernel size, Darknet style (`size / 2`).
    pub fn same(size: usize, stride: usize, activation: Activation) -> Self {
        ConvSpec { stride, padding: size / 2, activation }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ConvAlgorithm {
    Direct,
    #[default]
    Im2colGemm,
}

/// `floor((input + 2 * padding - kernel) / stride) + 1`, or `None` when the
/// kernel does not fit.
pub fn output_extent(input: usize, kernel: usize, stride: usize, padding: usize) -> Option<usize> {
    let padded = input + 2 * padding;
    if stride == 0 || padded < kernel {
        return None;
    }
    Some((padded - kernel) / stride + 1)
}

struct Geometry {
    batch: usize,
    in_c: usize,
    in_h: usize,
    in_w: usize,
    out_c: usize,
    k_h: usize,
    k_w: usize,
    out_h: usize,
    out_w: usize,
}

fn geometry(input: &Tensor, kernel: &Tensor, bias: &[f32], spec: &ConvSpec) -> Result<Geometry> {
    let [batch, in_c, in_h, in_w] = input.dims();
    let [out_c, k_in, k_h, k_w] = kernel.dims();
    if k_in != in_c {
        return Err(Error::Shape(format!("kernel expects {k_in} input channels, input has {in_c}")));
    }
    if bias.len() != out_c {
        return Err(Error::Shape(format!("{} biases for {out_c} output channels", bias.len())));
    }
    if spec.stride == 0 {
        return Err(Error::Shape("stride must be at least 1".into()));
    }
    let out_h = output_extent(in_h, k_h, spec.stride, spec.padding);
    let out_w = output_extent(in_w, k_w, spec.stride, spec.padding);
    let (Some(out_h), Some(out_w)) = (out_h, out_w) else {
        return Err(Error::Shape(format!(
            "{k_h}x{k_w} kernel does not fit {in_h}x{in_w} input with padding {}",
            spec.padding
        )));
    };
    Ok(Geometry { batch, in_c, in_h, in_w, out_c, k_h, k_w, out_h, out_w })
}

/// Range of output columns whose tap `k` lands inside `0..input`.
fn valid_range(out: usize, input: usize, k: usize, stride: usize, padding: usize) -> (usize, usize) {
    // input index = o * stride + k - padding
    let lo = if padding > k { (padding - k).div_ceil(stride) } else { 0 };
    let hi = if input + padding > k { ((input + padding - k - 1) / stride + 1).min(out) } else { 0 };
    (lo.min(hi), hi)
}

pub fn conv2d(
    input: &Tensor,
    kernel: &Tensor,
    bias: &[f32],
    spec: &ConvSpec,
    algorithm: ConvAlgorithm,
) -> Result<Tensor> {
    match algorithm {
        ConvAlgorithm::Direct => conv2d_direct(input, kernel, bias, spec),
        ConvAlgorithm::Im2colGemm => conv2d_gemm(input, kernel, bias, spec),
    }
}

pub fn conv2d_direct(input: &Tensor, kernel: &Tensor, bias: &[f32], spec: &ConvSpec) -> Result<Tensor> {
    let g = geometry(input, kernel, bias, spec)?;
    let (s, p) = (spec.stride, spec.padding);
    let plane = g.out_h * g.out_w;
    let mut out = Tensor::zeros([g.batch, g.out_c, g.out_h, g.out_w]);
    let weights = kernel.data();
    let x_ranges: Vec<(usize, usize)> = (0..g.k_w).map(|kx| valid_range(g.out_w, g.in_w, kx, s, p)).collect();
    let y_ranges: Vec<(usize, usize)> = (0..g.k_h).map(|ky| valid_range(g.out_h, g.in_h, ky, s, p)).collect();

    for n in 0..g.batch {
        let src = input.item(n);
        let dst_item = out.item_mut(n);
        for oc in 0..g.out_c {
            let dst = &mut dst_item[oc * plane..(oc + 1) * plane];
            dst.fill(bias[oc]);
            for ic in 0..g.in_c {
                let src_plane = &src[ic * g.in_h * g.in_w..(ic + 1) * g.in_h * g.in_w];
                for ky in 0..g.k_h {
                    let (y_lo, y_hi) = y_ranges[ky];
                    for kx in 0..g.k_w {
                        let w = weights[((oc * g.in_c + ic) * g.k_h + ky) * g.k_w + kx];
                        let (x_lo, x_hi) = x_ranges[kx];
                        if x_lo >= x_hi {
                            continue;
                        }
                        for oy in y_lo..y_hi {
                            let iy = oy * s + ky - p;
                            let src_row = &src_plane[iy * g.in_w..(iy + 1) * g.in_w];
                            let dst_row = &mut dst[oy * g.out_w + x_lo..oy * g.out_w + x_hi];
                            let ix0 = x_lo * s + kx - p;
                            if s == 1 {
                                axpy(dst_row, &src_row[ix0..ix0 + dst_row.len()], w);
                            } else {
                                for (j, d) in dst_row.iter_mut().enumerate() {
                                    *d += w * src_row[ix0 + j * s];
                                }
                            }
                        }
                    }
                }
            }
            spec.activation.apply_slice(dst);
        }
    }
    Ok(out)
}

/// `dst += a * src`.
#[inline]
fn axpy(dst: &mut [f32], src: &[f32], a: f32) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2, checked just above.
            unsafe { axpy_avx2(dst, src, a) };
            return;
        }
    }
    axpy_generic(dst, src, a);
}

#[inline(always)]
fn axpy_generic(dst: &mut [f32], src: &[f32], a: f32) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += a * *s;
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn axpy_avx2(dst: &mut [f32], src: &[f32], a: f32) {
    axpy_generic(dst, src, a);
}

/// Lowers one batch item to a `(in_c * k_h * k_w) x (out_h * out_w)` matrix.
fn im2col(src: &[f32], g: &Geometry, stride: usize, padding: usize, col: &mut [f32]) {
    let cols = g.out_h * g.out_w;
    for ic in 0..g.in_c {
        let src_plane = &src[ic * g.in_h * g.in_w..(ic + 1) * g.in_h * g.in_w];
        for ky in 0..g.k_h {
            let (y_lo, y_hi) = valid_range(g.out_h, g.in_h, ky, stride, padding);
            for kx in 0..g.k_w {
                let (x_lo, x_hi) = valid_range(g.out_w, g.in_w, kx, stride, padding);
                let row = (ic * g.k_h + ky) * g.k_w + kx;
                let dst = &mut col[row * cols..(row + 1) * cols];
                dst.fill(0.0);
                if x_lo >= x_hi {
                    continue;
                }
                for oy in y_lo..y_hi {
                    let iy = oy * stride + ky - padding;
                    let src_row = &src_plane[iy * g.in_w..(iy + 1) * g.in_w];
                    let dst_row = &mut dst[oy * g.out_w + x_lo..oy * g.out_w + x_hi];
                    let ix0 = x_lo * stride + kx - padding;
                    if stride == 1 {
                        dst_row.copy_from_slice(&src_row[ix0..ix0 + dst_row.len()]);
                    } else {
                        for (j, d) in dst_row.iter_mut().enumerate() {
                            *d = src_row[ix0 + j * stride];
                        }
                    }
                }
            }
        }
    }
}

pub fn conv2d_gemm(input: &Tensor, kernel: &Tensor, bias: &[f32], spec: &ConvSpec) -> Result<Tensor> {
    let g = geometry(input, kernel, bias, spec)?;
    let (m, k, n) = (g.out_c, g.in_c * g.k_h * g.k_w, g.out_h * g.out_w);
    let pointwise = g.k_h == 1 && g.k_w == 1 && spec.stride == 1 && spec.padding == 0;
    let mut col = if pointwise { Vec::new() } else { vec![0.0f32; k * n] };
    let mut out = Tensor::zeros([g.batch, g.out_c, g.out_h, g.out_w]);

    for b in 0..g.batch {
        let src = input.item(b);
        let rhs: &[f32] = if pointwise {
            src
        } else {
            im2col(src, &g, spec.stride, spec.padding, &mut col);
            &col
        };
        let dst = out.item_mut(b);
        for (oc, row) in dst.chunks_exact_mut(n).enumerate() {
            row.fill(bias[oc]);
        }
        // SAFETY: `kernel` is m x k, `rhs` is k x n and `dst` is m x n, all
        // row-major and contiguous, matching the strides passed here.
        unsafe {
            matrixmultiply::sgemm(
                m,
                k,
                n,
                1.0,
                kernel.data().as_ptr(),
                k as isize,
                1,
                rhs.as_ptr(),
                n as isize,
                1,
                1.0,
                dst.as_mut_ptr(),
                n as isize,
                1,
            );
        }
        spec.activation.apply_slice(dst);
    }
    Ok(out)
}

/// Folds inference batch-norm into the preceding convolution:
/// `kernel' = kernel * gamma / sqrt(var + eps)` per output channel and
/// `bias' = beta - gamma * mean / sqrt(var + eps)`.
pub fn fold_batchnorm(kernel: &Tensor, bn: &BatchNorm, epsilon: f32) -> Result<(Tensor, Vec<f32>)> {
    let out_c = kernel.dims()[0];
    check_batchnorm(bn, out_c)?;
    let per_out = kernel.len() / out_c.max(1);
    let mut folded = kernel.clone();
    let mut bias = Vec::with_capacity(out_c);
    for (oc, weights) in folded.data_mut().chunks_exact_mut(per_out).enumerate() {
        let scale = (bn.gamma[oc] as f64 / ((bn.variance[oc] as f64) + epsilon as f64).sqrt()) as f32;
        for w in weights.iter_mut() {
            *w *= scale;
        }
        bias.push((bn.beta[oc] as f64 - bn.mean[oc] as f64 * scale as f64) as f32);
    }
    Ok((folded, bias))
}

fn check_batchnorm(bn: &BatchNorm, channels: usize) -> Result<()> {
    if [&bn.beta, &bn.gamma, &bn.mean, &bn.variance].iter().any(|v| v.len() != channels) {
        return Err(Error::Shape(format!("batch-norm parameters do not cover {channels} channels")));
    }
    if let Some((c, v)) = bn.variance.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0) {
        return Err(Error::data(format!("batch-norm variance of channel {c} is {v}; must be non-negative")));
    }
    Ok(())
}

/// Explicit inference batch-norm: `gamma * (x - mean) / sqrt(var + eps) + beta`.
pub fn batch_norm(t: &mut Tensor, bn: &BatchNorm, epsilon: f32) -> Result<()> {
    let [batch, channels, h, w] = t.dims();
    check_batchnorm(bn, channels)?;
    let plane = h * w;
    for n in 0..batch {
        for (c, values) in t.item_mut(n).chunks_exact_mut(plane).enumerate() {
            let denom = (bn.variance[c] + epsilon).sqrt();
            for v in values.iter_mut() {
                *v = bn.gamma[c] * (*v - bn.mean[c]) / denom + bn.beta[c];
            }
        }
    }
    Ok(())
}
