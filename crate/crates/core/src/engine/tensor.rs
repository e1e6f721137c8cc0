use crate::error::{Error, Result};

/// Dense `(batch, channels, height, width)` array of `f32`, row-major in
/// that axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: [usize; 4],
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: [usize; 4], data: Vec<f32>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "{} values for dims {dims:?} (expected {expected})",
                data.len()
            )));
        }
        Ok(Tensor { dims, data })
    }

    pub fn zeros(dims: [usize; 4]) -> Self {
        Tensor { dims, data: vec![0.0; dims.iter().product()] }
    }

    pub fn filled(dims: [usize; 4], value: f32) -> Self {
        Tensor { dims, data: vec![value; dims.iter().product()] }
    }

    pub fn from_fn(dims: [usize; 4], mut f: impl FnMut([usize; 4]) -> f32) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for n in 0..dims[0] {
            for c in 0..dims[1] {
                for y in 0..dims[2] {
                    for x in 0..dims[3] {
                        data.push(f([n, c, y, x]));
                    }
                }
            }
        }
        Tensor { dims, data }
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn batch(&self) -> usize {
        self.dims[0]
    }

    pub fn channels(&self) -> usize {
        self.dims[1]
    }

    pub fn height(&self) -> usize {
        self.dims[2]
    }

    pub fn width(&self) -> usize {
        self.dims[3]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    fn offset(&self, [n, c, y, x]: [usize; 4]) -> usize {
        ((n * self.dims[1] + c) * self.dims[2] + y) * self.dims[3] + x
    }

    pub fn get(&self, index: [usize; 4]) -> f32 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: [usize; 4], value: f32) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    /// One `height x width` plane.
    pub fn plane(&self, n: usize, c: usize) -> &[f32] {
        let size = self.dims[2] * self.dims[3];
        let start = (n * self.dims[1] + c) * size;
        &self.data[start..start + size]
    }

    /// All channels of batch item `n`.
    pub fn item(&self, n: usize) -> &[f32] {
        let size = self.dims[1] * self.dims[2] * self.dims[3];
        &self.data[n * size..(n + 1) * size]
    }

    pub fn item_mut(&mut self, n: usize) -> &mut [f32] {
        let size = self.dims[1] * self.dims[2] * self.dims[3];
        &mut self.data[n * size..(n + 1) * size]
    }

    /// Index of the first NaN or infinite value.
    pub fn first_non_finite(&self) -> Option<[usize; 4]> {
        let pos = self.data.iter().position(|v| !v.is_finite())?;
        let [_, c, h, w] = self.dims;
        Some([pos / (c * h * w), pos / (h * w) % c, pos / w % h, pos % w])
    }

    /// Largest absolute elementwise difference; `None` when dims differ.
    pub fn max_abs_diff(&self, other: &Tensor) -> Option<f32> {
        if self.dims != other.dims {
            return None;
        }
        Some(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f32::max))
    }
}
