use std::path::Path;

use image::{ImageReader, RgbImage};

use crate::engine::Tensor;
use crate::error::{Error, Result};

fn image_error(path: &Path, source: image::ImageError) -> Error {
    match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        source => Error::Image { path: path.to_path_buf(), source },
    }
}

/// Width and height from the file header, without decoding pixels.
pub fn image_dimensions(path: &Path) -> Result<(u32, u32)> {
    image::image_dimensions(path).map_err(|e| image_error(path, e))
}

/// `(1, 3, H, W)` RGB tensor with values in `[0, 1]`.
pub fn rgb_to_tensor(image: &RgbImage) -> Tensor {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let mut data = vec![0.0f32; 3 * w * h];
    for (i, px) in image.pixels().enumerate() {
        for c in 0..3 {
            data[c * w * h + i] = px.0[c] as f32 / 255.0;
        }
    }
    Tensor::new([1, 3, h, w], data).expect("length matches dims")
}

/// Inverse of [`rgb_to_tensor`] for batch item 0, rounding to the nearest
/// 8-bit level.
pub fn tensor_to_rgb(tensor: &Tensor) -> Result<RgbImage> {
    let [_, c, h, w] = tensor.dims();
    if c != 3 || tensor.batch() == 0 {
        return Err(Error::Shape(format!("expected a 3-channel image, got {:?}", tensor.dims())));
    }
    let mut img = RgbImage::new(w as u32, h as u32);
    for (i, px) in img.pixels_mut().enumerate() {
        for k in 0..3 {
            px.0[k] = (tensor.plane(0, k)[i].clamp(0.0, 1.0) * 255.0).round() as u8;
        }
    }
    Ok(img)
}

/// Decodes a PNG or JPEG file into a `(1, 3, H, W)` tensor in `[0, 1]`.
pub fn load_image(path: &Path) -> Result<Tensor> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let image = reader.decode().map_err(|e| image_error(path, e))?;
    Ok(rgb_to_tensor(&image.to_rgb8()))
}

pub fn save_png(path: &Path, image: &RgbImage) -> Result<()> {
    image.save_with_format(path, image::ImageFormat::Png).map_err(|e| image_error(path, e))
}
