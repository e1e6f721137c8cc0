use font8x8::legacy::BASIC_LEGACY;
use image::{Rgb, RgbImage};

use crate::classes::ClassMap;
use crate::eval::Detection;

/// Outline colors, cycled by class id.
pub const CLASS_COLORS: [[u8; 3]; 8] = [
    [0, 200, 0],
    [230, 30, 30],
    [30, 100, 255],
    [255, 200, 0],
    [200, 0, 220],
    [0, 210, 210],
    [255, 120, 0],
    [140, 140, 140],
];

const GLYPH: u32 = 8;

pub fn class_color(class_id: usize) -> Rgb<u8> {
    Rgb(CLASS_COLORS[class_id % CLASS_COLORS.len()])
}

fn put(img: &mut RgbImage, x: i64, y: i64, color: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, color);
    }
}

/// Draws `text` with its top-left corner at `(x, y)`, clipped to the image.
/// Characters outside ASCII render as `?`.
pub fn draw_label(img: &mut RgbImage, x: i64, y: i64, text: &str, color: Rgb<u8>) {
    for (i, ch) in text.chars().enumerate() {
        let code = if ch.is_ascii() { ch as usize } else { '?' as usize };
        let glyph = BASIC_LEGACY[code];
        let gx = x + (i as i64) * GLYPH as i64;
        for (row, bits) in glyph.iter().enumerate() {
            for col in 0..GLYPH {
                if bits >> col & 1 == 1 {
                    put(img, gx + col as i64, y + row as i64, color);
                }
            }
        }
    }
}

/// Copy of `image` with a 1-pixel outline per detection in its class color
/// and a `name: 0.95` label above the box (inside it when the box touches
/// the top edge). Detections are drawn in the given order.
pub fn render_annotated(image: &RgbImage, detections: &[Detection], classes: &ClassMap) -> RgbImage {
    let mut out = image.clone();
    if out.width() == 0 || out.height() == 0 {
        return out;
    }
    let (max_x, max_y) = (out.width() as i64 - 1, out.height() as i64 - 1);
    for d in detections {
        let color = class_color(d.class_id);
        let b = &d.bbox;
        let x0 = (b.x_min().floor() as i64).clamp(0, max_x);
        let y0 = (b.y_min().floor() as i64).clamp(0, max_y);
        let x1 = ((b.x_max().ceil() as i64) - 1).clamp(x0, max_x);
        let y1 = ((b.y_max().ceil() as i64) - 1).clamp(y0, max_y);
        for x in x0..=x1 {
            put(&mut out, x, y0, color);
            put(&mut out, x, y1, color);
        }
        for y in y0..=y1 {
            put(&mut out, x0, y, color);
            put(&mut out, x1, y, color);
        }
        let name = classes.name(d.class_id).map_or_else(|| format!("class {}", d.class_id), str::to_string);
        let label = format!("{name}: {:.2}", d.confidence);
        let ly = if y0 > GLYPH as i64 { y0 - GLYPH as i64 - 1 } else { y0 + 2 };
        draw_label(&mut out, x0, ly, &label, color);
    }
    out
}
