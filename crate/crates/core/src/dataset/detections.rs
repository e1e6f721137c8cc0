use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Location, Result};
use crate::eval::Detection;
use crate::geometry::BoundingBox;

pub fn parse_detections(text: &str, path: Option<&Path>) -> Result<Vec<Detection>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || Location::line(path.map(Path::to_path_buf), n + 1);
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if fields.len() != 7 {
            return Err(Error::data_at(
                at(),
                format!(
                    "expected `image_id class_id confidence x_min y_min x_max y_max`, found {} fields",
                    fields.len()
                ),
            ));
        }
        let class_id: usize =
            fields[1].parse().map_err(|_| Error::data_at(at(), format!("bad class id `{}`", fields[1])))?;
        let mut v = [0.0f64; 5];
        for (slot, field) in v.iter_mut().zip(&fields[2..]) {
            *slot = field.parse().map_err(|_| Error::data_at(at(), format!("bad number `{field}`")))?;
        }
        let confidence = v[0];
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::data_at(at(), format!("confidence {confidence} is outside [0, 1]")));
        }
        let bbox = BoundingBox::new(v[1], v[2], v[3], v[4]).map_err(|e| Error::data_at(at(), e.to_string()))?;
        out.push(Detection::new(fields[0], class_id, confidence, bbox).map_err(|e| Error::data_at(at(), e.to_string()))?);
    }
    Ok(out)
}

pub fn load_detections(path: &Path) -> Result<Vec<Detection>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detections(&text, Some(path))
}

/// One line per detection, space separated. Numbers print in shortest
/// round-trip form so parsing the output reproduces the input exactly.
pub fn format_detections(detections: &[Detection]) -> String {
    let mut out = String::new();
    for d in detections {
        let b = &d.bbox;
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            d.image_id,
            d.class_id,
            d.confidence,
            b.x_min(),
            b.y_min(),
            b.x_max(),
            b.y_max()
        );
    }
    out
}

pub fn save_detections(path: &Path, detections: &[Detection]) -> Result<()> {
    fs::write(path, format_detections(detections)).map_err(|e| Error::io(path, e))
}
