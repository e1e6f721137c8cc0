//! Files on disk: image/annotation manifests, YOLO-txt ground truth,
//! detection interchange files, image decoding and annotated rendering.
//!
//! Ground truth uses one `.txt` per image with lines
//! `class_id cx cy w h`, all normalized to `[0, 1]` by the image size.
//!
//! Detection files hold one detection per line:
//! `image_id class_id confidence x_min y_min x_max y_max` in source-image
//! pixels. Fields may be separated by whitespace or commas; blank lines and
//! lines starting with `#` are skipped.

mod detections;
mod image_io;
mod render;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

pub use detections::{format_detections, load_detections, parse_detections, save_detections};
pub use image_io::{image_dimensions, load_image, rgb_to_tensor, save_png, tensor_to_rgb};
pub use image::{Rgb, RgbImage};
pub use render::{class_color, draw_label, render_annotated, CLASS_COLORS};

use crate::classes::ClassMap;
use crate::error::{Error, Location, Result};
use crate::eval::GroundTruth;
use crate::geometry::BoundingBox;

/// File extensions recognized as images when scanning a directory.
pub const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// File stem of the image; ties detections to ground truth.
    pub image_id: String,
    pub image: PathBuf,
    pub annotation: Option<PathBuf>,
}

/// Images paired with their annotation files.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::data_at(Location { path: Some(path.into()), ..Default::default() }, "no usable file name"))
}

fn existing(path: PathBuf) -> Option<PathBuf> {
    path.is_file().then_some(path)
}

impl DatasetManifest {
    /// A directory, or a listing file when `path` is a regular file.
    pub fn load(path: &Path) -> Result<Self> {
        if path.is_dir() {
            Self::from_dir(path)
        } else if path.is_file() {
            Self::from_listing(path)
        } else {
            Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory")))
        }
    }

    /// Every image in `dir` (not recursive), sorted by file name. The
    /// annotation is the `.txt` file with the same stem, when present.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut images: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_image(p))
            .collect();
        images.sort();
        let mut entries = Vec::with_capacity(images.len());
        for image in images {
            let annotation = existing(image.with_extension("txt"));
            entries.push(ManifestEntry { image_id: stem(&image)?, image, annotation });
        }
        Self::from_entries(entries).map_err(|e| e.with_path(dir))
    }

    /// One image per line, optionally followed by its annotation path.
    /// Relative paths resolve against the listing's directory. Without an
    /// explicit annotation the same-stem `.txt` is used if it exists.
    pub fn from_listing(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut entries = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = || Location::line(Some(path.to_path_buf()), n + 1);
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() > 2 {
                return Err(Error::data_at(at(), "expected `image [annotation]`"));
            }
            let image = base.join(fields[0]);
            if !image.is_file() {
                return Err(Error::data_at(at(), format!("image {} does not exist", image.display())));
            }
            let annotation = match fields.get(1) {
                Some(a) => {
                    let a = base.join(a);
                    if !a.is_file() {
                        return Err(Error::data_at(at(), format!("annotation {} does not exist", a.display())));
                    }
                    Some(a)
                }
                None => existing(image.with_extension("txt")),
            };
            entries.push(ManifestEntry { image_id: stem(&image)?, image, annotation });
        }
        Self::from_entries(entries).map_err(|e| e.with_path(path))
    }

    pub fn from_entries(entries: Vec<ManifestEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.image_id.as_str()) {
                return Err(Error::data(format!("image id `{}` appears more than once", e.image_id)));
            }
        }
        Ok(DatasetManifest { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn image_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.image_id.as_str())
    }
}

/// Parses one YOLO-txt annotation file for an image of the given size.
pub fn parse_annotations(
    text: &str,
    path: Option<&Path>,
    image_id: &str,
    image_width: u32,
    image_height: u32,
    classes: &ClassMap,
) -> Result<Vec<GroundTruth>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || Location::line(path.map(Path::to_path_buf), n + 1);
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::data_at(
                at(),
                format!("expected `class_id cx cy w h`, found {} fields", fields.len()),
            ));
        }
        let class_id: usize =
            fields[0].parse().map_err(|_| Error::data_at(at(), format!("bad class id `{}`", fields[0])))?;
        if !classes.contains(class_id) {
            return Err(Error::data_at(
                at(),
                format!("unknown class id {class_id} ({} classes defined)", classes.len()),
            ));
        }
        let mut v = [0.0f64; 4];
        for (slot, (field, name)) in v.iter_mut().zip(fields[1..].iter().zip(["cx", "cy", "w", "h"])) {
            let x: f64 = field.parse().map_err(|_| Error::data_at(at(), format!("bad {name} `{field}`")))?;
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::data_at(at(), format!("{name} = {x} is outside [0, 1]")));
            }
            *slot = x;
        }
        let bbox = BoundingBox::from_normalized_center(
            v[0],
            v[1],
            v[2],
            v[3],
            image_width as f64,
            image_height as f64,
        )
        .map_err(|e| Error::data_at(at(), e.to_string()))?;
        out.push(GroundTruth::new(image_id, class_id, bbox));
    }
    Ok(out)
}

/// Ground truth for every manifest entry, in manifest order. Image sizes are
/// read from the image headers.
pub fn load_ground_truth(manifest: &DatasetManifest, classes: &ClassMap) -> Result<Vec<GroundTruth>> {
    let mut out = Vec::new();
    for entry in &manifest.entries {
        let Some(annotation) = &entry.annotation else {
            return Err(Error::data_at(
                Location { path: Some(entry.image.clone()), ..Default::default() },
                "no annotation file for this image",
            ));
        };
        let (w, h) = image_dimensions(&entry.image)?;
        let text = fs::read_to_string(annotation).map_err(|e| Error::io(annotation, e))?;
        out.extend(parse_annotations(&text, Some(annotation), &entry.image_id, w, h, classes)?);
    }
    Ok(out)
}
