//! Shared fixtures and independent reference implementations for the
//! integration and acceptance tests.
#![allow(dead_code)]

use detkit::darknet::{parse_config, ConvBias, NetworkConfig, WeightStore};
use detkit::dataset::{Rgb, RgbImage};
use detkit::{BoundingBox, Detection, GroundTruth};
use rand::Rng;

// ---------------------------------------------------------------------------
// Tiny two-scale detector with planted weights.
//
// 64x64 input. Layers 0-4 are 2x2 stride-2 average pools written as
// convolutions, so layer 3 holds per-16px-cell channel means and layers 4/6
// per-32px-cell means. Head 1 (layer 8, stride 32) fires on cells that are
// entirely red or green. Head 2 (layer 13, stride 16) fires on a fully
// colored 16px cell whose enclosing 32px cell is otherwise black.
// Red plants class 0, green class 1.

pub const TINY_CFG: &str = "\
[net]
width=64
height=64
channels=3

# 0: 32x32
[convolutional]
batch_normalize=1
filters=3
size=2
stride=2
pad=0
activation=linear

# 1: 16x16
[convolutional]
filters=3
size=2
stride=2
pad=0
activation=linear

# 2: 8x8
[convolutional]
filters=3
size=2
stride=2
pad=0
activation=linear

# 3: 4x4, stride 16
[convolutional]
filters=3
size=2
stride=2
pad=0
activation=linear

# 4: 2x2, stride 32
[convolutional]
filters=3
size=2
stride=2
pad=0
activation=linear

# 5
[convolutional]
filters=3
size=1
stride=1
activation=linear

# 6
[shortcut]
from=-2
activation=linear

# 7
[convolutional]
filters=7
size=1
stride=1
activation=linear

# 8
[yolo]
mask=1
anchors=16,16, 32,32
classes=2
num=2

# 9
[route]
layers=-3

# 10
[upsample]
stride=2

# 11: 32px means then 16px means
[route]
layers=-1,3

# 12
[convolutional]
filters=7
size=1
stride=1
activation=linear

# 13
[yolo]
mask=0
anchors=16,16, 32,32
classes=2
num=2
";

pub fn tiny_config() -> NetworkConfig {
    parse_config(TINY_CFG).expect("tiny cfg parses")
}

fn set_pool(store: &mut WeightStore, layer: usize) {
    let w = store.layers[layer].as_mut().unwrap();
    w.kernel.fill(0.0);
    for c in 0..3 {
        for k in 0..4 {
            w.kernel[(c * 3 + c) * 4 + k] = 0.25;
        }
    }
}

/// Rows of a 1x1 conv: `weights[o][i]` and `bias[o]`.
fn set_pointwise(store: &mut WeightStore, layer: usize, weights: &[Vec<f32>], bias: &[f32]) {
    let w = store.layers[layer].as_mut().unwrap();
    let in_c = w.in_channels;
    for (o, row) in weights.iter().enumerate() {
        assert_eq!(row.len(), in_c);
        w.kernel[o * in_c..(o + 1) * in_c].copy_from_slice(row);
    }
    match &mut w.bias {
        ConvBias::Plain(b) => b.copy_from_slice(bias),
        ConvBias::BatchNorm(_) => unreachable!("head convs have plain bias"),
    }
}

pub const OBJECT_GAIN: f32 = 100.0;

pub fn tiny_weights(config: &NetworkConfig) -> WeightStore {
    let mut store = WeightStore::zeros(config);
    for layer in 0..5 {
        set_pool(&mut store, layer);
    }
    // layer 0 batch-norm: non-trivial but exactly cancelling
    if let Some(ConvBias::BatchNorm(bn)) = store.layers[0].as_mut().map(|w| &mut w.bias) {
        bn.gamma = vec![2.0; 3];
        bn.variance = vec![4.0 - 1e-6; 3];
        bn.mean = vec![0.0; 3];
        bn.beta = vec![0.0; 3];
    }
    let g = OBJECT_GAIN;
    let z3 = vec![0.0; 3];
    // layer 7 reads (R32, G32, B32)
    set_pointwise(
        &mut store,
        7,
        &[z3.clone(), z3.clone(), z3.clone(), z3.clone(), vec![g, g, -2.0 * g], vec![g, -g, 0.0], vec![-g, g, 0.0]],
        &[0.0, 0.0, 0.0, 0.0, -90.0, 0.0, 0.0],
    );
    // layer 12 reads (R32, G32, B32, R16, G16, B16)
    let z6 = vec![0.0; 6];
    set_pointwise(
        &mut store,
        12,
        &[
            z6.clone(),
            z6.clone(),
            z6.clone(),
            z6,
            vec![-2.0 * g, -2.0 * g, 4.0 * g, g, g, -2.0 * g],
            vec![0.0, 0.0, 0.0, g, -g, 0.0],
            vec![0.0, 0.0, 0.0, -g, g, 0.0],
        ],
        &[0.0, 0.0, 0.0, 0.0, -40.0, 0.0, 0.0],
    );
    store
}

pub const CLASS_RGB: [[u8; 3]; 2] = [[255, 0, 0], [0, 255, 0]];

pub struct Scene {
    pub image: RgbImage,
    pub objects: Vec<(usize, BoundingBox)>,
}

impl Scene {
    pub fn ground_truth(&self, image_id: &str) -> Vec<GroundTruth> {
        self.objects.iter().map(|(c, b)| GroundTruth::new(image_id, *c, *b)).collect()
    }
}

/// A black `64 * scale` square image with rectangles aligned to the tiny
/// network's cells: each 32px cell is empty, fully colored, or holds one
/// colored 16px sub-cell.
pub fn planted_scene(rng: &mut impl Rng, scale: u32) -> Scene {
    let size = 64 * scale;
    let mut image = RgbImage::new(size, size);
    let mut objects = Vec::new();
    let mut fill = |image: &mut RgbImage, x0: u32, y0: u32, side: u32, class: usize| {
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                image.put_pixel(x, y, Rgb(CLASS_RGB[class]));
            }
        }
        let b = BoundingBox::new(x0 as f64, y0 as f64, (x0 + side) as f64, (y0 + side) as f64).unwrap();
        objects.push((class, b));
    };
    for cy in 0..2 {
        for cx in 0..2 {
            let class = rng.random_range(0..2);
            let big = 32 * scale;
            match rng.random_range(0..3) {
                0 => {}
                1 => fill(&mut image, cx * big, cy * big, big, class),
                _ => {
                    let sub = rng.random_range(0..4);
                    let small = 16 * scale;
                    fill(&mut image, cx * big + (sub % 2) * small, cy * big + (sub / 2) * small, small, class);
                }
            }
        }
    }
    Scene { image, objects }
}

// ---------------------------------------------------------------------------
// Reference IOU on corner tuples, independent of the library.

pub fn iou_ref(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> f64 {
    let iw = (a.2.min(b.2) - a.0.max(b.0)).max(0.0);
    let ih = (a.3.min(b.3) - a.1.max(b.1)).max(0.0);
    let inter = iw * ih;
    let union = (a.2 - a.0) * (a.3 - a.1) + (b.2 - b.0) * (b.3 - b.1) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

pub fn corners(b: &BoundingBox) -> (f64, f64, f64, f64) {
    (b.x_min(), b.y_min(), b.x_max(), b.y_max())
}

/// Unit-cell counts `(intersection, union)` of two integer boxes.
pub fn raster_counts(a: [i32; 4], b: [i32; 4]) -> (u64, u64) {
    let (mut inter, mut union) = (0, 0);
    let lo_x = a[0].min(b[0]);
    let hi_x = a[2].max(b[2]);
    let lo_y = a[1].min(b[1]);
    let hi_y = a[3].max(b[3]);
    let inside = |r: [i32; 4], x: i32, y: i32| x >= r[0] && x < r[2] && y >= r[1] && y < r[3];
    for y in lo_y..hi_y {
        for x in lo_x..hi_x {
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            inter += (ia && ib) as u64;
            union += (ia || ib) as u64;
        }
    }
    (inter, union)
}

// ---------------------------------------------------------------------------
// Brute-force evaluator: VOC-devkit style, written from scratch.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefMode {
    AllPoints,
    ElevenPoint,
}

/// `(tp flags in ranked order, number of ground truths)` for one class.
pub fn ref_match(dets: &[Detection], gts: &[GroundTruth], class_id: usize, thr: f64) -> (Vec<bool>, usize) {
    let mut ranked: Vec<(usize, &Detection)> = dets.iter().enumerate().filter(|(_, d)| d.class_id == class_id).collect();
    // stable by original index for equal confidences
    ranked.sort_by(|(ia, a), (ib, b)| b.confidence.partial_cmp(&a.confidence).unwrap().then(ia.cmp(ib)));
    let class_gts: Vec<&GroundTruth> = gts.iter().filter(|g| g.class_id == class_id).collect();
    let mut used = vec![false; class_gts.len()];
    let mut flags = Vec::with_capacity(ranked.len());
    for (_, d) in ranked {
        let mut best: Option<(usize, f64)> = None;
        for (k, g) in class_gts.iter().enumerate() {
            if used[k] || g.image_id != d.image_id {
                continue;
            }
            let o = iou_ref(corners(&d.bbox), corners(&g.bbox));
            if best.is_none_or(|(_, bo)| o > bo) {
                best = Some((k, o));
            }
        }
        match best {
            Some((k, o)) if o >= thr => {
                used[k] = true;
                flags.push(true);
            }
            _ => flags.push(false),
        }
    }
    (flags, class_gts.len())
}

pub fn ref_ap(flags: &[bool], total_gt: usize, mode: RefMode) -> Option<f64> {
    if total_gt == 0 {
        return if flags.is_empty() { None } else { Some(0.0) };
    }
    let mut rec = Vec::new();
    let mut prec = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    for &f in flags {
        if f {
            tp += 1
        } else {
            fp += 1
        }
        rec.push(tp as f64 / total_gt as f64);
        prec.push(tp as f64 / (tp + fp) as f64);
    }
    match mode {
        RefMode::AllPoints => {
            let mut mrec = vec![0.0];
            mrec.extend(&rec);
            mrec.push(1.0);
            let mut mpre = vec![0.0];
            mpre.extend(&prec);
            mpre.push(0.0);
            for i in (0..mpre.len() - 1).rev() {
                mpre[i] = mpre[i].max(mpre[i + 1]);
            }
            let mut ap = 0.0;
            for i in 1..mrec.len() {
                if mrec[i] != mrec[i - 1] {
                    ap += (mrec[i] - mrec[i - 1]) * mpre[i];
                }
            }
            Some(ap)
        }
        RefMode::ElevenPoint => {
            let mut ap = 0.0;
            for t in 0..=10 {
                let t = t as f64 / 10.0;
                let p = rec
                    .iter()
                    .zip(&prec)
                    .filter(|(r, _)| **r >= t)
                    .map(|(_, p)| *p)
                    .fold(0.0, f64::max);
                ap += p / 11.0;
            }
            Some(ap)
        }
    }
}

/// Per-class APs and the mAP over classes that have an AP.
pub fn ref_evaluate(
    dets: &[Detection],
    gts: &[GroundTruth],
    classes: usize,
    thr: f64,
    mode: RefMode,
) -> (Vec<Option<f64>>, Option<f64>) {
    let aps: Vec<Option<f64>> = (0..classes)
        .map(|c| {
            let (flags, n) = ref_match(dets, gts, c, thr);
            ref_ap(&flags, n, mode)
        })
        .collect();
    let present: Vec<f64> = aps.iter().flatten().copied().collect();
    let map = if present.is_empty() { None } else { Some(present.iter().sum::<f64>() / present.len() as f64) };
    (aps, map)
}

/// Random evaluation scene: 1-3 images, up to 10 ground truths and up to 20
/// detections over 2 classes. Detections are jittered copies of ground truth
/// mixed with random boxes; confidences are coarse so ties occur.
pub fn random_eval_scene(rng: &mut impl Rng) -> (Vec<Detection>, Vec<GroundTruth>) {
    let images = rng.random_range(1..=3);
    let random_box = |rng: &mut dyn rand::RngCore| {
        let x = rng.random_range(0.0..90.0);
        let y = rng.random_range(0.0..90.0);
        let w = rng.random_range(2.0..40.0);
        let h = rng.random_range(2.0..40.0);
        BoundingBox::new(x, y, x + w, y + h).unwrap()
    };
    let n_gt = rng.random_range(0..=10);
    let gts: Vec<GroundTruth> = (0..n_gt)
        .map(|_| {
            let img = format!("img{}", rng.random_range(0..images));
            GroundTruth::new(img, rng.random_range(0..2), random_box(rng))
        })
        .collect();
    let n_det = rng.random_range(0..=20);
    let dets = (0..n_det)
        .map(|_| {
            let confidence = rng.random_range(0..=20) as f64 / 20.0;
            if !gts.is_empty() && rng.random_bool(0.6) {
                let g = &gts[rng.random_range(0..gts.len())];
                let j = |rng: &mut dyn rand::RngCore| rng.random_range(-6.0..6.0);
                let b = BoundingBox::new(
                    g.bbox.x_min() + j(rng),
                    g.bbox.y_min() + j(rng),
                    g.bbox.x_max() + j(rng),
                    g.bbox.y_max() + j(rng),
                )
                .unwrap();
                let class = if rng.random_bool(0.85) { g.class_id } else { 1 - g.class_id };
                Detection::new(g.image_id.clone(), class, confidence, b).unwrap()
            } else {
                let img = format!("img{}", rng.random_range(0..images));
                Detection::new(img, rng.random_range(0..2), confidence, random_box(rng)).unwrap()
            }
        })
        .collect();
    (dets, gts)
}

// ---------------------------------------------------------------------------
// Reference NMS: per class, rank by confidence (index breaks ties) and keep a
// box only when no already-kept box of its class overlaps it above `thr`.

pub fn ref_nms(items: &[Detection], thr: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].confidence.partial_cmp(&items[a].confidence).unwrap().then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let clash = kept.iter().any(|&k| {
            items[k].class_id == items[i].class_id && iou_ref(corners(&items[k].bbox), corners(&items[i].bbox)) > thr
        });
        if !clash {
            kept.push(i);
        }
    }
    kept
}

pub fn random_nms_set(rng: &mut impl Rng) -> Vec<Detection> {
    let n = rng.random_range(0..=30);
    (0..n)
        .map(|_| {
            // clustered boxes so suppression actually happens
            let cx = rng.random_range(0..3) as f64 * 30.0 + rng.random_range(-5.0..5.0);
            let cy = rng.random_range(0..3) as f64 * 30.0 + rng.random_range(-5.0..5.0);
            let w = rng.random_range(8.0..30.0);
            let h = rng.random_range(8.0..30.0);
            let b = BoundingBox::from_center(cx, cy, w, h).unwrap();
            let confidence = rng.random_range(0..=50) as f64 / 50.0;
            Detection::new("img", rng.random_range(0..2), confidence, b).unwrap()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Reference convolution: six nested loops, f64 accumulation, explicit bounds.

pub fn ref_conv(
    input: &[f32],
    dims: [usize; 4],
    kernel: &[f32],
    kdims: [usize; 4],
    bias: &[f32],
    stride: usize,
    pad: usize,
) -> (Vec<f32>, [usize; 4]) {
    let [b, ic, ih, iw] = dims;
    let [oc, _, kh, kw] = kdims;
    let oh = (ih + 2 * pad - kh) / stride + 1;
    let ow = (iw + 2 * pad - kw) / stride + 1;
    let mut out = vec![0.0f32; b * oc * oh * ow];
    for n in 0..b {
        for o in 0..oc {
            for y in 0..oh {
                for x in 0..ow {
                    let mut acc = bias[o] as f64;
                    for i in 0..ic {
                        for ky in 0..kh {
                            for kx in 0..kw {
                                let sy = (y * stride + ky) as isize - pad as isize;
                                let sx = (x * stride + kx) as isize - pad as isize;
                                if sy < 0 || sx < 0 || sy >= ih as isize || sx >= iw as isize {
                                    continue;
                                }
                                let iv = input[((n * ic + i) * ih + sy as usize) * iw + sx as usize] as f64;
                                let kv = kernel[((o * ic + i) * kh + ky) * kw + kx] as f64;
                                acc += iv * kv;
                            }
                        }
                    }
                    out[((n * oc + o) * oh + y) * ow + x] = acc as f32;
                }
            }
        }
    }
    (out, [b, oc, oh, ow])
}

pub fn rel_close(a: f32, b: f32, tol: f32) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

// ---------------------------------------------------------------------------
// On-disk fixtures.

/// YOLO-txt lines for pixel boxes in an image of the given size.
pub fn annotation_text(objects: &[(usize, BoundingBox)], width: u32, height: u32) -> String {
    let mut out = String::new();
    for (c, b) in objects {
        let (cx, cy, w, h) = b.to_normalized_center(width as f64, height as f64);
        out += &format!("{c} {cx} {cy} {w} {h}\n");
    }
    out
}

pub const FIXTURE_SCENES: usize = 6;

/// Scenes `scene0..scene5` (PNG + annotation) and `perfect.txt`, a detection
/// file equal to the ground truth at confidence 1.
pub fn write_scene_fixture(dir: &std::path::Path) {
    use rand::SeedableRng;
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut perfect = Vec::new();
    for i in 0..FIXTURE_SCENES {
        let scene = planted_scene(&mut rng, if i < 4 { 1 } else { 2 });
        let id = format!("scene{i}");
        detkit::dataset::save_png(&dir.join(format!("{id}.png")), &scene.image).unwrap();
        let (w, h) = scene.image.dimensions();
        std::fs::write(dir.join(format!("{id}.txt")), annotation_text(&scene.objects, w, h)).unwrap();
        for (c, b) in &scene.objects {
            perfect.push(Detection::new(id.clone(), *c, 1.0, *b).unwrap());
        }
    }
    detkit::dataset::save_detections(&dir.join("perfect.txt"), &perfect).unwrap();
}

/// Per-class APs at IOU 0.3 / 0.5 / 0.7 reported for the two detectors.
pub const TABLE_YOLO: [[f64; 3]; 2] = [[0.8078, 0.8035, 0.7387], [0.6909, 0.6824, 0.6084]];
pub const TABLE_SSD: [[f64; 3]; 2] = [[0.8042, 0.8042, 0.7726], [0.5951, 0.5875, 0.5613]];

const TABLE_GRID: u32 = 100;
const TABLE_CELL: f64 = 20.0;
const TABLE_BOX: f64 = 10.0;

/// Ground truth for the table reconstruction: image `class{c}` holds a
/// 100x100 grid of 10px boxes of class `c`.
pub fn write_table_ground_truth(dir: &std::path::Path) {
    std::fs::create_dir_all(dir).unwrap();
    let side = TABLE_GRID * TABLE_CELL as u32;
    for c in 0..2 {
        let objects: Vec<_> = (0..TABLE_GRID * TABLE_GRID).map(|k| (c, table_box(k))).collect();
        detkit::dataset::save_png(&dir.join(format!("class{c}.png")), &RgbImage::new(side, side)).unwrap();
        std::fs::write(dir.join(format!("class{c}.txt")), annotation_text(&objects, side, side)).unwrap();
    }
}

fn table_box(k: u32) -> BoundingBox {
    let (x, y) = ((k % TABLE_GRID) as f64 * TABLE_CELL, (k / TABLE_GRID) as f64 * TABLE_CELL);
    BoundingBox::new(x, y, x + TABLE_BOX, y + TABLE_BOX).unwrap()
}

/// Detections whose AP at 0.3 / 0.5 / 0.7 equals `aps[class]` exactly: the
/// highest-ranked boxes overlap their ground truth at IOU 0.8, then 0.6,
/// then 0.4, so each threshold sees a perfect-precision prefix of
/// `ap * 10000` true positives.
pub fn table_detections(aps: &[[f64; 3]; 2]) -> Vec<Detection> {
    let n = (TABLE_GRID * TABLE_GRID) as f64;
    let mut out = Vec::new();
    for (c, [a3, a5, a7]) in aps.iter().enumerate() {
        let (n3, n5, n7) = ((a3 * n).round() as u32, (a5 * n).round() as u32, (a7 * n).round() as u32);
        assert!(n3 >= n5 && n5 >= n7);
        for k in 0..n3 {
            let iou = if k < n7 {
                0.8
            } else if k < n5 {
                0.6
            } else {
                0.4
            };
            // shift along x: IOU = (w - dx) / (w + dx)
            let dx = TABLE_BOX * (1.0 - iou) / (1.0 + iou);
            let b = table_box(k).translate(dx, 0.0).unwrap();
            let confidence = 1.0 - k as f64 / n;
            out.push(Detection::new(format!("class{c}"), c, confidence, b).unwrap());
        }
    }
    out
}
