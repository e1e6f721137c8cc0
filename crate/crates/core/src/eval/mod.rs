//! Detection evaluation: greedy matching against ground truth, precision /
//! recall curves, average precision and its per-class mean.
//!
//! Matching follows the Pascal-VOC convention. Detections of one class are
//! ranked by descending confidence (stable on input order). Each detection
//! takes the unmatched ground-truth object of the same image it overlaps
//! best; it is a true positive when that overlap reaches the IOU threshold,
//! and the object is then consumed. Everything else is a false positive, and
//! objects never consumed are false negatives.
//!
//! All metric arithmetic is done in `f64`.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::classes::ClassMap;
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

pub mod report;

/// IOU thresholds reported by default.
pub const DEFAULT_IOU_THRESHOLDS: [f64; 3] = [0.3, 0.5, 0.7];

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image_id: String,
    pub class_id: usize,
    pub confidence: f64,
    pub bbox: BoundingBox,
}

impl Detection {
    /// Rejects confidences that are NaN or outside `[0, 1]`.
    pub fn new(
        image_id: impl Into<String>,
        class_id: usize,
        confidence: f64,
        bbox: BoundingBox,
    ) -> Result<Self> {
        check_confidence(confidence)?;
        Ok(Detection { image_id: image_id.into(), class_id, confidence, bbox })
    }
}

fn check_confidence(confidence: f64) -> Result<()> {
    if confidence.is_nan() {
        return Err(Error::data("detection confidence is NaN"));
    }
    if !(0.0..=1.0).contains(&confidence) {
        return Err(Error::data(format!("detection confidence {confidence} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image_id: String,
    pub class_id: usize,
    pub bbox: BoundingBox,
}

impl GroundTruth {
    pub fn new(image_id: impl Into<String>, class_id: usize, bbox: BoundingBox) -> Self {
        GroundTruth { image_id: image_id.into(), class_id, bbox }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Index of the consumed ground-truth object in the matcher's input.
    TruePositive { ground_truth: usize },
    FalsePositive,
}

impl Verdict {
    pub fn is_true_positive(&self) -> bool {
        matches!(self, Verdict::TruePositive { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRecord {
    /// Index of the detection in the matcher's input.
    pub detection: usize,
    pub confidence: f64,
    pub verdict: Verdict,
}

/// Ranked match records of one class at one IOU threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// In rank order: descending confidence, ties in input order.
    pub records: Vec<MatchRecord>,
    pub false_negatives: usize,
    pub total_ground_truth: usize,
}

impl Matching {
    pub fn true_positives(&self) -> usize {
        self.records.iter().filter(|r| r.verdict.is_true_positive()).count()
    }

    pub fn false_positives(&self) -> usize {
        self.records.len() - self.true_positives()
    }
}

pub(crate) fn check_iou_threshold(iou_threshold: f64) -> Result<()> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::argument(
            "iou_threshold",
            format!("{iou_threshold} is outside (0, 1]"),
        ));
    }
    Ok(())
}

/// Greedy one-to-one matching of detections to ground truth.
///
/// Class ids are not inspected; callers partition by class first. Images are
/// kept apart by `image_id`.
pub fn match_detections<D, G>(detections: &[D], ground_truth: &[G], iou_threshold: f64) -> Result<Matching>
where
    D: Borrow<Detection>,
    G: Borrow<GroundTruth>,
{
    check_iou_threshold(iou_threshold)?;
    for det in detections {
        if det.borrow().confidence.is_nan() {
            return Err(Error::data(format!(
                "detection on image `{}` has NaN confidence",
                det.borrow().image_id
            )));
        }
    }

    let mut by_image: HashMap<&str, Vec<usize>> = HashMap::new();
    for (idx, gt) in ground_truth.iter().enumerate() {
        by_image.entry(gt.borrow().image_id.as_str()).or_default().push(idx);
    }

    let mut order: Vec<usize> = (0..detections.len()).collect();
    // sort_by is stable, so equal confidences keep input order
    order.sort_by(|&a, &b| {
        detections[b].borrow().confidence.total_cmp(&detections[a].borrow().confidence)
    });

    let mut consumed = vec![false; ground_truth.len()];
    let mut records = Vec::with_capacity(detections.len());
    for idx in order {
        let det = detections[idx].borrow();
        let mut best: Option<(usize, f64)> = None;
        if let Some(candidates) = by_image.get(det.image_id.as_str()) {
            for &g in candidates {
                if consumed[g] {
                    continue;
                }
                let overlap = det.bbox.iou(&ground_truth[g].borrow().bbox);
                if best.is_none_or(|(_, o)| overlap > o) {
                    best = Some((g, overlap));
                }
            }
        }
        let verdict = match best {
            Some((g, overlap)) if overlap >= iou_threshold => {
                consumed[g] = true;
                Verdict::TruePositive { ground_truth: g }
            }
            _ => Verdict::FalsePositive,
        };
        records.push(MatchRecord { detection: idx, confidence: det.confidence, verdict });
    }

    let false_negatives = consumed.iter().filter(|c| !**c).count();
    Ok(Matching { records, false_negatives, total_ground_truth: ground_truth.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub precision: f64,
    pub recall: f64,
    /// Confidence of the lowest-ranked detection in this prefix.
    pub confidence: f64,
}

/// One precision/recall point per rank prefix. With no ground truth the
/// recall is defined as 0.
pub fn precision_recall(records: &[MatchRecord], total_ground_truth: usize) -> Vec<PrPoint> {
    let mut tp = 0usize;
    let mut curve = Vec::with_capacity(records.len());
    for (rank, record) in records.iter().enumerate() {
        if record.verdict.is_true_positive() {
            tp += 1;
        }
        let precision = tp as f64 / (rank + 1) as f64;
        let recall = if total_ground_truth == 0 {
            0.0
        } else {
            tp as f64 / total_ground_truth as f64
        };
        curve.push(PrPoint { precision, recall, confidence: record.confidence });
    }
    curve
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum ApMode {
    /// Area under the interpolated precision envelope at every recall step.
    #[default]
    AllPoints,
    /// Mean interpolated precision at recall 0, 0.1, ..., 1.0.
    ElevenPoint,
}

impl ApMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ApMode::AllPoints => "all-points",
            ApMode::ElevenPoint => "eleven-point",
        }
    }
}

impl fmt::Display for ApMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ApMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-points" | "all_points" | "allpoints" => Ok(ApMode::AllPoints),
            "eleven-point" | "eleven_point" | "11-point" => Ok(ApMode::ElevenPoint),
            other => Err(Error::argument(
                "mode",
                format!("unknown AP mode `{other}` (expected all-points or eleven-point)"),
            )),
        }
    }
}

/// Average precision of a curve produced by [`precision_recall`].
pub fn average_precision(curve: &[PrPoint], mode: ApMode) -> f64 {
    if curve.is_empty() {
        return 0.0;
    }
    // envelope[k] = max precision over points k.. (recall is non-decreasing)
    let mut envelope = vec![0.0f64; curve.len()];
    let mut running = 0.0f64;
    for k in (0..curve.len()).rev() {
        running = running.max(curve[k].precision);
        envelope[k] = running;
    }

    let ap = match mode {
        ApMode::AllPoints => {
            let mut ap = 0.0;
            let mut prev_recall = 0.0;
            for (point, interp) in curve.iter().zip(&envelope) {
                if point.recall > prev_recall {
                    ap += (point.recall - prev_recall) * interp;
                    prev_recall = point.recall;
                }
            }
            ap
        }
        ApMode::ElevenPoint => {
            let mut sum = 0.0;
            for step in 0..=10 {
                let level = step as f64 / 10.0;
                let first = curve.iter().position(|p| p.recall >= level);
                sum += first.map_or(0.0, |k| envelope[k]);
            }
            sum / 11.0
        }
    };
    ap.clamp(0.0, 1.0)
}

/// Arithmetic mean of per-class APs.
pub fn mean_average_precision(aps: &[f64]) -> Result<f64> {
    if aps.is_empty() {
        return Err(Error::argument("aps", "cannot average an empty list of APs"));
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApResult {
    pub class_id: usize,
    pub iou_threshold: f64,
    /// `None` when the class has neither ground truth nor detections; such
    /// classes are left out of the mAP.
    pub ap: Option<f64>,
    pub curve: Vec<PrPoint>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub total_ground_truth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub iou_threshold: f64,
    /// Indexed by class id.
    pub classes: Vec<ApResult>,
    /// `None` when no class is applicable.
    pub map: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mode: ApMode,
    pub class_names: Vec<String>,
    pub thresholds: Vec<ThresholdReport>,
}

impl EvalReport {
    pub fn threshold(&self, iou_threshold: f64) -> Option<&ThresholdReport> {
        self.thresholds.iter().find(|t| t.iou_threshold == iou_threshold)
    }

    pub fn ap(&self, iou_threshold: f64, class_id: usize) -> Option<f64> {
        self.threshold(iou_threshold)?.classes.get(class_id)?.ap
    }

    pub fn map(&self, iou_threshold: f64) -> Option<f64> {
        self.threshold(iou_threshold)?.map
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub iou_thresholds: Vec<f64>,
    pub mode: ApMode,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { iou_thresholds: DEFAULT_IOU_THRESHOLDS.to_vec(), mode: ApMode::AllPoints }
    }
}

/// Runs match, precision/recall and AP for every class at every threshold.
pub fn evaluate(
    detections: &[Detection],
    ground_truth: &[GroundTruth],
    class_map: &ClassMap,
    options: &EvalOptions,
) -> Result<EvalReport> {
    if options.iou_thresholds.is_empty() {
        return Err(Error::argument("iou_thresholds", "at least one threshold is required"));
    }
    for &t in &options.iou_thresholds {
        check_iou_threshold(t)?;
    }
    validate_inputs(detections, ground_truth, class_map)?;

    let classes = class_map.len();
    let mut dets_by_class: Vec<Vec<&Detection>> = vec![Vec::new(); classes];
    for det in detections {
        dets_by_class[det.class_id].push(det);
    }
    let mut gts_by_class: Vec<Vec<&GroundTruth>> = vec![Vec::new(); classes];
    for gt in ground_truth {
        gts_by_class[gt.class_id].push(gt);
    }

    let mut thresholds = Vec::with_capacity(options.iou_thresholds.len());
    for &iou_threshold in &options.iou_thresholds {
        let mut results = Vec::with_capacity(classes);
        for class_id in 0..classes {
            let dets = &dets_by_class[class_id];
            let gts = &gts_by_class[class_id];
            let matching = match_detections(dets, gts, iou_threshold)?;
            let curve = precision_recall(&matching.records, matching.total_ground_truth);
            let ap = if gts.is_empty() && dets.is_empty() {
                None
            } else if gts.is_empty() {
                Some(0.0)
            } else {
                Some(average_precision(&curve, options.mode))
            };
            results.push(ApResult {
                class_id,
                iou_threshold,
                ap,
                true_positives: matching.true_positives(),
                false_positives: matching.false_positives(),
                false_negatives: matching.false_negatives,
                total_ground_truth: matching.total_ground_truth,
                curve,
            });
        }
        let applicable: Vec<f64> = results.iter().filter_map(|r| r.ap).collect();
        let map = mean_average_precision(&applicable).ok();
        thresholds.push(ThresholdReport { iou_threshold, classes: results, map });
    }

    Ok(EvalReport { mode: options.mode, class_names: class_map.names().to_vec(), thresholds })
}

const MAX_LISTED: usize = 10;

fn validate_inputs(detections: &[Detection], ground_truth: &[GroundTruth], class_map: &ClassMap) -> Result<()> {
    let mut offending = Vec::new();
    for (idx, det) in detections.iter().enumerate() {
        if !class_map.contains(det.class_id) {
            offending.push(format!("detection #{idx} (image `{}`, class {})", det.image_id, det.class_id));
        }
    }
    for (idx, gt) in ground_truth.iter().enumerate() {
        if !class_map.contains(gt.class_id) {
            offending.push(format!("ground truth #{idx} (image `{}`, class {})", gt.image_id, gt.class_id));
        }
    }
    if !offending.is_empty() {
        let total = offending.len();
        let mut listed = offending.into_iter().take(MAX_LISTED).collect::<Vec<_>>().join(", ");
        if total > MAX_LISTED {
            listed.push_str(&format!(", ... ({} more)", total - MAX_LISTED));
        }
        return Err(Error::data(format!(
            "{total} record(s) reference classes absent from the {}-class map: {listed}",
            class_map.len()
        )));
    }
    for (idx, det) in detections.iter().enumerate() {
        check_confidence(det.confidence).map_err(|e| {
            Error::data(format!("detection #{idx} (image `{}`): {e}", det.image_id))
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    fn det(image: &str, class_id: usize, confidence: f64, b: BoundingBox) -> Detection {
        Detection::new(image, class_id, confidence, b).unwrap()
    }

    fn records(verdicts: &[bool]) -> Vec<MatchRecord> {
        verdicts
            .iter()
            .enumerate()
            .map(|(i, &tp)| MatchRecord {
                detection: i,
                confidence: 1.0 - i as f64 * 0.01,
                verdict: if tp { Verdict::TruePositive { ground_truth: i } } else { Verdict::FalsePositive },
            })
            .collect()
    }

    #[test]
    fn low_overlap_is_false_positive() {
        // IOU = 4 / 10 = 0.4
        let gt = [GroundTruth::new("a", 0, bb(0.0, 0.0, 2.0, 2.0))];
        let d = [det("a", 0, 0.9, bb(0.0, 0.0, 2.0, 5.0))];
        assert!((d[0].bbox.iou(&gt[0].bbox) - 0.4).abs() < 1e-12);
        let m = match_detections(&d, &gt, 0.5).unwrap();
        assert_eq!(m.records[0].verdict, Verdict::FalsePositive);
        assert_eq!(m.false_negatives, 1);
    }

    #[test]
    fn iou_equal_to_threshold_is_true_positive() {
        let gt = [GroundTruth::new("a", 0, bb(0.0, 0.0, 2.0, 2.0))];
        let d = [det("a", 0, 0.9, bb(0.0, 0.0, 2.0, 4.0))];
        let m = match_detections(&d, &gt, 0.5).unwrap();
        assert!(m.records[0].verdict.is_true_positive());
    }

    #[test]
    fn duplicate_detection_is_false_positive() {
        let gt = [GroundTruth::new("a", 0, bb(0.0, 0.0, 10.0, 10.0))];
        let d = [det("a", 0, 0.8, bb(0.0, 0.0, 10.0, 9.0)), det("a", 0, 0.9, bb(0.0, 0.0, 10.0, 10.0))];
        let m = match_detections(&d, &gt, 0.5).unwrap();
        assert_eq!(m.records[0].detection, 1);
        assert_eq!(m.records[0].verdict, Verdict::TruePositive { ground_truth: 0 });
        assert_eq!(m.records[1].detection, 0);
        assert_eq!(m.records[1].verdict, Verdict::FalsePositive);
        assert_eq!(m.false_negatives, 0);
    }

    #[test]
    fn matching_is_per_image() {
        let gt = [GroundTruth::new("a", 0, bb(0.0, 0.0, 10.0, 10.0))];
        let d = [det("b", 0, 0.9, bb(0.0, 0.0, 10.0, 10.0))];
        let m = match_detections(&d, &gt, 0.5).unwrap();
        assert_eq!(m.records[0].verdict, Verdict::FalsePositive);
        assert_eq!(m.false_negatives, 1);
    }

    #[test]
    fn ties_keep_input_order() {
        let gt = [GroundTruth::new("a", 0, bb(0.0, 0.0, 10.0, 10.0))];
        let d = [det("a", 0, 0.5, bb(0.0, 0.0, 10.0, 8.0)), det("a", 0, 0.5, bb(0.0, 0.0, 10.0, 10.0))];
        let m = match_detections(&d, &gt, 0.5).unwrap();
        assert_eq!(m.records[0].detection, 0);
        assert!(m.records[0].verdict.is_true_positive());
    }

    #[test]
    fn threshold_and_nan_errors() {
        let gt: [GroundTruth; 0] = [];
        let d: [Detection; 0] = [];
        assert!(matches!(match_detections(&d, &gt, 0.0), Err(Error::Argument { .. })));
        assert!(matches!(match_detections(&d, &gt, 1.5), Err(Error::Argument { .. })));
        assert!(match_detections(&d, &gt, 1.0).is_ok());
        let nan = [Detection { image_id: "a".into(), class_id: 0, confidence: f64::NAN, bbox: bb(0.0, 0.0, 1.0, 1.0) }];
        assert!(matches!(match_detections(&nan, &gt, 0.5), Err(Error::Data { .. })));
    }

    #[test]
    fn pr_curve_hand_enumeration() {
        let curve = precision_recall(&records(&[true, false, true]), 2);
        let pr: Vec<(f64, f64)> = curve.iter().map(|p| (p.precision, p.recall)).collect();
        assert_eq!(pr, vec![(1.0, 0.5), (0.5, 0.5), (2.0 / 3.0, 1.0)]);

        let perfect = precision_recall(&records(&[true; 4]), 4);
        let last = perfect.last().unwrap();
        assert_eq!((last.precision, last.recall), (1.0, 1.0));

        assert!(precision_recall(&[], 3).is_empty());
    }

    #[test]
    fn ap_examples() {
        let single = precision_recall(&records(&[true]), 1);
        assert_eq!(average_precision(&single, ApMode::AllPoints), 1.0);

        let c = precision_recall(&records(&[true, false, true]), 2);
        let expected = 0.5 * 1.0 + 0.5 * (2.0 / 3.0);
        assert!((average_precision(&c, ApMode::AllPoints) - expected).abs() < 1e-12);

        let c = precision_recall(&records(&[true, false, true, false, true]), 3);
        let expected = (1.0 + 2.0 / 3.0 + 3.0 / 5.0) / 3.0;
        assert!((average_precision(&c, ApMode::AllPoints) - expected).abs() < 1e-12);
        assert!((expected - 0.75556).abs() < 1e-5);
    }

    #[test]
    fn eleven_point_examples() {
        let single = precision_recall(&records(&[true]), 1);
        assert_eq!(average_precision(&single, ApMode::ElevenPoint), 1.0);
        // recall 0.5 at precision 1, recall 1.0 at 2/3:
        // levels 0..=0.5 -> 1.0 (6 levels), 0.6..=1.0 -> 2/3 (5 levels)
        let c = precision_recall(&records(&[true, false, true]), 2);
        let expected = (6.0 + 5.0 * 2.0 / 3.0) / 11.0;
        assert!((average_precision(&c, ApMode::ElevenPoint) - expected).abs() < 1e-12);
        // never reaching recall 1 leaves the top levels at zero
        let c = precision_recall(&records(&[true]), 2);
        assert!((average_precision(&c, ApMode::ElevenPoint) - 6.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn ap_mode_parsing() {
        assert_eq!("all-points".parse::<ApMode>().unwrap(), ApMode::AllPoints);
        assert_eq!("eleven-point".parse::<ApMode>().unwrap(), ApMode::ElevenPoint);
        assert!(matches!("vague".parse::<ApMode>(), Err(Error::Argument { .. })));
    }

    #[test]
    fn map_examples() {
        assert!((mean_average_precision(&[0.8035, 0.6824]).unwrap() - 0.74295).abs() < 1e-12);
        assert!((mean_average_precision(&[0.7726, 0.5613]).unwrap() - 0.66695).abs() < 1e-12);
        assert_eq!(mean_average_precision(&[1.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(mean_average_precision(&[]), Err(Error::Argument { .. })));
    }

    fn scene() -> Vec<GroundTruth> {
        vec![
            GroundTruth::new("img1", 0, bb(0.0, 0.0, 10.0, 10.0)),
            GroundTruth::new("img1", 1, bb(20.0, 20.0, 40.0, 35.0)),
            GroundTruth::new("img2", 1, bb(5.0, 5.0, 15.0, 25.0)),
        ]
    }

    #[test]
    fn vacuous_detector_scores_zero() {
        let report = evaluate(&[], &scene(), &ClassMap::default(), &EvalOptions::default()).unwrap();
        for t in &report.thresholds {
            assert_eq!(t.map, Some(0.0));
            for c in &t.classes {
                assert_eq!(c.ap, Some(0.0));
                assert_eq!(c.false_negatives, c.total_ground_truth);
            }
        }
    }

    #[test]
    fn perfect_detector_scores_one() {
        let gts = scene();
        let dets: Vec<Detection> =
            gts.iter().map(|g| det(&g.image_id, g.class_id, 1.0, g.bbox)).collect();
        let report = evaluate(&dets, &gts, &ClassMap::default(), &EvalOptions::default()).unwrap();
        assert_eq!(report.thresholds.len(), 3);
        for t in &report.thresholds {
            assert_eq!(t.map, Some(1.0));
            assert!(t.classes.iter().all(|c| c.ap == Some(1.0)));
        }
        let eleven = EvalOptions { mode: ApMode::ElevenPoint, ..EvalOptions::default() };
        let report = evaluate(&dets, &gts, &ClassMap::default(), &eleven).unwrap();
        assert!(report.thresholds.iter().all(|t| t.map == Some(1.0)));
    }

    #[test]
    fn class_without_ground_truth() {
        let gts = vec![GroundTruth::new("img1", 0, bb(0.0, 0.0, 10.0, 10.0))];
        let only_gt = evaluate(&[], &gts, &ClassMap::default(), &EvalOptions::default()).unwrap();
        let t = &only_gt.thresholds[0];
        assert_eq!(t.classes[1].ap, None);
        assert_eq!(t.map, Some(0.0));

        let dets = vec![
            det("img1", 0, 0.9, bb(0.0, 0.0, 10.0, 10.0)),
            det("img1", 1, 0.9, bb(50.0, 50.0, 60.0, 60.0)),
        ];
        let r = evaluate(&dets, &gts, &ClassMap::default(), &EvalOptions::default()).unwrap();
        let t = &r.thresholds[0];
        assert_eq!(t.classes[1].ap, Some(0.0));
        assert_eq!(t.map, Some(0.5));
    }

    #[test]
    fn unknown_class_is_data_error_listing_records() {
        let dets = vec![det("img7", 5, 0.9, bb(0.0, 0.0, 1.0, 1.0))];
        let err = evaluate(&dets, &scene(), &ClassMap::default(), &EvalOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Data { .. }));
        let msg = err.to_string();
        assert!(msg.contains("img7") && msg.contains("class 5"), "{msg}");
    }

    #[test]
    fn bad_thresholds_rejected() {
        let opts = EvalOptions { iou_thresholds: vec![0.5, 1.5], ..EvalOptions::default() };
        assert!(matches!(
            evaluate(&[], &scene(), &ClassMap::default(), &opts),
            Err(Error::Argument { .. })
        ));
        let opts = EvalOptions { iou_thresholds: vec![], ..EvalOptions::default() };
        assert!(evaluate(&[], &scene(), &ClassMap::default(), &opts).is_err());
    }
}
