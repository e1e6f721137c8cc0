//! Report rendering: a fixed-width text table laid out like the usual
//! "AP per class, mAP per threshold" result tables, and a JSON document.
//!
//! JSON layout:
//!
//! ```text
//! {
//!   "mode": "all-points",
//!   "classes": ["healthy-apple", "apple-with-defect"],
//!   "results": [
//!     {"class": "healthy-apple", "class_id": 0, "iou_threshold": 0.5,
//!      "ap": 0.8035, "tp": 60, "fp": 9, "fn": 10, "total_gt": 70}, ...
//!   ],
//!   "map": [{"iou_threshold": 0.5, "map": 0.743}, ...]
//! }
//! ```
//!
//! `ap` / `map` are `null` for classes with neither ground truth nor
//! detections (and thresholds where no class applies).

use std::fmt::Write as _;

use serde::Serialize;

use super::EvalReport;

#[derive(Debug, Serialize)]
struct ClassRow<'a> {
    class: &'a str,
    class_id: usize,
    iou_threshold: f64,
    ap: Option<f64>,
    tp: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    total_gt: usize,
}

#[derive(Debug, Serialize)]
struct MapRow {
    iou_threshold: f64,
    map: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ReportDoc<'a> {
    mode: &'static str,
    classes: &'a [String],
    results: Vec<ClassRow<'a>>,
    map: Vec<MapRow>,
}

#[derive(Debug, Serialize)]
struct NamedDoc<'a> {
    name: &'a str,
    #[serde(flatten)]
    report: ReportDoc<'a>,
}

#[derive(Debug, Serialize)]
struct CompareDoc<'a> {
    detectors: Vec<NamedDoc<'a>>,
}

fn doc(report: &EvalReport) -> ReportDoc<'_> {
    let mut results = Vec::new();
    let mut map = Vec::new();
    for t in &report.thresholds {
        for c in &t.classes {
            results.push(ClassRow {
                class: report.class_names.get(c.class_id).map_or("?", String::as_str),
                class_id: c.class_id,
                iou_threshold: t.iou_threshold,
                ap: c.ap,
                tp: c.true_positives,
                fp: c.false_positives,
                fn_: c.false_negatives,
                total_gt: c.total_ground_truth,
            });
        }
        map.push(MapRow { iou_threshold: t.iou_threshold, map: t.map });
    }
    ReportDoc { mode: report.mode.as_str(), classes: &report.class_names, results, map }
}

pub fn to_json(report: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(&doc(report)).expect("report serializes");
    s.push('\n');
    s
}

pub fn compare_to_json(reports: &[(String, EvalReport)]) -> String {
    let detectors = reports
        .iter()
        .map(|(name, report)| NamedDoc { name, report: doc(report) })
        .collect();
    let mut s = serde_json::to_string_pretty(&CompareDoc { detectors }).expect("report serializes");
    s.push('\n');
    s
}

fn cell(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

fn header(label_width: usize, first: &str, prefix: &str, thresholds: &[f64]) -> String {
    let mut line = format!("{first:<label_width$}");
    for t in thresholds {
        let _ = write!(line, "  {:>12}", format!("{prefix}@{t}IOU"));
    }
    line
}

fn row(label_width: usize, label: &str, values: impl Iterator<Item = Option<f64>>) -> String {
    let mut line = format!("{label:<label_width$}");
    for v in values {
        let _ = write!(line, "  {:>12}", cell(v));
    }
    line
}

fn label_width<'a>(labels: impl Iterator<Item = &'a str>) -> usize {
    labels.map(str::len).max().unwrap_or(0).max(10)
}

/// Text table of one evaluation: AP per class, mAP, then raw counts.
pub fn to_table(report: &EvalReport) -> String {
    let thresholds: Vec<f64> = report.thresholds.iter().map(|t| t.iou_threshold).collect();
    let width = label_width(report.class_names.iter().map(String::as_str));
    let mut out = String::new();

    let _ = writeln!(out, "Average Precision (AP), {} interpolation", report.mode);
    let _ = writeln!(out, "{}", header(width, "CLASS", "AP", &thresholds));
    for (class_id, name) in report.class_names.iter().enumerate() {
        let values = report.thresholds.iter().map(|t| t.classes[class_id].ap);
        let _ = writeln!(out, "{}", row(width, name, values));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Mean Average Precision (mAP)");
    let _ = writeln!(out, "{}", header(width, "", "mAP", &thresholds));
    let _ = writeln!(out, "{}", row(width, "all classes", report.thresholds.iter().map(|t| t.map)));
    let _ = writeln!(out);
    let _ = writeln!(out, "Counts");
    let _ = writeln!(
        out,
        "{:<width$}  {:>5}  {:>7}  {:>7}  {:>7}  {:>7}",
        "CLASS", "IOU", "TP", "FP", "FN", "GT"
    );
    for t in &report.thresholds {
        for c in &t.classes {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5}  {:>7}  {:>7}  {:>7}  {:>7}",
                report.class_names[c.class_id],
                t.iou_threshold,
                c.true_positives,
                c.false_positives,
                c.false_negatives,
                c.total_ground_truth
            );
        }
    }
    out
}

/// Side-by-side comparison: one AP table per class with a row per detector,
/// then an mAP table with a row per detector.
pub fn compare_to_table(reports: &[(String, EvalReport)]) -> String {
    let mut out = String::new();
    let Some((_, first)) = reports.first() else {
        return out;
    };
    let thresholds: Vec<f64> = first.thresholds.iter().map(|t| t.iou_threshold).collect();
    let width = label_width(reports.iter().map(|(n, _)| n.as_str()));

    for (class_id, class_name) in first.class_names.iter().enumerate() {
        let _ = writeln!(out, "Average Precision (AP) on {class_name}");
        let _ = writeln!(out, "{}", header(width, "DETECTOR", "AP", &thresholds));
        for (name, report) in reports {
            let values = report.thresholds.iter().map(|t| t.classes.get(class_id).and_then(|c| c.ap));
            let _ = writeln!(out, "{}", row(width, name, values));
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "Mean Average Precision (mAP)");
    let _ = writeln!(out, "{}", header(width, "DETECTOR", "mAP", &thresholds));
    for (name, report) in reports {
        let _ = writeln!(out, "{}", row(width, name, report.thresholds.iter().map(|t| t.map)));
    }
    out
}
