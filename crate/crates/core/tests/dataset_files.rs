mod common;

use std::fs;
use std::path::{Path, PathBuf};

use common::*;
use detkit::dataset::{
    load_detections, load_ground_truth, load_image, render_annotated, save_png, tensor_to_rgb, DatasetManifest,
};
use detkit::eval::mean_average_precision;
use detkit::{evaluate, BoundingBox, ClassMap, Detection, EvalOptions, ErrorKind};

/// Set to regenerate the committed fixtures instead of checking them.
const BLESS_VAR: &str = "DETKIT_BLESS";

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn blessing() -> bool {
    std::env::var_os(BLESS_VAR).is_some()
}

#[test]
fn scene_fixture_is_reproducible() {
    let committed = fixtures().join("scenes");
    if blessing() {
        write_scene_fixture(&committed);
        return;
    }
    let fresh = tempfile::tempdir().unwrap();
    write_scene_fixture(fresh.path());
    let mut names: Vec<_> = fs::read_dir(fresh.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 2 * FIXTURE_SCENES + 1);
    for name in names {
        let a = fs::read(fresh.path().join(&name)).unwrap();
        let b = fs::read(committed.join(&name)).unwrap_or_else(|_| panic!("missing fixture {name:?}; run with {BLESS_VAR}=1"));
        assert!(a == b, "fixture {name:?} differs from its generator; rerun with {BLESS_VAR}=1 and review");
    }
}

fn golden_detections() -> Vec<Detection> {
    let mut dets = load_detections(&fixtures().join("scenes/perfect.txt")).unwrap();
    dets.retain(|d| d.image_id == "scene4");
    for (i, d) in dets.iter_mut().enumerate() {
        d.confidence = 0.95 - 0.1 * i as f64;
    }
    dets.push(Detection::new("scene4", 1, 0.375, BoundingBox::new(70.5, 90.25, 120.0, 127.9).unwrap()).unwrap());
    dets
}

#[test]
fn render_matches_golden_png() {
    let image = tensor_to_rgb(&load_image(&fixtures().join("scenes/scene4.png")).unwrap()).unwrap();
    let rendered = render_annotated(&image, &golden_detections(), &ClassMap::default());
    let golden = fixtures().join("render_golden.png");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.png");
    save_png(&out, &rendered).unwrap();
    if blessing() {
        fs::copy(&out, &golden).unwrap();
        return;
    }
    assert!(fs::read(&out).unwrap() == fs::read(&golden).unwrap(), "rendered image differs from {golden:?}");
}

#[test]
fn manifest_pairs_images_with_annotations() {
    let manifest = DatasetManifest::load(&fixtures().join("scenes")).unwrap();
    let ids: Vec<&str> = manifest.image_ids().collect();
    assert_eq!(ids, ["scene0", "scene1", "scene2", "scene3", "scene4", "scene5"]);
    assert!(manifest.entries.iter().all(|e| e.annotation.is_some()));
}

#[test]
fn ground_truth_matches_planted_objects() {
    let manifest = DatasetManifest::load(&fixtures().join("scenes")).unwrap();
    let gts = load_ground_truth(&manifest, &ClassMap::default()).unwrap();
    let perfect = load_detections(&fixtures().join("scenes/perfect.txt")).unwrap();
    assert_eq!(gts.len(), perfect.len());
    for (g, d) in gts.iter().zip(&perfect) {
        assert_eq!((&g.image_id, g.class_id, g.bbox), (&d.image_id, d.class_id, d.bbox));
    }
}

#[test]
fn perfect_detections_score_one() {
    let manifest = DatasetManifest::load(&fixtures().join("scenes")).unwrap();
    let classes = ClassMap::default();
    let gts = load_ground_truth(&manifest, &classes).unwrap();
    let dets = load_detections(&fixtures().join("scenes/perfect.txt")).unwrap();
    let report = evaluate(&dets, &gts, &classes, &EvalOptions::default()).unwrap();
    for t in &report.thresholds {
        assert_eq!(t.map, Some(1.0));
        assert!(t.classes.iter().all(|c| c.ap == Some(1.0)));
    }
}

#[test]
fn listing_file_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    write_scene_fixture(&dir.path().join("data"));
    fs::rename(dir.path().join("data/scene1.txt"), dir.path().join("labels1.txt")).unwrap();
    let listing = dir.path().join("list.txt");
    fs::write(&listing, "# test split\ndata/scene0.png\ndata/scene1.png labels1.txt\n").unwrap();
    let manifest = DatasetManifest::load(&listing).unwrap();
    assert_eq!(manifest.len(), 2);
    assert_eq!(manifest.entries[1].annotation.as_deref(), Some(dir.path().join("labels1.txt").as_path()));

    fs::write(&listing, "data/scene0.png\ndata/nope.png\n").unwrap();
    let err = DatasetManifest::load(&listing).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Data);
    assert!(err.to_string().contains("list.txt:2"), "{err}");
}

#[test]
fn missing_annotation_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    write_scene_fixture(dir.path());
    fs::remove_file(dir.path().join("scene2.txt")).unwrap();
    let manifest = DatasetManifest::load(dir.path()).unwrap();
    let err = load_ground_truth(&manifest, &ClassMap::default()).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Data);
    assert!(err.to_string().contains("scene2.png"), "{err}");
}

#[test]
fn bad_annotation_line_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    write_scene_fixture(dir.path());
    fs::write(dir.path().join("scene3.txt"), "0 0.5 0.5 0.1 0.1\n0 0.5 0.5\n").unwrap();
    let manifest = DatasetManifest::load(dir.path()).unwrap();
    let err = load_ground_truth(&manifest, &ClassMap::default()).unwrap_err();
    assert!(err.to_string().contains("scene3.txt:2"), "{err}");
}

#[test]
fn table_reconstruction_reproduces_class_aps() {
    let dir = tempfile::tempdir().unwrap();
    write_table_ground_truth(dir.path());
    let classes = ClassMap::default();
    let gts = load_ground_truth(&DatasetManifest::load(dir.path()).unwrap(), &classes).unwrap();
    for table in [TABLE_YOLO, TABLE_SSD] {
        let report = evaluate(&table_detections(&table), &gts, &classes, &EvalOptions::default()).unwrap();
        for (k, thr) in [0.3, 0.5, 0.7].into_iter().enumerate() {
            for (c, row) in table.iter().enumerate() {
                assert!((report.ap(thr, c).unwrap() - row[k]).abs() < 1e-9);
            }
            let expected = mean_average_precision(&[table[0][k], table[1][k]]).unwrap();
            assert!((report.map(thr).unwrap() - expected).abs() < 1e-9);
        }
    }
}
