//! Darknet YOLOv3 inference on the CPU and detection-quality evaluation.
//!
//! * [`geometry`]: boxes and IOU.
//! * [`eval`]: matching, precision/recall, AP and mAP, report rendering.
//! * [`darknet`]: `.cfg` parsing and `.weights` loading.
//! * [`engine`]: tensors, convolution kernels and the forward pass.
//! * [`postprocess`]: letterboxing, YOLO head decoding and non-max suppression.
//! * [`dataset`]: annotation / detection files, images and rendering.

pub mod classes;
pub mod darknet;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod postprocess;

pub use classes::ClassMap;
pub use error::{Error, ErrorKind, Result};
pub use eval::{evaluate, ApMode, Detection, EvalOptions, EvalReport, GroundTruth};
pub use geometry::BoundingBox;
