//! The reference YOLOv3 topology: a Darknet-53 backbone followed by three
//! detection heads at strides 32, 16 and 8.

use std::fmt::Write as _;

/// Stock 80-class `yolov3.cfg` at 416x416.
pub const YOLOV3_CFG: &str = include_str!("../../assets/yolov3.cfg");

/// Reference anchors, `(width, height)` in 416x416 input pixels.
pub const YOLOV3_ANCHORS: [(u32, u32); 9] =
    [(10, 13), (16, 30), (33, 23), (30, 61), (62, 45), (59, 119), (116, 90), (156, 198), (373, 326)];

/// Masks of the three heads in layer order (coarsest grid first).
pub const YOLOV3_MASKS: [[usize; 3]; 3] = [[6, 7, 8], [3, 4, 5], [0, 1, 2]];

/// Two-class configuration (healthy apple / apple with defect).
pub fn apple_yolov3_cfg() -> String {
    yolov3_cfg(2, 416, 416)
}

/// Generates the YOLOv3 configuration for `classes` classes and the given
/// input size. Only inference-relevant keys are emitted.
pub fn yolov3_cfg(classes: usize, width: usize, height: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[net]\nwidth={width}\nheight={height}\nchannels=3\n");

    let conv = |out: &mut String, filters: usize, size: usize, stride: usize| {
        let _ = writeln!(
            out,
            "[convolutional]\nbatch_normalize=1\nfilters={filters}\nsize={size}\nstride={stride}\npad=1\nactivation=leaky\n"
        );
    };

    conv(&mut out, 32, 3, 1);
    for (filters, blocks) in [(64, 1), (128, 2), (256, 8), (512, 8), (1024, 4)] {
        conv(&mut out, filters, 3, 2);
        for _ in 0..blocks {
            conv(&mut out, filters / 2, 1, 1);
            conv(&mut out, filters, 3, 1);
            out.push_str("[shortcut]\nfrom=-3\nactivation=linear\n\n");
        }
    }

    let anchors = YOLOV3_ANCHORS
        .iter()
        .map(|(w, h)| format!("{w},{h}"))
        .collect::<Vec<_>>()
        .join(",");
    let head_filters = 3 * (5 + classes);
    // (head width, backbone layer joined after upsampling)
    let heads = [(1024, None), (512, Some(61)), (256, Some(36))];
    for (i, (filters, skip)) in heads.into_iter().enumerate() {
        if let Some(skip) = skip {
            out.push_str("[route]\nlayers=-4\n\n");
            conv(&mut out, filters / 2, 1, 1);
            out.push_str("[upsample]\nstride=2\n\n");
            let _ = writeln!(out, "[route]\nlayers=-1,{skip}\n");
        }
        for _ in 0..3 {
            conv(&mut out, filters / 2, 1, 1);
            conv(&mut out, filters, 3, 1);
        }
        let _ = writeln!(out, "[convolutional]\nsize=1\nstride=1\npad=1\nfilters={head_filters}\nactivation=linear\n");
        let mask = YOLOV3_MASKS[i].map(|m| m.to_string()).join(",");
        let _ = writeln!(out, "[yolo]\nmask={mask}\nanchors={anchors}\nclasses={classes}\nnum=9\n");
    }
    out
}
