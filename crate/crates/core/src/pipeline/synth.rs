//! Deterministic synthetic driving-scene datasets for self-tests.
//!
//! Each image is a dim textured backdrop with one to three bright
//! rectangular "billboards". Annotations are the exact rectangles,
//! detections are jittered copies plus occasional false positives, and
//! gaze files hold fixations inside some billboards plus stray ones.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ensure_dir, PipelineError};
use crate::io::{self, gaze::format_gaze, netpbm, regions};
use crate::model::{BoundingBox, DatasetManifest, Detection, FixationPoint, FixationSet, ManifestEntry, Split};

pub const SYNTH_WIDTH: usize = 192;
pub const SYNTH_HEIGHT: usize = 108;
pub const MANIFEST_FILE: &str = "dataset.manifest";

/// Split assignment: the last `⌈n/5⌉` images are test (at least one when
/// `n ≥ 2`), the `max(1, n/10)` before them val (when `n ≥ 3`), the rest train.
pub fn split_for(index: usize, size: usize) -> Split {
    let n_test = if size >= 2 { size.div_ceil(5).max(1) } else { 0 };
    let n_val = if size >= 3 { (size / 10).max(1) } else { 0 };
    if index >= size - n_test {
        Split::Test
    } else if index >= size - n_test - n_val {
        Split::Val
    } else {
        Split::Train
    }
}

struct Scene {
    rgb: Vec<u8>,
    boxes: Vec<BoundingBox>,
    detections: Vec<Detection<f64>>,
    gaze: FixationSet<f64>,
}

fn place_boxes(rng: &mut ChaCha8Rng, image_id: &str) -> Vec<BoundingBox> {
    let count = rng.gen_range(1..=3);
    let mut boxes: Vec<BoundingBox> = Vec::new();
    for _ in 0..40 {
        if boxes.len() == count {
            break;
        }
        let w = rng.gen_range(24..=56);
        let h = rng.gen_range(14..=32);
        let x = rng.gen_range(0..=(SYNTH_WIDTH as i64 - w));
        let y = rng.gen_range(0..=(SYNTH_HEIGHT as i64 - h));
        let candidate = BoundingBox::new(x, y, w, h).unwrap().with_image_id(image_id);
        if boxes.iter().all(|b| b.intersection_area(&candidate) == 0) {
            boxes.push(candidate);
        }
    }
    boxes
}

fn render(rng: &mut ChaCha8Rng, boxes: &[BoundingBox]) -> Vec<u8> {
    let mut rgb = vec![0u8; SYNTH_WIDTH * SYNTH_HEIGHT * 3];
    for y in 0..SYNTH_HEIGHT {
        for x in 0..SYNTH_WIDTH {
            // Sky-to-road gradient with mild noise.
            let base = 40 + (y * 50 / SYNTH_HEIGHT) as i32;
            let noise: i32 = rng.gen_range(-6..=6);
            let v = (base + noise).clamp(0, 255) as u8;
            let i = 3 * (y * SYNTH_WIDTH + x);
            rgb[i..i + 3].copy_from_slice(&[v, v, v.saturating_add(8)]);
        }
    }
    for b in boxes {
        let color = [
            rng.gen_range(180..=255u8),
            rng.gen_range(60..=255u8),
            rng.gen_range(0..=120u8),
        ];
        let stripe = rng.gen_range(3..=6) as i64;
        for y in b.y()..b.bottom() {
            for x in b.x()..b.right() {
                let i = 3 * (y as usize * SYNTH_WIDTH + x as usize);
                let dark = ((x - b.x()) / stripe) % 2 == 1 && (y - b.y()) > b.h() / 3;
                let px = if dark { color.map(|c| c / 3) } else { color };
                rgb[i..i + 3].copy_from_slice(&px);
            }
        }
    }
    rgb
}

fn jitter_detections(rng: &mut ChaCha8Rng, boxes: &[BoundingBox], image_id: &str) -> Vec<Detection<f64>> {
    let mut dets = Vec::new();
    for b in boxes {
        if rng.gen_bool(0.9) {
            let x = b.x() + rng.gen_range(-3..=3);
            let y = b.y() + rng.gen_range(-3..=3);
            let w = (b.w() + rng.gen_range(-3..=3)).max(1);
            let h = (b.h() + rng.gen_range(-3..=3)).max(1);
            let conf = rng.gen_range(500..=999) as f64 / 1000.0;
            let bbox = BoundingBox::new(x, y, w, h).unwrap().with_image_id(image_id);
            dets.push(Detection::new(bbox, conf).unwrap());
        }
    }
    if rng.gen_bool(0.5) {
        let w = rng.gen_range(10..=40);
        let h = rng.gen_range(8..=24);
        let x = rng.gen_range(0..=(SYNTH_WIDTH as i64 - w));
        let y = rng.gen_range(0..=(SYNTH_HEIGHT as i64 - h));
        let conf = rng.gen_range(100..=600) as f64 / 1000.0;
        let bbox = BoundingBox::new(x, y, w, h).unwrap().with_image_id(image_id);
        dets.push(Detection::new(bbox, conf).unwrap());
    }
    dets
}

/// A fixation at tenth-of-a-pixel resolution inside `[x0, x1) × [y0, y1)`.
fn point_in(rng: &mut ChaCha8Rng, x0: i64, x1: i64, y0: i64, y1: i64) -> (f64, f64) {
    let x = rng.gen_range(x0 * 10..x1 * 10) as f64 / 10.0;
    let y = rng.gen_range(y0 * 10..y1 * 10) as f64 / 10.0;
    (x, y)
}

fn fixations(rng: &mut ChaCha8Rng, boxes: &[BoundingBox], image_id: &str) -> FixationSet<f64> {
    let mut raw = Vec::new();
    for b in boxes {
        if rng.gen_bool(0.6) {
            for _ in 0..rng.gen_range(1..=3) {
                raw.push(point_in(rng, b.x(), b.right(), b.y(), b.bottom()));
            }
        }
    }
    for _ in 0..rng.gen_range(2..=4) {
        raw.push(point_in(rng, 0, SYNTH_WIDTH as i64, 0, SYNTH_HEIGHT as i64));
    }
    let mut t = 0.0;
    let points = raw
        .into_iter()
        .map(|(x, y)| {
            let duration = rng.gen_range(150..=400) as f64;
            let p = FixationPoint {
                x,
                y,
                timestamp_ms: Some(t),
                duration_ms: Some(duration),
            };
            t += duration + rng.gen_range(20..=80) as f64;
            p
        })
        .collect();
    FixationSet::new(image_id, points)
}

fn scene(rng: &mut ChaCha8Rng, image_id: &str) -> Scene {
    let boxes = place_boxes(rng, image_id);
    let rgb = render(rng, &boxes);
    let detections = jitter_detections(rng, &boxes, image_id);
    let gaze = fixations(rng, &boxes, image_id);
    Scene {
        rgb,
        boxes,
        detections,
        gaze,
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    std::fs::write(path, bytes).map_err(|e| PipelineError::Data(format!("cannot write {}: {e}", path.display())))
}

/// Generates `size` images with annotations, detections and gaze under
/// `out_dir`, plus `dataset.manifest`. Identical seeds give identical bytes.
pub fn cmd_synth(out_dir: &Path, seed: u64, size: usize) -> Result<DatasetManifest, PipelineError> {
    if size == 0 {
        return Err(PipelineError::Usage("synthetic dataset size must be at least 1".into()));
    }
    for sub in ["images", "boxes", "dets", "gaze"] {
        ensure_dir(&out_dir.join(sub))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = DatasetManifest::default();
    for index in 0..size {
        let id = format!("img{index:03}");
        let s = scene(&mut rng, &id);
        let entry = ManifestEntry {
            image_id: id.clone(),
            image_path: out_dir.join("images").join(format!("{id}.ppm")),
            annotation_path: out_dir.join("boxes").join(format!("{id}.boxes")),
            detection_path: Some(out_dir.join("dets").join(format!("{id}.dets"))),
            gaze_path: Some(out_dir.join("gaze").join(format!("{id}.gaze"))),
            split: split_for(index, size),
        };
        write(
            &entry.image_path,
            &netpbm::encode_u8(SYNTH_WIDTH, SYNTH_HEIGHT, 3, &s.rgb),
        )?;
        write(&entry.annotation_path, regions::format_annotations(&s.boxes).as_bytes())?;
        write(
            entry.detection_path.as_ref().unwrap(),
            regions::format_detections(&s.detections).as_bytes(),
        )?;
        write(entry.gaze_path.as_ref().unwrap(), format_gaze(&s.gaze).as_bytes())?;
        manifest.entries.push(entry);
    }
    write(
        &out_dir.join(MANIFEST_FILE),
        io::format_manifest(&manifest, out_dir).as_bytes(),
    )?;
    Ok(manifest)
}
