use log::{info, warn};

use super::calibrate::train_region_scores;
use super::{ensure_dir, par_map_ordered, saliency_for_entry, unix_ms, ErrorEntry, PipelineError, RunConfig};
use crate::fixation::build_fixation_map;
use crate::io::report::{
    Aggregates, ImageRecord, RegionRecord, ReportMetadata, SectionStatus, AGGREGATION_MEAN_OF_IMAGES, COMPUTED,
    SKIPPED_MISSING_INPUT,
};
use crate::io::{self, load_manifest, EvaluationReport};
use crate::metrics::{ap_range, auc_judd, nss, MetricError};
use crate::model::{clip_box, BoundingBox, Detection, ManifestEntry, Split};
use crate::significance::{
    calibrate_threshold, classify_region, ground_truth_salience, region_mean_saliency, RegionScore,
    SignificanceThreshold,
};

pub const REPORT_FILE: &str = "evaluation.report";

struct ImageOutcome {
    record: ImageRecord,
    boxes: Vec<BoundingBox>,
    detections: Option<Vec<Detection<f64>>>,
    has_gaze: bool,
    errors: Vec<String>,
}

fn resolve_threshold(config: &RunConfig) -> Result<Option<SignificanceThreshold<f64>>, PipelineError> {
    if let Some(v) = config.threshold {
        return SignificanceThreshold::override_value(v)
            .map(Some)
            .map_err(|e| PipelineError::Usage(e.to_string()));
    }
    let stored = config.threshold_path();
    if stored.is_file() {
        let record = io::read_threshold(&stored)?;
        if record.method == config.method.id() {
            info!(
                "using stored threshold {} from {}",
                record.threshold.value(),
                stored.display()
            );
            return Ok(Some(record.threshold));
        }
        warn!(
            "{} was calibrated for '{}', not '{}'; recalibrating",
            stored.display(),
            record.method,
            config.method.id()
        );
    }
    let manifest = load_manifest(&config.manifest)?;
    let train: Vec<_> = manifest.split(Split::Train).collect();
    if train.is_empty() {
        return Ok(None);
    }
    let scores = train_region_scores(config, &train)?;
    match calibrate_threshold(&scores) {
        Ok(t) => Ok(Some(t)),
        Err(_) => Ok(None),
    }
}

fn evaluate_image(
    entry: &ManifestEntry,
    config: &RunConfig,
    threshold: Option<&SignificanceThreshold<f64>>,
) -> Result<ImageOutcome, String> {
    let (image, map) = saliency_for_entry(entry, config)?;
    let (width, height) = (image.width(), image.height());
    let boxes = io::load_annotations(&entry.annotation_path, &entry.image_id).map_err(|e| e.to_string())?;
    let detections = entry
        .detection_path
        .as_ref()
        .map(|p| io::load_detections::<f64>(p, &entry.image_id))
        .transpose()
        .map_err(|e| e.to_string())?;
    let fixations = entry
        .gaze_path
        .as_ref()
        .map(|p| io::load_gaze::<f64>(p, &entry.image_id))
        .transpose()
        .map_err(|e| e.to_string())?;

    let mut errors = Vec::new();
    let mut auc = None;
    let mut nss_score = None;
    let mut truth_source = None;
    if let Some(fixations) = &fixations {
        match build_fixation_map(fixations, width, height) {
            Ok(fixmap) => {
                truth_source = Some(fixations);
                match auc_judd(&map, &fixmap) {
                    Ok(v) => auc = Some(v),
                    Err(MetricError::NoFixations) => {}
                    Err(e) => errors.push(format!("AUC: {e}")),
                }
                match nss(&map, &fixmap) {
                    Ok(v) => nss_score = Some(v),
                    Err(MetricError::NoFixations) => {}
                    Err(e) => errors.push(format!("NSS: {e}")),
                }
            }
            Err(e) => errors.push(e.to_string()),
        }
    }

    let mut regions = Vec::with_capacity(boxes.len());
    let mut excluded = 0;
    for b in &boxes {
        if clip_box(b, width, height).is_err() {
            warn!("{}: box {b} lies outside the frame, excluded", entry.image_id);
            excluded += 1;
            continue;
        }
        let mean = region_mean_saliency(&map, b).map_err(|e| e.to_string())?;
        let score = RegionScore::new(entry.image_id.as_str(), b.clone(), mean);
        regions.push(RegionRecord {
            bbox: b.clone(),
            mean_saliency: mean,
            predicted_salient: threshold.map(|t| classify_region(&score, t)),
            truth_salient: truth_source.map(|f| ground_truth_salience(f, b)),
        });
    }

    Ok(ImageOutcome {
        record: ImageRecord {
            image_id: entry.image_id.clone(),
            auc,
            nss: nss_score,
            regions,
            excluded_regions: excluded,
        },
        boxes,
        detections,
        has_gaze: fixations.is_some(),
        errors,
    })
}

fn status(computed: bool, reason: &str) -> String {
    if computed {
        COMPUTED.to_string()
    } else {
        format!("{SKIPPED_MISSING_INPUT} ({reason})")
    }
}

/// Evaluates the test split and writes `<out>/evaluation.report`.
///
/// Threshold precedence: explicit override, then a stored threshold record
/// for the same method in the output directory, then calibration on the
/// train split within this run. Per-image failures become error entries
/// and the run continues.
pub fn cmd_evaluate(config: &RunConfig) -> Result<EvaluationReport, PipelineError> {
    config.validate()?;
    let started = unix_ms();
    let manifest = load_manifest(&config.manifest)?;
    let threshold = resolve_threshold(config)?;
    let test: Vec<&ManifestEntry> = manifest.split(Split::Test).collect();
    info!("evaluating {} test images with {}", test.len(), config.method.id());

    let outcomes = par_map_ordered(config.workers, &test, |entry| {
        evaluate_image(entry, config, threshold.as_ref())
    })?;

    let mut per_image = Vec::new();
    let mut errors = Vec::new();
    let mut gt_boxes = Vec::new();
    let mut detections = Vec::new();
    let mut all_have_detections = !test.is_empty();
    let mut any_gaze = false;
    for (entry, outcome) in test.iter().zip(outcomes) {
        match outcome {
            Ok(o) => {
                for message in o.errors {
                    errors.push(ErrorEntry {
                        image_id: Some(entry.image_id.clone()),
                        message,
                    });
                }
                any_gaze |= o.has_gaze;
                gt_boxes.extend(o.boxes);
                match o.detections {
                    Some(d) => detections.extend(d),
                    None => all_have_detections = false,
                }
                per_image.push(o.record);
            }
            Err(message) => {
                warn!("{}: {message}", entry.image_id);
                errors.push(ErrorEntry {
                    image_id: Some(entry.image_id.clone()),
                    message,
                });
            }
        }
    }

    let (mut ap50, mut ap50_95) = (None, None);
    let detection_status = if !all_have_detections {
        status(false, "detections")
    } else if gt_boxes.is_empty() {
        status(false, "ground-truth boxes")
    } else {
        let (a, b) = ap_range(&detections, &gt_boxes).map_err(|e| PipelineError::Internal(e.to_string()))?;
        (ap50, ap50_95) = (Some(a), Some(b));
        COMPUTED.to_string()
    };

    let mut report = EvaluationReport {
        metadata: ReportMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            method: config.method.id(),
            aggregation_mode: AGGREGATION_MEAN_OF_IMAGES.to_string(),
            split: Split::Test.as_str().to_string(),
            threshold_source: threshold.as_ref().map(|t| t.source().to_string()),
            started_unix_ms: started,
            finished_unix_ms: 0,
            partial: !errors.is_empty(),
        },
        sections: SectionStatus {
            saliency_metrics: status(any_gaze, "gaze"),
            detection_metrics: detection_status,
            significance: match (&threshold, any_gaze) {
                (Some(_), true) => COMPUTED.to_string(),
                (None, _) => status(false, "threshold"),
                (Some(_), false) => status(false, "gaze"),
            },
        },
        aggregates: Aggregates::default(),
        per_image,
        errors,
    };
    report.aggregates = Aggregates {
        ap50,
        ap50_95,
        threshold: threshold.as_ref().map(|t| t.value()),
        ..report.recompute_aggregates()
    };
    report.metadata.finished_unix_ms = unix_ms();

    ensure_dir(&config.out_dir)?;
    io::write_report(&report, &config.out_dir.join(REPORT_FILE))?;
    Ok(report)
}
