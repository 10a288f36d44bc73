use log::{info, warn};

use super::{ensure_dir, par_map_ordered, saliency_for_entry, PipelineError, RunConfig};
use crate::io::{self, load_manifest, ThresholdRecord};
use crate::model::{clip_box, Split};
use crate::significance::{calibrate_threshold, score_region, RegionScore, SignificanceThreshold};

/// Region scores for every in-frame box of the given entries.
pub(crate) fn train_region_scores(
    config: &RunConfig,
    entries: &[&crate::model::ManifestEntry],
) -> Result<Vec<RegionScore<f64>>, PipelineError> {
    let per_image = par_map_ordered(config.workers, entries, |entry| {
        let (_, map) = saliency_for_entry(entry, config)?;
        let boxes = io::load_annotations(&entry.annotation_path, &entry.image_id).map_err(|e| e.to_string())?;
        let mut scores = Vec::with_capacity(boxes.len());
        for b in &boxes {
            if clip_box(b, map.width(), map.height()).is_err() {
                warn!("{}: box {b} lies outside the frame, excluded", entry.image_id);
                continue;
            }
            scores.push(score_region(&map, b, entry.image_id.as_str()).map_err(|e| e.to_string())?);
        }
        Ok::<_, String>(scores)
    })?;
    let mut all = Vec::new();
    for (entry, result) in entries.iter().zip(per_image) {
        all.extend(result.map_err(|m| PipelineError::Data(format!("{}: {m}", entry.image_id)))?);
    }
    Ok(all)
}

/// Determines the significance threshold (override or mean of train-split
/// region means) and writes it to `<out>/<method-tag>.threshold`.
pub fn cmd_calibrate(config: &RunConfig) -> Result<ThresholdRecord, PipelineError> {
    config.validate()?;
    let threshold = match config.threshold {
        Some(v) => SignificanceThreshold::override_value(v).map_err(|e| PipelineError::Usage(e.to_string()))?,
        None => {
            let manifest = load_manifest(&config.manifest)?;
            let train: Vec<_> = manifest.split(Split::Train).collect();
            if train.is_empty() {
                return Err(PipelineError::Data(
                    "empty training set: manifest has no train entries".into(),
                ));
            }
            let scores = train_region_scores(config, &train)?;
            calibrate_threshold(&scores).map_err(|e| PipelineError::Data(e.to_string()))?
        }
    };
    let record = ThresholdRecord {
        method: config.method.id(),
        threshold,
    };
    ensure_dir(&config.out_dir)?;
    let path = config.threshold_path();
    io::write_threshold(&record, &path)?;
    info!(
        "threshold {} ({}) written to {}",
        record.threshold.value(),
        record.threshold.source(),
        path.display()
    );
    Ok(record)
}
