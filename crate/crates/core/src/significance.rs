//! Billboard significance: per-region mean saliency, threshold calibration,
//! classification and fixation-based ground truth.

use thiserror::Error;

use crate::fixation::fixations_in_box;
use crate::model::{clip_box, BoundingBox, ConfusionCounts, FixationSet, ImageId, ModelError, SaliencyMap};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignificanceError {
    #[error(transparent)]
    EmptyIntersection(#[from] ModelError),
    #[error("region mean requires a normalized saliency map")]
    NotNormalized,
    #[error("cannot calibrate a threshold from an empty training set")]
    EmptyTrainingSet,
    #[error("threshold {0} outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("region {index} lacks a prediction or ground-truth label")]
    MissingLabels { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionScore<T> {
    pub image_id: ImageId,
    pub bbox: BoundingBox,
    pub mean_saliency: T,
    pub predicted_salient: Option<bool>,
    pub truth_salient: Option<bool>,
}

impl<T: Scalar> RegionScore<T> {
    pub fn new(image_id: impl Into<ImageId>, bbox: BoundingBox, mean_saliency: T) -> Self {
        Self {
            image_id: image_id.into(),
            bbox,
            mean_saliency,
            predicted_salient: None,
            truth_salient: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceThreshold<T> {
    value: T,
    n_regions: usize,
    source: String,
}

impl<T: Scalar> SignificanceThreshold<T> {
    /// `n_regions` is the calibration support; 0 marks a value that was
    /// supplied rather than calibrated.
    pub fn new(value: T, n_regions: usize, source: String) -> Result<Self, SignificanceError> {
        if !(value >= T::zero() && value <= T::one()) {
            return Err(SignificanceError::ThresholdOutOfRange(value.to_f64_lossy()));
        }
        Ok(Self {
            value,
            n_regions,
            source,
        })
    }

    pub fn override_value(value: T) -> Result<Self, SignificanceError> {
        Self::new(value, 0, "override".to_string())
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub fn n_regions(&self) -> usize {
        self.n_regions
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// Mean of the normalized map over the box after clipping it to the frame.
pub fn region_mean_saliency<T: Scalar>(map: &SaliencyMap<T>, bbox: &BoundingBox) -> Result<T, SignificanceError> {
    if !map.is_normalized() {
        return Err(SignificanceError::NotNormalized);
    }
    let clipped = clip_box(bbox, map.width(), map.height())?;
    let (x0, y0) = (clipped.x() as usize, clipped.y() as usize);
    let (w, h) = (clipped.w() as usize, clipped.h() as usize);
    let mut sum = T::zero();
    for y in y0..y0 + h {
        let row = &map.values()[y * map.width() + x0..y * map.width() + x0 + w];
        sum += row.iter().copied().sum::<T>();
    }
    Ok(sum / T::from_usize_lossy(w * h))
}

pub fn score_region<T: Scalar>(
    map: &SaliencyMap<T>,
    bbox: &BoundingBox,
    image_id: impl Into<ImageId>,
) -> Result<RegionScore<T>, SignificanceError> {
    Ok(RegionScore::new(
        image_id,
        bbox.clone(),
        region_mean_saliency(map, bbox)?,
    ))
}

/// Unweighted mean of the region means.
pub fn calibrate_threshold<T: Scalar>(
    scores: &[RegionScore<T>],
) -> Result<SignificanceThreshold<T>, SignificanceError> {
    if scores.is_empty() {
        return Err(SignificanceError::EmptyTrainingSet);
    }
    let mean = scores.iter().map(|s| s.mean_saliency).sum::<T>() / T::from_usize_lossy(scores.len());
    SignificanceThreshold::new(
        mean,
        scores.len(),
        format!("calibrated on {} training regions", scores.len()),
    )
}

/// Salient iff the region mean is strictly greater than the threshold.
pub fn classify_region<T: Scalar>(score: &RegionScore<T>, threshold: &SignificanceThreshold<T>) -> bool {
    score.mean_saliency > threshold.value()
}

/// A region is truly significant when at least one fixation lands inside it.
pub fn ground_truth_salience<T: Scalar>(fixations: &FixationSet<T>, bbox: &BoundingBox) -> bool {
    fixations_in_box(fixations, bbox) >= 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionSummary {
    pub counts: ConfusionCounts,
    /// `None` for an empty region list.
    pub accuracy: Option<f64>,
    /// `None` when no region is truly salient.
    pub sensitivity: Option<f64>,
}

pub fn confusion_stats<T: Scalar>(regions: &[RegionScore<T>]) -> Result<ConfusionSummary, SignificanceError> {
    let mut counts = ConfusionCounts::default();
    for (index, r) in regions.iter().enumerate() {
        match (r.predicted_salient, r.truth_salient) {
            (Some(p), Some(t)) => counts.record(p, t),
            _ => return Err(SignificanceError::MissingLabels { index }),
        }
    }
    Ok(ConfusionSummary {
        counts,
        accuracy: counts.accuracy(),
        sensitivity: counts.sensitivity(),
    })
}
