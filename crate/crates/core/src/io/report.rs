//! Evaluation reports, serialized as JSON with a fixed field order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, write_bytes, FormatError};
use crate::model::{BoundingBox, ConfusionCounts, ImageId};

pub const COMPUTED: &str = "computed";
pub const SKIPPED_MISSING_INPUT: &str = "skipped: missing input";
/// Dataset AUC/NSS are the unweighted mean of per-image scores.
pub const AGGREGATION_MEAN_OF_IMAGES: &str = "mean-of-per-image";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metadata: ReportMetadata,
    pub sections: SectionStatus,
    pub aggregates: Aggregates,
    pub per_image: Vec<ImageRecord>,
    pub errors: Vec<ErrorEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool_version: String,
    pub method: String,
    pub aggregation_mode: String,
    pub split: String,
    pub threshold_source: Option<String>,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    /// True when any per-image error was recorded.
    pub partial: bool,
}

/// Either [`COMPUTED`] or a `skipped: ...` marker per section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionStatus {
    pub saliency_metrics: String,
    pub detection_metrics: String,
    pub significance: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub mean_auc: Option<f64>,
    pub mean_nss: Option<f64>,
    pub n_auc: usize,
    pub n_nss: usize,
    pub ap50: Option<f64>,
    pub ap50_95: Option<f64>,
    pub counts: Option<ConfusionCounts>,
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    /// Supplementary: tn / (tn + fp).
    pub specificity: Option<f64>,
    /// Supplementary: tp / (tp + fp).
    pub precision: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: ImageId,
    pub auc: Option<f64>,
    pub nss: Option<f64>,
    pub regions: Vec<RegionRecord>,
    /// Regions dropped because they do not intersect the frame.
    pub excluded_regions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub bbox: BoundingBox,
    pub mean_saliency: f64,
    pub predicted_salient: Option<bool>,
    pub truth_salient: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub image_id: Option<ImageId>,
    pub message: String,
}

fn mean(values: impl Iterator<Item = f64>) -> (Option<f64>, usize) {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    ((n > 0).then(|| sum / n as f64), n)
}

impl EvaluationReport {
    /// Recomputes the per-image-derived aggregates (mean AUC/NSS and the
    /// confusion block) from `per_image`. Detection AP and the threshold
    /// are carried over unchanged.
    pub fn recompute_aggregates(&self) -> Aggregates {
        let (mean_auc, n_auc) = mean(self.per_image.iter().filter_map(|r| r.auc));
        let (mean_nss, n_nss) = mean(self.per_image.iter().filter_map(|r| r.nss));
        let mut counts = ConfusionCounts::default();
        for region in self.per_image.iter().flat_map(|r| &r.regions) {
            if let (Some(p), Some(t)) = (region.predicted_salient, region.truth_salient) {
                counts.record(p, t);
            }
        }
        let counts = (counts.total() > 0).then_some(counts);
        Aggregates {
            mean_auc,
            mean_nss,
            n_auc,
            n_nss,
            ap50: self.aggregates.ap50,
            ap50_95: self.aggregates.ap50_95,
            counts,
            accuracy: counts.and_then(|c| c.accuracy()),
            sensitivity: counts.and_then(|c| c.sensitivity()),
            specificity: counts.and_then(|c| c.specificity()),
            precision: counts.and_then(|c| c.precision()),
            threshold: self.aggregates.threshold,
        }
    }

    /// Whether the stored aggregates match a recomputation within `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let fresh = self.recompute_aggregates();
        let a = &self.aggregates;
        let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs() <= tol,
            (None, None) => true,
            _ => false,
        };
        close(a.mean_auc, fresh.mean_auc)
            && close(a.mean_nss, fresh.mean_nss)
            && a.n_auc == fresh.n_auc
            && a.n_nss == fresh.n_nss
            && a.counts == fresh.counts
            && close(a.accuracy, fresh.accuracy)
            && close(a.sensitivity, fresh.sensitivity)
            && close(a.specificity, fresh.specificity)
            && close(a.precision, fresh.precision)
    }
}

pub fn format_report(report: &EvaluationReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn parse_report(text: &str) -> Result<EvaluationReport, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::parse(e.line(), "report", e.to_string()))
}

pub fn write_report(report: &EvaluationReport, path: &Path) -> Result<(), FormatError> {
    write_bytes(path, format_report(report).as_bytes())
}

pub fn read_report(path: &Path) -> Result<EvaluationReport, FormatError> {
    parse_report(&read_text(path)?).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_report() -> EvaluationReport {
        let region = |x, mean: f64, p, t| RegionRecord {
            bbox: BoundingBox::new(x, 0, 4, 4).unwrap().with_image_id("a"),
            mean_saliency: mean,
            predicted_salient: Some(p),
            truth_salient: Some(t),
        };
        let mut report = EvaluationReport {
            metadata: ReportMetadata {
                tool_version: "0.1.0".into(),
                method: "spectral-residual".into(),
                aggregation_mode: AGGREGATION_MEAN_OF_IMAGES.into(),
                split: "test".into(),
                threshold_source: Some("override".into()),
                started_unix_ms: 1,
                finished_unix_ms: 2,
                partial: false,
            },
            sections: SectionStatus {
                saliency_metrics: COMPUTED.into(),
                detection_metrics: SKIPPED_MISSING_INPUT.into(),
                significance: COMPUTED.into(),
            },
            aggregates: Aggregates {
                threshold: Some(0.416),
                ..Default::default()
            },
            per_image: vec![
                ImageRecord {
                    image_id: "a".into(),
                    auc: Some(0.9),
                    nss: Some(1.7),
                    regions: vec![region(0, 0.5, true, true), region(5, 0.1, false, true)],
                    excluded_regions: 0,
                },
                ImageRecord {
                    image_id: "b".into(),
                    auc: Some(0.7),
                    nss: None,
                    regions: vec![region(0, 0.45, true, false)],
                    excluded_regions: 1,
                },
            ],
            errors: vec![],
        };
        report.aggregates = report.recompute_aggregates();
        report
    }

    #[test]
    fn two_image_aggregates_are_means() {
        let r = sample_report();
        assert!((r.aggregates.mean_auc.unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(r.aggregates.mean_nss, Some(1.7));
        assert_eq!(
            r.aggregates.counts,
            Some(ConfusionCounts {
                tp: 1,
                tn: 0,
                fp: 1,
                fn_: 1
            })
        );
        assert!(r.is_consistent(1e-9));
    }

    #[test]
    fn empty_report_has_null_aggregates() {
        let mut r = sample_report();
        r.per_image.clear();
        r.aggregates = r.recompute_aggregates();
        assert_eq!(r.aggregates.mean_auc, None);
        assert_eq!(r.aggregates.accuracy, None);
        let text = format_report(&r);
        assert!(text.contains("\"mean_auc\": null"));
        assert_eq!(parse_report(&text).unwrap(), r);
    }

    #[test]
    fn round_trip_is_structurally_identical() {
        let r = sample_report();
        assert_eq!(parse_report(&format_report(&r)).unwrap(), r);
    }

    #[test]
    fn tampered_aggregate_detected() {
        let mut r = sample_report();
        r.aggregates.mean_auc = Some(0.81);
        assert!(!r.is_consistent(1e-9));
    }

    #[test]
    fn invalid_box_in_report_rejected() {
        let text = format_report(&sample_report()).replacen("\"w\": 4", "\"w\": 0", 1);
        assert!(matches!(parse_report(&text), Err(FormatError::Parse { .. })));
    }
}
