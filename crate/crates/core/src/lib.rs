//! Spectral-residual saliency, billboard significance scoring and the
//! evaluation metrics used to validate both against eye-tracker fixations
//! (AUC-Judd, NSS) and against annotated regions (IoU, AP@0.5:0.95).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below name the common instantiations. The batch [`pipeline`] runs in
//! `f64`.

pub mod fixation;
pub mod io;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod resample;
pub mod saliency;
pub mod scalar;
pub mod significance;

pub use fixation::{build_fixation_map, detect_fixations_idt, fixations_in_box, BinaryFixationMap, IdtParams};
pub use metrics::{ap_range, auc_judd, average_precision, iou, nss, MetricError, PrPoint};
pub use model::{
    clip_box, luminance, BoundingBox, ConfusionCounts, DatasetManifest, Detection, FixationPoint, FixationSet,
    ManifestEntry, ModelError, RasterImage, SaliencyMap, Split,
};
pub use saliency::{import_external_map, normalize_map, spectral_residual, SaliencyError, SpectralResidualParams};
pub use scalar::Scalar;
pub use significance::{
    calibrate_threshold, classify_region, confusion_stats, ground_truth_salience, region_mean_saliency, RegionScore,
    SignificanceError, SignificanceThreshold,
};

pub type RasterImageF32 = RasterImage<f32>;
pub type RasterImageF64 = RasterImage<f64>;
pub type SaliencyMapF32 = SaliencyMap<f32>;
pub type SaliencyMapF64 = SaliencyMap<f64>;
pub type DetectionF32 = Detection<f32>;
pub type DetectionF64 = Detection<f64>;
pub type FixationSetF32 = FixationSet<f32>;
pub type FixationSetF64 = FixationSet<f64>;
pub type RegionScoreF64 = RegionScore<f64>;
pub type SpectralResidualParamsF64 = SpectralResidualParams<f64>;
