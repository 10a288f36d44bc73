//! Batch commands over dataset manifests.
//!
//! Work is distributed per image on a fixed-size worker pool; results are
//! always reduced in manifest order, so the worker count affects only
//! wall-clock time.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::io::{self, FormatError};
use crate::model::{ManifestEntry, RasterImage, SaliencyMap};
use crate::saliency::{import_external_map, spectral_residual, SaliencyError, SpectralResidualParams};

mod calibrate;
mod evaluate;
mod saliency_cmd;
pub mod synth;

pub use calibrate::cmd_calibrate;
pub use evaluate::{cmd_evaluate, REPORT_FILE};
pub use saliency_cmd::cmd_saliency;
pub use synth::cmd_synth;

pub use crate::io::report::ErrorEntry;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl PipelineError {
    /// Process exit code: 1 usage, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => 1,
            PipelineError::Data(_) | PipelineError::Format(_) => 2,
            PipelineError::Internal(_) => 3,
        }
    }
}

/// Where saliency maps come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SaliencyMethod {
    SpectralResidual,
    /// Precomputed maps named `<image_id>.salf` or `<image_id>.pgm`.
    External(PathBuf),
}

impl SaliencyMethod {
    pub fn parse(s: &str) -> Result<Self, PipelineError> {
        match s {
            "spectral-residual" => Ok(SaliencyMethod::SpectralResidual),
            _ => match s.strip_prefix("external:") {
                Some(dir) if !dir.is_empty() => Ok(SaliencyMethod::External(PathBuf::from(dir))),
                _ => Err(PipelineError::Usage(format!(
                    "unknown method '{s}' (expected 'spectral-residual' or 'external:<dir>')"
                ))),
            },
        }
    }

    pub fn id(&self) -> String {
        match self {
            SaliencyMethod::SpectralResidual => "spectral-residual".to_string(),
            SaliencyMethod::External(dir) => format!("external:{}", dir.display()),
        }
    }

    /// File-name-safe tag, used to keep one threshold per method.
    pub fn tag(&self) -> String {
        match self {
            SaliencyMethod::SpectralResidual => "spectral-residual".to_string(),
            SaliencyMethod::External(dir) => {
                let name = dir
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "maps".to_string());
                let safe: String = name
                    .chars()
                    .map(|c| {
                        if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                            c
                        } else {
                            '_'
                        }
                    })
                    .collect();
                format!("external-{safe}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub method: SaliencyMethod,
    pub params: SpectralResidualParams<f64>,
    pub threshold: Option<f64>,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Also write 8-bit `.pgm` previews next to `.salf` maps.
    pub preview: bool,
}

impl RunConfig {
    pub fn new(manifest: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            manifest: manifest.into(),
            method: SaliencyMethod::SpectralResidual,
            params: SpectralResidualParams::default(),
            threshold: None,
            workers: 1,
            out_dir: out_dir.into(),
            seed: 0,
            preview: false,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.workers == 0 {
            return Err(PipelineError::Usage("worker count must be at least 1".into()));
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(PipelineError::Usage(format!("threshold {t} outside [0, 1]")));
            }
        }
        self.params
            .validate()
            .map_err(|e| PipelineError::Usage(e.to_string()))?;
        if let SaliencyMethod::External(dir) = &self.method {
            if !dir.is_dir() {
                return Err(PipelineError::Data(format!(
                    "external map directory {} does not exist",
                    dir.display()
                )));
            }
        }
        Ok(())
    }

    pub fn threshold_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}.threshold", self.method.tag()))
    }
}

pub(crate) fn ensure_dir(path: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(path).map_err(|e| PipelineError::Data(format!("cannot create {}: {e}", path.display())))
}

/// Runs `f` over `items` on a pool of `workers` threads, returning results
/// in input order.
pub(crate) fn par_map_ordered<I, O, F>(workers: usize, items: &[I], f: F) -> Result<Vec<O>, PipelineError>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Internal(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

/// Maximum relative aspect-ratio difference accepted when an external map
/// is resized to its image.
const EXTERNAL_ASPECT_TOLERANCE: f64 = 0.01;

pub(crate) fn external_map_path(dir: &Path, image_id: &str) -> Option<PathBuf> {
    ["salf", "pgm"]
        .iter()
        .map(|ext| dir.join(format!("{image_id}.{ext}")))
        .find(|p| p.is_file())
}

/// Loads the entry's image and produces its normalized saliency map.
pub(crate) fn saliency_for_entry(
    entry: &ManifestEntry,
    config: &RunConfig,
) -> Result<(RasterImage<f64>, SaliencyMap<f64>), String> {
    let image = io::read_image::<f64>(&entry.image_path).map_err(|e| e.to_string())?;
    let map = match &config.method {
        SaliencyMethod::SpectralResidual => {
            spectral_residual(&image, &config.params).map_err(|e| format!("{}: {e}", entry.image_path.display()))?
        }
        SaliencyMethod::External(dir) => {
            let path = external_map_path(dir, &entry.image_id)
                .ok_or_else(|| format!("no external map for '{}' in {}", entry.image_id, dir.display()))?;
            let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let raw = io::decode_map::<f64>(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
            let (iw, ih) = (image.width() as f64, image.height() as f64);
            let (mw, mh) = (raw.width() as f64, raw.height() as f64);
            let aspect_gap = ((mw / mh) / (iw / ih) - 1.0).abs();
            if aspect_gap > EXTERNAL_ASPECT_TOLERANCE {
                return Err(format!(
                    "{}: map is {}x{} but image is {}x{} (aspect ratios differ)",
                    path.display(),
                    raw.width(),
                    raw.height(),
                    image.width(),
                    image.height()
                ));
            }
            import_external_map(&bytes, image.width(), image.height())
                .map_err(|e: SaliencyError| format!("{}: {e}", path.display()))?
        }
    };
    Ok((image, map))
}

pub(crate) fn unix_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
