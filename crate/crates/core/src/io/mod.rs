//! Readers and writers for every on-disk format the toolkit touches.
//!
//! | extension   | contents                                         |
//! |-------------|--------------------------------------------------|
//! | `.manifest` | one `key=value` record per image                 |
//! | `.boxes`    | `x y w h` per line                               |
//! | `.dets`     | `x y w h confidence` per line                    |
//! | `.gaze`     | comma-separated, header `x,y[,timestamp_ms,duration_ms]` |
//! | `.pgm/.ppm` | netpbm graymap/pixmap (P2, P3, P5, P6)           |
//! | `.salf`     | little-endian float saliency container           |
//! | `.threshold`| `key=value` significance threshold record        |
//! | `.report`   | JSON evaluation report                           |

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{ModelError, RasterImage, SaliencyMap};
use crate::scalar::Scalar;

pub mod gaze;
pub mod manifest;
pub mod netpbm;
pub mod regions;
pub mod report;
pub mod salf;
pub mod threshold;

pub use gaze::{load_gaze, parse_gaze};
pub use manifest::{format_manifest, load_manifest, parse_manifest};
pub use regions::{load_annotations, load_detections, parse_annotations, parse_detections};
pub use report::{read_report, write_report, EvaluationReport};
pub use threshold::{read_threshold, write_threshold, ThresholdRecord};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {inner}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        inner: Box<FormatError>,
    },
    #[error("line {line}, field '{field}': {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error("byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("byte 0: unsupported magic {0:?}")]
    UnsupportedMagic(String),
    #[error("line {line}: invalid box: {message}")]
    InvalidBox { line: usize, message: String },
    #[error("line {line}: confidence {value} outside [0, 1]")]
    ConfidenceOutOfRange { line: usize, value: f64 },
    #[error("line {line}: referenced file {} does not exist", path.display())]
    MissingFile { line: usize, path: PathBuf },
    #[error("line {line}: duplicate image id '{image_id}'")]
    DuplicateImageId { line: usize, image_id: String },
    #[error("cannot encode: {0}")]
    Unencodable(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl FormatError {
    pub(crate) fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Parse {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn malformed(offset: usize, message: impl Into<String>) -> Self {
        FormatError::Malformed {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            e @ (FormatError::Io { .. } | FormatError::InFile { .. }) => e,
            e => FormatError::InFile {
                path: path.to_path_buf(),
                inner: Box::new(e),
            },
        }
    }
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    std::fs::write(path, bytes).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a netpbm graymap or pixmap as an image in `[0, 1]`.
pub fn read_image<T: Scalar>(path: &Path) -> Result<RasterImage<T>, FormatError> {
    let bytes = read_bytes(path)?;
    netpbm::decode(&bytes)
        .and_then(|pnm| pnm.to_raster())
        .map_err(|e| e.in_file(path))
}

/// Decodes a saliency map from a graymap (P2/P5) or float container, sniffing
/// the magic bytes. Graymap samples are scaled by `1 / maxval`.
pub fn decode_map<T: Scalar>(bytes: &[u8]) -> Result<SaliencyMap<T>, FormatError> {
    match bytes.get(..4) {
        Some(m) if m == salf::MAGIC => salf::decode(bytes),
        _ if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") => {
            let pnm = netpbm::decode(bytes)?;
            if pnm.channels != 1 {
                return Err(FormatError::UnsupportedMagic(pnm.magic.to_string()));
            }
            let maxval = T::from_u16(pnm.maxval).unwrap();
            let values = pnm.samples.iter().map(|&s| T::from_u16(s).unwrap() / maxval).collect();
            Ok(SaliencyMap::with_detected_normalization(pnm.width, pnm.height, values)?)
        }
        _ => Err(FormatError::UnsupportedMagic(
            String::from_utf8_lossy(&bytes[..bytes.len().min(4)]).into_owned(),
        )),
    }
}

pub fn read_map<T: Scalar>(path: &Path) -> Result<SaliencyMap<T>, FormatError> {
    let bytes = read_bytes(path)?;
    decode_map(&bytes).map_err(|e| e.in_file(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapEncoding {
    /// 8-bit binary graymap; requires a normalized map.
    Graymap,
    /// Lossless 32-bit float container.
    Float,
}

impl MapEncoding {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "pgm" => Some(MapEncoding::Graymap),
            "salf" => Some(MapEncoding::Float),
            _ => None,
        }
    }
}

pub fn encode_map<T: Scalar>(map: &SaliencyMap<T>, encoding: MapEncoding) -> Result<Vec<u8>, FormatError> {
    match encoding {
        MapEncoding::Graymap => netpbm::encode_map_pgm(map),
        MapEncoding::Float => Ok(salf::encode(map)),
    }
}

/// Writes `map` using the encoding implied by the file extension
/// (`.pgm` or `.salf`).
pub fn write_map<T: Scalar>(map: &SaliencyMap<T>, path: &Path) -> Result<(), FormatError> {
    let encoding = MapEncoding::from_path(path)
        .ok_or_else(|| FormatError::Unencodable(format!("unknown map extension for {}", path.display())))?;
    write_bytes(path, &encode_map(map, encoding)?)
}
