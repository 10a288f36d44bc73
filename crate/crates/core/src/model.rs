//! Shared domain types and coordinate conventions.
//!
//! Origin is the top-left corner, x grows rightward and y downward. Pixel
//! `(x, y)` covers `[x, x+1) × [y, y+1)`, so a box `(x, y, w, h)` contains
//! the half-open region `[x, x+w) × [y, y+h)`.

use std::fmt;
use std::ops::Add;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub type ImageId = String;

/// Rec. 601 luma weights for (R, G, B).
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannelCount(usize),
    #[error("pixel buffer has {actual} values, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("value at index {index} is {value}, outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },
    #[error("value at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("box extents must be positive, got w={w} h={h}")]
    InvalidBox { w: i64, h: i64 },
    #[error("box {bbox} does not intersect the {width}x{height} frame")]
    EmptyIntersection { bbox: String, width: usize, height: usize },
    #[error("confidence {0} outside [0, 1]")]
    ConfidenceOutOfRange(f64),
}

/// Decoded pixel grid with values in `[0, 1]`, row-major and channel-interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage<T> {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<T>,
}

impl<T: Scalar> RasterImage<T> {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<T>) -> Result<Self, ModelError> {
        if width == 0 || height == 0 {
            return Err(ModelError::ZeroDimension { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(ModelError::UnsupportedChannelCount(channels));
        }
        let expected = width * height * channels;
        if pixels.len() != expected {
            return Err(ModelError::LengthMismatch {
                expected,
                actual: pixels.len(),
            });
        }
        for (index, &v) in pixels.iter().enumerate() {
            if !v.is_finite() {
                return Err(ModelError::NonFinite { index });
            }
            if v < T::zero() || v > T::one() {
                return Err(ModelError::ValueOutOfRange {
                    index,
                    value: v.to_f64_lossy(),
                });
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Builds an image from 8-bit samples, mapping each byte to `v / 255`.
    pub fn from_u8(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self, ModelError> {
        let scale = T::lit(255.0);
        let pixels = bytes.iter().map(|&b| T::from_u8(b).unwrap() / scale).collect();
        Self::new(width, height, channels, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    /// Multiplies every sample by `c`. Fails if the result leaves `[0, 1]`.
    pub fn scaled(&self, c: T) -> Result<Self, ModelError> {
        Self::new(
            self.width,
            self.height,
            self.channels,
            self.pixels.iter().map(|&v| v * c).collect(),
        )
    }

    /// Single-channel luma image. RGB uses weights (0.299, 0.587, 0.114);
    /// a single-channel image is returned unchanged.
    pub fn luminance(&self) -> Self {
        if self.channels == 1 {
            return self.clone();
        }
        let [wr, wg, wb] = LUMA_WEIGHTS.map(T::lit);
        let pixels = self
            .pixels
            .chunks_exact(3)
            .map(|px| {
                let v = wr * px[0] + wg * px[1] + wb * px[2];
                // Weighted sums of values in [0, 1] can round a hair above 1.
                v.max(T::zero()).min(T::one())
            })
            .collect();
        Self {
            width: self.width,
            height: self.height,
            channels: 1,
            pixels,
        }
    }
}

/// Free-function form of [`RasterImage::luminance`].
pub fn luminance<T: Scalar>(image: &RasterImage<T>) -> RasterImage<T> {
    image.luminance()
}

/// Per-pixel salience intensities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
    normalized: bool,
}

impl<T: Scalar> SaliencyMap<T> {
    /// Raw (unnormalized) map. Values must be finite.
    pub fn new(width: usize, height: usize, values: Vec<T>) -> Result<Self, ModelError> {
        if width == 0 || height == 0 {
            return Err(ModelError::ZeroDimension { width, height });
        }
        if values.len() != width * height {
            return Err(ModelError::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            values,
            normalized: false,
        })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self, ModelError> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Wraps values that already satisfy the normalized-map invariant
    /// (all in `[0, 1]`; min 0 and max 1 unless constant). The flag is set
    /// only when the invariant holds.
    pub fn with_detected_normalization(width: usize, height: usize, values: Vec<T>) -> Result<Self, ModelError> {
        let mut map = Self::new(width, height, values)?;
        map.normalized = map.satisfies_normalized_invariant();
        Ok(map)
    }

    pub(crate) fn from_parts_normalized(width: usize, height: usize, values: Vec<T>) -> Self {
        Self {
            width,
            height,
            values,
            normalized: true,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }

    pub fn min_max(&self) -> (T, T) {
        self.values
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Applies `f` to every value; the result is unnormalized.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> Result<Self, ModelError> {
        Self::new(self.width, self.height, self.values.iter().map(|&v| f(v)).collect())
    }

    fn satisfies_normalized_invariant(&self) -> bool {
        let (lo, hi) = self.min_max();
        if lo < T::zero() || hi > T::one() {
            return false;
        }
        lo == hi || (lo == T::zero() && hi == T::one())
    }
}

/// Axis-aligned region in pixel units. `w` and `h` are always at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BoxRecord", into = "BoxRecord")]
pub struct BoundingBox {
    x: i64,
    y: i64,
    w: i64,
    h: i64,
    image_id: ImageId,
}

#[derive(Serialize, Deserialize)]
struct BoxRecord {
    x: i64,
    y: i64,
    w: i64,
    h: i64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    image_id: ImageId,
}

impl TryFrom<BoxRecord> for BoundingBox {
    type Error = ModelError;

    fn try_from(r: BoxRecord) -> Result<Self, Self::Error> {
        Ok(BoundingBox::new(r.x, r.y, r.w, r.h)?.with_image_id(r.image_id))
    }
}

impl From<BoundingBox> for BoxRecord {
    fn from(b: BoundingBox) -> Self {
        BoxRecord {
            x: b.x,
            y: b.y,
            w: b.w,
            h: b.h,
            image_id: b.image_id,
        }
    }
}

impl BoundingBox {
    pub fn new(x: i64, y: i64, w: i64, h: i64) -> Result<Self, ModelError> {
        if w < 1 || h < 1 {
            return Err(ModelError::InvalidBox { w, h });
        }
        Ok(Self {
            x,
            y,
            w,
            h,
            image_id: ImageId::new(),
        })
    }

    pub fn with_image_id(mut self, image_id: impl Into<ImageId>) -> Self {
        self.image_id = image_id.into();
        self
    }

    pub fn x(&self) -> i64 {
        self.x
    }

    pub fn y(&self) -> i64 {
        self.y
    }

    pub fn w(&self) -> i64 {
        self.w
    }

    pub fn h(&self) -> i64 {
        self.h
    }

    /// Exclusive right edge.
    pub fn right(&self) -> i64 {
        self.x + self.w
    }

    /// Exclusive bottom edge.
    pub fn bottom(&self) -> i64 {
        self.y + self.h
    }

    pub fn area(&self) -> i64 {
        self.w * self.h
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    /// Area of the overlap with `other`, 0 when disjoint.
    pub fn intersection_area(&self, other: &BoundingBox) -> i64 {
        let iw = self.right().min(other.right()) - self.x.max(other.x);
        let ih = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if iw <= 0 || ih <= 0 {
            0
        } else {
            iw * ih
        }
    }

    /// Half-open containment test for a real-valued point.
    pub fn contains_point<T: Scalar>(&self, x: T, y: T) -> bool {
        let (x, y) = (x.to_f64_lossy(), y.to_f64_lossy());
        x >= self.x as f64 && x < self.right() as f64 && y >= self.y as f64 && y < self.bottom() as f64
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x, self.y, self.w, self.h)
    }
}

/// Intersects `bbox` with the frame `[0, width) × [0, height)`.
pub fn clip_box(bbox: &BoundingBox, width: usize, height: usize) -> Result<BoundingBox, ModelError> {
    let x0 = bbox.x.max(0);
    let y0 = bbox.y.max(0);
    let x1 = bbox.right().min(width as i64);
    let y1 = bbox.bottom().min(height as i64);
    if x1 <= x0 || y1 <= y0 {
        return Err(ModelError::EmptyIntersection {
            bbox: bbox.to_string(),
            width,
            height,
        });
    }
    Ok(BoundingBox {
        x: x0,
        y: y0,
        w: x1 - x0,
        h: y1 - y0,
        image_id: bbox.image_id.clone(),
    })
}

/// Detector output: a box with a confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T> {
    bbox: BoundingBox,
    confidence: T,
}

impl<T: Scalar> Detection<T> {
    pub fn new(bbox: BoundingBox, confidence: T) -> Result<Self, ModelError> {
        if !(confidence >= T::zero() && confidence <= T::one()) {
            return Err(ModelError::ConfidenceOutOfRange(confidence.to_f64_lossy()));
        }
        Ok(Self { bbox, confidence })
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn confidence(&self) -> T {
        self.confidence
    }

    pub fn image_id(&self) -> &str {
        self.bbox.image_id()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixationPoint<T> {
    pub x: T,
    pub y: T,
    pub timestamp_ms: Option<T>,
    pub duration_ms: Option<T>,
}

impl<T: Scalar> FixationPoint<T> {
    pub fn at(x: T, y: T) -> Self {
        Self {
            x,
            y,
            timestamp_ms: None,
            duration_ms: None,
        }
    }

    pub fn timed(x: T, y: T, timestamp_ms: T) -> Self {
        Self {
            x,
            y,
            timestamp_ms: Some(timestamp_ms),
            duration_ms: None,
        }
    }

    pub fn in_frame(&self, width: usize, height: usize) -> bool {
        self.x >= T::zero()
            && self.y >= T::zero()
            && self.x < T::from_usize_lossy(width)
            && self.y < T::from_usize_lossy(height)
    }
}

/// Fixations recorded for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationSet<T> {
    pub image_id: ImageId,
    pub points: Vec<FixationPoint<T>>,
}

impl<T: Scalar> FixationSet<T> {
    pub fn new(image_id: impl Into<ImageId>, points: Vec<FixationPoint<T>>) -> Self {
        Self {
            image_id: image_id.into(),
            points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

/// Binary classification tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn record(&mut self, predicted: bool, truth: bool) {
        match (predicted, truth) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// `(tp + tn) / total`; `None` when there are no regions.
    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.total())
    }

    /// `tp / (tp + fn)`; `None` when nothing is truly salient.
    pub fn sensitivity(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `tn / (tn + fp)`.
    pub fn specificity(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }

    /// `tp / (tp + fp)`.
    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, rhs: Self) -> Self {
        ConfusionCounts {
            tp: self.tp + rhs.tp,
            tn: self.tn + rhs.tn,
            fp: self.fp + rhs.fp,
            fn_: self.fn_ + rhs.fn_,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split '{other}' (expected train, val or test)")),
        }
    }
}

/// One image record in a dataset manifest. Paths are resolved (absolute or
/// relative to the working directory) by the loader.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image_id: ImageId,
    pub image_path: PathBuf,
    pub annotation_path: PathBuf,
    pub detection_path: Option<PathBuf>,
    pub gaze_path: Option<PathBuf>,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
