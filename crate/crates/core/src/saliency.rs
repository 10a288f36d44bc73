//! Spectral-residual saliency and saliency-map normalization/import.
//!
//! The spectral residual is the log-amplitude spectrum minus its local
//! average. Recombining that residual with the original phase and
//! transforming back concentrates energy on the parts of the image that
//! deviate from the statistically expected spectrum.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::io::{self, FormatError};
use crate::model::{ModelError, RasterImage, SaliencyMap};
use crate::resample::{gaussian_blur, mean_filter, resize_bilinear};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SaliencyError {
    #[error("image {width}x{height} is smaller than the {min}px mean filter")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("invalid spectral-residual parameters: {0}")]
    InvalidParams(String),
    #[error("target dimensions must be positive, got {width}x{height}")]
    DimensionError { width: usize, height: usize },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralResidualParams<T> {
    /// Width of the grid the transform runs on; height follows the aspect ratio.
    pub working_width: usize,
    /// Side of the square averaging filter applied to the log-amplitude spectrum.
    pub mean_filter_size: usize,
    /// Gaussian sigma, in working-grid pixels, for the final smoothing.
    pub post_blur_sigma: T,
    /// Amplitude floor before the logarithm, as a fraction of the median
    /// spectral amplitude.
    pub amplitude_epsilon: T,
}

impl<T: Scalar> Default for SpectralResidualParams<T> {
    fn default() -> Self {
        Self {
            working_width: 64,
            mean_filter_size: 3,
            post_blur_sigma: T::lit(3.0),
            amplitude_epsilon: T::lit(0.1),
        }
    }
}

impl<T: Scalar> SpectralResidualParams<T> {
    pub fn validate(&self) -> Result<(), SaliencyError> {
        let bad = |m: String| Err(SaliencyError::InvalidParams(m));
        if self.mean_filter_size == 0 || self.mean_filter_size.is_multiple_of(2) {
            return bad(format!(
                "mean_filter_size must be odd and positive, got {}",
                self.mean_filter_size
            ));
        }
        if self.working_width < self.mean_filter_size {
            return bad(format!(
                "working_width {} is smaller than mean_filter_size {}",
                self.working_width, self.mean_filter_size
            ));
        }
        if !(self.post_blur_sigma > T::zero() && self.post_blur_sigma.is_finite()) {
            return bad(format!(
                "post_blur_sigma must be positive, got {}",
                self.post_blur_sigma
            ));
        }
        if !(self.amplitude_epsilon > T::zero() && self.amplitude_epsilon.is_finite()) {
            return bad(format!(
                "amplitude_epsilon must be positive, got {}",
                self.amplitude_epsilon
            ));
        }
        Ok(())
    }

    /// Working-grid dimensions for an input of the given size.
    pub fn working_dims(&self, width: usize, height: usize) -> (usize, usize) {
        let ww = self.working_width;
        let wh = (height as f64 * ww as f64 / width as f64).round().max(1.0) as usize;
        (ww, wh)
    }
}

/// Computes a normalized spectral-residual saliency map with the same
/// dimensions as `image`.
pub fn spectral_residual<T: Scalar>(
    image: &RasterImage<T>,
    params: &SpectralResidualParams<T>,
) -> Result<SaliencyMap<T>, SaliencyError> {
    params.validate()?;
    let (width, height) = (image.width(), image.height());
    if width < params.mean_filter_size || height < params.mean_filter_size {
        return Err(SaliencyError::ImageTooSmall {
            width,
            height,
            min: params.mean_filter_size,
        });
    }

    let luma = image.luminance();
    let (ww, wh) = params.working_dims(width, height);
    let small = resize_bilinear(luma.pixels(), width, height, ww, wh);

    // A featureless input carries no residual energy; the replicate-border
    // mean filter would otherwise leak the DC term into its neighbours.
    let first = small[0];
    if small.iter().all(|&v| v == first) {
        return Ok(SaliencyMap::from_parts_normalized(
            width,
            height,
            vec![T::zero(); width * height],
        ));
    }

    let mut planner = FftPlanner::<T>::new();
    let mut spectrum: Vec<Complex<T>> = small.iter().map(|&v| Complex::new(v, T::zero())).collect();
    fft2d(&mut planner, &mut spectrum, ww, wh, false);

    // Amplitudes are floored relative to the spectrum's own scale. Exact
    // spectral zeros (a box whose side divides the grid) would otherwise sit
    // tens of nats below their neighbours and dominate the residual, and an
    // absolute floor would not shift by log c when the image is scaled by c.
    let amplitude: Vec<T> = spectrum.iter().map(|c| c.norm()).collect();
    let log_amp: Vec<T> = {
        let floor = amplitude_floor(&amplitude, params.amplitude_epsilon);
        amplitude.iter().map(|&a| a.max(floor).ln()).collect()
    };
    let smoothed = mean_filter(&log_amp, ww, wh, params.mean_filter_size);

    for ((c, &l), &s) in spectrum.iter_mut().zip(&log_amp).zip(&smoothed) {
        let phase = c.arg();
        *c = Complex::from_polar((l - s).exp(), phase);
    }
    fft2d(&mut planner, &mut spectrum, ww, wh, true);

    let energy: Vec<T> = spectrum.iter().map(|c| c.norm_sqr()).collect();
    let blurred = gaussian_blur(&energy, ww, wh, params.post_blur_sigma);
    let full = resize_bilinear(&blurred, ww, wh, width, height);
    Ok(normalize_map(&SaliencyMap::new(width, height, full)?))
}

/// `epsilon` times the median amplitude, plus a tiny fraction of the peak so
/// that spectra that are mostly zero still get a positive floor.
fn amplitude_floor<T: Scalar>(amplitude: &[T], epsilon: T) -> T {
    let mut sorted = amplitude.to_vec();
    let mid = sorted.len() / 2;
    let (_, &mut median, _) =
        sorted.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let peak = amplitude.iter().fold(T::zero(), |m, &a| m.max(a));
    epsilon * median + T::lit(1e-8) * peak
}

/// In-place 2-D DFT over a row-major `w × h` buffer. The inverse is scaled
/// by `1 / (w h)`.
fn fft2d<T: Scalar>(planner: &mut FftPlanner<T>, data: &mut [Complex<T>], w: usize, h: usize, inverse: bool) {
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(w), planner.plan_fft_inverse(h))
    } else {
        (planner.plan_fft_forward(w), planner.plan_fft_forward(h))
    };
    row_fft.process(data);

    let mut transposed = vec![Complex::new(T::zero(), T::zero()); w * h];
    for y in 0..h {
        for x in 0..w {
            transposed[x * h + y] = data[y * w + x];
        }
    }
    col_fft.process(&mut transposed);
    let scale = if inverse {
        T::one() / T::from_usize_lossy(w * h)
    } else {
        T::one()
    };
    for x in 0..w {
        for y in 0..h {
            data[y * w + x] = transposed[x * h + y] * scale;
        }
    }
}

/// Min-max normalization to `[0, 1]`. A constant map becomes all zeros.
pub fn normalize_map<T: Scalar>(map: &SaliencyMap<T>) -> SaliencyMap<T> {
    let (lo, hi) = map.min_max();
    let values = if hi > lo {
        let range = hi - lo;
        map.values().iter().map(|&v| (v - lo) / range).collect()
    } else {
        vec![T::zero(); map.len()]
    };
    SaliencyMap::from_parts_normalized(map.width(), map.height(), values)
}

/// Decodes an externally produced saliency map (binary/ASCII graymap or the
/// float container), resizes it bilinearly to the target size if needed and
/// normalizes it.
pub fn import_external_map<T: Scalar>(
    source: &[u8],
    target_width: usize,
    target_height: usize,
) -> Result<SaliencyMap<T>, SaliencyError> {
    if target_width == 0 || target_height == 0 {
        return Err(SaliencyError::DimensionError {
            width: target_width,
            height: target_height,
        });
    }
    let decoded = io::decode_map::<T>(source)?;
    let values = resize_bilinear(
        decoded.values(),
        decoded.width(),
        decoded.height(),
        target_width,
        target_height,
    );
    Ok(normalize_map(&SaliencyMap::new(target_width, target_height, values)?))
}
