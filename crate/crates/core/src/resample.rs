//! Grid resampling and separable filters on row-major single-channel buffers.
//!
//! All filters use replicate (clamp-to-edge) border handling.

use crate::scalar::Scalar;

#[inline]
fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Bilinear resize with pixel-center alignment. Resizing to the same
/// dimensions returns the input unchanged.
pub fn resize_bilinear<T: Scalar>(src: &[T], sw: usize, sh: usize, dw: usize, dh: usize) -> Vec<T> {
    debug_assert_eq!(src.len(), sw * sh);
    if sw == dw && sh == dh {
        return src.to_vec();
    }
    let half = T::lit(0.5);
    let axis = |d: usize, s: usize| -> Vec<(usize, usize, T)> {
        let scale = T::from_usize_lossy(s) / T::from_usize_lossy(d);
        let max = T::from_usize_lossy(s - 1);
        (0..d)
            .map(|i| {
                let pos = ((T::from_usize_lossy(i) + half) * scale - half).max(T::zero()).min(max);
                let i0 = pos.floor().to_usize().unwrap();
                let i1 = (i0 + 1).min(s - 1);
                (i0, i1, pos - T::from_usize_lossy(i0))
            })
            .collect()
    };
    let xs = axis(dw, sw);
    let ys = axis(dh, sh);
    let mut out = Vec::with_capacity(dw * dh);
    for &(y0, y1, fy) in &ys {
        let r0 = &src[y0 * sw..(y0 + 1) * sw];
        let r1 = &src[y1 * sw..(y1 + 1) * sw];
        for &(x0, x1, fx) in &xs {
            let top = r0[x0] + (r0[x1] - r0[x0]) * fx;
            let bot = r1[x0] + (r1[x1] - r1[x0]) * fx;
            out.push(top + (bot - top) * fy);
        }
    }
    out
}

/// Applies a 1-D kernel (odd length, centered) along rows then columns.
pub fn separable_filter<T: Scalar>(src: &[T], w: usize, h: usize, kernel: &[T]) -> Vec<T> {
    debug_assert!(kernel.len() % 2 == 1);
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![T::zero(); src.len()];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = T::zero();
            for (k, &kv) in kernel.iter().enumerate() {
                acc += kv * row[clamp_index(x as isize + k as isize - r, w)];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![T::zero(); src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (k, &kv) in kernel.iter().enumerate() {
                acc += kv * tmp[clamp_index(y as isize + k as isize - r, h) * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// `size × size` averaging filter.
pub fn mean_filter<T: Scalar>(src: &[T], w: usize, h: usize, size: usize) -> Vec<T> {
    let kernel = vec![T::one() / T::from_usize_lossy(size); size];
    separable_filter(src, w, h, &kernel)
}

/// Normalized Gaussian kernel with radius `⌈3σ⌉`.
pub fn gaussian_kernel<T: Scalar>(sigma: T) -> Vec<T> {
    let radius = (sigma * T::lit(3.0)).ceil().to_usize().unwrap_or(0);
    let two_var = T::lit(2.0) * sigma * sigma;
    let mut kernel: Vec<T> = (0..=2 * radius)
        .map(|i| {
            let d = T::from_usize_lossy(i) - T::from_usize_lossy(radius);
            (-(d * d) / two_var).exp()
        })
        .collect();
    let sum: T = kernel.iter().copied().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);
    kernel
}

pub fn gaussian_blur<T: Scalar>(src: &[T], w: usize, h: usize, sigma: T) -> Vec<T> {
    separable_filter(src, w, h, &gaussian_kernel(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_size_resize_is_identity() {
        let src: Vec<f64> = (0..12).map(|v| v as f64 * 0.1).collect();
        assert_eq!(resize_bilinear(&src, 4, 3, 4, 3), src);
    }

    #[test]
    fn upsample_of_linear_ramp_stays_linear_inside() {
        let src = vec![0.0f64, 1.0];
        let out = resize_bilinear(&src, 2, 1, 4, 1);
        // Centers map to -0.25, 0.25, 0.75, 1.25 in source coordinates.
        let expected = [0.0, 0.25, 0.75, 1.0];
        for (a, b) in out.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{out:?}");
        }
    }

    #[test]
    fn mean_filter_replicates_borders() {
        // 3x1 row [0, 3, 6]; vertical replicate leaves rows unchanged.
        let out = mean_filter(&[0.0f64, 3.0, 6.0], 3, 1, 3);
        let expected = [1.0, 3.0, 5.0];
        for (a, b) in out.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_kernel_sums_to_one_with_expected_radius() {
        let k = gaussian_kernel(3.0f64);
        assert_eq!(k.len(), 19);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(k[9] > k[8] && k[8] > k[0]);
    }

    #[test]
    fn blur_preserves_constant_field() {
        let out = gaussian_blur(&[0.4f32; 30], 6, 5, 1.5);
        assert!(out.iter().all(|v| (v - 0.4).abs() < 1e-6));
    }
}
