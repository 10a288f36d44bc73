//! Checks the FFT-based spectral residual against a direct O(N^4) DFT
//! implementation written independently here.

use std::f64::consts::PI;

use billboard_salience::{spectral_residual, RasterImageF64, SpectralResidualParamsF64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy)]
struct C(f64, f64);

fn dft2(input: &[C], w: usize, h: usize, sign: f64) -> Vec<C> {
    let mut out = vec![C(0.0, 0.0); w * h];
    for v in 0..h {
        for u in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let ang = sign * 2.0 * PI * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                    let C(a, b) = input[y * w + x];
                    re += a * ang.cos() - b * ang.sin();
                    im += a * ang.sin() + b * ang.cos();
                }
            }
            out[v * w + u] = C(re, im);
        }
    }
    out
}

fn clamp_at(buf: &[f64], w: usize, h: usize, x: isize, y: isize) -> f64 {
    let cx = x.clamp(0, w as isize - 1) as usize;
    let cy = y.clamp(0, h as isize - 1) as usize;
    buf[cy * w + cx]
}

fn box3(buf: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut s = 0.0;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    s += clamp_at(buf, w, h, x + dx, y + dy);
                }
            }
            out[y as usize * w + x as usize] = s / 9.0;
        }
    }
    out
}

fn blur(buf: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let weights: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let s: f64 = (-r..=r)
                .map(|i| weights[(i + r) as usize] * clamp_at(buf, w, h, x + i, y))
                .sum();
            tmp[y as usize * w + x as usize] = s / total;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let s: f64 = (-r..=r)
                .map(|i| weights[(i + r) as usize] * clamp_at(&tmp, w, h, x, y + i))
                .sum();
            out[y as usize * w + x as usize] = s / total;
        }
    }
    out
}

/// Reference pipeline for an input already at working width.
fn reference(gray: &[f64], w: usize, h: usize) -> Vec<f64> {
    let input: Vec<C> = gray.iter().map(|&v| C(v, 0.0)).collect();
    let spec = dft2(&input, w, h, -1.0);
    let amp: Vec<f64> = spec.iter().map(|c| c.0.hypot(c.1)).collect();
    let peak = amp.iter().cloned().fold(0.0, f64::max);
    let mut sorted = amp.clone();
    sorted.sort_by(f64::total_cmp);
    let floor = 0.1 * sorted[sorted.len() / 2] + 1e-8 * peak;
    let log_amp: Vec<f64> = amp.iter().map(|a| a.max(floor).ln()).collect();
    let avg = box3(&log_amp, w, h);
    let recon: Vec<C> = spec
        .iter()
        .zip(log_amp.iter().zip(&avg))
        .map(|(c, (l, s))| {
            let m = (l - s).exp();
            let p = c.1.atan2(c.0);
            C(m * p.cos(), m * p.sin())
        })
        .collect();
    let back = dft2(&recon, w, h, 1.0);
    let n = (w * h) as f64;
    let energy: Vec<f64> = back.iter().map(|c| (c.0 / n).powi(2) + (c.1 / n).powi(2)).collect();
    let smooth = blur(&energy, w, h, 3.0);
    let lo = smooth.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = smooth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    smooth.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

#[test]
fn fft_pipeline_matches_direct_dft() {
    let (w, h) = (64, 24);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rgb = vec![0.0; w * h * 3];
    for v in rgb.iter_mut() {
        *v = rng.gen_range(0.0..0.3);
    }
    for y in 8..14 {
        for x in 40..47 {
            for c in 0..3 {
                rgb[(y * w + x) * 3 + c] = 0.9;
            }
        }
    }
    let gray: Vec<f64> = rgb
        .chunks(3)
        .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
        .collect();
    let expected = reference(&gray, w, h);

    let image = RasterImageF64::new(w, h, 3, rgb).unwrap();
    let got = spectral_residual(&image, &SpectralResidualParamsF64::default()).unwrap();
    let worst = got
        .values()
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "max deviation {worst}");
}

#[test]
fn bright_patch_on_black_is_the_peak() {
    let size = 64;
    let mut pixels = vec![0.0; size * size];
    for y in 30..34 {
        for x in 12..16 {
            pixels[y * size + x] = 1.0;
        }
    }
    let expected = reference(&pixels, size, size);
    let image = RasterImageF64::new(size, size, 1, pixels).unwrap();
    let got = spectral_residual(&image, &SpectralResidualParamsF64::default()).unwrap();
    let argmax = |v: &[f64]| {
        v.iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc })
            .0
    };
    for (label, values) in [("impl", got.values()), ("oracle", &expected[..])] {
        let i = argmax(values);
        let (x, y) = ((i % size) as f64, (i / size) as f64);
        let dx = (12.0 - x).max(x - 15.0).max(0.0);
        let dy = (30.0 - y).max(y - 33.0).max(0.0);
        assert!(dx.hypot(dy) <= 2.0, "{label} peak at ({x},{y})");
    }
}
