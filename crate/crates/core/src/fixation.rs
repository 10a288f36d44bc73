//! Fixation maps, dispersion-threshold fixation detection and box containment.

use thiserror::Error;

use crate::model::{BoundingBox, FixationPoint, FixationSet, ImageId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixationError {
    #[error("{} fixation(s) outside the {width}x{height} frame: {points:?}", points.len())]
    OutOfFrame {
        width: usize,
        height: usize,
        points: Vec<(f64, f64)>,
    },
    #[error("frame dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("gaze sample {index} has no timestamp")]
    MissingTimestamp { index: usize },
    #[error("gaze timestamps must be strictly increasing (sample {index})")]
    NonMonotonicTimestamps { index: usize },
    #[error("I-DT thresholds must be positive")]
    InvalidParams,
}

/// Per-pixel fixation presence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryFixationMap {
    width: usize,
    height: usize,
    fixated: Vec<bool>,
}

impl BinaryFixationMap {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            fixated: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[bool] {
        &self.fixated
    }

    pub fn is_fixated(&self, x: usize, y: usize) -> bool {
        self.fixated[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize) {
        self.fixated[y * self.width + x] = true;
    }

    pub fn count(&self) -> usize {
        self.fixated.iter().filter(|&&f| f).count()
    }

    /// Row-major indices of fixated cells.
    pub fn fixated_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.fixated.iter().enumerate().filter_map(|(i, &f)| f.then_some(i))
    }
}

/// Marks cell `(⌊x⌋, ⌊y⌋)` for every fixation. All points must lie in the frame.
pub fn build_fixation_map<T: Scalar>(
    fixations: &FixationSet<T>,
    width: usize,
    height: usize,
) -> Result<BinaryFixationMap, FixationError> {
    if width == 0 || height == 0 {
        return Err(FixationError::ZeroDimension { width, height });
    }
    let outside: Vec<(f64, f64)> = fixations
        .points
        .iter()
        .filter(|p| !p.in_frame(width, height))
        .map(|p| (p.x.to_f64_lossy(), p.y.to_f64_lossy()))
        .collect();
    if !outside.is_empty() {
        return Err(FixationError::OutOfFrame {
            width,
            height,
            points: outside,
        });
    }
    let mut map = BinaryFixationMap::empty(width, height);
    for p in &fixations.points {
        let x = p.x.floor().to_usize().unwrap().min(width - 1);
        let y = p.y.floor().to_usize().unwrap().min(height - 1);
        map.set(x, y);
    }
    Ok(map)
}

/// Number of fixations inside `bbox` using half-open containment.
pub fn fixations_in_box<T: Scalar>(fixations: &FixationSet<T>, bbox: &BoundingBox) -> usize {
    fixations
        .points
        .iter()
        .filter(|p| bbox.contains_point(p.x, p.y))
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdtParams<T> {
    /// Maximum `(max x − min x) + (max y − min y)` within a fixation, in pixels.
    pub dispersion_threshold_px: T,
    /// Minimum fixation duration in milliseconds.
    pub duration_threshold_ms: T,
}

impl<T: Scalar> Default for IdtParams<T> {
    fn default() -> Self {
        Self {
            dispersion_threshold_px: T::lit(25.0),
            duration_threshold_ms: T::lit(100.0),
        }
    }
}

#[derive(Clone, Copy)]
struct Extent<T> {
    min_x: T,
    max_x: T,
    min_y: T,
    max_y: T,
}

impl<T: Scalar> Extent<T> {
    fn of(p: &FixationPoint<T>) -> Self {
        Self {
            min_x: p.x,
            max_x: p.x,
            min_y: p.y,
            max_y: p.y,
        }
    }

    fn grown(mut self, p: &FixationPoint<T>) -> Self {
        self.min_x = self.min_x.min(p.x);
        self.max_x = self.max_x.max(p.x);
        self.min_y = self.min_y.min(p.y);
        self.max_y = self.max_y.max(p.y);
        self
    }

    fn dispersion(&self) -> T {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }
}

/// Dispersion-threshold (I-DT) fixation identification over timestamped
/// gaze samples.
///
/// Starting at sample `i`, the window is first extended to cover the
/// duration threshold. If its dispersion is within bounds it keeps growing
/// one sample at a time while the bound holds, and the window becomes a
/// fixation (centroid, onset timestamp, last − first timestamp); scanning
/// resumes after it. Otherwise the window start slides by one sample.
pub fn detect_fixations_idt<T: Scalar>(
    image_id: impl Into<ImageId>,
    gaze: &[FixationPoint<T>],
    params: &IdtParams<T>,
) -> Result<FixationSet<T>, FixationError> {
    if !(params.dispersion_threshold_px > T::zero() && params.duration_threshold_ms > T::zero()) {
        return Err(FixationError::InvalidParams);
    }
    let times = gaze
        .iter()
        .enumerate()
        .map(|(index, p)| p.timestamp_ms.ok_or(FixationError::MissingTimestamp { index }))
        .collect::<Result<Vec<T>, _>>()?;
    if let Some(index) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(FixationError::NonMonotonicTimestamps { index: index + 1 });
    }

    let n = gaze.len();
    let mut fixations = Vec::new();
    let mut start = 0;
    while start < n {
        let Some(mut end) = (start..n).find(|&j| times[j] - times[start] >= params.duration_threshold_ms) else {
            break;
        };
        let mut extent = gaze[start + 1..=end]
            .iter()
            .fold(Extent::of(&gaze[start]), Extent::grown);
        if extent.dispersion() > params.dispersion_threshold_px {
            start += 1;
            continue;
        }
        while end + 1 < n {
            let next = extent.grown(&gaze[end + 1]);
            if next.dispersion() > params.dispersion_threshold_px {
                break;
            }
            extent = next;
            end += 1;
        }
        let window = &gaze[start..=end];
        let count = T::from_usize_lossy(window.len());
        let cx = window.iter().map(|p| p.x).sum::<T>() / count;
        let cy = window.iter().map(|p| p.y).sum::<T>() / count;
        fixations.push(FixationPoint {
            x: cx,
            y: cy,
            timestamp_ms: Some(times[start]),
            duration_ms: Some(times[end] - times[start]),
        });
        start = end + 1;
    }
    Ok(FixationSet::new(image_id, fixations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(points: &[(f64, f64)]) -> FixationSet<f64> {
        FixationSet::new("img", points.iter().map(|&(x, y)| FixationPoint::at(x, y)).collect())
    }

    #[test]
    fn empty_set_gives_empty_map() {
        let map = build_fixation_map(&set(&[]), 4, 4).unwrap();
        assert_eq!(map.count(), 0);
    }

    #[test]
    fn nearby_points_collapse_to_one_cell() {
        let map = build_fixation_map(&set(&[(1.2, 1.9), (1.7, 1.1)]), 4, 4).unwrap();
        assert_eq!(map.count(), 1);
        assert!(map.is_fixated(1, 1));
    }

    #[test]
    fn boundary_point_floors_into_last_column() {
        let map = build_fixation_map(&set(&[(3.999, 0.0)]), 4, 4).unwrap();
        assert!(map.is_fixated(3, 0));
    }

    #[test]
    fn out_of_frame_lists_offenders() {
        match build_fixation_map(&set(&[(1.0, 1.0), (4.0, 0.0), (-0.1, 2.0)]), 4, 4) {
            Err(FixationError::OutOfFrame { points, .. }) => assert_eq!(points, vec![(4.0, 0.0), (-0.1, 2.0)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn box_containment_is_half_open() {
        let b = BoundingBox::new(10, 10, 20, 20).unwrap();
        assert_eq!(fixations_in_box(&set(&[]), &b), 0);
        assert_eq!(fixations_in_box(&set(&[(10.0, 10.0)]), &b), 1);
        assert_eq!(fixations_in_box(&set(&[(30.0, 30.0)]), &b), 0);
        assert_eq!(fixations_in_box(&set(&[(29.99, 29.99)]), &b), 1);
        let five = set(&[(0.0, 0.0), (15.0, 15.0), (29.0, 10.0), (30.0, 15.0), (50.0, 50.0)]);
        assert_eq!(fixations_in_box(&five, &b), 2);
    }

    #[test]
    fn stationary_gaze_is_one_fixation() {
        let gaze: Vec<_> = (0..20)
            .map(|k| FixationPoint::timed(320.0, 240.0, (k * 200) as f64 / 19.0))
            .collect();
        let out = detect_fixations_idt("img", &gaze, &IdtParams::default()).unwrap();
        assert_eq!(out.len(), 1);
        let f = out.points[0];
        assert_eq!((f.x, f.y), (320.0, 240.0));
        assert_eq!(f.timestamp_ms, Some(0.0));
        assert_eq!(f.duration_ms, Some(200.0));
    }

    #[test]
    fn alternating_far_points_give_no_fixation() {
        let gaze: Vec<_> = (0..30)
            .map(|k| FixationPoint::timed(if k % 2 == 0 { 0.0 } else { 500.0 }, 100.0, k as f64 * 10.0))
            .collect();
        let out = detect_fixations_idt("img", &gaze, &IdtParams::default()).unwrap();
        assert!(out.is_empty());
    }

    /// Hand-traced: A covers t = 0..150 around (100, 100), two saccade
    /// samples, B covers t = 180..330 around (700, 100). Offsets cancel so
    /// the centroids are exact.
    #[test]
    fn two_clusters_separated_by_saccade() {
        let offsets = [(-5.0, 0.0), (5.0, 0.0), (0.0, -5.0), (0.0, 5.0)];
        let mut gaze = Vec::new();
        for k in 0..16 {
            let (dx, dy) = offsets[k % 4];
            gaze.push(FixationPoint::timed(100.0 + dx, 100.0 + dy, k as f64 * 10.0));
        }
        gaze.push(FixationPoint::timed(300.0, 100.0, 160.0));
        gaze.push(FixationPoint::timed(500.0, 100.0, 170.0));
        for k in 0..16 {
            let (dx, dy) = offsets[k % 4];
            gaze.push(FixationPoint::timed(700.0 + dx, 100.0 + dy, 180.0 + k as f64 * 10.0));
        }
        let out = detect_fixations_idt("img", &gaze, &IdtParams::default()).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!((out.points[0].x, out.points[0].y), (100.0, 100.0));
        assert_eq!(out.points[0].duration_ms, Some(150.0));
        assert_eq!((out.points[1].x, out.points[1].y), (700.0, 100.0));
        assert_eq!(out.points[1].timestamp_ms, Some(180.0));
    }

    #[test]
    fn timestamps_must_increase() {
        let gaze = vec![FixationPoint::timed(0.0, 0.0, 5.0), FixationPoint::timed(0.0, 0.0, 5.0)];
        assert_eq!(
            detect_fixations_idt("i", &gaze, &IdtParams::default()),
            Err(FixationError::NonMonotonicTimestamps { index: 1 })
        );
        let untimed = vec![FixationPoint::at(0.0f64, 0.0)];
        assert_eq!(
            detect_fixations_idt("i", &untimed, &IdtParams::default()),
            Err(FixationError::MissingTimestamp { index: 0 })
        );
    }

    proptest! {
        #[test]
        fn map_cell_count_bounded_by_points(pts in proptest::collection::vec((0.0f64..8.0, 0.0f64..6.0), 0..30)) {
            let fs = set(&pts);
            let map = build_fixation_map(&fs, 8, 6).unwrap();
            let mut cells: Vec<(u64, u64)> = pts.iter().map(|&(x, y)| (x.floor() as u64, y.floor() as u64)).collect();
            cells.sort_unstable();
            cells.dedup();
            prop_assert!(map.count() <= pts.len());
            prop_assert_eq!(map.count(), cells.len());
        }

        #[test]
        fn disjoint_box_counts_sum_within_total(pts in proptest::collection::vec((0.0f64..40.0, 0.0f64..40.0), 0..40), split in 1i64..39) {
            let fs = set(&pts);
            let left = BoundingBox::new(0, 0, split, 40).unwrap();
            let right = BoundingBox::new(split, 0, 40 - split, 40).unwrap();
            let total = fixations_in_box(&fs, &left) + fixations_in_box(&fs, &right);
            prop_assert_eq!(total, pts.len());
        }

        #[test]
        fn idt_centroids_inside_sample_hull(jitter in proptest::collection::vec((-12.0f64..12.0, -12.0f64..12.0), 5..60), step in 5.0f64..40.0) {
            let gaze: Vec<_> = jitter.iter().enumerate()
                .map(|(k, &(dx, dy))| FixationPoint::timed(200.0 + dx, 150.0 + dy, k as f64 * step))
                .collect();
            let out = detect_fixations_idt("i", &gaze, &IdtParams::default()).unwrap();
            for f in &out.points {
                let t0 = f.timestamp_ms.unwrap();
                let t1 = t0 + f.duration_ms.unwrap();
                let window: Vec<_> = gaze.iter().filter(|p| p.timestamp_ms.unwrap() >= t0 && p.timestamp_ms.unwrap() <= t1).collect();
                let lo_x = window.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
                let hi_x = window.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
                let lo_y = window.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
                let hi_y = window.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(f.x >= lo_x - 1e-9 && f.x <= hi_x + 1e-9);
                prop_assert!(f.y >= lo_y - 1e-9 && f.y <= hi_y + 1e-9);
            }
        }
    }
}
