//! Detection metrics (IoU, all-point-interpolated AP) and fixation-based
//! saliency metrics (AUC-Judd, NSS).

use std::cmp::Ordering;

use thiserror::Error;

use crate::fixation::BinaryFixationMap;
use crate::model::{BoundingBox, Detection, SaliencyMap};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("average precision is undefined without ground-truth boxes")]
    EmptyGroundTruth,
    #[error("IoU threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("fixation map has no fixated cells")]
    NoFixations,
    #[error("saliency map is {map:?} but fixation map is {fixations:?}")]
    DimensionMismatch {
        map: (usize, usize),
        fixations: (usize, usize),
    },
    #[error("saliency map has zero variance")]
    ZeroVariance,
}

pub fn iou<T: Scalar>(a: &BoundingBox, b: &BoundingBox) -> T {
    let inter = a.intersection_area(b);
    if inter == 0 {
        return T::zero();
    }
    let union = a.area() + b.area() - inter;
    T::from_i64(inter).unwrap() / T::from_i64(union).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint<T> {
    pub recall: T,
    pub precision: T,
}

/// Greedy matching by descending confidence (stable for ties). Each
/// detection takes the unmatched ground-truth box of the same image with
/// the highest IoU at or above `iou_threshold`; IoU ties go to the earlier
/// ground-truth box. Returns the TP flag of each detection in ranked order.
fn match_detections<T: Scalar>(
    detections: &[Detection<T>],
    ground_truth: &[BoundingBox],
    iou_threshold: T,
) -> Vec<bool> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        detections[b]
            .confidence()
            .partial_cmp(&detections[a].confidence())
            .unwrap_or(Ordering::Equal)
    });
    let mut taken = vec![false; ground_truth.len()];
    order
        .into_iter()
        .map(|di| {
            let det = &detections[di];
            let mut best: Option<(usize, T)> = None;
            for (gi, gt) in ground_truth.iter().enumerate() {
                if taken[gi] || gt.image_id() != det.image_id() {
                    continue;
                }
                let overlap = iou::<T>(det.bbox(), gt);
                if overlap >= iou_threshold && best.is_none_or(|(_, b)| overlap > b) {
                    best = Some((gi, overlap));
                }
            }
            if let Some((gi, _)) = best {
                taken[gi] = true;
            }
            best.is_some()
        })
        .collect()
}

fn check_ap_inputs<T: Scalar>(ground_truth: &[BoundingBox], iou_threshold: T) -> Result<(), MetricError> {
    if ground_truth.is_empty() {
        return Err(MetricError::EmptyGroundTruth);
    }
    if !(iou_threshold > T::zero() && iou_threshold <= T::one()) {
        return Err(MetricError::InvalidThreshold(iou_threshold.to_f64_lossy()));
    }
    Ok(())
}

/// Precision/recall after each ranked detection.
pub fn pr_curve<T: Scalar>(
    detections: &[Detection<T>],
    ground_truth: &[BoundingBox],
    iou_threshold: T,
) -> Result<Vec<PrPoint<T>>, MetricError> {
    check_ap_inputs(ground_truth, iou_threshold)?;
    let n_gt = T::from_usize_lossy(ground_truth.len());
    let mut tp = 0usize;
    Ok(match_detections(detections, ground_truth, iou_threshold)
        .into_iter()
        .enumerate()
        .map(|(k, hit)| {
            tp += hit as usize;
            PrPoint {
                recall: T::from_usize_lossy(tp) / n_gt,
                precision: T::from_usize_lossy(tp) / T::from_usize_lossy(k + 1),
            }
        })
        .collect())
}

/// Area under the precision envelope: precision at recall `r` is the
/// maximum precision at any recall `≥ r`, summed over all recall steps.
pub fn average_precision<T: Scalar>(
    detections: &[Detection<T>],
    ground_truth: &[BoundingBox],
    iou_threshold: T,
) -> Result<T, MetricError> {
    let curve = pr_curve(detections, ground_truth, iou_threshold)?;
    let mut envelope = vec![T::zero(); curve.len()];
    let mut running = T::zero();
    for (k, p) in curve.iter().enumerate().rev() {
        running = running.max(p.precision);
        envelope[k] = running;
    }
    let mut ap = T::zero();
    let mut prev_recall = T::zero();
    for (p, env) in curve.iter().zip(envelope) {
        if p.recall > prev_recall {
            ap += (p.recall - prev_recall) * env;
            prev_recall = p.recall;
        }
    }
    Ok(ap)
}

/// IoU thresholds 0.50, 0.55, …, 0.95, each computed as `k / 100` so that
/// exact rational IoUs compare as expected.
pub fn coco_iou_thresholds<T: Scalar>() -> [T; 10] {
    std::array::from_fn(|i| T::from_usize_lossy(50 + 5 * i) / T::lit(100.0))
}

/// `(AP@0.5, mean AP over IoU 0.50:0.05:0.95)`.
pub fn ap_range<T: Scalar>(detections: &[Detection<T>], ground_truth: &[BoundingBox]) -> Result<(T, T), MetricError> {
    let per_threshold = coco_iou_thresholds::<T>()
        .into_iter()
        .map(|t| average_precision(detections, ground_truth, t))
        .collect::<Result<Vec<T>, _>>()?;
    let mean = per_threshold.iter().copied().sum::<T>() / T::lit(10.0);
    Ok((per_threshold[0], mean))
}

fn check_map_and_fixations<T: Scalar>(
    map: &SaliencyMap<T>,
    fixmap: &BinaryFixationMap,
) -> Result<Vec<usize>, MetricError> {
    if (map.width(), map.height()) != (fixmap.width(), fixmap.height()) {
        return Err(MetricError::DimensionMismatch {
            map: (map.width(), map.height()),
            fixations: (fixmap.width(), fixmap.height()),
        });
    }
    let fixated: Vec<usize> = fixmap.fixated_indices().collect();
    if fixated.is_empty() {
        return Err(MetricError::NoFixations);
    }
    Ok(fixated)
}

fn descending<T: Scalar>(a: &T, b: &T) -> Ordering {
    b.partial_cmp(a).unwrap_or(Ordering::Equal)
}

/// AUC-Judd: thresholds are the distinct saliency values at fixated cells.
/// TPR is the share of fixated cells at or above the threshold, FPR the
/// share of all cells at or above it. The curve is anchored at (0,0) and
/// (1,1) and integrated with the trapezoid rule. Depends only on the
/// ordering of values, so the map need not be normalized.
pub fn auc_judd<T: Scalar>(map: &SaliencyMap<T>, fixmap: &BinaryFixationMap) -> Result<T, MetricError> {
    let fixated = check_map_and_fixations(map, fixmap)?;
    let mut all: Vec<T> = map.values().to_vec();
    all.sort_by(descending);
    let mut at_fix: Vec<T> = fixated.iter().map(|&i| map.values()[i]).collect();
    at_fix.sort_by(descending);

    let n_all = T::from_usize_lossy(all.len());
    let n_fix = T::from_usize_lossy(at_fix.len());
    let (mut fix_above, mut all_above) = (0usize, 0usize);
    let (mut prev_fpr, mut prev_tpr) = (T::zero(), T::zero());
    let mut area = T::zero();
    let half = T::lit(0.5);
    let mut k = 0;
    while k < at_fix.len() {
        let t = at_fix[k];
        while fix_above < at_fix.len() && at_fix[fix_above] >= t {
            fix_above += 1;
        }
        while all_above < all.len() && all[all_above] >= t {
            all_above += 1;
        }
        let tpr = T::from_usize_lossy(fix_above) / n_fix;
        let fpr = T::from_usize_lossy(all_above) / n_all;
        area += (fpr - prev_fpr) * (tpr + prev_tpr) * half;
        (prev_fpr, prev_tpr) = (fpr, tpr);
        k = fix_above;
    }
    area += (T::one() - prev_fpr) * (T::one() + prev_tpr) * half;
    Ok(area)
}

/// Normalized scanpath saliency: mean of the standardized map (population
/// standard deviation) over fixated cells.
pub fn nss<T: Scalar>(map: &SaliencyMap<T>, fixmap: &BinaryFixationMap) -> Result<T, MetricError> {
    let fixated = check_map_and_fixations(map, fixmap)?;
    let n = T::from_usize_lossy(map.len());
    let mean = map.values().iter().copied().sum::<T>() / n;
    let var = map.values().iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    let std = var.sqrt();
    if std <= T::zero() {
        return Err(MetricError::ZeroVariance);
    }
    let total: T = fixated.iter().map(|&i| (map.values()[i] - mean) / std).sum();
    Ok(total / T::from_usize_lossy(fixated.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x: i64, y: i64, w: i64, h: i64) -> BoundingBox {
        BoundingBox::new(x, y, w, h).unwrap().with_image_id("img")
    }

    fn det(b: BoundingBox, c: f64) -> Detection<f64> {
        Detection::new(b, c).unwrap()
    }

    fn fixmap(w: usize, h: usize, cells: &[usize]) -> BinaryFixationMap {
        let mut m = BinaryFixationMap::empty(w, h);
        for &i in cells {
            m.set(i % w, i / w);
        }
        m
    }

    #[test]
    fn iou_cases() {
        assert_eq!(iou::<f64>(&bx(0, 0, 10, 10), &bx(0, 0, 10, 10)), 1.0);
        assert_eq!(iou::<f64>(&bx(0, 0, 10, 10), &bx(10, 0, 10, 10)), 0.0);
        assert!((iou::<f64>(&bx(0, 0, 10, 10), &bx(5, 0, 10, 10)) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ap_perfect_detector() {
        let gt = vec![bx(0, 0, 10, 10), bx(20, 20, 5, 5)];
        let dets = vec![det(gt[0].clone(), 0.9), det(gt[1].clone(), 0.8)];
        assert_eq!(average_precision(&dets, &gt, 0.5).unwrap(), 1.0);
        assert_eq!(ap_range(&dets, &gt).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn ap_all_false_positives() {
        let gt = vec![bx(0, 0, 10, 10)];
        let dets = vec![det(bx(50, 50, 10, 10), 0.9)];
        assert_eq!(average_precision(&dets, &gt, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn ap_tp_fp_tp_is_five_sixths() {
        let gt = vec![bx(0, 0, 10, 10), bx(30, 0, 10, 10)];
        let dets = vec![
            det(bx(0, 0, 10, 10), 0.9),
            det(bx(60, 0, 10, 10), 0.8),
            det(bx(30, 0, 10, 10), 0.7),
        ];
        let ap = average_precision(&dets, &gt, 0.5).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn ap_range_single_detection_at_iou_point_six() {
        // 6x10 inside 10x10: IoU = 60 / 100.
        let gt = vec![bx(0, 0, 10, 10)];
        let dets = vec![det(bx(0, 0, 6, 10), 0.5)];
        let (ap50, ap50_95) = ap_range(&dets, &gt).unwrap();
        assert_eq!(ap50, 1.0);
        assert!((ap50_95 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn ap_without_detections_is_zero_and_without_gt_is_error() {
        let gt = vec![bx(0, 0, 10, 10)];
        assert_eq!(ap_range::<f64>(&[], &gt).unwrap(), (0.0, 0.0));
        assert_eq!(
            average_precision::<f64>(&[], &[], 0.5),
            Err(MetricError::EmptyGroundTruth)
        );
        assert!(matches!(
            average_precision::<f64>(&[], &gt, 0.0),
            Err(MetricError::InvalidThreshold(_))
        ));
    }

    #[test]
    fn matching_respects_image_ids() {
        let gt = vec![bx(0, 0, 10, 10)];
        let other = BoundingBox::new(0, 0, 10, 10).unwrap().with_image_id("other");
        assert_eq!(average_precision(&[det(other, 0.9)], &gt, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn duplicate_detection_counts_as_false_positive() {
        let gt = vec![bx(0, 0, 10, 10)];
        let dets = vec![det(bx(0, 0, 10, 10), 0.9), det(bx(0, 0, 10, 10), 0.8)];
        let curve = pr_curve(&dets, &gt, 0.5).unwrap();
        assert_eq!(
            curve[1],
            PrPoint {
                recall: 1.0,
                precision: 0.5
            }
        );
        assert_eq!(average_precision(&dets, &gt, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn thresholds_are_exact_hundredths() {
        let t = coco_iou_thresholds::<f64>();
        assert_eq!(t[0], 0.5);
        assert_eq!(t[2], 0.6);
        assert_eq!(t[9], 0.95);
    }

    #[test]
    fn auc_constant_map_is_chance() {
        let map = SaliencyMap::filled(4, 4, 0.0f64).unwrap();
        assert_eq!(auc_judd(&map, &fixmap(4, 4, &[0, 5, 9])).unwrap(), 0.5);
    }

    #[test]
    fn auc_binary_map_closed_form() {
        // k = 2 fixated ones among N = 16.
        let mut values = vec![0.0f64; 16];
        values[3] = 1.0;
        values[7] = 1.0;
        let map = SaliencyMap::new(4, 4, values).unwrap();
        let auc = auc_judd(&map, &fixmap(4, 4, &[3, 7])).unwrap();
        assert!((auc - (1.0 - 2.0 / 32.0)).abs() < 1e-15);
    }

    #[test]
    fn auc_fixations_on_lowest_cells_below_chance() {
        let map = SaliencyMap::new(4, 4, (0..16).map(|v| v as f64).collect()).unwrap();
        assert!(auc_judd(&map, &fixmap(4, 4, &[0, 1, 2])).unwrap() < 0.5);
    }

    #[test]
    fn auc_errors() {
        let map = SaliencyMap::filled(4, 4, 0.0f64).unwrap();
        assert_eq!(auc_judd(&map, &fixmap(4, 4, &[])), Err(MetricError::NoFixations));
        assert!(matches!(
            auc_judd(&map, &fixmap(3, 4, &[0])),
            Err(MetricError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nss_two_by_two_example() {
        let map = SaliencyMap::new(2, 2, vec![0.0f64, 0.0, 0.0, 1.0]).unwrap();
        let v = nss(&map, &fixmap(2, 2, &[3])).unwrap();
        assert!((v - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nss_one_std_above_mean() {
        // Values -1, 1 (mean 0, std 1); fixate the +1 cell.
        let map = SaliencyMap::new(2, 1, vec![-1.0f64, 1.0]).unwrap();
        assert!((nss(&map, &fixmap(2, 1, &[1])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nss_full_coverage_is_zero_and_constant_is_error() {
        let map = SaliencyMap::new(2, 2, vec![0.1f64, 0.5, 0.2, 0.9]).unwrap();
        assert!(nss(&map, &fixmap(2, 2, &[0, 1, 2, 3])).unwrap().abs() < 1e-12);
        let flat = SaliencyMap::filled(2, 2, 0.3f64).unwrap();
        assert_eq!(nss(&flat, &fixmap(2, 2, &[0])), Err(MetricError::ZeroVariance));
    }

    #[test]
    fn f32_metrics_agree_with_f64() {
        let values: Vec<f64> = (0..64).map(|i| ((i * 37) % 64) as f64 / 63.0).collect();
        let m64 = SaliencyMap::new(8, 8, values.clone()).unwrap();
        let m32 = SaliencyMap::new(8, 8, values.iter().map(|&v| v as f32).collect()).unwrap();
        let fm = fixmap(8, 8, &[1, 9, 20, 33, 60]);
        assert!((auc_judd(&m64, &fm).unwrap() - auc_judd(&m32, &fm).unwrap() as f64).abs() < 1e-6);
        assert!((nss(&m64, &fm).unwrap() - nss(&m32, &fm).unwrap() as f64).abs() < 1e-5);
    }
}
