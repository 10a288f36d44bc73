//! Plain-text region files: one region per line, whitespace separated.
//!
//! Annotations (`.boxes`) hold `x y w h`; detections (`.dets`) append a
//! confidence. Blank lines and `#` comments are skipped. Sub-pixel values
//! are rounded half-up.

use std::path::Path;

use super::{read_text, FormatError};
use crate::model::{BoundingBox, Detection};
use crate::scalar::Scalar;

const BOX_FIELDS: [&str; 4] = ["x", "y", "w", "h"];

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        (!line.is_empty() && !line.starts_with('#')).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

fn parse_real(line: usize, field: &str, token: &str) -> Result<f64, FormatError> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(FormatError::parse(
            line,
            field,
            format!("'{token}' is not a finite number"),
        )),
    }
}

fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

fn parse_box(line: usize, fields: &[&str], image_id: &str) -> Result<BoundingBox, FormatError> {
    let mut ints = [0i64; 4];
    for ((slot, name), token) in ints.iter_mut().zip(BOX_FIELDS).zip(fields) {
        *slot = round_half_up(parse_real(line, name, token)?);
    }
    let [x, y, w, h] = ints;
    BoundingBox::new(x, y, w, h)
        .map(|b| b.with_image_id(image_id))
        .map_err(|e| FormatError::InvalidBox {
            line,
            message: e.to_string(),
        })
}

fn expect_fields(line: usize, fields: &[&str], n: usize) -> Result<(), FormatError> {
    if fields.len() != n {
        return Err(FormatError::parse(
            line,
            "row",
            format!("expected {n} fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

pub fn parse_annotations(text: &str, image_id: &str) -> Result<Vec<BoundingBox>, FormatError> {
    data_lines(text)
        .map(|(line, fields)| {
            expect_fields(line, &fields, 4)?;
            parse_box(line, &fields, image_id)
        })
        .collect()
}

pub fn parse_detections<T: Scalar>(text: &str, image_id: &str) -> Result<Vec<Detection<T>>, FormatError> {
    data_lines(text)
        .map(|(line, fields)| {
            expect_fields(line, &fields, 5)?;
            let bbox = parse_box(line, &fields, image_id)?;
            let confidence = parse_real(line, "confidence", fields[4])?;
            if !(0.0..=1.0).contains(&confidence) {
                return Err(FormatError::ConfidenceOutOfRange {
                    line,
                    value: confidence,
                });
            }
            Ok(Detection::new(bbox, T::lit(confidence))?)
        })
        .collect()
}

pub fn load_annotations(path: &Path, image_id: &str) -> Result<Vec<BoundingBox>, FormatError> {
    parse_annotations(&read_text(path)?, image_id).map_err(|e| e.in_file(path))
}

pub fn load_detections<T: Scalar>(path: &Path, image_id: &str) -> Result<Vec<Detection<T>>, FormatError> {
    parse_detections(&read_text(path)?, image_id).map_err(|e| e.in_file(path))
}

pub fn format_annotations(boxes: &[BoundingBox]) -> String {
    boxes
        .iter()
        .map(|b| format!("{} {} {} {}\n", b.x(), b.y(), b.w(), b.h()))
        .collect()
}

pub fn format_detections<T: Scalar>(dets: &[Detection<T>]) -> String {
    dets.iter()
        .map(|d| {
            let b = d.bbox();
            format!("{} {} {} {} {}\n", b.x(), b.y(), b.w(), b.h(), d.confidence())
        })
        .collect()
}
