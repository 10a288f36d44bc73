//! Comma-separated gaze/fixation exports with header `x,y[,timestamp_ms,duration_ms]`.
//!
//! Coordinates are image pixels. Frame bounds are not checked here; that
//! happens when fixations are bound to an image.

use std::path::Path;

use super::{read_text, FormatError};
use crate::model::{FixationPoint, FixationSet};
use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq)]
enum Column {
    X,
    Y,
    Timestamp,
    Duration,
}

impl Column {
    fn name(self) -> &'static str {
        match self {
            Column::X => "x",
            Column::Y => "y",
            Column::Timestamp => "timestamp_ms",
            Column::Duration => "duration_ms",
        }
    }
}

/// The csv reader reports the line where it started scanning for a record,
/// which may be a skipped comment or blank line; advance past those.
fn record_line(text: &str, position: Option<&csv::Position>) -> usize {
    let start = position.map_or(1, |p| p.line().max(1) as usize);
    let skipped = text
        .lines()
        .skip(start - 1)
        .take_while(|l| l.trim().is_empty() || l.starts_with('#'))
        .count();
    start + skipped
}

pub fn parse_gaze<T: Scalar>(text: &str, image_id: &str) -> Result<FixationSet<T>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| FormatError::parse(1, "header", e.to_string()))?
        .clone();
    let header_line = record_line(text, headers.position());
    let mut columns = Vec::with_capacity(headers.len());
    for name in headers.iter() {
        let col = match name {
            "x" => Column::X,
            "y" => Column::Y,
            "timestamp_ms" => Column::Timestamp,
            "duration_ms" => Column::Duration,
            other => return Err(FormatError::parse(header_line, other, "unknown column")),
        };
        if columns.contains(&col) {
            return Err(FormatError::parse(header_line, name, "duplicate column"));
        }
        columns.push(col);
    }
    for required in [Column::X, Column::Y] {
        if !columns.contains(&required) {
            return Err(FormatError::parse(
                header_line,
                required.name(),
                "required column missing",
            ));
        }
    }

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| FormatError::parse(record_line(text, e.position()), "row", e.to_string()))?;
        let line = record_line(text, record.position());
        let mut point = FixationPoint::at(T::zero(), T::zero());
        for (col, cell) in columns.iter().zip(record.iter()) {
            let optional = matches!(col, Column::Timestamp | Column::Duration);
            if cell.is_empty() && optional {
                continue;
            }
            let v = match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => {
                    return Err(FormatError::parse(
                        line,
                        col.name(),
                        format!("'{cell}' is not a finite number"),
                    ))
                }
            };
            if optional && v < 0.0 {
                return Err(FormatError::parse(line, col.name(), "must be nonnegative"));
            }
            let v = T::lit(v);
            match col {
                Column::X => point.x = v,
                Column::Y => point.y = v,
                Column::Timestamp => point.timestamp_ms = Some(v),
                Column::Duration => point.duration_ms = Some(v),
            }
        }
        points.push(point);
    }
    Ok(FixationSet::new(image_id, points))
}

pub fn load_gaze<T: Scalar>(path: &Path, image_id: &str) -> Result<FixationSet<T>, FormatError> {
    parse_gaze(&read_text(path)?, image_id).map_err(|e| e.in_file(path))
}

pub fn format_gaze<T: Scalar>(set: &FixationSet<T>) -> String {
    let timed = set
        .points
        .iter()
        .any(|p| p.timestamp_ms.is_some() || p.duration_ms.is_some());
    let opt = |v: Option<T>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut out = String::from(if timed {
        "x,y,timestamp_ms,duration_ms\n"
    } else {
        "x,y\n"
    });
    for p in &set.points {
        if timed {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.x,
                p.y,
                opt(p.timestamp_ms),
                opt(p.duration_ms)
            ));
        } else {
            out.push_str(&format!("{},{}\n", p.x, p.y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_is_empty() {
        let set = parse_gaze::<f64>("x,y\n", "img").unwrap();
        assert!(set.is_empty());
        assert_eq!(set.image_id, "img");
    }

    #[test]
    fn parses_two_points() {
        let set = parse_gaze::<f64>("x,y\n960.5,540.0\n100,200\n", "img").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!((set.points[0].x, set.points[0].y), (960.5, 540.0));
        assert_eq!((set.points[1].x, set.points[1].y), (100.0, 200.0));
    }

    #[test]
    fn optional_columns() {
        let set = parse_gaze::<f64>("x,y,timestamp_ms,duration_ms\n1,2,10,\n3,4,20,5\n", "i").unwrap();
        assert_eq!(set.points[0].timestamp_ms, Some(10.0));
        assert_eq!(set.points[0].duration_ms, None);
        assert_eq!(set.points[1].duration_ms, Some(5.0));
    }

    #[test]
    fn non_numeric_x_reports_row() {
        match parse_gaze::<f64>("x,y\n1,2\nabc,3\n", "i") {
            Err(FormatError::Parse { line, field, .. }) => assert_eq!((line, field.as_str()), (3, "x")),
            other => panic!("{other:?}"),
        }
        match parse_gaze::<f64>("x,y\n# pause\n\n1,2\n#\nabc,3\n", "i") {
            Err(FormatError::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_or_missing_columns_rejected() {
        assert!(parse_gaze::<f64>("x,z\n1,2\n", "i").is_err());
        assert!(parse_gaze::<f64>("x\n1\n", "i").is_err());
        match parse_gaze::<f64>("# exported\nx,y,pupil\n1,2,3\n", "i") {
            Err(FormatError::Parse { line, field, .. }) => assert_eq!((line, field.as_str()), (2, "pupil")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_row_rejected() {
        assert!(matches!(
            parse_gaze::<f64>("x,y\n1,2,3\n", "i"),
            Err(FormatError::Parse { .. })
        ));
    }

    #[test]
    fn format_round_trip() {
        let set = parse_gaze::<f64>("x,y,timestamp_ms,duration_ms\n1.5,2,10,\n3,4,20,5\n", "i").unwrap();
        assert_eq!(parse_gaze::<f64>(&format_gaze(&set), "i").unwrap(), set);
    }
}
