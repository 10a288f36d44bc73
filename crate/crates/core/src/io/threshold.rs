//! Persisted significance thresholds, one `key=value` pair per line.

use std::path::Path;

use super::{read_text, write_bytes, FormatError};
use crate::significance::SignificanceThreshold;

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRecord {
    /// Saliency method the threshold was calibrated for.
    pub method: String,
    pub threshold: SignificanceThreshold<f64>,
}

pub fn format_threshold(record: &ThresholdRecord) -> String {
    let t = &record.threshold;
    format!(
        "# billboard-salience significance threshold\nmethod={}\nvalue={}\nn_regions={}\nsource={}\n",
        record.method,
        t.value(),
        t.n_regions(),
        t.source()
    )
}

pub fn parse_threshold(text: &str) -> Result<ThresholdRecord, FormatError> {
    let mut method = None;
    let mut value = None;
    let mut n_regions = None;
    let mut source = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let (key, val) = raw
            .split_once('=')
            .ok_or_else(|| FormatError::parse(line, raw, "expected key=value"))?;
        let (key, val) = (key.trim(), val.trim());
        let duplicate = match key {
            "method" => method.replace(val.to_string()).is_some(),
            "source" => source.replace(val.to_string()).is_some(),
            "value" => {
                let v: f64 = val
                    .parse()
                    .map_err(|_| FormatError::parse(line, key, format!("'{val}' is not a number")))?;
                value.replace((line, v)).is_some()
            }
            "n_regions" => {
                let n: usize = val
                    .parse()
                    .map_err(|_| FormatError::parse(line, key, format!("'{val}' is not a count")))?;
                n_regions.replace(n).is_some()
            }
            other => return Err(FormatError::parse(line, other, "unknown key")),
        };
        if duplicate {
            return Err(FormatError::parse(line, key, "key given twice"));
        }
    }
    let missing = |k: &str| FormatError::parse(last_line, k, "required key missing");
    let (value_line, value) = value.ok_or_else(|| missing("value"))?;
    let threshold = SignificanceThreshold::new(
        value,
        n_regions.ok_or_else(|| missing("n_regions"))?,
        source.ok_or_else(|| missing("source"))?,
    )
    .map_err(|e| FormatError::parse(value_line, "value", e.to_string()))?;
    Ok(ThresholdRecord {
        method: method.ok_or_else(|| missing("method"))?,
        threshold,
    })
}

pub fn write_threshold(record: &ThresholdRecord, path: &Path) -> Result<(), FormatError> {
    write_bytes(path, format_threshold(record).as_bytes())
}

pub fn read_threshold(path: &Path) -> Result<ThresholdRecord, FormatError> {
    parse_threshold(&read_text(path)?).map_err(|e| e.in_file(path))
}
