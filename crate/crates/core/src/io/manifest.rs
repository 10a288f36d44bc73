//! Dataset manifests: one `key=value` record per line.
//!
//! ```text
//! # id, split, image and boxes are required; dets and gaze are optional
//! id=img000 split=train image=images/img000.ppm boxes=boxes/img000.boxes gaze=gaze/img000.gaze
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::{read_text, FormatError};
use crate::model::{DatasetManifest, ManifestEntry, Split};

const KEYS: [&str; 6] = ["id", "split", "image", "boxes", "dets", "gaze"];

fn valid_image_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.starts_with('.')
}

/// Parses manifest text without touching the filesystem.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<DatasetManifest, FormatError> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut fields: [Option<&str>; 6] = Default::default();
        for token in raw.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| FormatError::parse(line, token, "expected key=value"))?;
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| FormatError::parse(line, key, "unknown key"))?;
            if value.is_empty() {
                return Err(FormatError::parse(line, key, "empty value"));
            }
            if fields[slot].replace(value).is_some() {
                return Err(FormatError::parse(line, key, "key given twice"));
            }
        }
        let required = |i: usize| fields[i].ok_or_else(|| FormatError::parse(line, KEYS[i], "required key missing"));
        let image_id = required(0)?;
        if !valid_image_id(image_id) {
            return Err(FormatError::parse(
                line,
                "id",
                format!("'{image_id}' must use only letters, digits, '-', '_' or '.'"),
            ));
        }
        let split: Split = required(1)?
            .parse()
            .map_err(|m: String| FormatError::parse(line, "split", m))?;
        let resolve = |p: &str| base_dir.join(p);
        let entry = ManifestEntry {
            image_id: image_id.to_string(),
            image_path: resolve(required(2)?),
            annotation_path: resolve(required(3)?),
            detection_path: fields[4].map(resolve),
            gaze_path: fields[5].map(resolve),
            split,
        };
        if !seen.insert(entry.image_id.clone()) {
            return Err(FormatError::DuplicateImageId {
                line,
                image_id: entry.image_id,
            });
        }
        entries.push((line, entry));
    }
    for (line, entry) in &entries {
        let paths = [
            Some(&entry.image_path),
            Some(&entry.annotation_path),
            entry.detection_path.as_ref(),
            entry.gaze_path.as_ref(),
        ];
        if let Some(missing) = paths.into_iter().flatten().find(|p| !p.is_file()) {
            return Err(FormatError::MissingFile {
                line: *line,
                path: missing.clone(),
            });
        }
    }
    Ok(DatasetManifest {
        entries: entries.into_iter().map(|(_, e)| e).collect(),
    })
}

/// Loads and validates a manifest; every referenced file must exist.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest, FormatError> {
    let text = read_text(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&text, &base).map_err(|e| e.in_file(path))
}

fn relative(path: &Path, base: &Path) -> PathBuf {
    path.strip_prefix(base)
        .map(Path::to_path_buf)
        .unwrap_or_else(|_| path.to_path_buf())
}

/// Serializes a manifest, writing paths relative to `base_dir` where possible.
pub fn format_manifest(manifest: &DatasetManifest, base_dir: &Path) -> String {
    let mut out = String::from("# billboard-salience manifest\n");
    for e in &manifest.entries {
        out.push_str(&format!(
            "id={} split={} image={} boxes={}",
            e.image_id,
            e.split.as_str(),
            relative(&e.image_path, base_dir).display(),
            relative(&e.annotation_path, base_dir).display()
        ));
        if let Some(p) = &e.detection_path {
            out.push_str(&format!(" dets={}", relative(p, base_dir).display()));
        }
        if let Some(p) = &e.gaze_path {
            out.push_str(&format!(" gaze={}", relative(p, base_dir).display()));
        }
        out.push('\n');
    }
    out
}
