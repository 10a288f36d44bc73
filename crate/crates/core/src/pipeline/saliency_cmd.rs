use std::path::PathBuf;

use log::{info, warn};

use super::{ensure_dir, par_map_ordered, saliency_for_entry, ErrorEntry, PipelineError, RunConfig};
use crate::io::{self, load_manifest};

#[derive(Debug, Clone, Default)]
pub struct SaliencyRun {
    /// Written `.salf` files in manifest order.
    pub maps: Vec<PathBuf>,
    pub errors: Vec<ErrorEntry>,
}

/// Writes `<out>/maps/<image_id>.salf` (and a `.pgm` preview when enabled)
/// for every manifest entry.
pub fn cmd_saliency(config: &RunConfig) -> Result<SaliencyRun, PipelineError> {
    config.validate()?;
    let manifest = load_manifest(&config.manifest)?;
    let maps_dir = config.out_dir.join("maps");
    ensure_dir(&maps_dir)?;
    info!("computing {} saliency maps with {}", manifest.len(), config.method.id());

    let results = par_map_ordered(config.workers, &manifest.entries, |entry| {
        let (_, map) = saliency_for_entry(entry, config)?;
        let path = maps_dir.join(format!("{}.salf", entry.image_id));
        io::write_map(&map, &path).map_err(|e| e.to_string())?;
        if config.preview {
            io::write_map(&map, &maps_dir.join(format!("{}.pgm", entry.image_id))).map_err(|e| e.to_string())?;
        }
        Ok::<_, String>(path)
    })?;

    let mut run = SaliencyRun::default();
    for (entry, result) in manifest.entries.iter().zip(results) {
        match result {
            Ok(path) => run.maps.push(path),
            Err(message) => {
                warn!("{}: {message}", entry.image_id);
                run.errors.push(ErrorEntry {
                    image_id: Some(entry.image_id.clone()),
                    message,
                });
            }
        }
    }
    Ok(run)
}
