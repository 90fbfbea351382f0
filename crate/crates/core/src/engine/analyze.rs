use std::path::Path;

use log::info;

use super::config::EngineConfig;
use super::ingest::open_frames;
use crate::corpus::{analyze_video, DescriptorTable};
use crate::error::Result;

/// Analyze every frame of a raw or PPM file and write the table as CSV.
pub fn analyze_file(cfg: &EngineConfig, input: &Path, out_csv: &Path) -> Result<DescriptorTable> {
    let frames = open_frames(input, &cfg.input)?;
    let table = analyze_video(frames, &cfg.analysis)?;
    table.save(out_csv)?;
    info!(
        "{} units from {} written to {}",
        table.len(),
        input.display(),
        out_csv.display()
    );
    Ok(table)
}
