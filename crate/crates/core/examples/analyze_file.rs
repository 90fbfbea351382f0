//! Write a short raw rgb24 clip to disk and analyze it into a CSV table.
//!
//! cargo run --example analyze_file [out.csv]

use std::fs::File;
use std::io::BufWriter;

use vivo::engine::{analyze_file, write_rgb24, EngineConfig};
use vivo::imagecore::{Frame, Rgb};

fn main() -> vivo::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "descriptors.csv".into());
    let dir = std::env::temp_dir();
    let input = dir.join("vivo_example.rgb");

    let mut cfg = EngineConfig::default();
    cfg.input.width = 80;
    cfg.input.height = 60;
    cfg.input.fps = 25.0;
    let mut w = BufWriter::new(File::create(&input)?);
    for i in 0..25 {
        let f = Frame::from_fn(80, 60, |x, y| {
            let d = ((x as f64 - 40.0 - i as f64).powi(2) + (y as f64 - 30.0).powi(2)).sqrt();
            Rgb::new(0.5 + 0.5 * (d / 4.0).sin(), 0.3, i as f64 / 24.0)
        })?;
        write_rgb24(&mut w, &f)?;
    }
    drop(w);

    let table = analyze_file(&cfg, &input, out.as_ref())?;
    println!("{} rows written to {out}", table.len());
    Ok(())
}
