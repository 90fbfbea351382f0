//! Time the full per-frame pipeline on a synthetic 320x240 stream.
//!
//! cargo run --release --example throughput [frames]

use std::time::Instant;

use vivo::engine::{LatencyHistogram, Pipeline};
use vivo::imagecore::{Frame, Rgb};
use vivo::mapping::default_mapping;
use vivo::AnalysisParams;

fn main() -> vivo::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(300);
    let mapping = default_mapping().mapping;
    let mut pipeline = Pipeline::new(AnalysisParams::default(), true)?;
    let mut hist = LatencyHistogram::default();
    let start = Instant::now();
    for i in 0..n {
        let t = i as f64 * 0.1;
        let f = Frame::from_fn(320, 240, |x, y| {
            let (x, y) = (x as f64, y as f64);
            Rgb::new(
                0.5 + 0.5 * ((x + 3.0 * t) / 9.0).sin(),
                0.5 + 0.5 * ((y - 2.0 * t) / 13.0).cos(),
                0.5 + 0.5 * ((x + y) / 21.0 + t).sin(),
            )
        })?;
        let t0 = Instant::now();
        pipeline.process(f, &mapping)?;
        hist.record(t0.elapsed());
    }
    let secs = start.elapsed().as_secs_f64();
    println!(
        "{n} frames  mean {:.2} ms  p95 {:.2} ms  max {:.2} ms  throughput {:.1} fps (incl. frame synthesis)",
        hist.mean_ms(),
        hist.quantile_ms(0.95),
        hist.max_ms(),
        n as f64 / secs
    );
    Ok(())
}
