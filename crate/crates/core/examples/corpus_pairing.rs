//! Describe two short clips and pair their units from one cursor.

use vivo::corpus::{analyze_video, pair, PairingMode, Query};
use vivo::imagecore::{Frame, Rgb};
use vivo::AnalysisParams;

fn clip(hue_shift: f64, n: u64) -> impl Iterator<Item = vivo::Result<Frame>> {
    (0..n).map(move |i| {
        let t = i as f64 / n as f64;
        Frame::from_fn(48, 36, |x, y| {
            let stripe = ((x + y) as f64 * (0.2 + t)).sin() * 0.5 + 0.5;
            Rgb::new(t * stripe, hue_shift, 1.0 - t)
        })
        .map(|f| f.with_timestamp(i * 40))
    })
}

fn main() -> vivo::Result<()> {
    let params = AnalysisParams::default();
    let a = analyze_video(clip(0.2, 12), &params)?;
    let b = analyze_video(clip(0.7, 12), &params)?;
    println!("corpus A: {} units, columns {:?}", a.len(), a.columns());

    let cursor = Query::new([("warmth", 0.0), ("detail", 0.3)]);
    for mode in [PairingMode::PreSelection, PairingMode::PostSelection] {
        let (ua, ub) = pair(&a, &b, &cursor, mode)?;
        println!("{mode:?}: A unit {ua}, B unit {ub}");
    }
    let mut csv = Vec::new();
    a.write_csv(&mut csv)?;
    print!(
        "{}",
        String::from_utf8_lossy(&csv)
            .lines()
            .take(3)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!();
    Ok(())
}
