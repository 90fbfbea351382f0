//! Spectral detail per frequency band for gratings of rising frequency.

use vivo::detail::{detail, Band};
use vivo::imagecore::{Frame, Rgb};

fn main() -> vivo::Result<()> {
    let bands = Band::default_set();
    println!(
        "bands: {}",
        bands
            .iter()
            .map(|b| format!("{:.2}+{:.2}", b.offset, b.width))
            .collect::<Vec<_>>()
            .join("  ")
    );
    for period in [32.0, 8.0, 3.0] {
        let f = Frame::from_fn(128, 96, |x, _| {
            Rgb::gray(0.5 + 0.5 * (std::f64::consts::TAU * x as f64 / period).sin())
        })?;
        let d = detail(&f, &bands, 20.0)?;
        let per: Vec<String> = d.per_band.iter().map(|v| format!("{v:.3}")).collect();
        println!(
            "period {period:>4} px  overall {:.3}  per band [{}]",
            d.overall,
            per.join(", ")
        );
    }
    Ok(())
}
