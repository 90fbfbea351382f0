//! Warm/cold balance of a few solid colors and a split frame.

use vivo::imagecore::{Frame, Rgb};
use vivo::warmness::{warmth, QuantizationParams};

fn main() -> vivo::Result<()> {
    let q = QuantizationParams::default();
    let swatches = [
        ("red", Rgb::new(1.0, 0.0, 0.0)),
        ("orange", Rgb::new(1.0, 0.55, 0.0)),
        ("green", Rgb::new(0.0, 0.8, 0.2)),
        ("blue", Rgb::new(0.1, 0.2, 1.0)),
        ("pale blue", Rgb::new(0.7, 0.75, 0.8)),
        ("gray", Rgb::gray(0.5)),
    ];
    for (name, c) in swatches {
        println!("{name:>10}  {:+.3}", warmth(&Frame::uniform(32, 32, c)?, &q)?);
    }
    // half red, half blue cancels out
    let split = Frame::from_fn(64, 32, |x, _| {
        if x < 32 {
            Rgb::new(1.0, 0.0, 0.0)
        } else {
            Rgb::new(0.0, 0.0, 1.0)
        }
    })?;
    println!("{:>10}  {:+.3}", "red|blue", warmth(&split, &q)?);
    Ok(())
}
