//! Horn-Schunck flow of a blob moving right, then down.

use vivo::imagecore::{Frame, Rgb};
use vivo::motion::{horn_schunck, motion_stats, FlowParams};

fn blob(cx: f64, cy: f64) -> vivo::Result<Frame> {
    Frame::from_fn(64, 64, |x, y| {
        let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        Rgb::gray(0.1 + 0.8 * (-d2 / 32.0).exp())
    })
}

fn main() -> vivo::Result<()> {
    let p = FlowParams::default();
    let a = blob(32.0, 32.0)?;
    for (label, b) in [
        ("right", blob(33.0, 32.0)?),
        ("down", blob(32.0, 33.0)?),
        ("still", a.clone()),
    ] {
        let flow = horn_schunck(&a, &b, &p)?;
        let s = motion_stats(&flow, 5.0)?;
        println!(
            "{label:>5}  |flow| {:.4}  pan ({:+.4}, {:+.4})  channels {:.3?}",
            s.global, s.pan.0, s.pan.1, s.channel_weights
        );
    }
    Ok(())
}
