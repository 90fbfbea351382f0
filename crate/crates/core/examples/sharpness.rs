//! Sobel sharpness of a soft ramp, a hard edge and noise.

use vivo::imagecore::{Frame, Rgb};
use vivo::sharpness::sharpness;

fn main() -> vivo::Result<()> {
    let ramp = Frame::from_fn(64, 64, |x, _| Rgb::gray(x as f64 / 63.0))?;
    let edge = Frame::from_fn(64, 64, |x, _| Rgb::gray(if x < 32 { 0.0 } else { 1.0 }))?;
    let mut seed = 7u32;
    let noise = Frame::from_fn(64, 64, |_, _| {
        seed = seed.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
        Rgb::gray((seed >> 8) as f64 / (1u32 << 24) as f64)
    })?;
    for (name, f) in [("ramp", &ramp), ("edge", &edge), ("noise", &noise)] {
        println!(
            "{name:>6}  sharp {:.4}  blurred {:.4}",
            sharpness(f)?,
            sharpness(&f.box_blur(2))?
        );
    }
    Ok(())
}
