//! Sobel edge energy as a blur-to-sharp factor.

use crate::error::{Error, Result};
use crate::imagecore::{Frame, Plane};

/// Per-channel clipped Sobel gradient magnitude (R, G, B).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub planes: [Plane; 3],
}

impl EdgeMap {
    pub fn channel_means(&self) -> [f64; 3] {
        [self.planes[0].mean(), self.planes[1].mean(), self.planes[2].mean()]
    }
}

const MIN_SIDE: usize = 3;

fn check_size(f: &Frame) -> Result<()> {
    if f.width() < MIN_SIDE || f.height() < MIN_SIDE {
        return Err(Error::FrameTooSmall {
            width: f.width(),
            height: f.height(),
            min: MIN_SIDE,
        });
    }
    Ok(())
}

/// `min(1, |∇|)` of one plane using 3x3 Sobel kernels, edges replicated.
pub fn sobel_plane(p: &Plane) -> Plane {
    let (w, h) = (p.width, p.height);
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        let (r0, r1, r2) = (&p.data[ym * w..][..w], &p.data[y * w..][..w], &p.data[yp * w..][..w]);
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            let gx = (r0[xp] - r0[xm]) + 2.0 * (r1[xp] - r1[xm]) + (r2[xp] - r2[xm]);
            let gy = (r2[xm] + 2.0 * r2[x] + r2[xp]) - (r0[xm] + 2.0 * r0[x] + r0[xp]);
            out.data[y * w + x] = (gx * gx + gy * gy).sqrt().min(1.0);
        }
    }
    out
}

pub fn sobel_magnitude(f: &Frame) -> Result<EdgeMap> {
    check_size(f)?;
    Ok(EdgeMap {
        planes: [0, 1, 2].map(|c| sobel_plane(&f.channel_plane(c))),
    })
}

/// Row-major sum of `min(1, |∇|)` over a plane read through `at`, without
/// materializing it. Same arithmetic and order as [`sobel_plane`] followed
/// by a mean.
fn sobel_sum(w: usize, h: usize, at: impl Fn(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    for y in 0..h {
        let (o0, o1, o2) = (y.saturating_sub(1) * w, y * w, (y + 1).min(h - 1) * w);
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            let gx = (at(o0 + xp) - at(o0 + xm)) + 2.0 * (at(o1 + xp) - at(o1 + xm)) + (at(o2 + xp) - at(o2 + xm));
            let gy = (at(o2 + xm) + 2.0 * at(o2 + x) + at(o2 + xp)) - (at(o0 + xm) + 2.0 * at(o0 + x) + at(o0 + xp));
            sum += (gx * gx + gy * gy).sqrt().min(1.0);
        }
    }
    sum
}

/// Largest per-channel mean edge magnitude, in `[0, 1]`.
pub fn sharpness(f: &Frame) -> Result<f64> {
    check_size(f)?;
    let (w, h) = f.dims();
    let px = f.pixels();
    let n = (w * h) as f64;
    let sums = [
        sobel_sum(w, h, |i| px[i].r),
        sobel_sum(w, h, |i| px[i].g),
        sobel_sum(w, h, |i| px[i].b),
    ];
    Ok(sums.into_iter().map(|s| s / n).fold(0.0, f64::max))
}
