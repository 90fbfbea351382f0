//! Horn–Schunck dense optical flow and the aggregate motion descriptor.
//!
//! Brightness derivatives are the classic 2x2x2 cube averages of forward
//! differences, the smoothness term uses the 1/6 (edge) and 1/12 (corner)
//! neighborhood average, and borders replicate. Gray levels are taken in
//! 8-bit units (0..255) so the smoothness weight keeps its usual scale.
//!
//! Sign conventions: `u > 0` is motion to the right, `v > 0` is motion down.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{Frame, Plane};

const GRAY_SCALE: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub alpha: f64,
    pub iterations: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            alpha: 1.0,
            iterations: 10,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || self.iterations == 0 {
            return Err(Error::InvalidParams(format!(
                "flow needs alpha > 0 and iterations >= 1, got alpha {} iterations {}",
                self.alpha, self.iterations
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub u: Plane,
    pub v: Plane,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> Self {
        FlowField {
            u: Plane::zeros(width, height),
            v: Plane::zeros(width, height),
        }
    }

    pub fn width(&self) -> usize {
        self.u.width
    }

    pub fn height(&self) -> usize {
        self.u.height
    }

    /// Mean of `sqrt(u² + v²)`.
    pub fn mean_magnitude(&self) -> f64 {
        let n = self.u.data.len().max(1) as f64;
        self.u
            .data
            .iter()
            .zip(&self.v.data)
            .map(|(u, v)| (u * u + v * v).sqrt())
            .sum::<f64>()
            / n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionStats {
    pub mean_h: f64,
    pub mean_v: f64,
    pub global: f64,
    pub pan: (f64, f64),
    pub channel_weights: [f64; 4],
}

impl MotionStats {
    /// Stats of a motionless field.
    pub fn still() -> Self {
        MotionStats {
            channel_weights: channel_weights(0.0, 0.0),
            ..Default::default()
        }
    }
}

#[derive(Default)]
struct Derivatives {
    ex: Vec<f64>,
    ey: Vec<f64>,
    et: Vec<f64>,
}

// Per-thread buffers reused across frames. Fresh frame-sized allocations
// cost a page fault per 4 KiB on first touch, which dominated the flow at
// 320x240.
#[derive(Default)]
struct Scratch {
    g0: Vec<f64>,
    g1: Vec<f64>,
    d: Derivatives,
    inv: Vec<f64>,
    u: [Vec<f64>; 2],
    v: [Vec<f64>; 2],
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = RefCell::new(Scratch::default());
}

fn scaled_gray(f: &Frame) -> impl Iterator<Item = f64> + '_ {
    f.pixels().iter().map(|px| px.intensity() * GRAY_SCALE)
}

fn refill(buf: &mut Vec<f64>, values: impl Iterator<Item = f64>) {
    buf.clear();
    buf.extend(values);
}

fn derivatives(w: usize, h: usize, e0: &[f64], e1: &[f64], d: &mut Derivatives) {
    let n = w * h;
    for buf in [&mut d.ex, &mut d.ey, &mut d.et] {
        buf.clear();
        buf.resize(n, 0.0);
    }
    for y in 0..h {
        let y1 = (y + 1).min(h - 1);
        let (a0, a1) = (&e0[y * w..][..w], &e0[y1 * w..][..w]);
        let (b0, b1) = (&e1[y * w..][..w], &e1[y1 * w..][..w]);
        let o = y * w;
        let (ex, ey, et) = (&mut d.ex[o..o + w], &mut d.ey[o..o + w], &mut d.et[o..o + w]);
        for x in 0..w {
            let x1 = (x + 1).min(w - 1);
            let (a00, a01, a10, a11) = (a0[x], a0[x1], a1[x], a1[x1]);
            let (b00, b01, b10, b11) = (b0[x], b0[x1], b1[x], b1[x1]);
            ex[x] = 0.25 * ((a01 - a00) + (a11 - a10) + (b01 - b00) + (b11 - b10));
            ey[x] = 0.25 * ((a10 - a00) + (a11 - a01) + (b10 - b00) + (b11 - b01));
            et[x] = 0.25 * ((b00 - a00) + (b10 - a10) + (b01 - a01) + (b11 - a11));
        }
    }
}

/// Weighted neighborhood average: 1/6 on edge neighbors, 1/12 on corners.
#[inline(always)]
fn avg(up: &[f64], mid: &[f64], dn: &[f64], l: usize, c: usize, r: usize) -> f64 {
    let edges = mid[l] + mid[r] + up[c] + dn[c];
    let corners = up[l] + up[r] + dn[l] + dn[r];
    edges * (1.0 / 6.0) + corners * (1.0 / 12.0)
}

// Row y with its replicated neighbors above and below.
fn rows(p: &[f64], w: usize, h: usize, y: usize) -> (&[f64], &[f64], &[f64]) {
    let row = |yy: usize| &p[yy * w..(yy + 1) * w];
    (row(y.saturating_sub(1)), row(y), row((y + 1).min(h - 1)))
}

// One Jacobi sweep: averages of the old field (u, v), then the update into
// (nu, nv). `inv` holds 1 / (alpha^2 + ex^2 + ey^2).
#[allow(clippy::too_many_arguments)]
fn jacobi_step(w: usize, h: usize, d: &Derivatives, inv: &[f64], u: &[f64], v: &[f64], nu: &mut [f64], nv: &mut [f64]) {
    for y in 0..h {
        let (uu, um, ud) = rows(u, w, h, y);
        let (vu, vm, vd) = rows(v, w, h, y);
        let o = y * w;
        let (ex, ey, et, k) = (&d.ex[o..o + w], &d.ey[o..o + w], &d.et[o..o + w], &inv[o..o + w]);
        let (nu, nv) = (&mut nu[o..o + w], &mut nv[o..o + w]);
        let mut put = |x: usize, ub: f64, vb: f64| {
            let c = (ex[x] * ub + ey[x] * vb + et[x]) * k[x];
            nu[x] = ub - ex[x] * c;
            nv[x] = vb - ey[x] * c;
        };
        let last = w - 1;
        put(
            0,
            avg(uu, um, ud, 0, 0, 1.min(last)),
            avg(vu, vm, vd, 0, 0, 1.min(last)),
        );
        for x in 1..last {
            put(x, avg(uu, um, ud, x - 1, x, x + 1), avg(vu, vm, vd, x - 1, x, x + 1));
        }
        if w > 1 {
            put(
                last,
                avg(uu, um, ud, last - 1, last, last),
                avg(vu, vm, vd, last - 1, last, last),
            );
        }
    }
}

pub fn horn_schunck(prev: &Frame, next: &Frame, p: &FlowParams) -> Result<FlowField> {
    p.validate()?;
    if prev.dims() != next.dims() {
        return Err(Error::FrameSizeMismatch(
            prev.width(),
            prev.height(),
            next.width(),
            next.height(),
        ));
    }
    if prev.width() < 2 || prev.height() < 2 {
        return Err(Error::FrameTooSmall {
            width: prev.width(),
            height: prev.height(),
            min: 2,
        });
    }
    let (w, h) = prev.dims();
    let n = w * h;
    let alpha2 = p.alpha * p.alpha;
    SCRATCH.with(|cell| {
        let s = &mut *cell.borrow_mut();
        refill(&mut s.g0, scaled_gray(prev));
        refill(&mut s.g1, scaled_gray(next));
        derivatives(w, h, &s.g0, &s.g1, &mut s.d);
        let d = &s.d;
        refill(
            &mut s.inv,
            d.ex.iter()
                .zip(&d.ey)
                .map(|(ex, ey)| 1.0 / (alpha2 + ex * ex + ey * ey)),
        );
        for buf in s.u.iter_mut().chain(s.v.iter_mut()) {
            buf.clear();
            buf.resize(n, 0.0);
        }
        let (mut cur, mut nxt) = (0, 1);
        for _ in 0..p.iterations {
            let ([u0, u1], [v0, v1]) = (&mut s.u, &mut s.v);
            let (u, nu, v, nv) = if cur == 0 {
                (&*u0, u1, &*v0, v1)
            } else {
                (&*u1, u0, &*v1, v0)
            };
            jacobi_step(w, h, d, &s.inv, u, v, nu, nv);
            std::mem::swap(&mut cur, &mut nxt);
        }
        let mut flow = FlowField::zeros(w, h);
        flow.u.data.copy_from_slice(&s.u[cur]);
        flow.v.data.copy_from_slice(&s.v[cur]);
        Ok(flow)
    })
}

/// Bilinear weights of a pan position over the corner channels
/// `[(-1,-1), (1,-1), (-1,1), (1,1)]`.
pub fn channel_weights(pan_x: f64, pan_y: f64) -> [f64; 4] {
    let x = (pan_x.clamp(-1.0, 1.0) + 1.0) / 2.0;
    let y = (pan_y.clamp(-1.0, 1.0) + 1.0) / 2.0;
    [(1.0 - x) * (1.0 - y), x * (1.0 - y), (1.0 - x) * y, x * y]
}

pub fn motion_stats(flow: &FlowField, max_displacement: f64) -> Result<MotionStats> {
    if flow.u.data.is_empty() {
        return Err(Error::DegenerateFrame);
    }
    if !(max_displacement > 0.0) {
        return Err(Error::InvalidParams(format!(
            "max_displacement must be > 0, got {max_displacement}"
        )));
    }
    let n = flow.u.data.len() as f64;
    let abs_mean = |p: &Plane| p.data.iter().map(|x| (x * x).sqrt()).sum::<f64>() / n;
    let signed_mean = |p: &Plane| p.data.iter().sum::<f64>() / n;
    let mean_h = (abs_mean(&flow.u) / max_displacement).min(1.0);
    let mean_v = (abs_mean(&flow.v) / max_displacement).min(1.0);
    let pan = (
        (signed_mean(&flow.u) / max_displacement).clamp(-1.0, 1.0),
        (signed_mean(&flow.v) / max_displacement).clamp(-1.0, 1.0),
    );
    Ok(MotionStats {
        mean_h,
        mean_v,
        global: (mean_h + mean_v) / 2.0,
        pan,
        channel_weights: channel_weights(pan.0, pan.1),
    })
}
