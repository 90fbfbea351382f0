//! Brute-force reference implementations and frame generators shared by the
//! integration tests. Nothing here calls into the code under test except for
//! plain data types.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vivo::corpus::{DescriptorTable, Query, Unit};
use vivo::imagecore::{Frame, Rgb};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_frame(r: &mut impl Rng, w: usize, h: usize) -> Frame {
    Frame::from_fn(w, h, |_, _| Rgb::new(r.gen(), r.gen(), r.gen())).unwrap()
}

// ---- color ----

/// Textbook hexcone HSV, hue in degrees, achromatic hue 0.
pub fn hsv(p: Rgb) -> (f64, f64, f64) {
    let max = p.r.max(p.g).max(p.b);
    let min = p.r.min(p.g).min(p.b);
    let c = max - min;
    let s = if max > 0.0 { c / max } else { 0.0 };
    if c == 0.0 {
        return (0.0, s, max);
    }
    let h = if max == p.r {
        60.0 * (((p.g - p.b) / c).rem_euclid(6.0))
    } else if max == p.g {
        60.0 * ((p.b - p.r) / c + 2.0)
    } else {
        60.0 * ((p.r - p.g) / c + 4.0)
    };
    (h.rem_euclid(360.0), s, max)
}

pub fn rgb_from_hsv(h: f64, s: f64, v: f64) -> Rgb {
    let f = |n: f64| {
        let k = (n + h / 60.0).rem_euclid(6.0);
        v - v * s * k.min(4.0 - k).clamp(0.0, 1.0)
    };
    Rgb::new(f(5.0), f(3.0), f(1.0))
}

pub fn temperature(h: f64) -> f64 {
    if h > 75.0 && h < 285.0 {
        -1.0
    } else {
        1.0
    }
}

/// Per-pixel warmth with no quantization: mean of T(h) * s * v.
pub fn warmth_oracle(f: &Frame) -> f64 {
    let n = f.pixels().len() as f64;
    f.pixels()
        .iter()
        .map(|&p| {
            let (h, s, v) = hsv(p);
            temperature(h) * s * v
        })
        .sum::<f64>()
        / n
}

// ---- Sobel ----

const KX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const KY: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// Direct 3x3 correlation with replicated borders, magnitude clipped at 1.
pub fn sobel_oracle(f: &Frame, channel: usize) -> Vec<f64> {
    let (w, h) = f.dims();
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        f.pixel(x, y).channel(channel)
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (mut gx, mut gy) = (0.0, 0.0);
            for j in 0..3 {
                for i in 0..3 {
                    let v = at(x + i as isize - 1, y + j as isize - 1);
                    gx += KX[j][i] * v;
                    gy += KY[j][i] * v;
                }
            }
            out.push((gx * gx + gy * gy).sqrt().min(1.0));
        }
    }
    out
}

pub fn sharpness_oracle(f: &Frame) -> f64 {
    (0..3)
        .map(|c| {
            let m = sobel_oracle(f, c);
            m.iter().sum::<f64>() / m.len() as f64
        })
        .fold(0.0, f64::max)
}

// ---- DFT ----

fn gray(p: Rgb) -> f64 {
    (p.r + p.g + p.b) / 3.0
}

/// |F(u, v)| / N by the direct double sum, returned in shifted layout
/// (DC at `(w/2, h/2)`), row-major.
pub fn dft_oracle(f: &Frame) -> Vec<f64> {
    let (w, h) = f.dims();
    let n = (w * h) as f64;
    let mut out = vec![0.0; w * h];
    for v in 0..h {
        for u in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let g = gray(f.pixel(x, y));
                    let phase = -2.0 * std::f64::consts::PI * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                    re += g * phase.cos();
                    im += g * phase.sin();
                }
            }
            let (su, sv) = ((u + w / 2) % w, (v + h / 2) % h);
            out[sv * w + su] = (re * re + im * im).sqrt() / n;
        }
    }
    out
}

// ---- optical flow ----

/// Isotropic Gaussian blob centered at `(cx, cy)` on a dark background.
pub fn gaussian_blob(w: usize, h: usize, cx: f64, cy: f64, sigma: f64) -> Frame {
    Frame::from_fn(w, h, |x, y| {
        let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        Rgb::gray(0.1 + 0.8 * (-d2 / (2.0 * sigma * sigma)).exp())
    })
    .unwrap()
}

// ---- corpus ----

pub fn random_table(r: &mut impl Rng, cols: &[&str], n: usize) -> DescriptorTable {
    let rows = (0..n)
        .map(|i| Unit {
            unit_index: i as u64,
            time_ms: i as f64 * 40.0,
            values: cols.iter().map(|_| r.gen_range(-3.0..5.0)).collect(),
        })
        .collect();
    DescriptorTable::new(cols.iter().map(|s| s.to_string()).collect(), rows).unwrap()
}

/// Linear scan: normalize every column by its own min/max, skip flat
/// columns, smallest squared distance wins, ties to the lowest index.
pub fn nearest_oracle(t: &DescriptorTable, q: &Query) -> u64 {
    let idx: Vec<usize> = q
        .dims
        .iter()
        .map(|d| t.columns().iter().position(|c| c == d).unwrap())
        .collect();
    let ranges: Vec<(f64, f64)> = idx
        .iter()
        .map(|&c| {
            let col = t.rows().iter().map(|r| r.values[c]);
            (
                col.clone().fold(f64::INFINITY, f64::min),
                col.fold(f64::NEG_INFINITY, f64::max),
            )
        })
        .collect();
    let mut best = (f64::INFINITY, u64::MAX);
    for row in t.rows() {
        let mut d2 = 0.0;
        for (k, &c) in idx.iter().enumerate() {
            let (lo, hi) = ranges[k];
            if hi > lo {
                let a = (row.values[c] - lo) / (hi - lo);
                let b = (q.values[k] - lo) / (hi - lo);
                d2 += (a - b) * (a - b);
            }
        }
        if d2 < best.0 || (d2 == best.0 && row.unit_index < best.1) {
            best = (d2, row.unit_index);
        }
    }
    best.1
}

// ---- fixed synthetic corpus ----

/// Twenty 64x48 test frames: gratings, checkerboards, steps, blobs, noise
/// and gradients, in color and gray.
pub fn synthetic_corpus() -> Vec<Frame> {
    let (w, h) = (64, 48);
    let mut r = rng(20);
    let mut out = Vec::new();
    for period in [2usize, 4, 8] {
        out.push(Frame::from_fn(w, h, |x, _| Rgb::gray(((x / (period / 2).max(1)) % 2) as f64)).unwrap());
    }
    for cell in [1usize, 3, 8] {
        out.push(Frame::from_fn(w, h, |x, y| Rgb::gray((((x / cell) + (y / cell)) % 2) as f64)).unwrap());
    }
    out.push(
        Frame::from_fn(w, h, |x, _| {
            if x < w / 2 {
                Rgb::new(0.9, 0.2, 0.1)
            } else {
                Rgb::new(0.1, 0.3, 0.9)
            }
        })
        .unwrap(),
    );
    out.push(Frame::from_fn(w, h, |_, y| if y < h / 3 { Rgb::BLACK } else { Rgb::WHITE }).unwrap());
    out.push(gaussian_blob(w, h, 30.0, 20.0, 3.0));
    out.push(gaussian_blob(w, h, 12.5, 33.0, 8.0));
    out.push(random_frame(&mut r, w, h));
    out.push(Frame::from_fn(w, h, |_, _| Rgb::gray(r.gen())).unwrap());
    out.push(Frame::from_fn(w, h, |x, y| Rgb::new(x as f64 / 63.0, y as f64 / 47.0, 0.5)).unwrap());
    out.push(
        Frame::from_fn(w, h, |x, y| {
            let t = ((x as f64 / 3.0).sin() * (y as f64 / 5.0).cos() + 1.0) / 2.0;
            Rgb::new(t, 1.0 - t, 0.5 * t)
        })
        .unwrap(),
    );
    out.push(Frame::from_fn(w, h, |x, y| Rgb::gray(0.5 + 0.5 * ((x + 2 * y) as f64 * 0.9).cos())).unwrap());
    out.push(
        Frame::from_fn(w, h, |x, y| {
            let inside = (20..44).contains(&x) && (10..38).contains(&y);
            if inside {
                Rgb::new(1.0, 0.8, 0.0)
            } else {
                Rgb::new(0.0, 0.1, 0.3)
            }
        })
        .unwrap(),
    );
    out.push(
        Frame::from_fn(w, h, |x, y| {
            Rgb::gray(if (x * 7 + y * 13) % 17 < 3 { 1.0 } else { 0.0 })
        })
        .unwrap(),
    );
    out.push(
        Frame::from_fn(w, h, |x, y| {
            let d = ((x as f64 - 32.0).powi(2) + (y as f64 - 24.0).powi(2)).sqrt();
            Rgb::gray(0.5 + 0.5 * (d * 1.3).sin())
        })
        .unwrap(),
    );
    out.push(
        Frame::from_fn(w, h, |x, y| {
            Rgb::new(r.gen::<f64>() * 0.2 + (x % 2) as f64 * 0.8, (y % 5) as f64 / 4.0, 0.3)
        })
        .unwrap(),
    );
    out.push(Frame::uniform(w, h, Rgb::new(0.4, 0.6, 0.2)).unwrap());
    assert_eq!(out.len(), 20);
    out
}

/// Box blur with wrap-around borders: a circular convolution, so every DFT
/// coefficient is scaled by the kernel's transfer function (|H| <= 1) and
/// the mean is kept exactly.
pub fn wrap_blur(f: &Frame, radius: usize) -> Frame {
    let (w, h) = f.dims();
    let r = radius as isize;
    let n = ((2 * r + 1) * (2 * r + 1)) as f64;
    let at = |x: isize, y: isize| f.pixel(x.rem_euclid(w as isize) as usize, y.rem_euclid(h as isize) as usize);
    Frame::from_fn(w, h, |x, y| {
        let mut acc = Rgb::BLACK;
        for dy in -r..=r {
            for dx in -r..=r {
                let p = at(x as isize + dx, y as isize + dy);
                acc.r += p.r;
                acc.g += p.g;
                acc.b += p.b;
            }
        }
        Rgb::new((acc.r / n).min(1.0), (acc.g / n).min(1.0), (acc.b / n).min(1.0))
    })
    .unwrap()
}

/// Largest Sobel magnitude before clipping, over all channels.
pub fn unclipped_sobel_max(f: &Frame) -> f64 {
    let (w, h) = f.dims();
    let mut m: f64 = 0.0;
    for c in 0..3 {
        let at = |x: isize, y: isize| {
            f.pixel(x.clamp(0, w as isize - 1) as usize, y.clamp(0, h as isize - 1) as usize)
                .channel(c)
        };
        for y in 0..h as isize {
            for x in 0..w as isize {
                let (mut gx, mut gy) = (0.0, 0.0);
                for j in 0..3 {
                    for i in 0..3 {
                        let v = at(x + i as isize - 1, y + j as isize - 1);
                        gx += KX[j][i] * v;
                        gy += KY[j][i] * v;
                    }
                }
                m = m.max((gx * gx + gy * gy).sqrt());
            }
        }
    }
    m
}
