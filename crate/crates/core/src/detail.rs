//! Spectral texture descriptor.
//!
//! The gray plane is transformed with a 2D DFT, normalized by pixel count
//! (so the DC cell equals the mean gray level) and shifted so DC sits at the
//! center cell `(width / 2, height / 2)`. A [`Band`] selects a cross made of
//! a vertical strip of columns and a horizontal strip of rows whose
//! normalized distance from the center lies in `[offset, offset + width)`;
//! distances are normalized so that 1.0 is the Nyquist frequency.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{Frame, Plane};

const BAND_EPS: f64 = 1e-9;
const DC_EPS: f64 = 1e-6;
// Magnitudes below this are transform round-off and are flushed to zero.
const NOISE_FLOOR: f64 = 1e-12;

/// DC-centered magnitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub magnitude: Plane,
}

impl Spectrum {
    pub fn width(&self) -> usize {
        self.magnitude.width
    }

    pub fn height(&self) -> usize {
        self.magnitude.height
    }

    pub fn center(&self) -> (usize, usize) {
        (self.width() / 2, self.height() / 2)
    }

    pub fn dc(&self) -> f64 {
        let (cx, cy) = self.center();
        self.magnitude.get(cx, cy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub offset: f64,
    pub width: f64,
}

impl Band {
    pub fn new(offset: f64, width: f64) -> Result<Self> {
        let b = Band { offset, width };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.offset)
            && self.width > 0.0
            && self.width <= 1.0
            && self.offset + self.width <= 1.0 + BAND_EPS;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidBand {
                offset: self.offset,
                width: self.width,
            })
        }
    }

    /// Default four equal bands covering DC to Nyquist.
    pub fn default_set() -> Vec<Band> {
        [0.0, 0.25, 0.5, 0.75]
            .into_iter()
            .map(|offset| Band { offset, width: 0.25 })
            .collect()
    }

    /// Whether a normalized distance from DC falls in the band. The upper
    /// edge is closed for a band that reaches Nyquist.
    pub fn contains(&self, d: f64) -> bool {
        let hi = self.offset + self.width;
        d >= self.offset - BAND_EPS && (d < hi - BAND_EPS || (hi >= 1.0 - BAND_EPS && d <= 1.0 + BAND_EPS))
    }
}

/// Normalized distance of index `i` from the center `c` of an axis of
/// length `n`. Nyquist (`n / 2`) maps to 1.
fn axis_distance(i: usize, c: usize, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    (i as f64 - c as f64).abs() / (n as f64 / 2.0)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    // frame-sized work buffer, reused so each frame skips fresh page faults
    static WORK: RefCell<Vec<Complex<f64>>> = const { RefCell::new(Vec::new()) };
}

fn plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

/// Normalized, shifted magnitude spectrum of a real plane.
pub fn plane_spectrum(p: &Plane) -> Spectrum {
    let (w, h) = (p.width, p.height);
    let out = WORK.with(|work| {
        let buf = &mut *work.borrow_mut();
        buf.clear();
        buf.extend(p.data.iter().map(|&v| Complex::new(v, 0.0)));

        let row_fft = plan(w);
        for row in buf.chunks_exact_mut(w) {
            row_fft.process(row);
        }
        let col_fft = plan(h);
        let mut col = vec![Complex::new(0.0, 0.0); h];
        for x in 0..w {
            for y in 0..h {
                col[y] = buf[y * w + x];
            }
            col_fft.process(&mut col);
            for y in 0..h {
                buf[y * w + x] = col[y];
            }
        }

        let norm = (w * h) as f64;
        let (cx, cy) = (w / 2, h / 2);
        let mut out = Plane::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                let sx = (x + cx) % w;
                let sy = (y + cy) % h;
                let m = buf[y * w + x].norm() / norm;
                out.data[sy * w + sx] = if m < NOISE_FLOOR { 0.0 } else { m };
            }
        }
        out
    });
    Spectrum { magnitude: out }
}

pub fn dft_magnitude(f: &Frame) -> Result<Spectrum> {
    if f.width() < 2 || f.height() < 2 {
        return Err(Error::FrameTooSmall {
            width: f.width(),
            height: f.height(),
            min: 2,
        });
    }
    Ok(plane_spectrum(&f.gray()))
}

/// Mean magnitude over the band's cross of strips, DC excluded, overlap
/// cells counted once.
pub fn band_mean(s: &Spectrum, b: &Band) -> Result<f64> {
    b.validate()?;
    let (w, h) = (s.width(), s.height());
    let (cx, cy) = s.center();
    let cols: Vec<bool> = (0..w).map(|x| b.contains(axis_distance(x, cx, w))).collect();
    let rows: Vec<bool> = (0..h).map(|y| b.contains(axis_distance(y, cy, h))).collect();
    let mut sum = 0.0;
    let mut count = 0usize;
    for y in 0..h {
        for x in 0..w {
            if (x, y) == (cx, cy) || !(cols[x] || rows[y]) {
                continue;
            }
            sum += s.magnitude.get(x, y);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyBand);
    }
    Ok(sum / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailOutput {
    pub overall: f64,
    pub per_band: Vec<f64>,
}

/// Per-band detail `min(1, gain * band_mean / DC)` and their mean.
pub fn detail_of_spectrum(s: &Spectrum, bands: &[Band], gain: f64) -> Result<DetailOutput> {
    if bands.is_empty() {
        return Err(Error::InvalidParams("detail needs at least one band".into()));
    }
    if !(gain > 0.0) {
        return Err(Error::InvalidParams(format!("detail gain must be > 0, got {gain}")));
    }
    let dc = s.dc().max(DC_EPS);
    let per_band = bands
        .iter()
        .map(|b| band_mean(s, b).map(|m| (gain * m / dc).min(1.0)))
        .collect::<Result<Vec<_>>>()?;
    let overall = per_band.iter().sum::<f64>() / per_band.len() as f64;
    Ok(DetailOutput { overall, per_band })
}

pub fn detail(f: &Frame, bands: &[Band], gain: f64) -> Result<DetailOutput> {
    detail_of_spectrum(&dft_magnitude(f)?, bands, gain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::Rgb;
    use std::f64::consts::PI;

    #[test]
    fn constant_frame_spectrum() {
        let f = Frame::uniform(6, 4, Rgb::gray(0.3)).unwrap();
        let s = dft_magnitude(&f).unwrap();
        assert!((s.dc() - 0.3).abs() < 1e-12);
        let off: f64 = s.magnitude.data.iter().sum::<f64>() - s.dc();
        assert!(off.abs() < 1e-12);
        for b in Band::default_set() {
            assert!(band_mean(&s, &b).unwrap() < 1e-12);
        }
        assert_eq!(detail(&f, &Band::default_set(), 20.0).unwrap().overall, 0.0);
    }

    #[test]
    fn cosine_grating_peaks() {
        let (w, h, k, a) = (16, 8, 3, 0.4);
        let f = Frame::from_fn(w, h, |x, _| {
            Rgb::gray(0.5 + a * (2.0 * PI * k as f64 * x as f64 / w as f64).cos())
        })
        .unwrap();
        let s = dft_magnitude(&f).unwrap();
        let (cx, cy) = s.center();
        assert!((s.magnitude.get(cx + k, cy) - a / 2.0).abs() < 1e-12);
        assert!((s.magnitude.get(cx - k, cy) - a / 2.0).abs() < 1e-12);
        for y in 0..h {
            for x in 0..w {
                if (x, y) != (cx, cy) && (x, y) != (cx + k, cy) && (x, y) != (cx - k, cy) {
                    assert!(s.magnitude.get(x, y) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn odd_sizes_center_dc() {
        let f = Frame::uniform(5, 3, Rgb::gray(0.8)).unwrap();
        let s = dft_magnitude(&f).unwrap();
        assert_eq!(s.center(), (2, 1));
        assert!((s.dc() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn band_validation() {
        assert!(Band::new(0.8, 0.3).is_err());
        assert!(Band::new(0.0, 0.0).is_err());
        assert!(Band::new(0.75, 0.25).is_ok());
    }

    #[test]
    fn empty_band_is_an_error() {
        // 2x2 spectrum: the only distances are 0 and 1 (Nyquist). A narrow
        // band in between selects nothing.
        let f = Frame::uniform(2, 2, Rgb::gray(0.5)).unwrap();
        let s = dft_magnitude(&f).unwrap();
        let b = Band::new(0.3, 0.2).unwrap();
        assert!(matches!(band_mean(&s, &b), Err(Error::EmptyBand)));
    }

    #[test]
    fn singleton_band_overall_equals_band() {
        let f = Frame::from_fn(8, 8, |x, y| Rgb::gray(((x * 3 + y * 5) % 7) as f64 / 7.0)).unwrap();
        let b = [Band::new(0.25, 0.25).unwrap()];
        let d = detail(&f, &b, 0.5).unwrap();
        assert!(d.per_band[0] < 1.0);
        assert_eq!(d.overall, d.per_band[0]);
    }

    #[test]
    fn too_small() {
        let f = Frame::uniform(1, 4, Rgb::BLACK).unwrap();
        assert!(matches!(dft_magnitude(&f), Err(Error::FrameTooSmall { .. })));
    }
}
