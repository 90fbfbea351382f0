//! Global image warmth from a quantized HSV color histogram.
//!
//! Each histogram color gets a binary temperature from its hue (warm `+1`,
//! cold `-1`) and a weight `s * v`; the image warmth is the
//! frequency-weighted sum of `temperature * weight`, which lies in `[-1, 1]`.
//!
//! Quantization grid:
//! - hue is split into `h_bins` equal circular cells, each represented by its
//!   arithmetic center;
//! - saturation and value are quantized to `n` evenly spaced levels
//!   `0, 1/(n-1), ..., 1` (nearest level wins), so fully desaturated, black
//!   and fully saturated colors are represented exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{Frame, HsvPixel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizationParams {
    pub h_bins: usize,
    pub s_bins: usize,
    pub v_bins: usize,
}

impl Default for QuantizationParams {
    fn default() -> Self {
        QuantizationParams {
            h_bins: 18,
            s_bins: 4,
            v_bins: 4,
        }
    }
}

impl QuantizationParams {
    pub fn validate(&self) -> Result<()> {
        if self.h_bins == 0 || self.s_bins == 0 || self.v_bins == 0 {
            return Err(Error::InvalidParams(format!(
                "quantization bins must be >= 1, got {}x{}x{}",
                self.h_bins, self.s_bins, self.v_bins
            )));
        }
        Ok(())
    }

    /// Total number of quantized colors.
    pub fn colors(&self) -> usize {
        self.h_bins * self.s_bins * self.v_bins
    }

    fn hue_cell(&self) -> f64 {
        360.0 / self.h_bins as f64
    }

    /// Flat bin index of an HSV color.
    pub fn bin_index(&self, p: HsvPixel) -> usize {
        let hi = ((p.h.rem_euclid(360.0) / self.hue_cell()) as usize).min(self.h_bins - 1);
        let si = level_index(p.s, self.s_bins);
        let vi = level_index(p.v, self.v_bins);
        (hi * self.s_bins + si) * self.v_bins + vi
    }

    /// Representative color of a flat bin index.
    pub fn bin_center(&self, index: usize) -> HsvPixel {
        let vi = index % self.v_bins;
        let si = (index / self.v_bins) % self.s_bins;
        let hi = index / (self.v_bins * self.s_bins);
        HsvPixel {
            h: (hi as f64 + 0.5) * self.hue_cell(),
            s: level_value(si, self.s_bins),
            v: level_value(vi, self.v_bins),
        }
    }
}

fn level_index(x: f64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    ((x.clamp(0.0, 1.0) * (n - 1) as f64).round() as usize).min(n - 1)
}

fn level_value(i: usize, n: usize) -> f64 {
    if n == 1 {
        0.5
    } else {
        i as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub bin_center: HsvPixel,
    pub frequency: f64,
}

/// Sparse normalized histogram; only non-empty bins are listed, in bin order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorHistogram {
    pub entries: Vec<HistogramEntry>,
}

/// `temperature * weight` for one histogram color.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmthTerm {
    pub t: i8,
    pub w: f64,
    pub theta: f64,
}

impl WarmthTerm {
    pub fn of(c: HsvPixel) -> Self {
        let t = color_temperature(c.h);
        let w = weight(c.s, c.v);
        WarmthTerm {
            t,
            w,
            theta: t as f64 * w,
        }
    }
}

/// `-1` for hues strictly inside (75°, 285°), `+1` otherwise.
pub fn color_temperature(h: f64) -> i8 {
    if h > 75.0 && h < 285.0 {
        -1
    } else {
        1
    }
}

pub fn weight(s: f64, v: f64) -> f64 {
    s * v
}

pub fn quantize_hsv(f: &Frame, q: &QuantizationParams) -> Result<ColorHistogram> {
    q.validate()?;
    if f.is_empty() {
        return Err(Error::DegenerateFrame);
    }
    let mut counts = vec![0u32; q.colors()];
    for p in f.hsv_pixels() {
        counts[q.bin_index(p)] += 1;
    }
    let total = f.pixels().len() as f64;
    let entries = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| HistogramEntry {
            bin_center: q.bin_center(i),
            frequency: c as f64 / total,
        })
        .collect();
    Ok(ColorHistogram { entries })
}

/// Warmth of a precomputed histogram.
pub fn histogram_warmth(hist: &ColorHistogram) -> f64 {
    let theta: f64 = hist
        .entries
        .iter()
        .map(|e| e.frequency * WarmthTerm::of(e.bin_center).theta)
        .sum();
    theta.clamp(-1.0, 1.0)
}

pub fn warmth(f: &Frame, q: &QuantizationParams) -> Result<f64> {
    Ok(histogram_warmth(&quantize_hsv(f, q)?))
}
