//! Frame storage, color conversions and the luminance descriptor.
//!
//! Every analysis module reads pixels through [`Frame`] and the conversions
//! defined here. Channels are normalized reals in `[0, 1]`; 8-bit input is
//! divided by 255 on ingestion and alpha is dropped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One RGB pixel, channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb::new(0.0, 0.0, 0.0);
    pub const WHITE: Rgb = Rgb::new(1.0, 1.0, 1.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb { r, g, b }
    }

    pub fn gray(v: f64) -> Self {
        Rgb::new(v, v, v)
    }

    pub fn channel(&self, c: usize) -> f64 {
        match c {
            0 => self.r,
            1 => self.g,
            2 => self.b,
            _ => panic!("channel index {c} out of range"),
        }
    }

    /// Mean of the three channels; the gray level used by the spectral and
    /// flow analyses.
    pub fn intensity(&self) -> f64 {
        (self.r + self.g + self.b) / 3.0
    }

    /// HSL lightness, `(max + min) / 2`.
    pub fn lightness(&self) -> f64 {
        let max = self.r.max(self.g).max(self.b);
        let min = self.r.min(self.g).min(self.b);
        (max + min) / 2.0
    }

    fn is_valid(&self) -> bool {
        [self.r, self.g, self.b].iter().all(|c| (0.0..=1.0).contains(c))
    }
}

/// Hexcone HSV. Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsvPixel {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl HsvPixel {
    pub fn new(h: f64, s: f64, v: f64) -> Self {
        HsvPixel { h, s, v }
    }
}

/// Standard hexcone RGB to HSV conversion. Achromatic pixels get hue 0.
pub fn rgb_to_hsv(p: Rgb) -> HsvPixel {
    let max = p.r.max(p.g).max(p.b);
    let min = p.r.min(p.g).min(p.b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta <= 0.0 {
        return HsvPixel { h: 0.0, s: 0.0, v };
    }
    let sector = if max == p.r {
        ((p.g - p.b) / delta).rem_euclid(6.0)
    } else if max == p.g {
        (p.b - p.r) / delta + 2.0
    } else {
        (p.r - p.g) / delta + 4.0
    };
    let mut h = 60.0 * sector;
    if h >= 360.0 {
        h -= 360.0;
    }
    HsvPixel { h, s, v }
}

pub fn hsv_to_rgb(p: HsvPixel) -> Rgb {
    let c = p.v * p.s;
    let hp = p.h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = p.v - c;
    Rgb::new(r + m, g + m, b + m)
}

/// A single-channel plane of reals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Sample with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// One decoded video image.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
    timestamp_ms: u64,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>, timestamp_ms: u64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame(format!("zero dimension {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidFrame(format!(
                "{} pixels for {width}x{height}",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|p| !p.is_valid()) {
            return Err(Error::InvalidFrame(format!(
                "pixel {i} has a channel outside [0, 1]: {:?}",
                pixels[i]
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
            timestamp_ms,
        })
    }

    pub fn uniform(width: usize, height: usize, color: Rgb) -> Result<Self> {
        Self::new(width, height, vec![color; width * height], 0)
    }

    /// Build a frame by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels, 0)
    }

    /// Packed 8-bit RGB, 3 bytes per pixel.
    pub fn from_rgb24(width: usize, height: usize, bytes: &[u8], timestamp_ms: u64) -> Result<Self> {
        Self::from_packed(width, height, bytes, 3, timestamp_ms)
    }

    /// Packed 8-bit RGBA, 4 bytes per pixel. Alpha is discarded.
    pub fn from_rgba(width: usize, height: usize, bytes: &[u8], timestamp_ms: u64) -> Result<Self> {
        Self::from_packed(width, height, bytes, 4, timestamp_ms)
    }

    fn from_packed(width: usize, height: usize, bytes: &[u8], stride: usize, timestamp_ms: u64) -> Result<Self> {
        if bytes.len() != width * height * stride {
            return Err(Error::InvalidFrame(format!(
                "{} bytes for {width}x{height} at {stride} bytes/pixel",
                bytes.len()
            )));
        }
        let pixels = bytes
            .chunks_exact(stride)
            .map(|px| Rgb::new(px[0] as f64 / 255.0, px[1] as f64 / 255.0, px[2] as f64 / 255.0))
            .collect();
        Self::new(width, height, pixels, timestamp_ms)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn timestamp_ms(&self) -> u64 {
        self.timestamp_ms
    }

    pub fn with_timestamp(mut self, timestamp_ms: u64) -> Self {
        self.timestamp_ms = timestamp_ms;
        self
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// One color channel (0 = R, 1 = G, 2 = B) as a plane.
    pub fn channel_plane(&self, c: usize) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.pixels.iter().map(|p| p.channel(c)).collect(),
        }
    }

    /// Gray plane, mean of R, G and B.
    pub fn gray(&self) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.pixels.iter().map(Rgb::intensity).collect(),
        }
    }

    pub fn hsv_pixels(&self) -> impl Iterator<Item = HsvPixel> + '_ {
        self.pixels.iter().map(|&p| rgb_to_hsv(p))
    }

    /// Separable box blur of the given radius with edge replication.
    pub fn box_blur(&self, radius: usize) -> Frame {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width as isize, self.height as isize);
        let r = radius as isize;
        let n = (2 * r + 1) as f64;
        let at = |px: &[Rgb], x: isize, y: isize| px[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];
        let mut tmp = vec![Rgb::BLACK; self.pixels.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = Rgb::BLACK;
                for d in -r..=r {
                    let p = at(&self.pixels, x + d, y);
                    acc.r += p.r;
                    acc.g += p.g;
                    acc.b += p.b;
                }
                tmp[(y * w + x) as usize] = Rgb::new(acc.r / n, acc.g / n, acc.b / n);
            }
        }
        let mut out = vec![Rgb::BLACK; self.pixels.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = Rgb::BLACK;
                for d in -r..=r {
                    let p = at(&tmp, x, y + d);
                    acc.r += p.r;
                    acc.g += p.g;
                    acc.b += p.b;
                }
                out[(y * w + x) as usize] = Rgb::new(
                    (acc.r / n).clamp(0.0, 1.0),
                    (acc.g / n).clamp(0.0, 1.0),
                    (acc.b / n).clamp(0.0, 1.0),
                );
            }
        }
        Frame {
            width: self.width,
            height: self.height,
            pixels: out,
            timestamp_ms: self.timestamp_ms,
        }
    }
}

/// Mean HSL lightness over the frame, in `[0, 1]`.
pub fn mean_luminance(f: &Frame) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::DegenerateFrame);
    }
    let sum: f64 = f.pixels().iter().map(Rgb::lightness).sum();
    Ok((sum / f.pixels().len() as f64).clamp(0.0, 1.0))
}
