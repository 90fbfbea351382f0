//! Frame sources: packed raw frames of known size, or a stream of binary
//! PPM (P6) images such as `ffmpeg -f image2pipe -vcodec ppm` produces.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use super::config::{InputSpec, PixelFormat};
use crate::error::{Error, Result};
use crate::imagecore::Frame;

fn frame_time_ms(index: u64, fps: f64) -> u64 {
    (index as f64 * 1000.0 / fps).round() as u64
}

/// Fill `buf` completely. `Ok(false)` on a clean EOF before the first byte.
fn read_exact_or_eof<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => {
                return Err(Error::InvalidFrame(format!(
                    "truncated frame: {filled} of {} bytes",
                    buf.len()
                )))
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}

/// Packed rgb24/rgba frames of fixed size.
pub struct RawFrames<R> {
    reader: R,
    spec: InputSpec,
    buf: Vec<u8>,
    index: u64,
    done: bool,
}

impl<R: Read> RawFrames<R> {
    pub fn new(reader: R, spec: InputSpec) -> Self {
        RawFrames {
            reader,
            buf: vec![0; spec.frame_bytes()],
            spec,
            index: 0,
            done: false,
        }
    }

    pub fn spec(&self) -> &InputSpec {
        &self.spec
    }
}

impl<R: Read> Iterator for RawFrames<R> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match read_exact_or_eof(&mut self.reader, &mut self.buf) {
            Ok(false) => {
                self.done = true;
                None
            }
            Ok(true) => {
                let ts = frame_time_ms(self.index, self.spec.fps);
                self.index += 1;
                let (w, h) = (self.spec.width, self.spec.height);
                Some(match self.spec.pix {
                    PixelFormat::Rgb24 => Frame::from_rgb24(w, h, &self.buf, ts),
                    PixelFormat::Rgba => Frame::from_rgba(w, h, &self.buf, ts),
                })
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Concatenated binary PPM images with 8-bit samples.
pub struct PpmFrames<R> {
    reader: R,
    fps: f64,
    index: u64,
    done: bool,
}

impl<R: BufRead> PpmFrames<R> {
    pub fn new(reader: R, fps: f64) -> Self {
        PpmFrames {
            reader,
            fps,
            index: 0,
            done: false,
        }
    }

    fn token(&mut self) -> Result<Option<String>> {
        let mut tok = Vec::new();
        loop {
            let mut byte = [0u8; 1];
            if self.reader.read(&mut byte)? == 0 {
                return Ok((!tok.is_empty()).then(|| String::from_utf8_lossy(&tok).into_owned()));
            }
            match byte[0] {
                b'#' if tok.is_empty() => {
                    let mut skip = Vec::new();
                    self.reader.read_until(b'\n', &mut skip)?;
                }
                b if b.is_ascii_whitespace() => {
                    if !tok.is_empty() {
                        return Ok(Some(String::from_utf8_lossy(&tok).into_owned()));
                    }
                }
                b => tok.push(b),
            }
        }
    }

    fn read_frame(&mut self) -> Result<Option<Frame>> {
        let Some(magic) = self.token()? else { return Ok(None) };
        if magic != "P6" {
            return Err(Error::InvalidFrame(format!("expected PPM magic P6, found {magic:?}")));
        }
        let mut field = |name: &str| -> Result<usize> {
            self.token()?
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::InvalidFrame(format!("bad PPM {name}")))
        };
        let (w, h, maxval) = (field("width")?, field("height")?, field("maxval")?);
        if maxval != 255 {
            return Err(Error::InvalidFrame(format!("unsupported PPM maxval {maxval}")));
        }
        let mut buf = vec![0u8; w * h * 3];
        if !read_exact_or_eof(&mut self.reader, &mut buf)? {
            return Err(Error::InvalidFrame("PPM header without pixel data".into()));
        }
        let ts = frame_time_ms(self.index, self.fps);
        self.index += 1;
        Frame::from_rgb24(w, h, &buf, ts).map(Some)
    }
}

impl<R: BufRead> Iterator for PpmFrames<R> {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let r = self.read_frame().transpose();
        if !matches!(r, Some(Ok(_))) {
            self.done = true;
        }
        r
    }
}

/// Open a frame file: PPM streams are recognized by their magic, anything
/// else is read as packed frames of `spec`'s size.
pub fn open_frames(path: &Path, spec: &InputSpec) -> Result<Box<dyn Iterator<Item = Result<Frame>>>> {
    let mut reader = BufReader::new(File::open(path)?);
    let is_ppm = reader.fill_buf()?.starts_with(b"P6");
    if is_ppm {
        Ok(Box::new(PpmFrames::new(reader, spec.fps)))
    } else {
        spec.validate()?;
        Ok(Box::new(RawFrames::new(reader, *spec)))
    }
}

/// Write frames as packed rgb24, the inverse of [`RawFrames`].
pub fn write_rgb24<W: io::Write>(w: &mut W, f: &Frame) -> io::Result<()> {
    let bytes: Vec<u8> = f
        .pixels()
        .iter()
        .flat_map(|p| [p.r, p.g, p.b])
        .map(|c| (c * 255.0).round() as u8)
        .collect();
    w.write_all(&bytes)
}

/// Write one frame as a binary PPM image.
pub fn write_ppm<W: io::Write>(w: &mut W, f: &Frame) -> io::Result<()> {
    write!(w, "P6\n{} {}\n255\n", f.width(), f.height())?;
    write_rgb24(w, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::Rgb;

    fn spec(w: usize, h: usize) -> InputSpec {
        InputSpec {
            width: w,
            height: h,
            fps: 25.0,
            ..InputSpec::default()
        }
    }

    #[test]
    fn raw_frames_split_and_timestamp() {
        let bytes: Vec<u8> = (0..2 * 2 * 3 * 3).map(|i| (i * 7) as u8).collect();
        let frames: Vec<Frame> = RawFrames::new(&bytes[..], spec(2, 2)).collect::<Result<_>>().unwrap();
        assert_eq!(frames.len(), 3);
        assert_eq!(frames[2].timestamp_ms(), 80);
        assert_eq!(
            frames[1].pixel(0, 0),
            Rgb::new(84.0 / 255.0, 91.0 / 255.0, 98.0 / 255.0)
        );
    }

    #[test]
    fn truncated_raw_frame_is_an_error() {
        let bytes = [0u8; 12 + 5];
        let out: Vec<Result<Frame>> = RawFrames::new(&bytes[..], spec(2, 2)).collect();
        assert_eq!(out.len(), 2);
        assert!(out[0].is_ok());
        assert!(matches!(out[1], Err(Error::InvalidFrame(_))));
    }

    #[test]
    fn rgba_drops_alpha() {
        let bytes = [255u8, 0, 0, 7, 0, 255, 0, 9];
        let s = InputSpec {
            pix: PixelFormat::Rgba,
            ..spec(2, 1)
        };
        let f = RawFrames::new(&bytes[..], s).next().unwrap().unwrap();
        assert_eq!(f.pixels(), &[Rgb::new(1.0, 0.0, 0.0), Rgb::new(0.0, 1.0, 0.0)]);
    }

    #[test]
    fn ppm_stream_round_trip() {
        let a = Frame::from_fn(3, 2, |x, y| Rgb::new(x as f64 / 3.0, y as f64, 0.2)).unwrap();
        let a = Frame::from_rgb24(
            3,
            2,
            &{
                let mut v = Vec::new();
                write_rgb24(&mut v, &a).unwrap();
                v
            },
            0,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_ppm(&mut buf, &a).unwrap();
        buf.extend_from_slice(b"P6 # comment\n3 2\n255\n");
        write_rgb24(&mut buf, &a).unwrap();
        let frames: Vec<Frame> = PpmFrames::new(&buf[..], 25.0).collect::<Result<_>>().unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0], a);
        assert_eq!(frames[1].pixels(), a.pixels());
        assert_eq!(frames[1].timestamp_ms(), 40);
    }

    #[test]
    fn ppm_rejects_garbage() {
        let mut it = PpmFrames::new(&b"P5 1 1 255\n\0"[..], 25.0);
        assert!(it.next().unwrap().is_err());
        assert!(it.next().is_none());
    }
}
