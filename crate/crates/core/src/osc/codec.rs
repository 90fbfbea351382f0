//! OSC 1.0 binary encoding: 4-byte aligned, big-endian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLE_TAG: &[u8] = b"#bundle\0";

/// Timetag meaning "process immediately".
pub const IMMEDIATELY: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OscArg {
    Float(f32),
    Int(i32),
    String(String),
}

impl OscArg {
    pub fn tag(&self) -> char {
        match self {
            OscArg::Float(_) => 'f',
            OscArg::Int(_) => 'i',
            OscArg::String(_) => 's',
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            OscArg::Float(f) => Some(f as f64),
            OscArg::Int(i) => Some(i as f64),
            OscArg::String(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscMessage {
    pub address: String,
    pub args: Vec<OscArg>,
}

impl OscMessage {
    pub fn new(address: impl Into<String>, args: Vec<OscArg>) -> Self {
        OscMessage {
            address: address.into(),
            args,
        }
    }

    pub fn floats(address: impl Into<String>, values: &[f64]) -> Self {
        Self::new(address, values.iter().map(|&v| OscArg::Float(v as f32)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OscPacket {
    Message(OscMessage),
    Bundle { timetag: u64, content: Vec<OscPacket> },
}

impl OscPacket {
    /// All messages in the packet, bundles flattened depth-first.
    pub fn into_messages(self) -> Vec<OscMessage> {
        match self {
            OscPacket::Message(m) => vec![m],
            OscPacket::Bundle { content, .. } => content.into_iter().flat_map(OscPacket::into_messages).collect(),
        }
    }
}

fn pad4(n: usize) -> usize {
    (n + 3) & !3
}

fn write_padded_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(s.as_bytes());
    let len = pad4(s.len() + 1);
    out.resize(out.len() + (len - s.len()), 0);
}

fn check_address(a: &str) -> Result<()> {
    if !a.starts_with('/') || a.contains('\0') {
        return Err(Error::InvalidAddress(a.to_string()));
    }
    Ok(())
}

pub fn encode(m: &OscMessage) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(32);
    encode_into(m, &mut out)?;
    Ok(out)
}

fn encode_into(m: &OscMessage, out: &mut Vec<u8>) -> Result<()> {
    check_address(&m.address)?;
    write_padded_str(out, &m.address);
    let tags: String = std::iter::once(',').chain(m.args.iter().map(OscArg::tag)).collect();
    write_padded_str(out, &tags);
    for arg in &m.args {
        match arg {
            OscArg::Float(f) => out.extend_from_slice(&f.to_be_bytes()),
            OscArg::Int(i) => out.extend_from_slice(&i.to_be_bytes()),
            OscArg::String(s) => {
                if s.contains('\0') {
                    return Err(Error::MalformedPacket("string argument contains NUL"));
                }
                write_padded_str(out, s);
            }
        }
    }
    Ok(())
}

/// Encode several messages as one bundle.
pub fn encode_bundle(timetag: u64, messages: &[OscMessage]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(16 + 32 * messages.len());
    out.extend_from_slice(BUNDLE_TAG);
    out.extend_from_slice(&timetag.to_be_bytes());
    for m in messages {
        let start = out.len();
        out.extend_from_slice(&[0; 4]);
        encode_into(m, &mut out)?;
        let size = (out.len() - start - 4) as u32;
        out[start..start + 4].copy_from_slice(&size.to_be_bytes());
    }
    Ok(out)
}

/// Encode a frame's messages: a bare message when there is one, a bundle
/// otherwise.
pub fn encode_frame(messages: &[OscMessage]) -> Result<Vec<u8>> {
    match messages {
        [m] => encode(m),
        _ => encode_bundle(IMMEDIATELY, messages),
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::MalformedPacket("truncated packet"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn word(&mut self) -> Result<[u8; 4]> {
        Ok(self.take(4)?.try_into().expect("4 bytes"))
    }

    fn padded_str(&mut self) -> Result<&'a str> {
        let rest = &self.buf[self.pos..];
        let nul = rest
            .iter()
            .position(|&b| b == 0)
            .ok_or(Error::MalformedPacket("unterminated string"))?;
        let len = pad4(nul + 1);
        if rest.len() < len {
            return Err(Error::MalformedPacket("string padding runs past end"));
        }
        if rest[nul..len].iter().any(|&b| b != 0) {
            return Err(Error::MalformedPacket("nonzero string padding"));
        }
        let s = std::str::from_utf8(&rest[..nul]).map_err(|_| Error::MalformedPacket("string is not UTF-8"))?;
        self.pos += len;
        Ok(s)
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn decode_message(buf: &[u8]) -> Result<OscMessage> {
    if !buf.len().is_multiple_of(4) {
        return Err(Error::MalformedPacket("length not a multiple of 4"));
    }
    let mut r = Reader { buf, pos: 0 };
    let address = r.padded_str()?;
    if !address.starts_with('/') {
        return Err(Error::MalformedPacket("address must start with '/'"));
    }
    let mut args = Vec::new();
    // Messages without a type tag string are tolerated as argument-less.
    if !r.done() {
        let tags = r.padded_str()?;
        let tags = tags
            .strip_prefix(',')
            .ok_or(Error::MalformedPacket("type tag string must start with ','"))?;
        for tag in tags.chars() {
            let arg = match tag {
                'f' => OscArg::Float(f32::from_be_bytes(r.word()?)),
                'i' => OscArg::Int(i32::from_be_bytes(r.word()?)),
                's' => OscArg::String(r.padded_str()?.to_string()),
                other => return Err(Error::UnsupportedTypeTag(other)),
            };
            args.push(arg);
        }
    }
    if !r.done() {
        return Err(Error::MalformedPacket("trailing bytes after arguments"));
    }
    Ok(OscMessage {
        address: address.to_string(),
        args,
    })
}

pub fn decode(buf: &[u8]) -> Result<OscMessage> {
    decode_message(buf)
}

/// Decode a message or a (possibly nested) bundle.
pub fn decode_packet(buf: &[u8]) -> Result<OscPacket> {
    if buf.len() < 4 || !buf.len().is_multiple_of(4) {
        return Err(Error::MalformedPacket("length not a positive multiple of 4"));
    }
    if !buf.starts_with(BUNDLE_TAG) {
        return decode_message(buf).map(OscPacket::Message);
    }
    let mut r = Reader {
        buf,
        pos: BUNDLE_TAG.len(),
    };
    let timetag = u64::from_be_bytes(r.take(8)?.try_into().expect("8 bytes"));
    let mut content = Vec::new();
    while !r.done() {
        let size = u32::from_be_bytes(r.word()?) as usize;
        content.push(decode_packet(r.take(size)?)?);
    }
    Ok(OscPacket::Bundle { timetag, content })
}
