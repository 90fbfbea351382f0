use std::fmt;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::descriptor::AnalysisParams;
use crate::error::{Error, Result};
use crate::mapping::{default_mapping, MappingFile};
use crate::osc::{Endpoint, DEFAULT_QUEUE_CAPACITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PixelFormat {
    #[default]
    Rgb24,
    Rgba,
}

impl PixelFormat {
    pub fn bytes_per_pixel(self) -> usize {
        match self {
            PixelFormat::Rgb24 => 3,
            PixelFormat::Rgba => 4,
        }
    }
}

impl FromStr for PixelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rgb24" => Ok(PixelFormat::Rgb24),
            "rgba" => Ok(PixelFormat::Rgba),
            other => Err(Error::Config(format!(
                "unsupported pixel format {other:?} (rgb24, rgba)"
            ))),
        }
    }
}

/// Raw frame pipe description, `rawvideo:WxH@fps` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub pix: PixelFormat,
    pub fps: f64,
    /// Release frames no faster than `fps`. Live pipes already arrive at
    /// that rate; pacing matters when replaying a file.
    #[serde(default = "default_true")]
    pub pace: bool,
}

fn default_true() -> bool {
    true
}

impl InputSpec {
    pub fn frame_bytes(&self) -> usize {
        self.width * self.height * self.pix.bytes_per_pixel()
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config(format!(
                "input dimensions must be > 0, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return Err(Error::Config(format!("input fps must be > 0, got {}", self.fps)));
        }
        Ok(())
    }
}

impl Default for InputSpec {
    fn default() -> Self {
        InputSpec {
            width: 320,
            height: 240,
            pix: PixelFormat::Rgb24,
            fps: 30.0,
            pace: true,
        }
    }
}

impl FromStr for InputSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("expected rawvideo:WxH@fps, got {s:?}"));
        let rest = s.strip_prefix("rawvideo:").ok_or_else(bad)?;
        let (dims, fps) = rest.split_once('@').ok_or_else(bad)?;
        let (w, h) = dims.split_once('x').ok_or_else(bad)?;
        let spec = InputSpec {
            width: w.parse().map_err(|_| bad())?,
            height: h.parse().map_err(|_| bad())?,
            fps: fps.parse().map_err(|_| bad())?,
            ..InputSpec::default()
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rawvideo:{}x{}@{}", self.width, self.height, self.fps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OscConfig {
    pub targets: Vec<Endpoint>,
    pub queue_capacity: usize,
    /// Also emit the raw `/vivo/*` descriptor values.
    pub raw: bool,
}

impl Default for OscConfig {
    fn default() -> Self {
        OscConfig {
            targets: Vec::new(),
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
            raw: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub input: InputSpec,
    pub analysis: AnalysisParams,
    /// Mapping and preset file; relative paths resolve against the config
    /// file's directory. The built-in default mapping is used when absent.
    pub mapping_file: Option<PathBuf>,
    pub osc: OscConfig,
    pub api: Option<SocketAddr>,
    pub monitor_hz: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            input: InputSpec::default(),
            analysis: AnalysisParams::default(),
            mapping_file: None,
            osc: OscConfig::default(),
            api: None,
            monitor_hz: 15.0,
        }
    }
}

impl EngineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: EngineConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let (Some(m), Some(dir)) = (cfg.mapping_file.as_mut(), path.parent()) {
            if m.is_relative() {
                *m = dir.join(&*m);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.input.validate()?;
        self.analysis.validate()?;
        if let Some(m) = &self.mapping_file {
            if !m.exists() {
                return Err(Error::Config(format!("mapping file {} does not exist", m.display())));
            }
        }
        if !(self.monitor_hz > 0.0) {
            return Err(Error::Config(format!(
                "monitor_hz must be > 0, got {}",
                self.monitor_hz
            )));
        }
        Ok(())
    }

    pub fn load_mapping(&self) -> Result<MappingFile> {
        let file = match &self.mapping_file {
            Some(p) => MappingFile::load(p)?,
            None => default_mapping(),
        };
        super::pipeline::check_descriptors(&file.mapping)?;
        Ok(file)
    }
}
