//! The live control surface: per-input scalers, a routing matrix from
//! descriptor inputs to synthesis targets, and an interpolating preset bank.
//!
//! A mapping is applied as `route(scale(inputs))`: every input row has its
//! own scaler, and each output column receives the gain-weighted sum of the
//! scaled inputs routed to it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub in_min: f64,
    pub in_max: f64,
    pub out_min: f64,
    pub out_max: f64,
    #[serde(default = "one")]
    pub exponent: f64,
}

fn one() -> f64 {
    1.0
}

impl ScalerParams {
    pub fn new(in_min: f64, in_max: f64, out_min: f64, out_max: f64, exponent: f64) -> Result<Self> {
        let p = ScalerParams {
            in_min,
            in_max,
            out_min,
            out_max,
            exponent,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn identity() -> Self {
        ScalerParams {
            in_min: 0.0,
            in_max: 1.0,
            out_min: 0.0,
            out_max: 1.0,
            exponent: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.in_min, self.in_max, self.out_min, self.out_max, self.exponent]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("scaler fields must be finite".into()));
        }
        if self.in_min == self.in_max {
            return Err(Error::InvalidParams(format!(
                "scaler input range is empty ({} .. {})",
                self.in_min, self.in_max
            )));
        }
        if !(self.exponent > 0.0) {
            return Err(Error::InvalidParams(format!(
                "scaler exponent must be > 0, got {}",
                self.exponent
            )));
        }
        Ok(())
    }

    fn lerp(&self, other: &ScalerParams, t: f64) -> ScalerParams {
        ScalerParams {
            in_min: lerp(self.in_min, other.in_min, t),
            in_max: lerp(self.in_max, other.in_max, t),
            out_min: lerp(self.out_min, other.out_min, t),
            out_max: lerp(self.out_max, other.out_max, t),
            exponent: lerp(self.exponent, other.exponent, t),
        }
    }
}

/// Exponential scaling with overshoot: `t = (x - in_min) / (in_max - in_min)`,
/// `y = out_min + (out_max - out_min) * sgn(t) * |t|^exponent`. Not clamped.
///
/// A collapsed input range (possible mid-way through a preset ramp) maps
/// everything to `out_min`.
pub fn scale(x: f64, p: &ScalerParams) -> f64 {
    let span = p.in_max - p.in_min;
    if span == 0.0 {
        return p.out_min;
    }
    let t = (x - p.in_min) / span;
    let shaped = t.signum() * t.abs().powf(p.exponent);
    if shaped == 1.0 {
        return p.out_max;
    }
    p.out_min + (p.out_max - p.out_min) * shaped
}

/// Dense gain matrix, rows are inputs and columns are outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct RoutingMatrix {
    rows: usize,
    cols: usize,
    gains: Vec<f64>,
}

impl RoutingMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RoutingMatrix {
            rows,
            cols,
            gains: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.gains[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidParams("routing matrix rows differ in length".into()));
        }
        let gains: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(g) = gains.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return Err(Error::InvalidParams(format!("routing gain {g} outside [0, 1]")));
        }
        Ok(RoutingMatrix {
            rows: n_rows,
            cols: n_cols,
            gains,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.gains[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, gain: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&gain) {
            return Err(Error::InvalidParams(format!("routing gain {gain} outside [0, 1]")));
        }
        self.gains[row * self.cols + col] = gain;
        Ok(())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        if self.cols == 0 {
            return vec![Vec::new(); self.rows];
        }
        self.gains.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    fn lerp(&self, other: &RoutingMatrix, t: f64) -> RoutingMatrix {
        RoutingMatrix {
            rows: self.rows,
            cols: self.cols,
            gains: self
                .gains
                .iter()
                .zip(&other.gains)
                .map(|(&a, &b)| lerp(a, b, t))
                .collect(),
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for RoutingMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<RoutingMatrix> for Vec<Vec<f64>> {
    fn from(m: RoutingMatrix) -> Self {
        m.to_rows()
    }
}

/// `out_j = Σ_i gains[i][j] * inputs[i]`.
pub fn route(m: &RoutingMatrix, inputs: &[f64]) -> Result<Vec<f64>> {
    if inputs.len() != m.rows {
        return Err(Error::DimensionMismatch {
            expected: m.rows,
            got: inputs.len(),
        });
    }
    let mut out = vec![0.0; m.cols];
    for (i, &x) in inputs.iter().enumerate() {
        let row = &m.gains[i * m.cols..(i + 1) * m.cols];
        for (o, &g) in out.iter_mut().zip(row) {
            *o += g * x;
        }
    }
    Ok(out)
}

/// One matrix row: a descriptor, the OSC address it arrives on in proxy
/// mode, and its scaler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRoute {
    pub descriptor: String,
    pub address: String,
    pub scaler: ScalerParams,
}

/// One matrix column: a synthesis parameter and its OSC address.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputTarget {
    pub name: String,
    pub address: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingState {
    pub inputs: Vec<InputRoute>,
    pub outputs: Vec<OutputTarget>,
    pub matrix: RoutingMatrix,
}

impl MappingState {
    pub fn validate(&self) -> Result<()> {
        if self.matrix.rows() != self.inputs.len() || self.matrix.cols() != self.outputs.len() {
            return Err(Error::InvalidParams(format!(
                "routing matrix is {}x{} but mapping has {} inputs and {} outputs",
                self.matrix.rows(),
                self.matrix.cols(),
                self.inputs.len(),
                self.outputs.len()
            )));
        }
        for input in &self.inputs {
            input.scaler.validate()?;
            check_address(&input.address)?;
        }
        for output in &self.outputs {
            check_address(&output.address)?;
        }
        Ok(())
    }

    /// Identity mapping over the given `(descriptor, address)` pairs; each
    /// output reuses its input's address.
    pub fn identity(channels: &[(&str, &str)]) -> Self {
        MappingState {
            inputs: channels
                .iter()
                .map(|&(d, a)| InputRoute {
                    descriptor: d.to_string(),
                    address: a.to_string(),
                    scaler: ScalerParams::identity(),
                })
                .collect(),
            outputs: channels
                .iter()
                .map(|&(d, a)| OutputTarget {
                    name: d.to_string(),
                    address: a.to_string(),
                })
                .collect(),
            matrix: RoutingMatrix::identity(channels.len()),
        }
    }

    pub fn scalers(&self) -> Vec<ScalerParams> {
        self.inputs.iter().map(|i| i.scaler).collect()
    }

    /// Scale raw input values row by row, then route them to the outputs.
    pub fn apply(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.inputs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs.len(),
                got: raw.len(),
            });
        }
        let scaled: Vec<f64> = raw
            .iter()
            .zip(&self.inputs)
            .map(|(&x, input)| scale(x, &input.scaler))
            .collect();
        route(&self.matrix, &scaled)
    }

    pub fn input_by_address(&self, address: &str) -> Option<usize> {
        self.inputs.iter().position(|i| i.address == address)
    }
}

fn check_address(a: &str) -> Result<()> {
    if a.len() < 2 || !a.starts_with('/') {
        return Err(Error::InvalidAddress(a.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub id: String,
    pub matrix: RoutingMatrix,
    pub scalers: Vec<ScalerParams>,
    /// Unix time in milliseconds.
    pub created_at: u64,
}

impl Preset {
    pub fn capture(id: impl Into<String>, state: &MappingState, created_at: u64) -> Self {
        Preset {
            id: id.into(),
            matrix: state.matrix.clone(),
            scalers: state.scalers(),
            created_at,
        }
    }

    fn check_compatible(&self, state: &MappingState) -> Result<()> {
        if self.matrix.rows() != state.matrix.rows()
            || self.matrix.cols() != state.matrix.cols()
            || self.scalers.len() != state.inputs.len()
        {
            return Err(Error::IncompatiblePreset(format!(
                "preset '{}' is {}x{} with {} scalers, mapping is {}x{} with {} inputs",
                self.id,
                self.matrix.rows(),
                self.matrix.cols(),
                self.scalers.len(),
                state.matrix.rows(),
                state.matrix.cols(),
                state.inputs.len()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.scalers.iter().try_for_each(ScalerParams::validate)
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (1.0 - t) * a + t * b
}

/// Ramp progress for `elapsed_ms` into a `ramp_ms` transition, clamped to
/// `[0, 1]`. A zero-length ramp is complete immediately.
pub fn ramp_progress(elapsed_ms: f64, ramp_ms: f64) -> f64 {
    if ramp_ms <= 0.0 {
        1.0
    } else {
        (elapsed_ms / ramp_ms).clamp(0.0, 1.0)
    }
}

/// Linear interpolation of every numeric field of the mapping towards a
/// preset. Addresses and names are kept from `current`.
pub fn recall_preset(current: &MappingState, target: &Preset, t: f64) -> Result<MappingState> {
    target.check_compatible(current)?;
    let t = t.clamp(0.0, 1.0);
    let mut next = current.clone();
    next.matrix = current.matrix.lerp(&target.matrix, t);
    for (input, to) in next.inputs.iter_mut().zip(&target.scalers) {
        input.scaler = input.scaler.lerp(to, t);
    }
    Ok(next)
}

/// Persisted mapping configuration: the live state plus the preset bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingFile {
    pub mapping: MappingState,
    #[serde(default)]
    pub presets: Vec<Preset>,
}

impl MappingFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        let file: MappingFile = serde_json::from_str(&text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.mapping.validate()?;
        for p in &self.presets {
            p.validate()?;
            p.check_compatible(&self.mapping)?;
        }
        Ok(())
    }
}

/// The shipped mapping: warmth drives grain attack and release, detail the
/// resampling randomization, sharpness the trigger period (inversely) and
/// luminance the filter resonance. Global motion is present but unrouted.
pub fn default_mapping() -> MappingFile {
    let input = |d: &str, a: &str, s: ScalerParams| InputRoute {
        descriptor: d.into(),
        address: a.into(),
        scaler: s,
    };
    let output = |n: &str, a: &str| OutputTarget {
        name: n.into(),
        address: a.into(),
    };
    let inputs = vec![
        input(
            "warmth",
            "/vivo/warmness",
            ScalerParams {
                in_min: -1.0,
                in_max: 1.0,
                out_min: 5.0,
                out_max: 200.0,
                exponent: 3.0,
            },
        ),
        input(
            "detail",
            "/vivo/detail",
            ScalerParams {
                in_min: 0.0,
                in_max: 1.0,
                out_min: 0.0,
                out_max: 1200.0,
                exponent: 1.0,
            },
        ),
        input(
            "sharpness",
            "/vivo/sharpness",
            ScalerParams {
                in_min: 0.0,
                in_max: 1.0,
                out_min: 500.0,
                out_max: 20.0,
                exponent: 1.0,
            },
        ),
        input(
            "luminance",
            "/vivo/luminance",
            ScalerParams {
                in_min: 0.0,
                in_max: 1.0,
                out_min: 1.0,
                out_max: 20.0,
                exponent: 1.0,
            },
        ),
        input("motion_global", "/vivo/motion", ScalerParams::identity()),
    ];
    let outputs = vec![
        output("attack", "/synth/attack"),
        output("release", "/synth/release"),
        output("resample_random", "/synth/resample_random"),
        output("trigger_period", "/synth/trigger_period"),
        output("filter_q", "/synth/filter_q"),
    ];
    let matrix = RoutingMatrix::from_rows(vec![
        vec![1.0, 1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, 1.0],
        vec![0.0, 0.0, 0.0, 0.0, 0.0],
    ])
    .expect("default matrix");
    MappingFile {
        mapping: MappingState {
            inputs,
            outputs,
            matrix,
        },
        presets: Vec::new(),
    }
}
