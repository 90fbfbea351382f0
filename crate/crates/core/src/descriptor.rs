//! Per-frame composition of all descriptors.

use serde::{Deserialize, Serialize};

use crate::detail::{self, Band};
use crate::error::{Error, Result};
use crate::imagecore::{mean_luminance, Frame};
use crate::motion::{self, FlowParams, MotionStats};
use crate::osc::OscMessage;
use crate::sharpness;
use crate::warmness::{self, QuantizationParams};

/// Scalar descriptors addressable by name, in table column order.
pub const DESCRIPTOR_NAMES: [&str; 5] = ["warmth", "sharpness", "detail", "luminance", "motion_global"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Toggles {
    pub warmth: bool,
    pub sharpness: bool,
    pub detail: bool,
    pub luminance: bool,
    pub motion: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            warmth: true,
            sharpness: true,
            detail: true,
            luminance: true,
            motion: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisParams {
    pub enabled: Toggles,
    pub quantization: QuantizationParams,
    pub bands: Vec<Band>,
    pub detail_gain: f64,
    pub flow: FlowParams,
    pub max_displacement: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            enabled: Toggles::default(),
            quantization: QuantizationParams::default(),
            bands: Band::default_set(),
            detail_gain: 20.0,
            flow: FlowParams::default(),
            max_displacement: 5.0,
        }
    }
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<()> {
        self.quantization.validate()?;
        self.flow.validate()?;
        if self.bands.is_empty() {
            return Err(Error::InvalidParams("at least one detail band is required".into()));
        }
        self.bands.iter().try_for_each(Band::validate)?;
        if !(self.detail_gain > 0.0) || !(self.max_displacement > 0.0) {
            return Err(Error::InvalidParams(
                "detail_gain and max_displacement must be > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorFrame {
    pub frame_index: u64,
    pub timestamp_ms: u64,
    pub warmth: f64,
    pub sharpness: f64,
    pub detail: f64,
    pub detail_bands: Vec<f64>,
    pub luminance: f64,
    pub motion: MotionStats,
}

impl DescriptorFrame {
    pub fn value(&self, name: &str) -> Option<f64> {
        Some(match name {
            "warmth" => self.warmth,
            "sharpness" => self.sharpness,
            "detail" => self.detail,
            "luminance" => self.luminance,
            "motion_global" => self.motion.global,
            "motion_h" => self.motion.mean_h,
            "motion_v" => self.motion.mean_v,
            "pan_x" => self.motion.pan.0,
            "pan_y" => self.motion.pan.1,
            _ => return None,
        })
    }

    /// Values of [`DESCRIPTOR_NAMES`] in order.
    pub fn scalar_values(&self) -> Vec<f64> {
        DESCRIPTOR_NAMES
            .iter()
            .map(|n| self.value(n).expect("known descriptor"))
            .collect()
    }

    /// Raw descriptor messages under the `/vivo` namespace.
    pub fn raw_messages(&self) -> Vec<OscMessage> {
        let m = &self.motion;
        vec![
            OscMessage::floats("/vivo/warmness", &[self.warmth]),
            OscMessage::floats("/vivo/sharpness", &[self.sharpness]),
            OscMessage::floats("/vivo/detail", &[self.detail]),
            OscMessage::floats("/vivo/detail/bands", &self.detail_bands),
            OscMessage::floats("/vivo/luminance", &[self.luminance]),
            OscMessage::floats("/vivo/motion", &[m.global]),
            OscMessage::floats("/vivo/motion/h", &[m.mean_h]),
            OscMessage::floats("/vivo/motion/v", &[m.mean_v]),
            OscMessage::floats("/vivo/motion/pan", &[m.pan.0, m.pan.1]),
            OscMessage::floats("/vivo/motion/channels", &m.channel_weights),
        ]
    }
}

/// Run every enabled descriptor on `frame`. Motion needs `prev` with the
/// same dimensions; otherwise it reports a still scene. Independent
/// descriptors run in parallel.
pub fn analyze_frame(
    frame: &Frame,
    prev: Option<&Frame>,
    params: &AnalysisParams,
    frame_index: u64,
) -> Result<DescriptorFrame> {
    let on = params.enabled;
    let prev = prev.filter(|p| p.dims() == frame.dims());

    let ((warmth, luminance), (sharp, (detail, motion))) = rayon::join(
        || {
            let w = on
                .warmth
                .then(|| warmness::warmth(frame, &params.quantization))
                .transpose();
            let l = on.luminance.then(|| mean_luminance(frame)).transpose();
            (w, l)
        },
        || {
            rayon::join(
                || on.sharpness.then(|| sharpness::sharpness(frame)).transpose(),
                || {
                    rayon::join(
                        || {
                            on.detail
                                .then(|| detail::detail(frame, &params.bands, params.detail_gain))
                                .transpose()
                        },
                        || match (on.motion, prev) {
                            (true, Some(p)) => motion::horn_schunck(p, frame, &params.flow)
                                .and_then(|flow| motion::motion_stats(&flow, params.max_displacement))
                                .map(Some),
                            _ => Ok(None),
                        },
                    )
                },
            )
        },
    );
    let detail = detail?;
    Ok(DescriptorFrame {
        frame_index,
        timestamp_ms: frame.timestamp_ms(),
        warmth: warmth?.unwrap_or(0.0),
        sharpness: sharp?.unwrap_or(0.0),
        detail: detail.as_ref().map_or(0.0, |d| d.overall),
        detail_bands: detail.map_or_else(|| vec![0.0; params.bands.len()], |d| d.per_band),
        luminance: luminance?.unwrap_or(0.0),
        motion: motion?.unwrap_or_else(MotionStats::still),
    })
}
