use log::warn;

use crate::descriptor::{analyze_frame, AnalysisParams, DescriptorFrame};
use crate::error::{Error, Result};
use crate::imagecore::Frame;
use crate::mapping::MappingState;
use crate::osc::OscMessage;

/// Every mapping input must name a descriptor the pipeline produces.
pub fn check_descriptors(m: &MappingState) -> Result<()> {
    let probe = DescriptorFrame {
        frame_index: 0,
        timestamp_ms: 0,
        warmth: 0.0,
        sharpness: 0.0,
        detail: 0.0,
        detail_bands: Vec::new(),
        luminance: 0.0,
        motion: Default::default(),
    };
    m.validate()?;
    for input in &m.inputs {
        if probe.value(&input.descriptor).is_none() {
            return Err(Error::UnknownDescriptor(input.descriptor.clone()));
        }
    }
    Ok(())
}

/// Mapped output messages for one descriptor frame.
pub fn mapped_messages(d: &DescriptorFrame, mapping: &MappingState) -> Result<Vec<OscMessage>> {
    let raw: Vec<f64> = mapping
        .inputs
        .iter()
        .map(|i| {
            d.value(&i.descriptor)
                .ok_or_else(|| Error::UnknownDescriptor(i.descriptor.clone()))
        })
        .collect::<Result<_>>()?;
    let out = mapping.apply(&raw)?;
    Ok(mapping
        .outputs
        .iter()
        .zip(out)
        .map(|(o, v)| OscMessage::floats(o.address.clone(), &[v]))
        .collect())
}

/// Analyze one frame and build its messages: the raw `/vivo/*` values
/// (when `raw` is set) followed by the mapped outputs.
pub fn process_frame(
    f: &Frame,
    prev: Option<&Frame>,
    params: &AnalysisParams,
    mapping: &MappingState,
    frame_index: u64,
    raw: bool,
) -> Result<(DescriptorFrame, Vec<OscMessage>)> {
    let d = analyze_frame(f, prev, params, frame_index)?;
    let mut messages = if raw { d.raw_messages() } else { Vec::new() };
    messages.extend(mapped_messages(&d, mapping)?);
    Ok((d, messages))
}

/// Stream-ordered processing with a one-frame history.
pub struct Pipeline {
    params: AnalysisParams,
    raw: bool,
    prev: Option<Frame>,
    next_index: u64,
}

impl Pipeline {
    pub fn new(params: AnalysisParams, raw: bool) -> Result<Self> {
        params.validate()?;
        Ok(Pipeline {
            params,
            raw,
            prev: None,
            next_index: 0,
        })
    }

    pub fn params(&self) -> &AnalysisParams {
        &self.params
    }

    /// Drop the motion history.
    pub fn reset(&mut self) {
        self.prev = None;
    }

    pub fn process(&mut self, frame: Frame, mapping: &MappingState) -> Result<(DescriptorFrame, Vec<OscMessage>)> {
        if let Some(p) = &self.prev {
            if p.dims() != frame.dims() {
                warn!(
                    "frame size changed from {}x{} to {}x{}, resetting stream",
                    p.width(),
                    p.height(),
                    frame.width(),
                    frame.height()
                );
                self.reset();
            }
        }
        let index = self.next_index;
        self.next_index += 1;
        let out = process_frame(&frame, self.prev.as_ref(), &self.params, mapping, index, self.raw)?;
        self.prev = Some(frame);
        Ok(out)
    }
}
