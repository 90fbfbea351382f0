//! Real-time video descriptors for sound control.
//!
//! Each frame is reduced to a handful of perceptual values (warmth,
//! sharpness, spectral detail, luminance, optical flow), which pass through
//! per-input scaling curves and a routing matrix before leaving as OSC
//! messages over UDP. The [`corpus`] module analyzes whole videos offline and
//! pairs units between corpora by normalized nearest neighbour.

// Negated comparisons are deliberate (they reject NaN), and pixel loops
// index several buffers by coordinate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod corpus;
pub mod descriptor;
pub mod detail;
pub mod engine;
pub mod error;
pub mod imagecore;
pub mod mapping;
pub mod motion;
pub mod osc;
pub mod sharpness;
pub mod warmness;

pub use descriptor::{analyze_frame, AnalysisParams, DescriptorFrame};
pub use error::{Error, Result};
pub use imagecore::{Frame, Rgb};
