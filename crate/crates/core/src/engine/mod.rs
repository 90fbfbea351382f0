//! The running engine: configuration, frame ingestion, the per-frame
//! pipeline, live streaming with its control API, and offline analysis.

mod analyze;
pub mod api;
pub mod config;
pub mod control;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod stream;

pub use analyze::analyze_file;
pub use config::{EngineConfig, InputSpec, OscConfig, PixelFormat};
pub use control::ControlState;
pub use ingest::{open_frames, write_ppm, write_rgb24, PpmFrames, RawFrames};
pub use metrics::{LatencyHistogram, MetricsSummary, PipelineMetrics};
pub use pipeline::{check_descriptors, mapped_messages, process_frame, Pipeline};
pub use stream::{run_stream, StreamHandle, StreamOptions, Tap};
