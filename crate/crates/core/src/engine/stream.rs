//! Live mode: a reader thread feeding a one-slot mailbox, an analysis
//! thread emitting OSC, and the optional control API on a small tokio
//! runtime.
//!
//! With pacing on, the reader releases frames at the input rate and a frame
//! that arrives while the previous one is still waiting replaces it (newest
//! wins, counted as dropped). With pacing off the reader waits for the slot
//! to empty, so replaying a file is lossless and deterministic.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, error, info, warn};

use super::api::{self, ApiState};
use super::config::EngineConfig;
use super::control::ControlState;
use super::metrics::{MetricsSummary, PipelineMetrics};
use super::pipeline::Pipeline;
use crate::error::{Error, Result};
use crate::imagecore::Frame;
use crate::osc::{encode_frame, OscSender};

const WAIT_SLICE: Duration = Duration::from_millis(50);

/// Receives every encoded frame datagram, in emission order.
pub type Tap = Box<dyn FnMut(&[u8]) + Send>;

// A frame with the instant it was due to enter the pipeline.
type Due = (Frame, Instant);

#[derive(Default)]
struct Slot {
    frame: Option<Due>,
    eof: bool,
}

#[derive(Default)]
struct Mailbox {
    slot: Mutex<Slot>,
    cv: Condvar,
}

impl Mailbox {
    /// Newest wins. Returns true when a waiting frame was replaced.
    fn replace(&self, f: Due) -> bool {
        let mut s = self.slot.lock().expect("mailbox poisoned");
        let dropped = s.frame.replace(f).is_some();
        self.cv.notify_all();
        dropped
    }

    /// Wait for the slot to empty, then fill it.
    fn put(&self, f: Due, shutdown: &AtomicBool) {
        let mut s = self.slot.lock().expect("mailbox poisoned");
        while s.frame.is_some() && !shutdown.load(Ordering::SeqCst) {
            s = self.cv.wait_timeout(s, WAIT_SLICE).expect("mailbox poisoned").0;
        }
        s.frame = Some(f);
        self.cv.notify_all();
    }

    fn close(&self) {
        self.slot.lock().expect("mailbox poisoned").eof = true;
        self.cv.notify_all();
    }

    /// Next frame, or None once the input has ended or shutdown is requested.
    fn take(&self, shutdown: &AtomicBool) -> Option<Due> {
        let mut s = self.slot.lock().expect("mailbox poisoned");
        loop {
            if let Some(f) = s.frame.take() {
                self.cv.notify_all();
                return Some(f);
            }
            if s.eof || shutdown.load(Ordering::SeqCst) {
                return None;
            }
            s = self.cv.wait_timeout(s, WAIT_SLICE).expect("mailbox poisoned").0;
        }
    }
}

#[derive(Default)]
pub struct StreamOptions {
    pub tap: Option<Tap>,
    /// Use an existing control state (shared mapping and presets) instead of
    /// building one from the config.
    pub control: Option<Arc<ControlState>>,
}

/// A running stream. Dropping it stops the engine.
pub struct StreamHandle {
    shutdown: Arc<AtomicBool>,
    control: Arc<ControlState>,
    metrics: Arc<PipelineMetrics>,
    senders: Arc<Vec<OscSender>>,
    api_addr: Option<SocketAddr>,
    api: Option<(tokio::runtime::Runtime, tokio::sync::oneshot::Sender<()>)>,
    worker: Option<JoinHandle<()>>,
}

impl StreamHandle {
    pub fn api_addr(&self) -> Option<SocketAddr> {
        self.api_addr
    }

    pub fn control(&self) -> &Arc<ControlState> {
        &self.control
    }

    pub fn metrics(&self) -> MetricsSummary {
        self.metrics.summary(self.senders.iter().map(|s| s.stats()).collect())
    }

    pub fn is_finished(&self) -> bool {
        self.worker.as_ref().is_none_or(|w| w.is_finished())
    }

    /// A flag that stops the stream when set, e.g. from a signal handler.
    pub fn shutdown_flag(&self) -> Arc<AtomicBool> {
        Arc::clone(&self.shutdown)
    }

    /// Block until the input ends (or shutdown is requested), then flush and
    /// return the final metrics.
    pub fn wait(mut self) -> MetricsSummary {
        self.finish()
    }

    /// Stop now, flush queued OSC and return the final metrics.
    pub fn stop(mut self) -> MetricsSummary {
        self.shutdown.store(true, Ordering::SeqCst);
        self.finish()
    }

    fn finish(&mut self) -> MetricsSummary {
        if let Some(w) = self.worker.take() {
            if w.join().is_err() {
                error!("analysis thread panicked");
            }
        }
        if let Some((rt, stop)) = self.api.take() {
            let _ = stop.send(());
            rt.shutdown_timeout(Duration::from_millis(500));
        }
        let osc = match Arc::try_unwrap(std::mem::take(&mut self.senders)) {
            Ok(senders) => senders.into_iter().map(OscSender::close).collect(),
            Err(shared) => shared.iter().map(|s| s.stats()).collect(),
        };
        self.metrics.summary(osc)
    }
}

impl Drop for StreamHandle {
    fn drop(&mut self) {
        if self.worker.is_some() || self.api.is_some() {
            self.shutdown.store(true, Ordering::SeqCst);
            self.finish();
        }
    }
}

/// Start the engine on `frames`. Returns once the senders and the control
/// API are up; configuration problems surface here as errors.
pub fn run_stream<I>(cfg: &EngineConfig, frames: I, opts: StreamOptions) -> Result<StreamHandle>
where
    I: IntoIterator<Item = Result<Frame>>,
    I::IntoIter: Send + 'static,
{
    cfg.validate()?;
    let control = match opts.control {
        Some(c) => c,
        None => ControlState::new(cfg.load_mapping()?)?,
    };
    let mut pipeline = Pipeline::new(cfg.analysis.clone(), cfg.osc.raw)?;
    let senders: Arc<Vec<OscSender>> = Arc::new(
        cfg.osc
            .targets
            .iter()
            .map(|t| OscSender::with_capacity(t, cfg.osc.queue_capacity))
            .collect::<Result<_>>()?,
    );
    if senders.is_empty() {
        warn!("no OSC targets configured; descriptors are computed but not sent");
    }
    let metrics = Arc::new(PipelineMetrics::default());
    let shutdown = Arc::new(AtomicBool::new(false));

    let (api_addr, api) = match cfg.api {
        Some(addr) => {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .thread_name("vivo-api")
                .enable_all()
                .build()?;
            let (tx, rx) = tokio::sync::oneshot::channel::<()>();
            let stats_senders = Arc::clone(&senders);
            let state = ApiState {
                control: Arc::clone(&control),
                metrics: Arc::clone(&metrics),
                osc_stats: Arc::new(move || stats_senders.iter().map(|s| s.stats()).collect()),
                monitor_hz: cfg.monitor_hz,
            };
            let (bound, _task) = rt
                .block_on(api::serve(addr, state, async {
                    let _ = rx.await;
                }))
                .map_err(|e| Error::Config(format!("cannot bind control API on {addr}: {e}")))?;
            info!("control API on http://{bound}");
            (Some(bound), Some((rt, tx)))
        }
        None => (None, None),
    };

    let mailbox = Arc::new(Mailbox::default());
    let pace = cfg.input.pace;
    let period = Duration::from_secs_f64(1.0 / cfg.input.fps);
    {
        let mailbox = Arc::clone(&mailbox);
        let metrics = Arc::clone(&metrics);
        let shutdown = Arc::clone(&shutdown);
        let mut frames = frames.into_iter();
        // Detached: a blocking read on a pipe cannot be interrupted.
        thread::Builder::new().name("vivo-ingest".into()).spawn(move || {
            let start = Instant::now();
            let mut n: u32 = 0;
            while !shutdown.load(Ordering::SeqCst) {
                let Some(next) = frames.next() else { break };
                let frame = match next {
                    Ok(f) => f,
                    Err(e) => {
                        error!("input: {e}");
                        metrics.frame_errors.fetch_add(1, Ordering::Relaxed);
                        break;
                    }
                };
                metrics.frames_read.fetch_add(1, Ordering::Relaxed);
                if pace {
                    let due = start + period * n;
                    let now = Instant::now();
                    if due > now {
                        thread::sleep(due - now);
                    }
                    if mailbox.replace((frame, due)) {
                        metrics.frames_dropped.fetch_add(1, Ordering::Relaxed);
                    }
                } else {
                    mailbox.put((frame, Instant::now()), &shutdown);
                }
                n = n.wrapping_add(1);
            }
            mailbox.close();
            debug!("ingest finished after {n} frames");
        })?;
    }

    let worker = {
        let control = Arc::clone(&control);
        let metrics = Arc::clone(&metrics);
        let senders = Arc::clone(&senders);
        let shutdown = Arc::clone(&shutdown);
        let mut tap = opts.tap;
        thread::Builder::new().name("vivo-analysis".into()).spawn(move || {
            while let Some((frame, due)) = mailbox.take(&shutdown) {
                let started = Instant::now();
                // one snapshot per frame: edits land on the next frame whole
                let mapping = control.snapshot();
                match pipeline
                    .process(frame, &mapping)
                    .and_then(|(d, msgs)| Ok((d, encode_frame(&msgs)?)))
                {
                    Ok((d, bytes)) => {
                        if let Some(tap) = tap.as_mut() {
                            tap(&bytes);
                        }
                        for s in senders.iter() {
                            s.send_bytes(bytes.clone());
                        }
                        metrics.record_frame(due, started, Instant::now());
                        control.publish(d);
                    }
                    Err(e) => {
                        warn!("frame skipped: {e}");
                        metrics.frame_errors.fetch_add(1, Ordering::Relaxed);
                    }
                }
            }
        })?
    };

    Ok(StreamHandle {
        shutdown,
        control,
        metrics,
        senders,
        api_addr,
        api,
        worker: Some(worker),
    })
}
