use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::osc::SenderStats;

const BUCKET_MS: f64 = 0.05;
const BUCKETS: usize = 20_000; // up to 1 s, then an overflow bucket

/// Fixed-resolution latency histogram (50 µs buckets up to one second).
#[derive(Debug, Clone)]
pub struct LatencyHistogram {
    counts: Vec<u64>,
    total: u64,
    max_ms: f64,
    sum_ms: f64,
}

impl Default for LatencyHistogram {
    fn default() -> Self {
        LatencyHistogram {
            counts: vec![0; BUCKETS + 1],
            total: 0,
            max_ms: 0.0,
            sum_ms: 0.0,
        }
    }
}

impl LatencyHistogram {
    pub fn record(&mut self, d: Duration) {
        let ms = d.as_secs_f64() * 1e3;
        let b = ((ms / BUCKET_MS) as usize).min(BUCKETS);
        self.counts[b] += 1;
        self.total += 1;
        self.max_ms = self.max_ms.max(ms);
        self.sum_ms += ms;
    }

    pub fn count(&self) -> u64 {
        self.total
    }

    pub fn mean_ms(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.sum_ms / self.total as f64
        }
    }

    pub fn max_ms(&self) -> f64 {
        self.max_ms
    }

    /// Upper edge of the bucket holding quantile `q` in `[0, 1]`.
    pub fn quantile_ms(&self, q: f64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let rank = ((q.clamp(0.0, 1.0) * self.total as f64).ceil() as u64).max(1);
        let mut seen = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            seen += c;
            if seen >= rank {
                return if i == BUCKETS {
                    self.max_ms
                } else {
                    ((i + 1) as f64 * BUCKET_MS).min(self.max_ms)
                };
            }
        }
        self.max_ms
    }
}

/// Counters shared between the ingestion and analysis threads.
#[derive(Debug, Default)]
pub struct PipelineMetrics {
    pub frames_read: AtomicU64,
    pub frames_processed: AtomicU64,
    pub frames_dropped: AtomicU64,
    pub frame_errors: AtomicU64,
    latency: Mutex<LatencyHistogram>,
    window: Mutex<Option<(Instant, Instant)>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub frames_read: u64,
    pub frames_processed: u64,
    pub frames_dropped: u64,
    pub frame_errors: u64,
    pub achieved_fps: f64,
    pub latency_mean_ms: f64,
    pub latency_p50_ms: f64,
    pub latency_p95_ms: f64,
    pub latency_max_ms: f64,
    pub osc: Vec<SenderStats>,
}

impl PipelineMetrics {
    /// `due` is when the frame was scheduled to enter the pipeline (its
    /// arrival time when unpaced); the fps window runs from the first
    /// processed frame's `due` to the last completion. Latency covers
    /// `started..finished` only.
    pub fn record_frame(&self, due: Instant, started: Instant, finished: Instant) {
        self.frames_processed.fetch_add(1, Ordering::Relaxed);
        self.latency
            .lock()
            .expect("metrics poisoned")
            .record(finished - started);
        let mut w = self.window.lock().expect("metrics poisoned");
        let first = w.map_or(due, |(first, _)| first);
        *w = Some((first, finished));
    }

    pub fn summary(&self, osc: Vec<SenderStats>) -> MetricsSummary {
        let lat = self.latency.lock().expect("metrics poisoned").clone();
        let processed = self.frames_processed.load(Ordering::Relaxed);
        let achieved_fps = match *self.window.lock().expect("metrics poisoned") {
            Some((first, last)) if processed > 1 && last > first => {
                (processed - 1) as f64 / (last - first).as_secs_f64()
            }
            _ => 0.0,
        };
        MetricsSummary {
            frames_read: self.frames_read.load(Ordering::Relaxed),
            frames_processed: processed,
            frames_dropped: self.frames_dropped.load(Ordering::Relaxed),
            frame_errors: self.frame_errors.load(Ordering::Relaxed),
            achieved_fps,
            latency_mean_ms: lat.mean_ms(),
            latency_p50_ms: lat.quantile_ms(0.5),
            latency_p95_ms: lat.quantile_ms(0.95),
            latency_max_ms: lat.max_ms(),
            osc,
        }
    }
}
