//! Live mapping state shared by the frame loop and the control API.
//!
//! Readers load a complete `MappingState` snapshot; every edit, preset
//! recall step or ramp tick stores a whole new snapshot.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use arc_swap::ArcSwap;
use tokio::sync::watch;

use crate::descriptor::DescriptorFrame;
use crate::error::{Error, Result};
use crate::mapping::{ramp_progress, recall_preset, MappingFile, MappingState, Preset};

use super::pipeline::check_descriptors;

const RAMP_TICK: Duration = Duration::from_millis(5);

pub struct ControlState {
    mapping: Arc<ArcSwap<MappingState>>,
    presets: Mutex<Vec<Preset>>,
    // Bumped by every edit or recall; a running ramp stops when it changes.
    generation: AtomicU64,
    monitor: watch::Sender<Option<Arc<DescriptorFrame>>>,
}

impl ControlState {
    pub fn new(file: MappingFile) -> Result<Arc<Self>> {
        check_descriptors(&file.mapping)?;
        let (monitor, _) = watch::channel(None);
        Ok(Arc::new(ControlState {
            mapping: Arc::new(ArcSwap::from_pointee(file.mapping)),
            presets: Mutex::new(file.presets),
            generation: AtomicU64::new(0),
            monitor,
        }))
    }

    pub fn snapshot(&self) -> Arc<MappingState> {
        self.mapping.load_full()
    }

    /// The swap cell itself, for components such as the OSC proxy that read
    /// snapshots directly.
    pub fn mapping_cell(&self) -> Arc<ArcSwap<MappingState>> {
        Arc::clone(&self.mapping)
    }

    /// Replace the whole mapping. Cancels any running ramp.
    pub fn set_mapping(&self, m: MappingState) -> Result<Arc<MappingState>> {
        check_descriptors(&m)?;
        self.generation.fetch_add(1, Ordering::SeqCst);
        let m = Arc::new(m);
        self.mapping.store(Arc::clone(&m));
        Ok(m)
    }

    pub fn presets(&self) -> Vec<Preset> {
        self.presets.lock().expect("presets poisoned").clone()
    }

    /// Insert or replace a preset by id.
    pub fn store_preset(&self, preset: Preset) -> Result<()> {
        preset.validate()?;
        let mut presets = self.presets.lock().expect("presets poisoned");
        match presets.iter_mut().find(|p| p.id == preset.id) {
            Some(p) => *p = preset,
            None => presets.push(preset),
        }
        Ok(())
    }

    /// Save the current mapping as a preset.
    pub fn capture_preset(&self, id: &str) -> Result<Preset> {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        let p = Preset::capture(id, &self.snapshot(), now);
        self.store_preset(p.clone())?;
        Ok(p)
    }

    pub fn preset(&self, id: &str) -> Option<Preset> {
        self.presets
            .lock()
            .expect("presets poisoned")
            .iter()
            .find(|p| p.id == id)
            .cloned()
    }

    pub fn to_file(&self) -> MappingFile {
        MappingFile {
            mapping: (*self.snapshot()).clone(),
            presets: self.presets(),
        }
    }

    /// Start moving towards preset `id` over `ramp_ms`. A zero ramp applies
    /// the preset before returning; otherwise a background ramp stores an
    /// interpolated snapshot every few milliseconds.
    pub fn recall(self: &Arc<Self>, id: &str, ramp_ms: f64) -> Result<()> {
        let target = self
            .preset(id)
            .ok_or_else(|| Error::IncompatiblePreset(format!("no preset named '{id}'")))?;
        let from = self.snapshot();
        // Validate compatibility up front so the caller sees the error.
        let done = recall_preset(&from, &target, 1.0)?;
        let gen = self.generation.fetch_add(1, Ordering::SeqCst) + 1;
        if ramp_ms <= 0.0 {
            self.mapping.store(Arc::new(done));
            return Ok(());
        }
        let this = Arc::clone(self);
        let start = Instant::now();
        thread::Builder::new().name("preset-ramp".into()).spawn(move || loop {
            if this.generation.load(Ordering::SeqCst) != gen {
                return;
            }
            let t = ramp_progress(start.elapsed().as_secs_f64() * 1e3, ramp_ms);
            match recall_preset(&from, &target, t) {
                Ok(m) => this.mapping.store(Arc::new(m)),
                Err(_) => return,
            }
            if t >= 1.0 {
                return;
            }
            thread::sleep(RAMP_TICK);
        })?;
        Ok(())
    }

    pub fn publish(&self, d: DescriptorFrame) {
        self.monitor.send_replace(Some(Arc::new(d)));
    }

    pub fn latest(&self) -> Option<Arc<DescriptorFrame>> {
        self.monitor.borrow().clone()
    }

    pub fn subscribe(&self) -> watch::Receiver<Option<Arc<DescriptorFrame>>> {
        self.monitor.subscribe()
    }
}
