//! Run the live engine on a synthetic clip with the control API enabled,
//! print a few monitored frames and the final metrics.
//!
//! cargo run --release --example stream_engine

use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use vivo::engine::{run_stream, EngineConfig, StreamOptions};
use vivo::imagecore::{Frame, Rgb};
use vivo::osc::{Endpoint, OscReceiver};

fn main() -> vivo::Result<()> {
    let (tx, rx) = mpsc::channel();
    let synth = OscReceiver::spawn("127.0.0.1:0".parse().unwrap(), move |m| {
        let _ = tx.send(m);
    })?;

    let mut cfg = EngineConfig::default();
    cfg.input.width = 160;
    cfg.input.height = 120;
    cfg.osc.targets = vec![Endpoint::localhost(synth.local_addr().port())?];
    cfg.api = Some("127.0.0.1:0".parse().unwrap());

    let frames = (0..90).map(|i| {
        Frame::from_fn(160, 120, move |x, y| {
            let t = i as f64 / 30.0;
            Rgb::new(0.5 + 0.5 * (x as f64 / 10.0 + 4.0 * t).sin(), y as f64 / 119.0, t / 3.0)
        })
    });
    let h = run_stream(&cfg, frames, StreamOptions::default())?;
    println!("control API on http://{}/api/mapping", h.api_addr().unwrap());

    let mut monitor = h.control().subscribe();
    for _ in 0..3 {
        thread::sleep(Duration::from_millis(500));
        if let Some(d) = monitor.borrow_and_update().as_ref() {
            println!(
                "frame {:>3}  warmth {:+.3}  sharpness {:.3}  motion {:.3}",
                d.frame_index, d.warmth, d.sharpness, d.motion.global
            );
        }
    }
    let m = h.wait();
    println!(
        "{} frames, {:.1} fps, p95 {:.2} ms",
        m.frames_processed, m.achieved_fps, m.latency_p95_ms
    );
    println!("{} OSC messages reached the synth", rx.try_iter().count());
    synth.stop();
    Ok(())
}
