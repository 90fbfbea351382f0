mod common;

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use futures::StreamExt;
use rand::Rng;

use common::{random_frame, rng};
use vivo::corpus::DescriptorTable;
use vivo::engine::{analyze_file, run_stream, write_rgb24, EngineConfig, RawFrames, StreamHandle, StreamOptions};
use vivo::imagecore::{Frame, Rgb};
use vivo::mapping::{MappingState, RoutingMatrix};
use vivo::{analyze_frame, AnalysisParams};

fn config(w: usize, h: usize, fps: f64, pace: bool) -> EngineConfig {
    let mut c = EngineConfig::default();
    c.input.width = w;
    c.input.height = h;
    c.input.fps = fps;
    c.input.pace = pace;
    c
}

fn moving_frames(w: usize, h: usize, n: usize) -> impl Iterator<Item = vivo::Result<Frame>> + Send {
    (0..n).map(move |i| {
        Frame::from_fn(w, h, |x, y| {
            let t = i as f64 * 0.3;
            Rgb::new(
                0.5 + 0.4 * ((x as f64 * 0.2 + t).sin()),
                0.5 + 0.4 * ((y as f64 * 0.15 - t).cos()),
                ((x + y + i) % 11) as f64 / 10.0,
            )
        })
    })
}

#[test]
fn paced_stream_never_outruns_the_input_rate() {
    let h = run_stream(
        &config(160, 120, 30.0, true),
        moving_frames(160, 120, 100),
        StreamOptions::default(),
    )
    .unwrap();
    let m = h.wait();
    assert_eq!(m.frames_read, 100);
    assert!(m.frames_processed <= 100);
    assert_eq!(m.frames_processed + m.frames_dropped + m.frame_errors, m.frames_read);
    assert!(m.achieved_fps <= 30.0 + 1e-9, "fps {}", m.achieved_fps);
    assert!(m.achieved_fps > 20.0, "fps {}", m.achieved_fps);
}

fn tapped_run(frames: Vec<Frame>) -> Vec<Vec<u8>> {
    let out = Arc::new(Mutex::new(Vec::new()));
    let sink = Arc::clone(&out);
    let opts = StreamOptions {
        tap: Some(Box::new(move |b: &[u8]| sink.lock().unwrap().push(b.to_vec()))),
        control: None,
    };
    let (w, h) = (frames[0].width(), frames[0].height());
    run_stream(&config(w, h, 30.0, false), frames.into_iter().map(Ok), opts)
        .unwrap()
        .wait();
    Arc::try_unwrap(out).unwrap().into_inner().unwrap()
}

#[test]
fn replay_is_deterministic() {
    let mut r = rng(70);
    let frames: Vec<Frame> = (0..40).map(|_| random_frame(&mut r, 48, 32)).collect();
    let a = tapped_run(frames.clone());
    let b = tapped_run(frames);
    assert_eq!(a.len(), 40);
    assert_eq!(a, b);
}

#[test]
fn analyze_file_writes_one_row_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("clip.rgb");
    let out = dir.path().join("clip.csv");
    let cfg = config(40, 30, 25.0, false);
    let mut bytes = Vec::new();
    for f in moving_frames(40, 30, 10) {
        write_rgb24(&mut bytes, &f.unwrap()).unwrap();
    }
    std::fs::write(&input, &bytes).unwrap();

    let table = analyze_file(&cfg, &input, &out).unwrap();
    assert_eq!(table.len(), 10);
    assert_eq!(DescriptorTable::load(&out).unwrap(), table);

    // the stored values are the per-frame analysis of the decoded frames
    let decoded: Vec<Frame> = RawFrames::new(&bytes[..], cfg.input).map(Result::unwrap).collect();
    let params = AnalysisParams::default();
    for (i, row) in table.rows().iter().enumerate() {
        let prev = i.checked_sub(1).map(|p| &decoded[p]);
        let d = analyze_frame(&decoded[i], prev, &params, i as u64).unwrap();
        assert_eq!(row.values, d.scalar_values());
        assert_eq!(row.time_ms, i as f64 * 40.0);
    }
}

// Minimal HTTP/1.1 client: one request per connection.
fn http(addr: SocketAddr, method: &str, path: &str, body: Option<&str>) -> (u16, String) {
    let mut s = TcpStream::connect(addr).unwrap();
    s.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
    let body = body.unwrap_or("");
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut resp = String::new();
    s.read_to_string(&mut resp).unwrap();
    let status = resp.split(' ').nth(1).unwrap().parse().unwrap();
    let body = resp
        .split_once("\r\n\r\n")
        .map(|(_, b)| b.to_string())
        .unwrap_or_default();
    (status, body)
}

fn live_engine() -> StreamHandle {
    let mut cfg = config(64, 48, 30.0, true);
    cfg.api = Some("127.0.0.1:0".parse().unwrap());
    let endless = (0u64..).map(|i| Frame::from_fn(64, 48, move |x, _| Rgb::gray(((x as u64 + i) % 9) as f64 / 8.0)));
    run_stream(&cfg, endless, StreamOptions::default()).unwrap()
}

#[test]
fn mapping_get_put_round_trip() {
    let h = live_engine();
    let addr = h.api_addr().unwrap();
    let (status, original) = http(addr, "GET", "/api/mapping", None);
    assert_eq!(status, 200);
    assert_eq!(http(addr, "PUT", "/api/mapping", Some(&original)).0, 200);
    assert_eq!(http(addr, "GET", "/api/mapping", None).1, original);

    // toggle a route on and off again
    let mut m: MappingState = serde_json::from_str(&original).unwrap();
    let before = m.matrix.get(0, 1);
    m.matrix.set(0, 1, 1.0 - before).unwrap();
    let (status, _) = http(addr, "PUT", "/api/mapping", Some(&serde_json::to_string(&m).unwrap()));
    assert_eq!(status, 200);
    assert_eq!(h.control().snapshot().matrix.get(0, 1), 1.0 - before);
    m.matrix.set(0, 1, before).unwrap();
    http(addr, "PUT", "/api/mapping", Some(&serde_json::to_string(&m).unwrap()));
    assert_eq!(http(addr, "GET", "/api/mapping", None).1, original);
    h.stop();
}

#[test]
fn api_reports_client_errors() {
    let h = live_engine();
    let addr = h.api_addr().unwrap();
    assert_eq!(http(addr, "PUT", "/api/mapping", Some(r#"{"inputs": []}"#)).0, 422);
    let mut m = (*h.control().snapshot()).clone();
    m.matrix = RoutingMatrix::identity(2);
    assert_eq!(
        http(addr, "PUT", "/api/mapping", Some(&serde_json::to_string(&m).unwrap())).0,
        422
    );
    assert_eq!(http(addr, "POST", "/api/presets/nope/recall?ramp_ms=0", None).0, 404);
    assert_eq!(
        http(addr, "POST", "/api/presets", Some(r#"{"id": "x", "matrix": [[1.0]]}"#)).0,
        422
    );

    let small = r#"{"id": "small", "matrix": [[1.0]], "scalers": [{"in_min": 0, "in_max": 1, "out_min": 0, "out_max": 1, "exponent": 1}]}"#;
    assert_eq!(http(addr, "POST", "/api/presets", Some(small)).0, 201);
    assert_eq!(http(addr, "POST", "/api/presets/small/recall", None).0, 409);

    let (status, body) = http(addr, "GET", "/api/metrics", None);
    assert_eq!(status, 200);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert!(v["frames_read"].as_u64().is_some());
    h.stop();
}

#[test]
fn preset_ramp_reaches_the_midpoint_halfway() {
    let h = live_engine();
    let addr = h.api_addr().unwrap();
    let current = h.control().snapshot();
    let rows = current
        .matrix
        .to_rows()
        .iter()
        .map(|r| r.iter().map(|g| 1.0 - g).collect())
        .collect();
    let preset = serde_json::json!({
        "id": "flip",
        "matrix": RoutingMatrix::from_rows(rows).unwrap(),
        "scalers": current.scalers(),
    });
    assert_eq!(http(addr, "POST", "/api/presets", Some(&preset.to_string())).0, 201);

    let (a, b) = (current.matrix.get(0, 0), 1.0 - current.matrix.get(0, 0));
    let start = Instant::now();
    assert_eq!(http(addr, "POST", "/api/presets/flip/recall?ramp_ms=1000", None).0, 200);
    let mut crossed = None;
    while start.elapsed() < Duration::from_millis(1500) {
        let t0 = start.elapsed();
        let (_, body) = http(addr, "GET", "/api/mapping", None);
        let m: MappingState = serde_json::from_str(&body).unwrap();
        let progress = (m.matrix.get(0, 0) - a) / (b - a);
        if progress >= 0.5 {
            crossed = Some((t0 + start.elapsed()) / 2);
            break;
        }
        thread::sleep(Duration::from_millis(10));
    }
    let at = crossed.expect("ramp never reached the midpoint").as_secs_f64() * 1e3;
    assert!((400.0..=600.0).contains(&at), "midpoint at {at} ms");
    thread::sleep(Duration::from_millis(600));
    assert_eq!(h.control().snapshot().matrix.get(0, 0), b);
    h.stop();
}

#[test]
fn monitor_streams_descriptor_frames() {
    let h = live_engine();
    let url = format!("ws://{}/api/monitor", h.api_addr().unwrap());
    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap();
    let frames = rt.block_on(async {
        let (mut ws, _) = tokio_tungstenite::connect_async(url).await.unwrap();
        let mut got = Vec::new();
        let window = tokio::time::sleep(Duration::from_millis(1500));
        tokio::pin!(window);
        loop {
            tokio::select! {
                _ = &mut window => break,
                msg = ws.next() => match msg {
                    Some(Ok(m)) if m.is_text() => got.push(m.into_text().unwrap()),
                    Some(Ok(_)) => {}
                    _ => break,
                },
            }
        }
        got
    });
    let rate = frames.len() as f64 / 1.5;
    assert!(rate >= 10.0, "monitor rate {rate} Hz");
    let indices: Vec<u64> = frames
        .iter()
        .map(|t| {
            serde_json::from_str::<serde_json::Value>(t).unwrap()["frame_index"]
                .as_u64()
                .unwrap()
        })
        .collect();
    assert!(indices.windows(2).all(|w| w[0] < w[1]));
    h.stop();
}

#[test]
fn bind_failure_is_a_config_error() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let mut cfg = config(32, 24, 30.0, true);
    cfg.api = Some(taken.local_addr().unwrap());
    let r = run_stream(&cfg, std::iter::empty(), StreamOptions::default());
    assert!(matches!(r, Err(vivo::Error::Config(_))));
}

#[test]
fn random_sizes_stream_without_errors() {
    let mut r = rng(71);
    let (w, h) = (r.gen_range(16..64), r.gen_range(16..64));
    let frames: Vec<Frame> = (0..8).map(|_| random_frame(&mut r, w, h)).collect();
    assert_eq!(tapped_run(frames).len(), 8);
}
