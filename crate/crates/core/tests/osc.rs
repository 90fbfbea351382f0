mod common;

use std::net::{SocketAddr, UdpSocket};
use std::sync::{mpsc, Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use arc_swap::ArcSwap;
use rand::Rng;

use common::rng;
use vivo::mapping::{MappingState, OutputTarget, RoutingMatrix, ScalerParams};
use vivo::osc::{
    decode, decode_packet, encode, encode_frame, proxy, Endpoint, OscArg, OscMessage, OscReceiver, OscSender,
};

const LOCAL: &str = "127.0.0.1:0";

fn local() -> SocketAddr {
    LOCAL.parse().unwrap()
}

fn endpoint(addr: SocketAddr) -> Endpoint {
    Endpoint::localhost(addr.port()).unwrap()
}

pub fn random_message(r: &mut impl Rng) -> OscMessage {
    let segs = r.gen_range(1..4);
    let address: String = (0..segs)
        .map(|_| {
            let len = r.gen_range(1..9);
            let s: String = (0..len).map(|_| r.gen_range(b'a'..=b'z') as char).collect();
            format!("/{s}")
        })
        .collect();
    let args = (0..r.gen_range(0..6))
        .map(|_| match r.gen_range(0..3) {
            0 => OscArg::Float(f32::from_bits(r.gen::<u32>() & 0x7f7f_ffff)),
            1 => OscArg::Int(r.gen()),
            _ => OscArg::String(
                (0..r.gen_range(0..7))
                    .map(|_| r.gen_range(b' '..=b'~') as char)
                    .collect(),
            ),
        })
        .collect();
    OscMessage::new(address, args)
}

#[test]
fn golden_warmness_packet() {
    let bytes = encode(&OscMessage::floats("/vivo/warmness", &[0.25])).unwrap();
    let expected: Vec<u8> = [
        &b"/vivo/warmness\0\0"[..],
        &b",f\0\0"[..],
        &[0x3E, 0x80, 0x00, 0x00][..],
    ]
    .concat();
    assert_eq!(bytes, expected);
    assert_eq!(bytes.len(), 24);
}

#[test]
fn golden_bundle() {
    let msgs = [
        OscMessage::floats("/a", &[1.0]),
        OscMessage::new("/b", vec![OscArg::Int(-2)]),
    ];
    let bytes = encode_frame(&msgs).unwrap();
    let mut expected = b"#bundle\0".to_vec();
    expected.extend_from_slice(&1u64.to_be_bytes());
    expected.extend_from_slice(&12u32.to_be_bytes());
    expected.extend_from_slice(b"/a\0\0,f\0\0\x3f\x80\0\0");
    expected.extend_from_slice(&12u32.to_be_bytes());
    expected.extend_from_slice(b"/b\0\0,i\0\0\xff\xff\xff\xfe");
    assert_eq!(bytes, expected);
    assert_eq!(decode_packet(&bytes).unwrap().into_messages(), msgs);
    // a single message is sent bare
    assert_eq!(encode_frame(&msgs[..1]).unwrap(), encode(&msgs[0]).unwrap());
}

#[test]
fn decode_inverts_encode() {
    let mut r = rng(40);
    for _ in 0..10_000 {
        let m = random_message(&mut r);
        let b = encode(&m).unwrap();
        assert_eq!(b.len() % 4, 0);
        assert_eq!(decode(&b).unwrap(), m);
    }
}

#[test]
fn malformed_input_is_rejected() {
    assert!(decode(&[0x2f, 0x61, 0x00]).is_err());
    assert!(decode(b"/a\0\0,x\0\0").is_err());
    assert!(decode(b"/a\0\0,f\0\0").is_err());
    assert!(decode(b"/a\0\0,s\0\0abcd").is_err());
    assert!(decode(b"noslash\0,\0\0\0").is_err());
    assert!(encode(&OscMessage::floats("no-slash", &[1.0])).is_err());
}

#[test]
fn loopback_delivers_identical_bytes() {
    let sock = UdpSocket::bind(local()).unwrap();
    sock.set_read_timeout(Some(Duration::from_secs(2))).unwrap();
    let sender = OscSender::new(&endpoint(sock.local_addr().unwrap())).unwrap();
    let msg = OscMessage::new(
        "/vivo/x",
        vec![OscArg::Float(0.5), OscArg::String("hi".into()), OscArg::Int(7)],
    );
    sender.send(&msg).unwrap();
    let mut buf = [0u8; 256];
    let n = sock.recv(&mut buf).unwrap();
    assert_eq!(&buf[..n], &encode(&msg).unwrap()[..]);
}

#[test]
fn sequential_sends_arrive_in_order_without_duplicates() {
    let (tx, rx) = mpsc::channel();
    let recv = OscReceiver::spawn(local(), move |m| {
        let _ = tx.send(m);
    })
    .unwrap();
    let sender = OscSender::new(&endpoint(recv.local_addr())).unwrap();
    for i in 0..1000 {
        sender.send(&OscMessage::new("/seq", vec![OscArg::Int(i)])).unwrap();
        if i % 50 == 0 {
            thread::sleep(Duration::from_millis(1));
        }
    }
    let stats = sender.close();
    assert_eq!(stats.sent + stats.dropped + stats.errors, 1000);
    thread::sleep(Duration::from_millis(200));
    let got: Vec<i32> = rx
        .try_iter()
        .map(|m| match m.args[0] {
            OscArg::Int(i) => i,
            _ => panic!("unexpected argument"),
        })
        .collect();
    assert!(got.len() <= 1000 && got.len() >= 900, "received {}", got.len());
    assert!(got.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn one_way_latency_at_100_messages_per_second() {
    let arrivals = Arc::new(Mutex::new(Vec::new()));
    let recv = {
        let arrivals = Arc::clone(&arrivals);
        OscReceiver::spawn(local(), move |m| {
            if let Some(OscArg::Int(i)) = m.args.first() {
                arrivals.lock().unwrap().push((*i as usize, Instant::now()));
            }
        })
        .unwrap()
    };
    let sender = OscSender::new(&endpoint(recv.local_addr())).unwrap();
    let mut sent = Vec::new();
    for i in 0..200 {
        sent.push(Instant::now());
        sender.send(&OscMessage::new("/lat", vec![OscArg::Int(i)])).unwrap();
        thread::sleep(Duration::from_millis(10));
    }
    thread::sleep(Duration::from_millis(100));
    let mut lat: Vec<f64> = arrivals
        .lock()
        .unwrap()
        .iter()
        .map(|(i, t)| (*t - sent[*i]).as_secs_f64() * 1e3)
        .collect();
    assert!(lat.len() >= 190);
    lat.sort_by(f64::total_cmp);
    let p95 = lat[(lat.len() * 95).div_ceil(100) - 1];
    assert!(p95 < 10.0, "p95 {p95} ms");
}

#[test]
fn unreachable_target_does_not_stop_the_sender() {
    // nothing listens on this port
    let port = UdpSocket::bind(local()).unwrap().local_addr().unwrap().port();
    let sender = OscSender::new(&Endpoint::localhost(port).unwrap()).unwrap();
    for i in 0..100 {
        sender.send(&OscMessage::new("/x", vec![OscArg::Int(i)])).unwrap();
    }
    let s = sender.close();
    assert_eq!(s.sent + s.dropped + s.errors, 100);
}

#[test]
fn receiver_counts_malformed_packets() {
    let recv = OscReceiver::spawn(local(), |_| {}).unwrap();
    let sock = UdpSocket::bind(local()).unwrap();
    sock.send_to(&[1, 2, 3], recv.local_addr()).unwrap();
    sock.send_to(&encode(&OscMessage::floats("/ok", &[1.0])).unwrap(), recv.local_addr())
        .unwrap();
    thread::sleep(Duration::from_millis(200));
    let s = recv.stop();
    assert_eq!((s.packets, s.messages, s.malformed), (2, 1, 1));
}

fn proxy_mapping() -> MappingState {
    MappingState {
        inputs: vec![vivo::mapping::InputRoute {
            descriptor: "warmth".into(),
            address: "/vivo/warmness".into(),
            scaler: ScalerParams::new(0.0, 1.0, 0.0, 100.0, 1.0).unwrap(),
        }],
        outputs: vec![OutputTarget {
            name: "attack".into(),
            address: "/synth/attack".into(),
        }],
        matrix: RoutingMatrix::identity(1),
    }
}

fn run_proxy(mapping: MappingState, input: &[OscMessage]) -> Vec<OscMessage> {
    let (tx, rx) = mpsc::channel();
    let sink = OscReceiver::spawn(local(), move |m| {
        let _ = tx.send(m);
    })
    .unwrap();
    let p = proxy(
        local(),
        Arc::new(ArcSwap::from_pointee(mapping)),
        &endpoint(sink.local_addr()),
    )
    .unwrap();
    let feed = OscSender::new(&endpoint(p.local_addr())).unwrap();
    for m in input {
        feed.send(m).unwrap();
        thread::sleep(Duration::from_millis(5));
    }
    let mut out = Vec::new();
    while let Ok(m) = rx.recv_timeout(Duration::from_millis(500)) {
        out.push(m);
        if out.len() == input.len() {
            break;
        }
    }
    out
}

#[test]
fn proxy_scales_and_renames() {
    let out = run_proxy(proxy_mapping(), &[OscMessage::floats("/vivo/warmness", &[0.5])]);
    assert_eq!(out, vec![OscMessage::floats("/synth/attack", &[50.0])]);
}

#[test]
fn proxy_with_identity_mapping_echoes_values() {
    let m = MappingState::identity(&[("warmth", "/in")]);
    let out = run_proxy(m, &[OscMessage::floats("/in", &[0.375])]);
    assert_eq!(out[0].args, vec![OscArg::Float(0.375)]);
}

#[test]
fn proxy_forwards_unmapped_addresses() {
    let odd = OscMessage::new("/other", vec![OscArg::String("x".into()), OscArg::Int(3)]);
    let out = run_proxy(proxy_mapping(), std::slice::from_ref(&odd));
    assert_eq!(out, vec![odd]);
}

#[test]
fn proxy_refuses_to_feed_itself() {
    let sock = UdpSocket::bind(local()).unwrap();
    let port = sock.local_addr().unwrap().port();
    drop(sock);
    let listen: SocketAddr = format!("127.0.0.1:{port}").parse().unwrap();
    let r = proxy(
        listen,
        Arc::new(ArcSwap::from_pointee(proxy_mapping())),
        &Endpoint::localhost(port).unwrap(),
    );
    assert!(r.is_err());
}
