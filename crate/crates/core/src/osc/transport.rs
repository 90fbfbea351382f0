//! UDP transport. Sending goes through a bounded queue drained by a
//! background thread so the analysis loop never blocks on the network.

use std::collections::VecDeque;
use std::fmt;
use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::codec::{decode_packet, encode, encode_frame, OscMessage};
use crate::error::{Error, Result};

pub const DEFAULT_QUEUE_CAPACITY: usize = 256;
const MAX_DATAGRAM: usize = 65_507;
const POLL: Duration = Duration::from_millis(20);

/// `host:port` pair. The host may be an IP literal or a resolvable name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Endpoint {
    pub host: String,
    pub port: u16,
}

impl Endpoint {
    pub fn new(host: impl Into<String>, port: u16) -> Result<Self> {
        if port == 0 {
            return Err(Error::Config("port must be in 1..=65535".into()));
        }
        Ok(Endpoint {
            host: host.into(),
            port,
        })
    }

    pub fn localhost(port: u16) -> Result<Self> {
        Self::new("127.0.0.1", port)
    }

    pub fn resolve(&self) -> Result<SocketAddr> {
        (self.host.as_str(), self.port)
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| Error::Config(format!("cannot resolve {self}")))
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.host.contains(':') {
            write!(f, "[{}]:{}", self.host, self.port)
        } else {
            write!(f, "{}:{}", self.host, self.port)
        }
    }
}

impl FromStr for Endpoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (host, port) = s
            .rsplit_once(':')
            .ok_or_else(|| Error::Config(format!("expected host:port, got {s:?}")))?;
        let host = host.trim_start_matches('[').trim_end_matches(']');
        if host.is_empty() {
            return Err(Error::Config(format!("missing host in {s:?}")));
        }
        let port: u16 = port.parse().map_err(|_| Error::Config(format!("bad port in {s:?}")))?;
        Endpoint::new(host, port)
    }
}

impl TryFrom<String> for Endpoint {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Endpoint> for String {
    fn from(e: Endpoint) -> Self {
        e.to_string()
    }
}

#[derive(Debug, Default)]
struct Counters {
    enqueued: AtomicU64,
    sent: AtomicU64,
    dropped: AtomicU64,
    errors: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SenderStats {
    /// Datagrams handed to the socket.
    pub sent: u64,
    /// Datagrams discarded because the queue was full.
    pub dropped: u64,
    /// Socket errors (unreachable host, ...), logged and skipped.
    pub errors: u64,
    pub queue_depth: usize,
}

/// Acknowledgement of an enqueued datagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SendAck {
    /// Per-sender monotone sequence number, starting at 1.
    pub sequence: u64,
}

struct Queue {
    items: Mutex<(VecDeque<Vec<u8>>, bool)>,
    ready: Condvar,
    capacity: usize,
}

/// Fire-and-forget OSC sender with a bounded drop-oldest queue.
pub struct OscSender {
    target: SocketAddr,
    queue: Arc<Queue>,
    counters: Arc<Counters>,
    worker: Option<JoinHandle<()>>,
}

impl OscSender {
    pub fn new(target: &Endpoint) -> Result<Self> {
        Self::with_capacity(target, DEFAULT_QUEUE_CAPACITY)
    }

    pub fn with_capacity(target: &Endpoint, capacity: usize) -> Result<Self> {
        let addr = target.resolve()?;
        let bind: SocketAddr = if addr.is_ipv4() {
            "0.0.0.0:0".parse().expect("literal")
        } else {
            "[::]:0".parse().expect("literal")
        };
        let socket = UdpSocket::bind(bind)?;
        let queue = Arc::new(Queue {
            items: Mutex::new((VecDeque::with_capacity(capacity), false)),
            ready: Condvar::new(),
            capacity: capacity.max(1),
        });
        let counters = Arc::new(Counters::default());
        let worker = {
            let queue = Arc::clone(&queue);
            let counters = Arc::clone(&counters);
            thread::Builder::new()
                .name("osc-send".into())
                .spawn(move || drain(socket, addr, &queue, &counters))?
        };
        Ok(OscSender {
            target: addr,
            queue,
            counters,
            worker: Some(worker),
        })
    }

    pub fn target(&self) -> SocketAddr {
        self.target
    }

    /// Enqueue one message as its own datagram.
    pub fn send(&self, m: &OscMessage) -> Result<SendAck> {
        Ok(self.send_bytes(encode(m)?))
    }

    /// Enqueue one frame's messages as a single datagram (bundle when more
    /// than one).
    pub fn send_frame(&self, messages: &[OscMessage]) -> Result<SendAck> {
        Ok(self.send_bytes(encode_frame(messages)?))
    }

    pub fn send_bytes(&self, bytes: Vec<u8>) -> SendAck {
        let mut guard = self.queue.items.lock().expect("osc queue poisoned");
        if guard.0.len() >= self.queue.capacity {
            guard.0.pop_front();
            self.counters.dropped.fetch_add(1, Ordering::Relaxed);
        }
        guard.0.push_back(bytes);
        drop(guard);
        self.queue.ready.notify_one();
        SendAck {
            sequence: self.counters.enqueued.fetch_add(1, Ordering::Relaxed) + 1,
        }
    }

    pub fn stats(&self) -> SenderStats {
        SenderStats {
            sent: self.counters.sent.load(Ordering::Relaxed),
            dropped: self.counters.dropped.load(Ordering::Relaxed),
            errors: self.counters.errors.load(Ordering::Relaxed),
            queue_depth: self.queue.items.lock().map(|g| g.0.len()).unwrap_or(0),
        }
    }

    /// Send everything still queued, then stop the worker.
    pub fn close(mut self) -> SenderStats {
        self.shutdown();
        self.stats()
    }

    fn shutdown(&mut self) {
        if let Some(worker) = self.worker.take() {
            self.queue.items.lock().expect("osc queue poisoned").1 = true;
            self.queue.ready.notify_all();
            let _ = worker.join();
        }
    }
}

impl Drop for OscSender {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn drain(socket: UdpSocket, addr: SocketAddr, queue: &Queue, counters: &Counters) {
    loop {
        let next = {
            let mut guard = queue.items.lock().expect("osc queue poisoned");
            loop {
                if let Some(b) = guard.0.pop_front() {
                    break Some(b);
                }
                if guard.1 {
                    break None;
                }
                guard = queue.ready.wait(guard).expect("osc queue poisoned");
            }
        };
        let Some(bytes) = next else { return };
        match socket.send_to(&bytes, addr) {
            Ok(_) => {
                counters.sent.fetch_add(1, Ordering::Relaxed);
            }
            Err(e) => {
                let n = counters.errors.fetch_add(1, Ordering::Relaxed);
                // Avoid flooding the log when the target stays down.
                if n.is_power_of_two() || n == 0 {
                    warn!("osc send to {addr} failed ({} errors so far): {e}", n + 1);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReceiverStats {
    pub packets: u64,
    pub messages: u64,
    pub malformed: u64,
}

#[derive(Debug, Default)]
struct ReceiverCounters {
    packets: AtomicU64,
    messages: AtomicU64,
    malformed: AtomicU64,
}

/// Background UDP listener. Decoded messages are delivered, bundles
/// flattened, to one handler in arrival order; malformed packets are counted
/// and dropped.
pub struct OscReceiver {
    local: SocketAddr,
    stop: Arc<AtomicBool>,
    counters: Arc<ReceiverCounters>,
    worker: Option<JoinHandle<()>>,
}

impl OscReceiver {
    pub fn spawn<F>(bind: SocketAddr, mut handler: F) -> Result<Self>
    where
        F: FnMut(OscMessage) + Send + 'static,
    {
        let socket = UdpSocket::bind(bind)?;
        socket.set_read_timeout(Some(POLL))?;
        let local = socket.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let counters = Arc::new(ReceiverCounters::default());
        let worker = {
            let stop = Arc::clone(&stop);
            let counters = Arc::clone(&counters);
            thread::Builder::new().name("osc-recv".into()).spawn(move || {
                let mut buf = vec![0u8; MAX_DATAGRAM];
                while !stop.load(Ordering::Relaxed) {
                    let n = match socket.recv_from(&mut buf) {
                        Ok((n, _)) => n,
                        Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
                            continue
                        }
                        Err(e) => {
                            debug!("osc receive error: {e}");
                            continue;
                        }
                    };
                    counters.packets.fetch_add(1, Ordering::Relaxed);
                    match decode_packet(&buf[..n]) {
                        Ok(packet) => {
                            for m in packet.into_messages() {
                                counters.messages.fetch_add(1, Ordering::Relaxed);
                                handler(m);
                            }
                        }
                        Err(e) => {
                            counters.malformed.fetch_add(1, Ordering::Relaxed);
                            debug!("dropping packet: {e}");
                        }
                    }
                }
            })?
        };
        Ok(OscReceiver {
            local,
            stop,
            counters,
            worker: Some(worker),
        })
    }

    /// Listen on `0.0.0.0:port`.
    pub fn listen<F>(port: u16, handler: F) -> Result<Self>
    where
        F: FnMut(OscMessage) + Send + 'static,
    {
        Self::spawn(SocketAddr::from(([0, 0, 0, 0], port)), handler)
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local
    }

    pub fn stats(&self) -> ReceiverStats {
        ReceiverStats {
            packets: self.counters.packets.load(Ordering::Relaxed),
            messages: self.counters.messages.load(Ordering::Relaxed),
            malformed: self.counters.malformed.load(Ordering::Relaxed),
        }
    }

    pub fn stop(mut self) -> ReceiverStats {
        self.shutdown();
        self.stats()
    }

    fn shutdown(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

impl Drop for OscReceiver {
    fn drop(&mut self) {
        self.shutdown();
    }
}
