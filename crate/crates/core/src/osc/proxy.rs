//! Standalone mapping proxy: receive descriptor messages, apply the live
//! mapping, re-emit the mapped parameters.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use arc_swap::ArcSwap;
use serde::{Deserialize, Serialize};

use super::codec::OscMessage;
use super::transport::{Endpoint, OscReceiver, OscSender, ReceiverStats, SenderStats};
use crate::error::{Error, Result};
use crate::mapping::{scale, MappingState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProxyStats {
    pub receiver: ReceiverStats,
    pub sender: SenderStats,
    pub mapped: u64,
    pub forwarded: u64,
}

/// Per-message mapping logic, independent of sockets.
///
/// Every input row remembers its last scaled value (0 until first seen). A
/// message on an input's address updates that row and emits every output
/// column the row is routed to, summing all rows routed to the column.
/// Messages on unknown addresses, or without a numeric first argument, pass
/// through unchanged.
pub struct ProxyMapper {
    mapping: Arc<ArcSwap<MappingState>>,
    scaled: Vec<f64>,
}

impl ProxyMapper {
    pub fn new(mapping: Arc<ArcSwap<MappingState>>) -> Self {
        ProxyMapper {
            mapping,
            scaled: Vec::new(),
        }
    }

    /// Returns the messages to emit and whether the input was mapped.
    pub fn handle(&mut self, m: OscMessage) -> (Vec<OscMessage>, bool) {
        let state = self.mapping.load();
        let value = m.args.first().and_then(|a| a.as_f64());
        let (row, x) = match (state.input_by_address(&m.address), value) {
            (Some(row), Some(x)) => (row, x),
            _ => return (vec![m], false),
        };
        self.scaled.resize(state.inputs.len(), 0.0);
        self.scaled[row] = scale(x, &state.inputs[row].scaler);
        let matrix = &state.matrix;
        let out = (0..matrix.cols())
            .filter(|&j| matrix.get(row, j) > 0.0)
            .map(|j| {
                let v: f64 = (0..matrix.rows()).map(|i| matrix.get(i, j) * self.scaled[i]).sum();
                OscMessage::floats(state.outputs[j].address.clone(), &[v])
            })
            .collect();
        (out, true)
    }
}

pub struct ProxyHandle {
    receiver: OscReceiver,
    sender: Arc<OscSender>,
    mapped: Arc<AtomicU64>,
    forwarded: Arc<AtomicU64>,
}

impl ProxyHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.receiver.local_addr()
    }

    pub fn stats(&self) -> ProxyStats {
        ProxyStats {
            receiver: self.receiver.stats(),
            sender: self.sender.stats(),
            mapped: self.mapped.load(Ordering::Relaxed),
            forwarded: self.forwarded.load(Ordering::Relaxed),
        }
    }

    pub fn stop(self) -> ProxyStats {
        let stats = self.stats();
        drop(self.receiver);
        stats
    }
}

/// Start the proxy. `mapping` may be swapped at any time; each message sees
/// one complete snapshot.
pub fn proxy(listen: SocketAddr, mapping: Arc<ArcSwap<MappingState>>, target: &Endpoint) -> Result<ProxyHandle> {
    let target_addr = target.resolve()?;
    let same_host = target_addr.ip().is_loopback() || listen.ip().is_unspecified() || target_addr.ip() == listen.ip();
    if listen.port() != 0 && same_host && target_addr.port() == listen.port() {
        return Err(Error::Config(format!(
            "proxy would send to its own listen port {}",
            listen.port()
        )));
    }
    let sender = Arc::new(OscSender::new(target)?);
    let mapped = Arc::new(AtomicU64::new(0));
    let forwarded = Arc::new(AtomicU64::new(0));
    let mut mapper = ProxyMapper::new(mapping);
    let receiver = {
        let sender = Arc::clone(&sender);
        let mapped = Arc::clone(&mapped);
        let forwarded = Arc::clone(&forwarded);
        OscReceiver::spawn(listen, move |m| {
            let (out, was_mapped) = mapper.handle(m);
            if was_mapped { &mapped } else { &forwarded }.fetch_add(1, Ordering::Relaxed);
            for msg in &out {
                if let Err(e) = sender.send(msg) {
                    log::warn!("proxy cannot encode {}: {e}", msg.address);
                }
            }
        })?
    };
    Ok(ProxyHandle {
        receiver,
        sender,
        mapped,
        forwarded,
    })
}
