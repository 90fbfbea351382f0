//! Open Sound Control 1.0 over UDP.

mod codec;
mod proxy;
mod transport;

pub use codec::{
    decode, decode_packet, encode, encode_bundle, encode_frame, OscArg, OscMessage, OscPacket, IMMEDIATELY,
};
pub use proxy::{proxy, ProxyHandle, ProxyMapper, ProxyStats};
pub use transport::{Endpoint, OscReceiver, OscSender, ReceiverStats, SendAck, SenderStats, DEFAULT_QUEUE_CAPACITY};
