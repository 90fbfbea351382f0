//! Send a descriptor bundle to a local receiver and print what arrives.

use std::sync::mpsc;
use std::time::Duration;

use vivo::osc::{encode, Endpoint, OscMessage, OscReceiver, OscSender};

fn main() -> vivo::Result<()> {
    let packet = encode(&OscMessage::floats("/vivo/warmness", &[0.25]))?;
    println!("/vivo/warmness 0.25 -> {} bytes {packet:02x?}", packet.len());

    let (tx, rx) = mpsc::channel();
    let recv = OscReceiver::spawn("127.0.0.1:0".parse().unwrap(), move |m| {
        let _ = tx.send(m);
    })?;
    let sender = OscSender::new(&Endpoint::localhost(recv.local_addr().port())?)?;
    sender.send_frame(&[
        OscMessage::floats("/vivo/warmness", &[0.25]),
        OscMessage::floats("/vivo/motion/pan", &[0.1, -0.2]),
    ])?;
    while let Ok(m) = rx.recv_timeout(Duration::from_millis(300)) {
        println!("received {} {:?}", m.address, m.args);
    }
    println!("sender {:?}", sender.close());
    println!("receiver {:?}", recv.stop());
    Ok(())
}
