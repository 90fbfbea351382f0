//! Put a mapping proxy between a descriptor source and a synth.

use std::sync::{mpsc, Arc};
use std::time::Duration;

use arc_swap::ArcSwap;
use vivo::mapping::default_mapping;
use vivo::osc::{proxy, Endpoint, OscMessage, OscReceiver, OscSender};

fn main() -> vivo::Result<()> {
    let (tx, rx) = mpsc::channel();
    let synth = OscReceiver::spawn("127.0.0.1:0".parse().unwrap(), move |m| {
        let _ = tx.send(m);
    })?;
    let mapping = Arc::new(ArcSwap::from_pointee(default_mapping().mapping));
    let p = proxy(
        "127.0.0.1:0".parse().unwrap(),
        Arc::clone(&mapping),
        &Endpoint::localhost(synth.local_addr().port())?,
    )?;
    println!("proxy listening on {}", p.local_addr());

    let source = OscSender::new(&Endpoint::localhost(p.local_addr().port())?)?;
    for v in [0.0, 0.5, 1.0] {
        source.send(&OscMessage::floats("/vivo/warmness", &[v]))?;
    }
    while let Ok(m) = rx.recv_timeout(Duration::from_millis(300)) {
        println!("synth got {} {:?}", m.address, m.args);
    }
    println!("{:?}", p.stop());
    Ok(())
}
