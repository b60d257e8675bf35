//! Streams one utterance over UDP to an in-process loopback peer, then
//! compares what arrived with what was sent.

use std::net::SocketAddr;
use std::thread;
use std::time::Duration;

use easyvoice::speech::{synthesize_tone, ToneSynthConfig};
use easyvoice::voipbridge::{
    mulaw_decode, mulaw_encode, CallSession, LoopbackOptions, LoopbackPeer, Streamer, UdpSink, WallClock,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let peer = LoopbackPeer::bind(SocketAddr::from(([127, 0, 0, 1], 0)))?;
    let addr = peer.local_addr()?;
    let receiver = thread::spawn(move || {
        peer.run(LoopbackOptions {
            duration: Duration::from_secs(5),
            idle_timeout: Some(Duration::from_millis(300)),
        })
    });

    let audio = synthesize_tone("hi there", &ToneSynthConfig::default())?;
    let mut streamer = Streamer::new(CallSession::new(addr), WallClock::new(), UdpSink::connect(addr)?);
    let sent = streamer.speak(&audio)?;
    let session = streamer.hang_up();
    println!("sent {sent} packets to {addr} (ssrc {:#010x})", session.ssrc);

    let report = receiver.join().expect("receiver thread")?;
    let stats = &report.stats;
    println!(
        "received {} packets, {} lost, {} out of order, {} ms of audio",
        stats.packets_received, stats.packets_lost, stats.out_of_order, stats.duration_ms
    );

    let expected: Vec<i16> = audio.samples().iter().map(|&s| mulaw_decode(mulaw_encode(s))).collect();
    let got = &report.audio.samples()[..expected.len()];
    println!("audio matches the mu-law round trip: {}", got == expected.as_slice());
    Ok(())
}
