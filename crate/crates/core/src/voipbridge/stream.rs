//! Paced sending: one packet every 20 ms, silence between utterances.

use std::collections::VecDeque;
use std::io;
use std::net::{SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, TryRecvError};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use super::rtp::{serialize_rtp, RtpPacket};
use super::session::{CallSession, SessionState};
use super::BridgeError;
use crate::speech::AudioBuffer;

pub const PACKET_INTERVAL: Duration = Duration::from_millis(20);

/// Time source for pacing. `now` is measured from an arbitrary origin.
pub trait Clock {
    fn now(&self) -> Duration;
    fn sleep_until(&mut self, deadline: Duration);
}

#[derive(Debug, Clone)]
pub struct WallClock {
    origin: Instant,
}

impl Default for WallClock {
    fn default() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl WallClock {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Clock for WallClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep_until(&mut self, deadline: Duration) {
        let now = self.now();
        if deadline > now {
            thread::sleep(deadline - now);
        }
    }
}

/// Clock that jumps instead of sleeping. Clones share the same time.
#[derive(Debug, Clone, Default)]
pub struct SimulatedClock {
    micros: Arc<AtomicU64>,
}

impl SimulatedClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, by: Duration) {
        self.micros.fetch_add(by.as_micros() as u64, Ordering::SeqCst);
    }
}

impl Clock for SimulatedClock {
    fn now(&self) -> Duration {
        Duration::from_micros(self.micros.load(Ordering::SeqCst))
    }

    fn sleep_until(&mut self, deadline: Duration) {
        self.micros
            .fetch_max(deadline.as_micros() as u64, Ordering::SeqCst);
    }
}

/// Where serialized packets go.
pub trait PacketSink {
    fn send(&mut self, datagram: &[u8]) -> io::Result<()>;
}

/// UDP socket connected to the far end.
#[derive(Debug)]
pub struct UdpSink {
    socket: UdpSocket,
}

impl UdpSink {
    pub fn connect(peer: SocketAddr) -> io::Result<Self> {
        let bind: SocketAddr = if peer.is_ipv4() {
            "0.0.0.0:0".parse().expect("literal address")
        } else {
            "[::]:0".parse().expect("literal address")
        };
        Self::connect_from(bind, peer)
    }

    pub fn connect_from(local: SocketAddr, peer: SocketAddr) -> io::Result<Self> {
        let socket = UdpSocket::bind(local)?;
        socket.connect(peer)?;
        Ok(Self { socket })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }
}

impl PacketSink for UdpSink {
    fn send(&mut self, datagram: &[u8]) -> io::Result<()> {
        self.socket.send(datagram).map(|_| ())
    }
}

/// Keeps every datagram in memory together with the clock reading at send time.
#[derive(Debug, Clone)]
pub struct MemorySink<C: Clock + Clone> {
    clock: C,
    sent: Arc<Mutex<Vec<(Duration, Vec<u8>)>>>,
}

impl<C: Clock + Clone> MemorySink<C> {
    pub fn new(clock: C) -> Self {
        Self {
            clock,
            sent: Arc::default(),
        }
    }

    pub fn sent(&self) -> Vec<(Duration, Vec<u8>)> {
        self.sent.lock().expect("sink lock").clone()
    }
}

impl<C: Clock + Clone> PacketSink for MemorySink<C> {
    fn send(&mut self, datagram: &[u8]) -> io::Result<()> {
        let now = self.clock.now();
        self.sent.lock().expect("sink lock").push((now, datagram.to_vec()));
        Ok(())
    }
}

/// Sends packets for one call session on a fixed 20 ms grid.
///
/// Deadlines are absolute (origin + n · 20 ms), so scheduling error does not
/// accumulate over a long call.
pub struct Streamer<C, S> {
    session: CallSession,
    clock: C,
    sink: S,
    next_deadline: Duration,
}

impl<C: Clock, S: PacketSink> Streamer<C, S> {
    pub fn new(mut session: CallSession, clock: C, sink: S) -> Self {
        session.state = SessionState::Streaming;
        let next_deadline = clock.now();
        Self {
            session,
            clock,
            sink,
            next_deadline,
        }
    }

    pub fn session(&self) -> &CallSession {
        &self.session
    }

    pub fn sink(&self) -> &S {
        &self.sink
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    /// Sends one packet at the next grid point.
    pub fn send_packet(&mut self, packet: &RtpPacket) -> Result<(), BridgeError> {
        if self.session.state != SessionState::Streaming {
            return Err(BridgeError::NotStreaming);
        }
        self.clock.sleep_until(self.next_deadline);
        if let Err(e) = self.sink.send(&serialize_rtp(packet)) {
            self.session.state = SessionState::Idle;
            return Err(BridgeError::Send(e));
        }
        self.next_deadline += PACKET_INTERVAL;
        Ok(())
    }

    pub fn send_packets(&mut self, packets: &[RtpPacket]) -> Result<(), BridgeError> {
        packets.iter().try_for_each(|p| self.send_packet(p))
    }

    /// Packetizes and sends one utterance.
    pub fn speak(&mut self, audio: &AudioBuffer) -> Result<usize, BridgeError> {
        let packets = self.session.packetize(audio)?;
        self.send_packets(&packets)?;
        Ok(packets.len())
    }

    pub fn send_silence(&mut self) -> Result<(), BridgeError> {
        let p = self.session.silence_packet();
        self.send_packet(&p)
    }

    /// Keeps the stream alive for `duration` with one silence frame per 20 ms.
    pub fn idle_for(&mut self, duration: Duration) -> Result<usize, BridgeError> {
        let frames = (duration.as_micros() / PACKET_INTERVAL.as_micros()) as usize;
        for _ in 0..frames {
            self.send_silence()?;
        }
        Ok(frames)
    }

    pub fn hang_up(mut self) -> CallSession {
        self.session.state = SessionState::Idle;
        self.session
    }
}

#[derive(Debug)]
pub enum PacerCommand {
    Speak(AudioBuffer),
    HangUp,
}

#[derive(Debug)]
pub enum PacerEvent {
    /// The stream stopped because of a send error.
    Failed(String),
    Rejected(String),
}

/// The pacing loop: owns the streamer and consumes commands in order.
///
/// Each [`PacingLoop::step`] is one 20 ms tick: pending commands are applied,
/// then exactly one packet goes out, either the next queued speech frame or
/// silence.
pub struct PacingLoop<C, S> {
    streamer: Streamer<C, S>,
    queue: VecDeque<RtpPacket>,
    commands: Receiver<PacerCommand>,
    events: Sender<PacerEvent>,
}

impl<C: Clock, S: PacketSink> PacingLoop<C, S> {
    pub fn new(
        streamer: Streamer<C, S>,
        commands: Receiver<PacerCommand>,
        events: Sender<PacerEvent>,
    ) -> Self {
        Self {
            streamer,
            queue: VecDeque::new(),
            commands,
            events,
        }
    }

    pub fn streamer(&self) -> &Streamer<C, S> {
        &self.streamer
    }

    pub fn queued_packets(&self) -> usize {
        self.queue.len()
    }

    /// Runs one tick. Returns `false` once the loop should stop.
    pub fn step(&mut self) -> bool {
        loop {
            match self.commands.try_recv() {
                Ok(PacerCommand::Speak(audio)) => match self.streamer.session.packetize(&audio) {
                    Ok(packets) => self.queue.extend(packets),
                    Err(e) => {
                        let _ = self.events.send(PacerEvent::Rejected(e.to_string()));
                    }
                },
                Ok(PacerCommand::HangUp) | Err(TryRecvError::Disconnected) => return false,
                Err(TryRecvError::Empty) => break,
            }
        }
        let result = match self.queue.pop_front() {
            Some(packet) => self.streamer.send_packet(&packet),
            None => self.streamer.send_silence(),
        };
        if let Err(e) = result {
            let _ = self.events.send(PacerEvent::Failed(e.to_string()));
            return false;
        }
        true
    }

    pub fn run(mut self) -> CallSession {
        while self.step() {}
        self.streamer.hang_up()
    }
}

/// Handle to a pacing loop running on its own thread.
pub struct Pacer {
    commands: Sender<PacerCommand>,
    events: Mutex<Receiver<PacerEvent>>,
    thread: Option<JoinHandle<CallSession>>,
}

impl Pacer {
    pub fn spawn<C, S>(streamer: Streamer<C, S>) -> Self
    where
        C: Clock + Send + 'static,
        S: PacketSink + Send + 'static,
    {
        let (cmd_tx, cmd_rx) = mpsc::channel();
        let (ev_tx, ev_rx) = mpsc::channel();
        let lp = PacingLoop::new(streamer, cmd_rx, ev_tx);
        let thread = thread::Builder::new()
            .name("rtp-pacer".into())
            .spawn(move || lp.run())
            .expect("spawn pacing thread");
        Self {
            commands: cmd_tx,
            events: Mutex::new(ev_rx),
            thread: Some(thread),
        }
    }

    /// Starts a wall-clock pacer streaming to `peer` over UDP.
    pub fn spawn_udp(session: CallSession) -> io::Result<Self> {
        let sink = UdpSink::connect(session.peer)?;
        Ok(Self::spawn(Streamer::new(session, WallClock::new(), sink)))
    }

    /// Queues an utterance. Fails if the stream has already stopped.
    pub fn speak(&self, audio: AudioBuffer) -> Result<(), BridgeError> {
        if let Some(PacerEvent::Failed(msg)) = self.poll_event() {
            return Err(BridgeError::Stopped(msg));
        }
        self.commands
            .send(PacerCommand::Speak(audio))
            .map_err(|_| BridgeError::Stopped("pacing loop has exited".into()))
    }

    pub fn poll_event(&self) -> Option<PacerEvent> {
        self.events.lock().expect("event lock").try_recv().ok()
    }

    pub fn hang_up(mut self) -> Option<CallSession> {
        let _ = self.commands.send(PacerCommand::HangUp);
        self.thread.take().and_then(|t| t.join().ok())
    }
}

impl Drop for Pacer {
    fn drop(&mut self) {
        let _ = self.commands.send(PacerCommand::HangUp);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voipbridge::parse_rtp;

    fn session() -> CallSession {
        CallSession::with_ids("127.0.0.1:9".parse().unwrap(), 7, 0, 0)
    }

    fn streamer() -> (Streamer<SimulatedClock, MemorySink<SimulatedClock>>, SimulatedClock) {
        let clock = SimulatedClock::new();
        let sink = MemorySink::new(clock.clone());
        (Streamer::new(session(), clock.clone(), sink), clock)
    }

    #[test]
    fn fifty_packets_on_the_grid() {
        let (mut st, _) = streamer();
        let n = st.speak(&AudioBuffer::silent(8000, 8000).unwrap()).unwrap();
        assert_eq!(n, 50);
        let times: Vec<u128> = st.sink().sent().iter().map(|(t, _)| t.as_millis()).collect();
        let expected: Vec<u128> = (0..50).map(|i| i * 20).collect();
        assert_eq!(times, expected);
    }

    #[test]
    fn idle_sends_silence() {
        let (mut st, _) = streamer();
        assert_eq!(st.idle_for(Duration::from_millis(100)).unwrap(), 5);
        let sent = st.sink().sent();
        assert_eq!(sent.len(), 5);
        for (_, bytes) in sent {
            let p = parse_rtp(&bytes).unwrap();
            assert!(p.payload.iter().all(|&b| b == 0xFF));
        }
    }

    struct FailingSink;
    impl PacketSink for FailingSink {
        fn send(&mut self, _: &[u8]) -> io::Result<()> {
            Err(io::Error::new(io::ErrorKind::ConnectionRefused, "refused"))
        }
    }

    #[test]
    fn send_failure_goes_idle() {
        let mut st = Streamer::new(session(), SimulatedClock::new(), FailingSink);
        assert!(matches!(st.send_silence(), Err(BridgeError::Send(_))));
        assert_eq!(st.session().state, SessionState::Idle);
        assert!(matches!(st.send_silence(), Err(BridgeError::NotStreaming)));
    }

    #[test]
    fn loop_interleaves_speech_and_silence() {
        let (st, clock) = streamer();
        let (cmd_tx, cmd_rx) = mpsc::channel();
        let (ev_tx, _ev_rx) = mpsc::channel();
        let mut lp = PacingLoop::new(st, cmd_rx, ev_tx);
        assert!(lp.step());
        cmd_tx.send(PacerCommand::Speak(AudioBuffer::new(8000, vec![500; 320]).unwrap())).unwrap();
        assert!(lp.step());
        assert!(lp.step());
        assert!(lp.step());
        cmd_tx.send(PacerCommand::HangUp).unwrap();
        assert!(!lp.step());

        let sent = lp.streamer().sink().sent();
        let packets: Vec<RtpPacket> = sent.iter().map(|(_, b)| parse_rtp(b).unwrap()).collect();
        let silent: Vec<bool> = packets.iter().map(|p| p.payload.iter().all(|&b| b == 0xFF)).collect();
        assert_eq!(silent, [true, false, false, true]);
        let seqs: Vec<u16> = packets.iter().map(|p| p.sequence).collect();
        assert_eq!(seqs, [0, 1, 2, 3]);
        assert!(packets[1].marker);
        assert_eq!(clock.now(), Duration::from_millis(60));
    }

    #[test]
    fn loop_reports_wrong_rate() {
        let (st, _) = streamer();
        let (cmd_tx, cmd_rx) = mpsc::channel();
        let (ev_tx, ev_rx) = mpsc::channel();
        let mut lp = PacingLoop::new(st, cmd_rx, ev_tx);
        cmd_tx.send(PacerCommand::Speak(AudioBuffer::silent(16000, 10).unwrap())).unwrap();
        assert!(lp.step());
        assert!(matches!(ev_rx.try_recv(), Ok(PacerEvent::Rejected(_))));
    }

    #[test]
    fn loop_stops_on_send_failure() {
        let st = Streamer::new(session(), SimulatedClock::new(), FailingSink);
        let (_cmd_tx, cmd_rx) = mpsc::channel();
        let (ev_tx, ev_rx) = mpsc::channel();
        let lp = PacingLoop::new(st, cmd_rx, ev_tx);
        let session = lp.run();
        assert_eq!(session.state, SessionState::Idle);
        assert!(matches!(ev_rx.try_recv(), Ok(PacerEvent::Failed(_))));
    }
}
