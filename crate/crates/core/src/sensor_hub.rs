//! Emulated array of pressure sensors behind bus multiplexers.
//!
//! Sensors are addressed by `(mux_index, channel)` and polled round-robin in
//! address order, one reading per sensor per cycle. Each cycle can be
//! emitted as a frame; a slow consumer causes the oldest buffered frames to
//! be dropped rather than stalling the poll loop.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, SyncSender, TrySendError};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_SENSORS: usize = 64;
pub const MAX_MUXES: u8 = 9;
pub const CHANNELS_PER_MUX: u8 = 8;
pub const DEFAULT_POLL_HZ: f64 = 20.0;
pub const DEFAULT_FRAME_BUFFER: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HubError {
    #[error("ADDRESS_IN_USE: mux {mux} channel {channel}")]
    AddressInUse { mux: u8, channel: u8 },
    #[error("ADDRESS_IN_USE: logical id {0:?} already attached")]
    IdInUse(String),
    #[error("CAPACITY_EXCEEDED: hub holds at most {MAX_SENSORS} sensors")]
    CapacityExceeded,
    #[error("invalid address: mux {mux} channel {channel}")]
    InvalidAddress { mux: u8, channel: u8 },
    #[error("EMPTY_HUB: no sensors attached")]
    EmptyHub,
    #[error("no sensor with id {0:?}")]
    UnknownSensor(String),
    #[error("SINK_CLOSED")]
    SinkClosed,
    #[error("frame decode: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorAddress {
    pub mux_index: u8,
    pub channel: u8,
    pub logical_id: String,
}

impl SensorAddress {
    pub fn new(mux_index: u8, channel: u8, logical_id: impl Into<String>) -> Self {
        Self {
            mux_index,
            channel,
            logical_id: logical_id.into(),
        }
    }

    /// Packs sensor number `n` onto consecutive channels, eight per mux.
    pub fn sequential(n: usize, logical_id: impl Into<String>) -> Self {
        Self::new(
            (n / CHANNELS_PER_MUX as usize) as u8,
            (n % CHANNELS_PER_MUX as usize) as u8,
            logical_id,
        )
    }

    fn key(&self) -> (u8, u8) {
        (self.mux_index, self.channel)
    }
}

/// Anything that can be asked for a gauge pressure in kPa.
pub trait PressureSource: Send {
    fn read(&mut self, now: f64) -> f64;
}

impl<F> PressureSource for F
where
    F: FnMut(f64) -> f64 + Send,
{
    fn read(&mut self, now: f64) -> f64 {
        self(now)
    }
}

/// A pressure cell shared between a writer and the hub.
#[derive(Debug, Clone, Default)]
pub struct SharedGauge(Arc<AtomicU64>);

impl SharedGauge {
    pub fn new(kpa: f64) -> Self {
        Self(Arc::new(AtomicU64::new(kpa.to_bits())))
    }

    pub fn set(&self, kpa: f64) {
        self.0.store(kpa.to_bits(), Ordering::Relaxed);
    }

    pub fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }
}

impl PressureSource for SharedGauge {
    fn read(&mut self, _now: f64) -> f64 {
        self.get()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorReading {
    #[serde(rename = "id")]
    pub logical_id: String,
    /// Seconds since hub start.
    #[serde(rename = "t")]
    pub timestamp: f64,
    #[serde(rename = "seq")]
    pub sequence: u64,
    #[serde(rename = "p_kpa")]
    pub gauge_pressure_kpa: f64,
}

struct Slot {
    address: SensorAddress,
    source: Box<dyn PressureSource>,
    next_seq: u64,
}

pub struct SensorHub {
    active: Vec<Slot>,
    pending: Vec<Slot>,
    cycles: u64,
    read_interval_s: f64,
}

impl Default for SensorHub {
    fn default() -> Self {
        Self::new()
    }
}

impl SensorHub {
    pub fn new() -> Self {
        Self {
            active: Vec::new(),
            pending: Vec::new(),
            cycles: 0,
            read_interval_s: 0.0,
        }
    }

    /// Spacing of reading timestamps within one cycle, emulating bus time.
    pub fn with_read_interval(mut self, seconds: f64) -> Self {
        self.read_interval_s = seconds.max(0.0);
        self
    }

    pub fn len(&self) -> usize {
        self.active.len() + self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    /// Adds a sensor; it is polled from the next cycle on.
    pub fn attach(
        &mut self,
        address: SensorAddress,
        source: impl PressureSource + 'static,
    ) -> Result<(), HubError> {
        if address.mux_index >= MAX_MUXES || address.channel >= CHANNELS_PER_MUX {
            return Err(HubError::InvalidAddress {
                mux: address.mux_index,
                channel: address.channel,
            });
        }
        let slots = || self.active.iter().chain(&self.pending);
        if slots().any(|s| s.address.key() == address.key()) {
            return Err(HubError::AddressInUse {
                mux: address.mux_index,
                channel: address.channel,
            });
        }
        if slots().any(|s| s.address.logical_id == address.logical_id) {
            return Err(HubError::IdInUse(address.logical_id));
        }
        if self.len() >= MAX_SENSORS {
            return Err(HubError::CapacityExceeded);
        }
        self.pending.push(Slot {
            address,
            source: Box::new(source),
            next_seq: 0,
        });
        Ok(())
    }

    pub fn detach(&mut self, logical_id: &str) -> Result<SensorAddress, HubError> {
        for list in [&mut self.active, &mut self.pending] {
            if let Some(i) = list.iter().position(|s| s.address.logical_id == logical_id) {
                return Ok(list.remove(i).address);
            }
        }
        Err(HubError::UnknownSensor(logical_id.to_string()))
    }

    /// Addresses in poll order.
    pub fn addresses(&self) -> Vec<SensorAddress> {
        let mut all: Vec<_> = self
            .active
            .iter()
            .chain(&self.pending)
            .map(|s| s.address.clone())
            .collect();
        all.sort_by_key(SensorAddress::key);
        all
    }

    /// Reads every sensor once, in `(mux_index, channel)` order.
    pub fn poll_cycle(&mut self, now: f64) -> Result<Vec<SensorReading>, HubError> {
        if !self.pending.is_empty() {
            self.active.append(&mut self.pending);
            self.active.sort_by_key(|s| s.address.key());
        }
        if self.active.is_empty() {
            return Err(HubError::EmptyHub);
        }
        self.cycles += 1;
        let interval = self.read_interval_s;
        Ok(self
            .active
            .iter_mut()
            .enumerate()
            .map(|(i, slot)| {
                let t = now + interval * i as f64;
                let p = slot.source.read(t);
                let seq = slot.next_seq;
                slot.next_seq += 1;
                SensorReading {
                    logical_id: slot.address.logical_id.clone(),
                    gauge_pressure_kpa: if p.is_finite() { p } else { 0.0 },
                    timestamp: t,
                    sequence: seq,
                }
            })
            .collect())
    }
}

/// One poll cycle as emitted on the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub cycle: u64,
    /// Frames dropped before this one was produced.
    pub dropped: u64,
    pub readings: Vec<SensorReading>,
}

#[derive(Serialize, Deserialize)]
struct FrameHeader {
    cycle: u64,
    n: usize,
    dropped: u64,
}

impl Frame {
    /// Wire encoding: a 4-byte big-endian body length, then the body as
    /// newline-terminated JSON records: the header `{"cycle","n","dropped"}`
    /// followed by `n` readings `{"id","t","seq","p_kpa"}`.
    pub fn encode(&self) -> Vec<u8> {
        let mut body = Vec::with_capacity(64 + 64 * self.readings.len());
        let header = FrameHeader {
            cycle: self.cycle,
            n: self.readings.len(),
            dropped: self.dropped,
        };
        serde_json::to_writer(&mut body, &header).expect("header serializes");
        body.push(b'\n');
        for r in &self.readings {
            serde_json::to_writer(&mut body, r).expect("reading serializes");
            body.push(b'\n');
        }
        let mut out = Vec::with_capacity(body.len() + 4);
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
        out
    }

    /// Decodes one frame from the front of `buf`, returning it with the
    /// number of bytes consumed, or `Ok(None)` if `buf` holds a partial frame.
    pub fn decode(buf: &[u8]) -> Result<Option<(Frame, usize)>, HubError> {
        if buf.len() < 4 {
            return Ok(None);
        }
        let len = u32::from_be_bytes([buf[0], buf[1], buf[2], buf[3]]) as usize;
        if buf.len() < 4 + len {
            return Ok(None);
        }
        let body = std::str::from_utf8(&buf[4..4 + len]).map_err(|e| HubError::Decode(e.to_string()))?;
        let mut lines = body.lines();
        let header: FrameHeader = serde_json::from_str(lines.next().unwrap_or(""))
            .map_err(|e| HubError::Decode(format!("header: {e}")))?;
        let readings = lines
            .map(|l| serde_json::from_str(l).map_err(|e| HubError::Decode(format!("reading: {e}"))))
            .collect::<Result<Vec<SensorReading>, _>>()?;
        if readings.len() != header.n {
            return Err(HubError::Decode(format!(
                "header says {} readings, body has {}",
                header.n,
                readings.len()
            )));
        }
        Ok(Some((
            Frame {
                cycle: header.cycle,
                dropped: header.dropped,
                readings,
            },
            4 + len,
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    Accepted,
    /// Sink cannot take the frame right now.
    Full,
    Closed,
}

pub trait FrameSink {
    fn offer(&mut self, frame: &Frame) -> Delivery;
}

/// Sink that collects every frame.
#[derive(Debug, Default)]
pub struct VecSink {
    pub frames: Vec<Frame>,
}

impl FrameSink for VecSink {
    fn offer(&mut self, frame: &Frame) -> Delivery {
        self.frames.push(frame.clone());
        Delivery::Accepted
    }
}

/// Writes encoded frames to any byte stream. A write error closes the sink.
pub struct WriterSink<W: std::io::Write>(pub W);

impl<W: std::io::Write> FrameSink for WriterSink<W> {
    fn offer(&mut self, frame: &Frame) -> Delivery {
        match self.0.write_all(&frame.encode()) {
            Ok(()) => Delivery::Accepted,
            Err(_) => Delivery::Closed,
        }
    }
}

/// Hands frames to another thread through a bounded channel.
pub struct ChannelSink(pub SyncSender<Frame>);

impl FrameSink for ChannelSink {
    fn offer(&mut self, frame: &Frame) -> Delivery {
        match self.0.try_send(frame.clone()) {
            Ok(()) => Delivery::Accepted,
            Err(TrySendError::Full(_)) => Delivery::Full,
            Err(TrySendError::Disconnected(_)) => Delivery::Closed,
        }
    }
}

/// Buffers frames for a sink and drops the oldest when the buffer is full.
#[derive(Debug)]
pub struct FrameStreamer {
    buffer: VecDeque<Frame>,
    capacity: usize,
    dropped: u64,
    produced: u64,
    delivered: u64,
}

impl FrameStreamer {
    pub fn new(capacity: usize) -> Self {
        Self {
            buffer: VecDeque::with_capacity(capacity.max(1)),
            capacity: capacity.max(1),
            dropped: 0,
            produced: 0,
            delivered: 0,
        }
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn produced(&self) -> u64 {
        self.produced
    }

    pub fn delivered(&self) -> u64 {
        self.delivered
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    /// Queues one cycle's readings and delivers as much of the buffer as the
    /// sink accepts. Never blocks.
    pub fn push<S: FrameSink + ?Sized>(
        &mut self,
        cycle: u64,
        readings: Vec<SensorReading>,
        sink: &mut S,
    ) -> Result<(), HubError> {
        let frame = Frame {
            cycle,
            dropped: self.dropped,
            readings,
        };
        self.produced += 1;
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
            self.dropped += 1;
        }
        self.buffer.push_back(frame);
        self.flush(sink)
    }

    pub fn flush<S: FrameSink + ?Sized>(&mut self, sink: &mut S) -> Result<(), HubError> {
        while let Some(front) = self.buffer.front() {
            match sink.offer(front) {
                Delivery::Accepted => {
                    self.buffer.pop_front();
                    self.delivered += 1;
                }
                Delivery::Full => break,
                Delivery::Closed => {
                    self.buffer.clear();
                    return Err(HubError::SinkClosed);
                }
            }
        }
        Ok(())
    }
}

/// Result of a streaming run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamEnd {
    /// The schedule ran out.
    Completed,
    SinkClosed,
}

/// Single-threaded streaming: one poll and one frame per scheduled instant.
pub fn stream_frames<S, I>(
    hub: &mut SensorHub,
    streamer: &mut FrameStreamer,
    sink: &mut S,
    schedule: I,
) -> Result<StreamEnd, HubError>
where
    S: FrameSink + ?Sized,
    I: IntoIterator<Item = f64>,
{
    for now in schedule {
        let readings = hub.poll_cycle(now)?;
        match streamer.push(hub.cycles(), readings, sink) {
            Ok(()) => {}
            Err(HubError::SinkClosed) => return Ok(StreamEnd::SinkClosed),
            Err(e) => return Err(e),
        }
    }
    Ok(StreamEnd::Completed)
}

/// Timing statistics of a paced poll loop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PacingStats {
    pub cycles: u64,
    pub dropped: u64,
    /// Largest deviation of a cycle start from its deadline, seconds.
    pub max_jitter_s: f64,
    pub end: Option<StreamEnd>,
}

/// Poller thread driving a hub at a fixed rate and streaming frames to a
/// bounded channel.
pub struct PacedPoller {
    stop: Arc<AtomicBool>,
    handle: JoinHandle<Result<PacingStats, HubError>>,
}

impl PacedPoller {
    /// Starts polling at `rate_hz`. Frames reach the returned receiver through
    /// a channel of `channel_capacity`, backed by a drop-oldest buffer of
    /// `buffer_capacity` frames.
    pub fn spawn(
        mut hub: SensorHub,
        rate_hz: f64,
        channel_capacity: usize,
        buffer_capacity: usize,
    ) -> (Self, Receiver<Frame>) {
        let (tx, rx) = mpsc::sync_channel(channel_capacity.max(1));
        let stop = Arc::new(AtomicBool::new(false));
        let stop_flag = stop.clone();
        let period = Duration::from_secs_f64(1.0 / rate_hz);
        let handle = thread::Builder::new()
            .name("hub-poller".into())
            .spawn(move || {
                let mut sink = ChannelSink(tx);
                let mut streamer = FrameStreamer::new(buffer_capacity);
                let mut stats = PacingStats::default();
                let start = Instant::now();
                let mut k: u32 = 0;
                while !stop_flag.load(Ordering::Relaxed) {
                    let deadline = start + period * k;
                    sleep_until(deadline);
                    let actual = Instant::now();
                    let jitter = actual.saturating_duration_since(deadline).as_secs_f64();
                    stats.max_jitter_s = stats.max_jitter_s.max(jitter);
                    let now = actual.duration_since(start).as_secs_f64();
                    let readings = hub.poll_cycle(now)?;
                    stats.cycles += 1;
                    let pushed = streamer.push(hub.cycles(), readings, &mut sink);
                    stats.dropped = streamer.dropped();
                    if let Err(HubError::SinkClosed) = pushed {
                        stats.end = Some(StreamEnd::SinkClosed);
                        return Ok(stats);
                    }
                    k += 1;
                }
                stats.end = Some(StreamEnd::Completed);
                Ok(stats)
            })
            .expect("spawn poller thread");
        (Self { stop, handle }, rx)
    }

    pub fn stop(self) -> Result<PacingStats, HubError> {
        self.stop.store(true, Ordering::Relaxed);
        self.handle.join().expect("poller thread panicked")
    }
}

fn sleep_until(deadline: Instant) {
    // Sleep coarsely, then spin out the last stretch.
    const SPIN: Duration = Duration::from_micros(1500);
    loop {
        let now = Instant::now();
        if now >= deadline {
            return;
        }
        let left = deadline - now;
        if left > SPIN {
            thread::sleep(left - SPIN);
        } else {
            std::hint::spin_loop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hub_with(n: usize, kpa: f64) -> SensorHub {
        let mut hub = SensorHub::new();
        for i in 0..n {
            hub.attach(SensorAddress::sequential(i, format!("s{i}")), move |_t: f64| kpa)
                .unwrap();
        }
        hub
    }

    #[test]
    fn six_sensors_poll_in_channel_order() {
        let mut hub = SensorHub::new();
        // attach out of order; poll order follows the address
        for ch in [3u8, 0, 5, 1, 4, 2] {
            hub.attach(SensorAddress::new(0, ch, format!("ch{ch}")), |_t: f64| 0.4)
                .unwrap();
        }
        let r = hub.poll_cycle(0.0).unwrap();
        let ids: Vec<_> = r.iter().map(|r| r.logical_id.as_str()).collect();
        assert_eq!(ids, ["ch0", "ch1", "ch2", "ch3", "ch4", "ch5"]);
        assert!(r.iter().all(|r| r.gauge_pressure_kpa == 0.4));
    }

    #[test]
    fn occupied_address_rejected() {
        let mut hub = hub_with(2, 0.4);
        let err = hub.attach(SensorAddress::new(0, 1, "other"), |_t: f64| 0.0);
        assert_eq!(err, Err(HubError::AddressInUse { mux: 0, channel: 1 }));
        let err = hub.attach(SensorAddress::new(0, 7, "s0"), |_t: f64| 0.0);
        assert!(matches!(err, Err(HubError::IdInUse(_))));
        let err = hub.attach(SensorAddress::new(9, 0, "x"), |_t: f64| 0.0);
        assert!(matches!(err, Err(HubError::InvalidAddress { .. })));
    }

    #[test]
    fn sixty_fifth_sensor_rejected() {
        let mut hub = hub_with(64, 0.4);
        assert_eq!(hub.len(), 64);
        let err = hub.attach(SensorAddress::new(8, 0, "s64"), |_t: f64| 0.4);
        assert_eq!(err, Err(HubError::CapacityExceeded));
    }

    #[test]
    fn empty_hub_errors() {
        assert_eq!(SensorHub::new().poll_cycle(0.0), Err(HubError::EmptyHub));
    }

    #[test]
    fn attach_takes_effect_next_cycle_and_detach_removes() {
        let mut hub = hub_with(2, 0.4);
        assert_eq!(hub.poll_cycle(0.0).unwrap().len(), 2);
        hub.attach(SensorAddress::new(0, 7, "late"), |_t: f64| 0.5).unwrap();
        let r = hub.poll_cycle(0.05).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[2].logical_id, "late");
        assert_eq!(r[2].sequence, 0);
        assert_eq!(r[0].sequence, 1);
        hub.detach("s0").unwrap();
        assert_eq!(hub.poll_cycle(0.1).unwrap().len(), 2);
        assert!(hub.detach("s0").is_err());
    }

    #[test]
    fn step_in_one_source_is_isolated() {
        let gauge = SharedGauge::new(0.4);
        let mut hub = hub_with(5, 0.4);
        hub.attach(SensorAddress::new(0, 5, "probe"), gauge.clone()).unwrap();
        let before = hub.poll_cycle(0.0).unwrap();
        gauge.set(0.71);
        let after = hub.poll_cycle(0.05).unwrap();
        for (b, a) in before.iter().zip(&after) {
            if a.logical_id == "probe" {
                assert_eq!(a.gauge_pressure_kpa, 0.71);
            } else {
                assert_eq!(a.gauge_pressure_kpa, b.gauge_pressure_kpa);
            }
        }
    }

    #[test]
    fn timestamps_monotone_within_cycle() {
        let mut hub = hub_with(8, 0.4).with_read_interval(0.001);
        let r = hub.poll_cycle(1.0).unwrap();
        assert!(r.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        assert_eq!(r[0].timestamp, 1.0);
    }

    #[test]
    fn two_cycles_two_frames() {
        let mut hub = hub_with(6, 0.4);
        let mut streamer = FrameStreamer::new(DEFAULT_FRAME_BUFFER);
        let mut sink = VecSink::default();
        let end = stream_frames(&mut hub, &mut streamer, &mut sink, [0.0, 0.05]).unwrap();
        assert_eq!(end, StreamEnd::Completed);
        assert_eq!(sink.frames.len(), 2);
        assert!(sink.frames.iter().all(|f| f.readings.len() == 6));
        assert_eq!(sink.frames[1].cycle, 2);
    }

    struct StallSink {
        stalled_until_cycle: u64,
        seen: Vec<u64>,
    }

    impl FrameSink for StallSink {
        fn offer(&mut self, frame: &Frame) -> Delivery {
            if self.seen.len() as u64 >= self.stalled_until_cycle {
                return Delivery::Full;
            }
            self.seen.push(frame.cycle);
            Delivery::Accepted
        }
    }

    #[test]
    fn stalled_sink_drops_oldest() {
        // sink stalls for one second at 20 Hz with a four-frame buffer
        let mut hub = hub_with(6, 0.4);
        let mut streamer = FrameStreamer::new(4);
        let mut sink = StallSink {
            stalled_until_cycle: 0,
            seen: vec![],
        };
        let schedule = (0..20).map(|k| k as f64 / 20.0);
        stream_frames(&mut hub, &mut streamer, &mut sink, schedule).unwrap();
        assert_eq!(streamer.dropped(), 16);
        assert_eq!(streamer.buffered(), 4);
        // once the sink recovers the four freshest frames come out first
        sink.stalled_until_cycle = u64::MAX;
        streamer.flush(&mut sink).unwrap();
        assert_eq!(sink.seen, [17, 18, 19, 20]);
    }

    struct ClosingSink {
        accept: usize,
        got: Vec<Vec<u8>>,
    }

    impl FrameSink for ClosingSink {
        fn offer(&mut self, frame: &Frame) -> Delivery {
            if self.got.len() == self.accept {
                return Delivery::Closed;
            }
            self.got.push(frame.encode());
            Delivery::Accepted
        }
    }

    #[test]
    fn closed_sink_ends_stream_on_frame_boundary() {
        let mut hub = hub_with(3, 0.4);
        let mut streamer = FrameStreamer::new(4);
        let mut sink = ClosingSink { accept: 3, got: vec![] };
        let end = stream_frames(&mut hub, &mut streamer, &mut sink, (0..10).map(f64::from)).unwrap();
        assert_eq!(end, StreamEnd::SinkClosed);
        assert_eq!(sink.got.len(), 3);
        for bytes in &sink.got {
            let (frame, used) = Frame::decode(bytes).unwrap().unwrap();
            assert_eq!(used, bytes.len());
            assert_eq!(frame.readings.len(), 3);
        }
    }

    #[test]
    fn wire_format_fields() {
        let mut hub = hub_with(2, 0.4);
        let readings = hub.poll_cycle(0.5).unwrap();
        let frame = Frame { cycle: 1, dropped: 0, readings };
        let bytes = frame.encode();
        let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        assert_eq!(len + 4, bytes.len());
        let body = std::str::from_utf8(&bytes[4..]).unwrap();
        let mut lines = body.lines();
        assert_eq!(lines.next().unwrap(), r#"{"cycle":1,"n":2,"dropped":0}"#);
        assert_eq!(lines.next().unwrap(), r#"{"id":"s0","t":0.5,"seq":0,"p_kpa":0.4}"#);
        assert!(Frame::decode(&bytes[..bytes.len() - 1]).unwrap().is_none());
    }
}
