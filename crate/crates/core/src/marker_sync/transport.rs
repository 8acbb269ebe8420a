use std::io::{self, BufRead, BufReader, Read, Write};
use std::time::{Duration, Instant};

use super::codec::{decode_marker, encode_marker, MarkerKind, MarkerMessage, Severity};
use crate::frame_io::Micros;

/// Writes marker lines with a gap-free sequence number starting at 0.
#[derive(Debug)]
pub struct MarkerSender<W: Write> {
    out: W,
    next_seq: u64,
}

impl<W: Write> MarkerSender<W> {
    pub fn new(out: W) -> Self {
        Self { out, next_seq: 0 }
    }

    /// Encodes, writes and flushes one line; the sequence number is only
    /// consumed if the write succeeds.
    pub fn send(&mut self, kind: MarkerKind, timestamp_us: Micros, severity: Severity) -> io::Result<MarkerMessage> {
        let m = MarkerMessage {
            kind,
            seq: self.next_seq,
            timestamp_us,
            severity,
        };
        self.out.write_all(&encode_marker(&m))?;
        self.out.flush()?;
        self.next_seq += 1;
        Ok(m)
    }

    pub fn sent(&self) -> u64 {
        self.next_seq
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Decides when a SYNC beat is due on the stream clock.
#[derive(Debug, Clone)]
pub struct SyncSchedule {
    interval_us: Micros,
    next_us: Micros,
}

impl SyncSchedule {
    pub fn new(interval_us: Micros) -> Self {
        assert!(interval_us > 0, "sync interval must be positive");
        Self {
            interval_us,
            next_us: 0,
        }
    }

    /// True at most once per interval: for the first sample at or after each
    /// multiple of the interval. Skipped beats are not replayed.
    pub fn due(&mut self, t: Micros) -> bool {
        if t < self.next_us {
            return false;
        }
        self.next_us = (t / self.interval_us + 1) * self.interval_us;
        true
    }
}

/// Receiver-side clock in microseconds.
pub trait ReceiverClock {
    fn now_us(&self) -> i64;
}

/// Wall time since `origin`.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new(origin: Instant) -> Self {
        Self { origin }
    }
}

impl ReceiverClock for MonotonicClock {
    fn now_us(&self) -> i64 {
        self.origin.elapsed().as_micros() as i64
    }
}

/// `offset_us + rate * elapsed_us`. With a sender replaying at `speed`×
/// real time, `rate = speed * (1 + drift)` yields a receiver clock that
/// runs `1 + drift` times the sender's stream clock.
#[derive(Debug, Clone, Copy)]
pub struct SimulatedClock {
    pub origin: Instant,
    pub offset_us: f64,
    pub rate: f64,
}

impl ReceiverClock for SimulatedClock {
    fn now_us(&self) -> i64 {
        (self.offset_us + self.rate * self.origin.elapsed().as_secs_f64() * 1e6).round() as i64
    }
}

/// Sleeps until stream time `t` is due at `speed`× real time.
#[derive(Debug, Clone, Copy)]
pub struct Pacer {
    origin: Instant,
    speed: f64,
}

impl Pacer {
    /// `speed <= 0` disables pacing.
    pub fn new(origin: Instant, speed: f64) -> Self {
        Self { origin, speed }
    }

    pub fn wait_until(&self, t: Micros) {
        if !(self.speed > 0.0) {
            return;
        }
        let due = self.origin + Duration::from_secs_f64(t as f64 / 1e6 / self.speed);
        let now = Instant::now();
        if due > now {
            std::thread::sleep(due - now);
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReceiveReport {
    pub lines: usize,
    pub on: usize,
    pub off: usize,
    pub sync: usize,
    pub undecodable: usize,
}

/// Reads lines until EOF, writing `<arrival_us> <raw line>` for each one as
/// it arrives. Undecodable lines are logged and counted, not fatal.
pub fn receive_markers<R: Read, C: ReceiverClock, L: Write>(
    stream: R,
    clock: &C,
    mut log: L,
) -> io::Result<ReceiveReport> {
    let mut reader = BufReader::new(stream);
    let mut report = ReceiveReport::default();
    let mut line = Vec::new();
    loop {
        line.clear();
        if reader.read_until(b'\n', &mut line)? == 0 {
            break;
        }
        let arrival = clock.now_us();
        let raw = line.strip_suffix(b"\n").unwrap_or(&line);
        write!(log, "{arrival} ")?;
        log.write_all(raw)?;
        log.write_all(b"\n")?;
        report.lines += 1;
        match decode_marker(&line) {
            Ok(m) => match m.kind {
                MarkerKind::On => report.on += 1,
                MarkerKind::Off => report.off += 1,
                MarkerKind::Sync => report.sync += 1,
            },
            Err(_) => report.undecodable += 1,
        }
    }
    log.flush()?;
    Ok(report)
}
