use std::io::BufRead;

use thiserror::Error;

use super::codec::{decode_marker, DecodeError, MarkerKind, MarkerMessage};
use crate::frame_io::Micros;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("marker log line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("marker log: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogEntry {
    /// Receiver clock.
    pub arrival_us: i64,
    pub message: MarkerMessage,
}

/// A parsed receiver log. Lines whose payload does not decode are kept
/// aside with their 1-based line number.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarkerLog {
    pub entries: Vec<LogEntry>,
    pub undecodable: Vec<(usize, DecodeError)>,
}

impl MarkerLog {
    pub fn read<R: BufRead>(reader: R) -> Result<Self, LogError> {
        let mut log = MarkerLog::default();
        for (i, line) in reader.split(b'\n').enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.is_empty() {
                continue;
            }
            let malformed = |reason: &str| LogError::Malformed {
                line: lineno,
                reason: reason.to_string(),
            };
            let space = line
                .iter()
                .position(|&b| b == b' ')
                .ok_or_else(|| malformed("missing arrival timestamp"))?;
            let arrival_us = std::str::from_utf8(&line[..space])
                .ok()
                .and_then(|s| s.parse::<i64>().ok())
                .ok_or_else(|| malformed("arrival timestamp is not an integer"))?;
            match decode_marker(&line[space + 1..]) {
                Ok(message) => log.entries.push(LogEntry { arrival_us, message }),
                Err(e) => log.undecodable.push((lineno, e)),
            }
        }
        Ok(log)
    }

    /// `(sender_us, arrival_us)` for every SYNC line, in log order.
    pub fn sync_pairs(&self) -> Vec<(Micros, i64)> {
        self.entries
            .iter()
            .filter(|e| e.message.kind == MarkerKind::Sync)
            .map(|e| (e.message.timestamp_us, e.arrival_us))
            .collect()
    }

    pub fn count(&self, kind: MarkerKind) -> usize {
        self.entries.iter().filter(|e| e.message.kind == kind).count()
    }

    pub fn messages(&self) -> Vec<MarkerMessage> {
        self.entries.iter().map(|e| e.message).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("message {index}: seq {got}, expected {expected}")]
    SeqGap { index: usize, expected: u64, got: u64 },
    #[error("message {index}: {kind} timestamp {got} precedes {previous}")]
    TimeReversal {
        index: usize,
        kind: &'static str,
        previous: Micros,
        got: Micros,
    },
}

/// Checks one connection's messages: seq runs 0, 1, 2, ... and timestamps
/// never go backwards. SYNC beats and ON/OFF edges are ordered separately
/// because an edge carries the (earlier) time at which it occurred.
pub fn check_sequence(messages: &[MarkerMessage]) -> Result<(), SequenceError> {
    let (mut last_sync, mut last_edge) = (None::<Micros>, None::<Micros>);
    for (index, m) in messages.iter().enumerate() {
        if m.seq != index as u64 {
            return Err(SequenceError::SeqGap {
                index,
                expected: index as u64,
                got: m.seq,
            });
        }
        let (slot, kind) = match m.kind {
            MarkerKind::Sync => (&mut last_sync, "SYNC"),
            _ => (&mut last_edge, "edge"),
        };
        if let Some(previous) = *slot {
            if m.timestamp_us < previous {
                return Err(SequenceError::TimeReversal {
                    index,
                    kind,
                    previous,
                    got: m.timestamp_us,
                });
            }
        }
        *slot = Some(m.timestamp_us);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::codec::Severity;
    use super::*;

    #[test]
    fn parses_log_and_extracts_sync_pairs() {
        let text = b"100 GB/1 0 0 SYNC 0.000\n1100 GB/1 1 1000000 SYNC 0.000\n1200 GB/1 2 900000 ON 4.000\n1300 junk\n";
        let log = MarkerLog::read(&text[..]).unwrap();
        assert_eq!(log.sync_pairs(), vec![(0, 100), (1_000_000, 1100)]);
        assert_eq!(log.count(MarkerKind::On), 1);
        assert_eq!(log.undecodable.len(), 1);
        assert_eq!(log.undecodable[0].0, 4);
        assert!(check_sequence(&log.messages()).is_ok());
    }

    #[test]
    fn malformed_arrival_reported_with_line() {
        let err = MarkerLog::read(&b"100 GB/1 0 0 SYNC 0.000\nabc GB/1 1 0 SYNC 0.000\n"[..]).unwrap_err();
        assert!(matches!(err, LogError::Malformed { line: 2, .. }));
    }

    #[test]
    fn sequence_violations() {
        let m = |kind, seq, t| MarkerMessage {
            kind,
            seq,
            timestamp_us: t,
            severity: Severity::ZERO,
        };
        assert_eq!(
            check_sequence(&[m(MarkerKind::Sync, 0, 0), m(MarkerKind::Sync, 2, 1)]),
            Err(SequenceError::SeqGap {
                index: 1,
                expected: 1,
                got: 2
            })
        );
        assert!(matches!(
            check_sequence(&[m(MarkerKind::Sync, 0, 5), m(MarkerKind::Sync, 1, 4)]),
            Err(SequenceError::TimeReversal { index: 1, .. })
        ));
        assert!(check_sequence(&[
            m(MarkerKind::Sync, 0, 11),
            m(MarkerKind::On, 1, 10),
            m(MarkerKind::Off, 2, 12)
        ])
        .is_ok());
    }
}
