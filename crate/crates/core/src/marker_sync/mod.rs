//! Event markers on the wire and the sender → receiver clock map.
//!
//! Markers travel as newline-delimited ASCII over any byte stream (TCP in
//! practice). The receiver stamps each line with its own clock; SYNC beats
//! then give `(sender, receiver)` pairs for a linear offset + drift fit.

mod clock;
mod codec;
mod log;
mod transport;

pub use clock::{fit_clock_map, ClockError, ClockMap};
pub use codec::{decode_marker, encode_marker, DecodeError, MarkerKind, MarkerMessage, Severity, MAX_LINE_BYTES};
pub use log::{check_sequence, LogEntry, LogError, MarkerLog, SequenceError};
pub use transport::{
    receive_markers, MarkerSender, MonotonicClock, Pacer, ReceiveReport, ReceiverClock, SimulatedClock, SyncSchedule,
};
