//! `GB/1 <seq> <t_us> <KIND> <severity>\n`

use std::fmt;

use thiserror::Error;

pub const MAGIC: &str = "GB/";
pub const VERSION: &str = "1";
/// Longest line the decoder will look at, newline included.
pub const MAX_LINE_BYTES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkerKind {
    On,
    Off,
    Sync,
}

impl MarkerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MarkerKind::On => "ON",
            MarkerKind::Off => "OFF",
            MarkerKind::Sync => "SYNC",
        }
    }

    fn parse(s: &[u8]) -> Option<Self> {
        match s {
            b"ON" => Some(MarkerKind::On),
            b"OFF" => Some(MarkerKind::Off),
            b"SYNC" => Some(MarkerKind::Sync),
            _ => None,
        }
    }
}

/// Fixed-point z value in thousandths, so a decoded message compares equal
/// to the one that was encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Severity(pub i64);

impl Severity {
    pub const ZERO: Severity = Severity(0);

    pub fn from_z(z: f64) -> Self {
        Severity((z * 1000.0).round() as i64)
    }

    pub fn as_z(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:03}", abs / 1000, abs % 1000)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkerMessage {
    pub kind: MarkerKind,
    pub seq: u64,
    /// Sender clock, microseconds since session start.
    pub timestamp_us: u64,
    pub severity: Severity,
}

impl MarkerMessage {
    pub fn sync(seq: u64, timestamp_us: u64) -> Self {
        Self {
            kind: MarkerKind::Sync,
            seq,
            timestamp_us,
            severity: Severity::ZERO,
        }
    }
}

pub fn encode_marker(m: &MarkerMessage) -> Vec<u8> {
    format!(
        "{MAGIC}{VERSION} {} {} {} {}\n",
        m.seq,
        m.timestamp_us,
        m.kind.as_str(),
        m.severity
    )
    .into_bytes()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("line of {len} bytes exceeds the {MAX_LINE_BYTES}-byte limit")]
    TooLong { len: usize },
    #[error("unknown magic at byte {offset}")]
    BadMagic { offset: usize },
    #[error("unsupported protocol version at byte {offset}")]
    UnsupportedVersion { offset: usize },
    #[error("expected 5 fields, found {found} (byte {offset})")]
    FieldCount { found: usize, offset: usize },
    #[error("{field} is not a valid number at byte {offset}")]
    NonNumeric { field: &'static str, offset: usize },
    #[error("unknown marker kind at byte {offset}")]
    UnknownKind { offset: usize },
}

fn parse_unsigned(bytes: &[u8]) -> Option<u64> {
    if bytes.is_empty() || bytes.len() > 20 || !bytes.iter().all(u8::is_ascii_digit) {
        return None;
    }
    bytes
        .iter()
        .try_fold(0u64, |acc, &b| acc.checked_mul(10)?.checked_add((b - b'0') as u64))
}

fn parse_severity(bytes: &[u8]) -> Option<Severity> {
    let (negative, body) = match bytes.split_first() {
        Some((b'-', rest)) => (true, rest),
        _ => (false, bytes),
    };
    let dot = body.iter().position(|&b| b == b'.')?;
    let (int, frac) = (&body[..dot], &body[dot + 1..]);
    if int.is_empty() || frac.len() != 3 {
        return None;
    }
    let whole = parse_unsigned(int)?;
    let thousandths = parse_unsigned(frac)?;
    let magnitude = i64::try_from(whole.checked_mul(1000)?.checked_add(thousandths)?).ok()?;
    Some(Severity(if negative { -magnitude } else { magnitude }))
}

/// Parses one protocol line; a single trailing `\n` is optional.
pub fn decode_marker(line: &[u8]) -> Result<MarkerMessage, DecodeError> {
    if line.len() > MAX_LINE_BYTES {
        return Err(DecodeError::TooLong { len: line.len() });
    }
    let body = line.strip_suffix(b"\n").unwrap_or(line);

    let mut fields: Vec<(usize, &[u8])> = Vec::with_capacity(5);
    let mut start = 0;
    for (i, &b) in body.iter().enumerate() {
        if b == b' ' {
            fields.push((start, &body[start..i]));
            start = i + 1;
        }
    }
    fields.push((start, &body[start..]));

    let (_, magic) = fields[0];
    let Some(version) = magic.strip_prefix(MAGIC.as_bytes()) else {
        return Err(DecodeError::BadMagic { offset: 0 });
    };
    if version != VERSION.as_bytes() {
        return Err(DecodeError::UnsupportedVersion { offset: MAGIC.len() });
    }
    if fields.len() != 5 {
        let offset = fields.get(5).map_or(body.len(), |f| f.0);
        return Err(DecodeError::FieldCount {
            found: fields.len(),
            offset,
        });
    }
    let (seq_at, seq) = fields[1];
    let (t_at, t) = fields[2];
    let (kind_at, kind) = fields[3];
    let (sev_at, sev) = fields[4];
    Ok(MarkerMessage {
        seq: parse_unsigned(seq).ok_or(DecodeError::NonNumeric {
            field: "seq",
            offset: seq_at,
        })?,
        timestamp_us: parse_unsigned(t).ok_or(DecodeError::NonNumeric {
            field: "t_us",
            offset: t_at,
        })?,
        kind: MarkerKind::parse(kind).ok_or(DecodeError::UnknownKind { offset: kind_at })?,
        severity: parse_severity(sev).ok_or(DecodeError::NonNumeric {
            field: "severity",
            offset: sev_at,
        })?,
    })
}
