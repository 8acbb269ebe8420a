//! `events.json` and `intensity.csv` formats.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{DetectError, GoosebumpEvent, IntensitySample};

/// `{"events":[{"onset_us":..,"offset_us":..,"severity":..,"mean_z":..}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventList {
    pub events: Vec<GoosebumpEvent>,
}

pub fn write_events_json(w: impl Write, events: &[GoosebumpEvent]) -> Result<(), DetectError> {
    let list = EventList {
        events: events.to_vec(),
    };
    serde_json::to_writer_pretty(w, &list).map_err(|e| DetectError::Io(e.to_string()))
}

pub fn read_events_json(r: impl std::io::Read) -> Result<Vec<GoosebumpEvent>, DetectError> {
    let list: EventList = serde_json::from_reader(r).map_err(|e| DetectError::Io(e.to_string()))?;
    Ok(list.events)
}

/// Header `t_us,raw,z`; `z` is empty for uncalibrated samples.
pub fn write_intensity_csv(mut w: impl Write, samples: &[IntensitySample]) -> Result<(), DetectError> {
    let io = |e: std::io::Error| DetectError::Io(e.to_string());
    writeln!(w, "t_us,raw,z").map_err(io)?;
    for s in samples {
        match s.z {
            Some(z) => writeln!(w, "{},{},{}", s.timestamp_us, s.raw_energy, z),
            None => writeln!(w, "{},{},", s.timestamp_us, s.raw_energy),
        }
        .map_err(io)?;
    }
    Ok(())
}

pub fn read_intensity_csv(r: impl BufRead) -> Result<Vec<IntensitySample>, DetectError> {
    let mut lines = r.lines();
    let bad = |line: usize, what: &str| DetectError::Io(format!("intensity csv line {line}: {what}"));
    match lines.next() {
        Some(Ok(h)) if h.trim_end() == "t_us,raw,z" => {}
        _ => return Err(bad(1, "expected header t_us,raw,z")),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| bad(line_no, &e.to_string()))?;
        let cols: Vec<&str> = line.trim_end().split(',').collect();
        if cols.len() != 3 {
            return Err(bad(line_no, "expected 3 columns"));
        }
        let timestamp_us = cols[0].parse().map_err(|_| bad(line_no, "t_us"))?;
        let raw_energy = cols[1].parse().map_err(|_| bad(line_no, "raw"))?;
        let z = if cols[2].is_empty() {
            None
        } else {
            Some(cols[2].parse().map_err(|_| bad(line_no, "z"))?)
        };
        out.push(IntensitySample {
            timestamp_us,
            raw_energy,
            z,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_preserves_values() {
        let samples = vec![
            IntensitySample {
                timestamp_us: 0,
                raw_energy: 0.0123456789,
                z: Some(-0.25),
            },
            IntensitySample {
                timestamp_us: 33333,
                raw_energy: 1.0 / 3.0,
                z: None,
            },
        ];
        let mut buf = Vec::new();
        write_intensity_csv(&mut buf, &samples).unwrap();
        assert!(buf.starts_with(b"t_us,raw,z\n0,"));
        assert_eq!(read_intensity_csv(&buf[..]).unwrap(), samples);
    }

    #[test]
    fn events_json_schema() {
        let ev = GoosebumpEvent {
            onset_us: 10,
            offset_us: 20,
            severity: 4.5,
            mean_z: 3.25,
        };
        let mut buf = Vec::new();
        write_events_json(&mut buf, &[ev]).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["events"][0]["onset_us"], 10);
        assert_eq!(v["events"][0]["offset_us"], 20);
        assert_eq!(v["events"][0]["severity"], 4.5);
        assert_eq!(v["events"][0]["mean_z"], 3.25);
        assert_eq!(read_events_json(&buf[..]).unwrap(), vec![ev]);
    }
}
