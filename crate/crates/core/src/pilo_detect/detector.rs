use std::ops::Range;

use super::{scored_values, DetectError, DetectorConfig, GoosebumpEvent, IntensitySample};
use crate::frame_io::Micros;

/// A hysteresis candidate: the samples it covers and where it closed.
#[derive(Debug, Clone)]
struct Candidate {
    onset: Micros,
    offset: Micros,
    samples: Range<usize>,
}

/// Offline event detection over a calibrated trace.
///
/// A candidate opens at the first of `confirm_samples` consecutive samples
/// with `z >= theta_on` and closes at the first later sample with
/// `z < theta_off`; that sample's timestamp is
/// the offset and it is not part of the candidate. A candidate still open at
/// the end closes at the final timestamp and keeps every remaining sample.
/// Candidates whose gap is below `merge_gap` are merged, then anything
/// shorter than `min_duration` is dropped.
pub fn detect_events(samples: &[IntensitySample], config: &DetectorConfig) -> Result<Vec<GoosebumpEvent>, DetectError> {
    config.validate()?;
    let trace = scored_values(samples)?;
    let n = trace.len();

    let mut candidates = Vec::new();
    let mut i = 0;
    while i < n {
        let confirmed = i + config.confirm_samples <= n
            && trace[i..i + config.confirm_samples]
                .iter()
                .all(|s| s.1 >= config.theta_on);
        if !confirmed {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < n && trace[j].1 >= config.theta_off {
            j += 1;
        }
        let offset = if j < n { trace[j].0 } else { trace[n - 1].0 };
        candidates.push(Candidate {
            onset: trace[i].0,
            offset,
            samples: i..j,
        });
        i = j + 1;
    }

    let merge_gap = config.merge_gap_us();
    let mut groups: Vec<Vec<Candidate>> = Vec::new();
    for c in candidates {
        match groups.last_mut() {
            Some(g) if c.onset - g.last().unwrap().offset < merge_gap => g.push(c),
            _ => groups.push(vec![c]),
        }
    }

    let min_duration = config.min_duration_us();
    Ok(groups
        .into_iter()
        .filter_map(|g| {
            let onset = g[0].onset;
            let offset = g.last().unwrap().offset;
            if offset - onset < min_duration {
                return None;
            }
            let mut peak = f64::NEG_INFINITY;
            let mut sum = 0.0;
            let mut count = 0usize;
            for z in g.iter().flat_map(|c| trace[c.samples.clone()].iter().map(|s| s.1)) {
                peak = peak.max(z);
                sum += z;
                count += 1;
            }
            Some(GoosebumpEvent {
                onset_us: onset,
                offset_us: offset,
                severity: peak,
                mean_z: sum / count as f64,
            })
        })
        .collect())
}
