use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::spectral::welch_psd;
use super::{Band, ChannelGroup, EegError, EegRecording, MappedEvent};

/// Length of the pre and post phases, and the cap on the during phase.
pub const PHASE_SECONDS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Pre,
    During,
    Post,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Pre, Phase::During, Phase::Post];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Pre => "pre",
            Phase::During => "during",
            Phase::Post => "post",
        }
    }

    /// Receiver-clock span `[start, end)` in microseconds.
    fn span(self, ev: &MappedEvent) -> (i64, i64) {
        let cap = (PHASE_SECONDS * 1e6) as i64;
        match self {
            Phase::Pre => (ev.onset_us - cap, ev.onset_us),
            Phase::During => (ev.onset_us, ev.onset_us + (ev.offset_us - ev.onset_us).min(cap)),
            Phase::Post => (ev.offset_us, ev.offset_us + cap),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedEvent {
    pub event_index: usize,
    pub reason: String,
}

/// phase → band → group → mean power (µV²/Hz) over used events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub event_count: usize,
    pub used_count: usize,
    pub rejected_count: usize,
    pub rejected: Vec<RejectedEvent>,
    pub power: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>,
}

impl PhaseSummary {
    pub fn get(&self, phase: Phase, band: &str, group: ChannelGroup) -> Option<f64> {
        self.power.get(phase.as_str())?.get(band)?.get(group.as_str()).copied()
    }
}

/// Band power per phase around each event, averaged over group channels and
/// over events. `excluded` lists events already dropped upstream (skipped or
/// artifact-rejected epochs); events whose phases leave the recording, or
/// whose during phase is too short for a Welch estimate, are rejected here.
pub fn phase_summary(
    rec: &EegRecording,
    events: &[MappedEvent],
    bands: &[Band],
    groups: &[ChannelGroup],
    excluded: &[RejectedEvent],
) -> Result<PhaseSummary, EegError> {
    let members: Vec<(ChannelGroup, Vec<usize>)> = groups
        .iter()
        .map(|&g| {
            let m = g.members(&rec.channel_names);
            if m.is_empty() {
                Err(EegError::EmptyGroup(g))
            } else {
                Ok((g, m))
            }
        })
        .collect::<Result<_, _>>()?;
    let min_len = (2.0 * rec.sampling_rate).round() as i64;

    let mut rejected: Vec<RejectedEvent> = Vec::new();
    // [phase][band][group] running sums in event order
    let mut sums = vec![vec![vec![0.0; members.len()]; bands.len()]; Phase::ALL.len()];
    let mut used = 0usize;
    for (event_index, ev) in events.iter().enumerate() {
        if let Some(x) = excluded.iter().find(|x| x.event_index == event_index) {
            rejected.push(x.clone());
            continue;
        }
        let mut spans = Vec::with_capacity(3);
        let mut reason = None;
        for phase in Phase::ALL {
            let (a, b) = phase.span(ev);
            let (i0, i1) = (rec.sample_at(a), rec.sample_at(b));
            if i0 < 0 || i1 > rec.n_samples() as i64 {
                reason = Some(format!("{}_phase_out_of_bounds", phase.as_str()));
                break;
            }
            if i1 - i0 < min_len {
                reason = Some(format!("{}_phase_too_short", phase.as_str()));
                break;
            }
            spans.push((i0 as usize, i1 as usize));
        }
        if let Some(reason) = reason {
            rejected.push(RejectedEvent { event_index, reason });
            continue;
        }
        for (p, &(i0, i1)) in spans.iter().enumerate() {
            for (g, (_, chans)) in members.iter().enumerate() {
                let mut group_sum = vec![0.0; bands.len()];
                for &c in chans {
                    let seg: Vec<f64> = rec.samples.row(c).slice(ndarray::s![i0..i1]).to_vec();
                    let psd = welch_psd(&seg, rec.sampling_rate)?;
                    for (s, band) in group_sum.iter_mut().zip(bands) {
                        *s += psd.band_mean(band);
                    }
                }
                for (k, s) in group_sum.into_iter().enumerate() {
                    sums[p][k][g] += s / chans.len() as f64;
                }
            }
        }
        used += 1;
    }

    let mut power = BTreeMap::new();
    if used > 0 {
        for (p, phase) in Phase::ALL.iter().enumerate() {
            let by_band = power.entry(phase.as_str().to_string()).or_insert_with(BTreeMap::new);
            for (k, band) in bands.iter().enumerate() {
                let by_group = by_band.entry(band.name.clone()).or_insert_with(BTreeMap::new);
                for (g, (group, _)) in members.iter().enumerate() {
                    by_group.insert(group.as_str().to_string(), sums[p][k][g] / used as f64);
                }
            }
        }
    }
    rejected.sort_by_key(|r| r.event_index);
    Ok(PhaseSummary {
        event_count: events.len(),
        used_count: used,
        rejected_count: rejected.len(),
        rejected,
        power,
    })
}
