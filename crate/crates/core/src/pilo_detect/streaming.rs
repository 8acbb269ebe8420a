use super::{DetectError, DetectorConfig, GoosebumpEvent, IntensitySample};
use crate::frame_io::Micros;

/// A live detector edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Edge {
    /// The episode starting at `onset_us` is now certain to survive the
    /// duration gate. `peak` is the running maximum z so far.
    On { onset_us: Micros, peak: f64 },
    /// The episode is final: no later candidate can merge into it.
    Off(GoosebumpEvent),
}

#[derive(Debug, Clone, Copy)]
struct Group {
    onset: Micros,
    peak: f64,
    sum: f64,
    count: usize,
    announced: bool,
}

impl Group {
    fn start(onset: Micros) -> Self {
        Self {
            onset,
            peak: f64::NEG_INFINITY,
            sum: 0.0,
            count: 0,
            announced: false,
        }
    }

    fn add(&mut self, z: f64) {
        self.peak = self.peak.max(z);
        self.sum += z;
        self.count += 1;
    }

    fn event(&self, offset: Micros) -> GoosebumpEvent {
        GoosebumpEvent {
            onset_us: self.onset,
            offset_us: offset,
            severity: self.peak,
            mean_z: self.sum / self.count as f64,
        }
    }
}

/// Where the current (possibly merged) episode stands.
#[derive(Debug, Clone, Copy)]
enum Episode {
    None,
    Open(Group),
    /// Last candidate closed at `offset`; waiting out the merge gap.
    Closed {
        group: Group,
        offset: Micros,
    },
}

/// Samples at or above `theta_on` that have not yet confirmed a candidate.
#[derive(Debug, Clone, Default)]
struct Run {
    start: Micros,
    zs: Vec<f64>,
}

/// Sample-at-a-time form of [`super::detect_events`].
///
/// `On` is emitted once the open episode has lasted `min_duration` (or
/// closes having done so), `Off` once no later candidate can merge into it,
/// which is at least `merge_gap` after its close. Feeding a finite trace
/// and then calling [`finish`] yields exactly the offline event list in the
/// `Off` edges.
///
/// [`finish`]: StreamingDetector::finish
#[derive(Debug, Clone)]
pub struct StreamingDetector {
    theta_on: f64,
    theta_off: f64,
    min_duration: Micros,
    merge_gap: Micros,
    confirm: usize,
    index: usize,
    last_t: Option<Micros>,
    episode: Episode,
    run: Option<Run>,
}

impl StreamingDetector {
    pub fn new(config: &DetectorConfig) -> Result<Self, DetectError> {
        config.validate()?;
        Ok(Self {
            theta_on: config.theta_on,
            theta_off: config.theta_off,
            min_duration: config.min_duration_us(),
            merge_gap: config.merge_gap_us(),
            confirm: config.confirm_samples,
            index: 0,
            last_t: None,
            episode: Episode::None,
            run: None,
        })
    }

    fn announce(&self, group: &mut Group, now: Micros) -> Option<Edge> {
        if !group.announced && now - group.onset >= self.min_duration {
            group.announced = true;
            Some(Edge::On {
                onset_us: group.onset,
                peak: group.peak,
            })
        } else {
            None
        }
    }

    fn finalize(&self, group: &Group, offset: Micros) -> Option<Edge> {
        (offset - group.onset >= self.min_duration).then(|| Edge::Off(group.event(offset)))
    }

    /// Feeds one calibrated sample; returns the edges it completes (almost
    /// always zero or one).
    pub fn push(&mut self, sample: &IntensitySample) -> Result<Vec<Edge>, DetectError> {
        let index = self.index;
        let t = sample.timestamp_us;
        if self.last_t.is_some_and(|prev| t <= prev) {
            return Err(DetectError::Unordered { index, timestamp_us: t });
        }
        let z = sample.z.ok_or(DetectError::Uncalibrated { index })?;
        self.index += 1;
        self.last_t = Some(t);
        let mut edges = Vec::new();

        if let Episode::Open(mut group) = self.episode {
            if z < self.theta_off {
                edges.extend(self.announce(&mut group, t));
                self.episode = Episode::Closed { group, offset: t };
            } else {
                group.add(z);
                edges.extend(self.announce(&mut group, t));
                self.episode = Episode::Open(group);
            }
            return Ok(edges);
        }

        if z >= self.theta_on {
            self.run
                .get_or_insert_with(|| Run {
                    start: t,
                    zs: Vec::new(),
                })
                .zs
                .push(z);
        } else {
            self.run = None;
        }

        if let Episode::Closed { group, offset } = self.episode {
            // earliest onset any future candidate could still have
            let earliest = self.run.as_ref().map_or(t, |r| r.start);
            if earliest - offset >= self.merge_gap {
                edges.extend(self.finalize(&group, offset));
                self.episode = Episode::None;
            }
        }

        if self.run.as_ref().is_some_and(|r| r.zs.len() >= self.confirm) {
            let run = self.run.take().unwrap();
            let mut group = match self.episode {
                Episode::Closed { group, .. } => group,
                _ => Group::start(run.start),
            };
            run.zs.iter().for_each(|&z| group.add(z));
            edges.extend(self.announce(&mut group, t));
            self.episode = Episode::Open(group);
        }
        Ok(edges)
    }

    /// Ends the stream: an open episode closes at the last timestamp, and an
    /// unconfirmed run is dropped.
    pub fn finish(mut self) -> Vec<Edge> {
        let mut edges = Vec::new();
        match self.episode {
            Episode::None => {}
            Episode::Open(mut group) => {
                let offset = self.last_t.unwrap_or(group.onset);
                edges.extend(self.announce(&mut group, offset));
                edges.extend(self.finalize(&group, offset));
            }
            Episode::Closed { group, offset } => edges.extend(self.finalize(&group, offset)),
        }
        self.episode = Episode::None;
        edges
    }
}
