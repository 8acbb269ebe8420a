use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EegError;

/// Coarse scalp regions from 10-20 name prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelGroup {
    Frontal,
    Central,
    Posterior,
}

impl ChannelGroup {
    pub const ALL: [ChannelGroup; 3] = [ChannelGroup::Frontal, ChannelGroup::Central, ChannelGroup::Posterior];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelGroup::Frontal => "frontal",
            ChannelGroup::Central => "central",
            ChannelGroup::Posterior => "posterior",
        }
    }

    pub fn contains(self, channel: &str) -> bool {
        channel_group(channel) == Some(self)
    }

    /// Indices of member channels, ordered by name so sums do not depend
    /// on channel order.
    pub fn members(self, names: &[String]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..names.len()).filter(|&i| self.contains(&names[i])).collect();
        idx.sort_by(|&a, &b| names[a].cmp(&names[b]));
        idx
    }
}

impl fmt::Display for ChannelGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelGroup {
    type Err = EegError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChannelGroup::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| EegError::UnknownGroup(s.to_string()))
    }
}

/// Region of a 10-20 label: its letter prefix (midline `z` dropped) decides.
/// FT, T, TP and I sites belong to no group.
pub fn channel_group(name: &str) -> Option<ChannelGroup> {
    let letters: String = name
        .chars()
        .take_while(|c| c.is_ascii_alphabetic())
        .collect::<String>()
        .to_ascii_uppercase();
    let prefix = letters.strip_suffix('Z').unwrap_or(&letters);
    match prefix {
        "FP" | "AF" | "F" => Some(ChannelGroup::Frontal),
        "C" | "FC" | "CP" => Some(ChannelGroup::Central),
        "P" | "PO" | "O" => Some(ChannelGroup::Posterior),
        _ => None,
    }
}

/// The 64-channel BioSemi 10-20 montage in acquisition order.
pub fn biosemi64() -> Vec<String> {
    [
        "Fp1", "AF7", "AF3", "F1", "F3", "F5", "F7", "FT7", "FC5", "FC3", "FC1", "C1", "C3", "C5", "T7", "TP7", "CP5",
        "CP3", "CP1", "P1", "P3", "P5", "P7", "P9", "PO7", "PO3", "O1", "Iz", "Oz", "POz", "Pz", "CPz", "Fpz", "Fp2",
        "AF8", "AF4", "AFz", "Fz", "F2", "F4", "F6", "F8", "FT8", "FC6", "FC4", "FC2", "FCz", "Cz", "C2", "C4", "C6",
        "T8", "TP8", "CP6", "CP4", "CP2", "P2", "P4", "P6", "P8", "P10", "PO8", "PO4", "O2",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}
