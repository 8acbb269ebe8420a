//! Goosebump measurement chain: skin frames → piloerection intensity trace →
//! thresholded events → timestamped markers on the EEG clock → event-locked
//! EEG analysis.

pub mod eeg_analysis;
pub mod frame_io;
mod imgproc;
pub mod live;
pub mod marker_sync;
pub mod pilo_detect;

pub use imgproc::gaussian_kernel;
