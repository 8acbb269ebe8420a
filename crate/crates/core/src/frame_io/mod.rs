//! Skin-image frames: loading timestamped PGM sequences from disk, writing
//! them back, synthetic skin sequences with known goosebump intervals, and
//! illumination normalization.

pub mod pgm;
mod preprocess;
mod synth;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use preprocess::{preprocess, Preprocessor};
pub use synth::{synth_frames, EventInterval, GroundTruth, SynthConfig};

/// Microseconds since session start (sender clock).
pub type Micros = u64;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("frame directory {0} does not exist or is not a directory")]
    MissingDirectory(PathBuf),
    #[error("no frame_<t_us>.pgm files in {0}")]
    NoFrames(PathBuf),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed PGM {path}: {source}")]
    Malformed {
        path: PathBuf,
        #[source]
        source: pgm::PgmError,
    },
    #[error("duplicate timestamp {timestamp_us} us in {path}")]
    DuplicateTimestamp { path: PathBuf, timestamp_us: Micros },
    #[error("dimension mismatch in {path}: {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        path: PathBuf,
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("region {roi:?} does not fit inside a {width}x{height} frame")]
    RoiOutOfBounds { roi: Roi, width: usize, height: usize },
    #[error("region {roi:?} is smaller than the 16x16 minimum")]
    RoiTooSmall { roi: Roi },
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),
}

/// One timestamped grayscale skin image.
///
/// Frames produced by the loaders and the synthesizer hold luminance in
/// `[0, 1]`. [`Frame::scaled`] deliberately leaves that range to model a
/// global brightness change applied before sensor clipping.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
    pub timestamp_us: Micros,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>, timestamp_us: Micros) -> Result<Self, FrameError> {
        if pixels.len() != width * height {
            return Err(FrameError::InvalidFrame(format!(
                "{} pixels for a {width}x{height} frame",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(FrameError::InvalidFrame(format!(
                "pixel {i} = {} outside [0, 1]",
                pixels[i]
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
            timestamp_us,
        })
    }

    /// Multiplies every pixel by `gain` without clipping.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            pixels: self.pixels.iter().map(|v| v * gain).collect(),
            ..self.clone()
        }
    }

    pub fn full_roi(&self) -> Roi {
        Roi {
            x: 0,
            y: 0,
            width: self.width,
            height: self.height,
        }
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

pub fn frame_file_name(timestamp_us: Micros) -> String {
    format!("frame_{timestamp_us}.pgm")
}

fn parse_frame_name(name: &str) -> Option<Micros> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".pgm")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Lazily reads a frame directory in timestamp order, checking that every
/// frame matches the first one's dimensions.
#[derive(Debug)]
pub struct FrameStream {
    paths: std::collections::btree_map::IntoIter<Micros, PathBuf>,
    dims: Option<(usize, usize)>,
    len: usize,
}

impl FrameStream {
    /// Indexes every `frame_<t_us>.pgm` in `dir`; other files are ignored.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, FrameError> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(FrameError::MissingDirectory(dir.to_path_buf()));
        }
        let io_err = |source| FrameError::Io {
            path: dir.to_path_buf(),
            source,
        };
        let mut by_time: BTreeMap<Micros, PathBuf> = BTreeMap::new();
        for entry in fs::read_dir(dir).map_err(io_err)? {
            let entry = entry.map_err(io_err)?;
            let name = entry.file_name();
            let Some(t) = name.to_str().and_then(parse_frame_name) else {
                continue;
            };
            let path = entry.path();
            if let Some(prev) = by_time.insert(t, path.clone()) {
                // report whichever name sorts later so the error is stable
                let offender = prev.max(path);
                return Err(FrameError::DuplicateTimestamp {
                    path: offender,
                    timestamp_us: t,
                });
            }
        }
        if by_time.is_empty() {
            return Err(FrameError::NoFrames(dir.to_path_buf()));
        }
        Ok(Self {
            len: by_time.len(),
            paths: by_time.into_iter(),
            dims: None,
        })
    }

    /// Number of frames indexed at open.
    pub fn frame_count(&self) -> usize {
        self.len
    }

    fn read(&mut self, t: Micros, path: PathBuf) -> Result<Frame, FrameError> {
        let bytes = fs::read(&path).map_err(|source| FrameError::Io {
            path: path.clone(),
            source,
        })?;
        let img = pgm::decode(&bytes).map_err(|source| FrameError::Malformed {
            path: path.clone(),
            source,
        })?;
        match self.dims {
            Some((want_w, want_h)) if (img.width, img.height) != (want_w, want_h) => {
                return Err(FrameError::DimensionMismatch {
                    path,
                    got_w: img.width,
                    got_h: img.height,
                    want_w,
                    want_h,
                });
            }
            _ => self.dims = Some((img.width, img.height)),
        }
        Ok(Frame {
            width: img.width,
            height: img.height,
            pixels: img.luminance,
            timestamp_us: t,
        })
    }
}

impl Iterator for FrameStream {
    type Item = Result<Frame, FrameError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (t, path) = self.paths.next()?;
        Some(self.read(t, path))
    }
}

/// Loads every `frame_<t_us>.pgm` in `dir`, ordered by timestamp. Other
/// files are ignored.
pub fn load_frames(dir: impl AsRef<Path>) -> Result<Vec<Frame>, FrameError> {
    FrameStream::open(dir)?.collect()
}

/// Writes frames as 8-bit PGMs named by timestamp.
pub fn write_frames(dir: impl AsRef<Path>, frames: &[Frame]) -> Result<(), FrameError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| FrameError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for f in frames {
        let path = dir.join(frame_file_name(f.timestamp_us));
        fs::write(&path, pgm::encode_8bit(f.width, f.height, &f.pixels))
            .map_err(|source| FrameError::Io { path, source })?;
    }
    Ok(())
}
