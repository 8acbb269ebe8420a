use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{EegError, EegRecording};

/// JSON metadata stored next to the CSV samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub sampling_rate_hz: f64,
    pub channel_names: Vec<String>,
    pub t0_us: i64,
    pub subject_id: String,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> EegError {
    EegError::Io(format!("{}: {e}", path.display()))
}

/// Reads `t_s,<ch1>,...` rows (one per sample) plus the JSON sidecar.
pub fn load_recording(csv_path: impl AsRef<Path>, sidecar_path: impl AsRef<Path>) -> Result<EegRecording, EegError> {
    let (csv_path, sidecar_path) = (csv_path.as_ref(), sidecar_path.as_ref());
    let sidecar: Sidecar = serde_json::from_reader(File::open(sidecar_path).map_err(|e| io_err(sidecar_path, e))?)
        .map_err(|e| io_err(sidecar_path, e))?;
    let fs = sidecar.sampling_rate_hz;
    if !(fs > 0.0) {
        return Err(EegError::InvalidRecording(format!("sampling rate {fs}")));
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(csv_path)
        .map_err(|e| io_err(csv_path, e))?;
    let header = reader.headers().map_err(|e| io_err(csv_path, e))?.clone();
    if header.get(0) != Some("t_s") {
        return Err(EegError::InvalidRecording(format!(
            "{}: first column must be t_s",
            csv_path.display()
        )));
    }
    let n_ch = header.len() - 1;
    if n_ch != sidecar.channel_names.len() {
        return Err(EegError::ChannelMismatch {
            header: n_ch,
            sidecar: sidecar.channel_names.len(),
        });
    }
    for (i, (h, s)) in header.iter().skip(1).zip(&sidecar.channel_names).enumerate() {
        if h.trim() != s {
            return Err(EegError::ChannelName {
                col: i + 2,
                header: h.to_string(),
                sidecar: s.clone(),
            });
        }
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); n_ch];
    let mut prev_t: Option<f64> = None;
    for record in reader.records() {
        let record = record.map_err(|e| io_err(csv_path, e))?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(EegError::RaggedRow {
                row,
                found: record.len(),
                expected: header.len(),
            });
        }
        let mut cells = record.iter().enumerate().map(|(c, cell)| {
            cell.trim().parse::<f64>().map_err(|_| EegError::NonNumeric {
                row,
                col: c + 1,
                value: cell.to_string(),
            })
        });
        let t = cells.next().unwrap()?;
        if let Some(p) = prev_t {
            let deviation_s = ((t - p) - 1.0 / fs).abs();
            if !(deviation_s < 1e-6) {
                return Err(EegError::NonUniformSampling { row, deviation_s });
            }
        }
        prev_t = Some(t);
        for (col, v) in columns.iter_mut().zip(cells) {
            col.push(v?);
        }
    }
    let n = columns.first().map_or(0, Vec::len);
    let samples = Array2::from_shape_fn((n_ch, n), |(c, i)| columns[c][i]);
    EegRecording::new(fs, sidecar.channel_names, samples, sidecar.t0_us, sidecar.subject_id)
}

/// Writes the CSV (`t_s` = seconds since the first sample) and sidecar.
/// Values use shortest round-trip formatting, so a reload is exact.
pub fn write_recording(
    rec: &EegRecording,
    csv_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<(), EegError> {
    let (csv_path, sidecar_path) = (csv_path.as_ref(), sidecar_path.as_ref());
    let sidecar = Sidecar {
        sampling_rate_hz: rec.sampling_rate,
        channel_names: rec.channel_names.clone(),
        t0_us: rec.t0_us,
        subject_id: rec.subject_id.clone(),
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| io_err(sidecar_path, e))?;
    std::fs::write(sidecar_path, json + "\n").map_err(|e| io_err(sidecar_path, e))?;

    let mut w = BufWriter::new(File::create(csv_path).map_err(|e| io_err(csv_path, e))?);
    let mut write = || -> std::io::Result<()> {
        write!(w, "t_s")?;
        for name in &rec.channel_names {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for i in 0..rec.n_samples() {
            write!(w, "{}", i as f64 / rec.sampling_rate)?;
            for v in rec.samples.column(i) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    };
    write().map_err(|e| io_err(csv_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_pair(dir: &Path, csv: &str, names: &[&str], fs: f64) -> (std::path::PathBuf, std::path::PathBuf) {
        let c = dir.join("eeg.csv");
        let s = dir.join("eeg.json");
        std::fs::write(&c, csv).unwrap();
        let sidecar = Sidecar {
            sampling_rate_hz: fs,
            channel_names: names.iter().map(|n| n.to_string()).collect(),
            t0_us: 5,
            subject_id: "s01".into(),
        };
        std::fs::write(&s, serde_json::to_string(&sidecar).unwrap()).unwrap();
        (c, s)
    }

    #[test]
    fn parses_small_file() {
        let dir = tempfile::tempdir().unwrap();
        let csv = "t_s,Fz,Cz\n0,1,2\n0.00390625,3,4\n0.0078125,5,6\n0.01171875,7,8\n";
        let (c, s) = write_pair(dir.path(), csv, &["Fz", "Cz"], 256.0);
        let rec = load_recording(&c, &s).unwrap();
        assert_eq!(rec.samples.dim(), (2, 4));
        assert_eq!(rec.sampling_rate, 256.0);
        assert_eq!(rec.samples[[1, 3]], 8.0);
        assert_eq!(rec.t0_us, 5);
    }

    #[test]
    fn input_errors() {
        let dir = tempfile::tempdir().unwrap();
        let (c, s) = write_pair(dir.path(), "t_s,Fz\n0,1\n", &["Fz", "Cz"], 256.0);
        assert!(matches!(
            load_recording(&c, &s),
            Err(EegError::ChannelMismatch { header: 1, sidecar: 2 })
        ));

        let (c, s) = write_pair(dir.path(), "t_s,Fz\n0,1\n0.0078125,2\n", &["Fz"], 256.0);
        assert!(matches!(
            load_recording(&c, &s),
            Err(EegError::NonUniformSampling { row: 3, .. })
        ));

        let (c, s) = write_pair(dir.path(), "t_s,Fz,Cz\n0,1,x\n", &["Fz", "Cz"], 256.0);
        match load_recording(&c, &s) {
            Err(EegError::NonNumeric { row, col, value }) => {
                assert_eq!((row, col, value.as_str()), (2, 3, "x"));
            }
            other => panic!("{other:?}"),
        }

        let (c, s) = write_pair(dir.path(), "t_s,Fz,Pz\n0,1,2\n", &["Fz", "Cz"], 256.0);
        assert!(matches!(
            load_recording(&c, &s),
            Err(EegError::ChannelName { col: 3, .. })
        ));
    }

    #[test]
    fn write_then_load_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let data = Array2::from_shape_fn((3, 300), |(c, i)| ((c * 31 + i) as f64).sin() * 17.3);
        let rec = EegRecording::new(
            250.0,
            vec!["Fz".into(), "Cz".into(), "Pz".into()],
            data,
            -42,
            "x".into(),
        )
        .unwrap();
        let (c, s) = (dir.path().join("a.csv"), dir.path().join("a.json"));
        write_recording(&rec, &c, &s).unwrap();
        assert_eq!(load_recording(&c, &s).unwrap(), rec);
    }
}
