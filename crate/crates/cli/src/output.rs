use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// 17 significant digits, enough to read every double back exactly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a CSV table of floats.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt_float(v)))?;
    }
    w.flush()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}

/// Output directory, created if needed.
pub fn prepare_dir(dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write_csv(&path, &["t", "x"], &[vec![0.0, 1.5], vec![1.0, -2.0]]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x");
        assert_eq!(lines[1], "0.0000000000000000e0,1.5000000000000000e0");
        assert_eq!(lines.len(), 3);
    }
}
