use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// 17 significant digits, enough to read back the exact f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Files of one command. If the command fails before [`OutputSet::commit`],
/// everything written so far is deleted again.
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            committed: false,
        })
    }

    fn create(&mut self, name: &str) -> std::io::Result<BufWriter<fs::File>> {
        let path = self.dir.join(name);
        let file = fs::File::create(&path)?;
        self.written.push(path);
        Ok(BufWriter::new(file))
    }

    /// Writes a CSV with the given header; each row is already formatted.
    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> std::io::Result<()>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut out = self.create(name)?;
        writeln!(out, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut out = self.create(name)?;
        serde_json::to_writer_pretty(&mut out, value)?;
        writeln!(out)?;
        out.flush()
    }

    pub fn text(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        let mut out = self.create(name)?;
        out.write_all(body.as_bytes())?;
        out.flush()
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.committed {
            for path in &self.written {
                let _ = fs::remove_file(path);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatted_numbers_round_trip() {
        for x in [0.0, 1.0, 0.1, 1.0 / 3.0, 2500.0, 1.2345678901234567e-12, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn uncommitted_files_are_removed() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut out = OutputSet::new(dir.path()).unwrap();
            out.csv("a.csv", &["x"], vec![vec![1.0]]).unwrap();
            assert!(dir.path().join("a.csv").exists());
        }
        assert!(!dir.path().join("a.csv").exists());
        let mut out = OutputSet::new(dir.path()).unwrap();
        out.text("b.txt", "hi").unwrap();
        out.commit();
        assert!(dir.path().join("b.txt").exists());
    }
}
