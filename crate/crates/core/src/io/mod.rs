//! Configuration, diagnostics CSV, binary snapshots and the file sink.

pub mod config;
pub mod csv;
pub mod snapshot;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

pub use config::{load_config, Config, ConfigFile};
pub use csv::{format_row, parse_row, DiagWriter, DIAG_COLUMNS};
pub use snapshot::{decode, encode, parse_header, read_snapshot, write_snapshot};

use crate::diagnostics::DiagRecord;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::integrator::Sink;

/// Writes `<prefix>_diag.csv` and numbered `<prefix>_<n>.snap` files into one directory.
pub struct FileSink {
    dir: PathBuf,
    prefix: String,
    diag_path: PathBuf,
    diag: DiagWriter<BufWriter<File>>,
    snapshots: Vec<PathBuf>,
}

impl FileSink {
    pub fn create(dir: &Path, prefix: &str) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let diag_path = dir.join(format!("{prefix}_diag.csv"));
        let file = File::create(&diag_path).map_err(|e| Error::io(&diag_path, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            prefix: prefix.to_string(),
            diag_path,
            diag: DiagWriter::new(BufWriter::new(file)),
            snapshots: Vec::new(),
        })
    }

    pub fn diag_path(&self) -> &Path {
        &self.diag_path
    }

    /// Snapshot files written so far, in order.
    pub fn snapshot_paths(&self) -> &[PathBuf] {
        &self.snapshots
    }

    pub fn finish(mut self) -> Result<(PathBuf, Vec<PathBuf>)> {
        self.diag.flush().map_err(|e| Error::io(&self.diag_path, e))?;
        Ok((self.diag_path, self.snapshots))
    }
}

impl Sink for FileSink {
    fn diag(&mut self, rec: &DiagRecord) -> Result<()> {
        self.diag.append(rec).map_err(|e| Error::io(&self.diag_path, e))
    }

    fn snapshot(&mut self, t: f64, u: &Field) -> Result<()> {
        let path = self.dir.join(format!("{}_{:04}.snap", self.prefix, self.snapshots.len()));
        write_snapshot(&path, u, t)?;
        self.snapshots.push(path);
        Ok(())
    }
}
