use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config;
use crate::Failure;

/// Output directory plus the two comment lines that head every CSV.
pub struct Report {
    dir: PathBuf,
    header: String,
}

impl Report {
    pub fn new(dir: &Path, params: &impl Serialize, seed: u64) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("cannot create {}: {e}", dir.display())))?;
        let json = config::canonical(params);
        let header = format!(
            "# green-imcf {} config={} seed={seed}\n# config {json}\n",
            env!("CARGO_PKG_VERSION"),
            config::hash(&json)
        );
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
        })
    }

    /// Writes a CSV next to the others via a temporary file and a rename.
    pub fn csv<I>(&self, name: &str, columns: &[&str], rows: I) -> Result<PathBuf, Failure>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let io = |e: &dyn std::fmt::Display| Failure::Run(format!("writing {name}: {e}"));
        let mut w = csv::Writer::from_writer(self.header.clone().into_bytes());
        w.write_record(columns).map_err(|e| io(&e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| io(&e))?;
        }
        let bytes = w.into_inner().map_err(|e| io(&e))?;
        let path = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| io(&e))?;
        tmp.write_all(&bytes).map_err(|e| io(&e))?;
        tmp.persist(&path).map_err(|e| io(&e))?;
        Ok(path)
    }
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
