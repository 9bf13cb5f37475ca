//! Artifact writing: everything is rendered in memory first, then each
//! file is written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Pending output files.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, path: &Path, bytes: Vec<u8>) {
        self.files.push((path.to_path_buf(), bytes));
    }

    /// Stages every file before renaming any, so a failure leaves no
    /// partial set behind.
    pub fn commit(self) -> Result<(), CliError> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in self.files {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            tmp.write_all(&bytes)
                .and_then(|_| tmp.flush())
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            tmp.persist(&path)
                .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
        }
        Ok(())
    }
}

/// Single-line provenance record for CSV headers.
pub fn provenance<T: Serialize>(config: &T) -> Vec<String> {
    vec![
        format!("generator: chainstate {}", env!("CARGO_PKG_VERSION")),
        format!(
            "config: {}",
            serde_json::to_string(config).expect("config serializes")
        ),
    ]
}
