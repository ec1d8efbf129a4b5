//! All-or-nothing file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::CliError;

/// Files staged in memory and written together by [`Outputs::commit`].
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::stage("write")(loadcast_core::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.push((path.into(), bytes.into()));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    /// Writes every file to a temporary sibling first and renames them into
    /// place only once all of them were written, so a failure leaves none
    /// of the targets behind.
    pub fn commit(self) -> Result<(), CliError> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in self.files {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
            let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| io_error(&dir, e))?;
            tmp.write_all(&bytes).map_err(|e| io_error(&path, e))?;
            tmp.as_file().sync_all().map_err(|e| io_error(&path, e))?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            tmp.persist(&path).map_err(|e| io_error(&path, e.error))?;
        }
        Ok(())
    }
}
