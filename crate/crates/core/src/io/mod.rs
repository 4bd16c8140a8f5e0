//! File formats, configuration, reports and the command implementations
//! behind the `use-curate` binary.
//!
//! All files are UTF-8 CSV with `.` as decimal separator. Score and mask
//! files start with a `#` metadata line recording `k` and the log base:
//!
//! ```text
//! # use-curate scores k=10 log=nats
//! sample_id,entropy
//! a,0.0
//! ```

pub mod commands;
pub mod config;
pub mod formats;
pub mod report;

use std::io::Write;
use std::path::Path;

use crate::Error;

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
