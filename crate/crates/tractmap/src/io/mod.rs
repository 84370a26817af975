//! Tractography files and atomic output.

pub mod affine;
pub mod json;
pub mod trk;

use std::io::Write;
use std::path::Path;

use tractmap_core::Tractography;

use crate::error::{Error, Result};

pub use affine::{apply_affine, AffineTransform};
pub use json::{read_json, write_json};
pub use trk::{read_trk, read_trk_file, write_trk, TrkFile, TrkHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Trk,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Format> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
        {
            Some(e) if e == "trk" => Ok(Format::Trk),
            Some(e) if e == "json" => Ok(Format::Json),
            _ => Err(Error::Input(format!(
                "{}: unknown tractography format (expected .trk or .json)",
                path.display()
            ))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Trk => "trk",
            Format::Json => "json",
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a `.trk` or `.json` tractography, chosen by extension.
pub fn load_tractography(path: &Path) -> Result<Tractography> {
    let format = Format::from_path(path)?;
    let mut t = match format {
        Format::Trk => read_trk(&read_file(path)?)?,
        Format::Json => read_json(&read_text(path)?)?,
    };
    if t.name.is_none() {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            t = t.with_name(stem);
        }
    }
    Ok(t)
}

pub fn encode_tractography(t: &Tractography, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Trk => write_trk(t),
        Format::Json => Ok(write_json(t).into_bytes()),
    }
}

/// Writes a tractography in the format given by the extension of `path`.
pub fn save_tractography(path: &Path, t: &Tractography) -> Result<()> {
    write_atomic(path, &encode_tractography(t, Format::from_path(path)?)?)
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let file_err = |source| Error::File {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(file_err)?;
    tmp.write_all(bytes).map_err(file_err)?;
    tmp.as_file().sync_all().map_err(file_err)?;
    tmp.persist(path).map_err(|e| file_err(e.error))?;
    Ok(())
}
