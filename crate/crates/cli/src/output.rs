use std::env;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "HARDY_OUT_DIR";

/// `--out`, else `$HARDY_OUT_DIR`, else `./out`.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("out"),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create output dir {}: {e}", dir.display())))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let err = |e: std::io::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(err)?;
    f.write_all(contents).map_err(err)?;
    f.sync_all().map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialises");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[derive(Debug, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub pass: bool,
    pub wall_ms: u64,
    /// Relative to the output directory.
    pub files: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub version: &'static str,
    pub config_hash: String,
    pub config: C,
    pub suites: Vec<SuiteEntry>,
    pub pass: bool,
    pub wall_ms: u64,
}
