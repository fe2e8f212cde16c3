use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::Path;
use std::process::ExitCode;

use logdmo_core::fk::Section;
use logdmo_core::gridio::{self, Table};
use logdmo_core::DmoError;
use tempfile::NamedTempFile;

#[derive(Debug)]
pub enum Failure {
    /// Exit status 2.
    Usage(String),
    /// Exit status 1.
    Io(String),
}

impl From<DmoError> for Failure {
    fn from(e: DmoError) -> Self {
        match e {
            DmoError::Io(_) | DmoError::Csv(_) | DmoError::Format(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

pub fn report(f: Failure) -> ExitCode {
    match f {
        Failure::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Failure::Io(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

pub fn read_section(path: &Path) -> Result<Section, Failure> {
    let file = File::open(path).map_err(|e| io_failure(path, e))?;
    gridio::read_section(BufReader::new(file)).map_err(|e| io_failure(path, e))
}

/// Write `bytes` to `path` through a temporary file in the same directory, or
/// to stdout when no path is given.
fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), Failure> {
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        return out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| Failure::Io(format!("stdout: {e}")));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io_failure(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_failure(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_failure(path, e))?;
    tmp.persist(path).map_err(|e| io_failure(path, e.error))?;
    Ok(())
}

pub fn section(sec: &Section, path: Option<&Path>) -> Result<(), Failure> {
    emit(&gridio::section_bytes(sec)?, path)
}

pub fn csv(table: &Table, path: Option<&Path>) -> Result<(), Failure> {
    let mut buf = Vec::new();
    gridio::write_csv(table, &mut buf)?;
    emit(&buf, path)
}
