use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{EXIT_DOMAIN, EXIT_USAGE};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unreadable/unparsable inputs.
    Usage(String),
    Domain(fgqa::Error),
    /// Failure while writing artifacts.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Domain(_) | CliError::Io(_) => EXIT_DOMAIN,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Domain(e) => e.kind(),
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Domain(e) => e.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.message() }).to_string()
    }
}

impl From<fgqa::Error> for CliError {
    fn from(e: fgqa::Error) -> Self {
        CliError::Domain(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Reads and parses a JSON input file; any failure is a usage error.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("cannot parse {}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Output files of one command, held in memory until the command succeeds.
/// The first file is the main artifact and is what goes to stdout when no
/// output directory is given.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn files(&self) -> &[(String, Vec<u8>)] {
        &self.files
    }

    pub fn emit(&self, out: Option<&Path>) -> CliResult<()> {
        match out {
            None => {
                use std::io::Write;
                let Some((_, main)) = self.files.first() else { return Ok(()) };
                std::io::stdout().lock().write_all(main).map_err(|e| CliError::Io(format!("stdout: {e}")))
            }
            Some(dir) => self.write_all(dir),
        }
    }

    fn write_all(&self, dir: &Path) -> CliResult<()> {
        let created_dir = !dir.exists();
        let mut written: Vec<PathBuf> = Vec::new();
        let result = (|| {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            for (name, bytes) in &self.files {
                let path = dir.join(name);
                fs::write(&path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
                written.push(path);
            }
            Ok(())
        })();
        if result.is_err() {
            for path in &written {
                let _ = fs::remove_file(path);
            }
            if created_dir {
                let _ = fs::remove_dir(dir);
            }
        }
        result
    }
}

/// Writes rows with a mandatory header; floats use shortest round-trip
/// `Display` formatting.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_json_shape() {
        let e = CliError::Domain(fgqa::Error::InvalidParameter("x".into()));
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"], "invalid_parameter");
        assert_eq!(e.exit_code(), 1);
        assert_eq!(CliError::Usage("bad".into()).exit_code(), 2);
    }

    #[test]
    fn csv_has_header_and_round_trip_floats() {
        let b = csv_bytes(&["a", "b"], &[vec![0.1f64.to_string(), 3.52e-6f64.to_string()]]).unwrap();
        let text = String::from_utf8(b).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("a,b"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row, vec![0.1, 3.52e-6]);
    }

    #[test]
    fn artifacts_written_to_new_dir() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let mut a = Artifacts::new();
        a.push("x.json", b"{}\n".to_vec());
        a.push("y.csv", b"a\n".to_vec());
        a.emit(Some(&out)).unwrap();
        assert_eq!(fs::read(out.join("y.csv")).unwrap(), b"a\n");
    }
}
