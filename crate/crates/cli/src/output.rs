use crate::error::{CliError, Result};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub body: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, body: impl Into<String>) -> Self {
        Artifact { name: name.into(), body: body.into() }
    }

    pub fn json<T: serde::Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut body = serde_json::to_string_pretty(value).expect("report types serialize");
        body.push('\n');
        Artifact::new(name, body)
    }

    pub fn is_json(&self) -> bool {
        self.name.ends_with(".json")
    }
}

fn io(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| io(&tmp, e))?;
    f.write_all(body.as_bytes()).map_err(|e| io(&tmp, e))?;
    f.sync_all().map_err(|e| io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, &target).map_err(|e| io(&target, e))?;
    Ok(target)
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    artifacts.iter().map(|a| write_atomic(dir, &a.name, &a.body)).collect()
}
