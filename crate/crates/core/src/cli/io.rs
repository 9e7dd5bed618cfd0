//! File plumbing for the command-line driver: parsing of numeric flags,
//! JSON inputs, atomic writes and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::operator::CVector;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn read_vector(path: &Path) -> Result<CVector, CliError> {
    let entries: Vec<Complex64> = read_json(path)?;
    Ok(CVector::from_vec(entries))
}

/// Parses `"0.5+1i"`, `"0.5-2i"`, `"3i"`, `"-i"` or a plain real number.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse '{text}' as a complex number");
    let Some(body) = s.strip_suffix('i') else {
        return s
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    let split = body
        .char_indices()
        .rev()
        .find(|&(i, c)| {
            i > 0 && (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E')
        })
        .map(|(i, _)| i);
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// `"start:stop:count"` (inclusive, equispaced) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("grid is empty".into());
    }
    let values = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(format!("range '{s}' must look like start:stop:count"));
        };
        let start: f64 = start
            .trim()
            .parse()
            .map_err(|_| format!("bad start in '{s}'"))?;
        let stop: f64 = stop
            .trim()
            .parse()
            .map_err(|_| format!("bad stop in '{s}'"))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| format!("bad count in '{s}'"))?;
        match count {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n)
                .map(|j| start + (stop - start) * j as f64 / (n - 1) as f64)
                .collect(),
        }
    } else {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad grid value '{v}'"))
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(format!("grid '{s}' contains non-finite values"));
    }
    Ok(values)
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(crate::Error::from)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Every parameter of the run, including the contents of input files.
    pub inputs: serde_json::Value,
    pub seed: Option<u64>,
    /// Output file names, relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub versions: String,
}

impl RunManifest {
    pub fn new(command: &str, inputs: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_owned(),
            inputs,
            seed,
            outputs: Vec::new(),
            versions: format!("halfline {}", env!("CARGO_PKG_VERSION")),
        }
    }
}

/// A set of files written together, followed by their manifest.
pub struct OutputBundle {
    manifest: RunManifest,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputBundle {
    pub fn new(manifest: RunManifest) -> Self {
        OutputBundle {
            manifest,
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, path: PathBuf, contents: impl Into<Vec<u8>>) {
        self.files.push((path, contents.into()));
    }

    pub fn write(mut self, manifest_path: &Path) -> Result<(), CliError> {
        self.manifest.outputs = self
            .files
            .iter()
            .map(|(p, _)| {
                p.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect();
        for (path, contents) in &self.files {
            write_atomic(path, contents)?;
        }
        write_atomic(manifest_path, &to_json_bytes(&self.manifest)?)
    }
}

/// `<out>.manifest.json` next to a single output file.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    let name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{name}.manifest.json"))
}
