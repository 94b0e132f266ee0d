use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use emut_core::model::{parse_unchecked, validate, ArchitectureModel, Diagnostic};

/// A failure carrying the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_IO: u8 = 4;

impl Failure {
    pub fn usage(message: impl fmt::Display) -> Self {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Failure { code: EXIT_IO, message: format!("{}: {err}", path.display()) }
    }
}

fn report(path: &Path, diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{}:{d}", path.display())).collect::<Vec<_>>().join("\n")
}

/// Read, parse and validate a model file. Warnings go to stderr; syntax
/// errors fail with status 2 and invariant violations with status 3.
pub fn load_model(path: &Path) -> Result<ArchitectureModel, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let (model, map) = parse_unchecked(&text).map_err(|d| Failure { code: EXIT_PARSE, message: report(path, &d) })?;
    let mut diags = validate(&model);
    map.locate(&mut diags);
    let (errors, warnings): (Vec<Diagnostic>, Vec<Diagnostic>) = diags.into_iter().partition(|d| d.is_error());
    if !warnings.is_empty() {
        eprintln!("{}", report(path, &warnings));
    }
    if !errors.is_empty() {
        return Err(Failure { code: EXIT_INVALID, message: report(path, &errors) });
    }
    Ok(model)
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

/// Replace `path` with `contents` via a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Failure::io(&dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Failure::io(path, e))?;
    tmp.persist(path).map_err(|e| Failure::io(path, e.error))?;
    Ok(())
}
