//! Instance and macro files.

use std::fs;
use std::path::{Path, PathBuf};

use deepmemetic_core::cooperation::{Macros, ParseArchError};
use deepmemetic_core::instance::ParseError;
use deepmemetic_core::Instance;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Instance {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{}:{line}: {message}", path.display())]
    Macro { path: PathBuf, line: usize, message: String },
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> FileError + '_ {
    move |source| FileError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(io_error(path))
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<(), FileError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_error(dir))?;
    }
    fs::write(path, contents).map_err(io_error(path))
}

/// Reads an instance file. Without a `# name:` line the label defaults to
/// the `CzNxM` form.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, FileError> {
    let path = path.as_ref();
    Instance::from_text(&read(path)?).map_err(|source| FileError::Instance {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), FileError> {
    write(path.as_ref(), &inst.to_text())
}

/// Binds every `NAME = EXPR` line of `text` in order. Blank lines and `#`
/// comments are skipped.
pub fn bind_macros(macros: &mut Macros, text: &str) -> Result<(), (usize, String)> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, expr) = line
            .split_once('=')
            .ok_or_else(|| (i + 1, "expected `NAME = EXPR`".to_string()))?;
        macros
            .bind(name.trim(), expr.trim())
            .map_err(|e: ParseArchError| (i + 1, e.to_string()))?;
    }
    Ok(())
}

/// Preset macros plus the bindings of a macro file.
pub fn load_macros(path: impl AsRef<Path>) -> Result<Macros, FileError> {
    let path = path.as_ref();
    let mut macros = Macros::presets();
    bind_macros(&mut macros, &read(path)?).map_err(|(line, message)| FileError::Macro {
        path: path.to_path_buf(),
        line,
        message,
    })?;
    Ok(macros)
}
