//! Scenario files.
//!
//! ```toml
//! manifold = "r3.manifold"    # relative to the scenario file
//! command = "capacity"
//!
//! [params]
//! p = [2.0, 3.0]
//! annuli = [[1.0, 2.0]]
//!
//! [output]
//! path = "capacity.csv"
//! format = "csv"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    Capacity,
    Parabolicity,
    CutoffSweep,
    Condition,
    Stokes,
    Lindqvist,
    SobolevCounterexample,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Capacity => "capacity",
            Command::Parabolicity => "parabolicity",
            Command::CutoffSweep => "cutoff-sweep",
            Command::Condition => "condition",
            Command::Stokes => "stokes",
            Command::Lindqvist => "lindqvist",
            Command::SobolevCounterexample => "sobolev-counterexample",
        }
    }

    pub fn needs_manifold(self) -> bool {
        !matches!(self, Command::Lindqvist | Command::SobolevCounterexample)
    }

    pub fn supports_csv(self) -> bool {
        !matches!(self, Command::Analyze)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: PathBuf,
    format: Format,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    manifold: Option<PathBuf>,
    command: Command,
    #[serde(default, rename = "params")]
    _params: toml::Table,
    output: RawOutput,
}

/// Second pass over the document with `[params]` typed, so that errors
/// carry its line.
#[derive(Deserialize)]
struct ParamsDoc<T> {
    params: Option<T>,
}

#[derive(Debug)]
pub struct Scenario {
    pub file: PathBuf,
    pub manifold: Option<PathBuf>,
    pub command: Command,
    text: String,
    pub output: PathBuf,
    pub format: Format,
}

/// A problem with the inputs; reported with exit status 2.
#[derive(Debug)]
pub struct Invalid {
    pub file: PathBuf,
    pub message: String,
}

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.file.display(), self.message)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(file: &Path, message: impl Into<String>) -> Invalid {
    Invalid {
        file: file.to_path_buf(),
        message: message.into(),
    }
}

impl Scenario {
    /// Reads and validates a scenario; relative paths are resolved against
    /// the scenario's directory (manifold) and `out_dir` (output).
    pub fn load(file: &Path, out_dir: Option<&Path>) -> Result<Self, Invalid> {
        let text = std::fs::read_to_string(file).map_err(|e| invalid(file, format!("cannot read: {e}")))?;
        let raw: RawScenario = toml::from_str(&text).map_err(|e| invalid(file, e.to_string().trim_end()))?;
        let dir = file.parent().unwrap_or(Path::new("."));
        let manifold = raw.manifold.map(|m| if m.is_relative() { dir.join(m) } else { m });
        if raw.command.needs_manifold() && manifold.is_none() {
            return Err(invalid(
                file,
                format!("key `manifold` is required for command `{}`", raw.command.name()),
            ));
        }
        if raw.output.format == Format::Csv && !raw.command.supports_csv() {
            return Err(invalid(
                file,
                format!("key `output.format`: command `{}` writes json only", raw.command.name()),
            ));
        }
        let output = if raw.output.path.is_relative() {
            out_dir.unwrap_or(dir).join(raw.output.path)
        } else {
            raw.output.path
        };
        Ok(Self {
            file: file.to_path_buf(),
            manifold,
            command: raw.command,
            text,
            output,
            format: raw.output.format,
        })
    }

    /// Typed view of `[params]`; unknown keys are rejected.
    pub fn params<T: for<'de> Deserialize<'de>>(&self) -> Result<T, Invalid> {
        let doc: ParamsDoc<T> =
            toml::from_str(&self.text).map_err(|e| invalid(&self.file, e.to_string().trim_end()))?;
        match doc.params {
            Some(p) => Ok(p),
            None => T::deserialize(toml::Value::Table(toml::Table::new()))
                .map_err(|e| invalid(&self.file, format!("[params]: {}", e.to_string().trim_end()))),
        }
    }
}
