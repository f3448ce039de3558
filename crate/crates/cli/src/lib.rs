//! Scenario runner behind the `qreverse` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod report;
pub mod run;
pub mod scenario;

use std::fs;
use std::path::Path;

pub use error::CliError;
pub use report::{Check, Format, Report};
pub use run::{run, RunOptions};
pub use scenario::Scenario;

/// Environment variable overriding the enumeration cap.
pub const ENUM_CAP_VAR: &str = "QREVERSE_ENUM_CAP";

/// Load a scenario from a file path, falling back to a bundled scenario of the
/// same name. Returns the display name and the parsed scenario.
pub fn load(arg: &str) -> Result<(String, Scenario), CliError> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(b) = catalog::find(arg) {
            return Ok((b.name.to_string(), scenario::parse(b.name, b.source)?));
        }
    }
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map_or_else(|| arg.to_string(), |s| s.to_string_lossy().into_owned());
    Ok((name, scenario::parse(arg, &text)?))
}

/// Parse the enumeration cap override, if set.
pub fn enumeration_cap(value: Option<&str>) -> Result<Option<u64>, CliError> {
    match value {
        None => Ok(None),
        Some(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|&c| c > 0)
            .map(Some)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "{ENUM_CAP_VAR} must be a positive integer, got \"{v}\""
                ))
            }),
    }
}
