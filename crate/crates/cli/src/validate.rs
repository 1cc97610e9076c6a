use std::io::Write;
use std::path::Path;

use vesseleval::{decode_scene, validate_scene_with, ParseError, ValidationOptions};

use crate::dataset::{list_documents, read_file};
use crate::{CliError, EXIT_FAILURE, EXIT_INVALID, EXIT_OK};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationSummary {
    pub files: usize,
    pub violations: usize,
    pub warnings: usize,
    /// Files that could not be read or parsed at all.
    pub unreadable: usize,
}

impl ValidationSummary {
    pub fn exit_code(&self) -> i32 {
        if self.unreadable > 0 {
            EXIT_FAILURE
        } else if self.violations > 0 {
            EXIT_INVALID
        } else {
            EXIT_OK
        }
    }
}

/// Checks every document in `dir`, writing one line per finding to `out`.
pub fn validate_dir(dir: &Path, opts: &ValidationOptions, out: &mut dyn Write) -> Result<ValidationSummary, CliError> {
    let names = list_documents(dir)?;
    let mut summary = ValidationSummary {
        files: names.len(),
        ..Default::default()
    };
    for name in &names {
        let path = dir.join(name);
        let bytes = match read_file(&path) {
            Ok(b) => b,
            Err(e) => {
                summary.unreadable += 1;
                writeln!(out, "{e}").map_err(|e| CliError::io(dir, e))?;
                continue;
            }
        };
        let findings = match decode_scene(&bytes) {
            Ok(scene) => validate_scene_with(&scene, opts),
            Err(ParseError::Semantic(violations)) => vesseleval::annotation::Validation {
                violations,
                warnings: Vec::new(),
            },
            Err(e) => {
                summary.unreadable += 1;
                writeln!(out, "{name}: {e}").map_err(|e| CliError::io(dir, e))?;
                continue;
            }
        };
        for v in &findings.violations {
            writeln!(out, "{name}: {v}").map_err(|e| CliError::io(dir, e))?;
        }
        for w in &findings.warnings {
            writeln!(out, "{name}: warning: {w}").map_err(|e| CliError::io(dir, e))?;
        }
        summary.violations += findings.violations.len();
        summary.warnings += findings.warnings.len();
    }
    writeln!(
        out,
        "{} files, {} violations, {} warnings{}",
        summary.files,
        summary.violations,
        summary.warnings,
        if summary.unreadable > 0 {
            format!(", {} unreadable", summary.unreadable)
        } else {
            String::new()
        }
    )
    .map_err(|e| CliError::io(dir, e))?;
    Ok(summary)
}
