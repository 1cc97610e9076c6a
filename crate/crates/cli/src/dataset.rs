//! Directory layout: one scene document per `*.json` file, paired between
//! ground truth and predictions by file name. An optional `manifest.json`
//! (split lists) is not a scene and is skipped.

use std::fs;
use std::path::{Path, PathBuf};

use vesseleval::{decode_scene, parse_scene_with, serialize_scene, SceneAnnotation, ValidationOptions, Violation};

use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Scene document file names in `dir`, sorted.
pub fn list_documents(dir: &Path) -> Result<Vec<String>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".json") && name != MANIFEST && entry.path().is_file() {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Reads and fully validates a ground-truth document.
pub fn load_scene(path: &Path, opts: &ValidationOptions) -> Result<(SceneAnnotation, Vec<Violation>), CliError> {
    let bytes = read_file(path)?;
    parse_scene_with(&bytes, opts).map_err(|e| CliError::parse(path, e))
}

/// Reads a prediction document. Predictions only need to be well formed;
/// scene invariants are not enforced on them.
pub fn load_prediction(path: &Path) -> Result<SceneAnnotation, CliError> {
    let bytes = read_file(path)?;
    decode_scene(&bytes).map_err(|e| CliError::parse(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_scene(dir: &Path, name: &str, scene: &SceneAnnotation) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    write_bytes(&path, &serialize_scene(scene))?;
    Ok(path)
}
