//! Model files on disk.

use std::path::Path;

use palmnav_core::classify::{decode_model, encode_model};
use palmnav_core::SvmModel;

use crate::error::{PalmError, Result};

pub fn save_model(model: &SvmModel, path: &Path) -> Result<()> {
    std::fs::write(path, encode_model(model)).map_err(|e| PalmError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<SvmModel> {
    let bytes = std::fs::read(path).map_err(|e| PalmError::io(path, e))?;
    decode_model(&bytes).map_err(|e| PalmError::format(path, e.to_string()))
}
