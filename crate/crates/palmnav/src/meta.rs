//! The `run.meta` file written next to every command's outputs.

use std::path::Path;

use crate::config::RunConfig;
use crate::error::Result;
use crate::svg::write_text;

pub fn run_meta(command: &str, cfg: &RunConfig) -> String {
    format!(
        "command = {command}\nseed = {}\nconfig_sha256 = {}\npalmnav = {}\npalmnav-core = {}\n",
        cfg.seed,
        cfg.hash(),
        env!("CARGO_PKG_VERSION"),
        palmnav_core::VERSION
    )
}

pub fn write_run_meta(out: &Path, command: &str, cfg: &RunConfig) -> Result<()> {
    write_text(&out.join("run.meta"), &run_meta(command, cfg))
}
