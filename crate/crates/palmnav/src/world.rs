//! World files (TOML).
//!
//! ```toml
//! version = 1
//! ground_seed = 7
//! bounds = [-3.0, -1.0, 3.0, 15.0]   # min_x, min_y, max_x, max_y (m)
//! waypoints = [[0.0, 0.0], [0.0, 14.0]]
//!
//! [[tree]]
//! id = 1
//! position = [0.0, 2.0]
//! crown_radius = 0.5   # optional, default 0.5
//! species = "palm"     # optional: palm, smooth-star, ring, roof, cross
//! ```

use std::ops::Range;
use std::path::Path;

use palmnav_core::sim::{Species, TreeSpec, WorldSpec};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{PalmError, Result};

pub const DEFAULT_CROWN_RADIUS: f64 = 0.5;
pub const WORLD_FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldFile {
    version: Spanned<u32>,
    #[serde(default)]
    ground_seed: u64,
    bounds: Spanned<[f64; 4]>,
    waypoints: Spanned<Vec<[f64; 2]>>,
    #[serde(default, rename = "tree")]
    trees: Vec<Spanned<TreeRow>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeRow {
    id: u32,
    position: [f64; 2],
    #[serde(default = "default_radius")]
    crown_radius: f64,
    #[serde(default = "default_species")]
    species: Spanned<String>,
}

fn default_radius() -> f64 {
    DEFAULT_CROWN_RADIUS
}

fn default_species() -> Spanned<String> {
    Spanned::new(0..0, "palm".into())
}

/// Line and column (1-based) of byte `offset` in `text`.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
    (line, column)
}

pub(crate) fn schema_error(
    path: &Path,
    text: &str,
    span: Option<Range<usize>>,
    message: impl Into<String>,
) -> PalmError {
    let (line, column) = span.map_or((1, 1), |s| line_col(text, s.start));
    PalmError::Schema {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_world(text: &str, path: &Path) -> Result<WorldSpec> {
    let file: WorldFile =
        toml::from_str(text).map_err(|e| schema_error(path, text, e.span(), e.message()))?;
    if *file.version.get_ref() != WORLD_FORMAT_VERSION {
        let msg = format!(
            "unsupported world format version {}",
            file.version.get_ref()
        );
        return Err(schema_error(path, text, Some(file.version.span()), msg));
    }
    let [x0, y0, x1, y1] = *file.bounds.get_ref();
    if !(x0 < x1 && y0 < y1) {
        return Err(schema_error(
            path,
            text,
            Some(file.bounds.span()),
            "bounds must have positive extent",
        ));
    }
    let inside = |p: [f64; 2]| p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1;
    if file.waypoints.get_ref().len() < 2 {
        return Err(schema_error(
            path,
            text,
            Some(file.waypoints.span()),
            "at least two waypoints are required",
        ));
    }
    if !file.waypoints.get_ref().iter().all(|w| inside(*w)) {
        return Err(schema_error(
            path,
            text,
            Some(file.waypoints.span()),
            "waypoint outside bounds",
        ));
    }
    let mut trees = Vec::with_capacity(file.trees.len());
    for row in &file.trees {
        let span = Some(row.span());
        let t = row.get_ref();
        let species = Species::from_name(t.species.get_ref()).ok_or_else(|| {
            let at = if t.species.span().is_empty() {
                span.clone()
            } else {
                Some(t.species.span())
            };
            schema_error(
                path,
                text,
                at,
                format!("unknown species `{}`", t.species.get_ref()),
            )
        })?;
        if !inside(t.position) {
            return Err(schema_error(
                path,
                text,
                span,
                format!("tree {} outside bounds", t.id),
            ));
        }
        if !(t.crown_radius > 0.0 && t.crown_radius.is_finite()) {
            return Err(schema_error(
                path,
                text,
                span,
                format!("tree {} crown_radius must be positive", t.id),
            ));
        }
        if trees.iter().any(|o: &TreeSpec| o.id == t.id) {
            return Err(schema_error(
                path,
                text,
                span,
                format!("duplicate tree id {}", t.id),
            ));
        }
        trees.push(TreeSpec {
            id: t.id,
            position: t.position,
            crown_radius: t.crown_radius,
            species,
        });
    }
    let world = WorldSpec {
        trees,
        waypoints: file.waypoints.into_inner(),
        bounds: [x0, y0, x1, y1],
        ground_seed: file.ground_seed,
    };
    world
        .validate()
        .map_err(|e| schema_error(path, text, None, e.to_string()))?;
    Ok(world)
}

pub fn load_world(path: &Path) -> Result<WorldSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| PalmError::io(path, e))?;
    parse_world(&text, path)
}
