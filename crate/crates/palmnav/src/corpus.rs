//! Training corpora on disk: `pos/` and `neg/` PNG windows plus
//! `manifest.csv` with the generator truth of every file.

use std::path::{Path, PathBuf};

use palmnav_core::rng::derive_seed;
use palmnav_core::sim::corpus::{corpus_plan, render_sample, sample_object, SampleSpec};
use palmnav_core::sim::Species;
use palmnav_core::ImageBuffer;
use serde::{Deserialize, Serialize};

use crate::error::{PalmError, Result};
use crate::imageio::{load_rgb, save};
use crate::logs::write_csv;

pub const MANIFEST: &str = "manifest.csv";

const MANIFEST_HEADER: &[&str] = &[
    "file", "label", "species", "seed", "center_x", "center_y", "radius",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub file: String,
    pub label: String,
    pub species: String,
    pub seed: u64,
    /// Object centre in window pixels.
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub positive: bool,
    /// Known when the corpus carries a manifest.
    pub species: Option<Species>,
    pub image: ImageBuffer,
}

/// Sample plan for a corpus of `count` positives and `count` negatives.
pub fn plan(positives: usize, negatives: usize, seed: u64) -> Vec<SampleSpec> {
    corpus_plan(positives, negatives, derive_seed(seed, "corpus"))
}

/// Renders a corpus in memory.
pub fn render(positives: usize, negatives: usize, seed: u64) -> Result<Vec<Sample>> {
    plan(positives, negatives, seed)
        .iter()
        .map(|s| {
            Ok(Sample {
                positive: s.is_positive(),
                species: Some(s.species),
                image: render_sample(s)?,
            })
        })
        .collect()
}

/// Writes a corpus under `dir` and returns its manifest.
pub fn generate(
    dir: &Path,
    positives: usize,
    negatives: usize,
    seed: u64,
) -> Result<Vec<ManifestRow>> {
    for sub in ["pos", "neg"] {
        let d = dir.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| PalmError::io(&d, e))?;
    }
    let mut rows = Vec::new();
    let (mut np, mut nn) = (0, 0);
    for spec in plan(positives, negatives, seed) {
        let file = if spec.is_positive() {
            np += 1;
            format!("pos/{np:05}.png")
        } else {
            nn += 1;
            format!("neg/{nn:05}.png")
        };
        save(&render_sample(&spec)?, &dir.join(&file))?;
        let (placed, _, _) = sample_object(&spec);
        rows.push(ManifestRow {
            file,
            label: if spec.is_positive() { "pos" } else { "neg" }.into(),
            species: spec.species.name().into(),
            seed: spec.seed,
            center_x: placed.center[0],
            center_y: placed.center[1],
            radius: placed.radius,
        });
    }
    write_csv(&dir.join(MANIFEST), MANIFEST_HEADER, &rows)?;
    Ok(rows)
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| PalmError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| PalmError::io(dir, e))?.path();
        if path
            .extension()
            .is_some_and(|x| x.eq_ignore_ascii_case("png") || x.eq_ignore_ascii_case("ppm"))
        {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads a corpus in manifest order, or `pos/` then `neg/` in file-name
/// order when there is no manifest. Both classes must be non-empty.
pub fn load(dir: &Path) -> Result<Vec<Sample>> {
    let manifest = dir.join(MANIFEST);
    let mut samples = Vec::new();
    if manifest.exists() {
        let mut rd = csv::Reader::from_path(&manifest)
            .map_err(|e| PalmError::format(&manifest, e.to_string()))?;
        for row in rd.deserialize::<ManifestRow>() {
            let row = row.map_err(|e| PalmError::format(&manifest, e.to_string()))?;
            let species = Species::from_name(&row.species).ok_or_else(|| {
                PalmError::format(&manifest, format!("unknown species `{}`", row.species))
            })?;
            let positive = match row.label.as_str() {
                "pos" => true,
                "neg" => false,
                other => {
                    return Err(PalmError::format(
                        &manifest,
                        format!("unknown label `{other}`"),
                    ))
                }
            };
            samples.push(Sample {
                positive,
                species: Some(species),
                image: load_rgb(&dir.join(&row.file))?,
            });
        }
    } else {
        for (sub, positive) in [("pos", true), ("neg", false)] {
            for path in png_files(&dir.join(sub))? {
                samples.push(Sample {
                    positive,
                    species: None,
                    image: load_rgb(&path)?,
                });
            }
        }
    }
    for (positive, name) in [(true, "pos"), (false, "neg")] {
        if !samples.iter().any(|s| s.positive == positive) {
            return Err(PalmError::format(
                dir,
                format!("corpus has no {name} samples"),
            ));
        }
    }
    Ok(samples)
}
