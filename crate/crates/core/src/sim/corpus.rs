//! Labelled training windows and the template crown.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use super::texture::{paint, Placed, Species};
use crate::classify::TemplateProfile;
use crate::error::Result;
use crate::imgproc::{rgb_to_hsv, ImageBuffer};
use crate::rng::{derive_seed, splitmix64, SimRng};

/// Side of a corpus window (px).
pub const WINDOW: usize = 300;
/// Pixels per metre of soil in corpus windows.
pub const PX_PER_M: f64 = 240.0;
pub const RENDER_NOISE: f64 = 0.012;
const TEMPLATE_SEED: u64 = 0x7e3a_11ce;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpec {
    pub species: Species,
    pub seed: u64,
}

impl SampleSpec {
    pub fn is_positive(&self) -> bool {
        self.species == Species::Palm
    }
}

/// `positives` palms followed by `negatives` confusers. Each run of four
/// negatives is a shuffled permutation of the four confuser classes.
pub fn corpus_plan(positives: usize, negatives: usize, seed: u64) -> Vec<SampleSpec> {
    let mut rng = SimRng::seed_from_u64(derive_seed(seed, "corpus-classes"));
    let base = derive_seed(seed, "corpus-samples");
    let mut plan = Vec::with_capacity(positives + negatives);
    let mut block = Species::CONFUSERS;
    for i in 0..positives + negatives {
        let species = if i < positives {
            Species::Palm
        } else {
            let j = (i - positives) % block.len();
            if j == 0 {
                block.shuffle(&mut rng);
            }
            block[j]
        };
        plan.push(SampleSpec {
            species,
            seed: splitmix64(base ^ i as u64),
        });
    }
    plan
}

/// Geometry and colour draws for one window. The draws do not depend on the
/// species, so two species rendered from one seed share position, size and
/// arm layout.
pub fn sample_object(spec: &SampleSpec) -> (Placed, [f64; 2], SimRng) {
    let mut rng = SimRng::seed_from_u64(spec.seed);
    let radius = rng.random_range(100.0..125.0);
    let jitter = [rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0)];
    let coverage: f64 = rng.random_range(0.70..0.95);
    let ground_origin = [rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)];
    let c = WINDOW as f64 / 2.0;
    let mut placed = Placed::randomized(
        spec.species,
        [c + jitter[0], c + jitter[1]],
        radius,
        &mut rng,
    );
    match spec.species {
        Species::Roof => {
            let half = libm::sqrt(coverage) * c;
            let slack = c - half;
            placed.radius = half;
            placed.center = [c + jitter[0] / 60.0 * slack, c + jitter[1] / 60.0 * slack];
        }
        Species::Cross => placed.radius = c,
        _ => {}
    }
    (placed, ground_origin, rng)
}

pub fn render_sample(spec: &SampleSpec) -> Result<ImageBuffer> {
    let (placed, origin, mut rng) = sample_object(spec);
    let ground = |px: f64, py: f64| [origin[0] + px / PX_PER_M, origin[1] - py / PX_PER_M];
    paint(
        WINDOW,
        WINDOW,
        &[placed],
        ground,
        spec.seed ^ 0x50_11,
        RENDER_NOISE,
        &mut rng,
    )
}

/// A centred eleven-arm palm, the reference for the colour gate.
pub fn template_window() -> Result<ImageBuffer> {
    let c = WINDOW as f64 / 2.0;
    let placed = Placed::new(Species::Palm, [c, c], 112.0);
    let mut rng = SimRng::seed_from_u64(TEMPLATE_SEED);
    let ground = |px: f64, py: f64| [px / PX_PER_M, -py / PX_PER_M];
    paint(
        WINDOW,
        WINDOW,
        &[placed],
        ground,
        TEMPLATE_SEED,
        RENDER_NOISE,
        &mut rng,
    )
}

pub fn template_profile(hue_bins: usize, sat_bins: usize) -> Result<TemplateProfile> {
    TemplateProfile::from_hsv(&rgb_to_hsv(&template_window()?)?, hue_bins, sat_bins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_counts_and_determinism() {
        let plan = corpus_plan(10, 40, 5);
        assert_eq!(plan.iter().filter(|s| s.is_positive()).count(), 10);
        assert_eq!(plan, corpus_plan(10, 40, 5));
        assert_ne!(plan, corpus_plan(10, 40, 6));
    }

    #[test]
    fn confuser_shares_are_balanced() {
        let plan = corpus_plan(0, 2002, 1);
        for sp in Species::CONFUSERS {
            let share = plan.iter().filter(|s| s.species == sp).count() as f64 / 2002.0;
            assert!((share - 0.25).abs() <= 0.0005, "{sp:?} {share}");
        }
    }

    #[test]
    fn same_seed_shares_geometry() {
        let a = sample_object(&SampleSpec {
            species: Species::Palm,
            seed: 9,
        })
        .0;
        let b = sample_object(&SampleSpec {
            species: Species::SmoothStar,
            seed: 9,
        })
        .0;
        assert_eq!(
            (a.center, a.radius, a.arms, a.phase),
            (b.center, b.radius, b.arms, b.phase)
        );
    }

    #[test]
    fn samples_are_reproducible() {
        let s = SampleSpec {
            species: Species::Ring,
            seed: 77,
        };
        assert_eq!(render_sample(&s).unwrap(), render_sample(&s).unwrap());
        assert_eq!(template_window().unwrap().width(), WINDOW);
    }
}
