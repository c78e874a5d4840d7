//! Plantation worlds and the forward camera model.

use alloc::vec::Vec;

use rand::SeedableRng;

use super::texture::{paint, Placed, Species};
use crate::error::{Error, Result};
use crate::imgproc::ImageBuffer;
use crate::nav::{estimate_tree_position, world_to_pixel, CameraModel, FlightPath, Pose};
use crate::rng::{derive_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeSpec {
    pub id: u32,
    /// Ground position (m).
    pub position: [f64; 2],
    pub crown_radius: f64,
    pub species: Species,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub trees: Vec<TreeSpec>,
    pub waypoints: Vec<[f64; 2]>,
    /// `[min_x, min_y, max_x, max_y]` (m).
    pub bounds: [f64; 4],
    /// Seeds the soil texture and each object's shape.
    pub ground_seed: u64,
}

impl WorldSpec {
    pub fn validate(&self) -> Result<()> {
        let [x0, y0, x1, y1] = self.bounds;
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::InvalidInput("bounds must have positive extent"));
        }
        let inside = |p: [f64; 2]| p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1;
        for (i, t) in self.trees.iter().enumerate() {
            if !inside(t.position) {
                return Err(Error::InvalidInput("tree outside world bounds"));
            }
            if !(t.crown_radius > 0.0 && t.crown_radius.is_finite()) {
                return Err(Error::InvalidInput("crown radius must be positive"));
            }
            if self.trees[..i].iter().any(|o| o.id == t.id) {
                return Err(Error::InvalidInput("duplicate tree id"));
            }
        }
        if !self.waypoints.iter().all(|w| inside(*w)) {
            return Err(Error::InvalidInput("waypoint outside world bounds"));
        }
        FlightPath::new(self.waypoints.clone()).map(|_| ())
    }

    pub fn flight_path(&self) -> Result<FlightPath> {
        FlightPath::new(self.waypoints.clone())
    }

    /// Trees a detector should report.
    pub fn palms(&self) -> impl Iterator<Item = &TreeSpec> {
        self.trees.iter().filter(|t| t.species == Species::Palm)
    }
}

/// Image position of a tree, or `None` when it lies closer than `margin`
/// pixels to the frame border (or outside it).
pub fn project_tree(
    tree: &TreeSpec,
    mav: &Pose,
    cam: &CameraModel,
    margin: f64,
) -> Option<[f64; 2]> {
    let p = world_to_pixel(tree.position, mav, cam).ok()?;
    cam.contains(p, margin).then_some(p)
}

/// Image-space shape of a world object seen from `mav`.
pub fn placed_in_view(
    tree: &TreeSpec,
    mav: &Pose,
    cam: &CameraModel,
    ground_seed: u64,
) -> Result<Placed> {
    let center = world_to_pixel(tree.position, mav, cam)?;
    let mut rng =
        SimRng::seed_from_u64(derive_seed(ground_seed ^ u64::from(tree.id), "tree-shape"));
    let mut placed = Placed::randomized(
        tree.species,
        center,
        tree.crown_radius * cam.focal / mav.z,
        &mut rng,
    );
    // Shapes are fixed in the world; the image turns with the MAV.
    placed.phase = mav.yaw - placed.phase;
    Ok(placed)
}

/// Renders the downward camera view: soil locked to the world plus every
/// object overlapping the frame, with per-pixel sensor noise.
pub fn render_scene(
    world: &WorldSpec,
    mav: &Pose,
    cam: &CameraModel,
    noise: f64,
    rng: &mut SimRng,
) -> Result<ImageBuffer> {
    let mut objects = Vec::new();
    for t in &world.trees {
        let p = placed_in_view(t, mav, cam, world.ground_seed)?;
        let e = p.extent();
        if p.center[0] + e >= 0.0
            && p.center[1] + e >= 0.0
            && p.center[0] - e <= cam.width as f64
            && p.center[1] - e <= cam.height as f64
        {
            objects.push(p);
        }
    }
    // Probe the mapping once; per-pixel projection cannot fail afterwards.
    estimate_tree_position(cam.principal, mav, cam)?;
    let ground =
        |px: f64, py: f64| estimate_tree_position([px, py], mav, cam).unwrap_or([0.0, 0.0]);
    paint(
        cam.width,
        cam.height,
        &objects,
        ground,
        world.ground_seed,
        noise,
        rng,
    )
}
