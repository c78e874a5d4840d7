//! Procedural top-down textures.
//!
//! Objects are shaded in normalized coordinates `(u, v)` relative to their
//! centre and radius. Palms and smooth stars share arm geometry and colour;
//! only palms carry needle stripes along their leaflets. Rings carry
//! concentric stripes. Roofs and road crossings are pure gray (`R = G = B`).
//! Colours are produced in HSV and modulated in value only, so texture never
//! changes a surface's hue or saturation.

use core::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::imgproc::ImageBuffer;
use crate::math;
use crate::rng::{lattice_noise, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    Palm,
    SmoothStar,
    Ring,
    Roof,
    Cross,
}

impl Species {
    pub const ALL: [Species; 5] = [
        Species::Palm,
        Species::SmoothStar,
        Species::Ring,
        Species::Roof,
        Species::Cross,
    ];
    pub const CONFUSERS: [Species; 4] = [
        Species::SmoothStar,
        Species::Ring,
        Species::Roof,
        Species::Cross,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Species::Palm => "palm",
            Species::SmoothStar => "smooth-star",
            Species::Ring => "ring",
            Species::Roof => "roof",
            Species::Cross => "cross",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|sp| sp.name() == s)
    }
}

/// Period of needle and ring stripes in crown radii.
pub const STRIPE_PERIOD: f64 = 0.05;

/// Shape parameters of one rendered object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placed {
    pub species: Species,
    /// Centre in pixels.
    pub center: [f64; 2],
    /// Crown radius (or roof half-side) in pixels.
    pub radius: f64,
    /// Arm count for star shapes.
    pub arms: u32,
    /// Orientation of arms, roof or crossing (rad).
    pub phase: f64,
    /// Road half-width for crossings, in radii.
    pub band: f64,
    /// Gray level for roofs and roads in `[0, 1]`.
    pub gray: f64,
    /// Hue jitter of the foliage (degrees).
    pub hue_shift: f64,
}

impl Placed {
    pub fn new(species: Species, center: [f64; 2], radius: f64) -> Self {
        Self {
            species,
            center,
            radius,
            arms: 11,
            phase: 0.0,
            band: 0.3,
            gray: 0.62,
            hue_shift: 0.0,
        }
    }

    /// Draws arm count, orientation, band width, gray level and hue jitter.
    pub fn randomized(species: Species, center: [f64; 2], radius: f64, rng: &mut SimRng) -> Self {
        Self {
            species,
            center,
            radius,
            arms: rng.random_range(8..=14),
            phase: if species == Species::Roof {
                rng.random_range(-0.3..0.3)
            } else {
                rng.random_range(0.0..TAU)
            },
            band: rng.random_range(0.2..0.32),
            gray: rng.random_range(0.5..0.8),
            hue_shift: rng.random_range(-6.0..6.0),
        }
    }

    /// Axis-aligned pixel extent that may be touched.
    pub fn extent(&self) -> f64 {
        match self.species {
            Species::Roof => self.radius * core::f64::consts::SQRT_2,
            Species::Cross => self.radius * 1.5,
            _ => self.radius,
        }
    }
}

/// HSV colour: hue in degrees, saturation and value in `[0, 1]`.
pub type Hsv = [f64; 3];

pub const FOLIAGE_HUE: f64 = 100.0;
pub const FOLIAGE_SAT: f64 = 0.62;
pub const SOIL_HUE: f64 = 30.0;
pub const SOIL_SAT: f64 = 0.45;

pub fn hsv_to_rgb(hsv: Hsv) -> [u8; 3] {
    let h = (hsv[0] - 360.0 * math::floor(hsv[0] / 360.0)) / 60.0;
    let s = hsv[1].clamp(0.0, 1.0);
    let v = hsv[2].clamp(0.0, 1.0);
    let c = v * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |t: f64| math::round((t + m) * 255.0).clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

fn foliage(value: f64, shift: f64) -> Hsv {
    [FOLIAGE_HUE + shift, FOLIAGE_SAT, value]
}

/// Smoothly interpolated lattice noise at scale 1.
fn value_noise(x: f64, y: f64, seed: u64) -> f64 {
    let (x0, y0) = (math::floor(x), math::floor(y));
    let (fx, fy) = (x - x0, y - y0);
    let (sx, sy) = (fx * fx * (3.0 - 2.0 * fx), fy * fy * (3.0 - 2.0 * fy));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let n = |dx, dy| lattice_noise(ix + dx, iy + dy, seed);
    let top = n(0, 0) + sx * (n(1, 0) - n(0, 0));
    let bottom = n(0, 1) + sx * (n(1, 1) - n(0, 1));
    top + sy * (bottom - top)
}

/// Soil colour at a ground point (metres), locked to the world.
pub fn ground_color(gx: f64, gy: f64, seed: u64) -> Hsv {
    let coarse = value_noise(gx * 2.0, gy * 2.0, seed);
    let fine = value_noise(gx * 9.0, gy * 9.0, seed ^ 0x5eed);
    let hue = SOIL_HUE + 6.0 * (coarse - 0.5);
    [
        hue,
        SOIL_SAT + 0.08 * (fine - 0.5),
        0.62 + 0.1 * (coarse - 0.5) + 0.05 * (fine - 0.5),
    ]
}

/// Colour of an object at normalized offset `(u, v)`, or `None` outside it.
pub fn shade(obj: &Placed, u: f64, v: f64) -> Option<Hsv> {
    match obj.species {
        Species::Palm => star(obj, u, v, true),
        Species::SmoothStar => star(obj, u, v, false),
        Species::Ring => {
            let r = math::hypot(u, v);
            if (0.55..=0.95).contains(&r) {
                let stripe = math::sin(TAU * r / STRIPE_PERIOD);
                Some(foliage(0.38 + 0.13 * stripe, obj.hue_shift))
            } else {
                None
            }
        }
        Species::Roof => {
            let (c, s) = (math::cos(obj.phase), math::sin(obj.phase));
            let (a, b) = (c * u + s * v, -s * u + c * v);
            (a.abs() <= 1.0 && b.abs() <= 1.0).then_some([0.0, 0.0, obj.gray])
        }
        Species::Cross => {
            if u.abs() > 1.5 || v.abs() > 1.5 {
                return None;
            }
            let (c, s) = (math::cos(obj.phase), math::sin(obj.phase));
            let (a, b) = (c * u + s * v, -s * u + c * v);
            (a.abs() <= obj.band || b.abs() <= obj.band).then_some([0.0, 0.0, obj.gray])
        }
    }
}

fn star(obj: &Placed, u: f64, v: f64, needles: bool) -> Option<Hsv> {
    let r = math::hypot(u, v);
    if r > 1.0 {
        return None;
    }
    if r < 0.12 {
        return Some(foliage(0.34, obj.hue_shift));
    }
    let sector = TAU / obj.arms as f64;
    let theta = math::atan2(v, u) - obj.phase;
    let d = theta - sector * math::round(theta / sector);
    let (along, lateral) = (r * math::cos(d), r * math::sin(d));
    let half_width = 0.17 * (1.0 - 0.55 * along);
    if lateral.abs() < half_width && along > 0.0 {
        let value = if needles {
            // Leaflets sweep outwards from the rachis in a herringbone.
            let phase = (along + 0.8 * lateral.abs()) / STRIPE_PERIOD;
            0.40 + 0.16 * math::sin(TAU * phase)
        } else {
            0.40
        };
        return Some(foliage(value, obj.hue_shift));
    }
    // Shaded under-canopy between the arms.
    (r < 0.7).then(|| foliage(0.28 + 0.04 * math::cos(PI * r), obj.hue_shift))
}

/// Rasterizes objects over soil into an RGB image.
///
/// `ground` maps a pixel to ground coordinates in metres. Sensor noise of
/// standard deviation `noise` (value units) is added to every pixel.
pub fn paint(
    width: usize,
    height: usize,
    objects: &[Placed],
    ground: impl Fn(f64, f64) -> [f64; 2],
    ground_seed: u64,
    noise: f64,
    rng: &mut SimRng,
) -> Result<ImageBuffer> {
    let normal = Normal::new(0.0, noise.max(0.0))
        .unwrap_or_else(|_| Normal::new(0.0, 0.0).expect("unit normal"));
    let mut data = alloc::vec![0u8; width * height * 3];
    // Objects later in the slice are drawn on top.
    let boxes: alloc::vec::Vec<(f64, f64, f64, f64)> = objects
        .iter()
        .map(|o| {
            let e = o.extent();
            (
                o.center[0] - e,
                o.center[0] + e,
                o.center[1] - e,
                o.center[1] + e,
            )
        })
        .collect();
    for y in 0..height {
        for x in 0..width {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let mut color = None;
            for (o, b) in objects.iter().zip(&boxes).rev() {
                if px < b.0 || px > b.1 || py < b.2 || py > b.3 {
                    continue;
                }
                let (u, v) = ((px - o.center[0]) / o.radius, (py - o.center[1]) / o.radius);
                if let Some(c) = shade(o, u, v) {
                    color = Some(c);
                    break;
                }
            }
            let mut c = color.unwrap_or_else(|| {
                let g = ground(px, py);
                ground_color(g[0], g[1], ground_seed)
            });
            if noise > 0.0 {
                c[2] += normal.sample(rng);
            }
            let i = (y * width + x) * 3;
            data[i..i + 3].copy_from_slice(&hsv_to_rgb(c));
        }
    }
    ImageBuffer::new(width, height, 3, data)
}
