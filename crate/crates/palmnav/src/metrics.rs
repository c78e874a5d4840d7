//! Mission metrics against ground truth.
//!
//! Each target record is attributed to the palm nearest its last estimated
//! position. A tree's deviation is the closest MAV approach while one of its
//! records was the navigation target.

use palmnav_core::nav::{gate_tree, NavConfig};
use palmnav_core::sim::{MissionLog, TreeSpec, WorldSpec};
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, PartialEq)]
pub struct TreeMetrics {
    pub tree: TreeSpec,
    /// Inside the column of some flight-path leg.
    pub expected: bool,
    pub targeted: bool,
    /// Marked reached by the pixel test.
    pub reached: bool,
    /// Marked reached by position after a recovery gave up.
    pub gave_up: bool,
    /// Closest approach while targeted (m).
    pub deviation: Option<f64>,
    /// Closest approach over the whole mission (m).
    pub closest: f64,
}

impl TreeMetrics {
    pub fn missed(&self) -> bool {
        self.expected && !self.reached
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub expected: usize,
    pub reached: usize,
    pub missed: usize,
    /// Targeted trees outside every column.
    pub false_targets: usize,
    /// Target records not attributable to any palm.
    pub spurious_targets: usize,
    pub mean_deviation: Option<f64>,
    pub max_deviation: Option<f64>,
    /// Half-width of the two-sided 95 % Student-t interval of the mean.
    pub ci95: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionMetrics {
    pub trees: Vec<TreeMetrics>,
    pub summary: Summary,
    pub completed: bool,
    pub duration: f64,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Whether `p` lies in the column of any leg of `waypoints`.
pub fn in_any_column(p: [f64; 2], waypoints: &[[f64; 2]], nav: &NavConfig) -> bool {
    waypoints
        .windows(2)
        .any(|w| gate_tree(p, w[0], w[1], nav.crown_size, nav.gate_factor).unwrap_or(false))
}

/// Minimum distance from the trajectory to `p` over all logged steps.
pub fn closest_approach(log: &MissionLog, p: [f64; 2]) -> f64 {
    log.rows
        .iter()
        .map(|r| dist(r.pose.ground(), p))
        .fold(f64::INFINITY, f64::min)
}

/// Mean, sample standard deviation and 95 % interval half-width.
pub fn mean_ci95(values: &[f64]) -> Option<(f64, f64, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Some((mean, 0.0, None));
    }
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 1.0).ok()?.inverse_cdf(0.975);
    Some((mean, sd, Some(t * sd / n.sqrt())))
}

/// Attributes a target record to the nearest palm within `radius`.
fn attribute(s_t: [f64; 2], palms: &[&TreeSpec], radius: f64) -> Option<usize> {
    palms
        .iter()
        .enumerate()
        .map(|(i, t)| (i, dist(s_t, t.position)))
        .filter(|&(_, d)| d <= radius)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

pub fn mission_metrics(log: &MissionLog, world: &WorldSpec, nav: &NavConfig) -> MissionMetrics {
    let palms: Vec<&TreeSpec> = world.palms().collect();
    let radius = nav.crown_size;
    let mut owner = Vec::with_capacity(log.targets.len());
    let mut spurious = 0;
    for rec in &log.targets {
        let s_t = log
            .reached
            .iter()
            .find(|r| r.id == rec.id)
            .map_or(rec.s_t, |r| r.s_t);
        let o = attribute(s_t, &palms, radius);
        spurious += usize::from(o.is_none());
        owner.push((rec.id, o));
    }
    let trees: Vec<TreeMetrics> = palms
        .iter()
        .enumerate()
        .map(|(k, tree)| {
            let ids: Vec<u32> = owner
                .iter()
                .filter(|(_, o)| *o == Some(k))
                .map(|(id, _)| *id)
                .collect();
            let deviation = log
                .rows
                .iter()
                .filter(|r| r.target.is_some_and(|t| ids.contains(&t)))
                .map(|r| dist(r.pose.ground(), tree.position))
                .reduce(f64::min);
            let marks: Vec<_> = log.reached.iter().filter(|r| ids.contains(&r.id)).collect();
            TreeMetrics {
                tree: **tree,
                expected: in_any_column(tree.position, &world.waypoints, nav),
                targeted: !ids.is_empty(),
                reached: marks.iter().any(|r| r.ep_px.is_some()),
                gave_up: marks.iter().any(|r| r.ep_px.is_none()),
                deviation,
                closest: closest_approach(log, tree.position),
            }
        })
        .collect();
    let devs: Vec<f64> = trees
        .iter()
        .filter(|t| t.expected)
        .filter_map(|t| t.deviation)
        .collect();
    let stats = mean_ci95(&devs);
    let summary = Summary {
        expected: trees.iter().filter(|t| t.expected).count(),
        reached: trees.iter().filter(|t| t.reached).count(),
        missed: trees.iter().filter(|t| t.missed()).count(),
        false_targets: trees.iter().filter(|t| !t.expected && t.targeted).count(),
        spurious_targets: spurious,
        mean_deviation: stats.map(|s| s.0),
        max_deviation: devs.iter().copied().reduce(f64::max),
        ci95: stats.and_then(|s| s.2),
    };
    MissionMetrics {
        trees,
        summary,
        completed: log.completed(),
        duration: log.rows.last().map_or(0.0, |r| r.t),
    }
}
