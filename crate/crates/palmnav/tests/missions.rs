mod common;

use std::collections::BTreeSet;

use common::{detector_for, map, trained};
use palmnav::config::RunConfig;
use palmnav::metrics::mission_metrics;
use palmnav::mission::simulate;
use palmnav::world::load_world;
use palmnav_core::sim::{
    run_mission, SenseMode, SensorScript, SimConfig, Species, TreeSpec, WorldSpec,
};

fn reached_trees(m: &palmnav::metrics::MissionMetrics) -> BTreeSet<u32> {
    m.trees
        .iter()
        .filter(|t| t.reached)
        .map(|t| t.tree.id)
        .collect()
}

#[test]
fn bundled_maps_have_the_documented_layouts() {
    let nav = palmnav_core::nav::NavConfig::default();
    let column = |w: &WorldSpec| {
        w.palms()
            .map(|t| palmnav::metrics::in_any_column(t.position, &w.waypoints, &nav))
            .collect::<Vec<_>>()
    };
    let m1 = load_world(&map("map1")).unwrap();
    assert_eq!(m1.palms().count(), 6);
    assert!(column(&m1).iter().all(|c| *c));
    assert!(
        m1.trees[2].position[0].abs() > 0.2
            && m1.trees.iter().filter(|t| t.position[0] != 0.0).count() == 1
    );
    let m2 = load_world(&map("map2")).unwrap();
    assert_eq!(m2.palms().count(), 7);
    assert_eq!(column(&m2).iter().filter(|c| !**c).count(), 2);
    let m3 = load_world(&map("map3")).unwrap();
    assert_eq!(m3.palms().count(), 9);
    assert!(column(&m3).iter().all(|c| *c));
}

#[test]
fn straight_pass_beside_an_untargeted_tree() {
    // Detection is off for the whole flight, so nothing is ever targeted.
    let world = WorldSpec {
        trees: vec![TreeSpec {
            id: 1,
            position: [0.3, 4.0],
            crown_radius: 0.5,
            species: Species::Palm,
        }],
        waypoints: vec![[0.0, 0.0], [0.0, 8.0]],
        bounds: [-2.0, -1.0, 2.0, 9.0],
        ground_seed: 1,
    };
    let script = SensorScript {
        dropout_windows: vec![(0.0, 1e9)],
        ..SensorScript::default()
    };
    let cfg = SimConfig::default();
    let log = run_mission(&world, &cfg, &script, SenseMode::Oracle).unwrap();
    let m = mission_metrics(&log, &world, &cfg.nav);
    let t = &m.trees[0];
    assert!(!t.targeted && t.deviation.is_none() && t.missed());
    // The MAV covers 2 cm per step, so the sampled closest approach exceeds
    // 0.3 m by at most sqrt(0.3² + 0.01²) − 0.3.
    assert!((t.closest - 0.3).abs() < 2e-4, "{}", t.closest);
    let over = WorldSpec {
        trees: vec![TreeSpec {
            position: [0.0, 4.0],
            ..world.trees[0]
        }],
        ..world.clone()
    };
    let log = run_mission(&over, &cfg, &SensorScript::default(), SenseMode::Oracle).unwrap();
    let m = mission_metrics(&log, &over, &cfg.nav);
    // The target is released once the pixel error drops below tau_p, which
    // spans tau_p·z/f metres on the ground.
    let release = cfg.nav.tau_p * cfg.altitude / cfg.cam.focal;
    let t = &m.trees[0];
    assert!(
        t.reached && t.deviation.unwrap() <= release + 0.02,
        "{t:?} {release}"
    );
    assert!(t.closest < 0.01, "{t:?}");
}

#[test]
fn noiseless_map1_reaches_trees_in_order() {
    let world = load_world(&map("map1")).unwrap();
    let (log, m) = simulate(&world, &RunConfig::default(), None).unwrap();
    assert_eq!(m.summary.reached, 6);
    let order: Vec<[f64; 2]> = log.reached.iter().map(|r| r.s_t).collect();
    for (k, s) in order.iter().enumerate() {
        let p = world.trees[k].position;
        assert!((s[0] - p[0]).hypot(s[1] - p[1]) < 0.2, "tree {k}: {s:?}");
    }
}

#[test]
fn oracle_and_rendered_sensing_reach_the_same_trees() {
    let (model, report) = trained(500, 11);
    assert!(report.heldout.confusion.accuracy() > 0.9);
    let mut cfg = RunConfig::default();
    cfg.sim.camera_period = 0.25;
    cfg.detector.variance_threshold = report.variance_threshold;
    let det = detector_for(&cfg, model);
    for name in ["map1", "map2", "map3"] {
        let world = load_world(&map(name)).unwrap();
        let (_, oracle) = simulate(&world, &cfg, None).unwrap();
        let (_, rendered) = simulate(&world, &cfg, Some(&det)).unwrap();
        assert!(rendered.completed, "{name}");
        assert_eq!(reached_trees(&oracle), reached_trees(&rendered), "{name}");
        assert_eq!(rendered.summary.false_targets, 0, "{name}");
    }
}
