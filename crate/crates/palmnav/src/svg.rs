//! SVG renderings of missions and detections.

use std::fmt::Write as _;
use std::path::Path;

use base64::Engine as _;
use palmnav_core::sim::{MissionLog, Species, WorldSpec};
use palmnav_core::{Detection, ImageBuffer};

use crate::error::{PalmError, Result};
use crate::imageio::png_bytes;

const PX_PER_M: f64 = 40.0;

fn species_color(s: Species) -> &'static str {
    match s {
        Species::Palm => "#2e7d32",
        Species::SmoothStar => "#9ccc65",
        Species::Ring => "#00897b",
        Species::Roof => "#757575",
        Species::Cross => "#8d6e63",
    }
}

/// Top-down view: trees, flight path, trajectory and reached marks.
pub fn trajectory_svg(world: &WorldSpec, log: &MissionLog) -> String {
    let [x0, y0, x1, y1] = world.bounds;
    let (w, h) = ((x1 - x0) * PX_PER_M, (y1 - y0) * PX_PER_M);
    let map = |p: [f64; 2]| ((p[0] - x0) * PX_PER_M, (y1 - p[1]) * PX_PER_M);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#f3e9d2"/>"##);
    for t in &world.trees {
        let (cx, cy) = map(t.position);
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="{:.1}" fill="{}" fill-opacity="0.5"><title>{} {}</title></circle>"#,
            t.crown_radius * PX_PER_M,
            species_color(t.species),
            t.species.name(),
            t.id
        );
    }
    let pts = |ps: &mut dyn Iterator<Item = [f64; 2]>| {
        ps.map(|p| {
            let (x, y) = map(p);
            format!("{x:.1},{y:.1}")
        })
        .collect::<Vec<_>>()
        .join(" ")
    };
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1565c0" stroke-dasharray="6 4" stroke-width="1.5"/>"##,
        pts(&mut world.waypoints.iter().copied())
    );
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#c62828" stroke-width="1.5"/>"##,
        pts(&mut log.rows.iter().map(|r| r.pose.ground()))
    );
    for r in &log.reached {
        let (cx, cy) = map(r.s_t);
        let color = if r.ep_px.is_some() { "#000" } else { "#ff6f00" };
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="3" fill="{color}"><title>tree {} t={:.2}</title></circle>"#,
            r.id, r.t
        );
    }
    s.push_str("</svg>\n");
    s
}

/// The frame with accepted windows and their centres drawn on top.
pub fn detection_svg(frame: &ImageBuffer, dets: &[Detection]) -> Result<String> {
    let png = base64::engine::general_purpose::STANDARD.encode(png_bytes(frame)?);
    let (w, h) = (frame.width(), frame.height());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<image width="{w}" height="{h}" href="data:image/png;base64,{png}"/>"#
    );
    for d in dets {
        let win = d.window;
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#ffeb3b" stroke-width="2"><title>score {:.3}</title></rect>"##,
            win.x, win.y, win.size, win.size, d.svm_score
        );
        let _ = writeln!(
            s,
            r##"<circle cx="{:.1}" cy="{:.1}" r="4" fill="#e53935"/>"##,
            d.center[0], d.center[1]
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| PalmError::io(path, e))
}
