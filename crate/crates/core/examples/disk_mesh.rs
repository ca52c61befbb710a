//! Builds disk meshes at several resolutions and reports their size, the
//! electrode endpoint snapping and the total area.
//!
//! ```text
//! cargo run --release --example disk_mesh -- [L] [coverage]
//! ```

use std::f64::consts::TAU;

use aniso_eit::geometry::{build_disk_mesh, place_electrodes};

fn main() -> aniso_eit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let l: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(32);
    let coverage: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let layout = place_electrodes(l, coverage, 0.01)?;

    println!(
        "{l} electrodes, coverage {coverage}, arc length {:.5}",
        layout.arc_length(0)
    );
    println!(
        "{:>8} {:>7} {:>9} {:>9} {:>9} {:>12}",
        "target_h", "nodes", "triangles", "boundary", "max edge", "area − π"
    );
    for h in [0.2, 0.1, 0.05, 0.025] {
        let mesh = match build_disk_mesh(1.0, h, &layout) {
            Ok(m) => m,
            Err(e) => {
                println!("{h:>8} {e}");
                continue;
            }
        };
        mesh.validate()?;
        let area: f64 = (0..mesh.triangles.len()).map(|t| mesh.signed_area(t)).sum();
        println!(
            "{h:>8} {:>7} {:>9} {:>9} {:>9.4} {:>12.3e}",
            mesh.node_count(),
            mesh.triangles.len(),
            mesh.boundary.len(),
            mesh.max_edge_length(),
            area - std::f64::consts::PI
        );
    }

    // Every electrode endpoint is a boundary node.
    let mesh = build_disk_mesh(1.0, 0.05, &layout)?;
    let worst = layout
        .arcs
        .iter()
        .flat_map(|a| [a.start, a.end])
        .map(|t| {
            mesh.boundary_theta
                .iter()
                .map(|b| {
                    let d = (b - t).rem_euclid(TAU);
                    d.min(TAU - d)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    println!("largest endpoint-to-node angular distance: {worst:.1e}");
    Ok(())
}
