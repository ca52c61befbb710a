//! Simulates electrode data on the homogeneous unit disk and compares the
//! discrete DN eigenvalues with the continuum values `σk`.
//!
//! ```text
//! cargo run --release --example forward_cem -- [L] [target_h] [z]
//! ```

use std::time::Instant;

use aniso_eit::forward::{dn_matrix, simulate_voltages, trig_current_patterns, NoiseSpec};
use aniso_eit::geometry::{build_disk_mesh, place_electrodes, ConductivityField, Tensor2};

fn main() -> aniso_eit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let l: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(32);
    let h: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.03);
    let z: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.005);

    let layout = place_electrodes(l, 0.5, z)?;
    let mesh = build_disk_mesh(1.0, h, &layout)?;
    println!(
        "mesh: {} nodes, {} triangles, {} boundary nodes",
        mesh.node_count(),
        mesh.triangles.len(),
        mesh.boundary.len()
    );
    let field = ConductivityField::homogeneous(Tensor2::IDENTITY)?;
    let patterns = trig_current_patterns(l, 1.0)?;

    let t = Instant::now();
    let data = simulate_voltages(&mesh, &field, &layout, &patterns, NoiseSpec::default())?;
    let dn = dn_matrix(&data)?;
    println!(
        "solve + DN: {:.2?}, max residual {:.1e}",
        t.elapsed(),
        data.max_residual
    );
    println!(
        "asymmetry {:.2e}, condition {:.2e}",
        dn.asymmetry, dn.condition
    );

    println!(
        "{:>3} {:>12} {:>12} {:>9}",
        "k", "Λ_cos", "Λ_sin", "rel err"
    );
    for k in 1..=l / 2 {
        let c = dn.lambda[k - 1][k - 1];
        let s = (k < l / 2).then(|| dn.lambda[l / 2 + k - 1][l / 2 + k - 1]);
        let err = (c - k as f64).abs() / k as f64;
        match s {
            Some(s) => println!("{k:>3} {c:>12.6} {s:>12.6} {err:>9.4}"),
            None => println!("{k:>3} {c:>12.6} {:>12} {err:>9.4}", "-"),
        }
    }
    Ok(())
}
