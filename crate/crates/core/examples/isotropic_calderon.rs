//! Calderón's method on the homogeneous disk: compares `F̂` from simulated
//! electrode data with the disk-indicator transform, then inverts the
//! analytic transform at the origin.
//!
//! ```text
//! cargo run --release --example isotropic_calderon -- [L] [target_h]
//! ```

use aniso_eit::forward::{dn_matrix, simulate_voltages, trig_current_patterns, NoiseSpec};
use aniso_eit::geometry::{build_disk_mesh, place_electrodes, ConductivityField, Tensor2};
use aniso_eit::phantoms::disk_indicator_transform;
use aniso_eit::qc::IdentityMap;
use aniso_eit::recon::{fhat_grid, inverse_fourier};

fn main() -> aniso_eit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let l: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(32);
    let h: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.05);

    let layout = place_electrodes(l, 0.5, 0.01)?;
    let mesh = build_disk_mesh(1.0, h, &layout)?;
    let patterns = trig_current_patterns(l, 1.0)?;
    let field = ConductivityField::homogeneous(Tensor2::IDENTITY)?;
    let raw = dn_matrix(&simulate_voltages(
        &mesh,
        &field,
        &layout,
        &patterns,
        NoiseSpec::default(),
    )?)?;

    for (label, dn) in [
        ("electrode data", raw.clone()),
        ("contact drop removed", raw.without_contact_impedance()?),
    ] {
        let fhat = fhat_grid(&dn, &IdentityMap, 1.0, 33, 1.0)?;
        let worst = fhat
            .points
            .iter()
            .zip(&fhat.values)
            .map(|(z, v)| (v - disk_indicator_transform(*z)).norm())
            .fold(0.0, f64::max);
        println!(
            "{label:>22}: F̂(0) = {:.4} (π = {:.4}), max |F̂ − J₁(2π|z|)/|z|| over |z| ≤ 1 = {worst:.4} ({:.1}% of π)",
            fhat.zero_value.re,
            std::f64::consts::PI,
            100.0 * worst / std::f64::consts::PI
        );
    }

    let mut exact = fhat_grid(&raw, &IdentityMap, 2.0, 33, 1.0)?;
    for m in [33, 65, 129] {
        let grid = fhat_grid(&raw, &IdentityMap, 2.0, m, 1.0)?;
        exact.spacing = grid.spacing;
        exact.values = grid
            .points
            .iter()
            .map(|z| disk_indicator_transform(*z).into())
            .collect();
        exact.points = grid.points;
        exact.zero_value = disk_indicator_transform([0.0, 0.0]).into();
        let a0 = inverse_fourier(&exact, &[[0.0, 0.0]], true)?.values[0];
        println!("analytic transform, R = 2, {m:>3}×{m:<3} lattice: ã(0) = {a0:.4}");
    }
    Ok(())
}
