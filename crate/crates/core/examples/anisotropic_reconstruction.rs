//! Simulates a catalog phantom, reconstructs it through the quasi-conformal
//! map and prints cross-section metrics for several truncation radii.
//!
//! ```text
//! cargo run --release --example anisotropic_reconstruction -- [phantom] [L] [target_h] [trace_points] [include_zero] [calibration]
//! ```

use std::time::Instant;

use aniso_eit::forward::{dn_matrix, simulate_voltages, trig_current_patterns, NoiseSpec};
use aniso_eit::geometry::{build_disk_mesh, place_electrodes, ConductivityField, Tensor2};
use aniso_eit::phantoms::PhantomSpec;
use aniso_eit::qc::{extend_mu, solve_beltrami, SchemeOptions};
use aniso_eit::recon::{cross_section_metrics, reconstruct, Calibration, ReconOptions};

fn main() -> aniso_eit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize| args.get(i).map(String::as_str);
    let name = arg(0).unwrap_or("A1");
    // `I<M>` selects an isotropic background with contrast M, e.g. `I4`;
    // `A3,1.3` overrides the contrast of a catalog phantom.
    let phantom = if let Some(m) = name.strip_prefix('I').and_then(|m| m.parse().ok()) {
        PhantomSpec::custom(name, m, Tensor2::IDENTITY)?
    } else if let Some((base, m)) = name.split_once(',') {
        let base = PhantomSpec::by_name(base)?;
        PhantomSpec::custom(name, m.parse().unwrap_or(base.contrast), base.a0)?
    } else {
        PhantomSpec::by_name(name)?
    };
    let l: usize = arg(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let h: f64 = arg(2).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let trace_points: usize = arg(3).and_then(|s| s.parse().ok()).unwrap_or(256);
    let include_zero = arg(4) != Some("false");
    let calibration = match arg(5) {
        Some("boundary_band") => Calibration::BoundaryBand,
        _ => Calibration::None,
    };

    let t = Instant::now();
    let layout = place_electrodes(l, 0.5, 0.01)?;
    let mesh = build_disk_mesh(1.0, h, &layout)?;
    let patterns = trig_current_patterns(l, 1.0)?;
    let dn = dn_matrix(&simulate_voltages(
        &mesh,
        &phantom.field()?,
        &layout,
        &patterns,
        NoiseSpec::default(),
    )?)?;
    let reference = dn_matrix(&simulate_voltages(
        &mesh,
        &ConductivityField::homogeneous(phantom.a0)?,
        &layout,
        &patterns,
        NoiseSpec::default(),
    )?)?;
    let map = solve_beltrami(
        &extend_mu(phantom.a0, 2.0, 0.5, 512, 4.0)?,
        SchemeOptions::default(),
    )?;
    println!(
        "{} (M = {}): {} nodes, forward + map {:.1?}",
        phantom.name,
        phantom.contrast,
        mesh.node_count(),
        t.elapsed()
    );

    println!(
        "{:>5} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "R", "bg", "centre", "slope", "l2_rel", "offset", "imag"
    );
    for radius in [1.5, 1.8, 2.0, 2.3] {
        let opts = ReconOptions {
            radius,
            trace_points,
            include_zero,
            calibration,
            ..Default::default()
        };
        let (field, _) = reconstruct(&dn, Some(&reference), &map, phantom.a0, &opts)?;
        let m = cross_section_metrics(&field, |x| phantom.target(x));
        println!(
            "{radius:>5.2} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.1e}",
            m.bg_mean, m.center, m.slope, m.l2_rel, field.calibration_offset, field.imag_residual
        );
    }
    Ok(())
}
