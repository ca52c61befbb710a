//! Reconstruction through the quasi-conformal map on simulated data.

use aniso_eit::forward::{
    dn_matrix, simulate_voltages, trig_current_patterns, DnMatrix, NoiseSpec,
};
use aniso_eit::geometry::{build_disk_mesh, place_electrodes, ConductivityField, Tensor2};
use aniso_eit::phantoms::PhantomSpec;
use aniso_eit::qc::{extend_mu, solve_beltrami, CoordinateMap, IdentityMap, QcMap, SchemeOptions};
use aniso_eit::recon::{cross_section_metrics, fhat_grid, reconstruct, ReconOptions};

const L: usize = 16;

fn simulate(field: &ConductivityField) -> DnMatrix {
    let layout = place_electrodes(L, 0.5, 0.01).unwrap();
    let mesh = build_disk_mesh(1.0, 0.07, &layout).unwrap();
    let patterns = trig_current_patterns(L, 1.0).unwrap();
    dn_matrix(&simulate_voltages(&mesh, field, &layout, &patterns, NoiseSpec::default()).unwrap())
        .unwrap()
}

fn data(phantom: &PhantomSpec) -> (DnMatrix, DnMatrix) {
    (
        simulate(&phantom.field().unwrap()),
        simulate(&ConductivityField::homogeneous(phantom.a0).unwrap()),
    )
}

fn qc_map(a0: Tensor2) -> QcMap {
    solve_beltrami(
        &extend_mu(a0, 2.0, 0.5, 256, 4.0).unwrap(),
        SchemeOptions::default(),
    )
    .unwrap()
}

fn opts(radius: f64) -> ReconOptions {
    ReconOptions {
        radius,
        grid: 41,
        ..Default::default()
    }
}

#[test]
fn identity_background_reduces_to_isotropic_method() {
    let phantom = PhantomSpec::custom("iso", 1.3, Tensor2::IDENTITY).unwrap();
    let map = qc_map(phantom.a0);
    for x in [[0.0, 0.0], [0.3, -0.7], [-0.9, 0.1], [1.5, 1.5]] {
        let y = map.forward(x).unwrap();
        assert!(
            (y[0] - x[0]).abs() < 1e-10 && (y[1] - x[1]).abs() < 1e-10,
            "{x:?} -> {y:?}"
        );
    }
    let (dn, reference) = data(&phantom);
    let (via_map, _) = reconstruct(&dn, Some(&reference), &map, phantom.a0, &opts(2.0)).unwrap();
    let (direct, _) =
        reconstruct(&dn, Some(&reference), &IdentityMap, phantom.a0, &opts(2.0)).unwrap();
    for (a, b) in via_map.a.iter().zip(&direct.a) {
        assert_eq!(a.is_some(), b.is_some());
        if let (Some(a), Some(b)) = (a, b) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}

#[test]
fn anisotropic_data_give_hermitian_transform_and_even_profile() {
    let phantom = PhantomSpec::by_name("A1").unwrap();
    let map = qc_map(phantom.a0);
    let (dn, reference) = data(&phantom);
    let fhat = fhat_grid(&dn, &map, 2.0, 33, phantom.a0.det()).unwrap();
    assert!(
        fhat.hermitian_defect() <= 1e-6,
        "{}",
        fhat.hermitian_defect()
    );

    let (field, _) = reconstruct(&dn, Some(&reference), &map, phantom.a0, &opts(2.0)).unwrap();
    assert!(field.imag_residual <= 1e-6);
    let xs = field.cross_section();
    for (k, &(x, v)) in xs.iter().enumerate() {
        let (mx, mv) = xs[xs.len() - 1 - k];
        assert!((x + mx).abs() < 1e-12);
        assert!(
            (v - mv).abs() <= 0.05 * v.abs(),
            "a({x}) = {v}, a({mx}) = {mv}"
        );
    }
}

#[test]
fn edges_sharpen_as_the_radius_grows() {
    let phantom = PhantomSpec::by_name("A2").unwrap();
    let map = qc_map(phantom.a0);
    let (dn, reference) = data(&phantom);
    let slopes: Vec<f64> = [1.5, 2.0]
        .iter()
        .map(|&r| {
            let (field, _) =
                reconstruct(&dn, Some(&reference), &map, phantom.a0, &opts(r)).unwrap();
            let m = cross_section_metrics(&field, |x| phantom.target(x));
            assert!(m.center > m.bg_mean);
            m.slope
        })
        .collect();
    assert!(slopes[1] > slopes[0], "{slopes:?}");
}
