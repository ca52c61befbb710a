//! Discrete Dirichlet-to-Neumann matrices in the trigonometric basis.
//!
//! Raw ND entries are `R_mn = Σ_ℓ U^n_ℓ T^m_ℓ / (‖T^m‖ ‖T^n‖)`. Currents
//! are point charges per electrode, so `R` is multiplied by the electrode
//! pitch `2πρ/L` to express it against boundary current density; with that
//! factor the homogeneous unit disk gives `Λ ≈ diag(σk)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::cem::VoltageData;
use crate::forward::patterns::{frequency, trig_current_patterns};
use crate::geometry::electrodes::ElectrodeLayout;

const MAX_CONDITION: f64 = 1e12;

/// `Λ` and `R = Λ⁻¹` over the normalised trigonometric basis.
///
/// Basis order: `cos kθ` for `k = 1..=L/2`, then `sin kθ` for `k = 1..L/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DnMatrix {
    pub layout: ElectrodeLayout,
    /// Symmetrised DN matrix, row-major.
    pub lambda: Vec<Vec<f64>>,
    /// ND matrix (pitch-scaled), row-major.
    pub nd: Vec<Vec<f64>>,
    /// Boundary length per electrode multiplying the raw ND matrix.
    pub pitch: f64,
    /// `‖Λ − Λᵀ‖_F / ‖Λ‖_F` before symmetrisation.
    pub asymmetry: f64,
    pub condition: f64,
    /// Pattern normalisation convention.
    pub normalization: String,
}

impl DnMatrix {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda_matrix(&self) -> DMatrix<f64> {
        to_matrix(&self.lambda)
    }

    pub fn nd_matrix(&self) -> DMatrix<f64> {
        to_matrix(&self.nd)
    }

    /// `(k, is_cosine)` of basis function `i`.
    pub fn frequency(&self, i: usize) -> (usize, bool) {
        frequency(self.layout.len(), i)
    }

    /// `c · Λ` (and `R / c`).
    pub fn scaled(&self, c: f64) -> DnMatrix {
        let mut out = self.clone();
        out.lambda.iter_mut().flatten().for_each(|v| *v *= c);
        out.nd.iter_mut().flatten().for_each(|v| *v /= c);
        out
    }

    /// Removes the electrode contact drop `z_ℓ I_ℓ / |e_ℓ|` from the ND matrix
    /// and re-inverts.
    ///
    /// The electrode voltage is the mean potential under the electrode plus
    /// that drop, so the result keeps only the shunting and gap effects.
    pub fn without_contact_impedance(&self) -> Result<DnMatrix> {
        let l = self.layout.len();
        let patterns = trig_current_patterns(l, 1.0)?;
        let basis: Vec<Vec<f64>> = (0..l - 1).map(|i| patterns.normalized(i)).collect();
        let drop: Vec<f64> = (0..l)
            .map(|e| self.layout.contact_impedances[e] / self.layout.arc_length(e))
            .collect();
        let nd = DMatrix::from_fn(l - 1, l - 1, |a, b| {
            let c: f64 = (0..l).map(|e| drop[e] * basis[a][e] * basis[b][e]).sum();
            self.nd[a][b] - self.pitch * c
        });
        let sv = nd.clone().singular_values();
        let condition = sv.max() / sv.min();
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned(condition));
        }
        let lambda = nd
            .clone()
            .try_inverse()
            .ok_or(Error::IllConditioned(f64::INFINITY))?;
        let lambda = 0.5 * (&lambda + lambda.transpose());
        Ok(DnMatrix {
            lambda: to_rows(&lambda),
            nd: to_rows(&nd),
            condition,
            normalization: format!("{}, contact drop removed", self.normalization),
            ..self.clone()
        })
    }

    /// Continuum DN map of the homogeneous disk of conductivity `sigma`,
    /// `Λ = diag(σk/ρ)`, on the given electrode layout.
    pub fn analytic_disk(layout: &ElectrodeLayout, sigma: f64) -> Result<DnMatrix> {
        layout.validate()?;
        if !(sigma > 0.0) {
            return Err(Error::param("sigma", "must be positive"));
        }
        let m = layout.len() - 1;
        let eig: Vec<f64> = (0..m)
            .map(|i| sigma * frequency(layout.len(), i).0 as f64 / layout.radius)
            .collect();
        let diag = |f: &dyn Fn(f64) -> f64| -> Vec<Vec<f64>> {
            (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| if i == j { f(eig[i]) } else { 0.0 })
                        .collect()
                })
                .collect()
        };
        Ok(DnMatrix {
            layout: layout.clone(),
            lambda: diag(&|e| e),
            nd: diag(&|e| 1.0 / e),
            pitch: layout.pitch(),
            asymmetry: 0.0,
            condition: eig[m - 1] / eig[0],
            normalization: "euclidean".into(),
        })
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn dn_matrix(data: &VoltageData) -> Result<DnMatrix> {
    let l = data.layout.len();
    let m = l - 1;
    if data.patterns.len() != m
        || data.voltages.len() != l
        || data.voltages.iter().any(|r| r.len() != m)
    {
        return Err(Error::Dimension(format!(
            "voltage data must be {l} × {m} over the full trigonometric basis"
        )));
    }
    let pitch = data.layout.pitch();
    let pat = &data.patterns;
    let raw = DMatrix::from_fn(m, m, |a, b| {
        let dot: f64 = (0..l)
            .map(|e| data.voltages[e][b] * pat.columns[a][e])
            .sum();
        pitch * dot / (pat.norms[a] * pat.norms[b])
    });
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ND matrix"));
    }
    let sv = raw.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let lambda_raw = raw
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditioned(f64::INFINITY))?;
    let asymmetry = (&lambda_raw - lambda_raw.transpose()).norm() / lambda_raw.norm();
    let lambda = 0.5 * (&lambda_raw + lambda_raw.transpose());
    let nd = 0.5 * (&raw + raw.transpose());
    Ok(DnMatrix {
        layout: data.layout.clone(),
        lambda: to_rows(&lambda),
        nd: to_rows(&nd),
        pitch,
        asymmetry,
        condition,
        normalization: "euclidean".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{simulate_voltages, trig_current_patterns, NoiseSpec};
    use crate::geometry::{build_disk_mesh, place_electrodes, ConductivityField, Tensor2};

    fn disk_dn_z(a: Tensor2, l: usize, h: f64, z: f64) -> DnMatrix {
        let layout = place_electrodes(l, 0.5, z).unwrap();
        let mesh = build_disk_mesh(1.0, h, &layout).unwrap();
        let field = ConductivityField::homogeneous(a).unwrap();
        let pats = trig_current_patterns(l, 1.0).unwrap();
        let data = simulate_voltages(&mesh, &field, &layout, &pats, NoiseSpec::default()).unwrap();
        dn_matrix(&data).unwrap()
    }

    fn disk_dn(a: Tensor2, l: usize, h: f64) -> DnMatrix {
        disk_dn_z(a, l, h, 0.01)
    }

    #[test]
    fn reciprocity_and_scaling() {
        let one = disk_dn(Tensor2::new(1.5, 0.2, 1.0), 8, 0.1);
        assert!(one.asymmetry < 1e-8, "{}", one.asymmetry);
        // The CEM is linear in (A, 1/z) jointly, so z halves with A doubled.
        let two = disk_dn_z(Tensor2::new(3.0, 0.4, 2.0), 8, 0.1, 0.005);
        let scale = one.lambda_matrix().norm();
        let diff = (two.lambda_matrix() - 2.0 * one.lambda_matrix()).norm();
        assert!(diff < 1e-10 * scale, "{diff}");
    }

    #[test]
    fn homogeneous_disk_is_nearly_diagonal_in_k() {
        let dn = disk_dn(Tensor2::IDENTITY, 16, 0.05);
        let lam = dn.lambda_matrix();
        for k in 1..=2 {
            let v = lam[(k - 1, k - 1)];
            assert!((v - k as f64).abs() < 0.1 * k as f64, "k={k}: {v}");
        }
        assert!(lam[(0, 1)].abs() < 1e-6 * lam[(0, 0)]);
    }

    #[test]
    fn contact_drop_removal_brings_eigenvalues_to_k() {
        // A large contact impedance depresses the high modes; removing the
        // known drop restores them up to the electrode-averaging error.
        let dn = disk_dn_z(Tensor2::IDENTITY, 16, 0.05, 0.05);
        let clean = dn.without_contact_impedance().unwrap();
        let err = |d: &DnMatrix, k: usize| (d.lambda[k - 1][k - 1] - k as f64).abs() / k as f64;
        for k in [2, 4, 6] {
            assert!(
                err(&clean, k) < 0.6 * err(&dn, k),
                "k={k}: {} vs {}",
                err(&clean, k),
                err(&dn, k)
            );
        }
        assert!(err(&clean, 1) < 0.05, "{}", err(&clean, 1));
        let nd = clean.nd_matrix();
        assert!((&nd - nd.transpose()).norm() < 1e-12 * nd.norm());
    }

    #[test]
    fn analytic_disk_matches_sigma_k() {
        let layout = place_electrodes(8, 0.5, 0.01).unwrap();
        let dn = DnMatrix::analytic_disk(&layout, 2.0).unwrap();
        assert_eq!(dn.lambda[0][0], 2.0);
        assert_eq!(dn.lambda[3][3], 8.0);
        assert_eq!(dn.lambda[4][4], 2.0);
    }

    #[test]
    fn wrong_shape_rejected() {
        let layout = place_electrodes(4, 0.5, 0.01).unwrap();
        let pats = trig_current_patterns(4, 1.0).unwrap();
        let data = VoltageData {
            layout,
            patterns: pats,
            voltages: vec![vec![0.0; 2]; 4],
            noise: NoiseSpec::default(),
            max_residual: 0.0,
        };
        assert!(matches!(dn_matrix(&data), Err(Error::Dimension(_))));
    }
}
