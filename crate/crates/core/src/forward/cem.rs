//! Finite-element Complete Electrode Model.
//!
//! Unknowns are the nodal potentials `α` followed by `L − 1` electrode
//! coordinates `β`, with electrode voltages `U = 𝒞β` where
//! `U_1 = Σ_j β_j` and `U_{j+1} = −β_j`, so `Σ_l U_l = 0` holds by
//! construction. The system is solved by block elimination: `B` is
//! factorised once with a sparse LDLᵀ, and the small Schur complement
//! `D − Cᵀ B⁻¹ C` is handled densely.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sprs::{CsMat, FillInReduction, SymmetryCheck, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};

use crate::error::{Error, Result};
use crate::forward::patterns::CurrentPatternSet;
use crate::geometry::electrodes::{wrap_pi, ElectrodeLayout};
use crate::geometry::mesh::{triangle_area, Mesh};
use crate::geometry::tensor::{ConductivityField, Tensor2};

/// Relative residual accepted from the block solver.
const RESIDUAL_TOL: f64 = 1e-10;

/// Assembled CEM system `M = [[B, C], [Cᵀ, D]]`.
#[derive(Clone, Debug)]
pub struct CemSystem {
    /// The full block matrix, CSR.
    pub matrix: CsMat<f64>,
    pub node_count: usize,
    pub electrodes: usize,
    /// Polygonal length of each electrode on the mesh boundary.
    pub electrode_lengths: Vec<f64>,
    stiffness: CsMat<f64>,
    coupling: Vec<Vec<f64>>,
    d: DMatrix<f64>,
}

/// Potential and electrode voltages for one current pattern.
#[derive(Clone, Debug)]
pub struct ForwardSolution {
    pub potential: Vec<f64>,
    pub voltages: Vec<f64>,
    pub residual: f64,
}

/// Linear-element stiffness `area · Gᵀ A G` for a counterclockwise triangle.
pub fn element_stiffness(p: [[f64; 2]; 3], a: Tensor2) -> Option<[[f64; 3]; 3]> {
    let area = triangle_area(p[0], p[1], p[2]);
    if !(area > 0.0) {
        return None;
    }
    let grad = |i: usize| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        [
            (p[j][1] - p[k][1]) / (2.0 * area),
            (p[k][0] - p[j][0]) / (2.0 * area),
        ]
    };
    let g = [grad(0), grad(1), grad(2)];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * a.form(g[i], g[j]);
        }
    }
    Some(k)
}

/// Boundary edges lying on each electrode, as `(node_a, node_b, length)`.
pub(crate) fn electrode_edges(
    mesh: &Mesh,
    layout: &ElectrodeLayout,
) -> Result<Vec<Vec<(usize, usize, f64)>>> {
    let mut out = vec![Vec::new(); layout.len()];
    let nb = mesh.boundary.len();
    for i in 0..nb {
        let (a, b) = (mesh.boundary[i], mesh.boundary[(i + 1) % nb]);
        let (ta, tb) = (mesh.boundary_theta[i], mesh.boundary_theta[(i + 1) % nb]);
        let mid = ta + 0.5 * wrap_pi(tb - ta);
        if let Some(l) = layout.arcs.iter().position(|arc| arc.contains(mid, 0.0)) {
            let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
            out[l].push((a, b, (pa[0] - pb[0]).hypot(pa[1] - pb[1])));
        }
    }
    for (l, arc) in layout.arcs.iter().enumerate() {
        let snapped = |e: f64| {
            mesh.boundary_theta
                .iter()
                .any(|&t| wrap_pi(t - e).abs() < 1e-9)
        };
        if out[l].is_empty() || !snapped(arc.start) || !snapped(arc.end) {
            return Err(Error::InvalidMesh(format!(
                "mesh boundary does not resolve electrode {l}"
            )));
        }
    }
    Ok(out)
}

pub fn assemble_cem_system(
    mesh: &Mesh,
    field: &ConductivityField,
    layout: &ElectrodeLayout,
) -> Result<CemSystem> {
    layout.validate()?;
    let n = mesh.node_count();
    let l_count = layout.len();
    let m = l_count - 1;
    let edges = electrode_edges(mesh, layout)?;

    let mut b = TriMat::with_capacity((n, n), 9 * mesh.triangles.len() + 4 * mesh.boundary.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.nodes[i]);
        let a = field.eval(mesh.centroid(t));
        if !a.is_finite() {
            return Err(Error::NonFinite("conductivity"));
        }
        let ke = element_stiffness(p, a).ok_or(Error::DegenerateTriangle {
            index: t,
            area: mesh.signed_area(t),
        })?;
        for i in 0..3 {
            for j in 0..3 {
                b.add_triplet(tri[i], tri[j], ke[i][j]);
            }
        }
    }

    // s[l][k] = ∫_{e_l} φ_k, |e_l| = Σ edge lengths.
    let mut s = vec![vec![0.0; n]; l_count];
    let mut lengths = vec![0.0; l_count];
    for (l, list) in edges.iter().enumerate() {
        let z = layout.contact_impedances[l];
        for &(a, c, len) in list {
            b.add_triplet(a, a, len / (3.0 * z));
            b.add_triplet(c, c, len / (3.0 * z));
            b.add_triplet(a, c, len / (6.0 * z));
            b.add_triplet(c, a, len / (6.0 * z));
            s[l][a] += 0.5 * len;
            s[l][c] += 0.5 * len;
            lengths[l] += len;
        }
    }
    let stiffness: CsMat<f64> = b.to_csr();

    let z = &layout.contact_impedances;
    let coupling: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            (0..n)
                .map(|k| -s[0][k] / z[0] + s[j + 1][k] / z[j + 1])
                .collect()
        })
        .collect();
    let d = DMatrix::from_fn(m, m, |i, j| {
        lengths[0] / z[0]
            + if i == j {
                lengths[j + 1] / z[j + 1]
            } else {
                0.0
            }
    });

    let mut full = TriMat::with_capacity((n + m, n + m), stiffness.nnz() + 4 * n + m * m);
    for (row, vec) in stiffness.outer_iterator().enumerate() {
        for (col, &v) in vec.iter() {
            full.add_triplet(row, col, v);
        }
    }
    for (j, col) in coupling.iter().enumerate() {
        for (k, &v) in col.iter().enumerate() {
            if v != 0.0 {
                full.add_triplet(k, n + j, v);
                full.add_triplet(n + j, k, v);
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            full.add_triplet(n + i, n + j, d[(i, j)]);
        }
    }

    Ok(CemSystem {
        matrix: full.to_csr(),
        node_count: n,
        electrodes: l_count,
        electrode_lengths: lengths,
        stiffness,
        coupling,
        d,
    })
}

fn matvec(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    a.outer_iterator()
        .map(|row| row.iter().map(|(c, &v)| v * x[c]).sum())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A factorised [`CemSystem`], reusable across current patterns.
pub struct CemSolver<'a> {
    system: &'a CemSystem,
    ldl: LdlNumeric<f64, usize>,
    /// Columns of `B⁻¹ C`.
    w: Vec<Vec<f64>>,
    schur: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl CemSystem {
    pub fn factor(&self) -> Result<CemSolver<'_>> {
        let ldl = Ldl::new()
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .check_symmetry(SymmetryCheck::DontCheckSymmetry)
            .numeric(self.stiffness.view())
            .map_err(|e| Error::LinearSolve {
                residual: f64::NAN,
                reason: format!("LDLᵀ factorisation of B failed: {e:?}"),
            })?;
        if ldl.d().iter().any(|d| !(*d > 0.0)) {
            return Err(Error::LinearSolve {
                residual: f64::NAN,
                reason: "B is not positive definite".into(),
            });
        }
        let w: Vec<Vec<f64>> = self.coupling.par_iter().map(|c| ldl.solve(c)).collect();
        let m = self.electrodes - 1;
        let ctw = DMatrix::from_fn(m, m, |i, j| {
            self.coupling[i]
                .iter()
                .zip(&w[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
        });
        let s = &self.d - ctw;
        let s = 0.5 * (&s + s.transpose());
        let schur = s.cholesky().ok_or_else(|| Error::LinearSolve {
            residual: f64::NAN,
            reason: "Schur complement is not positive definite".into(),
        })?;
        Ok(CemSolver {
            system: self,
            ldl,
            w,
            schur,
        })
    }
}

impl CemSolver<'_> {
    /// Solves `M x = rhs` for a general right-hand side.
    fn block_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.system.node_count;
        let y = self.ldl.solve(&rhs[..n].to_vec());
        let r_beta = DVector::from_fn(self.system.electrodes - 1, |j, _| {
            rhs[n + j]
                - self.system.coupling[j]
                    .iter()
                    .zip(&y)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
        });
        let beta = self.schur.solve(&r_beta);
        let mut x = y;
        for (j, wj) in self.w.iter().enumerate() {
            for (xi, wi) in x.iter_mut().zip(wj) {
                *xi -= beta[j] * wi;
            }
        }
        x.extend(beta.iter());
        x
    }

    /// Solves for one current pattern (electrode currents `I_1..I_L`).
    pub fn solve(&self, currents: &[f64]) -> Result<ForwardSolution> {
        let sys = self.system;
        if currents.len() != sys.electrodes {
            return Err(Error::Dimension(format!(
                "{} currents for {} electrodes",
                currents.len(),
                sys.electrodes
            )));
        }
        let total: f64 = currents.iter().sum();
        let scale = currents.iter().map(|c| c.abs()).fold(0.0, f64::max);
        if total.abs() > 1e-10 * scale.max(1e-300) {
            return Err(Error::param(
                "pattern",
                format!("currents sum to {total}, Kirchhoff's law requires 0"),
            ));
        }
        let n = sys.node_count;
        let mut f = vec![0.0; n + sys.electrodes - 1];
        for j in 0..sys.electrodes - 1 {
            f[n + j] = currents[0] - currents[j + 1];
        }
        let f_norm = norm(&f);
        if f_norm == 0.0 {
            return Ok(ForwardSolution {
                potential: vec![0.0; n],
                voltages: vec![0.0; sys.electrodes],
                residual: 0.0,
            });
        }
        let mut x = self.block_solve(&f);
        let mut residual = f64::INFINITY;
        for _ in 0..4 {
            let r: Vec<f64> = f
                .iter()
                .zip(matvec(&sys.matrix, &x))
                .map(|(a, b)| a - b)
                .collect();
            residual = norm(&r) / f_norm;
            if residual <= RESIDUAL_TOL {
                break;
            }
            let dx = self.block_solve(&r);
            x.iter_mut().zip(dx).for_each(|(a, b)| *a += b);
        }
        if !(residual <= RESIDUAL_TOL) {
            return Err(Error::LinearSolve {
                residual,
                reason: "iterative refinement did not reach the tolerance".into(),
            });
        }
        let beta = &x[n..];
        let mut voltages = Vec::with_capacity(sys.electrodes);
        voltages.push(beta.iter().sum());
        voltages.extend(beta.iter().map(|b| -b));
        x.truncate(n);
        Ok(ForwardSolution {
            potential: x,
            voltages,
            residual,
        })
    }
}

/// One-shot solve; factorises the system on every call.
pub fn solve_forward(system: &CemSystem, currents: &[f64]) -> Result<ForwardSolution> {
    system.factor()?.solve(currents)
}

/// Simulated electrode voltages for a full pattern set.
///
/// `voltages[ℓ][k]` is the voltage on electrode `ℓ` under pattern `k`
/// (an `L × (L − 1)` row-major matrix).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoltageData {
    pub layout: ElectrodeLayout,
    pub patterns: CurrentPatternSet,
    pub voltages: Vec<Vec<f64>>,
    pub noise: NoiseSpec,
    /// Largest relative residual over all pattern solves.
    pub max_residual: f64,
}

impl VoltageData {
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.voltages.iter().map(|row| row[k]).collect()
    }
}

/// Relative Gaussian noise; the standard deviation is `relative` times the
/// RMS of the clean voltages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub relative: f64,
    pub seed: u64,
}

pub fn simulate_voltages(
    mesh: &Mesh,
    field: &ConductivityField,
    layout: &ElectrodeLayout,
    patterns: &CurrentPatternSet,
    noise: NoiseSpec,
) -> Result<VoltageData> {
    if patterns.electrodes != layout.len() {
        return Err(Error::Dimension(format!(
            "patterns for {} electrodes, layout has {}",
            patterns.electrodes,
            layout.len()
        )));
    }
    if !(noise.relative >= 0.0 && noise.relative.is_finite()) {
        return Err(Error::param(
            "noise",
            "must be a finite non-negative number",
        ));
    }
    let system = assemble_cem_system(mesh, field, layout)?;
    let solver = system.factor()?;
    let solutions: Vec<ForwardSolution> = patterns
        .columns
        .par_iter()
        .map(|c| solver.solve(c))
        .collect::<Result<_>>()?;

    let l = layout.len();
    let mut voltages = vec![vec![0.0; patterns.len()]; l];
    for (k, sol) in solutions.iter().enumerate() {
        for (row, v) in voltages.iter_mut().zip(&sol.voltages) {
            row[k] = *v;
        }
    }
    if noise.relative > 0.0 {
        add_noise(&mut voltages, noise);
    }
    if voltages.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("electrode voltages"));
    }
    Ok(VoltageData {
        layout: layout.clone(),
        patterns: patterns.clone(),
        voltages,
        noise,
        max_residual: solutions.iter().map(|s| s.residual).fold(0.0, f64::max),
    })
}

/// Adds zero-mean-per-pattern Gaussian noise so the ground condition survives.
fn add_noise(voltages: &mut [Vec<f64>], noise: NoiseSpec) {
    let count = voltages.iter().map(Vec::len).sum::<usize>() as f64;
    let rms = (voltages.iter().flatten().map(|v| v * v).sum::<f64>() / count).sqrt();
    let sd = noise.relative * rms;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let patterns = voltages[0].len();
    for k in 0..patterns {
        let eps: Vec<f64> = (0..voltages.len())
            .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let mean = eps.iter().sum::<f64>() / eps.len() as f64;
        for (row, e) in voltages.iter_mut().zip(&eps) {
            row[k] += e - mean;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::patterns::trig_current_patterns;
    use crate::geometry::{build_disk_mesh, place_electrodes};

    fn close3(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> bool {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y).abs() < 1e-14)
    }

    #[test]
    fn reference_triangle_stiffness() {
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let k = element_stiffness(p, Tensor2::IDENTITY).unwrap();
        assert!(close3(
            k,
            [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]]
        ));
        let k = element_stiffness(p, Tensor2::diag(4.0, 1.0)).unwrap();
        assert!(close3(
            k,
            [[2.5, -2.0, -0.5], [-2.0, 2.0, 0.0], [-0.5, 0.0, 0.5]]
        ));
        assert!(element_stiffness([p[0], p[2], p[1]], Tensor2::IDENTITY).is_none());
    }

    #[test]
    fn d_block_entries() {
        let layout = place_electrodes(8, 0.5, 0.02).unwrap();
        let mesh = build_disk_mesh(1.0, 0.2, &layout).unwrap();
        let field = ConductivityField::homogeneous(Tensor2::IDENTITY).unwrap();
        let sys = assemble_cem_system(&mesh, &field, &layout).unwrap();
        let z = 0.02;
        let e = &sys.electrode_lengths;
        assert!((sys.d[(2, 2)] - (e[0] + e[3]) / z).abs() < 1e-12);
        assert!((sys.d[(1, 4)] - e[0] / z).abs() < 1e-12);
        // Equal arcs s = π/8: 2s/z on the diagonal and s/z off it, up to the
        // chord-versus-arc discrepancy of the polygonal boundary.
        let s = std::f64::consts::PI / 8.0;
        assert!((sys.d[(0, 0)] - 2.0 * s / z).abs() < 1e-2 * s / z);
        assert!((sys.d[(0, 1)] - s / z).abs() < 1e-2 * s / z);
    }

    #[test]
    fn matrix_is_symmetric() {
        let layout = place_electrodes(8, 0.5, 0.01).unwrap();
        let mesh = build_disk_mesh(1.0, 0.25, &layout).unwrap();
        let field = ConductivityField::homogeneous(Tensor2::new(2.0, 0.3, 1.0)).unwrap();
        let sys = assemble_cem_system(&mesh, &field, &layout).unwrap();
        let t = sys.matrix.transpose_view().to_csr();
        for (row, vec) in sys.matrix.outer_iterator().enumerate() {
            for (col, &v) in vec.iter() {
                let w = t.get(row, col).copied().unwrap_or(0.0);
                assert!((v - w).abs() < 1e-12 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn ground_and_symmetry_for_cosine_pattern() {
        let layout = place_electrodes(16, 0.5, 0.01).unwrap();
        let mesh = build_disk_mesh(1.0, 0.08, &layout).unwrap();
        let field = ConductivityField::homogeneous(Tensor2::IDENTITY).unwrap();
        let sys = assemble_cem_system(&mesh, &field, &layout).unwrap();
        let patterns = trig_current_patterns(16, 1.0).unwrap();
        let sol = solve_forward(&sys, &patterns.columns[0]).unwrap();
        assert!(sol.voltages.iter().sum::<f64>().abs() < 1e-12);
        // Electrode ℓ and its mirror across the y-axis, 8 − ℓ.
        let u = &sol.voltages;
        let scale = u.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for l in 0..16 {
            let mirror = (16 + 8 - l) % 16;
            assert!(
                (u[l] + u[mirror]).abs() < 1e-8 * scale,
                "{l}: {} vs {}",
                u[l],
                u[mirror]
            );
        }
    }

    #[test]
    fn kirchhoff_violation_rejected() {
        let layout = place_electrodes(4, 0.5, 0.01).unwrap();
        let mesh = build_disk_mesh(1.0, 0.3, &layout).unwrap();
        let field = ConductivityField::homogeneous(Tensor2::IDENTITY).unwrap();
        let sys = assemble_cem_system(&mesh, &field, &layout).unwrap();
        assert!(solve_forward(&sys, &[1.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn noise_is_seeded_and_grounded() {
        let mut a = vec![
            vec![1.0, -2.0],
            vec![-1.0, 2.0],
            vec![0.5, 0.0],
            vec![-0.5, 0.0],
        ];
        let mut b = a.clone();
        let spec = NoiseSpec {
            relative: 0.01,
            seed: 9,
        };
        add_noise(&mut a, spec);
        add_noise(&mut b, spec);
        assert_eq!(a, b);
        for k in 0..2 {
            assert!(a.iter().map(|r| r[k]).sum::<f64>().abs() < 1e-14);
        }
    }
}
