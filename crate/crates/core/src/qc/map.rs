//! Scheme 1 for the Beltrami equation and the resulting grid map.
//!
//! Iterate `hⁿ⁺¹ = T[μ(1 + hⁿ)]` to a fixed point `h*`, then
//! `Φ(z) = z + P[μ(1 + h*)](z)`, which solves `∂̄Φ = μ ∂Φ`.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::tensor::{ConductivityField, Tensor2};
use crate::qc::beltrami::{GridSpec, MuGrid};
use crate::qc::transforms::{wirtinger, CauchyPlan, HilbertPlan};

/// Starting iterate for Scheme 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// `h⁰ = T[μ]`, the first iterate from zero.
    #[default]
    HilbertOfMu,
    /// `h⁰ = μ`.
    Mu,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub initial: InitialGuess,
    /// Zero-padding factor for the Hilbert transform.
    pub pad: usize,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        SchemeOptions {
            tol: 1e-10,
            max_iter: 200,
            initial: InitialGuess::HilbertOfMu,
            pad: 2,
        }
    }
}

/// Anything that maps the original domain into the isotropic one.
pub trait CoordinateMap: Sync {
    fn forward(&self, x: [f64; 2]) -> Result<[f64; 2]>;
    fn inverse(&self, y: [f64; 2]) -> Result<[f64; 2]>;
    /// Jacobian `∂Φ_i/∂x_j` at `x`.
    fn jacobian(&self, x: [f64; 2]) -> Result<[[f64; 2]; 2]>;
}

/// `Φ(x) = x`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityMap;

impl CoordinateMap for IdentityMap {
    fn forward(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        Ok(x)
    }
    fn inverse(&self, y: [f64; 2]) -> Result<[f64; 2]> {
        Ok(y)
    }
    fn jacobian(&self, _: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        Ok([[1.0, 0.0], [0.0, 1.0]])
    }
}

/// Grid samples of a quasi-conformal map `Φ` on `[−s, s)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct QcMap {
    pub grid: GridSpec,
    pub r: f64,
    pub mu0: Complex64,
    pub phi: Vec<Complex64>,
    pub h: Vec<Complex64>,
    /// `‖∂̄Φ − μ∂Φ‖_∞` on the inner half-grid.
    pub residual: f64,
    pub iterations: usize,
    /// Sup-norm increments `‖hⁿ⁺¹ − hⁿ‖_∞`.
    pub increments: Vec<f64>,
}

/// Sidecar metadata written next to a binary map file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QcMapInfo {
    pub n: usize,
    pub s: f64,
    pub r: f64,
    pub mu0: [f64; 2],
    pub residual: f64,
    pub iterations: usize,
    pub increments: Vec<f64>,
    pub contraction_rate: f64,
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.par_iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .reduce(|| 0.0, f64::max)
}

pub fn solve_beltrami(mu: &MuGrid, opts: SchemeOptions) -> Result<QcMap> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 || opts.pad == 0 {
        return Err(Error::param(
            "tol",
            "tolerance, max_iter and pad must be positive",
        ));
    }
    let sup = mu.sup_norm();
    if !(sup < 1.0) {
        return Err(Error::param(
            "mu",
            format!("sup |μ| = {sup} is not below 1"),
        ));
    }
    let grid = mu.grid;
    let zero = Complex64::new(0.0, 0.0);

    if sup == 0.0 {
        return Ok(QcMap {
            grid,
            r: mu.r,
            mu0: mu.mu0,
            phi: (0..grid.len()).map(|k| grid.point(k)).collect(),
            h: vec![zero; grid.len()],
            residual: 0.0,
            iterations: 1,
            increments: vec![0.0],
        });
    }

    let hilbert = HilbertPlan::new(grid, opts.pad);
    let source = |h: &[Complex64]| -> Vec<Complex64> {
        mu.values
            .par_iter()
            .zip(h)
            .map(|(m, h)| m * (1.0 + h))
            .collect()
    };
    let mut h = match opts.initial {
        InitialGuess::HilbertOfMu => hilbert.apply(&mu.values)?,
        InitialGuess::Mu => mu.values.clone(),
    };
    let mut increments = Vec::new();
    loop {
        let next = hilbert.apply(&source(&h))?;
        let inc = sup_diff(&next, &h);
        h = next;
        increments.push(inc);
        if !inc.is_finite() {
            return Err(Error::NonFinite("Beltrami iterate"));
        }
        if inc <= opts.tol {
            break;
        }
        if increments.len() >= opts.max_iter {
            return Err(Error::NotConverged {
                iterations: increments.len(),
                last_increment: inc,
            });
        }
    }

    let p = CauchyPlan::new(grid).apply(&source(&h))?;
    let phi: Vec<Complex64> = p
        .iter()
        .enumerate()
        .map(|(k, v)| grid.point(k) + v)
        .collect();
    let mut map = QcMap {
        grid,
        r: mu.r,
        mu0: mu.mu0,
        phi,
        h,
        residual: 0.0,
        iterations: increments.len(),
        increments,
    };
    map.residual = beltrami_residual(&map, mu);
    Ok(map)
}

/// `‖∂̄Φ − μ∂Φ‖_∞` over the inner half-grid, by centred differences.
pub fn beltrami_residual(map: &QcMap, mu: &MuGrid) -> f64 {
    let grid = map.grid;
    let (lo, hi) = grid.inner_range();
    (lo..=hi)
        .into_par_iter()
        .map(|j| {
            (lo..=hi)
                .map(|i| {
                    let (d, dbar) = wirtinger(grid, &map.phi, i, j);
                    (dbar - mu.values[j * grid.n + i] * d).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

impl QcMap {
    /// Geometric-mean ratio of successive increments above round-off.
    pub fn contraction_rate(&self) -> f64 {
        let inc: Vec<f64> = self
            .increments
            .iter()
            .copied()
            .filter(|v| *v > 1e-13)
            .collect();
        if inc.len() < 2 {
            return 0.0;
        }
        (inc[inc.len() - 1] / inc[0]).powf(1.0 / (inc.len() - 1) as f64)
    }

    /// Largest single-step increment ratio above round-off.
    pub fn worst_step_ratio(&self) -> f64 {
        self.increments
            .windows(2)
            .filter(|w| w[1] > 1e-13)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }

    pub fn info(&self) -> QcMapInfo {
        QcMapInfo {
            n: self.grid.n,
            s: self.grid.s,
            r: self.r,
            mu0: [self.mu0.re, self.mu0.im],
            residual: self.residual,
            iterations: self.iterations,
            increments: self.increments.clone(),
            contraction_rate: self.contraction_rate(),
        }
    }

    fn window(&self) -> f64 {
        0.5 * self.grid.s
    }

    /// Cell index and local coordinates of `x`, checked against `[−s/2, s/2]²`.
    fn locate(&self, x: [f64; 2]) -> Result<(usize, usize, f64, f64)> {
        let w = self.window();
        let tol = 1e-12 * w;
        if !(x[0].abs() <= w + tol && x[1].abs() <= w + tol) {
            return Err(Error::OutsideWindow { x: x[0], y: x[1] });
        }
        let h = self.grid.spacing();
        let fx = (x[0] + self.grid.s) / h;
        let fy = (x[1] + self.grid.s) / h;
        let i = (fx.floor() as usize).min(self.grid.n - 2);
        let j = (fy.floor() as usize).min(self.grid.n - 2);
        Ok((i, j, fx - i as f64, fy - j as f64))
    }

    fn corners(&self, i: usize, j: usize) -> [Complex64; 4] {
        let n = self.grid.n;
        [
            self.phi[j * n + i],
            self.phi[j * n + i + 1],
            self.phi[(j + 1) * n + i],
            self.phi[(j + 1) * n + i + 1],
        ]
    }

    /// Bilinear interpolation of `Φ`, with its exact partial derivatives.
    fn bilinear(&self, x: [f64; 2]) -> Result<(Complex64, Complex64, Complex64)> {
        let (i, j, tx, ty) = self.locate(x)?;
        let [a, b, c, d] = self.corners(i, j);
        let h = self.grid.spacing();
        let v =
            a * (1.0 - tx) * (1.0 - ty) + b * tx * (1.0 - ty) + c * (1.0 - tx) * ty + d * tx * ty;
        let dx = ((b - a) * (1.0 - ty) + (d - c) * ty) / h;
        let dy = ((c - a) * (1.0 - tx) + (d - b) * tx) / h;
        Ok((v, dx, dy))
    }

    pub fn evaluate(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let (v, _, _) = self.bilinear(x)?;
        Ok([v.re, v.im])
    }

    pub fn evaluate_many(&self, points: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
        points.par_iter().map(|p| self.evaluate(*p)).collect()
    }

    /// Nearest grid node image to `y`, searched coarse-to-fine over the window.
    fn seed(&self, y: Complex64) -> [f64; 2] {
        let n = self.grid.n;
        let (lo, hi) = self.grid.inner_range();
        let dist = |i: usize, j: usize| (self.phi[j * n + i] - y).norm_sqr();
        let stride = 8;
        let mut best = (lo, lo);
        let mut best_d = f64::INFINITY;
        for j in (lo..=hi).step_by(stride) {
            for i in (lo..=hi).step_by(stride) {
                let d = dist(i, j);
                if d < best_d {
                    best = (i, j);
                    best_d = d;
                }
            }
        }
        let (ci, cj) = best;
        for j in cj.saturating_sub(stride).max(lo)..=(cj + stride).min(hi) {
            for i in ci.saturating_sub(stride).max(lo)..=(ci + stride).min(hi) {
                let d = dist(i, j);
                if d < best_d {
                    best = (i, j);
                    best_d = d;
                }
            }
        }
        [self.grid.coord(best.0), self.grid.coord(best.1)]
    }

    /// Solves `Φ(x) = y` by Newton's method on the bilinear interpolant.
    pub fn invert(&self, y: [f64; 2]) -> Result<[f64; 2]> {
        let target = Complex64::new(y[0], y[1]);
        let mut x = self.seed(target);
        let w = self.window();
        let mut residual = f64::INFINITY;
        for _ in 0..50 {
            let (v, dx, dy) = self.bilinear(x)?;
            let r = v - target;
            residual = r.norm();
            if residual <= 1e-10 {
                return Ok(x);
            }
            // Solve [[dx.re, dy.re], [dx.im, dy.im]] δ = −r.
            let det = dx.re * dy.im - dy.re * dx.im;
            if !(det.abs() > 0.0) {
                break;
            }
            let sx = -(dy.im * r.re - dy.re * r.im) / det;
            let sy = -(-dx.im * r.re + dx.re * r.im) / det;
            x = [(x[0] + sx).clamp(-w, w), (x[1] + sy).clamp(-w, w)];
        }
        if residual <= 1e-8 {
            return Ok(x);
        }
        Err(Error::InversionFailed {
            x: y[0],
            y: y[1],
            residual,
        })
    }

    pub fn invert_many(&self, points: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
        points.par_iter().map(|p| self.invert(*p)).collect()
    }

    /// Centred-difference Jacobian at node `(i, j)`.
    fn node_jacobian(&self, i: usize, j: usize) -> [[f64; 2]; 2] {
        let n = self.grid.n;
        let h2 = 2.0 * self.grid.spacing();
        let fx = (self.phi[j * n + i + 1] - self.phi[j * n + i - 1]) / h2;
        let fy = (self.phi[(j + 1) * n + i] - self.phi[(j - 1) * n + i]) / h2;
        [[fx.re, fy.re], [fx.im, fy.im]]
    }

    /// Jacobian of `Φ` at `x`: nodal centred differences, bilinearly blended.
    pub fn jacobian(&self, x: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        let (i, j, tx, ty) = self.locate(x)?;
        let weights = [
            (i, j, (1.0 - tx) * (1.0 - ty)),
            (i + 1, j, tx * (1.0 - ty)),
            (i, j + 1, (1.0 - tx) * ty),
            (i + 1, j + 1, tx * ty),
        ];
        let mut out = [[0.0; 2]; 2];
        for (a, b, wgt) in weights {
            let jn = self.node_jacobian(a, b);
            for r in 0..2 {
                for c in 0..2 {
                    out[r][c] += wgt * jn[r][c];
                }
            }
        }
        Ok(out)
    }

    /// Smallest centred-difference Jacobian determinant over the inner half-grid.
    pub fn min_jacobian_det(&self) -> (f64, [f64; 2]) {
        let (lo, hi) = self.grid.inner_range();
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for j in lo..=hi {
            for i in lo..=hi {
                let m = self.node_jacobian(i, j);
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if det < best.0 {
                    best = (det, [self.grid.coord(i), self.grid.coord(j)]);
                }
            }
        }
        best
    }

    /// Writes the binary grid: `n` (u64), `s`, `r` (f64), then row-major
    /// `(re, im)` pairs of `Φ`, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.grid.n as u64).to_le_bytes())?;
        w.write_all(&self.grid.s.to_le_bytes())?;
        w.write_all(&self.r.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.phi.len());
        for v in &self.phi {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads a binary grid and its sidecar metadata.
    pub fn read_binary<R: Read>(mut r: R, info: &QcMapInfo) -> Result<QcMap> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 24 {
            return Err(Error::Format("map file shorter than its header".into()));
        }
        let word = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().unwrap_or([0; 8]) };
        let n = u64::from_le_bytes(word(0)) as usize;
        let s = f64::from_le_bytes(word(1));
        let radius = f64::from_le_bytes(word(2));
        let grid = GridSpec::new(n, s).map_err(|e| Error::Format(format!("map header: {e}")))?;
        if bytes.len() != 24 + 16 * n * n {
            return Err(Error::Format(format!(
                "map file has {} bytes, expected {} for n = {n}",
                bytes.len(),
                24 + 16 * n * n
            )));
        }
        if info.n != n || info.s != s || info.r != radius {
            return Err(Error::Format(
                "map sidecar does not match the grid header".into(),
            ));
        }
        let phi = (0..n * n)
            .map(|k| {
                Complex64::new(
                    f64::from_le_bytes(word(3 + 2 * k)),
                    f64::from_le_bytes(word(4 + 2 * k)),
                )
            })
            .collect();
        Ok(QcMap {
            grid,
            r: radius,
            mu0: Complex64::new(info.mu0[0], info.mu0[1]),
            phi,
            h: Vec::new(),
            residual: info.residual,
            iterations: info.iterations,
            increments: info.increments.clone(),
        })
    }
}

impl CoordinateMap for QcMap {
    fn forward(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        self.evaluate(x)
    }
    fn inverse(&self, y: [f64; 2]) -> Result<[f64; 2]> {
        self.invert(y)
    }
    fn jacobian(&self, x: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        QcMap::jacobian(self, x)
    }
}

/// `Φ*A = ∇Φ A ∇Φᵀ / det ∇Φ` at each point `x` (the result lives at `Φ(x)`).
pub fn pushforward_tensor<M: CoordinateMap + ?Sized>(
    field: &ConductivityField,
    map: &M,
    points: &[[f64; 2]],
) -> Result<Vec<Tensor2>> {
    points
        .par_iter()
        .map(|&x| {
            let j = map.jacobian(x)?;
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if !(det > 0.0) {
                return Err(Error::Orientation {
                    x: x[0],
                    y: x[1],
                    det,
                });
            }
            Ok(field.eval(x).congruence(j).scale(1.0 / det))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qc::beltrami::extend_mu;
    use rand::{Rng, SeedableRng};

    fn map_for(a0: Tensor2, n: usize) -> (MuGrid, QcMap) {
        let mu = extend_mu(a0, 2.0, 0.5, n, 4.0).unwrap();
        let map = solve_beltrami(&mu, SchemeOptions::default()).unwrap();
        (mu, map)
    }

    #[test]
    fn zero_mu_gives_identity() {
        let (_, map) = map_for(Tensor2::IDENTITY, 64);
        assert_eq!(map.iterations, 1);
        for k in 0..map.grid.len() {
            assert_eq!(map.phi[k], map.grid.point(k));
        }
        let p = map.evaluate([0.3, -0.7]).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] + 0.7).abs() < 1e-12);
        let q = map.invert([0.3, -0.7]).unwrap();
        assert!((q[0] - 0.3).abs() < 1e-12 && (q[1] + 0.7).abs() < 1e-12);
    }

    #[test]
    fn grid_nodes_interpolate_exactly() {
        let (_, map) = map_for(Tensor2::diag(1.0, 4.0), 128);
        let n = map.grid.n;
        for (i, j) in [(40, 50), (64, 64), (90, 33)] {
            let v = map
                .evaluate([map.grid.coord(i), map.grid.coord(j)])
                .unwrap();
            assert_eq!(v, [map.phi[j * n + i].re, map.phi[j * n + i].im]);
        }
        assert!(map.evaluate([2.5, 0.0]).is_err());
    }

    #[test]
    fn converges_with_small_residual() {
        let (mu, map) = map_for(Tensor2::diag(1.0, 4.0), 256);
        assert!(map.residual < 5e-3, "{}", map.residual);
        assert!(
            map.contraction_rate() <= mu.sup_norm() + 0.05,
            "{}",
            map.contraction_rate()
        );
        assert!(*map.increments.last().unwrap() <= 1e-10);
        let guess_mu = solve_beltrami(
            &mu,
            SchemeOptions {
                initial: InitialGuess::Mu,
                ..SchemeOptions::default()
            },
        )
        .unwrap();
        assert!(sup_diff(&guess_mu.phi, &map.phi) < 1e-8);
    }

    #[test]
    fn round_trip_inversion() {
        let (_, map) = map_for(Tensor2::diag(4.0, 1.0), 128);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (r, t): (f64, f64) = (rng.gen_range(0.0..1.0f64).sqrt(), rng.gen_range(0.0..6.3));
            let p = [r * t.cos(), r * t.sin()];
            let q = map.invert(map.evaluate(p).unwrap()).unwrap();
            assert!((p[0] - q[0]).hypot(p[1] - q[1]) < 1e-7);
        }
    }

    #[test]
    fn pushforward_of_a0_is_isotropic() {
        let a0 = Tensor2::diag(1.0, 4.0);
        let (_, map) = map_for(a0, 256);
        let field = ConductivityField::homogeneous(a0).unwrap();
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|k| {
                [
                    0.9 * (k as f64 * 0.4).cos() * (k as f64 / 50.0),
                    0.9 * (k as f64 * 0.4).sin() * (k as f64 / 50.0),
                ]
            })
            .collect();
        for t in pushforward_tensor(&field, &map, &pts).unwrap() {
            assert!(t.xy.abs() <= 0.05 * 2.0, "{t}");
            assert!((0.5 * t.trace() - 2.0).abs() <= 0.05 * 2.0, "{t}");
        }
        assert!(map.min_jacobian_det().0 > 0.0);
    }

    #[test]
    fn binary_round_trip() {
        let (_, map) = map_for(Tensor2::diag(1.0, 1.3), 32);
        let mut buf = Vec::new();
        map.write_binary(&mut buf).unwrap();
        let back = QcMap::read_binary(buf.as_slice(), &map.info()).unwrap();
        assert_eq!(back.phi, map.phi);
        assert!(QcMap::read_binary(&buf[..40], &map.info()).is_err());
    }
    #[test]
    fn affine_on_the_plateau() {
        // Where μ is constant and the ramp is radial, the Cauchy transform of
        // the plateau is z̄, so Φ(z) = z + μ₀ z̄ there.
        for a0 in [Tensor2::diag(1.0, 1.3), Tensor2::diag(1.0, 4.0)] {
            let (_, map) = map_for(a0, 256);
            let mu = map.mu0;
            let mut err: f64 = 0.0;
            for k in 0..32 {
                for rad in [0.5, 1.0, 1.5] {
                    let z = Complex64::from_polar(rad, std::f64::consts::TAU * k as f64 / 32.0);
                    let y = map.forward([z.re, z.im]).unwrap();
                    err = err.max((Complex64::new(y[0], y[1]) - z - mu * z.conj()).norm());
                }
            }
            assert!(err < 1e-3 * mu.norm(), "{err}");
        }
    }
}
