//! Hilbert (Beurling) and Cauchy transforms on a square grid.
//!
//! With `∂ = (∂x − i∂y)/2` and `∂̄ = (∂x + i∂y)/2`, the Hilbert transform `T`
//! is the Fourier multiplier `ξ̄/ξ`, so that `T∘∂̄ = ∂`. The Cauchy transform
//! `P[g] = (1/π) ∫ g(ξ) (1/(z − ξ) + 1/ξ) dA(ξ)` satisfies `∂̄P = I` and
//! `P[g](0) = 0`; it is computed as a linear (non-periodic) convolution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qc::beltrami::GridSpec;
use crate::qc::fft::{signed_index, Fft2};

/// Cells within this Chebyshev distance use the exact cell integral.
const NEAR_CELLS: i64 = 8;

fn check_finite(g: &[Complex64], what: &'static str) -> Result<()> {
    if g.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Periodic Hilbert transform of a grid function, `ξ̄/ξ` with `T̂(0) = 0`.
pub fn hilbert_transform(grid: GridSpec, g: &[Complex64]) -> Result<Vec<Complex64>> {
    HilbertPlan::new(grid, 1).apply(g)
}

/// Hilbert transform applied on a zero-padded grid `pad` times wider, which
/// pushes periodic images of compactly supported input further away.
pub struct HilbertPlan {
    grid: GridSpec,
    pad: usize,
    fft: Fft2,
    symbol: Vec<Complex64>,
}

impl HilbertPlan {
    pub fn new(grid: GridSpec, pad: usize) -> Self {
        let m = grid.n * pad.max(1);
        let symbol = (0..m * m)
            .map(|idx| {
                let (kx, ky) = (signed_index(idx % m, m), signed_index(idx / m, m));
                if kx == 0.0 && ky == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let xi = Complex64::new(kx, ky);
                    xi.conj() / xi
                }
            })
            .collect();
        HilbertPlan {
            grid,
            pad: pad.max(1),
            fft: Fft2::new(m),
            symbol,
        }
    }

    pub fn apply(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.grid.n;
        if g.len() != n * n {
            return Err(Error::Dimension(format!(
                "grid function of length {} on a {n}² grid",
                g.len()
            )));
        }
        check_finite(g, "Hilbert transform input")?;
        let m = self.fft.size();
        let off = (m - n) / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        for j in 0..n {
            buf[(j + off) * m + off..(j + off) * m + off + n]
                .copy_from_slice(&g[j * n..(j + 1) * n]);
        }
        self.fft.forward(&mut buf);
        buf.par_iter_mut()
            .zip(&self.symbol)
            .for_each(|(v, s)| *v *= s);
        self.fft.inverse(&mut buf);
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            out[j * n..(j + 1) * n]
                .copy_from_slice(&buf[(j + off) * m + off..(j + off) * m + off + n]);
        }
        Ok(out)
    }

    pub fn pad(&self) -> usize {
        self.pad
    }
}

/// Antiderivative `G(w) = −i(w log w − w)` with `∂x∂y G = 1/w`, using a log
/// branch cut along `−u`.
fn corner(w: Complex64, u: Complex64) -> Complex64 {
    let log = (w / u).ln() + u.ln();
    -Complex64::i() * (w * log - w)
}

/// `(1/π) ∫∫ dA / w` over the grid cell centred at `(a, b)·h`.
fn cell_weight(a: i64, b: i64, h: f64) -> Complex64 {
    if a == 0 && b == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let c = Complex64::new(a as f64, b as f64) * h;
    if a.abs().max(b.abs()) > NEAR_CELLS {
        return h * h / (PI * c);
    }
    let u = c / c.norm();
    let (x0, x1) = (c.re - 0.5 * h, c.re + 0.5 * h);
    let (y0, y1) = (c.im - 0.5 * h, c.im + 0.5 * h);
    let g = |x: f64, y: f64| corner(Complex64::new(x, y), u);
    (g(x1, y1) - g(x0, y1) - g(x1, y0) + g(x0, y0)) / PI
}

/// Cauchy transform with a precomputed kernel spectrum.
pub struct CauchyPlan {
    grid: GridSpec,
    fft: Fft2,
    kernel: Vec<Complex64>,
}

impl CauchyPlan {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n;
        let m = 2 * n;
        let h = grid.spacing();
        let mut kernel: Vec<Complex64> = (0..m * m)
            .into_par_iter()
            .map(|idx| {
                let a = signed_index(idx % m, m) as i64;
                let b = signed_index(idx / m, m) as i64;
                cell_weight(a, b, h)
            })
            .collect();
        let fft = Fft2::new(m);
        fft.forward(&mut kernel);
        CauchyPlan { grid, fft, kernel }
    }

    pub fn apply(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.grid.n;
        if g.len() != n * n {
            return Err(Error::Dimension(format!(
                "grid function of length {} on a {n}² grid",
                g.len()
            )));
        }
        check_finite(g, "Cauchy transform input")?;
        let m = 2 * n;
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        for j in 0..n {
            buf[j * m..j * m + n].copy_from_slice(&g[j * n..(j + 1) * n]);
        }
        self.fft.forward(&mut buf);
        buf.par_iter_mut()
            .zip(&self.kernel)
            .for_each(|(v, k)| *v *= k);
        self.fft.inverse(&mut buf);
        let origin = buf[(n / 2) * m + n / 2];
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for i in 0..n {
                out[j * n + i] = buf[j * m + i] - origin;
            }
        }
        Ok(out)
    }
}

pub fn cauchy_transform(grid: GridSpec, g: &[Complex64]) -> Result<Vec<Complex64>> {
    CauchyPlan::new(grid).apply(g)
}

/// Centred-difference `(∂f, ∂̄f)` at interior node `(i, j)`.
pub(crate) fn wirtinger(
    grid: GridSpec,
    f: &[Complex64],
    i: usize,
    j: usize,
) -> (Complex64, Complex64) {
    let n = grid.n;
    let h2 = 2.0 * grid.spacing();
    let fx = (f[j * n + i + 1] - f[j * n + i - 1]) / h2;
    let fy = (f[(j + 1) * n + i] - f[(j - 1) * n + i]) / h2;
    let iy = Complex64::i() * fy;
    ((fx - iy) * 0.5, (fx + iy) * 0.5)
}

/// Fourth-order centred-difference `(∂f, ∂̄f)` at node `(i, j)`, which must
/// be at least two nodes from the grid edge.
#[cfg(test)]
pub(crate) fn wirtinger4(
    grid: GridSpec,
    f: &[Complex64],
    i: usize,
    j: usize,
) -> (Complex64, Complex64) {
    let n = grid.n;
    let h12 = 12.0 * grid.spacing();
    let at = |a: usize, b: usize| f[b * n + a];
    let fx = (at(i - 2, j) - 8.0 * at(i - 1, j) + 8.0 * at(i + 1, j) - at(i + 2, j)) / h12;
    let fy = (at(i, j - 2) - 8.0 * at(i, j - 1) + 8.0 * at(i, j + 1) - at(i, j + 2)) / h12;
    let iy = Complex64::i() * fy;
    ((fx - iy) * 0.5, (fx + iy) * 0.5)
}
