//! Beltrami coefficients and their compactly supported extension.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::tensor::Tensor2;

/// `μ = (A22 − A11 − 2i·A12) / (A11 + A22 + 2√det A)`.
pub fn beltrami_coefficient(a: Tensor2) -> Result<Complex64> {
    let a = a.check_spd()?;
    let denom = a.trace() + 2.0 * a.det().sqrt();
    Ok(Complex64::new(a.yy - a.xx, -2.0 * a.xy) / denom)
}

/// A square sample grid `[−s, s)²` with spacing `2s/n`.
///
/// Node `(i, j)` sits at `(−s + i·h, −s + j·h)` and is stored at `j·n + i`;
/// the origin is node `(n/2, n/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub s: f64,
}

impl GridSpec {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::param(
                "n",
                format!("grid size must be even and at least 8, got {n}"),
            ));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::param("s", "window half-width must be positive"));
        }
        Ok(GridSpec { n, s })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.s / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.s + i as f64 * self.spacing()
    }

    pub fn point(&self, idx: usize) -> Complex64 {
        Complex64::new(self.coord(idx % self.n), self.coord(idx / self.n))
    }

    pub fn origin(&self) -> usize {
        (self.n / 2) * self.n + self.n / 2
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Index range `[lo, hi]` of nodes with `|coord| ≤ s/2`, the inner half-grid.
    pub fn inner_range(&self) -> (usize, usize) {
        (self.n / 4, 3 * self.n / 4)
    }
}

/// `μ_{A₀}` extended to the plane: constant on `|x| ≤ r − blend`, zero for
/// `|x| ≥ r`, joined by a smoothstep ramp.
#[derive(Clone, Debug, PartialEq)]
pub struct MuGrid {
    pub grid: GridSpec,
    pub r: f64,
    pub blend: f64,
    pub mu0: Complex64,
    pub a0: Tensor2,
    pub values: Vec<Complex64>,
}

/// Smoothstep `3t² − 2t³` of `t = (r − |x|)/blend` clamped to `[0, 1]`.
pub fn ramp(radius: f64, r: f64, blend: f64) -> f64 {
    let t = ((r - radius) / blend).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

impl MuGrid {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }

    pub fn at(&self, x: [f64; 2]) -> Complex64 {
        self.mu0 * ramp(x[0].hypot(x[1]), self.r, self.blend)
    }
}

pub fn extend_mu(a0: Tensor2, r: f64, blend: f64, n: usize, s: f64) -> Result<MuGrid> {
    let grid = GridSpec::new(n, s)?;
    if !(r > 0.0) {
        return Err(Error::param("r", "support radius must be positive"));
    }
    if !(blend > 0.0 && blend < r) {
        return Err(Error::param(
            "blend",
            format!("must lie in (0, r), got {blend}"),
        ));
    }
    if r - blend < 1.0 {
        return Err(Error::param(
            "blend",
            format!("the unit disk must fit inside r − blend = {}", r - blend),
        ));
    }
    if s < 2.0 * r {
        return Err(Error::param(
            "s",
            format!("window half-width {s} must be at least 2r = {}", 2.0 * r),
        ));
    }
    let mu0 = beltrami_coefficient(a0)?;
    let values = (0..grid.len())
        .map(|idx| mu0 * ramp(grid.point(idx).norm(), r, blend))
        .collect();
    Ok(MuGrid {
        grid,
        r,
        blend,
        mu0,
        a0,
        values,
    })
}
