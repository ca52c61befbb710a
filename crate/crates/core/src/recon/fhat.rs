//! The bilinear form of the DN map and the scattering-type transform `F̂`.
//!
//! Boundary functions are sampled at `Q` equispaced points and expanded in
//! the normalised trigonometric vectors `t_m` of the DN basis:
//! `c_m = √(2πρ/Q) · Σ_q φ(θ_q) t_{m,q}`, the midpoint rule for the inner
//! product with the continuum orthonormal functions. Then
//! `B(φ₁, φ₂) = c₁ᵀ Λ c₂` and `F̂(z) = −B(φ₁, φ₂) / (2π²|z|²)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::dn::DnMatrix;
use crate::forward::patterns::trig_current_patterns;
use crate::qc::map::CoordinateMap;
use crate::recon::cgo::make_cgo_pair;

/// Boundary samples used for the trace expansion when none are requested.
pub const DEFAULT_TRACE_POINTS: usize = 256;

/// The trigonometric DN basis sampled at `Q` equispaced boundary points.
///
/// With `Q = L` the points are the electrode centres and the vectors are the
/// normalised current patterns. Larger `Q` projects a trace onto the same
/// frequencies without aliasing its higher modes into them.
#[derive(Clone, Debug)]
pub struct TraceBasis {
    /// Boundary length per sample.
    pub weight: f64,
    pub vectors: Vec<Vec<f64>>,
    /// Sample points on the boundary circle.
    pub points: Vec<[f64; 2]>,
}

impl TraceBasis {
    pub fn new(dn: &DnMatrix, samples: usize) -> Result<TraceBasis> {
        let layout = &dn.layout;
        let l = layout.len();
        if samples < l {
            return Err(Error::param(
                "trace_points",
                format!("need at least one sample per electrode ({l}), got {samples}"),
            ));
        }
        let rho = layout.radius;
        let offset = layout.centers()[0];
        let angles: Vec<f64> = (0..samples)
            .map(|q| offset + TAU * q as f64 / samples as f64)
            .collect();
        let vectors = (0..l - 1)
            .map(|i| {
                let (k, cosine) = dn.frequency(i);
                let v: Vec<f64> = if samples == l {
                    trig_current_patterns(l, 1.0).map(|p| p.normalized(i))?
                } else {
                    let f = |t: f64| {
                        if cosine {
                            (k as f64 * (t - offset)).cos()
                        } else {
                            (k as f64 * (t - offset)).sin()
                        }
                    };
                    let raw: Vec<f64> = angles.iter().map(|&t| f(t)).collect();
                    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
                    raw.into_iter().map(|x| x / norm).collect()
                };
                Ok(v)
            })
            .collect::<Result<_>>()?;
        Ok(TraceBasis {
            weight: TAU * rho / samples as f64,
            vectors,
            points: angles
                .iter()
                .map(|t| [rho * t.cos(), rho * t.sin()])
                .collect(),
        })
    }

    pub fn coefficients(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        if samples.len() != self.points.len() {
            return Err(Error::Dimension(format!(
                "{} boundary samples for {} trace points",
                samples.len(),
                self.points.len()
            )));
        }
        let root = self.weight.sqrt();
        Ok(self
            .vectors
            .iter()
            .map(|t| root * t.iter().zip(samples).map(|(a, b)| b * a).sum::<Complex64>())
            .collect())
    }
}

fn contract(dn: &DnMatrix, c1: &[Complex64], c2: &[Complex64]) -> Complex64 {
    dn.lambda
        .iter()
        .zip(c1)
        .map(|(row, a)| a * row.iter().zip(c2).map(|(l, b)| b * *l).sum::<Complex64>())
        .sum()
}

/// `B(φ₁, φ₂) = ∫_{∂Ω} φ₁ Λ φ₂ dS` from samples at `TraceBasis` points;
/// the sample count selects the basis.
pub fn bilinear_form(dn: &DnMatrix, phi1: &[Complex64], phi2: &[Complex64]) -> Result<Complex64> {
    let basis = TraceBasis::new(dn, phi1.len())?;
    if basis.vectors.len() != dn.dim() {
        return Err(Error::Dimension(
            "DN matrix does not match its electrode layout".into(),
        ));
    }
    Ok(contract(
        dn,
        &basis.coefficients(phi1)?,
        &basis.coefficients(phi2)?,
    ))
}

/// Samples of `F̂` on the truncated frequency lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FhatGrid {
    /// Truncation radius `R`.
    pub radius: f64,
    /// Lattice points per axis over `[−R, R]`.
    pub lattice: usize,
    pub spacing: f64,
    /// Frequencies with `0 < |z| ≤ R`.
    pub points: Vec<[f64; 2]>,
    pub values: Vec<Complex64>,
    /// `F̂(0)`, the limit `½(B(y₁, y₁) + B(y₂, y₂))` of the linear traces.
    pub zero_value: Complex64,
    /// Factor applied to `Λ` so the isotropic background is 1.
    pub background_scale: f64,
    pub normalization: String,
    pub trace_points: usize,
}

impl FhatGrid {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// `self − reference` on a shared lattice.
    pub fn difference(&self, reference: &FhatGrid) -> Result<FhatGrid> {
        if self.points != reference.points {
            return Err(Error::Dimension("F̂ grids sit on different lattices".into()));
        }
        let mut out = self.clone();
        for (v, r) in out.values.iter_mut().zip(&reference.values) {
            *v -= r;
        }
        out.zero_value -= reference.zero_value;
        Ok(out)
    }

    /// Largest `|F̂(−z) − conj F̂(z)| / max|F̂|` over the lattice.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let key = |p: [f64; 2]| {
            (
                (p[0] / self.spacing).round() as i64,
                (p[1] / self.spacing).round() as i64,
            )
        };
        let index: std::collections::HashMap<(i64, i64), usize> = self
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| (key(*p), k))
            .collect();
        self.points
            .iter()
            .enumerate()
            .filter_map(|(k, p)| {
                let (a, b) = key(*p);
                index
                    .get(&(-a, -b))
                    .map(|&m| (self.values[m] - self.values[k].conj()).norm())
            })
            .fold(0.0, f64::max)
            / scale
    }
}

/// Integer lattice offsets and the spacing for `m` points over `[−R, R]`.
fn lattice(radius: f64, m: usize) -> Result<(Vec<[f64; 2]>, f64)> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("R", "truncation radius must be positive"));
    }
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::param(
            "lattice",
            format!("lattice size must be odd and at least 3, got {m}"),
        ));
    }
    let half = (m as i64 - 1) / 2;
    let spacing = radius / half as f64;
    let mut points = Vec::new();
    for b in -half..=half {
        for a in -half..=half {
            if (a, b) == (0, 0) || a * a + b * b > half * half {
                continue;
            }
            points.push([a as f64 * spacing, b as f64 * spacing]);
        }
    }
    Ok((points, spacing))
}

/// Builds `F̂` from a DN matrix, composing the CGO traces with `map`.
///
/// `det_a0` rescales `Λ` by `1/√det A₀`, making the pushed-forward
/// background conductivity equal to 1.
pub fn fhat_grid<M: CoordinateMap + ?Sized>(
    dn: &DnMatrix,
    map: &M,
    radius: f64,
    m: usize,
    det_a0: f64,
) -> Result<FhatGrid> {
    fhat_grid_with(dn, map, radius, m, det_a0, DEFAULT_TRACE_POINTS)
}

/// As [`fhat_grid`] with an explicit number of boundary trace samples.
pub fn fhat_grid_with<M: CoordinateMap + ?Sized>(
    dn: &DnMatrix,
    map: &M,
    radius: f64,
    m: usize,
    det_a0: f64,
    trace_points: usize,
) -> Result<FhatGrid> {
    if !(det_a0 > 0.0) {
        return Err(Error::param("det_a0", "must be positive"));
    }
    let (points, spacing) = lattice(radius, m)?;
    let scale = 1.0 / det_a0.sqrt();
    let dn = dn.scaled(scale);
    let basis = TraceBasis::new(&dn, trace_points)?;
    let images: Vec<[f64; 2]> = basis
        .points
        .iter()
        .map(|x| map.forward(*x))
        .collect::<Result<_>>()?;

    let linear = |axis: usize| -> Result<Vec<Complex64>> {
        let s: Vec<Complex64> = images
            .iter()
            .map(|y| Complex64::new(y[axis], 0.0))
            .collect();
        basis.coefficients(&s)
    };
    let (c1, c2) = (linear(0)?, linear(1)?);
    let zero_value = 0.5 * (contract(&dn, &c1, &c1) + contract(&dn, &c2, &c2));

    let values = points
        .par_iter()
        .map(|&z| {
            let pair = make_cgo_pair(z)?;
            let s1: Vec<Complex64> = images.iter().map(|y| pair.phi1(*y)).collect();
            let s2: Vec<Complex64> = images.iter().map(|y| pair.phi2(*y)).collect();
            let b = contract(&dn, &basis.coefficients(&s1)?, &basis.coefficients(&s2)?);
            let v = -b / (2.0 * PI * PI * (z[0] * z[0] + z[1] * z[1]));
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite("F̂"))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FhatGrid {
        radius,
        lattice: m,
        spacing,
        points,
        values,
        zero_value,
        background_scale: scale,
        normalization: dn.normalization.clone(),
        trace_points,
    })
}

/// Truncated inverse transform samples.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseSamples {
    pub values: Vec<f64>,
    /// `max |Im| / max(max |Re|, 1)` before the imaginary part is dropped.
    /// The floor keeps near-zero difference fields from inflating it.
    pub imag_residual: f64,
}

/// `ã(y) = Re Σ F̂(z) e^{−2πi z·y} Δz²` over the lattice, plus `F̂(0) Δz²`
/// when `include_zero` is set.
pub fn inverse_fourier(
    fhat: &FhatGrid,
    points: &[[f64; 2]],
    include_zero: bool,
) -> Result<InverseSamples> {
    if fhat.points.is_empty() {
        return Err(Error::param("fhat", "empty frequency lattice"));
    }
    let w = fhat.spacing * fhat.spacing;
    let sums: Vec<Complex64> = points
        .par_iter()
        .map(|y| {
            let mut acc: Complex64 = fhat
                .points
                .iter()
                .zip(&fhat.values)
                .map(|(z, v)| v * Complex64::from_polar(1.0, -TAU * (z[0] * y[0] + z[1] * y[1])))
                .sum();
            if include_zero {
                acc += fhat.zero_value;
            }
            acc * w
        })
        .collect();
    let re = sums.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let im = sums.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok(InverseSamples {
        values: sums.iter().map(|v| v.re).collect(),
        imag_residual: im / re.max(1.0),
    })
}
