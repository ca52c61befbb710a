//! From `F̂` to the reconstructed conductivity `a(x) A₀` on the disk.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::dn::DnMatrix;
use crate::geometry::Tensor2;
use crate::qc::map::CoordinateMap;
use crate::recon::fhat::{fhat_grid_with, inverse_fourier, FhatGrid, DEFAULT_TRACE_POINTS};

/// Post-hoc additive correction of `a`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calibration {
    #[default]
    None,
    /// Shift `a` so its mean over `0.85 ≤ |x| ≤ 1` equals the background 1.
    BoundaryBand,
}

/// Inner and outer radius of the calibration band.
pub const BAND: (f64, f64) = (0.85, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconOptions {
    /// Truncation radius `R` of the frequency lattice.
    pub radius: f64,
    /// Lattice points per axis (odd).
    pub lattice: usize,
    /// Output grid points per axis over `[−1, 1]²`.
    pub grid: usize,
    /// Add the `F̂(0)` term to the inverse transform.
    pub include_zero: bool,
    pub calibration: Calibration,
    /// Boundary samples for the trace expansion; the electrode count
    /// selects electrode-centre sampling.
    pub trace_points: usize,
    /// Subtract the known contact-impedance drop from the ND matrices first.
    pub remove_contact_drop: bool,
}

impl Default for ReconOptions {
    fn default() -> Self {
        ReconOptions {
            radius: 2.0,
            lattice: 33,
            grid: 101,
            include_zero: true,
            calibration: Calibration::None,
            trace_points: DEFAULT_TRACE_POINTS,
            remove_contact_drop: true,
        }
    }
}

impl ReconOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::param("reconstruction.radius", "must be positive"));
        }
        if self.lattice < 3 || self.lattice.is_multiple_of(2) {
            return Err(Error::param(
                "reconstruction.lattice",
                "must be odd and at least 3",
            ));
        }
        if self.grid < 3 {
            return Err(Error::param("reconstruction.grid", "must be at least 3"));
        }
        Ok(())
    }
}

/// `a` sampled at a set of points together with diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSamples {
    pub values: Vec<f64>,
    pub imag_residual: f64,
    pub offset: f64,
}

/// `a(x) = baseline + ã(Φ(x)) (+ calibration offset)`.
///
/// `baseline` is 1 when `fhat` is a difference against the homogeneous
/// background and 0 for an absolute transform.
pub fn reconstruct_scalar<M: CoordinateMap + ?Sized>(
    fhat: &FhatGrid,
    map: &M,
    points: &[[f64; 2]],
    baseline: f64,
    include_zero: bool,
    calibration: Calibration,
) -> Result<ScalarSamples> {
    let images: Vec<[f64; 2]> = points
        .par_iter()
        .map(|x| map.forward(*x))
        .collect::<Result<_>>()?;
    let inv = inverse_fourier(fhat, &images, include_zero)?;
    let mut values: Vec<f64> = inv.values.iter().map(|v| baseline + v).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("reconstructed conductivity"));
    }
    let offset = match calibration {
        Calibration::None => 0.0,
        Calibration::BoundaryBand => {
            let band: Vec<f64> = points
                .iter()
                .zip(&values)
                .filter(|(x, _)| {
                    let r = x[0].hypot(x[1]);
                    r >= BAND.0 && r <= BAND.1
                })
                .map(|(_, v)| *v)
                .collect();
            if band.is_empty() {
                return Err(Error::param(
                    "calibration",
                    "no evaluation points inside the calibration band",
                ));
            }
            1.0 - band.iter().sum::<f64>() / band.len() as f64
        }
    };
    values.iter_mut().for_each(|v| *v += offset);
    Ok(ScalarSamples {
        values,
        imag_residual: inv.imag_residual,
        offset,
    })
}

/// `σ(x) = a(x) A₀` pointwise.
pub fn assemble_tensor(a: &[f64], a0: Tensor2) -> Vec<Tensor2> {
    a.iter().map(|&v| a0.scale(v)).collect()
}

/// Reconstruction on a square grid over `[−1, 1]²`, masked to the disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedField {
    /// Points per axis; sample `(i, j)` sits at `(coords[i], coords[j])`
    /// and is stored at `j * n + i`.
    pub n: usize,
    pub coords: Vec<f64>,
    /// `a(x)`, `None` outside the disk.
    pub a: Vec<Option<f64>>,
    /// `Φ(x)` for each grid point inside the disk.
    pub images: Vec<Option<[f64; 2]>>,
    /// `ã(Φ(x))` before calibration, the deformed-domain field.
    pub atilde: Vec<Option<f64>>,
    pub a0: Tensor2,
    pub imag_residual: f64,
    pub calibration_offset: f64,
    pub options: ReconOptions,
    pub formulation: String,
}

impl ReconstructedField {
    pub fn at(&self, i: usize, j: usize) -> Option<f64> {
        self.a[j * self.n + i]
    }

    pub fn tensor(&self, i: usize, j: usize) -> Option<Tensor2> {
        self.at(i, j).map(|v| self.a0.scale(v))
    }

    /// Samples of `a` along `y = 0` (or the row closest to it).
    pub fn cross_section(&self) -> Vec<(f64, f64)> {
        let j = self.n / 2;
        (0..self.n)
            .filter_map(|i| self.at(i, j).map(|v| (self.coords[i], v)))
            .collect()
    }

    /// Points inside the disk and their values.
    pub fn samples(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        (0..self.a.len()).filter_map(move |k| {
            let (i, j) = (k % self.n, k / self.n);
            self.a[k].map(|v| ([self.coords[i], self.coords[j]], v))
        })
    }
}

/// Grid coordinates over `[−1, 1]` and the disk points in row-major order.
pub fn disk_grid(n: usize) -> (Vec<f64>, Vec<Option<[f64; 2]>>) {
    let coords: Vec<f64> = (0..n)
        .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
        .collect();
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let p = [coords[i], coords[j]];
            pts.push((p[0].hypot(p[1]) <= 1.0 + 1e-12).then_some(p));
        }
    }
    (coords, pts)
}

/// Runs the full reconstruction from measured DN data.
///
/// With a `reference` DN matrix (the homogeneous background `A₀` on the same
/// mesh and electrodes) the transform is formed from the difference and the
/// result is `1 + ã`; without it the absolute transform is inverted.
pub fn reconstruct<M: CoordinateMap + ?Sized>(
    dn: &DnMatrix,
    reference: Option<&DnMatrix>,
    map: &M,
    a0: Tensor2,
    opts: &ReconOptions,
) -> Result<(ReconstructedField, FhatGrid)> {
    opts.validate()?;
    a0.check_spd()?;
    let det = a0.det();
    let prepare = |d: &DnMatrix| {
        if opts.remove_contact_drop {
            d.without_contact_impedance()
        } else {
            Ok(d.clone())
        }
    };
    let dn = &prepare(dn)?;
    let mut fhat = fhat_grid_with(dn, map, opts.radius, opts.lattice, det, opts.trace_points)?;
    let (baseline, formulation) = match reference {
        Some(r) => {
            if r.dim() != dn.dim() {
                return Err(Error::Dimension(
                    "reference DN matrix has a different size".into(),
                ));
            }
            fhat = fhat.difference(&fhat_grid_with(
                &prepare(r)?,
                map,
                opts.radius,
                opts.lattice,
                det,
                opts.trace_points,
            )?)?;
            (1.0, "difference")
        }
        None => (0.0, "absolute"),
    };
    let (coords, pts) = disk_grid(opts.grid);
    let inside: Vec<[f64; 2]> = pts.iter().flatten().copied().collect();
    let s = reconstruct_scalar(
        &fhat,
        map,
        &inside,
        baseline,
        opts.include_zero,
        opts.calibration,
    )?;
    let mut values = s.values.iter();
    let a: Vec<Option<f64>> = pts
        .iter()
        .map(|p| p.and_then(|_| values.next().copied()))
        .collect();
    let atilde = a.iter().map(|v| v.map(|v| v - s.offset)).collect();
    let images = pts
        .iter()
        .map(|p| p.map(|x| map.forward(x)).transpose())
        .collect::<Result<_>>()?;
    Ok((
        ReconstructedField {
            n: opts.grid,
            coords,
            a,
            images,
            atilde,
            a0,
            imag_residual: s.imag_residual,
            calibration_offset: s.offset,
            options: opts.clone(),
            formulation: formulation.into(),
        },
        fhat,
    ))
}
