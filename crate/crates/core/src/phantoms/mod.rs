//! Test conductivities and analytic oracles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::tensor::{ConductivityField, ScalarField, Tensor2};

/// Radius of the inclusion in `σ_M`.
pub const INCLUSION_RADIUS: f64 = 0.5;

/// `σ_M(x) = M` for `|x| < 0.5`, `1` otherwise.
pub fn sigma_profile(m: f64) -> Result<ScalarField> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::param(
            "M",
            format!("contrast must be positive, got {m}"),
        ));
    }
    Ok(ScalarField::new(m.min(1.0), move |x| {
        if x[0].hypot(x[1]) < INCLUSION_RADIUS {
            m
        } else {
            1.0
        }
    }))
}

/// The four background tensors, labelled `A1`..`A4`.
pub fn a0_catalog() -> [(&'static str, Tensor2); 4] {
    [
        ("A1", Tensor2::diag(1.0, 1.3)),
        ("A2", Tensor2::diag(1.3, 1.0)),
        ("A3", Tensor2::diag(1.0, 4.0)),
        ("A4", Tensor2::diag(4.0, 1.0)),
    ]
}

/// Continuum DN eigenvalue `σ|k|` of the homogeneous unit disk.
pub fn analytic_disk_dn(sigma: f64, k: i64) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k", "frequency must be nonzero"));
    }
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", "must be positive"));
    }
    Ok(sigma * k.unsigned_abs() as f64)
}

/// Bessel `J₁` by its power series; accurate to about `1e-10` for `x ≤ 20`.
pub fn bessel_j1(x: f64) -> f64 {
    let q = -x * x / 4.0;
    let mut term = x / 2.0;
    let mut sum = term;
    for k in 1..80 {
        term *= q / (k as f64 * (k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `∫_{|y|<1} e^{2πi z·y} dy = J₁(2π|z|)/|z|`, with the limit `π` at `z = 0`.
pub fn disk_indicator_transform(z: [f64; 2]) -> f64 {
    let r = z[0].hypot(z[1]);
    if r < 1e-12 {
        std::f64::consts::PI
    } else {
        bessel_j1(std::f64::consts::TAU * r) / r
    }
}

/// A phantom `A(x) = σ_M(x) A₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub name: String,
    pub contrast: f64,
    pub a0: Tensor2,
}

impl PhantomSpec {
    /// `A1`, `A2` (contrast 1.3) and `A3`, `A4` (contrast 4) from the catalog.
    pub fn by_name(name: &str) -> Result<PhantomSpec> {
        let (label, a0) = a0_catalog()
            .into_iter()
            .find(|(label, _)| label.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                Error::param(
                    "phantom",
                    format!("unknown phantom `{name}`, expected A1..A4"),
                )
            })?;
        let contrast = if matches!(label, "A1" | "A2") {
            1.3
        } else {
            4.0
        };
        Ok(PhantomSpec {
            name: label.to_string(),
            contrast,
            a0,
        })
    }

    pub fn custom(name: impl Into<String>, contrast: f64, a0: Tensor2) -> Result<PhantomSpec> {
        sigma_profile(contrast)?;
        Ok(PhantomSpec {
            name: name.into(),
            contrast,
            a0: a0.check_spd()?,
        })
    }

    /// Whether the background tensor is a multiple of the identity.
    pub fn is_isotropic(&self) -> bool {
        self.a0.xy == 0.0 && self.a0.xx == self.a0.yy
    }

    pub fn scalar(&self) -> Result<ScalarField> {
        sigma_profile(self.contrast)
    }

    pub fn field(&self) -> Result<ConductivityField> {
        ConductivityField::factored(self.scalar()?, self.a0)
    }

    /// True scalar multiplier at `x`.
    pub fn target(&self, x: [f64; 2]) -> f64 {
        if x[0].hypot(x[1]) < INCLUSION_RADIUS {
            self.contrast
        } else {
            1.0
        }
    }
}
