//! Symmetric 2×2 conductivity tensors and tensor-valued fields.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symmetric 2×2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Tensor2 {
    pub const IDENTITY: Tensor2 = Tensor2 {
        xx: 1.0,
        xy: 0.0,
        yy: 1.0,
    };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Tensor2 { xx, xy, yy }
    }

    pub fn diag(xx: f64, yy: f64) -> Self {
        Tensor2 { xx, xy: 0.0, yy }
    }

    /// Builds a tensor from a full matrix, rejecting asymmetric input.
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Result<Self> {
        let scale = m[0][1].abs().max(m[1][0].abs()).max(1.0);
        if (m[0][1] - m[1][0]).abs() > 1e-12 * scale {
            return Err(Error::NotSpd(format!(
                "matrix is not symmetric ({} vs {})",
                m[0][1], m[1][0]
            )));
        }
        Ok(Tensor2::new(m[0][0], m[0][1], m[1][1]))
    }

    pub fn to_matrix(self) -> [[f64; 2]; 2] {
        [[self.xx, self.xy], [self.xy, self.yy]]
    }

    pub fn det(self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(self) -> (f64, f64) {
        let half_tr = 0.5 * self.trace();
        let disc = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        (half_tr - disc, half_tr + disc)
    }

    pub fn min_eigenvalue(self) -> f64 {
        self.eigenvalues().0
    }

    pub fn is_finite(self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    /// Checks positive definiteness; symmetry holds by construction.
    pub fn check_spd(self) -> Result<Self> {
        if !self.is_finite() {
            return Err(Error::NotSpd(format!("{self} has non-finite entries")));
        }
        if self.xx <= 0.0 || self.det() <= 0.0 {
            return Err(Error::NotSpd(format!("{self} is not positive definite")));
        }
        Ok(self)
    }

    pub fn scale(self, c: f64) -> Self {
        Tensor2::new(c * self.xx, c * self.xy, c * self.yy)
    }

    /// Quadratic form `pᵀ A q`.
    pub fn form(self, p: [f64; 2], q: [f64; 2]) -> f64 {
        p[0] * (self.xx * q[0] + self.xy * q[1]) + p[1] * (self.xy * q[0] + self.yy * q[1])
    }

    /// `J A Jᵀ` for a general 2×2 matrix `J`.
    pub fn congruence(self, j: [[f64; 2]; 2]) -> Self {
        let a = self.to_matrix();
        let mut ja = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                ja[r][c] = j[r][0] * a[0][c] + j[r][1] * a[1][c];
            }
        }
        let entry = |r: usize, c: usize| ja[r][0] * j[c][0] + ja[r][1] * j[c][1];
        Tensor2::new(entry(0, 0), 0.5 * (entry(0, 1) + entry(1, 0)), entry(1, 1))
    }
}

impl fmt::Display for Tensor2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.xx, self.xy, self.xy, self.yy
        )
    }
}

type ScalarFn = dyn Fn([f64; 2]) -> f64 + Send + Sync;
type TensorFn = dyn Fn([f64; 2]) -> Tensor2 + Send + Sync;

/// A positive scalar field together with a known lower bound.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<ScalarFn>,
    lower_bound: f64,
}

impl ScalarField {
    /// Wraps a closure; `lower_bound` must be a valid infimum over the domain.
    pub fn new(lower_bound: f64, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            eval: Arc::new(f),
            lower_bound,
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(c, move |_| c)
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        (self.eval)(x)
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("lower_bound", &self.lower_bound)
            .finish_non_exhaustive()
    }
}

#[derive(Clone)]
enum FieldKind {
    Factored { scalar: ScalarField, a0: Tensor2 },
    General(Arc<TensorFn>),
}

/// Anisotropic conductivity `A(x)`, symmetric and uniformly elliptic.
#[derive(Clone)]
pub struct ConductivityField {
    kind: FieldKind,
    ellipticity: f64,
}

impl ConductivityField {
    /// `A(x) = a(x) A0`.
    pub fn factored(scalar: ScalarField, a0: Tensor2) -> Result<Self> {
        let a0 = a0.check_spd()?;
        if !(scalar.lower_bound() > 0.0) {
            return Err(Error::param(
                "scalar",
                format!("lower bound {} must be positive", scalar.lower_bound()),
            ));
        }
        let ellipticity = scalar.lower_bound() * a0.min_eigenvalue();
        Ok(ConductivityField {
            kind: FieldKind::Factored { scalar, a0 },
            ellipticity,
        })
    }

    /// A general field; `ellipticity` is the claimed eigenvalue floor.
    pub fn general(
        ellipticity: f64,
        f: impl Fn([f64; 2]) -> Tensor2 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(ellipticity > 0.0) {
            return Err(Error::param("ellipticity", "must be positive"));
        }
        Ok(ConductivityField {
            kind: FieldKind::General(Arc::new(f)),
            ellipticity,
        })
    }

    pub fn homogeneous(a0: Tensor2) -> Result<Self> {
        ConductivityField::factored(ScalarField::constant(1.0), a0)
    }

    pub fn eval(&self, x: [f64; 2]) -> Tensor2 {
        match &self.kind {
            FieldKind::Factored { scalar, a0 } => a0.scale(scalar.eval(x)),
            FieldKind::General(f) => f(x),
        }
    }

    pub fn ellipticity(&self) -> f64 {
        self.ellipticity
    }

    /// The `(a, A0)` factorisation when the field was built that way.
    pub fn factors(&self) -> Option<(&ScalarField, Tensor2)> {
        match &self.kind {
            FieldKind::Factored { scalar, a0 } => Some((scalar, *a0)),
            FieldKind::General(_) => None,
        }
    }

    /// Multiplies the whole field by a positive constant.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::param("scale", "must be positive"));
        }
        let kind = match &self.kind {
            FieldKind::Factored { scalar, a0 } => FieldKind::Factored {
                scalar: scalar.clone(),
                a0: a0.scale(c),
            },
            FieldKind::General(f) => {
                let f = f.clone();
                FieldKind::General(Arc::new(move |x| f(x).scale(c)))
            }
        };
        Ok(ConductivityField {
            kind,
            ellipticity: self.ellipticity * c,
        })
    }
}

impl fmt::Debug for ConductivityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("ConductivityField");
        if let FieldKind::Factored { a0, .. } = &self.kind {
            d.field("a0", a0);
        }
        d.field("ellipticity", &self.ellipticity).finish()
    }
}

/// `A(x) = a(x) A0` with validation of `A0`.
pub fn tensor_from_factored(a: ScalarField, a0: Tensor2) -> Result<ConductivityField> {
    ConductivityField::factored(a, a0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_field() {
        let f = tensor_from_factored(ScalarField::constant(1.0), Tensor2::IDENTITY).unwrap();
        assert_eq!(f.eval([0.3, -0.1]), Tensor2::IDENTITY);
        assert_eq!(f.ellipticity(), 1.0);
    }

    #[test]
    fn rejects_indefinite_a0() {
        let bad = Tensor2::new(1.0, 2.0, 1.0);
        assert!(matches!(
            tensor_from_factored(ScalarField::constant(1.0), bad),
            Err(Error::NotSpd(_))
        ));
        assert!(Tensor2::from_matrix([[1.0, 0.2], [0.3, 1.0]]).is_err());
    }

    #[test]
    fn eigenvalues_of_diag() {
        let (lo, hi) = Tensor2::diag(4.0, 1.0).eigenvalues();
        assert_eq!((lo, hi), (1.0, 4.0));
    }

    #[test]
    fn congruence_matches_dense_product() {
        let a = Tensor2::new(2.0, 0.5, 1.0);
        let j = [[1.2, -0.3], [0.4, 0.9]];
        let out = a.congruence(j);
        // JAJᵀ by hand
        let ja = [
            [1.2 * 2.0 - 0.3 * 0.5, 1.2 * 0.5 - 0.3 * 1.0],
            [0.4 * 2.0 + 0.9 * 0.5, 0.4 * 0.5 + 0.9 * 1.0],
        ];
        let xx = ja[0][0] * 1.2 + ja[0][1] * -0.3;
        let xy = ja[0][0] * 0.4 + ja[0][1] * 0.9;
        let yy = ja[1][0] * 0.4 + ja[1][1] * 0.9;
        assert!((out.xx - xx).abs() < 1e-14);
        assert!((out.xy - xy).abs() < 1e-14);
        assert!((out.yy - yy).abs() < 1e-14);
    }

    #[test]
    fn symmetry_and_floor_at_random_points() {
        let a = ScalarField::new(0.5, |x: [f64; 2]| 0.5 + x[0] * x[0] + 0.3 * x[1].abs());
        let field = tensor_from_factored(a, Tensor2::new(2.0, 0.4, 1.0)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let t = field.eval(x);
            let m = t.to_matrix();
            assert_eq!(m[0][1], m[1][0]);
            assert!(t.min_eigenvalue() >= field.ellipticity() * (1.0 - 1e-12));
        }
    }

    proptest! {
        #[test]
        fn eigen_sum_and_product(xx in 0.1f64..10.0, yy in 0.1f64..10.0, xy in -3.0f64..3.0) {
            let t = Tensor2::new(xx, xy, yy);
            let (lo, hi) = t.eigenvalues();
            prop_assert!((lo + hi - t.trace()).abs() < 1e-10);
            prop_assert!((lo * hi - t.det()).abs() < 1e-9 * (1.0 + t.det().abs()));
        }
    }
}
