//! Exponential (complex geometrical optics) harmonic functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `φ₁ = e^{iπz·y + πb·y}` and `φ₂ = e^{iπz·y − πb·y}` with `b = (−z₂, z₁)`.
///
/// Both are harmonic because `(iz ± b)·(iz ± b) = 0`, and
/// `(iz + b)·(iz − b) = −2|z|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgoPair {
    pub z: [f64; 2],
    pub b: [f64; 2],
}

pub fn make_cgo_pair(z: [f64; 2]) -> Result<CgoPair> {
    if z == [0.0, 0.0] || !(z[0].is_finite() && z[1].is_finite()) {
        return Err(Error::param("z", "frequency must be finite and nonzero"));
    }
    Ok(CgoPair {
        z,
        b: [-z[1], z[0]],
    })
}

impl CgoPair {
    fn dot(a: [f64; 2], y: [f64; 2]) -> f64 {
        a[0] * y[0] + a[1] * y[1]
    }

    pub fn phi1(&self, y: [f64; 2]) -> Complex64 {
        Complex64::new(PI * Self::dot(self.b, y), PI * Self::dot(self.z, y)).exp()
    }

    pub fn phi2(&self, y: [f64; 2]) -> Complex64 {
        Complex64::new(-PI * Self::dot(self.b, y), PI * Self::dot(self.z, y)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn construction() {
        let p = make_cgo_pair([1.0, 0.0]).unwrap();
        assert_eq!(p.b, [0.0, 1.0]);
        let y = [0.3, -0.2];
        let expected = Complex64::new(PI * y[1], PI * y[0]).exp();
        assert!((p.phi1(y) - expected).norm() < 1e-15);
        assert!(make_cgo_pair([0.0, 0.0]).is_err());
    }

    #[test]
    fn product_and_orthogonality() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let y = [0.3, -0.2];
        for _ in 0..100 {
            let z = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let p = make_cgo_pair(z).unwrap();
            assert_eq!(p.z[0] * p.b[0] + p.z[1] * p.b[1], 0.0);
            assert_eq!(p.b[0].hypot(p.b[1]), z[0].hypot(z[1]));
            // (iz + b)·(iz − b) = −|z|² − |b|² + i(b·z − z·b)
            let lhs = Complex64::new(
                -(z[0] * z[0] + z[1] * z[1]) - (p.b[0] * p.b[0] + p.b[1] * p.b[1]),
                0.0,
            );
            assert!((lhs + 2.0 * (z[0] * z[0] + z[1] * z[1])).norm() < 1e-13);
            let prod = p.phi1(y) * p.phi2(y);
            let expected = Complex64::new(0.0, 2.0 * PI * (z[0] * y[0] + z[1] * y[1])).exp();
            assert!((prod - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn harmonic_by_fourth_order_stencil() {
        // A five-point stencil has truncation error (h²/12)·Σ∂⁴φ ≈ (π|z|)⁴h²/6,
        // above the target bound, so the fourth-order stencil is used.
        let p = make_cgo_pair([0.8, -0.6]).unwrap();
        let h = 5e-3;
        let y = [0.2, 0.4];
        let f = |dx: f64, dy: f64| p.phi1([y[0] + dx * h, y[1] + dy * h]);
        let axis = |ex: f64, ey: f64| {
            -f(2.0 * ex, 2.0 * ey) + 16.0 * f(ex, ey) - 30.0 * f(0.0, 0.0) + 16.0 * f(-ex, -ey)
                - f(-2.0 * ex, -2.0 * ey)
        };
        let lap = (axis(1.0, 0.0) + axis(0.0, 1.0)) / (12.0 * h * h);
        let bound = 1e-4 * p.phi1(y).norm() * PI.powi(2) * h * h;
        assert!(lap.re.abs() <= bound, "{} > {bound}", lap.re);
    }
}
