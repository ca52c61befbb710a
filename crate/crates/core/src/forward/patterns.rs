//! Trigonometric current patterns.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The `L − 1` trigonometric patterns for `L` equispaced electrodes.
///
/// Pattern `k` (one-based) is `amplitude · cos(kθ_ℓ)` for `k ≤ L/2` and
/// `amplitude · sin((k − L/2)θ_ℓ)` above that, with `θ_ℓ = 2πℓ/L`,
/// `ℓ = 0..L`. `columns[k-1][ℓ]` holds `T_ℓ^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentPatternSet {
    pub electrodes: usize,
    pub amplitude: f64,
    pub columns: Vec<Vec<f64>>,
    /// Euclidean norm of each column.
    pub norms: Vec<f64>,
}

impl CurrentPatternSet {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Column `i` (zero-based) scaled to unit Euclidean norm.
    pub fn normalized(&self, i: usize) -> Vec<f64> {
        self.columns[i].iter().map(|t| t / self.norms[i]).collect()
    }

    /// Frequency and kind of column `i`: `(k, true)` for cosine, `(k, false)` for sine.
    pub fn frequency(&self, i: usize) -> (usize, bool) {
        frequency(self.electrodes, i)
    }
}

pub(crate) fn frequency(electrodes: usize, i: usize) -> (usize, bool) {
    let half = electrodes / 2;
    if i < half {
        (i + 1, true)
    } else {
        (i + 1 - half, false)
    }
}

pub fn trig_current_patterns(electrodes: usize, amplitude: f64) -> Result<CurrentPatternSet> {
    if electrodes < 4 || !electrodes.is_multiple_of(2) {
        return Err(Error::param(
            "electrodes",
            format!("need an even count of at least 4, got {electrodes}"),
        ));
    }
    if !(amplitude.is_finite() && amplitude != 0.0) {
        return Err(Error::param("amplitude", "must be finite and nonzero"));
    }
    let columns: Vec<Vec<f64>> = (0..electrodes - 1)
        .map(|i| {
            let (k, cosine) = frequency(electrodes, i);
            (0..electrodes)
                .map(|l| {
                    // Reduce k·l mod L in integers and use the representative
                    // nearest zero, so cancelling pairs match to the last bit.
                    let r = ((k * l) % electrodes) as f64;
                    let r = if 2.0 * r > electrodes as f64 {
                        r - electrodes as f64
                    } else {
                        r
                    };
                    let phase = TAU * r / electrodes as f64;
                    amplitude * if cosine { phase.cos() } else { phase.sin() }
                })
                .collect()
        })
        .collect();
    let norms = columns
        .iter()
        .map(|c| c.iter().map(|t| t * t).sum::<f64>().sqrt())
        .collect();
    Ok(CurrentPatternSet {
        electrodes,
        amplitude,
        columns,
        norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_electrode_columns() {
        let p = trig_current_patterns(4, 1.0).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(&p.columns[0], &[1.0, 0.0, -1.0, 0.0]));
        assert!(close(&p.columns[2], &[0.0, 1.0, 0.0, -1.0]));
    }

    #[test]
    fn kirchhoff_and_orthogonality() {
        for l in [4, 8, 16, 32] {
            let p = trig_current_patterns(l, 1.0).unwrap();
            for (i, c) in p.columns.iter().enumerate() {
                assert!(c.iter().sum::<f64>().abs() < 1e-14, "L={l} column {i}");
                for d in &p.columns[..i] {
                    let dot: f64 = c.iter().zip(d).map(|(a, b)| a * b).sum();
                    assert!(dot.abs() < 1e-12);
                }
            }
            // ‖cos‖² = L/2 except the alternating column with ‖·‖² = L.
            assert!((p.norms[l / 2 - 1].powi(2) - l as f64).abs() < 1e-12);
            assert!((p.norms[0].powi(2) - l as f64 / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_rejected() {
        assert!(trig_current_patterns(5, 1.0).is_err());
        assert!(trig_current_patterns(2, 1.0).is_err());
    }
}
