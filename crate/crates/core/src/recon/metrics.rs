//! Summary numbers for a reconstructed cross-section.

use serde::{Deserialize, Serialize};

use crate::recon::field::ReconstructedField;

/// Radial band treated as background on the cross-section, kept clear of
/// both the inclusion edge and the calibration band.
pub const BACKGROUND_BAND: (f64, f64) = (0.6, 0.9);
/// Window around the inclusion edge searched by the slope proxy.
pub const EDGE_WINDOW: (f64, f64) = (0.3, 0.7);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionMetrics {
    /// Mean of `a` on the x-axis over the background band.
    pub bg_mean: f64,
    /// `a(0)`.
    pub center: f64,
    /// Largest finite-difference slope `|Δa/Δx|` on the x-axis inside the edge window.
    pub slope: f64,
    /// `‖a − target‖₂ / ‖target‖₂` over the disk samples.
    pub l2_rel: f64,
}

fn in_band(x: f64, band: (f64, f64)) -> bool {
    x.abs() >= band.0 && x.abs() <= band.1
}

pub fn cross_section_metrics(
    field: &ReconstructedField,
    target: impl Fn([f64; 2]) -> f64,
) -> CrossSectionMetrics {
    let cs = field.cross_section();
    let bg: Vec<f64> = cs
        .iter()
        .filter(|(x, _)| in_band(*x, BACKGROUND_BAND))
        .map(|(_, a)| *a)
        .collect();
    let center = cs
        .iter()
        .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
        .map(|(_, a)| *a)
        .unwrap_or(f64::NAN);
    let slope = cs
        .windows(2)
        .filter(|w| in_band(0.5 * (w[0].0 + w[1].0), EDGE_WINDOW))
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(0.0, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, a) in field.samples() {
        let t = target(x);
        num += (a - t) * (a - t);
        den += t * t;
    }
    CrossSectionMetrics {
        bg_mean: if bg.is_empty() {
            f64::NAN
        } else {
            bg.iter().sum::<f64>() / bg.len() as f64
        },
        center,
        slope,
        l2_rel: (num / den).sqrt(),
    }
}
