//! Electrode arcs on the boundary circle.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One electrode: the boundary arc from `start` to `end` (radians, `end > start`).
///
/// `start` is normalised to `[0, 2π)`; `end` may exceed `2π` when the arc
/// straddles the positive x-axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeArc {
    pub start: f64,
    pub end: f64,
}

impl ElectrodeArc {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    pub fn center(&self) -> f64 {
        (0.5 * (self.start + self.end)).rem_euclid(TAU)
    }

    /// Whether angle `theta` lies on the closed arc, with tolerance `tol`.
    pub fn contains(&self, theta: f64, tol: f64) -> bool {
        let rel = (theta - self.start).rem_euclid(TAU);
        rel <= self.width() + tol || rel >= TAU - tol
    }
}

/// Electrodes on a circle of radius `radius`, ordered counterclockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeLayout {
    pub radius: f64,
    pub arcs: Vec<ElectrodeArc>,
    pub contact_impedances: Vec<f64>,
}

impl ElectrodeLayout {
    pub fn new(radius: f64, arcs: Vec<ElectrodeArc>, contact_impedances: Vec<f64>) -> Result<Self> {
        let layout = ElectrodeLayout {
            radius,
            arcs,
            contact_impedances,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Arc length `|e_l|` on the circle.
    pub fn arc_length(&self, l: usize) -> f64 {
        self.radius * self.arcs[l].width()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.arcs.iter().map(ElectrodeArc::center).collect()
    }

    /// Boundary length per electrode (the electrode pitch).
    pub fn pitch(&self) -> f64 {
        TAU * self.radius / self.len() as f64
    }

    pub fn total_coverage(&self) -> f64 {
        (0..self.len()).map(|l| self.arc_length(l)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.arcs.len();
        if !(self.radius > 0.0) {
            return Err(Error::param("radius", "must be positive"));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::param(
                "electrodes",
                format!("electrode count must be even and at least 4, got {n}"),
            ));
        }
        if self.contact_impedances.len() != n {
            return Err(Error::Dimension(format!(
                "{} contact impedances for {n} electrodes",
                self.contact_impedances.len()
            )));
        }
        if let Some(z) = self.contact_impedances.iter().find(|z| !(**z > 0.0)) {
            return Err(Error::param(
                "contact_impedance",
                format!("must be positive, got {z}"),
            ));
        }
        for (l, arc) in self.arcs.iter().enumerate() {
            if !(arc.width() > 0.0) || !(0.0..TAU).contains(&arc.start) {
                return Err(Error::param(
                    "electrodes",
                    format!("arc {l} ({}, {}) is malformed", arc.start, arc.end),
                ));
            }
        }
        // Centres strictly increase (after rotating so arc 0 comes first) and
        // each arc ends before the next one starts.
        let base = self.arcs[0].start;
        for l in 0..n {
            let a = &self.arcs[l];
            let b = &self.arcs[(l + 1) % n];
            let a_end = (a.start - base).rem_euclid(TAU) + a.width();
            let mut b_start = (b.start - base).rem_euclid(TAU);
            if l + 1 == n {
                b_start += TAU;
            }
            if !(a_end < b_start) {
                return Err(Error::param(
                    "electrodes",
                    format!("arcs {l} and {} overlap or are out of order", (l + 1) % n),
                ));
            }
        }
        Ok(())
    }
}

/// `count` equispaced electrodes on the unit circle, electrode `l` centred at
/// `2πl/count`, each covering `coverage · 2π / count` of arc length.
pub fn place_electrodes(
    count: usize,
    coverage: f64,
    contact_impedance: f64,
) -> Result<ElectrodeLayout> {
    place_electrodes_on(1.0, count, coverage, contact_impedance)
}

/// As [`place_electrodes`] on a circle of the given radius.
pub fn place_electrodes_on(
    radius: f64,
    count: usize,
    coverage: f64,
    contact_impedance: f64,
) -> Result<ElectrodeLayout> {
    if count < 4 || !count.is_multiple_of(2) {
        return Err(Error::param(
            "electrodes",
            format!("trigonometric patterns need an even count of at least 4, got {count}"),
        ));
    }
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::param(
            "coverage",
            format!("must lie in (0, 1), got {coverage}"),
        ));
    }
    let step = TAU / count as f64;
    let half = 0.5 * coverage * step;
    let arcs = (0..count)
        .map(|l| {
            let c = l as f64 * step;
            let start = (c - half).rem_euclid(TAU);
            ElectrodeArc {
                start,
                end: start + 2.0 * half,
            }
        })
        .collect();
    ElectrodeLayout::new(radius, arcs, vec![contact_impedance; count])
}

/// Wraps an angle into `(-π, π]`.
pub(crate) fn wrap_pi(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}
