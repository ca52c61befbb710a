//! Solves the Beltrami equation for each catalog tensor and reports the
//! Scheme-1 convergence, the residual and the isotropy of `Φ*A₀`.
//!
//! ```text
//! cargo run --release --example beltrami_map -- [n]
//! ```

use std::f64::consts::TAU;
use std::time::Instant;

use aniso_eit::geometry::ConductivityField;
use aniso_eit::phantoms::a0_catalog;
use aniso_eit::qc::{extend_mu, pushforward_tensor, solve_beltrami, SchemeOptions};

fn main() -> aniso_eit::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(512);
    for (name, a0) in a0_catalog() {
        let t = Instant::now();
        let mu = extend_mu(a0, 2.0, 0.5, n, 4.0)?;
        let map = solve_beltrami(&mu, SchemeOptions::default())?;
        let elapsed = t.elapsed();

        let pts: Vec<[f64; 2]> = (0..400)
            .map(|k| {
                let r = 0.95 * ((k % 20) as f64 / 19.0);
                let t = TAU * (k / 20) as f64 / 20.0;
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let field = ConductivityField::homogeneous(a0)?;
        let target = a0.det().sqrt();
        let (mut off, mut ratio) = (0.0f64, 1.0f64);
        for p in pushforward_tensor(&field, &map, &pts)? {
            let (lo, hi) = p.eigenvalues();
            off = off.max(p.xy.abs() / target);
            ratio = ratio.max(hi / lo);
        }
        let boundary: Vec<[f64; 2]> = (0..256)
            .map(|k| {
                [
                    (TAU * k as f64 / 256.0).cos(),
                    (TAU * k as f64 / 256.0).sin(),
                ]
            })
            .collect();
        let image = map.evaluate_many(&boundary)?;
        let area: f64 = (0..image.len())
            .map(|k| {
                let (a, b) = (image[k], image[(k + 1) % image.len()]);
                0.5 * (a[0] * b[1] - a[1] * b[0])
            })
            .sum();
        println!(
            "{name}: μ = {:+.4}, {} iterations, rate {:.3}, residual {:.2e}, \
             |offdiag|/√det {:.1e}, eig ratio {:.4}, image area/π {:.3}, {:.2?}",
            mu.mu0.re,
            map.iterations,
            map.contraction_rate(),
            map.residual,
            off,
            ratio,
            area / std::f64::consts::PI,
            elapsed
        );
    }
    Ok(())
}
