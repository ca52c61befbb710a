//! Lists the catalog phantoms with their Beltrami coefficients and samples
//! each conductivity along the x-axis.
//!
//! ```text
//! cargo run --release --example phantom_catalog
//! ```

use aniso_eit::phantoms::{a0_catalog, PhantomSpec};
use aniso_eit::qc::beltrami_coefficient;

fn main() -> aniso_eit::Result<()> {
    println!(
        "{:<4} {:>16} {:>6} {:>9} {:>9}",
        "name", "A0", "M", "mu", "det A0"
    );
    for (name, a0) in a0_catalog() {
        let p = PhantomSpec::by_name(name)?;
        let mu = beltrami_coefficient(a0)?;
        println!(
            "{name:<4} {:>16} {:>6} {:>+9.4} {:>9.2}",
            format!("diag({}, {})", a0.xx, a0.yy),
            p.contrast,
            mu.re,
            a0.det()
        );
    }

    println!("\nσ(x, 0) for A3:");
    let p = PhantomSpec::by_name("A3")?;
    let field = p.field()?;
    for x in [0.0, 0.25, 0.49, 0.5, 0.75, 1.0] {
        let t = field.eval([x, 0.0]);
        println!(
            "  x = {x:<5} σ = [[{}, {}], [{}, {}]]",
            t.xx, t.xy, t.xy, t.yy
        );
    }
    Ok(())
}
