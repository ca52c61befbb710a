//! Runs simulate → map → reconstruct → evaluate through the library entry
//! points behind the CLI, writing into a directory of your choice.
//!
//! ```text
//! cargo run --release --example cli_pipeline -- [output_dir] [phantom]
//! ```

use std::path::PathBuf;

use aniso_eit::io::{
    cmd_evaluate, cmd_map, cmd_reconstruct, cmd_simulate, PhantomChoice, RunConfig,
};

fn main() -> aniso_eit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config = RunConfig {
        output_dir: PathBuf::from(args.first().map_or("pipeline-out", String::as_str)),
        phantom: PhantomChoice::Name(args.get(1).cloned().unwrap_or_else(|| "A1".into())),
        ..RunConfig::default()
    };
    config.validate()?;
    println!("config hash {}", config.hash()?);

    let sim = cmd_simulate(&config)?;
    let map = cmd_map(&config)?;
    for radius in [1.8, 2.0, 2.3] {
        config.reconstruction.radius = radius;
        let rec = cmd_reconstruct(&config, &sim.dn, &map.grid, Some(&sim.reference))?;
        let (path, m) = cmd_evaluate(&config, &rec.field)?;
        println!(
            "R = {radius}: centre {:.3}, background {:.3}, slope {:.3}, L2 {:.3} -> {}",
            m.center,
            m.bg_mean,
            m.slope,
            m.l2_rel,
            path.display()
        );
    }
    Ok(())
}
