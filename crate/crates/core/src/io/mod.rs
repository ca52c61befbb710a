//! Configuration, file formats and the CLI commands.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_evaluate, cmd_map, cmd_reconstruct, cmd_simulate, load_map, read_record, reference_dn,
    MapOutput, MapSummary, Metrics, Provenance, ReconstructOutput, Record, SimulateOutput,
};
pub use config::{PhantomChoice, RunConfig, CONFIG_KEYS};
