#![allow(dead_code)]

use std::path::Path;

use aniso_eit::io::{PhantomChoice, RunConfig};

/// A configuration small enough for quick end-to-end runs.
pub fn small_config(phantom: PhantomChoice, dir: &Path) -> RunConfig {
    let mut c = RunConfig {
        phantom,
        output_dir: dir.to_path_buf(),
        ..RunConfig::default()
    };
    c.electrodes.count = 16;
    c.mesh.target_h = 0.1;
    c.map.n = 128;
    c.reconstruction.grid = 41;
    c
}

pub fn named(name: &str) -> PhantomChoice {
    PhantomChoice::Name(name.into())
}

pub fn custom(contrast: f64, a0: [[f64; 2]; 2]) -> PhantomChoice {
    PhantomChoice::Spec {
        name: "custom".into(),
        contrast,
        a0,
    }
}
