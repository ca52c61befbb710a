//! Run configuration shared by all CLI commands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{place_electrodes, ElectrodeLayout, Tensor2};
use crate::phantoms::PhantomSpec;
use crate::qc::SchemeOptions;
use crate::recon::ReconOptions;

/// A catalog name (`"A1"`..`"A4"`) or an explicit phantom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhantomChoice {
    Name(String),
    Spec {
        #[serde(default = "custom_name")]
        name: String,
        contrast: f64,
        /// Background tensor as a symmetric 2×2 matrix.
        a0: [[f64; 2]; 2],
    },
}

fn custom_name() -> String {
    "custom".into()
}

impl PhantomChoice {
    pub fn resolve(&self) -> Result<PhantomSpec> {
        match self {
            PhantomChoice::Name(name) => PhantomSpec::by_name(name),
            PhantomChoice::Spec { name, contrast, a0 } => {
                PhantomSpec::custom(name.clone(), *contrast, Tensor2::from_matrix(*a0)?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub target_h: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { target_h: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectrodeConfig {
    pub count: usize,
    pub coverage: f64,
    pub contact_impedance: f64,
}

impl Default for ElectrodeConfig {
    fn default() -> Self {
        ElectrodeConfig {
            count: 64,
            coverage: 0.5,
            contact_impedance: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    pub n: usize,
    pub s: f64,
    pub r: f64,
    pub blend: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            n: 512,
            s: 4.0,
            r: 2.0,
            blend: 0.5,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl MapConfig {
    pub fn scheme(&self) -> SchemeOptions {
        SchemeOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..SchemeOptions::default()
        }
    }
}

/// Everything a pipeline run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub phantom: PhantomChoice,
    pub mesh: MeshConfig,
    pub electrodes: ElectrodeConfig,
    pub map: MapConfig,
    pub reconstruction: ReconOptions,
    /// Relative noise level added to simulated voltages.
    pub noise: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            phantom: PhantomChoice::Name("A1".into()),
            mesh: MeshConfig::default(),
            electrodes: ElectrodeConfig::default(),
            map: MapConfig::default(),
            reconstruction: ReconOptions::default(),
            noise: 0.0,
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// One line per config key, as printed by `--help`.
pub const CONFIG_KEYS: &str = "\
CONFIG KEYS (JSON; every key is optional and falls back to the default shown)
  phantom                              \"A1\"     catalog name A1..A4, or {\"name\", \"contrast\", \"a0\": [[a,b],[b,c]]}
  mesh.target_h                        0.05     target edge length of the disk mesh
  electrodes.count                     64       number of electrodes L (even, >= 4)
  electrodes.coverage                  0.5      fraction of the boundary covered by electrodes, in (0, 1)
  electrodes.contact_impedance         0.01     contact impedance z of every electrode (> 0)
  map.n                                512      QC grid points per axis (even, >= 8)
  map.s                                4.0      QC grid half-width; the grid covers [-s, s)^2
  map.r                                2.0      radius of the region where mu equals mu(A0)
  map.blend                            0.5      width of the ramp taking mu to zero outside r
  map.tol                              1e-10    Scheme-1 stopping tolerance on the sup-norm increment
  map.max_iter                         200      Scheme-1 iteration limit
  reconstruction.radius                2.0      truncation radius R of the frequency disk
  reconstruction.lattice               33       frequency lattice points per axis over [-R, R] (odd)
  reconstruction.grid                  101      output grid points per axis over [-1, 1]
  reconstruction.include_zero          true     add the F(0) limit term to the inverse transform
  reconstruction.calibration           \"none\"   \"none\" or \"boundary_band\" (shift a to mean 1 on 0.85 <= |x| <= 1)
  reconstruction.trace_points          256      boundary samples for the trace expansion (L = electrode centres)
  reconstruction.remove_contact_drop   true     subtract the contact-impedance drop from the ND matrices
  noise                                0.0      relative Gaussian noise on simulated voltages
  seed                                 0        noise RNG seed
  output_dir                           \"out\"    directory receiving all output files";

/// Prefixes an I/O error with the offending path.
pub(crate) fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

fn digest(value: &impl Serialize) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| with_path(e, path))?;
        let config: RunConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    /// Checks every parameter range before any computation.
    pub fn validate(&self) -> Result<()> {
        self.phantom.resolve()?;
        if !(self.mesh.target_h > 0.0 && self.mesh.target_h < 1.0) {
            return Err(Error::param("mesh.target_h", "must lie in (0, 1)"));
        }
        self.layout()?;
        let m = &self.map;
        if m.n < 8 || !m.n.is_multiple_of(2) {
            return Err(Error::param("map.n", "must be even and at least 8"));
        }
        if !(m.r > 1.0) {
            return Err(Error::param("map.r", "must exceed the unit disk radius"));
        }
        if !(m.blend > 0.0 && m.r - m.blend >= 1.0) {
            return Err(Error::param(
                "map.blend",
                "must be positive with r − blend ≥ 1",
            ));
        }
        if !(m.s >= 2.0 * m.r) {
            return Err(Error::param("map.s", "must be at least 2r"));
        }
        if !(m.tol > 0.0) || m.max_iter == 0 {
            return Err(Error::param(
                "map.tol",
                "tolerance and iteration limit must be positive",
            ));
        }
        self.reconstruction.validate()?;
        if self.reconstruction.trace_points < self.electrodes.count {
            return Err(Error::param(
                "reconstruction.trace_points",
                "must be at least electrodes.count",
            ));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::param("noise", "must be a non-negative number"));
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<ElectrodeLayout> {
        let e = &self.electrodes;
        place_electrodes(e.count, e.coverage, e.contact_impedance)
    }

    /// SHA-256 of the whole configuration except `output_dir`, so runs
    /// into different directories stay comparable.
    pub fn hash(&self) -> Result<String> {
        digest(&RunConfig {
            output_dir: PathBuf::new(),
            ..self.clone()
        })
    }

    /// Hash of the inputs that determine the simulated data.
    pub fn data_hash(&self) -> Result<String> {
        digest(&(
            &self.phantom,
            &self.mesh,
            &self.electrodes,
            self.noise,
            self.seed,
        ))
    }

    /// Hash of the inputs that determine the quasi-conformal map.
    pub fn map_hash(&self) -> Result<String> {
        let a0 = self.phantom.resolve()?.a0;
        digest(&(a0, &self.map))
    }
}
