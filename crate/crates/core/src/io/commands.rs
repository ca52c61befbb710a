//! The four pipeline commands and their file formats.

use std::f64::consts::TAU;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{
    dn_matrix, simulate_voltages, trig_current_patterns, DnMatrix, NoiseSpec, VoltageData,
};
use crate::geometry::{build_disk_mesh, ConductivityField, Mesh};
use crate::io::config::{with_path, RunConfig};
use crate::qc::{extend_mu, solve_beltrami, QcMap, QcMapInfo};
use crate::recon::{cross_section_metrics, reconstruct, FhatGrid, ReconstructedField};

/// Largest accepted `max|Im ã| / max|Re ã|`.
pub const MAX_IMAG_RESIDUAL: f64 = 1e-6;

/// Hashes embedded in every output file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub data_hash: String,
    pub map_hash: String,
}

impl Provenance {
    fn new(command: &str, config: &RunConfig) -> Result<Provenance> {
        Ok(Provenance {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config.hash()?,
            data_hash: config.data_hash()?,
            map_hash: config.map_hash()?,
        })
    }
}

/// A JSON output file: provenance plus payload.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Record<T> {
    pub provenance: Provenance,
    pub data: T,
}

fn check(label: &str, expected: &str, found: &str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Provenance {
            expected: format!("{label} hash {expected}"),
            found: found.into(),
        })
    }
}

fn write_json<T: Serialize>(path: &Path, provenance: &Provenance, data: &T) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(
        &mut w,
        &Record {
            provenance: provenance.clone(),
            data,
        },
    )?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_record<T: DeserializeOwned>(path: &Path) -> Result<Record<T>> {
    let text = fs::read_to_string(path).map_err(|e| with_path(e, path))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "# config_hash={}",
        header.split('|').nth(1).unwrap_or("")
    )?;
    writeln!(w, "{}", header.split('|').next().unwrap_or(""))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn output_dir(config: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(&config.output_dir).map_err(|e| with_path(e, &config.output_dir))?;
    Ok(config.output_dir.clone())
}

/// Tag distinguishing reconstructions at different truncation radii.
pub fn radius_tag(radius: f64) -> String {
    format!("R{radius:.2}")
}

fn simulate_dn(
    config: &RunConfig,
    mesh: &Mesh,
    field: &ConductivityField,
    noise: NoiseSpec,
) -> Result<(VoltageData, DnMatrix)> {
    let layout = config.layout()?;
    let patterns = trig_current_patterns(layout.len(), 1.0)?;
    let data = simulate_voltages(mesh, field, &layout, &patterns, noise)?;
    let dn = dn_matrix(&data)?;
    Ok((data, dn))
}

/// DN matrix of the homogeneous background `A₀` on the configured mesh.
pub fn reference_dn(config: &RunConfig) -> Result<DnMatrix> {
    let phantom = config.phantom.resolve()?;
    let mesh = build_disk_mesh(1.0, config.mesh.target_h, &config.layout()?)?;
    Ok(simulate_dn(
        config,
        &mesh,
        &ConductivityField::homogeneous(phantom.a0)?,
        NoiseSpec::default(),
    )?
    .1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulateOutput {
    pub mesh: PathBuf,
    pub voltages: PathBuf,
    pub dn: PathBuf,
    pub reference: PathBuf,
}

/// Simulates electrode data for the configured phantom.
pub fn cmd_simulate(config: &RunConfig) -> Result<SimulateOutput> {
    config.validate()?;
    let dir = output_dir(config)?;
    let prov = Provenance::new("simulate", config)?;
    let phantom = config.phantom.resolve()?;
    let mesh = build_disk_mesh(1.0, config.mesh.target_h, &config.layout()?)?;
    let noise = NoiseSpec {
        relative: config.noise,
        seed: config.seed,
    };
    let (data, dn) = simulate_dn(config, &mesh, &phantom.field()?, noise)?;
    let (_, reference) = simulate_dn(
        config,
        &mesh,
        &ConductivityField::homogeneous(phantom.a0)?,
        NoiseSpec::default(),
    )?;

    let out = SimulateOutput {
        mesh: dir.join("mesh.txt"),
        voltages: dir.join("voltages.json"),
        dn: dir.join("dn.json"),
        reference: dir.join("dn_reference.json"),
    };
    mesh.write_text(BufWriter::new(fs::File::create(&out.mesh)?))?;
    write_json(&out.voltages, &prov, &data)?;
    write_json(&out.dn, &prov, &dn)?;
    write_json(&out.reference, &prov, &reference)?;
    Ok(out)
}

/// Sidecar content of `map.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSummary {
    pub info: QcMapInfo,
    /// Shoelace area of the boundary image polygon.
    pub boundary_area: f64,
    pub boundary_points: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapOutput {
    pub grid: PathBuf,
    pub sidecar: PathBuf,
    pub boundary: PathBuf,
}

/// Boundary samples written to `boundary.csv`.
pub const BOUNDARY_POINTS: usize = 512;

/// Computes the quasi-conformal map for the configured `A₀`.
pub fn cmd_map(config: &RunConfig) -> Result<MapOutput> {
    config.validate()?;
    let dir = output_dir(config)?;
    let prov = Provenance::new("map", config)?;
    let a0 = config.phantom.resolve()?.a0;
    let m = &config.map;
    let mu = extend_mu(a0, m.r, m.blend, m.n, m.s)?;
    let map = solve_beltrami(&mu, m.scheme())?;

    let circle: Vec<[f64; 2]> = (0..BOUNDARY_POINTS)
        .map(|k| {
            let t = TAU * k as f64 / BOUNDARY_POINTS as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    let image = map.evaluate_many(&circle)?;
    let area = 0.5
        * (0..image.len())
            .map(|k| {
                let (p, q) = (image[k], image[(k + 1) % image.len()]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum::<f64>();

    let out = MapOutput {
        grid: dir.join("map.bin"),
        sidecar: dir.join("map.json"),
        boundary: dir.join("boundary.csv"),
    };
    let mut w = BufWriter::new(fs::File::create(&out.grid)?);
    map.write_binary(&mut w)?;
    w.flush()?;
    write_json(
        &out.sidecar,
        &prov,
        &MapSummary {
            info: map.info(),
            boundary_area: area,
            boundary_points: BOUNDARY_POINTS,
        },
    )?;
    write_csv(
        &out.boundary,
        &format!("theta,x,y,phi_x,phi_y|{}", prov.config_hash),
        circle.iter().zip(&image).enumerate().map(|(k, (x, y))| {
            vec![
                TAU * k as f64 / BOUNDARY_POINTS as f64,
                x[0],
                x[1],
                y[0],
                y[1],
            ]
        }),
    )?;
    Ok(out)
}

/// Loads `map.bin` with the sidecar `map.json` beside it.
pub fn load_map(grid: &Path) -> Result<(QcMap, Provenance)> {
    let sidecar = grid.with_extension("json");
    let record: Record<MapSummary> = read_record(&sidecar)?;
    let file = fs::File::open(grid).map_err(|e| with_path(e, grid))?;
    let map = QcMap::read_binary(file, &record.data.info)?;
    Ok((map, record.provenance))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructOutput {
    pub field: PathBuf,
    pub fhat: PathBuf,
    pub grid: PathBuf,
    pub tensor: PathBuf,
    pub cross_section: PathBuf,
}

/// Reconstructs `a(x) A₀` from a DN file and a map file.
///
/// Without `reference` the homogeneous-background DN matrix is simulated
/// from the configuration.
pub fn cmd_reconstruct(
    config: &RunConfig,
    dn_path: &Path,
    map_path: &Path,
    reference: Option<&Path>,
) -> Result<ReconstructOutput> {
    config.validate()?;
    let prov = Provenance::new("reconstruct", config)?;
    let dn: Record<DnMatrix> = read_record(dn_path)?;
    check("data", &prov.data_hash, &dn.provenance.data_hash)?;
    let (map, map_prov) = load_map(map_path)?;
    check("map", &prov.map_hash, &map_prov.map_hash)?;
    let reference = match reference {
        Some(p) => {
            let r: Record<DnMatrix> = read_record(p)?;
            check("data", &prov.data_hash, &r.provenance.data_hash)?;
            r.data
        }
        None => reference_dn(config)?,
    };
    let phantom = config.phantom.resolve()?;
    let (field, fhat) = reconstruct(
        &dn.data,
        Some(&reference),
        &map,
        phantom.a0,
        &config.reconstruction,
    )?;
    if !(field.imag_residual <= MAX_IMAG_RESIDUAL) {
        return Err(Error::ImaginaryResidual(field.imag_residual));
    }

    let dir = output_dir(config)?;
    let tag = radius_tag(config.reconstruction.radius);
    let out = ReconstructOutput {
        field: dir.join(format!("recon_{tag}.json")),
        fhat: dir.join(format!("fhat_{tag}.json")),
        grid: dir.join(format!("recon_{tag}.bin")),
        tensor: dir.join(format!("tensor_{tag}.csv")),
        cross_section: dir.join(format!("cross_section_{tag}.csv")),
    };
    write_json(&out.field, &prov, &field)?;
    write_json::<FhatGrid>(&out.fhat, &prov, &fhat)?;
    write_grid(&out.grid, &field)?;
    write_csv(
        &out.tensor,
        &format!("x,y,a,sigma_xx,sigma_xy,sigma_yy|{}", prov.config_hash),
        field.samples().map(|(x, a)| {
            let t = field.a0.scale(a);
            vec![x[0], x[1], a, t.xx, t.xy, t.yy]
        }),
    )?;
    write_csv(
        &out.cross_section,
        &format!("x,a,target|{}", prov.config_hash),
        field
            .cross_section()
            .into_iter()
            .map(|(x, a)| vec![x, a, phantom.target([x, 0.0])]),
    )?;
    Ok(out)
}

/// `recon_*.bin`: `n` as u64, then `n²` little-endian f64 values of `a` in
/// row-major order with NaN outside the disk.
fn write_grid(path: &Path, field: &ReconstructedField) -> Result<()> {
    let mut buf = Vec::with_capacity(8 + 8 * field.a.len());
    buf.extend_from_slice(&(field.n as u64).to_le_bytes());
    for v in &field.a {
        buf.extend_from_slice(&v.unwrap_or(f64::NAN).to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Metrics JSON payload.
pub use crate::recon::CrossSectionMetrics as Metrics;

/// Compares a reconstruction with the configured phantom.
pub fn cmd_evaluate(config: &RunConfig, recon_path: &Path) -> Result<(PathBuf, Metrics)> {
    config.validate()?;
    let prov = Provenance::new("evaluate", config)?;
    let record: Record<ReconstructedField> = read_record(recon_path)?;
    check("data", &prov.data_hash, &record.provenance.data_hash)?;
    let field = record.data;
    if field.n < 3 || field.a.len() != field.n * field.n || field.coords.len() != field.n {
        return Err(Error::Dimension(format!(
            "reconstruction grid is inconsistent: n = {}, {} values, {} coordinates",
            field.n,
            field.a.len(),
            field.coords.len()
        )));
    }
    let phantom = config.phantom.resolve()?;
    let metrics = cross_section_metrics(&field, |x| phantom.target(x));
    let dir = output_dir(config)?;
    let stem = recon_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("recon");
    let path = dir.join(format!(
        "metrics_{}.json",
        stem.trim_start_matches("recon_")
    ));
    write_json(&path, &prov, &metrics)?;
    Ok((path, metrics))
}
