//! `simulate`: one evolution per temperature, each leaving a CSV and a
//! manifest that can be fed back to `--config`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};
use ttedopa::chainmap::{assemble_chain, recurrence_coefficients};
use ttedopa::diagnostics::{estimate_chain_length, local_dimension_schedule, ChainLengthOptions};
use ttedopa::spectral::thermalize;
use ttedopa::tebd::{init_vacuum, tebd_evolve};
use ttedopa::{ChainCoefficients, ModelSpec, TimeSeries};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::error::CliError;
use crate::table::Table;

/// Chain data resolved for one model.
#[derive(Debug, Clone)]
pub struct ResolvedChain {
    pub coefficients: Vec<ChainCoefficients>,
    pub local_dims: Vec<usize>,
}

impl ResolvedChain {
    pub fn len(&self) -> usize {
        self.local_dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local_dims.is_empty()
    }
}

/// Thermalized coefficients of every bath, truncated to the configured or
/// estimated chain length, and the local dimensions.
pub fn resolve_chain(cfg: &RunConfig, model: &ModelSpec) -> Result<ResolvedChain, CliError> {
    let mut coefficients = Vec::with_capacity(model.baths.len());
    let mut thermal = Vec::with_capacity(model.baths.len());
    let mut length = cfg.chain_length.unwrap_or(1);
    for bath in &model.baths {
        let sd = thermalize(&bath.density, bath.temperature)?;
        thermal.push(sd.clone());
        let c = match cfg.chain_length {
            Some(n) => recurrence_coefficients(&sd, n)?,
            None => {
                let opts = ChainLengthOptions {
                    return_threshold: cfg.return_threshold,
                    floor: 2,
                    cap: cfg.chain_length_cap,
                };
                let mut available = 128.min(2 * cfg.chain_length_cap).max(4);
                loop {
                    let c = recurrence_coefficients(&sd, available)?;
                    match estimate_chain_length(&c, cfg.evolution.t_max, opts) {
                        Ok(n) => {
                            length = length.max(n);
                            info!("bath at {} K: estimated chain length {n}", bath.temperature);
                            break c.truncated(n)?;
                        }
                        Err(ttedopa::Error::ChainLengthNotConverged { last_tested })
                            if last_tested < cfg.chain_length_cap =>
                        {
                            available *= 2;
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        };
        coefficients.push(c);
    }
    // Recomputed at the final length so an explicit-length rerun gives the
    // same numbers; the longest estimate wins when baths differ.
    let coefficients = if cfg.chain_length.is_some() {
        coefficients
    } else {
        thermal
            .iter()
            .map(|sd| recurrence_coefficients(sd, length))
            .collect::<Result<Vec<_>, _>>()?
    };
    let local_dims = match &cfg.local_dims {
        Some(d) => {
            if d.len() != length {
                return Err(CliError::Validation(format!(
                    "local_dims: {} entries for a chain of {length}",
                    d.len()
                )));
            }
            d.clone()
        }
        None => local_dimension_schedule(cfg.d_max, length)?,
    };
    Ok(ResolvedChain {
        coefficients,
        local_dims,
    })
}

/// Hex SHA-256 of the little-endian bytes of `ω_0…ω_{N-1}, κ_0…κ_{N-1}`.
pub fn coefficient_checksum(c: &ChainCoefficients) -> String {
    let mut h = Sha256::new();
    for x in c.omegas.iter().chain(&c.kappas) {
        h.update(x.to_le_bytes());
    }
    hex::encode(h.finalize())
}

pub fn file_checksum(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Serialize)]
struct CoefficientRecord<'a> {
    bath: usize,
    sha256: String,
    omegas: &'a [f64],
    kappas: &'a [f64],
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    kind: &'static str,
    tool: serde_json::Value,
    status: &'static str,
    error: Option<serde_json::Value>,
    temperature: f64,
    config: RunConfig,
    cross_coupling: f64,
    chain_length: Option<usize>,
    coefficients: Vec<CoefficientRecord<'a>>,
    final_discarded_weight: Option<f64>,
    max_bond_dim: Option<usize>,
    warnings: Vec<String>,
    output: Option<serde_json::Value>,
    wall_time_s: f64,
}

/// Output path of the run at `kelvin`: the base path itself for a single
/// temperature, `<stem>_T<kelvin>K.<ext>` otherwise.
pub fn output_path(base: &Path, kelvin: f64, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_T{kelvin}K.{ext}"))
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Runs every temperature; failures are recorded in that temperature's
/// manifest and the first one is returned after all runs finished.
pub fn simulate(cfg: &RunConfig, base: &Path) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    let several = cfg.temperatures.len() > 1;
    let mut first_error = None;
    let mut written = Vec::new();
    for &kelvin in &cfg.temperatures {
        let csv = output_path(base, kelvin, several);
        let start = Instant::now();
        let model = cfg.model_at(kelvin);
        let outcome = run_one(cfg, &model);
        let mut resolved_cfg = cfg.clone();
        resolved_cfg.temperatures = vec![kelvin];
        resolved_cfg.output = Some(csv.clone());
        let mut manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            kind: "run-manifest",
            tool: serde_json::json!({ "name": "ttedopa", "version": env!("CARGO_PKG_VERSION") }),
            status: "ok",
            error: None,
            temperature: kelvin,
            config: resolved_cfg,
            cross_coupling: model.cross_coupling,
            chain_length: None,
            coefficients: vec![],
            final_discarded_weight: None,
            max_bond_dim: None,
            warnings: vec![],
            output: None,
            wall_time_s: 0.0,
        };
        match &outcome {
            Ok((chain, series)) => {
                Table::from_series(series).write(Some(&csv))?;
                manifest.config.chain_length = Some(chain.len());
                manifest.config.auto_chain_length = false;
                manifest.config.local_dims = Some(chain.local_dims.clone());
                manifest.chain_length = Some(chain.len());
                manifest.coefficients = chain
                    .coefficients
                    .iter()
                    .enumerate()
                    .map(|(bath, c)| CoefficientRecord {
                        bath,
                        sha256: coefficient_checksum(c),
                        omegas: &c.omegas,
                        kappas: &c.kappas,
                    })
                    .collect();
                manifest.final_discarded_weight = series.discarded_weight.last().copied();
                manifest.max_bond_dim = series.max_bond_dim.iter().copied().max();
                manifest.warnings = series.warnings.clone();
                manifest.output = Some(serde_json::json!({
                    "path": csv.display().to_string(),
                    "sha256": file_checksum(&csv)?,
                }));
                written.push(csv.clone());
                info!("{} K done in {:.1} s -> {}", kelvin, start.elapsed().as_secs_f64(), csv.display());
            }
            Err(e) => {
                warn!("{} K failed: {e}", kelvin);
                manifest.status = "error";
                manifest.error = Some(e.record());
            }
        }
        manifest.wall_time_s = start.elapsed().as_secs_f64();
        let mpath = manifest_path(&csv);
        if let Some(dir) = mpath.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(&mpath, text).map_err(|e| CliError::io(&mpath, e))?;
        if let Err(e) = outcome {
            first_error.get_or_insert(e);
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(written),
    }
}

fn run_one(cfg: &RunConfig, model: &ModelSpec) -> Result<(ResolvedChain, TimeSeries), CliError> {
    model.validate()?;
    let chain = resolve_chain(cfg, model)?;
    let ham = assemble_chain(&chain.coefficients, model, &chain.local_dims)?;
    let mut state = init_vacuum(model, &ham)?;
    let series = tebd_evolve(&mut state, &ham, &cfg.evolution)?;
    Ok((chain, series))
}
