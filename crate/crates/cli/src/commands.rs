use std::path::{Path, PathBuf};

use ttedopa::chainmap::recurrence_coefficients;
use ttedopa::diagnostics::{estimate_chain_length, thermal_occupation, walk_profile, ChainLengthOptions};
use ttedopa::oracle::{dephasing_coherence, ed_evolve};
use ttedopa::spectral::thermalize;
use ttedopa::{ChainCoefficients, SpectralDensity};

use crate::config::{Preset, RunConfig};
use crate::error::CliError;
use crate::run::{output_path, resolve_chain};
use crate::table::{compare, Table};

/// `wscp`, `wscp-background`, or a path to a spectral-density JSON file.
pub fn load_density(spec: &str) -> Result<SpectralDensity, CliError> {
    match spec {
        "wscp" => Ok(SpectralDensity::wscp()),
        "wscp-background" => Ok(SpectralDensity::wscp_background()),
        path => {
            let p = Path::new(path);
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{path}: {e}")))
        }
    }
}

fn check_temperature(kelvin: f64) -> Result<(), CliError> {
    if kelvin.is_finite() && kelvin >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!("temperature: {kelvin} K is not >= 0")))
    }
}

/// Coefficients of `J` itself (`standard`) or of its thermalized extension.
pub fn coefficients(sd: &SpectralDensity, kelvin: f64, sites: usize, standard: bool) -> Result<ChainCoefficients, CliError> {
    check_temperature(kelvin)?;
    if sites == 0 {
        return Err(CliError::Validation("sites: must be >= 1".into()));
    }
    Ok(if standard {
        recurrence_coefficients(sd, sites)?
    } else {
        recurrence_coefficients(&thermalize(sd, kelvin)?, sites)?
    })
}

pub fn chain_coeffs(
    sd: &SpectralDensity,
    kelvin: f64,
    sites: usize,
    standard: bool,
    output: Option<&Path>,
    json: Option<&Path>,
) -> Result<(), CliError> {
    let c = coefficients(sd, kelvin, sites, standard)?;
    let mut table = Table::new(vec!["n".into(), "omega_n".into(), "kappa_n".into()]);
    for n in 0..c.len() {
        table.rows.push(vec![n as f64, c.omegas[n], c.kappas[n]]);
    }
    table.write(output)?;
    if let Some(p) = json {
        let text = serde_json::to_string_pretty(&c).expect("coefficients serialize");
        std::fs::write(p, text).map_err(|e| CliError::io(p, e))?;
    }
    Ok(())
}

/// Fock levels per mean occupation in the `required_dim` column.
pub const OCCUPATION_SAFETY: f64 = 4.0;

/// Thermal occupations of the standard (non-thermalized) chain.
pub fn occupation(sd: &SpectralDensity, kelvin: f64, sites: usize, output: Option<&Path>) -> Result<(), CliError> {
    let c = coefficients(sd, kelvin, sites, true)?;
    let profile = thermal_occupation(&c, kelvin, sites)?;
    let dims = profile.required_local_dims(OCCUPATION_SAFETY);
    let mut table = Table::new(vec!["n".into(), "occupation".into(), "required_dim".into()]);
    for (n, (&x, &d)) in profile.occupations.iter().zip(&dims).enumerate() {
        table.rows.push(vec![n as f64, x, d as f64]);
    }
    table.write(output)
}

pub struct ChainLengthArgs<'a> {
    pub density: &'a SpectralDensity,
    pub kelvin: f64,
    pub t_max: f64,
    pub threshold: f64,
    pub cap: usize,
    pub output: Option<&'a Path>,
    pub profile: Option<&'a Path>,
    pub profile_sites: Option<usize>,
    pub samples: usize,
}

pub fn chain_length(args: ChainLengthArgs) -> Result<usize, CliError> {
    check_temperature(args.kelvin)?;
    if !(args.t_max.is_finite() && args.t_max >= 0.0) {
        return Err(CliError::Validation(format!("t-max: {} is not >= 0", args.t_max)));
    }
    let sd = thermalize(args.density, args.kelvin)?;
    let opts = ChainLengthOptions {
        return_threshold: args.threshold,
        floor: 2,
        cap: args.cap,
    };
    let mut available = 128.min(2 * args.cap).max(4);
    let (n, c) = loop {
        let c = recurrence_coefficients(&sd, available)?;
        match estimate_chain_length(&c, args.t_max, opts) {
            Ok(n) => break (n, c),
            Err(ttedopa::Error::ChainLengthNotConverged { last_tested }) if last_tested < args.cap => {
                available *= 2;
            }
            Err(e) => return Err(e.into()),
        }
    };
    let mut table = Table::new(vec!["N_estimate".into()]);
    table.rows.push(vec![n as f64]);
    table.write(args.output)?;
    if let Some(p) = args.profile {
        let m = args.profile_sites.unwrap_or(n);
        let c = if c.len() < m { recurrence_coefficients(&sd, m)? } else { c };
        let samples = args.samples.max(2);
        let times: Vec<f64> = (0..samples)
            .map(|i| args.t_max * i as f64 / (samples - 1) as f64)
            .collect();
        let walk = walk_profile(&c, m, &times)?;
        let mut header = vec!["t_ps".to_string()];
        header.extend((0..m).map(|k| format!("p_{k}")));
        let mut table = Table::new(header);
        for (t, p) in walk.times.iter().zip(&walk.probabilities) {
            let mut row = vec![*t];
            row.extend(p);
            table.rows.push(row);
        }
        table.write(Some(p))?;
    }
    Ok(n)
}

pub fn dephasing_oracle(
    sd: &SpectralDensity,
    kelvin: f64,
    t_max: f64,
    dt: f64,
    output: Option<&Path>,
) -> Result<(), CliError> {
    check_temperature(kelvin)?;
    if !(dt > 0.0 && t_max >= 0.0) {
        return Err(CliError::Validation("dt must be > 0 and t-max >= 0".into()));
    }
    let steps = (t_max / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| dt * k as f64).collect();
    let curve = dephasing_coherence(sd, kelvin, &times)?;
    let mut table = Table::new(vec![
        "t_ps".into(),
        "coherence_0".into(),
        "gamma".into(),
        "gamma_error".into(),
    ]);
    for (i, &t) in times.iter().enumerate() {
        table.rows.push(vec![t, curve.theta[i], curve.gamma[i], curve.error[i]]);
    }
    table.write(output)
}

/// Exact diagonalization with the same configuration format as `simulate`.
pub fn ed_oracle(cfg: &RunConfig, base: &Path) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    if cfg.chain_length.is_none() {
        return Err(CliError::Validation(
            "chain_length: exact diagonalization needs an explicit length".into(),
        ));
    }
    let several = cfg.temperatures.len() > 1;
    let mut written = vec![];
    for &kelvin in &cfg.temperatures {
        let model = cfg.model_at(kelvin);
        let chain = resolve_chain(cfg, &model)?;
        let series = ed_evolve(&model, &chain.coefficients, &chain.local_dims, &cfg.evolution)?;
        let path = output_path(base, kelvin, several);
        Table::from_series(&series).write(Some(&path))?;
        written.push(path);
    }
    Ok(written)
}

pub fn compare_files(a: &Path, b: &Path, column: &str) -> Result<f64, CliError> {
    let d = compare(&Table::read(a)?, &Table::read(b)?, column)?;
    println!("column,max_abs_diff,t_ps");
    println!("{column},{:.16e},{:.16e}", d.max_abs, d.at_time);
    Ok(d.max_abs)
}

/// Configuration from `--config`, else the preset's defaults.
pub fn load_config(config: Option<&Path>, preset: Option<Preset>) -> Result<RunConfig, CliError> {
    match (config, preset) {
        (Some(p), _) => {
            let mut cfg = RunConfig::from_file(p)?;
            if let Some(pr) = preset {
                cfg.preset = pr;
            }
            Ok(cfg)
        }
        (None, Some(pr)) => RunConfig::preset(pr),
        (None, None) => Err(CliError::Validation("give --config or --preset".into())),
    }
}
