//! Run settings: command-line flags override the optional TOML config file,
//! which overrides built-in defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use xnfsat_core::bench::Backend;
use xnfsat_core::crossbar::DeviceModel;
use xnfsat_core::energy::EnergyCoefficients;
use xnfsat_core::results::ResultsFormat;
use xnfsat_core::walksat::Init;

pub const DEFAULT_SIGMA: f64 = 2.5;
pub const DEFAULT_MAX_ITER: u64 = 1_000_000_000;
pub const DEFAULT_TRIALS: usize = 1000;

/// Keys accepted in the `--config` file. All optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub backend: Option<String>,
    pub sigma: Option<Vec<f64>>,
    pub max_iter: Option<u64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub device_seed: Option<u64>,
    pub jobs: Option<usize>,
    pub init: Option<String>,
    pub device_model: Option<PathBuf>,
    pub coeffs: Option<PathBuf>,
    pub format: Option<String>,
    pub min_successes: Option<usize>,
    pub resamples: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flags shared by the solving subcommands; `None` means "not given".
#[derive(Debug, Default, Clone, clap::Args)]
pub struct RunFlags {
    /// reference, crossbar-ideal or crossbar-nonideal
    #[arg(long)]
    pub backend: Option<String>,
    /// Noise level; repeat or comma-separate for a sweep (bench only)
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    #[arg(long)]
    pub max_iter: Option<u64>,
    /// Seed of the first trial; trial i uses seed + i
    #[arg(long, env = "XNFSAT_SEED")]
    pub seed: Option<u64>,
    /// Seed for conductance sampling of the non-ideal crossbar
    #[arg(long)]
    pub device_seed: Option<u64>,
    /// all-true or random
    #[arg(long)]
    pub init: Option<String>,
    /// Device model TOML (required by crossbar-nonideal)
    #[arg(long)]
    pub device_model: Option<PathBuf>,
    /// Energy coefficient TOML (defaults to the shipped calibration)
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub backend: Backend,
    pub sigmas: Vec<f64>,
    pub max_iter: u64,
    pub trials: usize,
    pub seed: u64,
    pub device_seed: u64,
    pub jobs: Option<usize>,
    pub init: Init,
    pub device: Option<DeviceModel<f64>>,
    pub device_path: Option<PathBuf>,
    pub coeffs: EnergyCoefficients<f64>,
    pub coeffs_path: Option<PathBuf>,
    pub format: ResultsFormat,
    pub min_successes: usize,
    pub resamples: usize,
}

/// Flags outside [`RunFlags`] that also have config-file counterparts.
#[derive(Debug, Default)]
pub struct Extra {
    pub trials: Option<usize>,
    pub jobs: Option<usize>,
    pub format: Option<String>,
    pub min_successes: Option<usize>,
    pub resamples: Option<usize>,
}

impl Settings {
    pub fn resolve(flags: &RunFlags, extra: Extra, file: &FileConfig) -> Result<Self> {
        let backend: Backend = flags
            .backend
            .clone()
            .or_else(|| file.backend.clone())
            .map(|s| s.parse())
            .transpose()
            .map_err(anyhow::Error::msg)?
            .unwrap_or_default();
        let sigmas = flags
            .sigma
            .clone()
            .or_else(|| file.sigma.clone())
            .unwrap_or_else(|| vec![DEFAULT_SIGMA]);
        if sigmas.is_empty() {
            bail!("empty sigma list");
        }
        let seed = flags.seed.or(file.seed).unwrap_or(0);
        let init: Init = flags
            .init
            .clone()
            .or_else(|| file.init.clone())
            .map(|s| s.parse())
            .transpose()
            .map_err(anyhow::Error::msg)?
            .unwrap_or_default();
        let device_path = flags
            .device_model
            .clone()
            .or_else(|| file.device_model.clone());
        let device = device_path
            .as_ref()
            .map(|p| {
                DeviceModel::from_file(p).with_context(|| format!("device model {}", p.display()))
            })
            .transpose()?;
        if backend == Backend::CrossbarNonideal && device.is_none() {
            bail!("backend crossbar-nonideal requires --device-model");
        }
        let coeffs_path = flags.coeffs.clone().or_else(|| file.coeffs.clone());
        let coeffs = match &coeffs_path {
            Some(p) => EnergyCoefficients::from_file(p)
                .with_context(|| format!("coefficient file {}", p.display()))?,
            None => EnergyCoefficients::calibrated(),
        };
        let format: ResultsFormat = extra
            .format
            .or_else(|| file.format.clone())
            .unwrap_or_else(|| "csv".into())
            .parse()?;
        Ok(Settings {
            backend,
            sigmas,
            max_iter: flags.max_iter.or(file.max_iter).unwrap_or(DEFAULT_MAX_ITER),
            trials: extra.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            seed,
            device_seed: flags.device_seed.or(file.device_seed).unwrap_or(seed),
            jobs: extra.jobs.or(file.jobs),
            init,
            device,
            device_path,
            coeffs,
            coeffs_path,
            format,
            min_successes: extra
                .min_successes
                .or(file.min_successes)
                .unwrap_or(xnfsat_core::metrics::DEFAULT_MIN_SUCCESSES),
            resamples: extra
                .resamples
                .or(file.resamples)
                .unwrap_or(xnfsat_core::metrics::DEFAULT_BOOTSTRAP_RESAMPLES),
        })
    }
}

impl fmt::Display for Settings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or("(built-in)".to_owned(), |p| p.display().to_string())
        };
        writeln!(f, "c backend       {}", self.backend)?;
        writeln!(f, "c sigma         {:?}", self.sigmas)?;
        writeln!(f, "c max_iter      {}", self.max_iter)?;
        writeln!(f, "c trials        {}", self.trials)?;
        writeln!(f, "c seed          {}", self.seed)?;
        writeln!(f, "c device_seed   {}", self.device_seed)?;
        writeln!(f, "c init          {:?}", self.init)?;
        writeln!(f, "c device_model  {}", path(&self.device_path))?;
        write!(f, "c coeffs        {}", path(&self.coeffs_path))
    }
}
