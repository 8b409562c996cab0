use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use mcsc_core::experiments::config_hash;
use mcsc_core::SystemConfig;
use serde::{Deserialize, Serialize};

/// Everything needed to re-run one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    Solve {
        alpha: f64,
    },
    Feasibility {
        alpha_grid: Vec<f64>,
    },
    BlockageSweep {
        q_d_grid: Vec<f64>,
    },
    MisalignmentSweep {
        sigma_grid: Vec<f64>,
    },
    StrictHc {
        sigma_grid: Vec<f64>,
        alpha_min: f64,
        target: f64,
    },
    QueueSim {
        alpha_grid: Vec<f64>,
        scheme: mcsc_core::experiments::Scheme,
        slots: usize,
        reps: usize,
        /// Also write the per-slot trace of replication 0 at the first grid `α`.
        slot_trace: bool,
    },
    OracleCheck {
        n: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: SystemConfig,
    pub config_hash: String,
    #[serde(flatten)]
    pub experiment: Experiment,
    pub seed: u64,
    pub outputs: Vec<PathBuf>,
    /// Seconds since the Unix epoch at the start of the run.
    pub timestamp: u64,
    pub wall_time_s: f64,
    pub version: String,
}

impl RunManifest {
    pub fn new(config: &SystemConfig, experiment: Experiment, seed: u64, outputs: Vec<PathBuf>, wall_time_s: f64) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            config: config.clone(),
            config_hash: config_hash(config),
            experiment,
            seed,
            outputs,
            timestamp,
            wall_time_s,
            version: version(),
        }
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: Self = serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        if config_hash(&m.config) != m.config_hash {
            anyhow::bail!(mcsc_core::Error::Config(format!(
                "manifest {} config does not match its hash",
                path.display()
            )));
        }
        Ok(m)
    }
}

/// `<version>` or `<version>-<git describe>` when the build recorded one.
pub fn version() -> String {
    match option_env!("MCSC_GIT_DESCRIBE") {
        Some(d) if !d.is_empty() => format!("{}-{d}", env!("CARGO_PKG_VERSION")),
        _ => env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// `region.csv` → `region.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}
