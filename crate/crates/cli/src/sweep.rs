//! Parameter sweeps: the cartesian product of `--sweep` values, each repeated
//! over consecutive seeds, one independent simulation per worker.

use rayon::prelude::*;

use freshlink_core::sim::{self, MetricsReport, SimConfig};

use crate::config::{parse_sim_config, ConfigError};
use crate::CliError;

/// Expands the sweep into one config per run. Runs are ordered by sweep
/// value (first `--sweep` outermost), then by repeat.
pub fn expand(
    text: &str,
    sweeps: &[(String, Vec<String>)],
    repeat: u32,
) -> Result<Vec<SimConfig>, ConfigError> {
    if repeat == 0 {
        return Err(ConfigError::Invalid("repeat must be at least 1".into()));
    }
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in sweeps {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push((key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    let mut configs = Vec::new();
    for overrides in combos {
        let base = parse_sim_config(text, &overrides)?;
        for r in 0..repeat {
            configs.push(SimConfig { seed: base.seed + r as u64, ..base.clone() });
        }
    }
    Ok(configs)
}

/// Runs every config; the output order matches the input order.
pub fn run_all(configs: &[SimConfig]) -> Result<Vec<MetricsReport>, CliError> {
    configs
        .par_iter()
        .map(|c| sim::run(c).map_err(|e| CliError::Runtime(format!("seed {}: {e}", c.seed))))
        .collect()
}
