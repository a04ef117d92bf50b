//! Config file loading: a TOML file with one section per concern, overridden
//! by `--set section.key=value` pairs from the command line. The effective
//! (merged) table is what run manifests echo.

use dfrelay::{
    ChannelParams, Labeling, LabelingProfile, RelayMode, Scheme, SignalSet, SimConfig, TieRule,
};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// CLI failure taxonomy; the process exit code depends on it.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration: unreadable file, parse error, missing key,
    /// inconsistent options. Exit code 1.
    Config(String),
    /// Valid configuration but the run cannot proceed (precondition or data
    /// failures at runtime). Exit code 2.
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn config_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

pub fn runtime_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub run: RunSection,
    pub constellation: ConstellationSection,
    pub labeling: LabelingSection,
    #[serde(default)]
    pub channel: Option<ChannelSection>,
    #[serde(default)]
    pub sim: Option<SimSection>,
    #[serde(default)]
    pub pep: Option<PepSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub scheme: Scheme,
    #[serde(default)]
    pub relay_mode: Option<RelayMode>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSection {
    /// M-PSK cardinality.
    #[serde(default)]
    pub m: Option<usize>,
    /// Custom constellation table (index, bits, real, imag rows); overrides `m`.
    #[serde(default)]
    pub points_file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelingSection {
    /// Where the profile comes from: "identity", "greedy" or "file".
    pub source: String,
    /// Link-variance ratio used by the reported metrics.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub tie_rule_xr: Option<String>,
    #[serde(default)]
    pub tie_rule_xs2: Option<String>,
    #[serde(default)]
    pub tie_preference_xr: Option<Vec<usize>>,
    #[serde(default)]
    pub tie_preference_xs2: Option<Vec<usize>>,
    #[serde(default)]
    pub tie_seed_xr: Option<u64>,
    #[serde(default)]
    pub tie_seed_xs2: Option<u64>,
    /// Profile table path for `source = "file"`.
    #[serde(default)]
    pub profile_file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub sigma_ds_db: f64,
    pub sigma_rs_db: f64,
    pub sigma_dr_db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub es_grid_db: Vec<f64>,
    pub trials_per_point: u64,
    #[serde(default)]
    pub target_errors: Option<u64>,
    pub master_seed: u64,
    pub workers: usize,
    #[serde(default)]
    pub zero_noise: bool,
    #[serde(default)]
    pub relay_phase_rad: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PepSection {
    pub es_grid_db: Vec<f64>,
}

/// The parsed config plus the merged TOML table it came from (for manifests).
pub struct LoadedConfig {
    pub config: FileConfig,
    pub effective: toml::Table,
}

/// Reads a config file and applies `--set section.key=value` overrides.
pub fn load_config(path: &Path, overrides: &[String]) -> CliResult<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table = text.parse().map_err(config_err)?;
    for entry in overrides {
        apply_override(&mut table, entry)?;
    }
    let config: FileConfig = table.clone().try_into().map_err(config_err)?;
    Ok(LoadedConfig {
        config,
        effective: table,
    })
}

fn apply_override(table: &mut toml::Table, entry: &str) -> CliResult<()> {
    let (path, raw) = entry.split_once('=').ok_or_else(|| {
        CliError::Config(format!("override '{entry}' must look like section.key=value"))
    })?;
    let value: toml::Value = format!("v = {raw}")
        .parse::<toml::Table>()
        .map(|t| t["v"].clone())
        .or_else(|_| format!("v = {raw:?}").parse::<toml::Table>().map(|t| t["v"].clone()))
        .map_err(|e| CliError::Config(format!("override '{entry}': {e}")))?;
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().ok_or_else(|| {
        CliError::Config(format!("override '{entry}' is missing a key path"))
    })?;
    let mut node = table;
    for k in keys {
        node = node
            .entry(k)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                CliError::Config(format!("override '{entry}': '{k}' is not a section"))
            })?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

impl FileConfig {
    pub fn signal_set(&self) -> CliResult<SignalSet> {
        if let Some(path) = &self.constellation.points_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            return SignalSet::import_table(&text).map_err(config_err);
        }
        let m = self.constellation.m.ok_or_else(|| {
            CliError::Config("constellation needs either 'm' or 'points_file'".into())
        })?;
        SignalSet::mpsk(m).map_err(config_err)
    }

    pub fn alpha(&self) -> CliResult<f64> {
        self.labeling
            .alpha
            .ok_or_else(|| CliError::Config("labeling.alpha is required for metric reports".into()))
    }

    fn tie_rule(
        name: Option<&str>,
        preference: Option<&Vec<usize>>,
        seed: Option<u64>,
    ) -> CliResult<TieRule> {
        match name.unwrap_or("lowest") {
            "lowest" => Ok(TieRule::Lowest),
            "preference" => {
                let p = preference.ok_or_else(|| {
                    CliError::Config("tie rule 'preference' needs a tie_preference_* list".into())
                })?;
                Ok(TieRule::Preference(p.clone()))
            }
            "seeded" => {
                let s = seed.ok_or_else(|| {
                    CliError::Config("tie rule 'seeded' needs a tie_seed_* value".into())
                })?;
                Ok(TieRule::Seeded(s))
            }
            other => Err(CliError::Config(format!(
                "unknown tie rule '{other}' (expected lowest, preference or seeded)"
            ))),
        }
    }

    pub fn tie_rule_xr(&self) -> CliResult<TieRule> {
        Self::tie_rule(
            self.labeling.tie_rule_xr.as_deref(),
            self.labeling.tie_preference_xr.as_ref(),
            self.labeling.tie_seed_xr,
        )
    }

    pub fn tie_rule_xs2(&self) -> CliResult<TieRule> {
        Self::tie_rule(
            self.labeling.tie_rule_xs2.as_deref(),
            self.labeling.tie_preference_xs2.as_ref(),
            self.labeling.tie_seed_xs2,
        )
    }

    /// Resolves the labelling profile from the configured source.
    pub fn profile(&self, set: &SignalSet) -> CliResult<LabelingProfile> {
        let scheme = self.run.scheme;
        match self.labeling.source.as_str() {
            "identity" => Ok(LabelingProfile::identity(scheme, set.size())),
            "greedy" => {
                let out = dfrelay::search::construct_profile(
                    set,
                    scheme,
                    None::<Labeling>,
                    &self.tie_rule_xr()?,
                    &self.tie_rule_xs2()?,
                )
                .map_err(runtime_err)?;
                Ok(out.profile)
            }
            "file" => {
                let path = self.labeling.profile_file.as_ref().ok_or_else(|| {
                    CliError::Config("labeling.source = \"file\" needs profile_file".into())
                })?;
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                LabelingProfile::import_table(scheme, &text).map_err(config_err)
            }
            other => Err(CliError::Config(format!(
                "unknown labeling source '{other}' (expected identity, greedy or file)"
            ))),
        }
    }

    pub fn channel_params(&self, es_db: f64) -> CliResult<ChannelParams> {
        let ch = self
            .channel
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [channel] section".into()))?;
        ChannelParams::new(ch.sigma_ds_db, ch.sigma_rs_db, ch.sigma_dr_db, es_db)
            .map_err(config_err)
    }

    /// Assembles the full sweep description for `simulate`.
    pub fn sim_config(&self) -> CliResult<SimConfig> {
        let sim = self
            .sim
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [sim] section".into()))?;
        let set = self.signal_set()?;
        let profile = self.profile(&set)?;
        let first_es = *sim
            .es_grid_db
            .first()
            .ok_or_else(|| CliError::Config("sim.es_grid_db must not be empty".into()))?;
        let params = self.channel_params(first_es)?;
        let relay_mode = self
            .run
            .relay_mode
            .ok_or_else(|| CliError::Config("run.relay_mode is required for simulate".into()))?;
        let config = SimConfig {
            set,
            profile,
            params,
            es_grid_db: sim.es_grid_db.clone(),
            trials_per_point: sim.trials_per_point,
            target_errors: sim.target_errors,
            master_seed: sim.master_seed,
            workers: sim.workers,
            relay_mode,
            zero_noise: sim.zero_noise,
            relay_phase_rad: sim.relay_phase_rad,
        };
        config.validate().map_err(config_err)?;
        Ok(config)
    }
}
