//! Settings from flags, environment and an optional TOML file, in that
//! order of precedence.

use std::path::Path;

use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lmax: Option<usize>,
    pub guard: Option<u64>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    pub lmax: Option<usize>,
    pub guard: Option<u64>,
    pub seed: u64,
}

fn env_parse<T: std::str::FromStr>(name: &str) -> Result<Option<T>, String> {
    match std::env::var(name) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("{name} is not a number: {v}")),
        Err(_) => Ok(None),
    }
}

pub fn resolve(
    flag_lmax: Option<usize>,
    flag_guard: Option<u64>,
    flag_seed: Option<u64>,
    file: &FileConfig,
) -> Result<Settings, String> {
    let lmax = flag_lmax.or(env_parse("NILKIT_LMAX")?).or(file.lmax);
    let guard = flag_guard.or(env_parse("NILKIT_GUARD")?).or(file.guard);
    let seed = flag_seed.or(env_parse("NILKIT_SEED")?).or(file.seed).unwrap_or(0);
    Ok(Settings { lmax, guard, seed })
}
