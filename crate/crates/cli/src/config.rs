//! Command-line and JSON-file configuration.
//!
//! Every setting can come from `--config <file.json>` or from a flag; flags
//! win. The file is a flat JSON object whose keys are the long flag names
//! with `-` replaced by `_`, plus `dist` given as a weight-law object:
//!
//! | family               | `--dist` flag          | `dist` object                                              |
//! |----------------------|------------------------|------------------------------------------------------------|
//! | exponential          | `exponential:<rate>`   | `{"family": "exponential", "rate": 1.0}`                  |
//! | gaussian             | `gaussian:<mean>,<sd>` | `{"family": "gaussian", "mean": 0.0, "stddev": 1.0}`       |
//! | bernoulli            | `bernoulli:<q>`        | `{"family": "bernoulli", "q": 0.5}`                        |
//! | geometric on {0,1,…} | `geometric:<q>`        | `{"family": "geometric", "q": 0.5}`  (`P(k) = (1−q)qᵏ`)    |
//! | uniform              | `uniform:<lo>,<hi>`    | `{"family": "uniform_continuous", "lo": 0.0, "hi": 1.0}`   |

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lpp_core::{Family, WeightDistribution};
use serde::{Deserialize, Serialize};

/// A configuration problem; the CLI exits with status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

pub fn config_err<T>(msg: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Parses `family:params`, e.g. `exponential:1` or `gaussian:0,1`.
pub fn parse_dist(s: &str) -> ConfigResult<WeightDistribution> {
    let (family, params) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> = if params.trim().is_empty() {
        Vec::new()
    } else {
        params
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                ConfigError(format!(
                    "invalid value for `dist`: cannot parse parameters in {s:?}"
                ))
            })?
    };
    let want = |n: usize| -> ConfigResult<()> {
        if nums.len() == n {
            Ok(())
        } else {
            config_err(format!(
                "invalid value for `dist`: family {family:?} takes {n} parameter(s), got {}",
                nums.len()
            ))
        }
    };
    let fam = match family.trim() {
        "exponential" => {
            want(1)?;
            Family::Exponential { rate: nums[0] }
        }
        "gaussian" => {
            want(2)?;
            Family::Gaussian {
                mean: nums[0],
                stddev: nums[1],
            }
        }
        "bernoulli" => {
            want(1)?;
            Family::Bernoulli { q: nums[0] }
        }
        "geometric" => {
            want(1)?;
            Family::Geometric { q: nums[0] }
        }
        "uniform" | "uniform_continuous" => {
            want(2)?;
            Family::UniformContinuous {
                lo: nums[0],
                hi: nums[1],
            }
        }
        other => {
            return config_err(format!(
                "invalid value for `dist`: unknown family {other:?}"
            ))
        }
    };
    WeightDistribution::new(fam).map_err(|e| ConfigError(format!("invalid value for `dist`: {e}")))
}

pub fn parse_f64_list(field: &str, s: &str) -> ConfigResult<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| {
            ConfigError(format!(
                "invalid value for `{field}`: expected comma-separated numbers, got {s:?}"
            ))
        })
}

pub fn parse_u64_list(field: &str, s: &str) -> ConfigResult<Vec<u64>> {
    s.split(',')
        .map(|v| v.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| {
            ConfigError(format!(
                "invalid value for `{field}`: expected comma-separated non-negative integers, got {s:?}"
            ))
        })
}

/// `1,0;3,1;1,1` → three directions.
pub fn parse_direction_list(field: &str, s: &str) -> ConfigResult<Vec<Vec<f64>>> {
    s.split(';').map(|d| parse_f64_list(field, d)).collect()
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Weight law, `family:params` (e.g. `exponential:1`, `gaussian:0,1`)
    #[arg(long)]
    pub dist: Option<String>,
    /// Master seed for every random stream
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; output does not depend on this
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON configuration file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file. All keys optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dist: Option<WeightDistribution>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub direction: Option<Vec<f64>>,
    pub directions: Option<Vec<Vec<f64>>>,
    pub d: Option<usize>,
    pub resolution: Option<usize>,
    pub entropy_bits: Option<bool>,
    pub n_schedule: Option<Vec<u64>>,
    pub n: Option<u64>,
    pub replicates: Option<usize>,
    pub p: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub l_schedule: Option<Vec<u64>>,
    pub max_denominator: Option<u64>,
    pub cell_cap: Option<u128>,
    pub dump_field: Option<PathBuf>,
    pub z: Option<Vec<usize>>,
    pub list: Option<bool>,
    pub cap: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError(format!(
                "invalid value for `config`: cannot read {}: {e}",
                path.display()
            ))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            ConfigError(format!(
                "invalid value for `config`: {}: {e}",
                path.display()
            ))
        })
    }
}

/// Settings common to all commands after merging file and flags.
#[derive(Debug, Clone)]
pub struct Common {
    pub dist: Option<WeightDistribution>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Common {
    pub fn merge(args: &CommonArgs, file: &ConfigFile) -> ConfigResult<Self> {
        let dist = match &args.dist {
            Some(s) => Some(parse_dist(s)?),
            None => file.dist,
        };
        if args.threads.or(file.threads) == Some(0) {
            return config_err("invalid value for `threads`: must be ≥ 1");
        }
        Ok(Self {
            dist,
            seed: args.seed.or(file.seed),
            out: args.out.clone().or_else(|| file.out.clone()),
            format: args.format.or(file.format).unwrap_or_default(),
        })
    }

    pub fn require_dist(&self) -> ConfigResult<WeightDistribution> {
        self.dist.ok_or_else(|| {
            ConfigError("missing `dist`: pass --dist family:params or set it in --config".into())
        })
    }

    pub fn require_seed(&self) -> ConfigResult<u64> {
        self.seed.ok_or_else(|| {
            ConfigError("missing `seed`: stochastic commands need an explicit --seed".into())
        })
    }
}

pub fn load_file(args: &CommonArgs) -> ConfigResult<ConfigFile> {
    match &args.config {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

/// Picks a flag value over the file value, parsing the flag string.
pub fn pick<T: Clone>(
    flag: Option<&str>,
    file: &Option<T>,
    parse: impl FnOnce(&str) -> ConfigResult<T>,
) -> ConfigResult<Option<T>> {
    match flag {
        Some(s) => parse(s).map(Some),
        None => Ok(file.clone()),
    }
}

pub fn check_direction(field: &str, x: &[f64]) -> ConfigResult<()> {
    if x.is_empty() {
        return config_err(format!(
            "invalid value for `{field}`: needs at least one entry"
        ));
    }
    if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return config_err(format!(
            "invalid value for `{field}`: entries must be finite and non-negative"
        ));
    }
    if x.iter().all(|&v| v == 0.0) {
        return config_err(format!("{field} must be nonzero"));
    }
    Ok(())
}
