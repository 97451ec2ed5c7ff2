use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use memcool::{EnergySpectrum, MemoryConfig};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "memcool", version, about = "Cooling with memory-carrying collision models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Asymptotic bound, coldest reachable states and attainability.
    Bound {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Print the JSON summary instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run a protocol and write its trace as CSV.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Stepwise)]
        mode: ModeArg,
        #[arg(long, default_value_t = 300)]
        steps: usize,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append the full SL distribution as columns sl_0, sl_1, ...
        #[arg(long)]
        dump_sl: bool,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Final ground population of every (k, l) with k <= k-max at every
    /// budget it can spend exactly.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 1)]
        budget_min: usize,
        #[arg(long)]
        budget_max: usize,
        #[arg(long, default_value_t = 7)]
        k_max: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Stepwise)]
        mode: ModeArg,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks whether the fixed-permutation dynamics on S composes.
    Witness {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Stepwise,
    Global,
    GlobalFinal,
    Nonadaptive,
}

impl ModeArg {
    pub fn engine_mode(self) -> Option<memcool::engine::Mode> {
        use memcool::engine::Mode;
        match self {
            ModeArg::Stepwise => Some(Mode::Stepwise),
            ModeArg::Global => Some(Mode::Global),
            ModeArg::GlobalFinal => Some(Mode::GlobalWithFinalSort),
            ModeArg::Nonadaptive => None,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// key = value file supplying any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target dimension.
    #[arg(long)]
    pub ds: Option<usize>,
    /// Machine dimension.
    #[arg(long)]
    pub dm: Option<usize>,
    /// Machines per collision.
    #[arg(long)]
    pub k: Option<usize>,
    /// Memory carriers among them.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Comma-separated target levels; defaults to 0,1,...,ds-1.
    #[arg(long, value_delimiter = ',')]
    pub system_levels: Option<Vec<f64>>,
    /// Comma-separated machine levels.
    #[arg(long, value_delimiter = ',')]
    pub machine_levels: Option<Vec<f64>>,
    /// Qubit machine with levels 0,g.
    #[arg(long, conflicts_with = "machine_levels")]
    pub machine_gap: Option<f64>,
}

/// Resolved scenario: spectra and temperature, plus `(k, l)` if given.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub system: EnergySpectrum,
    pub machine: EnergySpectrum,
    pub beta: f64,
    pub k: Option<usize>,
    pub l: Option<usize>,
}

impl Scenario {
    pub fn config(&self) -> Result<MemoryConfig, CliError> {
        let k = self.k.ok_or_else(|| CliError::Usage("missing required flag --k".into()))?;
        let l = self.l.ok_or_else(|| CliError::Usage("missing required flag --l".into()))?;
        self.config_with(k, l)
    }

    pub fn config_with(&self, k: usize, l: usize) -> Result<MemoryConfig, CliError> {
        MemoryConfig::new(self.system.clone(), self.machine.clone(), k, l, self.beta)
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

impl ScenarioArgs {
    /// Fills unset flags from the config file, then validates.
    pub fn resolve(mut self) -> Result<Scenario, CliError> {
        if let Some(path) = self.config.take() {
            let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            self.fill_from(&parse_config_file(&text)?)?;
        }

        let beta = self.beta.ok_or_else(|| CliError::Usage("missing required flag --beta".into()))?;

        let machine_levels = match (self.machine_levels, self.machine_gap) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "--machine-levels and --machine-gap are mutually exclusive".into(),
                ))
            }
            (Some(v), None) => v,
            (None, Some(g)) => vec![0.0, g],
            (None, None) => {
                return Err(CliError::Usage(
                    "missing required flag --machine-levels or --machine-gap".into(),
                ))
            }
        };
        check_dim("--dm", self.dm, machine_levels.len())?;

        let system_levels = match (self.system_levels, self.ds) {
            (Some(v), ds) => {
                check_dim("--ds", ds, v.len())?;
                v
            }
            (None, Some(ds)) => (0..ds).map(|i| i as f64).collect(),
            (None, None) => {
                return Err(CliError::Usage(
                    "missing required flag --ds or --system-levels".into(),
                ))
            }
        };

        let spectrum = |levels: Vec<f64>, what: &str| {
            EnergySpectrum::new(levels).map_err(|e| CliError::Usage(format!("{what}: {e}")))
        };
        Ok(Scenario {
            system: spectrum(system_levels, "system levels")?,
            machine: spectrum(machine_levels, "machine levels")?,
            beta,
            k: self.k,
            l: self.l,
        })
    }

    fn fill_from(&mut self, file: &BTreeMap<String, String>) -> Result<(), CliError> {
        for (key, value) in file {
            let bad = |e: String| CliError::Usage(format!("config key {key}: {e}"));
            match key.as_str() {
                "ds" => fill(&mut self.ds, || parse_num(value).map_err(bad))?,
                "dm" => fill(&mut self.dm, || parse_num(value).map_err(bad))?,
                "k" => fill(&mut self.k, || parse_num(value).map_err(bad))?,
                "l" => fill(&mut self.l, || parse_num(value).map_err(bad))?,
                "beta" => fill(&mut self.beta, || parse_num(value).map_err(bad))?,
                "system-levels" => fill(&mut self.system_levels, || parse_list(value).map_err(bad))?,
                "machine-levels" => {
                    if self.machine_gap.is_none() {
                        fill(&mut self.machine_levels, || parse_list(value).map_err(bad))?
                    }
                }
                "machine-gap" => {
                    if self.machine_levels.is_none() {
                        fill(&mut self.machine_gap, || parse_num(value).map_err(bad))?
                    }
                }
                _ => return Err(CliError::Usage(format!("unknown config key {key}"))),
            }
        }
        Ok(())
    }
}

fn fill<T>(slot: &mut Option<T>, parse: impl FnOnce() -> Result<T, CliError>) -> Result<(), CliError> {
    if slot.is_none() {
        *slot = Some(parse()?);
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| format!("cannot parse {s:?}: {e}"))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| parse_num(x.trim())).collect()
}

fn check_dim(flag: &str, given: Option<usize>, actual: usize) -> Result<(), CliError> {
    match given {
        Some(d) if d != actual => Err(CliError::Usage(format!(
            "{flag} {d} disagrees with the {actual} levels given"
        ))),
        _ => Ok(()),
    }
}

/// `key = value` per line; `#` starts a comment. Keys use the long flag
/// names without dashes in front, e.g. `machine-levels = 0,0.5,1.2`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key = value", i + 1)));
        };
        let key = key.trim().replace('_', "-");
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key {key}", i + 1)));
        }
    }
    Ok(out)
}
