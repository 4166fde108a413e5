//! Experiment configuration.
//!
//! Line-oriented `key = value` pairs grouped under `[section]` headers.
//! Lines starting with `#` or `;` are comments. Every key is optional;
//! unknown sections or keys are rejected.
//!
//! ```text
//! [experiment]
//! seed = 20240601
//! output = results
//!
//! [table]
//! source = builtin            # or a path to a shape,green,red,gold CSV
//!
//! [experts]
//! models = oracle, noisy:1.0, conservative:0.6, learner:1.0
//! trials = 324
//! checkpoints = 81, 162, 243, 324
//!
//! [evaluate]
//! calculi = bayes, cf, ds
//! comparators = reversal, guessing, training
//! guessing = analytic         # or montecarlo
//! guessing_replications = 100000
//!
//! [curve]
//! sizes = 2, 3, 4, 5, 7, 10, 20, 40, 80
//! replications = 10000
//! prior = marginal            # or uniform
//! ```
//!
//! (Comments after values are shown for illustration only; put them on
//! their own lines in real files.)

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::blockworld::{ContingencyTable, PriorMode};
use crate::calculi::Calculus;
use crate::evaluation::{DEFAULT_BAG_SIZES, DEFAULT_REPLICATIONS};
use crate::experts::{ExpertSpec, DEFAULT_CHECKPOINTS};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableSource {
    Builtin,
    Csv(PathBuf),
}

impl TableSource {
    pub fn load(&self) -> Result<ContingencyTable, HarnessError> {
        match self {
            TableSource::Builtin => Ok(ContingencyTable::default_table()),
            TableSource::Csv(path) => {
                ContingencyTable::load(path).map_err(|e| HarnessError::Input(e.to_string()))
            }
        }
    }
}

impl fmt::Display for TableSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableSource::Builtin => f.write_str("builtin"),
            TableSource::Csv(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Comparator {
    Reversal,
    Guessing,
    /// Guess-until-correct performance of learners during training.
    Training,
}

impl Comparator {
    pub fn name(self) -> &'static str {
        match self {
            Comparator::Reversal => "reversal",
            Comparator::Guessing => "guessing",
            Comparator::Training => "training",
        }
    }
}

impl FromStr for Comparator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reversal" => Ok(Comparator::Reversal),
            "guessing" => Ok(Comparator::Guessing),
            "training" => Ok(Comparator::Training),
            other => Err(format!("unknown comparator `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuessingMethod {
    Analytic,
    MonteCarlo,
}

impl FromStr for GuessingMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" => Ok(GuessingMethod::Analytic),
            "montecarlo" | "monte-carlo" => Ok(GuessingMethod::MonteCarlo),
            other => Err(format!("unknown guessing method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub table: TableSource,
    pub experts: Vec<ExpertSpec>,
    pub trials: usize,
    pub checkpoints: Vec<usize>,
    pub calculi: Vec<Calculus>,
    pub comparators: Vec<Comparator>,
    pub guessing: GuessingMethod,
    pub guessing_replications: usize,
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub prior_mode: PriorMode,
    pub base_seed: u64,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            table: TableSource::Builtin,
            experts: vec![ExpertSpec::Oracle],
            trials: 324,
            checkpoints: DEFAULT_CHECKPOINTS.to_vec(),
            calculi: Calculus::ALL.to_vec(),
            comparators: vec![Comparator::Reversal, Comparator::Guessing],
            guessing: GuessingMethod::Analytic,
            guessing_replications: 100_000,
            sizes: DEFAULT_BAG_SIZES.to_vec(),
            replications: DEFAULT_REPLICATIONS,
            prior_mode: PriorMode::Marginal,
            base_seed: DEFAULT_SEED,
            output: PathBuf::from("results"),
        }
    }
}

fn config_err(message: impl Into<String>) -> HarnessError {
    HarnessError::Config(message.into())
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, HarnessError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| config_err(format!("`{key}`: cannot parse `{s}`: {e}")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| config_err(format!("`{key}`: cannot parse `{value}`: {e}")))
}

impl ExperimentConfig {
    /// Parse config text. Relative table paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let ini = Ini::load_from_str(text).map_err(|e| {
            config_err(format!("line {}: {}", e.line + 1, e.msg))
        })?;
        let mut cfg = ExperimentConfig::default();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            for (key, value) in props.iter() {
                if props.get_all(key).count() > 1 {
                    return Err(config_err(format!("[{section}] `{key}` set more than once")));
                }
                let full = format!("{section}.{key}");
                match (section, key) {
                    ("experiment", "seed") => cfg.base_seed = parse_one(&full, value)?,
                    ("experiment", "output") => cfg.output = PathBuf::from(value.trim()),
                    ("table", "source") => {
                        cfg.table = match value.trim() {
                            "builtin" | "default" => TableSource::Builtin,
                            path => TableSource::Csv(base_dir.join(path)),
                        }
                    }
                    ("experts", "models") => cfg.experts = parse_list(&full, value)?,
                    ("experts", "trials") => cfg.trials = parse_one(&full, value)?,
                    ("experts", "checkpoints") => cfg.checkpoints = parse_list(&full, value)?,
                    ("evaluate", "calculi") => cfg.calculi = parse_list(&full, value)?,
                    ("evaluate", "comparators") => cfg.comparators = parse_list(&full, value)?,
                    ("evaluate", "guessing") => cfg.guessing = parse_one(&full, value)?,
                    ("evaluate", "guessing_replications") => {
                        cfg.guessing_replications = parse_one(&full, value)?
                    }
                    ("curve", "sizes") => cfg.sizes = parse_list(&full, value)?,
                    ("curve", "replications") => cfg.replications = parse_one(&full, value)?,
                    ("curve", "prior") => cfg.prior_mode = parse_one(&full, value)?,
                    _ => return Err(config_err(format!("unknown key `{key}` in section [{section}]"))),
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Input(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.experts.is_empty() {
            return Err(config_err("`experts.models` is empty"));
        }
        if self.calculi.is_empty() {
            return Err(config_err("`evaluate.calculi` is empty"));
        }
        if self.trials == 0 {
            return Err(config_err("`experts.trials` must be positive"));
        }
        if self.checkpoints.is_empty()
            || self.checkpoints[0] == 0
            || self.checkpoints.windows(2).any(|w| w[0] >= w[1])
            || *self.checkpoints.last().unwrap() > self.trials
        {
            return Err(config_err(format!(
                "`experts.checkpoints` must be strictly increasing within 1..={}, got {:?}",
                self.trials, self.checkpoints
            )));
        }
        if self.comparators.contains(&Comparator::Training) && self.trials < 81 {
            return Err(config_err("the training comparator needs `experts.trials` >= 81"));
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(config_err("`curve.sizes` must be non-empty and positive"));
        }
        if self.replications == 0 || self.guessing_replications == 0 {
            return Err(config_err("replication counts must be positive"));
        }
        Ok(())
    }

    /// Canonical rendering of every setting that affects results. The
    /// output directory is left out so relocating results keeps checksums.
    pub fn echo(&self) -> String {
        let join = |xs: Vec<String>| xs.join(",");
        let mut s = String::new();
        s.push_str(&format!("seed={}\n", self.base_seed));
        s.push_str(&format!("table={}\n", self.table));
        s.push_str(&format!(
            "experts={}\n",
            join(self.experts.iter().map(|e| e.to_string()).collect())
        ));
        s.push_str(&format!("trials={}\n", self.trials));
        s.push_str(&format!(
            "checkpoints={}\n",
            join(self.checkpoints.iter().map(|c| c.to_string()).collect())
        ));
        s.push_str(&format!(
            "calculi={}\n",
            join(self.calculi.iter().map(|c| c.to_string()).collect())
        ));
        s.push_str(&format!(
            "comparators={}\n",
            join(self.comparators.iter().map(|c| c.name().to_string()).collect())
        ));
        s.push_str(&format!("guessing={:?}\n", self.guessing));
        s.push_str(&format!("guessing_replications={}\n", self.guessing_replications));
        s.push_str(&format!(
            "sizes={}\n",
            join(self.sizes.iter().map(|c| c.to_string()).collect())
        ));
        s.push_str(&format!("replications={}\n", self.replications));
        s.push_str(&format!("prior={:?}\n", self.prior_mode));
        s
    }

    /// First 16 hex digits of the SHA-256 of [`Self::echo`].
    pub fn checksum(&self) -> String {
        let digest = Sha256::digest(self.echo().as_bytes());
        hex::encode(&digest[..8])
    }
}
