//! Experiment configuration: a JSON file (`--config`) merged with inline
//! flags. Flags win over file values; anything unset falls back to the
//! experiment's defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::descriptor::SetDescriptor;
use crate::error::{AppError, AppResult};

/// Inline flags shared by every subcommand.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// JSON file with any of the options below (snake_case keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Ambient dimension; `concentration` accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Sphere radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Cap angle omega of the intersection bound.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Slack epsilon.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Base seed; streams are derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of Haar points Y.
    #[arg(long)]
    pub n_outer: Option<u64>,
    /// Inner draws per Y.
    #[arg(long)]
    pub n_inner: Option<u64>,
    /// Monte Carlo sample count for auxiliary estimates.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Number of random trials.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Number of latitude cells.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Set descriptor as JSON text, or `@path` to read it from a file.
    /// `blowup` accepts several.
    #[arg(long = "set")]
    pub sets: Vec<String>,
    /// Output CSV; detail tables and the sidecar JSON are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    m: Option<OneOrMany>,
    radius: Option<f64>,
    omega: Option<f64>,
    eps: Option<f64>,
    seed: Option<u64>,
    n_outer: Option<u64>,
    n_inner: Option<u64>,
    samples: Option<u64>,
    trials: Option<u64>,
    grid_n: Option<usize>,
    set: Option<Value>,
    sets: Option<Vec<Value>>,
    out: Option<PathBuf>,
}

/// Flags and file merged, before experiment-specific defaults.
#[derive(Debug, Clone, Default)]
pub struct Resolved {
    pub m: Option<Vec<usize>>,
    pub radius: Option<f64>,
    pub omega: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub n_outer: Option<u64>,
    pub n_inner: Option<u64>,
    pub samples: Option<u64>,
    pub trials: Option<u64>,
    pub grid_n: Option<usize>,
    pub sets: Vec<SetDescriptor>,
    pub out: Option<PathBuf>,
}

fn read_set_arg(text: &str) -> AppResult<SetDescriptor> {
    match text.strip_prefix('@') {
        Some(path) => SetDescriptor::parse(&std::fs::read_to_string(path)?),
        None => SetDescriptor::parse(text),
    }
}

impl Resolved {
    pub fn from_flags(flags: &Flags) -> AppResult<Self> {
        let file = match &flags.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        if file.set.is_some() && file.sets.is_some() {
            return Err(AppError::Config(
                "give either \"set\" or \"sets\" in the config file".into(),
            ));
        }
        let file_sets: Vec<SetDescriptor> = file
            .set
            .iter()
            .chain(file.sets.iter().flatten())
            .map(SetDescriptor::from_value)
            .collect::<AppResult<_>>()?;
        let flag_sets: Vec<SetDescriptor> = flags.sets.iter().map(|s| read_set_arg(s)).collect::<AppResult<_>>()?;
        Ok(Resolved {
            m: flags.m.clone().or(file.m.map(|m| match m {
                OneOrMany::One(x) => vec![x],
                OneOrMany::Many(v) => v,
            })),
            radius: flags.radius.or(file.radius),
            omega: flags.omega.or(file.omega),
            eps: flags.eps.or(file.eps),
            seed: flags.seed.or(file.seed),
            n_outer: flags.n_outer.or(file.n_outer),
            n_inner: flags.n_inner.or(file.n_inner),
            samples: flags.samples.or(file.samples),
            trials: flags.trials.or(file.trials),
            grid_n: flags.grid_n.or(file.grid_n),
            sets: if flag_sets.is_empty() { file_sets } else { flag_sets },
            out: flags.out.clone().or(file.out),
        })
    }

    /// Rejects options that the experiment does not use.
    fn only(&self, experiment: &str, allowed: &[&str]) -> AppResult<()> {
        let present = [
            ("m", self.m.is_some()),
            ("radius", self.radius.is_some()),
            ("omega", self.omega.is_some()),
            ("eps", self.eps.is_some()),
            ("seed", self.seed.is_some()),
            ("n_outer", self.n_outer.is_some()),
            ("n_inner", self.n_inner.is_some()),
            ("samples", self.samples.is_some()),
            ("trials", self.trials.is_some()),
            ("grid_n", self.grid_n.is_some()),
            ("set", !self.sets.is_empty()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(AppError::Config(format!("`{experiment}` does not take {name}")));
            }
        }
        Ok(())
    }

    fn single_m(&self, default: usize) -> AppResult<usize> {
        match self.m.as_deref() {
            None => Ok(default),
            Some([m]) => Ok(*m),
            Some(_) => Err(AppError::Config("expected a single dimension m".into())),
        }
    }

    fn single_set(&self) -> AppResult<SetDescriptor> {
        match self.sets.as_slice() {
            [s] => Ok(s.clone()),
            [] => Err(AppError::Config("a set descriptor is required (--set)".into())),
            _ => Err(AppError::Config("expected exactly one set".into())),
        }
    }
}

fn load_file(path: &Path) -> AppResult<FileConfig> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
}

fn require(cond: bool, msg: &str) -> AppResult<()> {
    if cond {
        Ok(())
    } else {
        Err(AppError::Config(msg.into()))
    }
}

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationConfig {
    pub ms: Vec<usize>,
    pub radius: f64,
    pub eps: f64,
    /// Haar samples per dimension for the sampled estimate; 0 skips it.
    pub samples: u64,
    pub seed: u64,
}

impl ConcentrationConfig {
    pub fn resolve(r: &Resolved) -> AppResult<Self> {
        r.only("concentration", &["m", "radius", "eps", "samples", "seed"])?;
        let c = ConcentrationConfig {
            ms: r.m.clone().unwrap_or_else(|| vec![128]),
            radius: r.radius.unwrap_or(1.0),
            eps: r.eps.unwrap_or(0.1),
            samples: r.samples.unwrap_or(0),
            seed: r.seed.unwrap_or(DEFAULT_SEED),
        };
        require(!c.ms.is_empty(), "at least one dimension is needed")?;
        require(
            c.eps > 0.0 && c.eps < std::f64::consts::FRAC_PI_2,
            "eps must lie in (0, pi/2)",
        )?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupConfig {
    pub m: usize,
    pub radius: f64,
    pub sets: Vec<SetDescriptor>,
    pub eps: f64,
    /// Samples for sets whose measure is only available as an estimate.
    pub samples: u64,
    pub seed: u64,
}

impl BlowupConfig {
    pub fn resolve(r: &Resolved) -> AppResult<Self> {
        r.only("blowup", &["m", "radius", "eps", "set", "samples", "seed"])?;
        let c = BlowupConfig {
            m: r.single_m(128)?,
            radius: r.radius.unwrap_or(1.0),
            sets: r.sets.clone(),
            eps: r.eps.unwrap_or(0.1),
            samples: r.samples.unwrap_or(1_000_000),
            seed: r.seed.unwrap_or(DEFAULT_SEED),
        };
        require(!c.sets.is_empty(), "at least one set descriptor is required (--set)")?;
        require(c.eps > 0.0 && c.eps < 1.0, "eps must lie in (0, 1)")?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Config {
    pub m: usize,
    pub radius: f64,
    pub set: SetDescriptor,
    pub omega: f64,
    pub eps: f64,
    pub n_outer: u64,
    pub n_inner: u64,
    /// Samples for the measure of estimate-only sets.
    pub samples: u64,
    pub seed: u64,
}

impl Theorem1Config {
    pub fn resolve(r: &Resolved) -> AppResult<Self> {
        r.only(
            "theorem1",
            &[
                "m", "radius", "omega", "eps", "set", "n_outer", "n_inner", "samples", "seed",
            ],
        )?;
        let c = Theorem1Config {
            m: r.single_m(128)?,
            radius: r.radius.unwrap_or(1.0),
            set: r.single_set()?,
            omega: r.omega.unwrap_or(0.9),
            eps: r.eps.unwrap_or(0.1),
            n_outer: r.n_outer.unwrap_or(2000),
            n_inner: r.n_inner.unwrap_or(20_000),
            samples: r.samples.unwrap_or(1_000_000),
            seed: r.seed.unwrap_or(DEFAULT_SEED),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> AppResult<()> {
        require(
            self.n_outer >= 100 && self.n_inner >= 100,
            "n_outer and n_inner must be at least 100",
        )?;
        require(self.eps > 0.0 && self.eps < 1.0, "eps must lie in (0, 1)")?;
        require(
            self.omega > 0.0 && self.omega + self.eps <= std::f64::consts::PI,
            "omega must be positive with omega + eps <= pi",
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RieszConfig {
    pub m: usize,
    pub radius: f64,
    pub trials: u64,
    pub grid_n: usize,
    pub seed: u64,
}

impl RieszConfig {
    pub fn resolve(r: &Resolved) -> AppResult<Self> {
        r.only("riesz", &["m", "radius", "trials", "grid_n", "seed"])?;
        let c = RieszConfig {
            m: r.single_m(8)?,
            radius: r.radius.unwrap_or(1.0),
            trials: r.trials.unwrap_or(100),
            grid_n: r.grid_n.unwrap_or(512),
            seed: r.seed.unwrap_or(DEFAULT_SEED),
        };
        require(c.grid_n >= 64, "grid_n must be at least 64")?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofChainConfig {
    pub m: usize,
    pub radius: f64,
    pub set: SetDescriptor,
    pub omega: f64,
    pub eps: f64,
    pub grid_n: usize,
}

impl ProofChainConfig {
    pub fn resolve(r: &Resolved) -> AppResult<Self> {
        r.only("proof-chain", &["m", "radius", "omega", "eps", "set", "grid_n"])?;
        Ok(ProofChainConfig {
            m: r.single_m(16)?,
            radius: r.radius.unwrap_or(1.0),
            set: r.single_set()?,
            omega: r.omega.unwrap_or(1.0),
            eps: r.eps.unwrap_or(0.1),
            grid_n: r.grid_n.unwrap_or(4096),
        })
    }
}
