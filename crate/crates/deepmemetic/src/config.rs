//! Experiment configuration.
//!
//! The file format is line based; `#` starts a comment.
//!
//! ```text
//! master_seed = 7
//! datasets = 5
//! runs = 10
//! phi = 100
//! family = 4z10x9            # a benchmark family by label
//! family = 4 10 9 2 4        # or C n m min max
//! macro Duo = 3Br(HC,TS)
//! arch Hu                    # name is the expression itself
//! arch duo = 5Ri(Duo,MAHC)   # explicit name
//! ```
//!
//! Any `family` line replaces the default benchmark list.

use std::path::Path;

use deepmemetic_core::cooperation::{parse_architecture, print_architecture, Macros};
use deepmemetic_core::instance::BENCHMARK_FAMILIES;
use deepmemetic_core::{ArchitectureSpec, InstanceFamily};

use crate::io::{self, FileError};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub families: Vec<InstanceFamily>,
    pub datasets_per_family: usize,
    pub runs_per_dataset: usize,
    pub phi: u64,
    pub architectures: Vec<(String, ArchitectureSpec)>,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            families: BENCHMARK_FAMILIES.to_vec(),
            datasets_per_family: 5,
            runs_per_dataset: 10,
            phi: 100,
            architectures: ["Hu", "Ca", "Ox"]
                .into_iter()
                .map(|n| (n.to_string(), parse_architecture(n).expect("preset")))
                .collect(),
            master_seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    File(#[from] FileError),
}

fn line_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line {
        line,
        message: message.into(),
    }
}

fn parse_family(value: &str) -> Result<InstanceFamily, String> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    let family = match parts.as_slice() {
        [label] => InstanceFamily::benchmark(label).ok_or_else(|| format!("unknown benchmark family `{label}`"))?,
        [c, n, m, lo, hi] => {
            let num = |s: &str| s.parse::<usize>().map_err(|_| format!("expected an integer, found `{s}`"));
            InstanceFamily::new(num(c)?, num(n)?, num(m)?, num(lo)?, num(hi)?)
        }
        _ => return Err("family takes a label or `C n m min max`".into()),
    };
    family.validate().map_err(|e| e.to_string())?;
    Ok(family)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self {
            architectures: Vec::new(),
            ..Self::default()
        };
        let mut families = Vec::new();
        let mut macros = Macros::presets();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix("macro ") {
                io::bind_macros(&mut macros, rest).map_err(|(_, m)| line_err(line, m))?;
                continue;
            }
            if let Some(rest) = content.strip_prefix("arch ") {
                let (name, expr) = match rest.split_once('=') {
                    Some((n, e)) => (Some(n.trim()), e.trim()),
                    None => (None, rest.trim()),
                };
                let spec = macros.parse(expr).map_err(|e| line_err(line, e.to_string()))?;
                let name = name.map_or_else(|| expr.to_string(), str::to_string);
                if name.is_empty() || name.contains(',') {
                    return Err(line_err(line, "architecture names must be non-empty and contain no commas"));
                }
                if cfg.architectures.iter().any(|(n, _)| *n == name) {
                    return Err(line_err(line, format!("duplicate architecture name `{name}`")));
                }
                cfg.architectures.push((name, spec));
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| line_err(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let count = || {
                value
                    .parse::<u64>()
                    .ok()
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| line_err(line, format!("`{key}` must be a positive integer")))
            };
            match key {
                "master_seed" => {
                    cfg.master_seed = value
                        .parse()
                        .map_err(|_| line_err(line, "`master_seed` must be an unsigned integer"))?
                }
                "datasets" => cfg.datasets_per_family = count()? as usize,
                "runs" => cfg.runs_per_dataset = count()? as usize,
                "phi" => cfg.phi = count()?,
                "family" => families.push(parse_family(value).map_err(|m| line_err(line, m))?),
                _ => return Err(line_err(line, format!("unknown key `{key}`"))),
            }
        }
        if !families.is_empty() {
            cfg.families = families;
        }
        if cfg.architectures.is_empty() {
            cfg.architectures = Self::default().architectures;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::parse(&io::read(path.as_ref())?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.datasets_per_family == 0 || self.runs_per_dataset == 0 || self.phi == 0 {
            return Err(ConfigError::Invalid("counts and phi must be at least 1".into()));
        }
        if self.families.is_empty() || self.architectures.is_empty() {
            return Err(ConfigError::Invalid("need at least one family and one architecture".into()));
        }
        for (name, spec) in &self.architectures {
            spec.validate()
                .map_err(|e| ConfigError::Invalid(format!("architecture `{name}`: {e}")))?;
        }
        Ok(())
    }

    /// Renders the configuration in the file format.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "master_seed = {}\ndatasets = {}\nruns = {}\nphi = {}\n",
            self.master_seed, self.datasets_per_family, self.runs_per_dataset, self.phi
        );
        for f in &self.families {
            out += &format!("family = {} {} {} {} {}\n", f.capacity, f.n, f.m, f.min_tools, f.max_tools);
        }
        for (name, spec) in &self.architectures {
            out += &format!("arch {name} = {}\n", print_architecture(spec));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("E_max needs more tools than slots (m = {m}, C = {capacity})")]
pub struct NoSpareTools {
    pub m: usize,
    pub capacity: usize,
}

/// Evaluation budget of one run: `phi * n * (m - C)`.
pub fn emax_for(family: &InstanceFamily, phi: u64) -> Result<u64, NoSpareTools> {
    if family.m <= family.capacity {
        return Err(NoSpareTools {
            m: family.m,
            capacity: family.capacity,
        });
    }
    Ok(phi * family.n as u64 * (family.m - family.capacity) as u64)
}
