use gjfe::matspace::Budget;
use gjfe::pairs::PairSpec;
use gjfe::params::ParamSpec;
use gjfe::scalars::RingKind;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Budget(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Budget(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Budget(m) => write!(f, "{m}"),
            CliError::Compute(m) => write!(f, "error: {m}"),
        }
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        let m = e.to_string();
        if m.contains("budget exceeded") {
            CliError::Budget(m)
        } else {
            CliError::Compute(m)
        }
    }
}

pub fn config_err(m: impl Into<String>) -> CliError {
    CliError::Config(m.into())
}

/// `p=3,deg=1,n=2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub deg: u32,
    pub n: usize,
}

impl FieldSpec {
    pub fn parse(s: &str) -> Result<FieldSpec, CliError> {
        let bad = || config_err(format!("malformed field spec {s:?}"));
        let (mut p, mut deg, mut n) = (None, 1u32, 1usize);
        for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v: u64 = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "p" => p = Some(v as u32),
                "deg" => deg = v as u32,
                "n" => n = v as usize,
                _ => return Err(bad()),
            }
        }
        let p = p.ok_or_else(bad)?;
        if gjfe::pairs::prime_power(p) != Some((p, 1)) || deg == 0 || n == 0 {
            return Err(bad());
        }
        Ok(FieldSpec { p, deg, n })
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.deg)
    }

    pub fn to_spec_string(&self) -> String {
        format!("p={},deg={},n={}", self.p, self.deg, self.n)
    }
}

/// `6561` (algebra cap) or `algebra=6561,pairs=40000000`.
pub fn parse_budget(s: &str) -> Result<Budget, CliError> {
    let bad = || config_err(format!("malformed budget {s:?}"));
    let mut b = Budget::default();
    if let Ok(v) = s.trim().parse::<u64>() {
        b.max_algebra = v;
        return Ok(b);
    }
    for part in s.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(bad)?;
        let v: u64 = v.trim().parse().map_err(|_| bad())?;
        match k.trim() {
            "algebra" => b.max_algebra = v,
            "pairs" => b.max_pairs = v,
            _ => return Err(bad()),
        }
    }
    Ok(b)
}

/// Everything a run depends on; recorded in every report header.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub field: Option<String>,
    pub ring: String,
    pub pairs: Vec<String>,
    pub param: Option<String>,
    pub max_algebra: u64,
    pub max_pairs: u64,
    pub workers: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn field_spec(&self) -> Result<FieldSpec, CliError> {
        FieldSpec::parse(self.field.as_deref().ok_or_else(|| config_err("--field is required"))?)
    }

    pub fn ring_kind(&self) -> Result<RingKind, CliError> {
        RingKind::parse(&self.ring).ok_or_else(|| config_err(format!("malformed ring spec {:?}", self.ring)))
    }

    pub fn pair_specs(&self) -> Result<Vec<PairSpec>, CliError> {
        self.pairs
            .iter()
            .map(|s| PairSpec::parse(s).map_err(|e| config_err(e.to_string())))
            .collect()
    }

    pub fn param_spec(&self) -> Result<ParamSpec, CliError> {
        let s = self.param.as_deref().ok_or_else(|| config_err("--param is required"))?;
        ParamSpec::parse(s).map_err(|e| config_err(e.to_string()))
    }

    pub fn budget(&self) -> Budget {
        Budget {
            max_algebra: self.max_algebra,
            max_pairs: self.max_pairs,
        }
    }

    /// Fails early on malformed specs.
    pub fn validate(&self) -> Result<(), CliError> {
        self.ring_kind()?;
        if self.field.is_some() {
            self.field_spec()?;
        }
        self.pair_specs()?;
        if self.param.is_some() {
            self.param_spec()?;
        }
        if self.workers == Some(0) {
            return Err(config_err("--workers must be positive"));
        }
        Ok(())
    }
}
