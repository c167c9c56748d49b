use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::CliError;
use crate::density::{DEFAULT_EULER_CUTOFF, DEFAULT_EXCLUSION};

pub const DEFAULT_H_EXPONENT: f64 = 0.55;
pub const DEFAULT_X: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Family,
    Empirical,
    Average,
    Density,
    MurmurFn,
    Compare,
    Constants,
    Validate,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Family => "family",
            Subcommand::Empirical => "empirical",
            Subcommand::Average => "average",
            Subcommand::Density => "density",
            Subcommand::MurmurFn => "murmur-fn",
            Subcommand::Compare => "compare",
            Subcommand::Constants => "constants",
            Subcommand::Validate => "validate",
        }
    }

    fn default_grid(self) -> GridSpec {
        match self {
            Subcommand::Average | Subcommand::Compare => GridSpec { lo: 0.3, hi: 2.2, n: 96, log: false },
            _ => GridSpec { lo: 0.1, hi: 4.0, n: 200, log: false },
        }
    }
}

/// `lo:hi:n`, optionally `lo:hi:n:log`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.log {
            crate::analytic::log_grid(self.lo, self.hi, self.n)
        } else {
            crate::density::linear_grid(self.lo, self.hi, self.n)
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}{}", self.lo, self.hi, self.n, if self.log { ":log" } else { "" })
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("grid must be lo:hi:n or lo:hi:n:log, got {s:?}");
        if parts.len() != 3 && !(parts.len() == 4 && parts[3] == "log") {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let log = parts.len() == 4;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo && n >= 1) || (log && lo <= 0.0) {
            return Err(format!("grid needs 0 ≤ lo ≤ hi and n ≥ 1 (lo > 0 for log), got {s:?}"));
        }
        Ok(GridSpec { lo, hi, n, log })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightChoice {
    Indicator,
    Bump,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub x: u64,
    pub y: Option<u64>,
    pub p_min: Option<u64>,
    pub p_max: Option<u64>,
    pub h_exp: f64,
    pub euler_cutoff: u64,
    pub exclusion: f64,
    pub grid: Option<GridSpec>,
    pub weight: WeightChoice,
    pub support: (f64, f64),
    pub bessel: bool,
    pub suite: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub cache: Option<PathBuf>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value {value:?} for {key}")))
}

impl RunConfig {
    pub fn defaults(subcommand: Subcommand) -> Self {
        RunConfig {
            subcommand,
            x: DEFAULT_X,
            y: None,
            p_min: None,
            p_max: None,
            h_exp: DEFAULT_H_EXPONENT,
            euler_cutoff: DEFAULT_EULER_CUTOFF,
            exclusion: DEFAULT_EXCLUSION,
            grid: None,
            weight: WeightChoice::Indicator,
            support: (1.0, 2.0),
            bessel: false,
            suite: None,
            out: None,
            workers: 0,
            cache: None,
        }
    }

    /// Applies one `key = value` setting. Keys use the long flag spelling;
    /// underscores are accepted in place of dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('_', "-");
        let v = value.trim();
        match key.as_str() {
            "x" => self.x = parse(&key, v)?,
            "y" => self.y = Some(parse(&key, v)?),
            "p-min" => self.p_min = Some(parse(&key, v)?),
            "p-max" => self.p_max = Some(parse(&key, v)?),
            "h-exp" => self.h_exp = parse(&key, v)?,
            "euler-cutoff" => self.euler_cutoff = parse::<f64>(&key, v).and_then(|m| {
                if m.fract() == 0.0 && (0.0..1e12).contains(&m) {
                    Ok(m as u64)
                } else {
                    Err(CliError::Usage(format!("invalid value {v:?} for euler-cutoff")))
                }
            })?,
            "exclusion" => self.exclusion = parse(&key, v)?,
            "grid" => self.grid = Some(v.parse().map_err(CliError::Usage)?),
            "weight" => {
                self.weight = match v {
                    "indicator" => WeightChoice::Indicator,
                    "bump" => WeightChoice::Bump,
                    _ => return Err(CliError::Usage(format!("weight must be indicator or bump, got {v:?}"))),
                }
            }
            "support" => {
                let (a, b) = v
                    .split_once(':')
                    .ok_or_else(|| CliError::Usage(format!("support must be a:b, got {v:?}")))?;
                self.support = (parse(&key, a)?, parse(&key, b)?);
            }
            "bessel" => self.bessel = parse(&key, v)?,
            "suite" => self.suite = Some(v.to_string()),
            "out" => self.out = Some(PathBuf::from(v)),
            "workers" => self.workers = parse(&key, v)?,
            "cache" => self.cache = Some(PathBuf::from(v)),
            "format" if v == "csv" => {}
            "format" => return Err(CliError::Usage(format!("only csv output is supported, got {v:?}"))),
            _ => return Err(CliError::Usage(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Resource(format!("cannot read config {}: {e}", path.display())))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected key = value", path.display(), i + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn window_y(&self) -> u64 {
        self.y.unwrap_or(self.x)
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.grid.unwrap_or_else(|| self.subcommand.default_grid())
    }

    pub fn prime_range(&self) -> (u64, u64) {
        let hi = self.p_max.unwrap_or((2.25 * self.x as f64).floor() as u64);
        (self.p_min.unwrap_or(3), hi)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.h_exp > 0.0 && self.h_exp < 1.0) {
            return Err(CliError::Usage(format!("h-exp must lie in (0, 1), got {}", self.h_exp)));
        }
        let (a, b) = self.support;
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(CliError::Usage(format!("support needs 0 < a < b, got {a}:{b}")));
        }
        let (lo, hi) = self.prime_range();
        if lo > hi {
            return Err(CliError::Usage(format!("p-min {lo} exceeds p-max {hi}")));
        }
        Ok(())
    }

    /// Settings that determine the output, excluding plumbing such as
    /// workers, paths and the config file itself.
    pub fn canonical(&self) -> String {
        let (p_lo, p_hi) = self.prime_range();
        format!(
            "subcommand={};x={};y={};p-min={};p-max={};h-exp={:?};euler-cutoff={};exclusion={:?};grid={};weight={:?};support={:?}:{:?};bessel={};suite={}",
            self.subcommand.name(),
            self.x,
            self.window_y(),
            p_lo,
            p_hi,
            self.h_exp,
            self.euler_cutoff,
            self.exclusion,
            self.grid_spec(),
            self.weight,
            self.support.0,
            self.support.1,
            self.bessel,
            self.suite.as_deref().unwrap_or("all"),
        )
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
