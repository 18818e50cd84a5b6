//! Run configuration: `key = value` files with command-line overrides.
//!
//! Blank lines and lines starting with `#` are ignored. Every other line must
//! be `key = value` with a known key. Later lines override earlier ones.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::certificates::{CertBudgets, RecursionMode};
use crate::renorm::Precision;
use crate::{Error, Result};

/// Which status of the area certificate decides success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaMode {
    /// The induction run with the measured sups.
    #[default]
    Direct,
    /// The threshold inequalities of the proof checked on the measured sups.
    PaperThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub period: usize,
    pub rho: f64,
    pub delta: f64,
    pub delta_lo: f64,
    pub delta_hi: f64,
    pub delta_tol: f64,
    /// Truncation depth of every series.
    pub depth: usize,
    pub prune_threshold: f64,
    pub prune_tail_fraction: f64,
    pub prune_guard: f64,
    pub node_budget: u64,
    pub profile_depth: usize,
    pub profile_samples: usize,
    pub prune_profile_samples: usize,
    pub grid_a_prime: (usize, usize),
    pub grid_u_prime: (usize, usize),
    pub grid_a: (usize, usize),
    pub bijection_depth: usize,
    pub recursion_mode: RecursionMode,
    pub area_mode: AreaMode,
    pub k_max: usize,
    pub mc_samples: usize,
    pub mc_budget: usize,
    pub seed: u64,
    pub precision: Precision,
    /// Polynomial degree of the functional-equation solver.
    pub degree: usize,
    pub max_iter: usize,
    pub resolutions: Vec<usize>,
    pub n_max: u32,
    pub kappa: f64,
    pub eps: f64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = CertBudgets::default();
        Self {
            period: 10,
            rho: 0.05,
            delta: 1.8,
            delta_lo: 1.0,
            delta_hi: 2.0,
            delta_tol: 0.05,
            depth: b.j,
            prune_threshold: b.prune_threshold,
            prune_tail_fraction: b.prune_tail_fraction,
            prune_guard: b.prune_guard,
            node_budget: b.node_budget,
            profile_depth: b.profile_depth,
            profile_samples: b.profile_samples,
            prune_profile_samples: b.prune_profile_samples,
            grid_a_prime: b.grid_a_prime,
            grid_u_prime: b.grid_u_prime,
            grid_a: b.grid_a,
            bijection_depth: b.bijection_j,
            recursion_mode: b.mode,
            area_mode: AreaMode::Direct,
            k_max: 30,
            mc_samples: 100_000,
            mc_budget: 1000,
            seed: 1,
            precision: Precision::Double,
            degree: 20,
            max_iter: 1000,
            resolutions: vec![64, 128, 256, 512, 1024, 2048, 4096],
            n_max: 8,
            kappa: 0.3,
            eps: 0.3,
            out_dir: PathBuf::from("out"),
            threads: 0,
        }
    }
}

/// Every accepted key, in file order.
pub const KEYS: [&str; 33] = [
    "period",
    "rho",
    "delta",
    "delta_lo",
    "delta_hi",
    "delta_tol",
    "depth",
    "prune_threshold",
    "prune_tail_fraction",
    "prune_guard",
    "node_budget",
    "profile_depth",
    "profile_samples",
    "prune_profile_samples",
    "grid_a_prime",
    "grid_u_prime",
    "grid_a",
    "bijection_depth",
    "recursion_mode",
    "area_mode",
    "k_max",
    "mc_samples",
    "mc_budget",
    "seed",
    "precision",
    "degree",
    "max_iter",
    "resolutions",
    "n_max",
    "kappa",
    "eps",
    "out_dir",
    "threads",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Range(format!("{key} = `{value}` is not a valid number")))
}

fn in_range<T: PartialOrd + std::fmt::Display + Copy>(key: &str, v: T, lo: T, hi: T) -> Result<T> {
    if v >= lo && v <= hi {
        Ok(v)
    } else {
        Err(Error::Range(format!("{key} = {v} (must lie in [{lo}, {hi}])")))
    }
}

fn real(key: &str, value: &str, lo: f64, hi: f64) -> Result<f64> {
    let v: f64 = num(key, value)?;
    if !v.is_finite() {
        return Err(Error::Range(format!("{key} = {v} is not finite")));
    }
    in_range(key, v, lo, hi)
}

fn grid(key: &str, value: &str) -> Result<(usize, usize)> {
    let (a, b) = value.split_once('x').ok_or_else(|| Error::Range(format!("{key} = `{value}` (expected RADIALxANGULAR)")))?;
    let a = in_range(key, num(key, a.trim())?, 1, 256)?;
    let b = in_range(key, num(key, b.trim())?, 1, 256)?;
    Ok((a, b))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "period" => self.period = in_range(key, num(key, v)?, 2, 14)?,
            "rho" => self.rho = real(key, v, 1e-6, 0.5)?,
            "delta" => self.delta = real(key, v, 1e-6, 2.0)?,
            "delta_lo" => self.delta_lo = real(key, v, 1.0, 2.0)?,
            "delta_hi" => self.delta_hi = real(key, v, 1.0, 2.0)?,
            "delta_tol" => self.delta_tol = real(key, v, 1e-6, 1.0)?,
            "depth" => self.depth = in_range(key, num(key, v)?, 1, 60)?,
            "prune_threshold" => self.prune_threshold = real(key, v, 0.0, 1.0)?,
            "prune_tail_fraction" => self.prune_tail_fraction = real(key, v, 0.0, 1.0)?,
            "prune_guard" => self.prune_guard = real(key, v, 0.0, 1.0)?,
            "node_budget" => {
                let b: f64 = real(key, v, 1.0, 1e12)?;
                self.node_budget = b as u64;
            }
            "profile_depth" => self.profile_depth = in_range(key, num(key, v)?, 4, 22)?,
            "profile_samples" => self.profile_samples = in_range(key, num(key, v)?, 1, 4096)?,
            "prune_profile_samples" => self.prune_profile_samples = in_range(key, num(key, v)?, 1, 4096)?,
            "grid_a_prime" => self.grid_a_prime = grid(key, v)?,
            "grid_u_prime" => self.grid_u_prime = grid(key, v)?,
            "grid_a" => self.grid_a = grid(key, v)?,
            "bijection_depth" => self.bijection_depth = in_range(key, num(key, v)?, 1, 16)?,
            "recursion_mode" => {
                self.recursion_mode = match v {
                    "direct" => RecursionMode::Direct,
                    "paper" | "paper-inequality" => RecursionMode::PaperInequality,
                    _ => return Err(Error::Range(format!("{key} = `{v}` (expected direct or paper-inequality)"))),
                }
            }
            "area_mode" => {
                self.area_mode = match v {
                    "direct" => AreaMode::Direct,
                    "paper-threshold" => AreaMode::PaperThreshold,
                    _ => return Err(Error::Range(format!("{key} = `{v}` (expected direct or paper-threshold)"))),
                }
            }
            "k_max" => self.k_max = in_range(key, num(key, v)?, 1, 1000)?,
            "mc_samples" => self.mc_samples = in_range(key, num(key, v)?, 1, 100_000_000)?,
            "mc_budget" => self.mc_budget = in_range(key, num(key, v)?, 1, 1_000_000)?,
            "seed" => self.seed = num(key, v)?,
            "precision" => {
                self.precision = match v {
                    "double" => Precision::Double,
                    "extended" => Precision::Extended,
                    _ => return Err(Error::Range(format!("{key} = `{v}` (expected double or extended)"))),
                }
            }
            "degree" => self.degree = in_range(key, num(key, v)?, 2, 64)?,
            "max_iter" => self.max_iter = in_range(key, num(key, v)?, 1, 1_000_000)?,
            "resolutions" => {
                let list = v.split(',').map(|s| num(key, s.trim())).collect::<Result<Vec<usize>>>()?;
                if list.len() < 2 || list.windows(2).any(|w| w[0] >= w[1]) || list[0] < 2 || list[list.len() - 1] > 4096 {
                    return Err(Error::Range(format!("{key} = `{v}` (need an ascending list within 2..=4096)")));
                }
                self.resolutions = list;
            }
            "n_max" => self.n_max = in_range(key, num(key, v)?, 2, 10)?,
            "kappa" => self.kappa = real(key, v, 1e-6, 0.5)?,
            "eps" => self.eps = real(key, v, 1e-6, 2.0)?,
            "out_dir" => {
                if v.is_empty() {
                    return Err(Error::Range(format!("{key} is empty")));
                }
                self.out_dir = PathBuf::from(v);
            }
            "threads" => self.threads = in_range(key, num(key, v)?, 0, 1024)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parses a configuration text on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let (key, value) = s.split_once('=').ok_or_else(|| Error::Parse { line, message: format!("expected `key = value`, found `{s}`") })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Parse { line, message: format!("unknown key `{key}`") });
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::Range(m) => Error::Range(format!("line {line}: {m}")),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    /// Cross-field checks.
    pub fn validate(&self) -> Result<()> {
        if self.delta_lo >= self.delta_hi {
            return Err(Error::Range(format!("delta_lo = {} must be below delta_hi = {}", self.delta_lo, self.delta_hi)));
        }
        self.budgets().validate()
    }

    /// Canonical text form; parsing it yields an equal configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.value_of(key));
        }
        s
    }

    fn value_of(&self, key: &str) -> String {
        let g = |g: (usize, usize)| format!("{}x{}", g.0, g.1);
        match key {
            "period" => self.period.to_string(),
            "rho" => format!("{:?}", self.rho),
            "delta" => format!("{:?}", self.delta),
            "delta_lo" => format!("{:?}", self.delta_lo),
            "delta_hi" => format!("{:?}", self.delta_hi),
            "delta_tol" => format!("{:?}", self.delta_tol),
            "depth" => self.depth.to_string(),
            "prune_threshold" => format!("{:?}", self.prune_threshold),
            "prune_tail_fraction" => format!("{:?}", self.prune_tail_fraction),
            "prune_guard" => format!("{:?}", self.prune_guard),
            "node_budget" => self.node_budget.to_string(),
            "profile_depth" => self.profile_depth.to_string(),
            "profile_samples" => self.profile_samples.to_string(),
            "prune_profile_samples" => self.prune_profile_samples.to_string(),
            "grid_a_prime" => g(self.grid_a_prime),
            "grid_u_prime" => g(self.grid_u_prime),
            "grid_a" => g(self.grid_a),
            "bijection_depth" => self.bijection_depth.to_string(),
            "recursion_mode" => match self.recursion_mode {
                RecursionMode::Direct => "direct".into(),
                RecursionMode::PaperInequality => "paper-inequality".into(),
            },
            "area_mode" => match self.area_mode {
                AreaMode::Direct => "direct".into(),
                AreaMode::PaperThreshold => "paper-threshold".into(),
            },
            "k_max" => self.k_max.to_string(),
            "mc_samples" => self.mc_samples.to_string(),
            "mc_budget" => self.mc_budget.to_string(),
            "seed" => self.seed.to_string(),
            "precision" => match self.precision {
                Precision::Double => "double".into(),
                Precision::Extended => "extended".into(),
            },
            "degree" => self.degree.to_string(),
            "max_iter" => self.max_iter.to_string(),
            "resolutions" => self.resolutions.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
            "n_max" => self.n_max.to_string(),
            "kappa" => format!("{:?}", self.kappa),
            "eps" => format!("{:?}", self.eps),
            "out_dir" => self.out_dir.display().to_string(),
            "threads" => self.threads.to_string(),
            _ => String::new(),
        }
    }

    /// Certificate budgets derived from this configuration.
    pub fn budgets(&self) -> CertBudgets {
        CertBudgets {
            j: self.depth,
            prune_threshold: self.prune_threshold,
            prune_tail_fraction: self.prune_tail_fraction,
            node_budget: self.node_budget,
            profile_depth: self.profile_depth,
            profile_samples: self.profile_samples,
            prune_profile_samples: self.prune_profile_samples,
            prune_guard: self.prune_guard,
            grid_a_prime: self.grid_a_prime,
            grid_u_prime: self.grid_u_prime,
            grid_a: self.grid_a,
            bijection_j: self.bijection_depth,
            mode: self.recursion_mode,
        }
    }
}
