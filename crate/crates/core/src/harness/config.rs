//! Experiment configuration: flat `key = value` lines, `#` comments.
//!
//! Keys left out take experiment-specific defaults. Later assignments win, so
//! CLI overrides are applied by parsing them after the file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bisection::CutRule;
use crate::error::{Error, Result};
use crate::graph::MatrixKind;
use crate::theory::{pbar_thr, Constants};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    VaryPbar,
    PqGrid,
    CliqueSweep,
    EmbedDump,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::VaryPbar => "vary-pbar",
            Experiment::PqGrid => "pq-grid",
            Experiment::CliqueSweep => "clique-sweep",
            Experiment::EmbedDump => "embed-dump",
        }
    }

    /// Mixed into trial seeds so experiments never share a stream.
    pub(crate) fn tag(self) -> u64 {
        match self {
            Experiment::VaryPbar => 1,
            Experiment::PqGrid => 2,
            Experiment::CliqueSweep => 3,
            Experiment::EmbedDump => 4,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "vary-pbar" => Ok(Experiment::VaryPbar),
            "pq-grid" => Ok(Experiment::PqGrid),
            "clique-sweep" => Ok(Experiment::CliqueSweep),
            "embed-dump" => Ok(Experiment::EmbedDump),
            other => Err(Error::Parse(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Graph family sampled by `embed-dump`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbedModel {
    /// Benchmark NSSBM at `pbar`.
    Nssbm,
    /// Planted clique in one half, DCM crossing edges.
    Clique,
}

impl FromStr for EmbedModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nssbm" | "nssbm-bench" => Ok(EmbedModel::Nssbm),
            "clique" | "dcm-clique" => Ok(EmbedModel::Clique),
            other => Err(Error::Parse(format!("unknown embed model '{other}'"))),
        }
    }
}

/// A fully resolved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    /// Fixed `pbar` (pq-grid, embed-dump).
    pub pbar: f64,
    /// The `pbar` values swept by vary-pbar.
    pub pbar_grid: Vec<f64>,
    /// Axis values of the pq-grid; cells need `p > q`.
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub clique_sizes: Vec<usize>,
    /// Clique size used by embed-dump with the clique model.
    pub clique_size: usize,
    pub embed_model: EmbedModel,
    pub matrices: Vec<MatrixKind>,
    pub cuts: Vec<CutRule>,
    pub trials: usize,
    pub base_seed: u64,
    pub out_dir: PathBuf,
    pub tol: Option<f64>,
    pub dense_cap: usize,
    pub constants: Constants,
    /// Record wall-clock runtimes; off by default so output is byte-stable.
    pub timing: bool,
}

/// Raw key/value pairs, in the order they were given.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: Vec<(String, String)>,
}

const KEYS: &[&str] = &[
    "experiment",
    "n",
    "p",
    "q",
    "pbar",
    "pbar_min",
    "pbar_max",
    "pbar_points",
    "pbar_values",
    "p_min",
    "p_max",
    "q_min",
    "q_max",
    "grid_points",
    "clique_min",
    "clique_max",
    "clique_points",
    "clique_sizes",
    "clique_size",
    "model",
    "matrices",
    "cuts",
    "trials",
    "base_seed",
    "out_dir",
    "tol",
    "dense_cap",
    "c",
    "c1",
    "c2",
    "timing",
];

impl RawConfig {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected 'key = value', got '{line}'", i + 1))
            })?;
            raw.set(k.trim(), v.trim())?;
        }
        Ok(raw)
    }

    /// Sets one key, replacing an earlier value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::Parse(format!("unknown config key '{key}'")));
        }
        self.entries.retain(|(k, _)| k != key);
        self.entries.push((key.to_string(), value.to_string()));
        Ok(())
    }

    /// Applies `key=value` override strings.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("override '{o}' is not key=value")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("bad value '{v}' for '{key}'"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|_| Error::Parse(format!("bad list item '{s}' for '{key}'")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    /// Fills in defaults and validates. `env_seed` is the fallback base seed
    /// when the file and overrides leave `base_seed` unset.
    pub fn resolve(&self, env_seed: Option<u64>) -> Result<ExperimentConfig> {
        let experiment: Experiment = self
            .parsed("experiment")?
            .ok_or_else(|| Error::InvalidArgument("config needs 'experiment'".into()))?;
        let n: usize = self.parsed("n")?.unwrap_or(2000);
        let nf = n as f64;
        let ln = nf.ln();
        let (p_default, q_default) = match experiment {
            Experiment::CliqueSweep => (9.0 / nf.sqrt(), 1.0 / nf.sqrt()),
            Experiment::EmbedDump if self.get("model").is_some_and(|m| m.contains("clique")) => {
                (9.0 / nf.sqrt(), 1.0 / nf.sqrt())
            }
            _ => (24.0 * ln / nf, 8.0 * ln / nf),
        };
        let p = self.parsed("p")?.unwrap_or(p_default);
        let q = self.parsed("q")?.unwrap_or(q_default);
        let pbar_default = match experiment {
            Experiment::PqGrid => 0.5,
            _ => pbar_thr(p, q).min(1.0),
        };
        let pbar = self.parsed("pbar")?.unwrap_or(pbar_default);

        let pbar_grid = match self.list::<f64>("pbar_values")? {
            Some(v) => v,
            None => {
                let lo = self.parsed("pbar_min")?.unwrap_or(p);
                let hi = self.parsed("pbar_max")?.unwrap_or(1.0);
                let k = self.parsed("pbar_points")?.unwrap_or(12);
                linspace(lo, hi, k)
            }
        };
        let points = self.parsed("grid_points")?.unwrap_or(20);
        let p_grid = linspace(
            self.parsed("p_min")?.unwrap_or(1.0 / nf),
            self.parsed("p_max")?.unwrap_or(9.0 / 20.0),
            points,
        );
        let q_grid = linspace(
            self.parsed("q_min")?.unwrap_or(1.0 / nf),
            self.parsed("q_max")?.unwrap_or(9.0 / 20.0),
            points,
        );
        let clique_sizes = match self.list::<usize>("clique_sizes")? {
            Some(v) => v,
            None => {
                let lo = self.parsed("clique_min")?.unwrap_or(n / 20);
                let hi = self.parsed("clique_max")?.unwrap_or(n / 2);
                let k = self.parsed("clique_points")?.unwrap_or(10);
                linspace(lo as f64, hi as f64, k)
                    .into_iter()
                    .map(|x| x.round() as usize)
                    .collect()
            }
        };
        let matrices = match experiment {
            Experiment::PqGrid => vec![MatrixKind::UnnormalizedLaplacian],
            _ => MatrixKind::ALL.to_vec(),
        };
        let cuts = match experiment {
            Experiment::PqGrid => vec![CutRule::Zero],
            _ => CutRule::ALL.to_vec(),
        };
        let trials_default = match experiment {
            Experiment::PqGrid => 3,
            Experiment::EmbedDump => 1,
            _ => 10,
        };
        let defaults = Constants::default();
        let cfg = ExperimentConfig {
            experiment,
            n,
            p,
            q,
            pbar,
            pbar_grid,
            p_grid,
            q_grid,
            clique_sizes,
            clique_size: self.parsed("clique_size")?.unwrap_or(2 * n / 5),
            embed_model: self.parsed("model")?.unwrap_or(EmbedModel::Nssbm),
            matrices: self.list("matrices")?.unwrap_or(matrices),
            cuts: self.list("cuts")?.unwrap_or(cuts),
            trials: self.parsed("trials")?.unwrap_or(trials_default),
            base_seed: self.parsed("base_seed")?.or(env_seed).unwrap_or(0),
            out_dir: self
                .get("out_dir")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out")),
            tol: self.parsed("tol")?,
            dense_cap: self.parsed("dense_cap")?.unwrap_or(crate::operator::DENSE_CAP),
            constants: Constants {
                c: self.parsed("c")?.unwrap_or(defaults.c),
                c1: self.parsed("c1")?.unwrap_or(defaults.c1),
                c2: self.parsed("c2")?.unwrap_or(defaults.c2),
            },
            timing: self.parsed("timing")?.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `k` evenly spaced values from `lo` to `hi` inclusive; `[lo]` when `k == 1`.
pub fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..k)
            .map(|i| {
                if i == k - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (k - 1) as f64
                }
            })
            .collect(),
    }
}

fn check_prob(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {x} outside [0, 1]")))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.matrices.is_empty() || self.cuts.is_empty() {
            return Err(Error::InvalidArgument("matrix and cut lists must be nonempty".into()));
        }
        check_prob("p", self.p)?;
        check_prob("q", self.q)?;
        check_prob("pbar", self.pbar)?;
        let needs_quarter = matches!(self.experiment, Experiment::VaryPbar | Experiment::PqGrid)
            || (self.experiment == Experiment::EmbedDump && self.embed_model == EmbedModel::Nssbm);
        if needs_quarter && self.n % 4 != 0 {
            return Err(Error::InvalidArgument(format!("n = {} must be divisible by 4", self.n)));
        }
        if self.n < 4 || self.n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("n = {} must be even and >= 4", self.n)));
        }
        match self.experiment {
            Experiment::VaryPbar => {
                if self.pbar_grid.is_empty() {
                    return Err(Error::InvalidArgument("pbar grid is empty".into()));
                }
                for &x in &self.pbar_grid {
                    check_prob("pbar", x)?;
                    if x < self.p {
                        return Err(Error::InvalidArgument(format!("pbar = {x} below p = {}", self.p)));
                    }
                }
                if self.q > self.p {
                    return Err(Error::InvalidArgument("need q <= p".into()));
                }
            }
            Experiment::PqGrid => {
                if self.p_grid.is_empty() || self.q_grid.is_empty() {
                    return Err(Error::InvalidArgument("p/q grid is empty".into()));
                }
                for &x in self.p_grid.iter().chain(&self.q_grid) {
                    check_prob("grid value", x)?;
                }
                if !self.p_grid.iter().any(|&p| self.q_grid.iter().any(|&q| p > q)) {
                    return Err(Error::InvalidArgument("grid has no cell with p > q".into()));
                }
                if let Some(&p) = self.p_grid.iter().find(|&&p| p > self.pbar) {
                    return Err(Error::InvalidArgument(format!(
                        "grid value p = {p} exceeds pbar = {}",
                        self.pbar
                    )));
                }
            }
            Experiment::CliqueSweep => {
                if self.clique_sizes.is_empty() {
                    return Err(Error::InvalidArgument("clique size list is empty".into()));
                }
                if let Some(&s) = self.clique_sizes.iter().find(|&&s| s > self.n / 2) {
                    return Err(Error::InvalidArgument(format!(
                        "clique size {s} exceeds n/2 = {}",
                        self.n / 2
                    )));
                }
            }
            Experiment::EmbedDump => {
                if self.embed_model == EmbedModel::Clique && self.clique_size > self.n / 2 {
                    return Err(Error::InvalidArgument(format!(
                        "clique size {} exceeds n/2",
                        self.clique_size
                    )));
                }
                if self.embed_model == EmbedModel::Nssbm && !(self.q <= self.p && self.p <= self.pbar) {
                    return Err(Error::InvalidArgument("need q <= p <= pbar".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_experiment() {
        let raw = RawConfig::parse("experiment = vary-pbar\n# comment\n").unwrap();
        let cfg = raw.resolve(None).unwrap();
        assert_eq!(cfg.n, 2000);
        assert_eq!(cfg.pbar_grid.len(), 12);
        assert_eq!(cfg.pbar_grid[0], cfg.p);
        assert_eq!(*cfg.pbar_grid.last().unwrap(), 1.0);
        assert_eq!(cfg.trials, 10);

        let clique = RawConfig::parse("experiment = clique-sweep").unwrap().resolve(None).unwrap();
        assert_eq!(clique.clique_sizes, vec![100, 200, 300, 400, 500, 600, 700, 800, 900, 1000]);
        assert!((clique.p - 9.0 / 2000f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn overrides_and_seed_fallback() {
        let mut raw = RawConfig::parse("experiment = pq-grid\nn = 256\nbase_seed = 5").unwrap();
        assert_eq!(raw.resolve(Some(9)).unwrap().base_seed, 5);
        raw.apply_overrides(&["grid_points=10", "trials = 2"]).unwrap();
        let cfg = raw.resolve(None).unwrap();
        assert_eq!(cfg.p_grid.len(), 10);
        assert_eq!(cfg.trials, 2);
        let bare = RawConfig::parse("experiment = pq-grid\nn = 256").unwrap();
        assert_eq!(bare.resolve(Some(9)).unwrap().base_seed, 9);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RawConfig::parse("nonsense").is_err());
        assert!(RawConfig::parse("colour = red").is_err());
        let bad = |s: &str| RawConfig::parse(s).unwrap().resolve(None).is_err();
        assert!(bad("experiment = vary-pbar\ntrials = 0"));
        assert!(bad("experiment = clique-sweep\nclique_sizes = 2000"));
        assert!(bad("experiment = vary-pbar\npbar_values = 1.5"));
        assert!(bad("n = 8"));
    }
}
