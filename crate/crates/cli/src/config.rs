//! Run configuration: flat `key=value` text with dotted keys, layered over
//! the published defaults of a problem.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use pikan::benchmarks::benchmark;
use pikan::kan::{BaseActivation, KanKind, Mother, NetworkConfig};
use pikan::problems::{make_problem_with, DataConfig, ProblemSpec};
use pikan::train::{OptimizerConfig, OptimizerKind, Schedule, TrainConfig};
use serde::{Deserialize, Serialize};

/// Every key a config file may set, besides `param.<name>`.
pub const KEYS: [&str; 16] = [
    "problem",
    "kind",
    "arch",
    "spline.order",
    "spline.grid",
    "spline.base",
    "wavelet.mother",
    "optimizer",
    "optimizer.weight_decay",
    "lr",
    "schedule.decay_every",
    "schedule.decay_factor",
    "epochs",
    "seed",
    "log_every",
    "data.fraction",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: String,
    pub kind: KanKind,
    pub architecture: Vec<usize>,
    pub spline_order: usize,
    pub grid_size: usize,
    pub base: BaseActivation,
    pub wavelet: Mother,
    pub optimizer: OptimizerKind,
    pub weight_decay: f64,
    pub lr: f64,
    pub decay_every: Option<usize>,
    pub decay_factor: f64,
    pub epochs: usize,
    pub seed: u64,
    pub log_every: usize,
    /// Fraction of the reference grid used as supervised data; `None`
    /// trains on physics alone.
    pub data_fraction: Option<f64>,
    /// Physical constants that differ from the problem defaults.
    pub params: BTreeMap<String, f64>,
}

/// Overrides given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub problem: Option<String>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub arch: Option<String>,
    pub kind: Option<String>,
}

impl RunConfig {
    /// The published configuration of `problem` with seed 0.
    pub fn defaults(problem: &str) -> Result<Self> {
        let b = benchmark(problem)?;
        let spec = make_problem_with(problem, &BTreeMap::new())?;
        let net = NetworkConfig::new(b.architecture.clone(), b.kind);
        let opt = OptimizerConfig::new(b.optimizer);
        Ok(Self {
            problem: problem.to_string(),
            kind: b.kind,
            architecture: b.architecture,
            spline_order: net.spline_order,
            grid_size: net.grid_size,
            base: net.base,
            wavelet: net.mother,
            optimizer: b.optimizer,
            weight_decay: opt.weight_decay,
            lr: b.schedule.base_lr,
            decay_every: b.schedule.decay_every,
            decay_factor: b.schedule.decay_factor,
            epochs: b.epochs,
            seed: 0,
            log_every: 100,
            data_fraction: spec.data.map(|d| d.fraction),
            params: BTreeMap::new(),
        })
    }

    /// Defaults of the chosen problem, then `file` entries, then flags.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let entries = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                parse_entries(&text).with_context(|| format!("in config {}", path.display()))?
            }
            None => Vec::new(),
        };
        let from_file = entries.iter().find(|(k, _)| k == "problem").map(|(_, v)| v.clone());
        let problem = flags
            .problem
            .clone()
            .or(from_file)
            .ok_or_else(|| anyhow!("no problem given; pass --problem or set problem= in a config"))?;
        let mut cfg = Self::defaults(&problem)?;
        for (key, value) in &entries {
            if key != "problem" {
                cfg.set(key, value).with_context(|| format!("config key '{key}'"))?;
            }
        }
        if let Some(s) = flags.seed {
            cfg.seed = s;
        }
        if let Some(e) = flags.epochs {
            cfg.epochs = e;
        }
        if let Some(lr) = flags.lr {
            cfg.lr = lr;
        }
        if let Some(a) = &flags.arch {
            cfg.set("arch", a).context("--arch")?;
        }
        if let Some(k) = &flags.kind {
            cfg.set("kind", k).context("--kind")?;
        }
        cfg.problem_spec()?;
        cfg.network_config().validate()?;
        cfg.train_config().validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if let Some(name) = key.strip_prefix("param.") {
            self.params.insert(name.to_string(), num(value)?);
            return Ok(());
        }
        match key {
            "kind" => self.kind = KanKind::from_str(value)?,
            "arch" => self.architecture = parse_arch(value)?,
            "spline.order" => self.spline_order = num(value)?,
            "spline.grid" => self.grid_size = num(value)?,
            "spline.base" => self.base = BaseActivation::from_str(value)?,
            "wavelet.mother" => self.wavelet = Mother::from_str(value)?,
            "optimizer" => self.optimizer = OptimizerKind::from_str(value)?,
            "optimizer.weight_decay" => self.weight_decay = num(value)?,
            "lr" => self.lr = num(value)?,
            "schedule.decay_every" => {
                self.decay_every = match value {
                    "none" | "0" => None,
                    v => Some(num(v)?),
                }
            }
            "schedule.decay_factor" => self.decay_factor = num(value)?,
            "epochs" => self.epochs = num(value)?,
            "seed" => self.seed = num(value)?,
            "log_every" => self.log_every = num(value)?,
            "data.fraction" => {
                self.data_fraction = match value {
                    "none" | "0" => None,
                    v => Some(num(v)?),
                }
            }
            other => bail!("unknown key '{other}'"),
        }
        Ok(())
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let mut spec = make_problem_with(&self.problem, &self.params)?;
        spec.data = self.data_fraction.map(|fraction| DataConfig { fraction });
        if let Some(f) = self.data_fraction {
            if !(f > 0.0 && f <= 1.0) {
                bail!("data.fraction must lie in (0, 1], got {f}");
            }
        }
        let arch = &self.architecture;
        if arch.first() != Some(&spec.in_dim) || arch.last() != Some(&spec.out_dim) {
            bail!(
                "architecture {arch:?} does not match {} ({} inputs, {} outputs)",
                spec.id,
                spec.in_dim,
                spec.out_dim
            );
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn network_config(&self) -> NetworkConfig {
        let mut net = NetworkConfig::new(self.architecture.clone(), self.kind);
        net.spline_order = self.spline_order;
        net.grid_size = self.grid_size;
        net.base = self.base;
        net.mother = self.wavelet;
        if let Ok(spec) = make_problem_with(&self.problem, &self.params) {
            net.domain = spec.domain;
        }
        net
    }

    pub fn train_config(&self) -> TrainConfig {
        let mut optimizer = OptimizerConfig::new(self.optimizer);
        optimizer.weight_decay = self.weight_decay;
        TrainConfig {
            epochs: self.epochs,
            optimizer,
            schedule: Schedule {
                base_lr: self.lr,
                decay_every: self.decay_every,
                decay_factor: self.decay_factor,
            },
            seed: self.seed,
            log_every: self.log_every,
        }
    }

    /// Canonical config file text; parsing it gives back `self`.
    pub fn to_text(&self) -> String {
        let arch: Vec<String> = self.architecture.iter().map(|w| w.to_string()).collect();
        let mut s = String::new();
        let mut line = |k: &str, v: String| writeln!(s, "{k}={v}").unwrap();
        line("problem", self.problem.clone());
        line("kind", self.kind.name().into());
        line("arch", arch.join(","));
        line("spline.order", self.spline_order.to_string());
        line("spline.grid", self.grid_size.to_string());
        line("spline.base", self.base.name().into());
        line("wavelet.mother", self.wavelet.name().into());
        line("optimizer", self.optimizer.name().into());
        line("optimizer.weight_decay", self.weight_decay.to_string());
        line("lr", self.lr.to_string());
        line(
            "schedule.decay_every",
            self.decay_every.map_or("none".into(), |e| e.to_string()),
        );
        line("schedule.decay_factor", self.decay_factor.to_string());
        line("epochs", self.epochs.to_string());
        line("seed", self.seed.to_string());
        line("log_every", self.log_every.to_string());
        line(
            "data.fraction",
            self.data_fraction.map_or("none".into(), |f| f.to_string()),
        );
        for (k, v) in &self.params {
            line(&format!("param.{k}"), v.to_string());
        }
        s
    }
}

fn num<T: FromStr>(value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("cannot parse '{value}': {e}"))
}

fn parse_arch(value: &str) -> Result<Vec<usize>> {
    value
        .trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .map(|w| num(w.trim()))
        .collect()
}

/// `key=value` pairs in file order. Blank lines and `#` comments are
/// skipped; repeated keys are an error.
pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value, got '{raw}'", n + 1))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        let known = KEYS.contains(&k.as_str()) || k.starts_with("param.");
        if !known {
            bail!("line {}: unknown key '{k}'", n + 1);
        }
        if out.iter().any(|(seen, _)| *seen == k) {
            bail!("line {}: key '{k}' given twice", n + 1);
        }
        out.push((k, v));
    }
    Ok(out)
}
