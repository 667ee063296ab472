use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diffengine::ParameterBlock;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    #[serde(rename = "adamw")]
    AdamW,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::AdamW => "adamw",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "adamw" => Ok(OptimizerKind::AdamW),
            other => Err(Error::Parse(format!("unknown optimizer '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Decoupled decay; used by AdamW only.
    pub weight_decay: f64,
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind) -> Self {
        Self {
            kind,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-4,
        }
    }
}

/// Moment estimates and step count of Adam or AdamW.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, n: usize) -> Self {
        Self {
            config,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// One update of `params.values` from `params.grads`.
    ///
    /// AdamW applies θ ← θ − lr·λ·θ before the Adam step. The parameters
    /// are left unchanged if any updated value would be non-finite.
    pub fn step(&mut self, params: &mut ParameterBlock, lr: f64) -> Result<()> {
        let n = params.len();
        if self.m.len() != n {
            return Err(Error::ShapeMismatch {
                expected: self.m.len(),
                actual: n,
            });
        }
        let c = self.config;
        let t = self.t + 1;
        let bc1 = 1.0 - c.beta1.powi(t as i32);
        let bc2 = 1.0 - c.beta2.powi(t as i32);
        let decay = match c.kind {
            OptimizerKind::Adam => 0.0,
            OptimizerKind::AdamW => lr * c.weight_decay,
        };
        let mut next = params.values.clone();
        let mut m = self.m.clone();
        let mut v = self.v.clone();
        for i in 0..n {
            let g = params.grads[i];
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            let mut theta = next[i];
            if decay != 0.0 {
                theta -= decay * theta;
            }
            theta -= lr * m_hat / (v_hat.sqrt() + c.eps);
            next[i] = theta;
        }
        if let Some(bad) = next.iter().position(|x| !x.is_finite()) {
            let what = params
                .slot_of(bad)
                .map(|s| format!("update of {}", s.label()))
                .unwrap_or_else(|| format!("update of parameter {bad}"));
            return Err(Error::NonFinite { what });
        }
        params.values = next;
        self.m = m;
        self.v = v;
        self.t = t;
        Ok(())
    }
}

/// Step decay: lr = base · factor^⌊epoch / every⌋.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub base_lr: f64,
    /// `None` keeps the rate constant.
    pub decay_every: Option<usize>,
    pub decay_factor: f64,
}

impl Schedule {
    pub fn constant(base_lr: f64) -> Self {
        Self {
            base_lr,
            decay_every: None,
            decay_factor: 1.0,
        }
    }

    pub fn step_decay(base_lr: f64, every: usize, factor: f64) -> Self {
        Self {
            base_lr,
            decay_every: Some(every),
            decay_factor: factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_lr > 0.0 && self.base_lr.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.base_lr
            )));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "decay factor must lie in (0, 1], got {}",
                self.decay_factor
            )));
        }
        if self.decay_every == Some(0) {
            return Err(Error::InvalidArgument("decay interval must be at least 1".into()));
        }
        Ok(())
    }

    pub fn lr(&self, epoch: usize) -> f64 {
        match self.decay_every {
            Some(every) if every > 0 => {
                self.base_lr * self.decay_factor.powi((epoch / every) as i32)
            }
            _ => self.base_lr,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffengine::ParamKind;

    fn one(theta: f64, g: f64) -> ParameterBlock {
        let mut p = ParameterBlock::new();
        p.push(0, ParamKind::Scalar, vec![1]);
        p.values[0] = theta;
        p.grads[0] = g;
        p
    }

    #[test]
    fn adam_first_step_by_hand() {
        let mut p = one(0.0, 2.0);
        let mut s = OptimizerState::new(OptimizerConfig::new(OptimizerKind::Adam), 1);
        s.step(&mut p, 0.1).unwrap();
        assert!((p.values[0] + 0.1 * 2.0 / (2.0 + 1e-8)).abs() < 1e-15);
        assert!((p.values[0] + 0.099_999_999_5).abs() < 1e-12);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn zero_gradient_steps() {
        let mut p = one(0.7, 0.0);
        let mut s = OptimizerState::new(OptimizerConfig::new(OptimizerKind::Adam), 1);
        s.step(&mut p, 0.1).unwrap();
        assert_eq!(p.values[0], 0.7);

        let mut p = one(1.0, 0.0);
        let mut s = OptimizerState::new(OptimizerConfig::new(OptimizerKind::AdamW), 1);
        s.step(&mut p, 0.1).unwrap();
        assert!((p.values[0] - 0.99999).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite_updates() {
        let mut p = one(1.0, f64::NAN);
        let mut s = OptimizerState::new(OptimizerConfig::new(OptimizerKind::Adam), 1);
        assert!(s.step(&mut p, 0.1).is_err());
        assert_eq!(p.values[0], 1.0);
        assert_eq!(s.t, 0);
    }

    #[test]
    fn schedules() {
        let shm = Schedule::step_decay(1e-3, 10_000, 0.1);
        assert_eq!(shm.lr(9_999), 1e-3);
        assert!((shm.lr(10_000) - 1e-4).abs() < 1e-16);
        let nl = Schedule::step_decay(0.01, 1000, 0.2);
        assert!((nl.lr(1000) - 0.002).abs() < 1e-15);
        let c = Schedule::constant(1e-3);
        assert_eq!(c.lr(0), c.lr(123_456));
        assert!(Schedule::step_decay(1e-3, 0, 0.1).validate().is_err());
        assert!(Schedule::step_decay(1e-3, 10, 1.5).validate().is_err());
        assert!(Schedule::constant(0.0).validate().is_err());
    }

    #[test]
    fn names() {
        assert_eq!("AdamW".parse::<OptimizerKind>().unwrap(), OptimizerKind::AdamW);
        assert!("sgd".parse::<OptimizerKind>().is_err());
    }
}
