//! Optimizers, step-decay schedules, the full-batch training loop and
//! evaluation against reference solutions.

mod optimizer;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kan::KanNetwork;
use crate::oracle::{relative_l2, ReferenceSolution};
use crate::problems::{CollocationSet, LossBreakdown, PhysicsLoss, ProblemSpec};

pub use optimizer::{OptimizerConfig, OptimizerKind, OptimizerState, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    pub schedule: Schedule,
    pub seed: u64,
    /// A history row is kept every `log_every` epochs, plus the first and
    /// the last.
    pub log_every: usize,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.log_every == 0 {
            return Err(Error::InvalidArgument("log_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// One line of the loss history; the loss is measured before the update of
/// that epoch, so row `e` reflects `e` completed updates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub epoch: usize,
    pub l_r: f64,
    pub l_ic: f64,
    pub l_bc: f64,
    pub l_data: f64,
    pub total: f64,
    pub lr: f64,
}

impl LossRow {
    pub fn new(epoch: usize, loss: &LossBreakdown, lr: f64) -> Self {
        Self {
            epoch,
            l_r: loss.l_r,
            l_ic: loss.l_ic,
            l_bc: loss.l_bc,
            l_data: loss.l_data,
            total: loss.total,
            lr,
        }
    }

    pub fn loss(&self) -> LossBreakdown {
        LossBreakdown {
            l_r: self.l_r,
            l_ic: self.l_ic,
            l_bc: self.l_bc,
            l_data: self.l_data,
            total: self.total,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// Training stopped at `epoch`; the network holds the last parameters
    /// with a finite loss.
    Aborted { epoch: usize, reason: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SliceError {
    pub t: f64,
    pub relative_l2: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Per output.
    pub relative_l2: Vec<f64>,
    pub max_abs_error: Vec<f64>,
    /// PDE time slices (first output).
    pub slices: Vec<SliceError>,
}

impl Metrics {
    pub fn worst_relative_l2(&self) -> f64 {
        self.relative_l2
            .iter()
            .chain(self.slices.iter().map(|s| &s.relative_l2))
            .fold(0.0, |a: f64, &b| a.max(b))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub rows: Vec<LossRow>,
    pub status: RunStatus,
    pub final_loss: LossBreakdown,
    pub metrics: Option<Metrics>,
    pub wall_seconds: f64,
    pub seed: u64,
    pub config_hash: String,
    /// Where the final parameters were written, when they were.
    pub checkpoint: Option<String>,
}

impl RunRecord {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    /// Total loss of the last recorded row at or before `epoch`.
    pub fn total_at(&self, epoch: usize) -> Option<f64> {
        self.rows.iter().rev().find(|r| r.epoch <= epoch).map(|r| r.total)
    }
}

/// SHA-256 of a JSON rendering of everything that determines a run.
pub fn config_hash(spec: &ProblemSpec, net: &KanNetwork, config: &TrainConfig) -> String {
    let doc = serde_json::json!({
        "problem": spec.id,
        "params": spec.params,
        "weights": spec.weights,
        "data": spec.data,
        "network": net.config(),
        "init_seed": net.seed,
        "train": config,
    });
    let digest = Sha256::digest(doc.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Full-batch training of `net` on `colloc`.
pub fn train(
    spec: &ProblemSpec,
    net: &mut KanNetwork,
    colloc: &CollocationSet,
    config: &TrainConfig,
) -> Result<RunRecord> {
    train_observed(spec, net, colloc, config, |_| {})
}

/// [`train`] with a callback for every recorded history row.
///
/// A non-finite loss, gradient or update ends training early: the network
/// keeps the last parameters whose loss was finite and the record's status
/// says where and why it stopped.
pub fn train_observed(
    spec: &ProblemSpec,
    net: &mut KanNetwork,
    colloc: &CollocationSet,
    config: &TrainConfig,
    mut observe: impl FnMut(&LossRow),
) -> Result<RunRecord> {
    config.validate()?;
    if net.input_dim() != spec.in_dim || net.output_dim() != spec.out_dim {
        return Err(Error::InvalidArchitecture(format!(
            "architecture {:?} does not match problem {} ({} -> {})",
            net.config().architecture,
            spec.id,
            spec.in_dim,
            spec.out_dim
        )));
    }
    let start = Instant::now();
    let objective = PhysicsLoss::new(spec, colloc)?;
    let mut opt = OptimizerState::new(config.optimizer, net.param_count());
    let mut rows = Vec::new();
    let mut last_good = net.params.values.clone();
    let mut last_loss = LossBreakdown::default();
    let mut status = RunStatus::Completed;

    for epoch in 0..=config.epochs {
        let lr = config.schedule.lr(epoch);
        let loss = match net.loss_gradient(&objective) {
            Ok(v) => LossBreakdown::from(&v),
            Err(e) => {
                net.params.values.clone_from(&last_good);
                status = RunStatus::Aborted {
                    epoch,
                    reason: e.to_string(),
                };
                break;
            }
        };
        last_good.clone_from(&net.params.values);
        last_loss = loss;
        if epoch % config.log_every == 0 || epoch == config.epochs {
            let row = LossRow::new(epoch, &loss, lr);
            observe(&row);
            rows.push(row);
        }
        if epoch == config.epochs {
            break;
        }
        if let Err(e) = opt.step(&mut net.params, lr) {
            status = RunStatus::Aborted {
                epoch,
                reason: e.to_string(),
            };
            if rows.last().map(|r| r.epoch) != Some(epoch) {
                rows.push(LossRow::new(epoch, &loss, lr));
            }
            break;
        }
        net.enforce_constraints();
    }

    Ok(RunRecord {
        problem: spec.id.clone(),
        rows,
        status,
        final_loss: last_loss,
        metrics: None,
        wall_seconds: start.elapsed().as_secs_f64(),
        seed: config.seed,
        config_hash: config_hash(spec, net, config),
        checkpoint: None,
    })
}

/// Predictions at every reference point, `[output][point]`.
pub fn predict_on(
    predict: impl Fn(&[f64]) -> Result<Vec<f64>>,
    reference: &ReferenceSolution,
) -> Result<Vec<Vec<f64>>> {
    let outputs = reference.outputs();
    let mut out = vec![Vec::with_capacity(reference.len()); outputs];
    for i in 0..reference.len() {
        let y = predict(reference.point(i))?;
        if y.len() < outputs {
            return Err(Error::ShapeMismatch {
                expected: outputs,
                actual: y.len(),
            });
        }
        for (o, v) in out.iter_mut().enumerate() {
            v.push(y[o]);
        }
    }
    Ok(out)
}

/// Errors of an arbitrary predictor against `reference`.
pub fn evaluate_fn(
    predict: impl Fn(&[f64]) -> Result<Vec<f64>>,
    reference: &ReferenceSolution,
) -> Result<Metrics> {
    let pred = predict_on(&predict, reference)?;
    let mut metrics = Metrics::default();
    for (p, r) in pred.iter().zip(&reference.values) {
        metrics.relative_l2.push(relative_l2(p, r)?);
        metrics.max_abs_error.push(
            p.iter()
                .zip(r)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }
    for slice in &reference.slices {
        let mut p = Vec::with_capacity(slice.x.len());
        for &x in &slice.x {
            p.push(predict(&[x, slice.t])?[0]);
        }
        metrics.slices.push(SliceError {
            t: slice.t,
            relative_l2: relative_l2(&p, &slice.values[0])?,
        });
    }
    Ok(metrics)
}

/// Errors of `net` on the reference's evaluation grid.
pub fn evaluate(net: &KanNetwork, spec: &ProblemSpec, reference: &ReferenceSolution) -> Result<Metrics> {
    if reference.dim != spec.in_dim || reference.outputs() != spec.out_dim {
        return Err(Error::ShapeMismatch {
            expected: spec.out_dim,
            actual: reference.outputs(),
        });
    }
    evaluate_fn(|x| net.predict(x), reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kan::{KanKind, NetworkConfig};
    use crate::problems::{make_problem, sample_collocation};

    fn setup(epochs: usize) -> (ProblemSpec, KanNetwork, CollocationSet, TrainConfig) {
        let spec = make_problem("linear_ode").unwrap();
        let cfg = NetworkConfig::new(vec![1, 3, 1], KanKind::EfficientKan).with_domain(spec.domain.clone());
        let net = KanNetwork::init(cfg, 0).unwrap();
        let colloc = sample_collocation(&spec, 0).unwrap();
        let tc = TrainConfig {
            epochs,
            optimizer: OptimizerConfig::new(OptimizerKind::Adam),
            schedule: Schedule::constant(1e-3),
            seed: 0,
            log_every: 10,
        };
        (spec, net, colloc, tc)
    }

    #[test]
    fn zero_epochs_records_only_the_initial_loss() {
        let (spec, mut net, colloc, tc) = setup(0);
        let before = net.params.values.clone();
        let rec = train(&spec, &mut net, &colloc, &tc).unwrap();
        assert_eq!(rec.rows.len(), 1);
        assert_eq!(rec.rows[0].epoch, 0);
        assert_eq!(net.params.values, before);
        assert!(rec.completed());
    }

    #[test]
    fn rows_and_determinism() {
        let (spec, mut a, colloc, tc) = setup(25);
        let mut b = a.clone();
        let ra = train(&spec, &mut a, &colloc, &tc).unwrap();
        let rb = train(&spec, &mut b, &colloc, &tc).unwrap();
        let epochs: Vec<usize> = ra.rows.iter().map(|r| r.epoch).collect();
        assert_eq!(epochs, vec![0, 10, 20, 25]);
        assert_eq!(ra.rows, rb.rows);
        assert_eq!(a.params.values, b.params.values);
        assert_eq!(ra.config_hash, rb.config_hash);
        assert!(ra.rows[3].total < ra.rows[0].total);
    }

    #[test]
    fn mismatched_architecture_is_rejected() {
        let (spec, _, colloc, tc) = setup(1);
        let mut net = KanNetwork::init(NetworkConfig::new(vec![1, 2], KanKind::WavKan), 0).unwrap();
        assert!(train(&spec, &mut net, &colloc, &tc).is_err());
    }
}
