//! Exact parameter gradients of point-wise losses over jet-forward
//! evaluations.
//!
//! A loss is a weighted sum of components; each component is a sum of
//! per-site contributions that depend on the model's output jets at that
//! site. For every site the model runs a jet forward pass, the contribution
//! is evaluated over [`Dual`]s to obtain its partials with respect to the
//! output jet components, and the model's reverse sweep accumulates
//! ∂L/∂θ. Sites are processed in index order so results are bit-identical
//! between runs.

use super::dual::{Dual, DualJet, JetAdjoint};
use super::jet::{Dim, Jet2};
use super::params::ParameterBlock;
use crate::error::{Error, Result};

/// A model producing output jets with an exact reverse sweep over its
/// parameters.
pub trait JetModel {
    type Tape: Default;

    fn input_dim(&self) -> Dim;
    fn output_dim(&self) -> usize;

    /// Output jets at raw input `x`; records what [`JetModel::backward`]
    /// needs in `tape`.
    fn forward(
        &self,
        params: &[f64],
        x: &[f64],
        tape: &mut Self::Tape,
        out: &mut Vec<Jet2>,
    ) -> Result<()>;

    /// Accumulate ∂L/∂θ into `grads` given ∂L/∂(output jets) for the last
    /// forward call recorded in `tape`.
    fn backward(
        &self,
        params: &[f64],
        tape: &mut Self::Tape,
        out_adjoint: &[JetAdjoint],
        grads: &mut [f64],
    );
}

/// A loss assembled from per-site contributions.
pub trait JetObjective {
    fn site_count(&self) -> usize;
    fn coords(&self, site: usize) -> &[f64];
    fn component_count(&self) -> usize;
    fn weight(&self, component: usize) -> f64;
    fn component_name(&self, component: usize) -> String {
        format!("component {component}")
    }
    /// Unweighted contribution of `site` and the component it feeds.
    fn eval(&self, site: usize, outputs: &[DualJet]) -> (usize, Dual);
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossValue {
    pub total: f64,
    pub components: Vec<f64>,
}

fn seed_outputs(outputs: &[Jet2], dim: Dim, lifted: &mut Vec<DualJet>) {
    let stride = dim.jet_len();
    lifted.clear();
    lifted.extend(
        outputs
            .iter()
            .enumerate()
            .map(|(o, jet)| DualJet::seeded(jet, o * stride)),
    );
}

fn check_finite<O: JetObjective>(objective: &O, value: &LossValue) -> Result<()> {
    for (c, v) in value.components.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: objective.component_name(c),
            });
        }
    }
    if !value.total.is_finite() {
        return Err(Error::NonFinite {
            what: "total loss".into(),
        });
    }
    Ok(())
}

/// Loss value only; no gradient work.
pub fn evaluate_objective<M: JetModel, O: JetObjective>(
    model: &M,
    params: &[f64],
    objective: &O,
) -> Result<LossValue> {
    let mut tape = M::Tape::default();
    let mut outputs = Vec::with_capacity(model.output_dim());
    let mut lifted = Vec::with_capacity(model.output_dim());
    let mut components = vec![0.0; objective.component_count()];
    for site in 0..objective.site_count() {
        model.forward(params, objective.coords(site), &mut tape, &mut outputs)?;
        lifted.clear();
        lifted.extend(outputs.iter().map(DualJet::lift));
        let (c, contribution) = objective.eval(site, &lifted);
        components[c] += contribution.value;
    }
    let total = components
        .iter()
        .enumerate()
        .map(|(c, v)| objective.weight(c) * v)
        .sum();
    let value = LossValue { total, components };
    check_finite(objective, &value)?;
    Ok(value)
}

/// L(θ) and exact ∂L/∂θ written into `params.grads` (zeroed first).
/// `params.values` is not modified.
pub fn loss_gradient<M: JetModel, O: JetObjective>(
    model: &M,
    params: &mut ParameterBlock,
    objective: &O,
) -> Result<LossValue> {
    params.zero_grads();
    let dim = model.input_dim();
    let stride = dim.jet_len();
    let mut tape = M::Tape::default();
    let mut outputs = Vec::with_capacity(model.output_dim());
    let mut lifted = Vec::with_capacity(model.output_dim());
    let mut adjoints = vec![JetAdjoint::default(); model.output_dim()];
    let mut components = vec![0.0; objective.component_count()];
    let weights: Vec<f64> = (0..components.len()).map(|c| objective.weight(c)).collect();

    for site in 0..objective.site_count() {
        model.forward(&params.values, objective.coords(site), &mut tape, &mut outputs)?;
        seed_outputs(&outputs, dim, &mut lifted);
        let (c, contribution) = objective.eval(site, &lifted);
        components[c] += contribution.value;
        let w = weights[c];
        if w == 0.0 {
            continue;
        }
        for (o, adj) in adjoints.iter_mut().enumerate() {
            *adj = JetAdjoint::from_partials(&contribution.partials, o * stride, dim, w);
        }
        model.backward(&params.values, &mut tape, &adjoints, &mut params.grads);
    }

    let total = components.iter().zip(&weights).map(|(v, w)| w * v).sum();
    let value = LossValue { total, components };
    check_finite(objective, &value)?;
    if let Some(bad) = params.grads.iter().position(|g| !g.is_finite()) {
        let what = params
            .slot_of(bad)
            .map(|s| format!("gradient of {}", s.label()))
            .unwrap_or_else(|| format!("gradient entry {bad}"));
        return Err(Error::NonFinite { what });
    }
    Ok(value)
}

/// Max over parameters of |analytic − central difference| / max(1, |analytic|).
pub fn finite_difference_check<M: JetModel, O: JetObjective>(
    model: &M,
    params: &ParameterBlock,
    objective: &O,
    step: f64,
) -> Result<f64> {
    if step <= 0.0 {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let mut work = params.clone();
    loss_gradient(model, &mut work, objective)?;
    let analytic = work.grads.clone();
    let mut worst: f64 = 0.0;
    for i in 0..work.values.len() {
        let orig = params.values[i];
        work.values[i] = orig + step;
        let plus = evaluate_objective(model, &work.values, objective)?.total;
        work.values[i] = orig - step;
        let minus = evaluate_objective(model, &work.values, objective)?.total;
        work.values[i] = orig;
        let fd = (plus - minus) / (2.0 * step);
        let err = (analytic[i] - fd).abs() / analytic[i].abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}
