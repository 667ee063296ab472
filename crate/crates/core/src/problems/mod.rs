//! Benchmark problems: residuals over output jets, initial and boundary
//! conditions, collocation sets and loss assembly.
//!
//! Every loss component is a mean of squared deviations over its points:
//! the residual term averages Σ_eq R_eq² over the residual points, and each
//! condition term averages its squared deviations over the points of its
//! locus. Condition terms of the same kind (initial or boundary) are summed,
//! so a Dirichlet condition on both ends of a PDE domain contributes
//! S₁ + S₂ and a list of single-point conditions contributes the plain sum
//! of their squares.

mod registry;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diffengine::{
    evaluate_objective, Dim, Dual, DualJet, Jet2, JetModel, JetObjective, LossValue,
};
use crate::error::{Error, Result};
use crate::oracle;

pub use registry::{allen_cahn_ic, make_problem, make_problem_with, PROBLEM_IDS};

/// Most equations (or deviations) any residual or condition produces.
pub const MAX_EQS: usize = 3;

/// Residual or deviation values; entries past the declared count are zero.
pub type Equations = [Dual; MAX_EQS];

/// `(output jets, raw coordinates) -> equations`.
pub type PointFn = Arc<dyn Fn(&[DualJet], &[f64]) -> Equations + Send + Sync>;

/// Pack up to [`MAX_EQS`] values, padding with zeros.
pub fn eqs(values: &[Dual]) -> Equations {
    let mut out = [Dual::constant(0.0); MAX_EQS];
    out[..values.len()].copy_from_slice(values);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Residual,
    Ic,
    Bc,
    Data,
}

impl Component {
    pub const ALL: [Component; 4] = [
        Component::Residual,
        Component::Ic,
        Component::Bc,
        Component::Data,
    ];

    pub fn index(self) -> usize {
        match self {
            Component::Residual => 0,
            Component::Ic => 1,
            Component::Bc => 2,
            Component::Data => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::Residual => "l_r",
            Component::Ic => "l_ic",
            Component::Bc => "l_bc",
            Component::Data => "l_data",
        }
    }
}

/// Where a condition is imposed.
#[derive(Clone, Debug, PartialEq)]
pub enum Locus {
    /// A single point.
    Point(Vec<f64>),
    /// The grid line with coordinate `axis` fixed at `value`; the other
    /// axis runs over the collocation grid.
    Line { axis: usize, value: f64 },
}

#[derive(Clone)]
pub struct Condition {
    pub name: String,
    pub component: Component,
    pub locus: Locus,
    /// Number of deviations `eval` produces.
    pub count: usize,
    /// Highest input-derivative order the deviations use.
    pub order: usize,
    pub eval: PointFn,
}

impl fmt::Debug for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Condition")
            .field("name", &self.name)
            .field("component", &self.component)
            .field("locus", &self.locus)
            .field("count", &self.count)
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub r: f64,
    pub ic: f64,
    pub bc: f64,
    pub data: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            r: 1.0,
            ic: 1.0,
            bc: 1.0,
            data: 1.0,
        }
    }
}

impl Weights {
    pub fn get(&self, c: Component) -> f64 {
        match c {
            Component::Residual => self.r,
            Component::Ic => self.ic,
            Component::Bc => self.bc,
            Component::Data => self.data,
        }
    }
}

/// Supervised term drawn from the reference solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    pub fraction: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    ClosedForm,
    Rk4,
    Mol,
}

impl OracleKind {
    pub fn name(self) -> &'static str {
        match self {
            OracleKind::ClosedForm => "closed_form",
            OracleKind::Rk4 => "rk4",
            OracleKind::Mol => "mol",
        }
    }
}

/// One benchmark equation with its conditions and loss settings.
#[derive(Clone)]
pub struct ProblemSpec {
    pub id: String,
    /// Problem family, e.g. `mathieu` for all three Mathieu cases.
    pub family: &'static str,
    pub in_dim: usize,
    pub out_dim: usize,
    pub domain: Vec<(f64, f64)>,
    pub axis_names: Vec<&'static str>,
    pub output_names: Vec<&'static str>,
    pub residual: PointFn,
    pub residual_count: usize,
    /// Highest input-derivative order the residual uses.
    pub residual_order: usize,
    pub conditions: Vec<Condition>,
    pub weights: Weights,
    /// Collocation points per axis.
    pub points_per_axis: usize,
    pub data: Option<DataConfig>,
    pub oracle: OracleKind,
    /// Physical constants, e.g. `omega0`, `sigma`.
    pub params: BTreeMap<String, f64>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("conditions", &self.conditions)
            .field("weights", &self.weights)
            .field("data", &self.data)
            .field("oracle", &self.oracle)
            .field("params", &self.params)
            .finish()
    }
}

impl ProblemSpec {
    pub fn dim(&self) -> Dim {
        Dim::new(self.in_dim).expect("problem input dimension is 1 or 2")
    }

    pub fn is_pde(&self) -> bool {
        self.in_dim == 2
    }

    pub fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    /// Equally spaced points on axis `a`, endpoints included.
    pub fn axis_grid(&self, a: usize) -> Vec<f64> {
        let (lo, hi) = self.domain[a];
        linspace(lo, hi, self.points_per_axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain.len() != self.in_dim || self.domain.iter().any(|&(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidArgument(format!(
                "problem {}: every domain axis needs lo < hi",
                self.id
            )));
        }
        let w = self.weights;
        if [w.r, w.ic, w.bc, w.data].iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "problem {}: loss weights must be nonnegative",
                self.id
            )));
        }
        if self.points_per_axis < 2 {
            return Err(Error::InvalidArgument(format!(
                "problem {}: need at least two collocation points per axis",
                self.id
            )));
        }
        if let Some(d) = self.data {
            if !(d.fraction > 0.0 && d.fraction <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "data fraction {} outside (0, 1]",
                    d.fraction
                )));
            }
        }
        Ok(())
    }
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + i as f64 * h })
                .collect()
        }
    }
}

/// Residual values at one point, from output jets and raw coordinates.
pub fn residual_eval(spec: &ProblemSpec, outputs: &[Jet2], coords: &[f64]) -> Result<Vec<f64>> {
    if outputs.len() != spec.out_dim {
        return Err(Error::ShapeMismatch {
            expected: spec.out_dim,
            actual: outputs.len(),
        });
    }
    if coords.len() != spec.in_dim {
        return Err(Error::ShapeMismatch {
            expected: spec.in_dim,
            actual: coords.len(),
        });
    }
    if let Some(j) = outputs.iter().find(|j| j.dim() != spec.dim()) {
        return Err(Error::DimensionMismatch {
            left: j.dim().get(),
            right: spec.in_dim,
        });
    }
    let lifted: Vec<DualJet> = outputs.iter().map(DualJet::lift).collect();
    let r = (spec.residual)(&lifted, coords);
    Ok(r[..spec.residual_count].iter().map(|d| d.value).collect())
}

/// Condition deviations at one point.
pub fn condition_eval(cond: &Condition, outputs: &[Jet2], coords: &[f64]) -> Vec<f64> {
    let lifted: Vec<DualJet> = outputs.iter().map(DualJet::lift).collect();
    let r = (cond.eval)(&lifted, coords);
    r[..cond.count].iter().map(|d| d.value).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataPoint {
    pub coords: Vec<f64>,
    pub target: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionPoints {
    /// Index into [`ProblemSpec::conditions`].
    pub term: usize,
    pub points: Vec<Vec<f64>>,
}

/// Fixed training points for one problem.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationSet {
    pub residual: Vec<Vec<f64>>,
    pub conditions: Vec<ConditionPoints>,
    pub data: Vec<DataPoint>,
}

impl CollocationSet {
    fn points_of(&self, spec: &ProblemSpec, c: Component) -> Vec<Vec<f64>> {
        self.conditions
            .iter()
            .filter(|cp| spec.conditions[cp.term].component == c)
            .flat_map(|cp| cp.points.iter().cloned())
            .collect()
    }

    pub fn ic_points(&self, spec: &ProblemSpec) -> Vec<Vec<f64>> {
        self.points_of(spec, Component::Ic)
    }

    pub fn bc_points(&self, spec: &ProblemSpec) -> Vec<Vec<f64>> {
        self.points_of(spec, Component::Bc)
    }
}

/// Equally spaced residual points (a tensor grid for PDEs, axis 0 running
/// fastest), condition points on their loci, and for data-driven problems a
/// seeded sample of the reference field.
pub fn sample_collocation(spec: &ProblemSpec, seed: u64) -> Result<CollocationSet> {
    spec.validate()?;
    let grids: Vec<Vec<f64>> = (0..spec.in_dim).map(|a| spec.axis_grid(a)).collect();
    let residual = if spec.in_dim == 1 {
        grids[0].iter().map(|&x| vec![x]).collect()
    } else {
        grids[1]
            .iter()
            .flat_map(|&t| grids[0].iter().map(move |&x| vec![x, t]))
            .collect()
    };
    let conditions = spec
        .conditions
        .iter()
        .enumerate()
        .map(|(term, c)| {
            let points = match &c.locus {
                Locus::Point(p) => vec![p.clone()],
                Locus::Line { axis, value } => {
                    let other = 1 - axis;
                    grids[other]
                        .iter()
                        .map(|&s| {
                            let mut p = vec![0.0; 2];
                            p[*axis] = *value;
                            p[other] = s;
                            p
                        })
                        .collect()
                }
            };
            ConditionPoints { term, points }
        })
        .collect();
    let data = match spec.data {
        Some(cfg) => {
            let reference = oracle::reference_solution(spec, &oracle::Resolution::default())?;
            let sample = oracle::sample_data(&reference, cfg.fraction, seed)?;
            sample
                .indices
                .iter()
                .map(|&i| DataPoint {
                    coords: reference.point(i).to_vec(),
                    target: reference.values.iter().map(|v| v[i]).collect(),
                })
                .collect()
        }
        None => Vec::new(),
    };
    Ok(CollocationSet {
        residual,
        conditions,
        data,
    })
}

#[derive(Clone, Copy, Debug)]
enum SiteKind {
    Residual,
    Condition(usize),
    Data(usize),
}

/// The weighted physics loss of one problem over one collocation set.
pub struct PhysicsLoss<'a> {
    spec: &'a ProblemSpec,
    colloc: &'a CollocationSet,
    coords: Vec<f64>,
    kinds: Vec<SiteKind>,
    /// 1 / (number of points in the term the site belongs to).
    scales: Vec<f64>,
    weights: [f64; 4],
}

impl<'a> PhysicsLoss<'a> {
    pub fn new(spec: &'a ProblemSpec, colloc: &'a CollocationSet) -> Result<Self> {
        let d = spec.in_dim;
        let mut coords = Vec::new();
        let mut kinds = Vec::new();
        let mut scales = Vec::new();
        let mut push = |p: &[f64], kind: SiteKind, scale: f64| -> Result<()> {
            if p.len() != d {
                return Err(Error::ShapeMismatch {
                    expected: d,
                    actual: p.len(),
                });
            }
            coords.extend_from_slice(p);
            kinds.push(kind);
            scales.push(scale);
            Ok(())
        };
        if colloc.residual.is_empty() {
            return Err(Error::InvalidArgument("no residual points".into()));
        }
        let s = 1.0 / colloc.residual.len() as f64;
        for p in &colloc.residual {
            push(p, SiteKind::Residual, s)?;
        }
        for cp in &colloc.conditions {
            if cp.term >= spec.conditions.len() {
                return Err(Error::InvalidArgument(format!(
                    "condition term {} does not exist",
                    cp.term
                )));
            }
            let s = 1.0 / cp.points.len().max(1) as f64;
            for p in &cp.points {
                push(p, SiteKind::Condition(cp.term), s)?;
            }
        }
        if !colloc.data.is_empty() {
            let s = 1.0 / colloc.data.len() as f64;
            for (i, dp) in colloc.data.iter().enumerate() {
                if dp.target.len() != spec.out_dim || dp.target.iter().any(|t| !t.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "data point {i} needs {} finite targets",
                        spec.out_dim
                    )));
                }
                push(&dp.coords, SiteKind::Data(i), s)?;
            }
        }
        let w = spec.weights;
        Ok(Self {
            spec,
            colloc,
            coords,
            kinds,
            scales,
            weights: [w.r, w.ic, w.bc, w.data],
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }
}

impl JetObjective for PhysicsLoss<'_> {
    fn site_count(&self) -> usize {
        self.kinds.len()
    }

    fn coords(&self, site: usize) -> &[f64] {
        let d = self.spec.in_dim;
        &self.coords[site * d..(site + 1) * d]
    }

    fn component_count(&self) -> usize {
        4
    }

    fn weight(&self, component: usize) -> f64 {
        self.weights[component]
    }

    fn component_name(&self, component: usize) -> String {
        Component::ALL[component].name().to_string()
    }

    fn eval(&self, site: usize, outputs: &[DualJet]) -> (usize, Dual) {
        let x = self.coords(site);
        let scale = self.scales[site];
        let sum_sq = |v: &[Dual]| {
            let mut acc = Dual::constant(0.0);
            for e in v {
                acc += e.square();
            }
            acc * scale
        };
        match self.kinds[site] {
            SiteKind::Residual => {
                let r = (self.spec.residual)(outputs, x);
                (0, sum_sq(&r[..self.spec.residual_count]))
            }
            SiteKind::Condition(term) => {
                let c = &self.spec.conditions[term];
                let r = (c.eval)(outputs, x);
                (c.component.index(), sum_sq(&r[..c.count]))
            }
            SiteKind::Data(i) => {
                let target = &self.colloc.data[i].target;
                let mut dev = [Dual::constant(0.0); MAX_EQS];
                for (o, t) in target.iter().enumerate() {
                    dev[o] = outputs[o].val() - *t;
                }
                (3, sum_sq(&dev[..target.len()]))
            }
        }
    }
}

/// Loss components and their weighted total.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_r: f64,
    pub l_ic: f64,
    pub l_bc: f64,
    pub l_data: f64,
    pub total: f64,
}

impl From<&LossValue> for LossBreakdown {
    fn from(v: &LossValue) -> Self {
        Self {
            l_r: v.components[0],
            l_ic: v.components[1],
            l_bc: v.components[2],
            l_data: v.components[3],
            total: v.total,
        }
    }
}

impl LossBreakdown {
    pub fn get(&self, c: Component) -> f64 {
        match c {
            Component::Residual => self.l_r,
            Component::Ic => self.l_ic,
            Component::Bc => self.l_bc,
            Component::Data => self.l_data,
        }
    }
}

/// Loss of `model` with parameters `params` over `colloc`.
pub fn compute_loss<M: JetModel>(
    spec: &ProblemSpec,
    model: &M,
    params: &[f64],
    colloc: &CollocationSet,
) -> Result<LossBreakdown> {
    if model.input_dim().get() != spec.in_dim || model.output_dim() != spec.out_dim {
        return Err(Error::InvalidArchitecture(format!(
            "model maps {} -> {} but problem {} needs {} -> {}",
            model.input_dim().get(),
            model.output_dim(),
            spec.id,
            spec.in_dim,
            spec.out_dim
        )));
    }
    let objective = PhysicsLoss::new(spec, colloc)?;
    let v = evaluate_objective(model, params, &objective)?;
    Ok(LossBreakdown::from(&v))
}

/// ŷ ↦ y_a + (x − a)·ŷ, which satisfies y(a) = y_a for any ŷ.
pub fn hard_constraint_transform(net_output: &Jet2, x: &Jet2, a: f64, y_a: f64) -> Result<Jet2> {
    if net_output.dim() != Dim::One || x.dim() != Dim::One {
        return Err(Error::InvalidDimension(net_output.dim().get().max(x.dim().get())));
    }
    Ok((x.add_const(-a) * *net_output).add_const(y_a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let g = linspace(-1.0, 1.0, 100);
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[99], 1.0);
        assert!((g[1] - (-1.0 + 2.0 / 99.0)).abs() < 1e-15);
    }

    #[test]
    fn hard_constraint_examples() {
        let x = Jet2::seed(0.7, 0, Dim::One).unwrap();
        let one = Jet2::constant(1.0, Dim::One);
        let y = hard_constraint_transform(&one, &x, 0.0, 1.0).unwrap();
        assert!((y.value - 1.7).abs() < 1e-15);
        assert_eq!(y.d(0), 1.0);

        let at_a = Jet2::seed(0.3, 0, Dim::One).unwrap();
        let net = Jet2::from_parts(5.0, [2.0, 0.0], [1.0, 0.0, 0.0], Dim::One);
        let y = hard_constraint_transform(&net, &at_a, 0.3, -2.0).unwrap();
        assert_eq!(y.value, -2.0);
        assert_eq!(y.d(0), 5.0);

        let two = Jet2::constant(0.0, Dim::Two);
        assert!(hard_constraint_transform(&two, &two, 0.0, 0.0).is_err());
    }

    #[test]
    fn residual_eval_checks_shapes() {
        let spec = make_problem("linear_ode").unwrap();
        let j = Jet2::constant(0.0, Dim::One);
        assert!(residual_eval(&spec, &[j, j], &[0.0]).is_err());
        assert!(residual_eval(&spec, &[j], &[0.0, 1.0]).is_err());
        let j2 = Jet2::constant(0.0, Dim::Two);
        assert!(residual_eval(&spec, &[j2], &[0.0]).is_err());
    }
}
