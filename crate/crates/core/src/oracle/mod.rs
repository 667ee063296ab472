//! Reference solutions and error metrics.
//!
//! Closed forms are used where they exist, fixed-step RK4 for the initial
//! value problems without one, and a central-difference method-of-lines
//! solver for the PDEs. None of these share code with the training stack.

mod closed;
mod mol;
mod rk4;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{linspace, OracleKind, ProblemSpec};

pub use closed::{closed_form, closed_form_jets, ClosedFormModel};
pub use mol::{mol_grid_sizes, mol_solve};
pub use rk4::{ivp_system, rk4_solve, IvpSystem};

/// Points on the evaluation grid of one-dimensional problems.
pub const ODE_EVAL_POINTS: usize = 1000;
/// Time slices exported for PDE comparisons.
pub const PDE_SLICES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// RK4 steps over the whole time span.
    pub rk4_steps: usize,
    /// Minimum number of spatial intervals for the method of lines.
    pub nx: usize,
    /// Minimum number of time steps for the method of lines; `None` picks
    /// the smallest count meeting the stability bounds.
    pub nt: Option<usize>,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            rk4_steps: 100_000,
            nx: 512,
            nt: None,
        }
    }
}

/// One exported time slice of a PDE solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSlice {
    pub t: f64,
    pub x: Vec<f64>,
    /// `values[output][j]` at `x[j]`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub step: Option<f64>,
    pub n_steps: Option<usize>,
    pub nx: Option<usize>,
    pub nt: Option<usize>,
}

/// Reference values at a list of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub method: OracleKind,
    pub dim: usize,
    /// Flat point coordinates, `dim` entries per point.
    pub coords: Vec<f64>,
    /// `values[output][point]`.
    pub values: Vec<Vec<f64>>,
    pub info: SolverInfo,
    /// PDE slices at [`PDE_SLICES`]; empty for ODEs.
    pub slices: Vec<TimeSlice>,
}

impl ReferenceSolution {
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn outputs(&self) -> usize {
        self.values.len()
    }

    /// Values of all outputs at point `i`.
    pub fn at(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[i]).collect()
    }

    /// Linear interpolation in a one-dimensional solution whose points are
    /// sorted ascending.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        if self.dim != 1 || self.is_empty() {
            return Err(Error::InvalidArgument(
                "interpolation needs a non-empty one-dimensional solution".into(),
            ));
        }
        let ts = &self.coords;
        let (lo, hi) = (ts[0], ts[ts.len() - 1]);
        let tol = 1e-12 * (hi - lo).abs().max(1.0);
        if t < lo - tol || t > hi + tol {
            return Err(Error::OutOfDomain { value: t, lo, hi });
        }
        let i = ts.partition_point(|&s| s <= t).clamp(1, ts.len().max(2) - 1);
        if ts.len() == 1 {
            return Ok(self.at(0));
        }
        let (t0, t1) = (ts[i - 1], ts[i]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        Ok(self
            .values
            .iter()
            .map(|v| v[i - 1] + w * (v[i] - v[i - 1]))
            .collect())
    }

    /// Keep only the first `n` outputs.
    pub fn truncate_outputs(mut self, n: usize) -> Self {
        self.values.truncate(n);
        for s in &mut self.slices {
            s.values.truncate(n);
        }
        self
    }
}

/// The reference used for evaluation: ODEs on a 1000-point grid over the
/// domain, PDEs on the 100×100 collocation grid plus time slices.
pub fn reference_solution(spec: &ProblemSpec, res: &Resolution) -> Result<ReferenceSolution> {
    if spec.is_pde() {
        return mol_solve(spec, res.nx, res.nt);
    }
    let (lo, hi) = spec.domain[0];
    let grid = linspace(lo, hi, ODE_EVAL_POINTS);
    match spec.oracle {
        OracleKind::ClosedForm => closed_form(spec, &grid),
        OracleKind::Rk4 => {
            let sys = ivp_system(spec)?;
            let traj = rk4_solve(|t, y, dy| (sys.field)(t, y, dy), &sys.y0, (lo, hi), res.rk4_steps)?;
            let mut values = vec![Vec::with_capacity(grid.len()); spec.out_dim];
            for &t in &grid {
                let y = traj.interpolate(t)?;
                for (o, v) in values.iter_mut().enumerate() {
                    v.push(y[o]);
                }
            }
            Ok(ReferenceSolution {
                method: OracleKind::Rk4,
                dim: 1,
                coords: grid,
                values,
                info: traj.info,
                slices: Vec::new(),
            })
        }
        OracleKind::Mol => Err(Error::InvalidArgument(format!(
            "problem {} is not a PDE",
            spec.id
        ))),
    }
}

/// A seeded draw of reference points for the data term.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSample {
    pub indices: Vec<usize>,
    pub fraction: f64,
    pub seed: u64,
}

/// ⌊fraction · N⌋ distinct point indices, uniformly without replacement.
pub fn sample_data(reference: &ReferenceSolution, fraction: f64, seed: u64) -> Result<DataSample> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "data fraction {fraction} outside (0, 1]"
        )));
    }
    let n = reference.len();
    let count = ((fraction * n as f64) + 1e-9).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = rand::seq::index::sample(&mut rng, n, count.min(n)).into_vec();
    Ok(DataSample {
        indices,
        fraction,
        seed,
    })
}

/// ‖pred − reference‖₂ / ‖reference‖₂.
pub fn relative_l2(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() {
        return Err(Error::ShapeMismatch {
            expected: reference.len(),
            actual: pred.len(),
        });
    }
    let den: f64 = reference.iter().map(|r| r * r).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::InvalidArgument(
            "relative error against a zero reference".into(),
        ));
    }
    let num: f64 = pred
        .iter()
        .zip(reference)
        .map(|(p, r)| (p - r) * (p - r))
        .sum::<f64>()
        .sqrt();
    Ok(num / den)
}

/// Sign changes of a sampled signal, ignoring exact zeros.
pub fn zero_crossings(values: &[f64]) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}
