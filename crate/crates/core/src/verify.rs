//! Deterministic self-checks of the solver stack: jet and parameter
//! derivatives against finite differences, spline identities, exact
//! solutions with zero residual, integrator convergence orders, optimizer
//! hand examples and run determinism.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::benchmarks::benchmark;
use crate::csv::loss_history_table;
use crate::diffengine::{finite_difference_check, ParamKind, ParameterBlock};
use crate::error::Result;
use crate::kan::{bspline_basis, uniform_knots, KanKind, KanNetwork, NetworkConfig};
use crate::oracle::{mol_solve, rk4_solve, ClosedFormModel};
use crate::problems::{compute_loss, make_problem, sample_collocation, PhysicsLoss};
use crate::train::{
    train, OptimizerConfig, OptimizerKind, OptimizerState, Schedule, TrainConfig,
};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error or ratio, in words.
    pub detail: String,
    pub seconds: f64,
    /// Wall-clock limit that is part of the check, if any.
    pub budget_seconds: Option<f64>,
}

fn timed(
    id: u8,
    name: &'static str,
    budget_seconds: Option<f64>,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CheckResult {
    let start = Instant::now();
    let outcome = body();
    let seconds = start.elapsed().as_secs_f64();
    let (ok, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = budget_seconds.is_none_or(|b| seconds <= b);
    CheckResult {
        id,
        name,
        passed: ok && in_time,
        detail,
        seconds,
        budget_seconds,
    }
}

fn scaled_error(exact: f64, approx: f64) -> f64 {
    (exact - approx).abs() / exact.abs().max(1.0)
}

/// Worst first- and second-derivative errors of `net`'s output jets
/// against central differences of its values at `points` random points.
pub fn jet_finite_difference_errors(net: &KanNetwork, points: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = net.config().domain.clone();
    let dim = domain.len();
    let (mut worst1, mut worst2): (f64, f64) = (0.0, 0.0);
    let value = |x: &[f64]| -> Result<Vec<f64>> { net.predict(x) };
    for _ in 0..points {
        let x: Vec<f64> = domain
            .iter()
            .map(|&(lo, hi)| {
                let pad = 0.01 * (hi - lo);
                rng.random_range(lo + pad..hi - pad)
            })
            .collect();
        let jets = net.forward(&x)?;
        let centre = value(&x)?;
        for i in 0..dim {
            let width = domain[i].1 - domain[i].0;
            let h1 = 1e-5 * width / 2.0;
            let h2 = 1e-4 * width / 2.0;
            let shifted = |h: f64| {
                let mut p = x.clone();
                p[i] += h;
                value(&p)
            };
            let (p1, m1) = (shifted(h1)?, shifted(-h1)?);
            let (p2, m2) = (shifted(h2)?, shifted(-h2)?);
            for (o, jet) in jets.iter().enumerate() {
                let d1 = (p1[o] - m1[o]) / (2.0 * h1);
                worst1 = worst1.max(scaled_error(jet.d(i), d1));
                let d2 = (p2[o] - 2.0 * centre[o] + m2[o]) / (h2 * h2);
                worst2 = worst2.max(scaled_error(jet.dd(i, i), d2));
            }
            for j in (i + 1)..dim {
                let hj = 1e-4 * (domain[j].1 - domain[j].0) / 2.0;
                let at = |si: f64, sj: f64| {
                    let mut p = x.clone();
                    p[i] += si * h2;
                    p[j] += sj * hj;
                    value(&p)
                };
                let (pp, pm, mp, mm) = (at(1.0, 1.0)?, at(1.0, -1.0)?, at(-1.0, 1.0)?, at(-1.0, -1.0)?);
                for (o, jet) in jets.iter().enumerate() {
                    let d = (pp[o] - pm[o] - mp[o] + mm[o]) / (4.0 * h2 * hj);
                    worst2 = worst2.max(scaled_error(jet.dd(i, j), d));
                }
            }
        }
    }
    Ok((worst1, worst2))
}

/// First and second jet derivatives of both layer kinds agree with
/// central differences (errors below 1e-6 and 1e-4, relative to
/// max(1, |exact|)) at 50 random points for each of 5 seeds.
pub fn jet_derivatives() -> CheckResult {
    timed(1, "jet derivatives vs finite differences", Some(10.0), || {
        let mut worst = (0.0f64, 0.0f64);
        for kind in [KanKind::EfficientKan, KanKind::WavKan] {
            for (arch, domain) in [
                (vec![1, 4, 3, 1], vec![(0.0, 20.0)]),
                (vec![2, 4, 3, 2], vec![(0.0, 1.0), (-1.0, 1.0)]),
            ] {
                for seed in 0..5 {
                    let cfg = NetworkConfig::new(arch.clone(), kind).with_domain(domain.clone());
                    let net = KanNetwork::init(cfg, seed)?;
                    let (e1, e2) = jet_finite_difference_errors(&net, 50, 100 + seed)?;
                    worst = (worst.0.max(e1), worst.1.max(e2));
                }
            }
        }
        Ok((
            worst.0 < 1e-6 && worst.1 < 1e-4,
            format!("first {:.2e}, second {:.2e}", worst.0, worst.1),
        ))
    })
}

/// Exact parameter gradients of the physics loss agree with central
/// differences (step 1e-5) to 1e-5 on [1,3,1] for both kinds and on the
/// Burgers network [2,8,4,1] on a 25×25 Burgers grid.
pub fn parameter_gradients() -> CheckResult {
    timed(2, "parameter gradients vs finite differences", Some(30.0), || {
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        let ode = make_problem("linear_ode")?;
        let colloc = sample_collocation(&ode, 0)?;
        let objective = PhysicsLoss::new(&ode, &colloc)?;
        for kind in [KanKind::EfficientKan, KanKind::WavKan] {
            let cfg = NetworkConfig::new(vec![1, 3, 1], kind).with_domain(ode.domain.clone());
            let net = KanNetwork::init(cfg, 7)?;
            let e = finite_difference_check(&net.graph, &net.params, &objective, 1e-5)?;
            parts.push(format!("{} {:.2e}", kind.name(), e));
            worst = worst.max(e);
        }
        // A coarser grid keeps the 2·520 loss evaluations cheap.
        let mut burgers = make_problem("burgers")?;
        burgers.points_per_axis = 25;
        let bench = benchmark("burgers")?;
        let colloc = sample_collocation(&burgers, 0)?;
        let objective = PhysicsLoss::new(&burgers, &colloc)?;
        let net = KanNetwork::init(bench.network_config(&burgers), 7)?;
        let e = finite_difference_check(&net.graph, &net.params, &objective, 1e-5)?;
        parts.push(format!("burgers {e:.2e}"));
        worst = worst.max(e);
        Ok((worst < 1e-5, parts.join(", ")))
    })
}

/// Textbook Cox-de Boor recursion for `B_{i,k}(x)` on half-open spans.
pub fn cox_de_boor(knots: &[f64], i: usize, k: usize, x: f64) -> f64 {
    if k == 0 {
        return if knots[i] <= x && x < knots[i + 1] { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    let left = knots[i + k] - knots[i];
    if left > 0.0 {
        v += (x - knots[i]) / left * cox_de_boor(knots, i, k - 1, x);
    }
    let right = knots[i + k + 1] - knots[i + 1];
    if right > 0.0 {
        v += (knots[i + k + 1] - x) / right * cox_de_boor(knots, i + 1, k - 1, x);
    }
    v
}

/// Partition of unity on the grid, agreement with the naive recursion and
/// the cardinal cubic's centre value.
pub fn bspline_identities() -> CheckResult {
    timed(3, "B-spline identities", None, || {
        let k = 3;
        let knots = uniform_knots(5, k, -1.0, 1.0);
        let mut unity: f64 = 0.0;
        for i in 0..1000 {
            let x = -1.0 + 2.0 * i as f64 / 999.0;
            let s: f64 = bspline_basis(x, &knots, k)?.iter().sum();
            unity = unity.max((s - 1.0).abs());
        }
        let mut naive: f64 = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x: f64 = rng.random_range(-1.0..1.0);
            for (i, b) in bspline_basis(x, &knots, k)?.iter().enumerate() {
                naive = naive.max((b - cox_de_boor(&knots, i, k, x)).abs());
            }
        }
        let centre = bspline_basis(2.0, &[0.0, 1.0, 2.0, 3.0, 4.0], 3)?[0];
        let centre_err = (centre - 2.0 / 3.0).abs();
        Ok((
            unity < 1e-12 && naive < 1e-14 && centre_err < 1e-12,
            format!("unity {unity:.1e}, naive {naive:.1e}, centre {centre_err:.1e}"),
        ))
    })
}

pub const CLOSED_FORM_PROBLEMS: [&str; 5] = [
    "linear_ode",
    "coupled_simple",
    "coupled_linear_bvp",
    "coupled_nonlinear_bvp",
    "shm",
];

/// Every loss component of the five exact solutions is below 1e-20.
pub fn zero_residuals() -> CheckResult {
    timed(4, "zero residual of exact solutions", None, || {
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for id in CLOSED_FORM_PROBLEMS {
            let spec = make_problem(id)?;
            let colloc = sample_collocation(&spec, 0)?;
            let model = ClosedFormModel { spec: &spec };
            let loss = compute_loss(&spec, &model, &[], &colloc)?;
            let m = [loss.l_r, loss.l_ic, loss.l_bc, loss.l_data]
                .into_iter()
                .fold(0.0, f64::max);
            parts.push(format!("{id} {m:.1e}"));
            worst = worst.max(m);
        }
        Ok((worst < 1e-20, parts.join(", ")))
    })
}

/// Error ratio of RK4 on y' = y over [0, 1] when the step count doubles
/// from `n`.
pub fn rk4_order_ratio(n: usize) -> Result<f64> {
    let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
    let e = std::f64::consts::E;
    let err = |n: usize| -> Result<f64> {
        let sol = rk4_solve(f, &[1.0], (0.0, 1.0), n)?;
        Ok((sol.values[0][n] - e).abs())
    };
    Ok(err(n)? / err(2 * n)?)
}

/// ‖u_h − u_{h/2}‖ / ‖u_{h/2} − u_{h/4}‖ on the 100×100 grid, starting
/// from `nx` spatial intervals.
pub fn mol_self_convergence(id: &str, nx: usize) -> Result<f64> {
    let spec = make_problem(id)?;
    let a = mol_solve(&spec, nx, None)?;
    let b = mol_solve(&spec, 2 * nx, None)?;
    let c = mol_solve(&spec, 4 * nx, None)?;
    let dist = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    Ok(dist(&a.values[0], &b.values[0]) / dist(&b.values[0], &c.values[0]))
}

/// RK4 fourth-order ratio in [12, 20]; method-of-lines self-convergence
/// ratio in [2, 8] for Burgers and the first Allen-Cahn case.
pub fn convergence_orders() -> CheckResult {
    timed(5, "integrator convergence orders", None, || {
        let rk4 = rk4_order_ratio(10)?;
        let burgers = mol_self_convergence("burgers", 99)?;
        let ac1 = mol_self_convergence("allen_cahn_1", 99)?;
        let ok = (12.0..=20.0).contains(&rk4)
            && (2.0..=8.0).contains(&burgers)
            && (2.0..=8.0).contains(&ac1);
        Ok((ok, format!("rk4 {rk4:.2}, burgers {burgers:.2}, allen_cahn_1 {ac1:.2}")))
    })
}

fn single(theta: f64, grad: f64) -> ParameterBlock {
    let mut p = ParameterBlock::new();
    p.push(0, ParamKind::Scalar, vec![1]);
    p.values[0] = theta;
    p.grads[0] = grad;
    p
}

/// Adam and AdamW first steps by hand, and the published step-decay
/// schedules at their boundary epochs.
pub fn optimizer_steps() -> CheckResult {
    timed(6, "optimizer steps and schedules", None, || {
        let mut errs: Vec<f64> = Vec::new();
        let step = |kind, theta, grad, lr| -> Result<f64> {
            let mut p = single(theta, grad);
            let mut s = OptimizerState::new(OptimizerConfig::new(kind), 1);
            s.step(&mut p, lr)?;
            Ok(p.values[0])
        };
        // θ=0, g=2, lr=0.1: m̂ = 2, v̂ = 4, step = 0.1·2/(2 + 1e-8).
        errs.push((step(OptimizerKind::Adam, 0.0, 2.0, 0.1)? + 0.099_999_999_5).abs());
        errs.push((step(OptimizerKind::Adam, 0.7, 0.0, 0.1)? - 0.7).abs());
        errs.push((step(OptimizerKind::AdamW, 1.0, 0.0, 0.1)? - 0.99999).abs());
        // Bias correction makes the first step lr·|g|/(|g| + ε) for any |g|.
        for g in [1e-6, 1e-3, 1.0, 1e3] {
            errs.push((step(OptimizerKind::Adam, 0.0, g, 1e-3)? + 1e-3 * g / (g + 1e-8)).abs());
        }
        let schedules = [
            (Schedule::step_decay(1e-3, 10_000, 0.1), [(9_999, 1e-3), (10_000, 1e-4), (39_999, 1e-6)]),
            (Schedule::step_decay(0.01, 1000, 0.2), [(999, 0.01), (1000, 0.002), (2000, 4e-4)]),
            (Schedule::step_decay(1e-3, 300, 0.1), [(299, 1e-3), (300, 1e-4), (600, 1e-5)]),
        ];
        for (s, points) in schedules {
            for (epoch, lr) in points {
                errs.push((s.lr(epoch) - lr).abs() / lr);
            }
        }
        let worst = errs.iter().copied().fold(0.0, f64::max);
        Ok((worst < 1e-12, format!("worst {worst:.1e}")))
    })
}

/// Two seeded 100-epoch linear ODE runs write identical loss histories.
pub fn determinism() -> CheckResult {
    timed(7, "determinism of seeded runs", None, || {
        let spec = make_problem("linear_ode")?;
        let bench = benchmark("linear_ode")?;
        let run = || -> Result<String> {
            let colloc = sample_collocation(&spec, 0)?;
            let mut net = KanNetwork::init(bench.network_config(&spec), 0)?;
            let config = TrainConfig {
                epochs: 100,
                log_every: 1,
                ..bench.train_config(0)
            };
            let record = train(&spec, &mut net, &colloc, &config)?;
            Ok(loss_history_table(&record.rows).to_csv_string())
        };
        let (a, b) = (run()?, run()?);
        Ok((a == b, format!("{} bytes, identical: {}", a.len(), a == b)))
    })
}

/// All deterministic checks in order.
pub fn run_hard_checks() -> Vec<CheckResult> {
    vec![
        jet_derivatives(),
        parameter_gradients(),
        bspline_identities(),
        zero_residuals(),
        convergence_orders(),
        optimizer_steps(),
        determinism(),
    ]
}

