//! Published training configurations for every registered problem and the
//! thresholds a reproduction run is judged against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kan::{KanKind, KanNetwork, NetworkConfig};
use crate::oracle::{self, ReferenceSolution, Resolution};
use crate::problems::{make_problem, sample_collocation, ProblemSpec, PROBLEM_IDS};
use crate::train::{
    evaluate, train_observed, LossRow, OptimizerConfig, OptimizerKind, RunRecord, Schedule,
    TrainConfig,
};

/// Seeds tried by best-of-N reproductions.
pub const REPRO_SEEDS: [u64; 3] = [0, 1, 2];

/// Pass conditions for one reproduction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub max_total_loss: f64,
    /// Bound on every output's relative L2 error (and every PDE slice).
    pub max_relative_l2: f64,
    /// Zero-crossing count of the first output must match the reference
    /// within ±1.
    pub zero_crossings: bool,
    /// Failing runs are reported but do not fail the suite.
    pub tracked: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    pub problem: String,
    pub kind: KanKind,
    pub architecture: Vec<usize>,
    pub optimizer: OptimizerKind,
    pub schedule: Schedule,
    pub epochs: usize,
    /// Order of magnitude of the published final loss.
    pub paper_loss_order: f64,
    pub thresholds: Thresholds,
}

fn bench(
    problem: &str,
    kind: KanKind,
    architecture: &[usize],
    optimizer: OptimizerKind,
    schedule: Schedule,
    epochs: usize,
    paper_loss_order: f64,
    max_total_loss: f64,
    max_relative_l2: f64,
) -> Benchmark {
    Benchmark {
        problem: problem.to_string(),
        kind,
        architecture: architecture.to_vec(),
        optimizer,
        schedule,
        epochs,
        paper_loss_order,
        thresholds: Thresholds {
            max_total_loss,
            max_relative_l2,
            zero_crossings: false,
            tracked: false,
        },
    }
}

/// The published configuration of `problem`.
pub fn benchmark(problem: &str) -> Result<Benchmark> {
    use KanKind::{EfficientKan as Spline, WavKan as Wave};
    use OptimizerKind::{Adam, AdamW};
    let constant = Schedule::constant;
    let b = match problem {
        "linear_ode" => bench(problem, Spline, &[1, 5, 4, 3, 1], Adam, constant(1e-3), 5000, 1e-6, 1e-4, 1e-2),
        "coupled_simple" => bench(problem, Wave, &[1, 3, 2], Adam, constant(1e-3), 10_000, 1e-6, 1e-4, 1e-2),
        "coupled_linear_bvp" => {
            bench(problem, Spline, &[1, 2, 3, 2], AdamW, constant(1e-3), 10_000, 1e-5, 1e-3, 2e-2)
        }
        "coupled_nonlinear_bvp" => bench(
            problem,
            Wave,
            &[1, 7, 2],
            AdamW,
            Schedule::step_decay(0.01, 1000, 0.2),
            10_000,
            1e-5,
            1e-3,
            2e-2,
        ),
        "lorenz" => bench(problem, Wave, &[1, 8, 16, 3], AdamW, constant(1e-3), 10_000, 1e-5, 1e-3, 5e-2),
        "shm" | "pendulum" => {
            let mut b = bench(
                problem,
                Wave,
                &[1, 8, 6, 8, 1],
                Adam,
                Schedule::step_decay(1e-3, 10_000, 0.1),
                40_000,
                if problem == "shm" { 0.2 } else { 0.9 },
                2.0,
                f64::INFINITY,
            );
            b.thresholds.zero_crossings = true;
            b.thresholds.tracked = true;
            b
        }
        "mathieu_a3b1.2" | "mathieu_a2b1" | "mathieu_a0.25b0.05" => {
            bench(problem, Wave, &[1, 12, 8, 1], Adam, constant(1e-3), 3000, 1e-5, 1e-3, 5e-2)
        }
        "vdp_f1" | "vdp_f1.7" => bench(
            problem,
            Wave,
            &[1, 12, 8, 1],
            Adam,
            Schedule::step_decay(1e-3, 300, 0.1),
            4000,
            1e-5,
            1e-3,
            5e-2,
        ),
        "burgers" => bench(
            problem,
            Spline,
            &[2, 8, 4, 1],
            AdamW,
            Schedule::step_decay(5e-3, 1000, 0.1),
            10_000,
            1e-5,
            1e-3,
            5e-2,
        ),
        "allen_cahn_1" => {
            bench(problem, Spline, &[2, 12, 8, 12, 1], AdamW, constant(1e-3), 4000, 1e-6, 1e-4, 5e-2)
        }
        "allen_cahn_2" => {
            bench(problem, Spline, &[2, 8, 6, 1], AdamW, constant(1e-3), 20_000, 0.08, 0.2, 2e-1)
        }
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(b)
}

/// All benchmarks in registry order.
pub fn all_benchmarks() -> Vec<Benchmark> {
    PROBLEM_IDS
        .iter()
        .map(|id| benchmark(id).expect("every registered problem has a benchmark"))
        .collect()
}

impl Benchmark {
    pub fn network_config(&self, spec: &ProblemSpec) -> NetworkConfig {
        NetworkConfig::new(self.architecture.clone(), self.kind).with_domain(spec.domain.clone())
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            optimizer: OptimizerConfig::new(self.optimizer),
            schedule: self.schedule,
            seed,
            log_every: 100,
        }
    }
}

/// Outcome of one seeded reproduction run.
#[derive(Clone, Debug)]
pub struct ReproRun {
    pub seed: u64,
    pub record: RunRecord,
    pub network: KanNetwork,
    pub final_total: f64,
    pub worst_relative_l2: f64,
    /// `(predicted, reference)` sign-change counts of the first output.
    pub zero_crossings: Option<(usize, usize)>,
    pub passed: bool,
}

/// Verdict of a run against `thresholds`.
pub fn judge(
    thresholds: &Thresholds,
    final_total: f64,
    worst_relative_l2: f64,
    zero_crossings: Option<(usize, usize)>,
    completed: bool,
) -> bool {
    let crossings_ok = !thresholds.zero_crossings
        || zero_crossings.is_some_and(|(p, r)| p.abs_diff(r) <= 1);
    completed
        && final_total.is_finite()
        && final_total <= thresholds.max_total_loss
        && worst_relative_l2 <= thresholds.max_relative_l2
        && crossings_ok
}

/// Train `bench` from `seed` and judge it against `reference`.
pub fn run_benchmark(
    bench: &Benchmark,
    spec: &ProblemSpec,
    reference: &ReferenceSolution,
    seed: u64,
    observe: impl FnMut(&LossRow),
) -> Result<ReproRun> {
    let colloc = sample_collocation(spec, seed)?;
    let mut net = KanNetwork::init(bench.network_config(spec), seed)?;
    let config = bench.train_config(seed);
    let mut record = train_observed(spec, &mut net, &colloc, &config, observe)?;
    let metrics = evaluate(&net, spec, reference)?;
    let worst = metrics.worst_relative_l2();
    let zero_crossings = if bench.thresholds.zero_crossings && !spec.is_pde() {
        let pred: Vec<f64> = (0..reference.len())
            .map(|i| net.predict(reference.point(i)).map(|y| y[0]))
            .collect::<Result<_>>()?;
        Some((
            oracle::zero_crossings(&pred),
            oracle::zero_crossings(&reference.values[0]),
        ))
    } else {
        None
    };
    let final_total = record.final_loss.total;
    record.metrics = Some(metrics);
    let passed = judge(&bench.thresholds, final_total, worst, zero_crossings, record.completed());
    Ok(ReproRun {
        seed,
        record,
        network: net,
        final_total,
        worst_relative_l2: worst,
        zero_crossings,
        passed,
    })
}

/// Best-of-N reproduction: seeds are tried in order and the search stops
/// at the first passing run. The returned run is the passing one, or the
/// one with the lowest final loss when none passes.
pub fn reproduce(
    problem: &str,
    seeds: &[u64],
    mut on_run: impl FnMut(&ReproRun),
) -> Result<(ReproRun, Vec<ReproRun>)> {
    let bench = benchmark(problem)?;
    let spec = make_problem(problem)?;
    let reference = oracle::reference_solution(&spec, &Resolution::default())?;
    let mut runs: Vec<ReproRun> = Vec::new();
    for &seed in seeds {
        let run = run_benchmark(&bench, &spec, &reference, seed, |_| {})?;
        on_run(&run);
        let passed = run.passed;
        runs.push(run);
        if passed {
            break;
        }
    }
    let best = runs
        .iter()
        .find(|r| r.passed)
        .or_else(|| {
            runs.iter().min_by(|a, b| {
                let key = |r: &ReproRun| if r.final_total.is_finite() { r.final_total } else { f64::INFINITY };
                key(a).total_cmp(&key(b))
            })
        })
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("no seeds given".into()))?;
    Ok((best, runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_and_published_numbers() {
        let all = all_benchmarks();
        assert_eq!(all.len(), 15);
        let get = |id: &str| all.iter().find(|b| b.problem == id).unwrap().clone();
        assert_eq!(get("allen_cahn_2").paper_loss_order, 0.08);
        assert_eq!(get("pendulum").paper_loss_order, 0.9);
        assert_eq!(get("linear_ode").architecture, vec![1, 5, 4, 3, 1]);
        assert_eq!(get("burgers").architecture, vec![2, 8, 4, 1]);
        assert!(get("shm").thresholds.tracked);
        assert!(!get("burgers").thresholds.tracked);
        // Parameter count of the linear ODE network.
        let spec = make_problem("linear_ode").unwrap();
        let b = get("linear_ode");
        let net = KanNetwork::init(b.network_config(&spec), 0).unwrap();
        assert_eq!(net.param_count(), 400);
    }

    #[test]
    fn judging() {
        let t = benchmark("shm").unwrap().thresholds;
        assert!(judge(&t, 1.5, 0.9, Some((8, 9)), true));
        assert!(!judge(&t, 1.5, 0.9, Some((6, 9)), true));
        assert!(!judge(&t, 2.5, 0.0, Some((9, 9)), true));
        assert!(!judge(&t, 0.1, 0.0, Some((9, 9)), false));
        let t = benchmark("linear_ode").unwrap().thresholds;
        assert!(judge(&t, 1e-5, 5e-3, None, true));
        assert!(!judge(&t, 1e-5, 2e-2, None, true));
        assert!(!judge(&t, f64::NAN, 0.0, None, true));
    }
}
