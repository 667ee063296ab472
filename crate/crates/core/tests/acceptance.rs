//! Acceptance run: every criterion prints one PASS/FAIL line.
//!
//! Criteria 1-7 are deterministic and must pass; the process exits with a
//! failure status if any of them does not. Criteria 8-19 train the published
//! configurations best-of-3 over seeds 0, 1, 2 and are reported against their
//! thresholds. Set `PIKAN_ACCEPTANCE_STRICT=1` to also fail on any blocking
//! reproduction criterion. Positional arguments select criterion numbers.

use std::process::ExitCode;
use std::time::Instant;

use pikan::benchmarks::{benchmark, run_benchmark, ReproRun, REPRO_SEEDS};
use pikan::oracle::{reference_solution, Resolution};
use pikan::problems::make_problem;
use pikan::verify;

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Hard,
    Repro,
    Tracked,
}

struct Outcome {
    id: u8,
    kind: Kind,
    passed: bool,
    line: String,
}

fn describe(run: &ReproRun) -> String {
    let mut s = format!(
        "seed {} loss {:.2e} rel_l2 {:.2e}",
        run.seed, run.final_total, run.worst_relative_l2
    );
    if let Some((p, r)) = run.zero_crossings {
        s.push_str(&format!(" crossings {p}/{r}"));
    }
    s
}

/// Best-of-3 runs of `problem`; stops at the first seed for which `ok`
/// holds. Returns whether any seed passed and a summary of the runs.
fn best_of_seeds(problem: &str, ok: impl Fn(&ReproRun) -> bool) -> (bool, String) {
    let attempt = || -> pikan::Result<(bool, String)> {
        let bench = benchmark(problem)?;
        let spec = make_problem(problem)?;
        let reference = reference_solution(&spec, &Resolution::default())?;
        let mut notes = Vec::new();
        for &seed in &REPRO_SEEDS {
            let run = run_benchmark(&bench, &spec, &reference, seed, |_| {})?;
            notes.push(describe(&run));
            if ok(&run) {
                return Ok((true, format!("{problem}: {}", notes.join("; "))));
            }
        }
        Ok((false, format!("{problem}: {}", notes.join("; "))))
    };
    attempt().unwrap_or_else(|e| (false, format!("{problem}: error {e}")))
}

fn repro(id: u8, kind: Kind, problems: &[&str]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for p in problems {
        let (ok, note) = best_of_seeds(p, |r| r.passed);
        passed &= ok;
        parts.push(note);
    }
    Outcome {
        id,
        kind,
        passed,
        line: parts.join(" | "),
    }
}

/// Criteria 15 and 19 both come from Burgers runs; one set of seeds is
/// searched until each has passed or the seeds run out.
fn burgers() -> Vec<Outcome> {
    let mut c15 = (false, Vec::new());
    let mut c19 = (false, Vec::new());
    let result = (|| -> pikan::Result<()> {
        let bench = benchmark("burgers")?;
        let spec = make_problem("burgers")?;
        let reference = reference_solution(&spec, &Resolution::default())?;
        for &seed in &REPRO_SEEDS {
            if c15.0 && c19.0 {
                break;
            }
            let run = run_benchmark(&bench, &spec, &reference, seed, |_| {})?;
            let at_5000 = run.record.total_at(5000).unwrap_or(f64::INFINITY);
            if !c15.0 {
                c15.1.push(describe(&run));
                c15.0 = run.passed;
            }
            if !c19.0 {
                c19.1.push(format!("seed {seed} loss at epoch 5000 {at_5000:.2e}"));
                c19.0 = at_5000 <= 1e-3;
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        c15.1.push(format!("error {e}"));
        c19.1.push(format!("error {e}"));
    }
    vec![
        Outcome {
            id: 15,
            kind: Kind::Repro,
            passed: c15.0,
            line: format!("burgers: {}", c15.1.join("; ")),
        },
        Outcome {
            id: 19,
            kind: Kind::Tracked,
            passed: c19.0,
            line: format!("burgers: {}", c19.1.join("; ")),
        },
    ]
}

fn report(o: &Outcome, seconds: f64) {
    let verdict = if o.passed { "PASS" } else { "FAIL" };
    let kind = match o.kind {
        Kind::Hard => "hard",
        Kind::Repro => "repro",
        Kind::Tracked => "tracked",
    };
    println!("criterion {:>2} [{kind:>7}] {verdict}  {}  ({seconds:.1}s)", o.id, o.line);
}

fn main() -> ExitCode {
    let selected: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wanted = |id: u8| selected.is_empty() || selected.contains(&id);
    let strict = std::env::var("PIKAN_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut outcomes: Vec<Outcome> = Vec::new();

    let hard_checks: [(u8, fn() -> verify::CheckResult); 7] = [
        (1, verify::jet_derivatives),
        (2, verify::parameter_gradients),
        (3, verify::bspline_identities),
        (4, verify::zero_residuals),
        (5, verify::convergence_orders),
        (6, verify::optimizer_steps),
        (7, verify::determinism),
    ];
    for (id, check) in hard_checks {
        if !wanted(id) {
            continue;
        }
        let c = check();
        let budget = c
            .budget_seconds
            .map(|b| format!(", limit {b:.0}s"))
            .unwrap_or_default();
        let o = Outcome {
            id,
            kind: Kind::Hard,
            passed: c.passed,
            line: format!("{}: {}{budget}", c.name, c.detail),
        };
        report(&o, c.seconds);
        outcomes.push(o);
    }

    let repro_criteria: [(u8, Kind, &[&str]); 10] = [
        (8, Kind::Repro, &["linear_ode"]),
        (9, Kind::Repro, &["coupled_simple"]),
        (10, Kind::Repro, &["coupled_linear_bvp"]),
        (11, Kind::Repro, &["coupled_nonlinear_bvp"]),
        (12, Kind::Repro, &["lorenz"]),
        (13, Kind::Repro, &["mathieu_a3b1.2", "mathieu_a2b1", "mathieu_a0.25b0.05"]),
        (14, Kind::Repro, &["vdp_f1", "vdp_f1.7"]),
        (16, Kind::Repro, &["allen_cahn_1"]),
        (17, Kind::Repro, &["allen_cahn_2"]),
        (18, Kind::Tracked, &["shm", "pendulum"]),
    ];
    for (id, kind, problems) in repro_criteria {
        if id == 16 && (wanted(15) || wanted(19)) {
            let start = Instant::now();
            let both = burgers();
            let seconds = start.elapsed().as_secs_f64();
            for o in both {
                if wanted(o.id) {
                    report(&o, seconds);
                    outcomes.push(o);
                }
            }
        }
        if !wanted(id) {
            continue;
        }
        let start = Instant::now();
        let o = repro(id, kind, problems);
        report(&o, start.elapsed().as_secs_f64());
        outcomes.push(o);
    }

    outcomes.sort_by_key(|o| o.id);
    let count = |k: Kind| {
        let all: Vec<&Outcome> = outcomes.iter().filter(|o| o.kind == k).collect();
        let failed: Vec<String> = all.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
        (all.len() - failed.len(), all.len(), failed)
    };
    let mut exit = ExitCode::SUCCESS;
    for (k, name) in [(Kind::Hard, "hard"), (Kind::Repro, "repro"), (Kind::Tracked, "tracked")] {
        let (ok, total, failed) = count(k);
        if total == 0 {
            continue;
        }
        let tail = if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", failed.join(", "))
        };
        println!("summary [{name:>7}] {ok}/{total} passed{tail}");
        if !failed.is_empty() && (k == Kind::Hard || (strict && k == Kind::Repro)) {
            exit = ExitCode::FAILURE;
        }
    }
    exit
}
