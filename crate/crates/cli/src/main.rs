//! `pikan`: train physics-informed KANs on the benchmark problems, export
//! reference solutions, evaluate checkpoints and reproduce every published
//! configuration.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 a deterministic self-check failed (`reproduce-all` only).

mod artifacts;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pikan::benchmarks::{all_benchmarks, benchmark, reproduce, ReproRun};
use pikan::csv::{reference_table, solution_table};
use pikan::kan::{Checkpoint, KanNetwork};
use pikan::oracle::{reference_solution, Resolution};
use pikan::problems::{make_problem, sample_collocation, PROBLEM_IDS};
use pikan::train::{evaluate, train_observed};
use pikan::verify::run_hard_checks;

use artifacts::{aborted, provenance, write_run, RunManifest, RunOutput, MANIFEST};
use config::{Overrides, RunConfig};

const USAGE: u8 = 1;
const NUMERICAL: u8 = 2;
const HARD_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "pikan", version, about = "Physics-informed Kolmogorov-Arnold network solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered problems with their default configuration.
    List,
    /// Train one network and write its run directory.
    Train(TrainArgs),
    /// Export the reference solution of a problem as CSV.
    Oracle(OracleArgs),
    /// Evaluate a checkpoint against the reference solution.
    Eval(EvalArgs),
    /// Run the self-checks and every published configuration.
    ReproduceAll(ReproduceArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Problem id; optional when the config file names one.
    #[arg(long)]
    problem: Option<String>,
    /// key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: $PIKAN_OUT_DIR/<problem>-seed<seed>, or runs/...].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Layer widths, e.g. 1,5,4,3,1.
    #[arg(long)]
    arch: Option<String>,
    /// efficient_kan (spline) or wav_kan (wavelet).
    #[arg(long)]
    kind: Option<String>,
    /// Print the resolved configuration and exit without training.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    problem: String,
    /// Minimum spatial intervals of the method of lines.
    #[arg(long)]
    nx: Option<usize>,
    /// Minimum time steps of the method of lines.
    #[arg(long)]
    nt: Option<usize>,
    /// RK4 steps over the time span.
    #[arg(long)]
    rk4_steps: Option<usize>,
    /// Output directory [default: $PIKAN_OUT_DIR or runs].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// checkpoint.json of a run.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Problem id; read from the run's manifest when omitted.
    #[arg(long)]
    problem: Option<String>,
    /// Directory for solution.csv and metrics.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Number of seeds tried per configuration (0, 1, ...).
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    /// Restrict to these problem ids.
    #[arg(long)]
    problem: Vec<String>,
    /// Output directory [default: $PIKAN_OUT_DIR/reproduce or runs/reproduce].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::List => cmd_list(),
        Command::Train(a) => cmd_train(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Eval(a) => cmd_eval(a),
        Command::ReproduceAll(a) => cmd_reproduce_all(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Solver blow-ups and non-finite values are numerical failures; anything
/// else is a usage or configuration error.
fn exit_code(e: &anyhow::Error) -> u8 {
    let numerical = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<pikan::Error>(),
            Some(pikan::Error::NonFinite { .. } | pikan::Error::SolverBlowUp { .. })
        )
    });
    if numerical {
        NUMERICAL
    } else {
        USAGE
    }
}

fn out_root() -> PathBuf {
    std::env::var_os("PIKAN_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn fmt_arch(arch: &[usize]) -> String {
    let w: Vec<String> = arch.iter().map(|w| w.to_string()).collect();
    format!("[{}]", w.join(","))
}

fn fmt_errors(v: &[f64]) -> String {
    let s: Vec<String> = v.iter().map(|e| format!("{e:.3e}")).collect();
    s.join(",")
}

fn cmd_list() -> Result<u8> {
    println!(
        "{:<20} {:<14} {:<16} {:<6} {:<24} {:>6} {:>6}  notes",
        "problem", "kind", "arch", "opt", "lr", "epochs", "loss"
    );
    for b in all_benchmarks() {
        let spec = make_problem(&b.problem)?;
        let lr = match b.schedule.decay_every {
            Some(every) => format!("{} x{} every {}", b.schedule.base_lr, b.schedule.decay_factor, every),
            None => b.schedule.base_lr.to_string(),
        };
        let mut notes = vec![spec.family.to_string(), format!("oracle {}", spec.oracle.name())];
        if let Some(d) = spec.data {
            notes.push(format!("data-driven {}", d.fraction));
        }
        if b.thresholds.tracked {
            notes.push("tracked".into());
        }
        println!(
            "{:<20} {:<14} {:<16} {:<6} {:<24} {:>6} {:>6}  {}",
            b.problem,
            b.kind.name(),
            fmt_arch(&b.architecture),
            b.optimizer.name(),
            lr,
            b.epochs,
            b.paper_loss_order,
            notes.join(", ")
        );
    }
    Ok(0)
}

fn cmd_train(a: TrainArgs) -> Result<u8> {
    let flags = Overrides {
        problem: a.problem,
        seed: a.seed,
        epochs: a.epochs,
        lr: a.lr,
        arch: a.arch,
        kind: a.kind,
    };
    let cfg = RunConfig::resolve(a.config.as_deref(), &flags)?;
    if a.dry_run {
        print!("{}", cfg.to_text());
        return Ok(0);
    }
    let out = a
        .out
        .unwrap_or_else(|| out_root().join(format!("{}-seed{}", cfg.problem, cfg.seed)));
    let (manifest, code) = train_run(&cfg, &out)?;
    println!("final total loss {:.6e}", manifest.final_loss.total);
    println!("relative_l2 {}", fmt_errors(&manifest.metrics.relative_l2));
    println!("wrote {}", out.display());
    Ok(code)
}

/// Train `cfg` and write its run directory. Exit code 2 when training
/// stopped on a non-finite value; the last finite parameters are saved.
fn train_run(cfg: &RunConfig, out: &Path) -> Result<(RunManifest, u8)> {
    let started = artifacts::unix_ms();
    let spec = cfg.problem_spec()?;
    let reference = reference_solution(&spec, &Resolution::default())?;
    let colloc = sample_collocation(&spec, cfg.seed)?;
    let mut net = KanNetwork::init(cfg.network_config(), cfg.seed)?;
    let tc = cfg.train_config();
    let report_every = (tc.epochs / 10).max(1);
    let mut record = train_observed(&spec, &mut net, &colloc, &tc, |row| {
        if row.epoch % report_every == 0 {
            eprintln!("epoch {:>6}  total {:.4e}  lr {:.1e}", row.epoch, row.total, row.lr);
        }
    })?;
    let metrics = evaluate(&net, &spec, &reference)?;
    record.metrics = Some(metrics.clone());
    let manifest = write_run(
        out,
        &RunOutput {
            config: cfg,
            spec: &spec,
            reference: &reference,
            network: &net,
            record: &record,
            metrics: &metrics,
            data_points: colloc.data.len(),
            started_unix_ms: started,
        },
    )?;
    let code = match aborted(&record.status) {
        Some(why) => {
            eprintln!("training {why}");
            NUMERICAL
        }
        None => 0,
    };
    Ok((manifest, code))
}

fn cmd_oracle(a: OracleArgs) -> Result<u8> {
    let spec = make_problem(&a.problem)?;
    let mut res = Resolution::default();
    if let Some(nx) = a.nx {
        res.nx = nx;
    }
    if a.nt.is_some() {
        res.nt = a.nt;
    }
    if let Some(n) = a.rk4_steps {
        res.rk4_steps = n;
    }
    let reference = reference_solution(&spec, &res)?;
    let out = a.out.unwrap_or_else(out_root);
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let csv_path = out.join(format!("oracle_{}.csv", spec.id));
    reference_table(&spec, &reference)?.write(&csv_path)?;
    let json_path = out.join(format!("oracle_{}.json", spec.id));
    let meta = without_nulls(serde_json::to_value(provenance(&reference))?);
    std::fs::write(&json_path, serde_json::to_string_pretty(&meta)?)?;
    println!(
        "{} reference: {} points, {} outputs",
        reference.method.name(),
        reference.len(),
        reference.outputs()
    );
    println!("wrote {}", csv_path.display());
    Ok(0)
}

/// Drops null fields, so closed forms carry no integration metadata.
fn without_nulls(v: serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(map) => map
            .into_iter()
            .filter(|(_, v)| !v.is_null())
            .map(|(k, v)| (k, without_nulls(v)))
            .collect(),
        other => other,
    }
}

fn cmd_eval(a: EvalArgs) -> Result<u8> {
    let checkpoint = Checkpoint::load(&a.checkpoint)
        .with_context(|| format!("cannot load {}", a.checkpoint.display()))?;
    let manifest_path = a.checkpoint.with_file_name(MANIFEST);
    let run_config: Option<RunConfig> = match std::fs::read_to_string(&manifest_path) {
        Ok(text) => Some(
            serde_json::from_str::<RunManifest>(&text)
                .with_context(|| format!("cannot parse {}", manifest_path.display()))?
                .config,
        ),
        Err(_) => None,
    };
    let cfg = match (a.problem, run_config) {
        (Some(p), Some(c)) if c.problem == p => c,
        (Some(p), _) => RunConfig::defaults(&p)?,
        (None, Some(c)) => c,
        (None, None) => bail!("no manifest next to the checkpoint; pass --problem"),
    };
    let spec = cfg.problem_spec().or_else(|_| make_problem(&cfg.problem).map_err(|e| anyhow!(e)))?;
    let net = checkpoint.into_network()?;
    if net.input_dim() != spec.in_dim || net.output_dim() != spec.out_dim {
        bail!(
            "checkpoint network {} does not fit problem {}",
            fmt_arch(&net.config().architecture),
            spec.id
        );
    }
    let reference = reference_solution(&spec, &Resolution::default())?;
    let metrics = evaluate(&net, &spec, &reference)?;
    println!("relative_l2 {}", fmt_errors(&metrics.relative_l2));
    println!("max_abs_error {}", fmt_errors(&metrics.max_abs_error));
    for s in &metrics.slices {
        println!("t={} relative_l2 {:.3e}", s.t, s.relative_l2);
    }
    if let Some(out) = a.out {
        std::fs::create_dir_all(&out)?;
        solution_table(&spec, &reference, |x| net.predict(x))?.write(out.join(artifacts::SOLUTION))?;
        std::fs::write(out.join("metrics.json"), serde_json::to_string_pretty(&metrics)?)?;
        println!("wrote {}", out.display());
    }
    Ok(0)
}

fn cmd_reproduce_all(a: ReproduceArgs) -> Result<u8> {
    if a.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let problems: Vec<String> = if a.problem.is_empty() {
        PROBLEM_IDS.iter().map(|s| s.to_string()).collect()
    } else {
        for p in &a.problem {
            benchmark(p)?;
        }
        a.problem.clone()
    };
    let out = a.out.unwrap_or_else(|| out_root().join("reproduce"));
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;

    let checks = run_hard_checks();
    let mut hard = csv::Writer::from_path(out.join("hard_checks.csv"))?;
    hard.write_record(["criterion", "name", "pass", "seconds", "detail"])?;
    let mut hard_failed = false;
    for c in &checks {
        let verdict = if c.passed { "pass" } else { "fail" };
        eprintln!("criterion {} {}: {verdict} ({})", c.id, c.name, c.detail);
        hard_failed |= !c.passed;
        hard.write_record([
            c.id.to_string(),
            c.name.to_string(),
            verdict.to_string(),
            format!("{:.3}", c.seconds),
            c.detail.clone(),
        ])?;
    }
    hard.flush()?;

    let seeds: Vec<u64> = (0..a.seeds).collect();
    let mut summary = csv::Writer::from_path(out.join("summary.csv"))?;
    summary.write_record(["problem", "arch", "paper_loss_order", "achieved_loss", "relative_l2", "pass"])?;
    for id in &problems {
        let bench = benchmark(id)?;
        let (best, _) = reproduce(id, &seeds, |run: &ReproRun| {
            eprintln!(
                "{id} seed {}: loss {:.3e}, relative_l2 {:.3e}, {}",
                run.seed,
                run.final_total,
                run.worst_relative_l2,
                if run.passed { "pass" } else { "fail" }
            );
        })?;
        let mut cfg = RunConfig::defaults(id)?;
        cfg.seed = best.seed;
        let spec = cfg.problem_spec()?;
        let reference = reference_solution(&spec, &Resolution::default())?;
        let metrics = best.record.metrics.clone().unwrap_or_default();
        let data_points = sample_collocation(&spec, best.seed)?.data.len();
        write_run(
            &out.join(id),
            &RunOutput {
                config: &cfg,
                spec: &spec,
                reference: &reference,
                network: &best.network,
                record: &best.record,
                metrics: &metrics,
                data_points,
                started_unix_ms: artifacts::unix_ms(),
            },
        )?;
        summary.write_record([
            id.clone(),
            fmt_arch(&bench.architecture),
            bench.paper_loss_order.to_string(),
            format!("{:e}", best.final_total),
            format!("{:e}", best.worst_relative_l2),
            if best.passed { "pass" } else { "fail" }.to_string(),
        ])?;
        summary.flush()?;
    }
    println!("wrote {}", out.join("summary.csv").display());
    if hard_failed {
        eprintln!("a deterministic self-check failed");
        return Ok(HARD_FAILURE);
    }
    Ok(0)
}
