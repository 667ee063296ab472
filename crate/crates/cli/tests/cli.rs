use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pikan(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pikan"))
        .args(args)
        .current_dir(cwd)
        .env_remove("PIKAN_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn listing(dir: &Path) -> BTreeSet<String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect()
}

#[test]
fn list_shows_every_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pikan(&["list"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 15);
    for id in pikan::problems::PROBLEM_IDS {
        assert!(rows.iter().any(|r| r.split_whitespace().next() == Some(id)), "{id}");
    }
    let burgers = rows.iter().find(|r| r.starts_with("burgers")).unwrap();
    assert!(burgers.contains("data-driven"));
}

#[test]
fn train_writes_four_files_with_an_exact_inventory() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pikan(
        &["train", "--problem", "linear_ode", "--seed", "0", "--epochs", "200", "--out", "run"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("final total loss"));
    assert!(text.contains("relative_l2"));

    let dir = tmp.path().join("run");
    let expected: BTreeSet<String> = ["checkpoint.json", "loss_history.csv", "manifest.json", "solution.csv"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    assert_eq!(listing(&dir), expected);
    let m = manifest(&dir);
    let listed: BTreeSet<String> = m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(listed, expected);
    assert_eq!(m["config"]["epochs"], 200);
    assert_eq!(m["status"]["state"], "completed");
    assert!(m["final_loss"]["total"].as_f64().unwrap().is_finite());

    let history = std::fs::read_to_string(dir.join("loss_history.csv")).unwrap();
    assert!(history.starts_with("epoch,l_r,l_ic,l_bc,l_data,total,lr\n"));
    assert_eq!(history.lines().count(), 1 + 3);
    let solution = std::fs::read_to_string(dir.join("solution.csv")).unwrap();
    assert!(solution.starts_with("axis0,pred0,ref0,abs_err0\n"));
}

#[test]
fn rerun_gives_byte_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["train", "--problem", "coupled_simple", "--seed", "4", "--epochs", "150", "--out", out];
    assert_eq!(pikan(&args("a"), tmp.path()).status.code(), Some(0));
    assert_eq!(pikan(&args("b"), tmp.path()).status.code(), Some(0));
    for f in ["loss_history.csv", "solution.csv", "checkpoint.json"] {
        let a = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
}

#[test]
fn missing_config_leaves_nothing_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pikan(&["train", "--config", "absent.conf", "--out", "run"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(listing(tmp.path()).is_empty());
}

#[test]
fn usage_and_config_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["train"],
        vec!["train", "--problem", "no_such_problem"],
        vec!["train", "--problem", "lorenz", "--arch", "1,4,1"],
        vec!["train", "--problem", "linear_ode", "--kind", "mlp"],
        vec!["train", "--problem", "linear_ode", "--lr", "-1"],
    ] {
        let o = pikan(&args, tmp.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    let bad = tmp.path().join("bad.conf");
    std::fs::write(&bad, "problem=linear_ode\nlearning_rate=0.1\n").unwrap();
    let o = pikan(&["train", "--config", "bad.conf"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key"));
    assert_eq!(listing(tmp.path()), BTreeSet::from(["bad.conf".to_string()]));
}

#[test]
fn divergent_training_exits_2_with_last_good_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pikan(
        &["train", "--problem", "linear_ode", "--lr", "1e200", "--epochs", "20", "--out", "run"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let dir = tmp.path().join("run");
    assert!(dir.join("checkpoint.json").exists());
    let m = manifest(&dir);
    assert_eq!(m["status"]["state"], "aborted");
    assert!(m["final_loss"]["total"].as_f64().unwrap().is_finite());
}

#[test]
fn burgers_manifest_records_data_and_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pikan(&["train", "--problem", "burgers", "--epochs", "1", "--out", "run"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&tmp.path().join("run"));
    assert_eq!(m["data_fraction"], 0.1);
    assert_eq!(m["data_points"], 1000);
    assert_eq!(m["oracle"]["method"], "mol");
    assert!(m["oracle"]["info"]["nx"].as_u64().unwrap() >= 512);
    assert_eq!(m["oracle"]["slices"], serde_json::json!([0.0, 0.25, 0.5, 0.75, 1.0]));
    // PDE solutions are exported on the five time slices.
    let solution = std::fs::read_to_string(tmp.path().join("run/solution.csv")).unwrap();
    assert!(solution.starts_with("axis0,axis1,pred0,ref0,abs_err0\n"));
    assert_eq!(solution.lines().count(), 1 + 5 * 100);
}

#[test]
fn oracle_exports() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pikan(&["oracle", "--problem", "lorenz", "--out", "o"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let lorenz = std::fs::read_to_string(tmp.path().join("o/oracle_lorenz.csv")).unwrap();
    assert_eq!(lorenz.lines().next(), Some("t,x,y,z"));
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("o/oracle_lorenz.json")).unwrap()).unwrap();
    assert_eq!(meta["method"], "rk4");
    assert!(meta["info"]["n_steps"].is_u64());

    let o = pikan(&["oracle", "--problem", "burgers", "--nx", "512", "--out", "o"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let burgers = std::fs::read_to_string(tmp.path().join("o/oracle_burgers.csv")).unwrap();
    assert_eq!(burgers.lines().next(), Some("x,t,u"));
    assert_eq!(burgers.lines().count(), 1 + 100 * 100);

    let o = pikan(&["oracle", "--problem", "shm", "--out", "o"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("o/oracle_shm.json")).unwrap()).unwrap();
    assert_eq!(meta["method"], "closed_form");
    assert_eq!(meta["info"], serde_json::json!({}));
}

#[test]
fn eval_matches_the_training_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pikan(
        &["train", "--problem", "coupled_linear_bvp", "--epochs", "100", "--out", "run"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let trained = manifest(&tmp.path().join("run"))["metrics"]["relative_l2"].clone();
    let o = pikan(&["eval", "--checkpoint", "run/checkpoint.json", "--out", "ev"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let evaluated: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("ev/metrics.json")).unwrap()).unwrap();
    assert_eq!(evaluated["relative_l2"], trained);
    let a = std::fs::read(tmp.path().join("run/solution.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("ev/solution.csv")).unwrap();
    assert!(a == b);

    let o = pikan(&["eval", "--checkpoint", "run/checkpoint.json", "--problem", "lorenz"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dry_run_prints_a_config_that_reproduces_itself() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pikan(
        &["train", "--problem", "vdp_f1.7", "--seed", "2", "--lr", "0.002", "--dry-run"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("schedule.decay_every=300\n"));
    assert!(text.contains("lr=0.002\n"));
    std::fs::write(tmp.path().join("vdp.conf"), &text).unwrap();
    let again = pikan(&["train", "--config", "vdp.conf", "--dry-run"], tmp.path());
    assert_eq!(stdout(&again), text);
    assert_eq!(listing(tmp.path()), BTreeSet::from(["vdp.conf".to_string()]));
}

#[test]
fn shipped_configs_are_the_defaults() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let id = path.file_stem().unwrap().to_string_lossy().into_owned();
        let from_file = pikan(&["train", "--config", path.to_str().unwrap(), "--dry-run"], tmp.path());
        let defaults = pikan(&["train", "--problem", &id, "--dry-run"], tmp.path());
        assert_eq!(from_file.status.code(), Some(0), "{id}");
        assert_eq!(stdout(&from_file), stdout(&defaults), "{id}");
        seen += 1;
    }
    assert_eq!(seen, 15);
}

#[test]
fn out_dir_defaults_to_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pikan"))
        .args(["train", "--problem", "linear_ode", "--epochs", "5", "--seed", "1"])
        .current_dir(tmp.path())
        .env("PIKAN_OUT_DIR", tmp.path().join("env_out"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(tmp.path().join("env_out/linear_ode-seed1/manifest.json").exists());
}

#[test]
fn reproduce_all_writes_the_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pikan(
        &["reproduce-all", "--problem", "linear_ode", "--seeds", "1", "--out", "rep"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(tmp.path().join("rep/summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("problem,arch,paper_loss_order,achieved_loss,relative_l2,pass")
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("linear_ode,\"[1,5,4,3,1]\",0.000001,"), "{row}");
    assert!(row.ends_with(",pass"));
    let hard = std::fs::read_to_string(tmp.path().join("rep/hard_checks.csv")).unwrap();
    assert_eq!(hard.lines().count(), 1 + 7);
    assert!(tmp.path().join("rep/linear_ode/checkpoint.json").exists());
}
