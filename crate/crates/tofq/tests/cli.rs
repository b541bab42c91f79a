use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tofq::config::{CorrelateConfig, EngineName, ParticleConfig, PointerConfig, ShotsConfig};
use tofq::ScenarioConfig;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tofq"));
    cmd.env_remove("TOFQ_THREADS");
    cmd
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn write_config(dir: &Path, cfg: &ScenarioConfig) -> PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, cfg.to_toml_string()).unwrap();
    path
}

fn error_line(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("stderr line");
    serde_json::from_str(line).unwrap_or_else(|_| panic!("not JSON: {line}"))
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn default_correlate_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_file("configs/default.toml");
    let out = run(&["correlate", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let produced = std::fs::read(dir.path().join("correlate.csv")).unwrap();
    let golden = std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/correlate_default.csv")).unwrap();
    assert!(produced == golden, "correlate output drifted from the golden file");
}

#[test]
fn golden_file_agrees_with_oracle_engine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_file("configs/default.toml");
    let out = run(&["correlate", "--config", cfg.to_str().unwrap(), "--engine", "oracle"], dir.path());
    assert!(out.status.success());
    let oracle = read_rows(&dir.path().join("correlate.csv"));
    let golden = read_rows(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/correlate_default.csv"));
    assert_eq!(oracle.len(), golden.len());
    for (o, g) in oracle.iter().zip(&golden) {
        assert_eq!(&o[0], &g[0]);
        for col in [2, 3] {
            let (a, b): (f64, f64) = (o[col].parse().unwrap(), g[col].parse().unwrap());
            assert!((a - b).abs() <= 1e-6, "λ = {}: {a} vs {b}", &g[0]);
        }
    }
}

#[test]
fn bell_default_columns_identical() {
    for row in read_rows(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/correlate_default.csv")) {
        assert_eq!(&row[2], &row[3]);
        assert_eq!(&row[4], "analytic");
    }
}

#[test]
fn shipped_configs_round_trip_and_validate() {
    for name in ["default", "bimodal_shots", "t2_sweep"] {
        let cfg = ScenarioConfig::load(&repo_file(&format!("configs/{name}.toml"))).unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg, "{name}");
        cfg.build().unwrap();
    }
    assert_eq!(ScenarioConfig::load(&repo_file("configs/default.toml")).unwrap(), ScenarioConfig::default());
}

#[test]
fn seeded_runs_are_byte_identical_across_thread_counts() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let mut cfg = ScenarioConfig::default();
    cfg.shots = Some(ShotsConfig { per_setting: 5_000, seed: 11 });
    cfg.budget.as_mut().unwrap().n_seeds = 4;
    let cfg_path = write_config(dirs[0].path(), &cfg);
    let cfg_arg = cfg_path.to_str().unwrap();
    for (i, dir) in dirs.iter().enumerate() {
        let threads = ["1", "2", "3"][i];
        for sub in ["reconstruct", "budget"] {
            let out = run(&[sub, "--config", cfg_arg, "--seed", "5", "--threads", threads], dir.path());
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
    }
    for file in ["char_fn.csv", "reconstruct.csv", "budget.csv", "budget.json"] {
        let first = std::fs::read(dirs[0].path().join(file)).unwrap();
        for dir in &dirs[1..] {
            assert!(std::fs::read(dir.path().join(file)).unwrap() == first, "{file} differs");
        }
    }
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dirs[0].path().join("budget.json")).unwrap()).unwrap();
    assert_eq!(meta["seeds"][0], 5);
    assert_eq!(meta["rng_algorithm"], "ChaCha8");
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn seed_flag_changes_shot_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.shots = Some(ShotsConfig { per_setting: 1_000, seed: 1 });
    let cfg_path = write_config(dir.path(), &cfg);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&["reconstruct", "--config", cfg_path.to_str().unwrap(), "--seed", "1"], &a).status.success());
    assert!(run(&["reconstruct", "--config", cfg_path.to_str().unwrap(), "--seed", "2"], &b).status.success());
    assert_ne!(std::fs::read(a.join("char_fn.csv")).unwrap(), std::fs::read(b.join("char_fn.csv")).unwrap());
}

#[test]
fn threads_env_var_is_honored_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["correlate", "--out"]).arg(dir.path()).env("TOFQ_THREADS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["correlate", "--out"]).arg(dir.path()).env("TOFQ_THREADS", "2").output().unwrap();
    assert!(out.status.success());
}

#[test]
fn unknown_key_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = ScenarioConfig::default().to_toml_string().replace("omega", "omgea");
    let path = dir.path().join("typo.toml");
    std::fs::write(&path, text).unwrap();
    let out = run(&["correlate", "--config", path.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    let line = error_line(&out);
    assert_eq!(line["error"], "config");
    assert!(line["message"].as_str().unwrap().contains("omgea"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn zero_coupling_is_rejected_before_computation() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.schedule.kappa = 0.0;
    cfg.correlate = Some(CorrelateConfig { t2: vec![1.0, 2.0] });
    let path = write_config(dir.path(), &cfg);
    let out = run(&["correlate", "--config", path.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vanishing_coupling_gives_flat_correlations() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.schedule.kappa = 1e-9;
    cfg.schedule.omega = 0.0;
    cfg.measurement.engine = EngineName::Both;
    cfg.measurement.pointer = PointerConfig::Separable { phi1: 0.3, phi2: 0.0 };
    cfg.correlate = Some(CorrelateConfig { t2: vec![0.75, 1.0, 2.0, 2.9] });
    let path = write_config(dir.path(), &cfg);
    let out = run(&["correlate", "--config", path.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_rows(&dir.path().join("correlate.csv"));
    assert_eq!(rows.len(), 8);
    let first: (f64, f64) = (rows[0][2].parse().unwrap(), rows[0][3].parse().unwrap());
    for r in &rows {
        let (xx, yy): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((xx - first.0).abs() < 1e-8 && (yy - first.1).abs() < 1e-8);
    }
}

#[test]
fn escaping_packet_trips_numerical_guard_without_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.particle = ParticleConfig::Gaussian { x0: 57.0, p0: 0.0, sigma: 1.0 };
    let path = write_config(dir.path(), &cfg);
    let out_dir = dir.path().join("o");
    let out = run(&["correlate", "--config", path.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_line(&out)["error"], "numerical_guard");
    assert!(!out_dir.join("correlate.csv").exists());
}

#[test]
fn infeasible_lambda_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.lambda.max = 20.0;
    let path = write_config(dir.path(), &cfg);
    let out = run(&["reconstruct", "--config", path.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out)["message"].as_str().unwrap().contains("no feasible schedule"));
}

#[test]
fn both_engines_rejected_for_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.measurement.engine = EngineName::Both;
    let path = write_config(dir.path(), &cfg);
    let out = run(&["reconstruct", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reconstruct_reads_back_its_own_samples() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert!(run(&["reconstruct"], &first).status.success());
    let samples = first.join("char_fn.csv");
    assert!(run(&["reconstruct", "--samples", samples.to_str().unwrap()], &second).status.success());
    for file in ["char_fn.csv", "reconstruct.csv"] {
        assert_eq!(std::fs::read(first.join(file)).unwrap(), std::fs::read(second.join(file)).unwrap());
    }
    let text = std::fs::read_to_string(first.join("reconstruct.csv")).unwrap();
    let l1: f64 = text.lines().find_map(|l| l.strip_prefix("# l1,")).unwrap().parse().unwrap();
    assert!(l1 <= 1e-3);
}

#[test]
fn noisy_reconstruction_warns_about_negative_density() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.shots = Some(ShotsConfig { per_setting: 200, seed: 3 });
    let path = write_config(dir.path(), &cfg);
    let out = run(&["reconstruct", "--config", path.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: reconstructed density dips"));
    let rows = read_rows(&dir.path().join("char_fn.csv"));
    assert!(rows.iter().all(|r| &r[5] == "shots" && !r[3].is_empty()));
}

#[test]
fn failing_check_exits_with_invariant_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::default();
    // Both bimodal peaks lie outside this window.
    cfg.momentum.p_min = -1.0;
    cfg.momentum.p_max = 1.0;
    cfg.momentum.points = 81;
    cfg.budget.as_mut().unwrap().n_seeds = 2;
    let path = write_config(dir.path(), &cfg);
    let out = run(&["oracle-check", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_line(&out)["error"], "invariant");
    let table = read_rows(&dir.path().join("oracle_check.csv"));
    let failed: Vec<_> = table.iter().filter(|r| &r[3] == "FAIL").map(|r| r[0].to_string()).collect();
    assert_eq!(failed, ["reconstruction_bimodal_peaks"]);
}

#[test]
fn bad_arguments_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["correlate", "--engine", "quantum"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["exit_code"], 2);
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
}
