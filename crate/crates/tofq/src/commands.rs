//! The four pipelines. Each returns its results in memory; [`execute`] writes
//! them to files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use tofq_core::analytic::{self, Correlations};
use tofq_core::oracle;
use tofq_core::reconstruct::{
    assemble, compare_distributions, extend_hermitian, invert_to_momentum_distribution, setting_means, CharFnSamples,
    Engine, Metrics, MomentumDistribution, SampleSource,
};
use tofq_core::shots::{budget_trial, noisy_sample, summarize, BudgetReport, BudgetSetup, ExactMeans, RNG_ALGORITHM, RNG_VERSION};
use tofq_core::states::CouplingSchedule;

use crate::config::{EngineName, Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::io::{self, CheckRow, CorrelationRow};

fn engines(cfg: &ScenarioConfig) -> Vec<Engine> {
    match cfg.measurement.engine {
        EngineName::Analytic => vec![Engine::Analytic],
        EngineName::Oracle => vec![Engine::Oracle],
        EngineName::Both => vec![Engine::Analytic, Engine::Oracle],
    }
}

fn correlations_with(engine: Engine, sc: &Scenario, schedule: &CouplingSchedule) -> Result<Correlations, CliError> {
    Ok(match engine {
        Engine::Analytic => analytic::correlations(&sc.particle, &sc.pointer, schedule)?,
        Engine::Oracle => oracle::correlations(&sc.particle, &sc.pointer, schedule)?,
    })
}

/// Correlations of the configured pointer state along the `λ` grid, or
/// along the explicit `t2` sweep when one is configured.
pub fn correlate(cfg: &ScenarioConfig, sc: &Scenario) -> Result<Vec<CorrelationRow>, CliError> {
    let engines = engines(cfg);
    // Grid rows report the requested λ rather than 2κ(t2 − t1) recomputed
    // from the rounded t2.
    let points: Vec<(f64, CouplingSchedule)> = match &sc.t2_sweep {
        Some(s) => s.iter().map(|s| (s.lambda(), *s)).collect(),
        None => sc.lambdas.iter().copied().zip(sc.lambda_schedules()?).collect(),
    };
    let per_schedule = points
        .par_iter()
        .map(|(lambda, s)| {
            engines
                .iter()
                .map(|&e| {
                    let c = correlations_with(e, sc, s)?;
                    Ok(CorrelationRow {
                        lambda: *lambda,
                        t2: s.t2(),
                        xx: c.xx,
                        yy: c.yy,
                        engine: SampleSource::from(e).as_str(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(per_schedule.concat())
}

/// `C_P(λ)` along the configured grid, with shot noise when a shot plan is
/// present.
pub fn sample(cfg: &ScenarioConfig, sc: &Scenario) -> Result<CharFnSamples, CliError> {
    let engine = cfg.single_engine()?;
    let scheme = cfg.scheme();
    let schedules = sc.lambda_schedules()?;
    let means = schedules
        .par_iter()
        .map(|s| setting_means(&sc.particle, s, scheme, engine))
        .collect::<Result<Vec<_>, _>>()?;
    let lambdas = sc.lambdas.clone();
    Ok(match &sc.shot_plan {
        Some(plan) => {
            let (values, errors) = means
                .iter()
                .enumerate()
                .map(|(i, m)| noisy_sample(plan, i, m))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .unzip();
            CharFnSamples::new(lambdas, values, Some(errors), SampleSource::Shots)?
        }
        None => {
            let values = means.iter().map(|m| assemble(scheme, m)).collect();
            CharFnSamples::new(lambdas, values, None, engine.into())?
        }
    })
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub samples: CharFnSamples,
    pub estimate: MomentumDistribution,
    pub reference: MomentumDistribution,
    pub metrics: Metrics,
}

/// Inverts `samples` (or freshly sampled values) and scores the result
/// against the exact density of the configured particle.
pub fn reconstruct(cfg: &ScenarioConfig, sc: &Scenario, samples: Option<CharFnSamples>) -> Result<Reconstruction, CliError> {
    let samples = match samples {
        Some(s) => s,
        None => sample(cfg, sc)?,
    };
    let mut estimate = invert_to_momentum_distribution(&extend_hermitian(&samples), sc.p_grid)?;
    let reference = MomentumDistribution::of_state(&sc.particle, sc.p_grid);
    let metrics = compare_distributions(&estimate, &reference)?;
    estimate.metrics = Some(metrics.clone());
    Ok(Reconstruction { samples, estimate, reference, metrics })
}

/// Budget comparison over `n_seeds` consecutive seeds, seeds in parallel.
pub fn budget(cfg: &ScenarioConfig, sc: &Scenario) -> Result<BudgetReport, CliError> {
    let b = cfg.budget.as_ref().ok_or_else(|| CliError::Config("budget section is required".into()))?;
    sc.lambda_schedules()?;
    let mut setup = BudgetSetup::new(&sc.particle, sc.template, sc.lambdas.clone(), sc.p_grid, b.total_shots_per_lambda)?;
    setup.correlator = cfg.measurement.correlator.into();
    let means = ExactMeans::compute(&setup)?;
    let seeds: Vec<u64> = (b.base_seed..b.base_seed + b.n_seeds).collect();
    let rows = seeds
        .par_iter()
        .map(|&s| budget_trial(&setup, &means, s))
        .collect::<Result<Vec<_>, _>>()?
        .concat();
    let summaries = summarize(&rows);
    Ok(BudgetReport { rows, summaries })
}

pub fn budget_csv(cfg: &ScenarioConfig, report: &BudgetReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "seed", "lambda_max", "delta_lambda", "total_shots", "L1", "Linf"])
        .expect("in-memory write");
    for r in &report.rows {
        w.write_record([
            r.arm.label().to_string(),
            r.seed.to_string(),
            io::fmt(cfg.lambda.max),
            io::fmt(cfg.lambda.step),
            r.total_shots.to_string(),
            io::fmt(r.metrics.l1),
            io::fmt(r.metrics.linf),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

#[derive(Debug, Serialize)]
struct ArmJson {
    scheme: &'static str,
    shots_per_setting: u64,
    trials: usize,
    mean_l1: f64,
    spread_l1: f64,
    mean_linf: f64,
}

#[derive(Debug, Serialize)]
struct BudgetMeta {
    rng_algorithm: &'static str,
    rng_version: &'static str,
    config_hash: String,
    lambda_max: f64,
    delta_lambda: f64,
    total_shots_per_lambda: u64,
    seeds: Vec<u64>,
    arms: Vec<ArmJson>,
}

pub fn budget_json(cfg: &ScenarioConfig, report: &BudgetReport) -> Vec<u8> {
    let total = cfg.budget.as_ref().map_or(0, |b| b.total_shots_per_lambda);
    let mut seeds: Vec<u64> = report.rows.iter().map(|r| r.seed).collect();
    seeds.dedup();
    let meta = BudgetMeta {
        rng_algorithm: RNG_ALGORITHM,
        rng_version: RNG_VERSION,
        config_hash: cfg.hash(),
        lambda_max: cfg.lambda.max,
        delta_lambda: cfg.lambda.step,
        total_shots_per_lambda: total,
        seeds,
        arms: report
            .summaries
            .iter()
            .map(|s| ArmJson {
                scheme: s.arm.label(),
                shots_per_setting: s.arm.shots_per_setting(total),
                trials: s.trials,
                mean_l1: s.mean_l1,
                spread_l1: s.spread_l1,
                mean_linf: s.mean_linf,
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
    bytes.push(b'\n');
    bytes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Correlate,
    Reconstruct,
    OracleCheck,
    Budget,
}

/// Runs `command` and writes its files under `cfg.output.dir`. Returns the
/// written paths. A failed `oracle-check` still writes its table before
/// returning the invariant error.
pub fn execute(
    command: Command,
    cfg: &ScenarioConfig,
    samples_path: Option<&Path>,
) -> Result<Vec<PathBuf>, CliError> {
    let sc = cfg.build()?;
    let dir = &cfg.output.dir;
    let mut written = Vec::new();
    let mut emit = |name: &str, bytes: Vec<u8>| -> Result<(), CliError> {
        let path = dir.join(name);
        io::write_atomic(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    match command {
        Command::Correlate => {
            let rows = correlate(cfg, &sc)?;
            emit("correlate.csv", io::correlate_csv(&rows))?;
        }
        Command::Reconstruct => {
            let input = samples_path.map(io::read_char_fn_csv).transpose()?;
            if input.is_none() {
                cfg.single_engine()?;
            }
            let r = reconstruct(cfg, &sc, input)?;
            let over = r.samples.magnitude_violations();
            if !over.is_empty() {
                eprintln!("warning: {} samples exceed |C| <= 1 beyond their error bars", over.len());
            }
            if r.estimate.has_negative_excursion() {
                eprintln!("warning: reconstructed density dips to {:e}", r.estimate.min_density());
            }
            emit("char_fn.csv", io::char_fn_csv(&r.samples))?;
            emit("reconstruct.csv", io::density_csv(&r.estimate, &r.reference, &r.metrics))?;
        }
        Command::OracleCheck => {
            let ctx = crate::checks::CheckContext::from_config(cfg, &sc)?;
            let rows = crate::checks::run_all(&ctx)?;
            for r in &rows {
                println!("{:<32} {:>24} {:>24} {}", r.name, io::fmt(r.max_deviation), io::fmt(r.tolerance), r.status());
            }
            emit("oracle_check.csv", io::check_csv(&rows))?;
            let failed: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
            if !failed.is_empty() {
                return Err(CliError::Invariant(format!("failed checks: {}", failed.join(", "))));
            }
        }
        Command::Budget => {
            let report = budget(cfg, &sc)?;
            emit("budget.csv", budget_csv(cfg, &report))?;
            emit("budget.json", budget_json(cfg, &report))?;
        }
    }
    Ok(written)
}

/// Table rows of a finished `oracle-check`, for callers that want them
/// without touching the file system.
pub fn oracle_check(cfg: &ScenarioConfig) -> Result<Vec<CheckRow>, CliError> {
    let sc = cfg.build()?;
    crate::checks::run_all(&crate::checks::CheckContext::from_config(cfg, &sc)?)
}
