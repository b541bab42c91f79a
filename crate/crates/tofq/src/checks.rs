//! Cross-module invariant checks, grouped into seven criteria. Physical
//! parameters of each sweep are fixed here; the configuration only supplies
//! the grids, the schedule template used for reconstructions and the shot
//! budget.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use rayon::prelude::*;
use tofq_core::analytic::{self, char_fn, char_fn_momentum, make_bell, make_separable_optimal, Correlator, PointerScheme};
use tofq_core::oracle::{self, expect_particle, expect_two_qubit, run_schedule_stages, Quadrature, TwoQubitObservable};
use tofq_core::reconstruct::{
    compare_distributions, extend_hermitian, invert_to_momentum_distribution, lambda_grid, sample_char_fn, Engine,
    MomentumDistribution, MomentumGrid, PEAK_THRESHOLD,
};
use tofq_core::shots::{estimate_mean_with, task_rng, BudgetArm};
use tofq_core::states::{
    make_gaussian, make_superposition, CouplingSchedule, GridSpec, ParticleState, Pointer, QubitPairState,
    ScheduleTemplate,
};
use tofq_core::C64;

use crate::commands;
use crate::config::{BudgetConfig, Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::io::CheckRow;

type Rows = Result<Vec<CheckRow>, CliError>;

/// Replications per shot count in the standard-error scaling check.
pub const STDERR_SEEDS: u64 = 400;
pub const STDERR_SHOTS: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];

#[derive(Debug, Clone)]
pub struct CheckContext {
    pub config: ScenarioConfig,
    pub grid: GridSpec,
    pub template: ScheduleTemplate,
    pub p_grid: MomentumGrid,
    pub budget: BudgetConfig,
}

impl CheckContext {
    pub fn from_config(cfg: &ScenarioConfig, sc: &Scenario) -> Result<Self, CliError> {
        let budget = cfg
            .budget
            .clone()
            .unwrap_or(BudgetConfig { total_shots_per_lambda: 400_000, n_seeds: 20, base_seed: 1 });
        Ok(Self { config: cfg.clone(), grid: sc.grid, template: sc.template, p_grid: sc.p_grid, budget })
    }

    pub fn default_context() -> Result<Self, CliError> {
        let cfg = ScenarioConfig::default();
        let sc = cfg.build()?;
        Self::from_config(&cfg, &sc)
    }
}

pub struct Criterion {
    pub number: u8,
    pub title: &'static str,
    pub run: fn(&CheckContext) -> Rows,
}

pub const CRITERIA: [Criterion; 7] = [
    Criterion { number: 1, title: "analytic and oracle correlations agree", run: analytic_oracle_equivalence },
    Criterion { number: 2, title: "characteristic-function identities", run: char_fn_identities },
    Criterion { number: 3, title: "Heisenberg mean relations", run: heisenberg_means },
    Criterion { number: 4, title: "reconstruction fidelity", run: reconstruction_fidelity },
    Criterion { number: 5, title: "scheme equivalence and setting counts", run: scheme_equivalence },
    Criterion { number: 6, title: "shot statistics", run: shot_statistics },
    Criterion { number: 7, title: "unitarity and determinism", run: unitarity_and_determinism },
];

pub fn run_all(ctx: &CheckContext) -> Rows {
    let mut rows = Vec::new();
    for c in &CRITERIA {
        rows.extend((c.run)(ctx)?);
    }
    Ok(rows)
}

fn gaussian(grid: GridSpec, x0: f64, p0: f64, sigma: f64) -> Result<ParticleState, CliError> {
    Ok(make_gaussian(grid, x0, p0, sigma)?)
}

/// Equal-weight superposition of packets at `p0 = ±2`.
fn bimodal(grid: GridSpec) -> Result<ParticleState, CliError> {
    let plus = gaussian(grid, 0.0, 2.0, FRAC_1_SQRT_2)?;
    let minus = gaussian(grid, 0.0, -2.0, FRAC_1_SQRT_2)?;
    let one = C64::new(1.0, 0.0);
    Ok(make_superposition(&[(one, &plus), (one, &minus)])?)
}

fn sweep_pointers() -> [QubitPairState; 5] {
    [
        QubitPairState::basis(0, 0),
        make_separable_optimal(0.0, 0.0),
        make_separable_optimal(0.0, FRAC_PI_2),
        make_bell(0.0),
        make_bell(FRAC_PI_2),
    ]
}

/// Gaussian packets and schedules of the equivalence sweep.
fn sweep_cases(grid: GridSpec) -> Result<Vec<(ParticleState, CouplingSchedule)>, CliError> {
    let mut cases = Vec::new();
    for p0 in [0.0, 2.0] {
        let particle = gaussian(grid, 0.0, p0, FRAC_1_SQRT_2)?;
        for kappa in [0.5, 1.0] {
            for t2 in [1.5, 2.0, 3.0] {
                for omega in [0.0, 1.0] {
                    cases.push((particle.clone(), CouplingSchedule::new(kappa, 1.0, t2, 4.0, omega)?));
                }
            }
        }
    }
    Ok(cases)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

pub fn analytic_oracle_equivalence(ctx: &CheckContext) -> Rows {
    let cases = sweep_cases(ctx.grid)?;
    let deviations = cases
        .par_iter()
        .flat_map_iter(|(particle, schedule)| {
            sweep_pointers().into_iter().map(move |q| -> Result<(f64, f64), CliError> {
                let a = analytic::correlations(particle, &q, schedule)?;
                let o = oracle::correlations(particle, &q, schedule)?;
                Ok(((a.xx - o.xx).abs(), (a.yy - o.yy).abs()))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vec![
        CheckRow::at_most("analytic_vs_oracle_xx", max_of(deviations.iter().map(|d| d.0)), 1e-6),
        CheckRow::at_most("analytic_vs_oracle_yy", max_of(deviations.iter().map(|d| d.1)), 1e-6),
    ])
}

fn test_packets(grid: GridSpec) -> Result<Vec<ParticleState>, CliError> {
    Ok(vec![
        gaussian(grid, 0.0, 0.0, FRAC_1_SQRT_2)?,
        gaussian(grid, 0.0, 2.0, FRAC_1_SQRT_2)?,
        gaussian(grid, 3.0, -1.0, 1.2)?,
        bimodal(grid)?,
    ])
}

pub fn char_fn_identities(ctx: &CheckContext) -> Rows {
    let lambdas = lambda_grid(8.0, 0.05)?;
    let (mut anchor, mut hermitian, mut dual) = (0.0f64, 0.0f64, 0.0f64);
    for particle in test_packets(ctx.grid)? {
        let values = lambdas.iter().map(|&l| char_fn(&particle, l)).collect::<Result<Vec<_>, _>>()?;
        let samples =
            tofq_core::reconstruct::CharFnSamples::new(lambdas.clone(), values.clone(), None, Engine::Analytic.into())?;
        let at_zero = extend_hermitian(&samples).at(0.0).ok_or_else(|| CliError::Invariant("no λ = 0 sample".into()))?;
        anchor = anchor.max((at_zero - C64::new(1.0, 0.0)).norm());
        for (&l, v) in lambdas.iter().zip(&values) {
            hermitian = hermitian.max((char_fn(&particle, -l)? - v.conj()).norm());
            dual = dual.max((char_fn_momentum(&particle, l)? - v).norm());
        }
    }
    Ok(vec![
        CheckRow::at_most("char_fn_anchor", anchor, 0.0),
        CheckRow::at_most("char_fn_hermitian", hermitian, 1e-12),
        CheckRow::at_most("char_fn_dual_route", dual, 1e-8),
    ])
}

pub fn heisenberg_means(ctx: &CheckContext) -> Rows {
    let particles = [gaussian(ctx.grid, 0.0, 2.0, FRAC_1_SQRT_2)?, gaussian(ctx.grid, 1.0, -1.0, 1.0)?];
    let schedules = [CouplingSchedule::new(1.0, 1.0, 2.0, 4.0, 1.0)?, CouplingSchedule::new(0.5, 1.0, 3.0, 4.0, 0.0)?];
    let basis = [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(a, b)| QubitPairState::basis(a, b));
    let (mut dp, mut dx, mut dz) = (0.0f64, 0.0f64, 0.0f64);
    let z = [TwoQubitObservable::z1(), TwoQubitObservable::z2()];
    for particle in &particles {
        let (x0, p0) = (particle.mean_position(), particle.mean_momentum());
        for s in &schedules {
            let (k, t) = (s.kappa(), s.t_read());
            for q in basis.iter().chain(sweep_pointers().iter()) {
                let stages = run_schedule_stages(particle, q, s)?;
                let (s1, s2) = (q.mean_sz(Pointer::First), q.mean_sz(Pointer::Second));
                for stage in &stages {
                    dz = dz.max((expect_two_qubit(stage, &z[0]) - s1).abs());
                    dz = dz.max((expect_two_qubit(stage, &z[1]) - s2).abs());
                }
                if basis.contains(q) {
                    let last = stages.last().expect("six stages");
                    let p_expected = p0 - k * s1 - k * s2;
                    let x_expected = x0 + p0 * t - k * (t - s.t1()) * s1 - k * (t - s.t2()) * s2;
                    dp = dp.max((expect_particle(last, Quadrature::P) - p_expected).abs());
                    dx = dx.max((expect_particle(last, Quadrature::X) - x_expected).abs());
                }
            }
        }
    }
    Ok(vec![
        CheckRow::at_most("heisenberg_mean_p", dp, 1e-8),
        CheckRow::at_most("heisenberg_mean_x", dx, 1e-8),
        CheckRow::at_most("sigma_z_constant", dz, 1e-12),
    ])
}

fn analytic_density(
    ctx: &CheckContext,
    particle: &ParticleState,
    scheme: PointerScheme,
) -> Result<MomentumDistribution, CliError> {
    let lambdas = lambda_grid(8.0, 0.05)?;
    let samples = sample_char_fn(particle, &ctx.template, scheme, &lambdas, Engine::Analytic)?;
    Ok(invert_to_momentum_distribution(&extend_hermitian(&samples), ctx.p_grid)?)
}

pub fn reconstruction_fidelity(ctx: &CheckContext) -> Rows {
    let scheme = PointerScheme::Entangled(Correlator::Xx);
    let single = gaussian(ctx.grid, 0.0, 2.0, FRAC_1_SQRT_2)?;
    let estimate = analytic_density(ctx, &single, scheme)?;
    let l1 = compare_distributions(&estimate, &MomentumDistribution::of_state(&single, ctx.p_grid))?.l1;

    let estimate = analytic_density(ctx, &bimodal(ctx.grid)?, scheme)?;
    let peaks = estimate.peaks(PEAK_THRESHOLD);
    let offset = if peaks.len() == 2 {
        max_of([-2.0, 2.0].map(|target| peaks.iter().map(|p| (p - target).abs()).fold(f64::INFINITY, f64::min)))
    } else {
        f64::INFINITY
    };
    Ok(vec![
        CheckRow::at_most("reconstruction_gaussian_l1", l1, 1e-3),
        CheckRow::at_most("reconstruction_bimodal_peaks", offset, ctx.p_grid.step()),
    ])
}

pub fn scheme_equivalence(ctx: &CheckContext) -> Rows {
    let settings = (PointerScheme::Separable.settings_per_lambda() as f64 - 4.0).abs()
        + (PointerScheme::Entangled(Correlator::Xx).settings_per_lambda() as f64 - 2.0).abs()
        + (PointerScheme::Entangled(Correlator::Yy).settings_per_lambda() as f64 - 2.0).abs();

    let mut density = 0.0f64;
    for particle in [gaussian(ctx.grid, 0.0, 2.0, FRAC_1_SQRT_2)?, bimodal(ctx.grid)?] {
        let sep = analytic_density(ctx, &particle, PointerScheme::Separable)?;
        for c in [Correlator::Xx, Correlator::Yy] {
            let ent = analytic_density(ctx, &particle, PointerScheme::Entangled(c))?;
            density = density.max(max_of(sep.density.iter().zip(&ent.density).map(|(a, b)| (a - b).abs())));
        }
    }

    let cases = sweep_cases(ctx.grid)?;
    let bell = [0.0, FRAC_PI_2, 1.0, 3.0].map(make_bell);
    let mut analytic_gap = 0.0f64;
    for (particle, schedule) in &cases {
        for q in &bell {
            let a = analytic::correlations(particle, q, schedule)?;
            analytic_gap = analytic_gap.max((a.xx - a.yy).abs());
        }
    }
    let oracle_gaps = cases
        .par_iter()
        .flat_map_iter(|(particle, schedule)| {
            bell.iter().map(move |q| -> Result<f64, CliError> {
                let o = oracle::correlations(particle, q, schedule)?;
                Ok((o.xx - o.yy).abs())
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let oracle_gap = max_of(oracle_gaps);
    Ok(vec![
        CheckRow::at_most("setting_counts", settings, 0.0),
        CheckRow::at_most("separable_vs_entangled_density", density, 1e-12),
        CheckRow::at_most("bell_xx_equals_yy_analytic", analytic_gap, 1e-14),
        CheckRow::at_most("bell_xx_equals_yy_oracle", oracle_gap, 1e-8),
    ])
}

pub fn shot_statistics(ctx: &CheckContext) -> Rows {
    let particle = gaussian(ctx.grid, 0.0, 2.0, FRAC_1_SQRT_2)?;
    let schedule = ctx.template.at_lambda(2.0f64.min(ctx.config.lambda.max))?;
    let mean = analytic::correlations(&particle, &make_bell(0.0), &schedule)?.xx;
    let theory = (1.0 - mean * mean).sqrt();
    let (mut empirical, mut reported) = (0.0f64, 0.0f64);
    for (k, &n) in STDERR_SHOTS.iter().enumerate() {
        let estimates = (0..STDERR_SEEDS)
            .into_par_iter()
            .map(|seed| estimate_mean_with(&mut task_rng(seed, k as u64), mean, n))
            .collect::<Result<Vec<_>, _>>()?;
        let m = estimates.len() as f64;
        let avg = estimates.iter().map(|e| e.estimate).sum::<f64>() / m;
        let spread = (estimates.iter().map(|e| (e.estimate - avg).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
        let mean_reported = estimates.iter().map(|e| e.stderr).sum::<f64>() / m;
        let scale = (n as f64).sqrt() / theory;
        empirical = empirical.max((spread * scale - 1.0).abs());
        reported = reported.max((mean_reported * scale - 1.0).abs());
    }

    let mut cfg = ctx.config.clone();
    cfg.budget = Some(ctx.budget.clone());
    let report = commands::budget(&cfg, &cfg.build()?)?;
    let mean_l1 = |arm| report.summary(arm).map_or(f64::INFINITY, |s| s.mean_l1);
    Ok(vec![
        CheckRow::at_most("stderr_scaling_empirical", empirical, 0.2),
        CheckRow::at_most("stderr_scaling_reported", reported, 0.2),
        CheckRow::at_most(
            "entangled_l1_minus_separable_l1",
            mean_l1(BudgetArm::Entangled) - mean_l1(BudgetArm::Separable),
            0.0,
        ),
    ])
}

pub fn unitarity_and_determinism(ctx: &CheckContext) -> Rows {
    let cases = sweep_cases(ctx.grid)?;
    let drifts = cases
        .par_iter()
        .flat_map_iter(|(particle, schedule)| {
            sweep_pointers().into_iter().map(move |q| -> Result<f64, CliError> {
                let stages = run_schedule_stages(particle, &q, schedule)?;
                let n0 = stages[0].norm_squared();
                Ok(max_of(stages.iter().map(|s| (s.norm_squared() - n0).abs())))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    // The same outputs on one thread and on the full pool.
    let cfg = &ctx.config;
    let sc = cfg.build()?;
    let render = || -> Result<Vec<u8>, CliError> {
        let mut bytes = crate::io::correlate_csv(&commands::correlate(cfg, &sc)?);
        if cfg.budget.is_some() {
            bytes.extend(commands::budget_csv(cfg, &commands::budget(cfg, &sc)?));
        }
        Ok(bytes)
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| CliError::Invariant(e.to_string()))?
        .install(render)?;
    let pooled = render()?;
    let mismatch = if single == pooled { 0.0 } else { 1.0 };
    Ok(vec![
        CheckRow::below("norm_drift", max_of(drifts), 1e-12),
        CheckRow::at_most("thread_count_independence", mismatch, 0.0),
    ])
}
