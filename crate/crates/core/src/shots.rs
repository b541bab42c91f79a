//! Finite ensembles: every correlation setting is read out `N` times, each
//! shot a ±1 outcome with `P(+1) = (1 + ⟨O⟩)/2`.
//!
//! Randomness is ChaCha8 seeded from a 64-bit seed, one stream per task
//! (`λ` index × settings + setting index), so results do not depend on the
//! order in which tasks run.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::analytic::{Correlator, Part, PointerScheme};
use crate::reconstruct::{
    self, compare_distributions, extend_hermitian, invert_to_momentum_distribution, CharFnSamples, Engine, Metrics,
    MomentumDistribution, MomentumGrid, SampleSource, StdErr,
};
use crate::states::{ParticleState, ScheduleTemplate};
use crate::{Error, Result, C64};
#[allow(unused_imports)]
use num_traits::Float;

pub const RNG_ALGORITHM: &str = "ChaCha8";
pub const RNG_VERSION: &str = "rand_chacha 0.9 (one stream per task via set_stream)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotPlan {
    shots_per_setting: u64,
    scheme: PointerScheme,
    rng_seed: u64,
}

impl ShotPlan {
    pub fn new(shots_per_setting: u64, scheme: PointerScheme, rng_seed: u64) -> Result<Self> {
        if shots_per_setting == 0 {
            return Err(Error::InvalidShotPlan("shots_per_setting must be at least 1"));
        }
        Ok(Self { shots_per_setting, scheme, rng_seed })
    }

    pub fn shots_per_setting(&self) -> u64 {
        self.shots_per_setting
    }

    pub fn scheme(&self) -> PointerScheme {
        self.scheme
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn settings_per_lambda(&self) -> usize {
        self.scheme.settings_per_lambda()
    }

    pub fn total_shots(&self, n_lambdas: usize) -> u64 {
        self.shots_per_setting * (self.settings_per_lambda() * n_lambdas) as u64
    }
}

/// Generator for task `stream` of `seed`.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Born rule for a ±1 observable: `P(+1) = (1 + mean)/2`.
pub fn outcome_probability(mean: f64) -> Result<f64> {
    if mean.is_nan() || mean.abs() > 1.0 + 1e-12 {
        return Err(Error::MeanOutOfRange(mean));
    }
    Ok(((1.0 + mean) / 2.0).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub estimate: f64,
    /// `2 √(p̂(1 − p̂)/N)`.
    pub stderr: f64,
}

/// Draws `shots` outcomes and returns `2k/N − 1` with its standard error.
pub fn estimate_mean_with<R: rand::Rng + ?Sized>(rng: &mut R, true_mean: f64, shots: u64) -> Result<MeanEstimate> {
    if shots == 0 {
        return Err(Error::InvalidShotPlan("shots_per_setting must be at least 1"));
    }
    let p = outcome_probability(true_mean)?;
    let binomial = Binomial::new(shots, p).map_err(|_| Error::MeanOutOfRange(true_mean))?;
    let k = binomial.sample(rng);
    let n = shots as f64;
    let p_hat = k as f64 / n;
    Ok(MeanEstimate { estimate: 2.0 * p_hat - 1.0, stderr: 2.0 * (p_hat * (1.0 - p_hat) / n).sqrt() })
}

/// One setting's estimate on stream 0 of the plan's seed.
pub fn estimate_mean(true_mean: f64, plan: &ShotPlan) -> Result<MeanEstimate> {
    estimate_mean_with(&mut task_rng(plan.rng_seed, 0), true_mean, plan.shots_per_setting)
}

/// Noisy `C_P(λ)` at the `index`-th grid point from exact setting means.
pub fn noisy_sample(plan: &ShotPlan, index: usize, means: &[f64]) -> Result<(C64, StdErr)> {
    let settings = plan.scheme.settings();
    let mut value = C64::new(0.0, 0.0);
    let (mut var_re, mut var_im) = (0.0, 0.0);
    for (s, (setting, &mean)) in settings.iter().zip(means).enumerate() {
        let stream = (index * settings.len() + s) as u64;
        let est = estimate_mean_with(&mut task_rng(plan.rng_seed, stream), mean, plan.shots_per_setting)?;
        match setting.part {
            Part::Re => {
                value.re += est.estimate;
                var_re += est.stderr * est.stderr;
            }
            Part::Im => {
                value.im += est.estimate;
                var_im += est.stderr * est.stderr;
            }
        }
    }
    Ok((value, StdErr { re: var_re.sqrt(), im: var_im.sqrt() }))
}

/// `C_P(λ)` estimated from `N` shots per setting; exact means come from
/// `engine`.
pub fn noisy_char_fn(
    particle: &ParticleState,
    template: &ScheduleTemplate,
    lambdas: &[f64],
    plan: &ShotPlan,
    engine: Engine,
) -> Result<CharFnSamples> {
    let mut values = Vec::with_capacity(lambdas.len());
    let mut errors = Vec::with_capacity(lambdas.len());
    for (i, &l) in lambdas.iter().enumerate() {
        let schedule = template.at_lambda(l)?;
        let means = reconstruct::setting_means(particle, &schedule, plan.scheme, engine)?;
        let (v, e) = noisy_sample(plan, i, &means)?;
        values.push(v);
        errors.push(e);
    }
    CharFnSamples::new(lambdas.to_vec(), values, Some(errors), SampleSource::Shots)
}

/// One arm of the budget comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BudgetArm {
    /// Separable pointers, a quarter of the per-λ budget per setting.
    Separable,
    /// Bell pointers at the same total budget: half of it per setting.
    Entangled,
    /// Bell pointers with the separable arm's shots per setting (half the
    /// total budget).
    EntangledEqualSetting,
}

impl BudgetArm {
    pub const ALL: [BudgetArm; 3] = [BudgetArm::Separable, BudgetArm::Entangled, BudgetArm::EntangledEqualSetting];

    pub fn label(&self) -> &'static str {
        match self {
            BudgetArm::Separable => "separable",
            BudgetArm::Entangled => "entangled",
            BudgetArm::EntangledEqualSetting => "entangled_equal_setting",
        }
    }

    fn scheme(&self, which: Correlator) -> PointerScheme {
        match self {
            BudgetArm::Separable => PointerScheme::Separable,
            _ => PointerScheme::Entangled(which),
        }
    }

    /// Shots per setting for a per-λ budget `total`.
    pub fn shots_per_setting(&self, total: u64) -> u64 {
        match self {
            BudgetArm::Entangled => total / 2,
            _ => total / 4,
        }
    }
}

/// Inputs shared by every trial of a budget comparison.
#[derive(Debug, Clone)]
pub struct BudgetSetup<'a> {
    pub particle: &'a ParticleState,
    pub template: ScheduleTemplate,
    pub lambdas: Vec<f64>,
    pub p_grid: MomentumGrid,
    pub reference: MomentumDistribution,
    pub total_shots_per_lambda: u64,
    pub correlator: Correlator,
}

impl<'a> BudgetSetup<'a> {
    /// Setup with the exact `|ψ̃(p)|²` as reference.
    pub fn new(
        particle: &'a ParticleState,
        template: ScheduleTemplate,
        lambdas: Vec<f64>,
        p_grid: MomentumGrid,
        total_shots_per_lambda: u64,
    ) -> Result<Self> {
        if total_shots_per_lambda < 4 {
            return Err(Error::InvalidShotPlan("total shots per λ must cover four settings"));
        }
        Ok(Self {
            particle,
            template,
            reference: MomentumDistribution::of_state(particle, p_grid),
            lambdas,
            p_grid,
            total_shots_per_lambda,
            correlator: Correlator::Xx,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRow {
    pub arm: BudgetArm,
    pub seed: u64,
    /// Shots consumed over the whole `λ` grid.
    pub total_shots: u64,
    pub metrics: Metrics,
}

/// Exact setting means per `λ` for both pointer preparations.
#[derive(Debug, Clone)]
pub struct ExactMeans {
    separable: Vec<Vec<f64>>,
    entangled: Vec<Vec<f64>>,
}

impl ExactMeans {
    pub fn compute(setup: &BudgetSetup<'_>) -> Result<Self> {
        let per_scheme = |scheme| {
            setup
                .lambdas
                .iter()
                .map(|&l| {
                    let s = setup.template.at_lambda(l)?;
                    reconstruct::setting_means(setup.particle, &s, scheme, Engine::Analytic)
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            separable: per_scheme(PointerScheme::Separable)?,
            entangled: per_scheme(PointerScheme::Entangled(setup.correlator))?,
        })
    }
}

/// Reconstructs the density under every arm for one seed.
pub fn budget_trial(setup: &BudgetSetup<'_>, means: &ExactMeans, seed: u64) -> Result<Vec<BudgetRow>> {
    BudgetArm::ALL
        .iter()
        .map(|&arm| {
            let plan = ShotPlan::new(arm.shots_per_setting(setup.total_shots_per_lambda), arm.scheme(setup.correlator), seed)?;
            let table = match arm {
                BudgetArm::Separable => &means.separable,
                _ => &means.entangled,
            };
            let mut values = Vec::with_capacity(table.len());
            for (i, m) in table.iter().enumerate() {
                values.push(noisy_sample(&plan, i, m)?.0);
            }
            let samples = CharFnSamples::new(setup.lambdas.clone(), values, None, SampleSource::Shots)?;
            let estimate = invert_to_momentum_distribution(&extend_hermitian(&samples), setup.p_grid)?;
            Ok(BudgetRow {
                arm,
                seed,
                total_shots: plan.total_shots(setup.lambdas.len()),
                metrics: compare_distributions(&estimate, &setup.reference)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub arm: BudgetArm,
    pub trials: usize,
    pub mean_l1: f64,
    /// Sample standard deviation of L1 over seeds.
    pub spread_l1: f64,
    pub mean_linf: f64,
}

pub fn summarize(rows: &[BudgetRow]) -> Vec<ArmSummary> {
    BudgetArm::ALL
        .iter()
        .filter_map(|&arm| {
            let l1: Vec<f64> = rows.iter().filter(|r| r.arm == arm).map(|r| r.metrics.l1).collect();
            if l1.is_empty() {
                return None;
            }
            let n = l1.len() as f64;
            let mean_l1 = l1.iter().sum::<f64>() / n;
            let spread_l1 = if l1.len() > 1 {
                (l1.iter().map(|v| (v - mean_l1) * (v - mean_l1)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            let mean_linf =
                rows.iter().filter(|r| r.arm == arm).map(|r| r.metrics.linf).sum::<f64>() / n;
            Some(ArmSummary { arm, trials: l1.len(), mean_l1, spread_l1, mean_linf })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub rows: Vec<BudgetRow>,
    pub summaries: Vec<ArmSummary>,
}

impl BudgetReport {
    pub fn summary(&self, arm: BudgetArm) -> Option<&ArmSummary> {
        self.summaries.iter().find(|s| s.arm == arm)
    }
}

/// Separable versus entangled reconstruction error at equal shot budgets,
/// one trial per seed.
pub fn budget_comparison(setup: &BudgetSetup<'_>, seeds: &[u64]) -> Result<BudgetReport> {
    let means = ExactMeans::compute(setup)?;
    let mut rows = Vec::with_capacity(3 * seeds.len());
    for &seed in seeds {
        rows.extend(budget_trial(setup, &means, seed)?);
    }
    let summaries = summarize(&rows);
    Ok(BudgetReport { rows, summaries })
}
