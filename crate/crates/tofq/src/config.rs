//! Scenario configuration: a strict TOML schema and its validation into
//! ready-to-run core objects.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tofq_core::analytic::{make_bell, make_separable_optimal, Correlator, PointerScheme};
use tofq_core::reconstruct::{lambda_grid, Engine, MomentumGrid};
use tofq_core::shots::ShotPlan;
use tofq_core::states::{
    make_gaussian, make_superposition, CouplingSchedule, GridSpec, ParticleState, QubitPairState,
    ScheduleTemplate,
};
use tofq_core::C64;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid: GridConfig,
    pub particle: ParticleConfig,
    pub schedule: ScheduleConfig,
    pub lambda: LambdaConfig,
    pub momentum: MomentumConfig,
    pub measurement: MeasurementConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlate: Option<CorrelateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<ShotsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

/// One term of a superposition; `amplitude` is `[re, im]` and the sum is
/// renormalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub amplitude: [f64; 2],
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParticleConfig {
    Gaussian { x0: f64, p0: f64, sigma: f64 },
    Superposition { components: Vec<ComponentConfig> },
}

/// Everything of a coupling schedule except `t2`, which follows from `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub kappa: f64,
    pub t1: f64,
    pub t_read: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaConfig {
    pub max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Separable,
    Entangled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorName {
    Xx,
    Yy,
}

impl From<CorrelatorName> for Correlator {
    fn from(c: CorrelatorName) -> Self {
        match c {
            CorrelatorName::Xx => Correlator::Xx,
            CorrelatorName::Yy => Correlator::Yy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineName {
    Analytic,
    Oracle,
    /// Both engines; only `correlate` accepts this.
    Both,
}

/// Pointer preparation used by `correlate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointerConfig {
    Basis { j1: u8, j2: u8 },
    Separable { phi1: f64, phi2: f64 },
    Bell { phi: f64 },
    Amplitudes { re: [f64; 4], im: [f64; 4] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    pub scheme: SchemeName,
    pub correlator: CorrelatorName,
    pub engine: EngineName,
    pub pointer: PointerConfig,
}

/// Explicit `t2` sweep for `correlate` in place of the `λ` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelateConfig {
    pub t2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotsConfig {
    pub per_setting: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub total_shots_per_lambda: u64,
    pub n_seeds: u64,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

impl Default for ScenarioConfig {
    /// Gaussian packet with `p0 = 2`, `σ = 1/√2` on the reference grid, read
    /// out through Bell pointers.
    fn default() -> Self {
        Self {
            grid: GridConfig { n_points: 4096, x_min: -60.0, x_max: 60.0 },
            particle: ParticleConfig::Gaussian { x0: 0.0, p0: 2.0, sigma: std::f64::consts::FRAC_1_SQRT_2 },
            schedule: ScheduleConfig { kappa: 2.0, t1: 0.5, t_read: 3.0, omega: 1.0 },
            lambda: LambdaConfig { max: 8.0, step: 0.05 },
            momentum: MomentumConfig { p_min: -8.0, p_max: 8.0, points: 641 },
            measurement: MeasurementConfig {
                scheme: SchemeName::Entangled,
                correlator: CorrelatorName::Xx,
                engine: EngineName::Analytic,
                pointer: PointerConfig::Bell { phi: 0.0 },
            },
            correlate: None,
            shots: None,
            budget: Some(BudgetConfig { total_shots_per_lambda: 400_000, n_seeds: 20, base_seed: 1 }),
            output: OutputConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded. The output
    /// section is left out so that where results go does not change it.
    pub fn hash(&self) -> String {
        let mut physics = self.clone();
        physics.output = OutputConfig::default();
        hex::encode(Sha256::digest(physics.to_toml_string().as_bytes()))
    }

    pub fn scheme(&self) -> PointerScheme {
        match self.measurement.scheme {
            SchemeName::Separable => PointerScheme::Separable,
            SchemeName::Entangled => PointerScheme::Entangled(self.measurement.correlator.into()),
        }
    }

    /// Single engine for pipelines that cannot run both.
    pub fn single_engine(&self) -> Result<Engine, CliError> {
        match self.measurement.engine {
            EngineName::Analytic => Ok(Engine::Analytic),
            EngineName::Oracle => Ok(Engine::Oracle),
            EngineName::Both => Err(CliError::Config("engine \"both\" is only valid for correlate".into())),
        }
    }

    pub fn template(&self) -> ScheduleTemplate {
        let s = &self.schedule;
        ScheduleTemplate { kappa: s.kappa, t1: s.t1, t_read: s.t_read, omega: s.omega }
    }

    /// Validates every section and builds the objects shared by all
    /// subcommands. Nothing expensive runs here.
    pub fn build(&self) -> Result<Scenario, CliError> {
        let g = &self.grid;
        let grid = GridSpec::new(g.n_points, g.x_min, g.x_max)?;
        let particle = build_particle(grid, &self.particle)?;
        let template = self.template();
        // Probe at a t2 midway to read-out so that κ, t1, T and ω are checked
        // even when only the explicit t2 sweep runs.
        let mid = 0.5 * (template.t1 + template.t_read);
        CouplingSchedule::new(template.kappa, template.t1, mid, template.t_read, template.omega)?;
        let lambdas = lambda_grid(self.lambda.max, self.lambda.step)?;
        let m = &self.momentum;
        let p_grid = MomentumGrid::new(m.p_min, m.p_max, m.points)?;
        let pointer = build_pointer(&self.measurement.pointer)?;
        let shot_plan = match &self.shots {
            Some(s) => Some(ShotPlan::new(s.per_setting, self.scheme(), s.seed)?),
            None => None,
        };
        if let Some(b) = &self.budget {
            if b.n_seeds == 0 {
                return Err(CliError::Config("budget.n_seeds must be positive".into()));
            }
            if b.total_shots_per_lambda < 4 {
                return Err(CliError::Config("budget.total_shots_per_lambda must cover four settings".into()));
            }
            if b.base_seed.checked_add(b.n_seeds).is_none() {
                return Err(CliError::Config("budget seed range overflows u64".into()));
            }
        }
        let t2_sweep = match &self.correlate {
            Some(c) => {
                if c.t2.is_empty() {
                    return Err(CliError::Config("correlate.t2 must not be empty".into()));
                }
                let schedules = c
                    .t2
                    .iter()
                    .map(|&t2| CouplingSchedule::new(template.kappa, template.t1, t2, template.t_read, template.omega))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(schedules)
            }
            None => None,
        };
        Ok(Scenario { grid, particle, template, lambdas, p_grid, pointer, shot_plan, t2_sweep })
    }
}

/// Validated, ready-to-run form of a [`ScenarioConfig`].
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: GridSpec,
    pub particle: ParticleState,
    pub template: ScheduleTemplate,
    pub lambdas: Vec<f64>,
    pub p_grid: MomentumGrid,
    pub pointer: QubitPairState,
    pub shot_plan: Option<ShotPlan>,
    pub t2_sweep: Option<Vec<CouplingSchedule>>,
}

impl Scenario {
    /// Schedules at every `λ`; fails before any computation if the largest
    /// `λ` does not fit before read-out.
    pub fn lambda_schedules(&self) -> Result<Vec<CouplingSchedule>, CliError> {
        Ok(self.lambdas.iter().map(|&l| self.template.at_lambda(l)).collect::<Result<Vec<_>, _>>()?)
    }
}

fn build_particle(grid: GridSpec, cfg: &ParticleConfig) -> Result<ParticleState, CliError> {
    match cfg {
        ParticleConfig::Gaussian { x0, p0, sigma } => Ok(make_gaussian(grid, *x0, *p0, *sigma)?),
        ParticleConfig::Superposition { components } => {
            if components.is_empty() {
                return Err(CliError::Config("superposition needs at least one component".into()));
            }
            let packets = components
                .iter()
                .map(|c| make_gaussian(grid, c.x0, c.p0, c.sigma))
                .collect::<Result<Vec<_>, _>>()?;
            let terms: Vec<(C64, &ParticleState)> = components
                .iter()
                .zip(&packets)
                .map(|(c, p)| (C64::new(c.amplitude[0], c.amplitude[1]), p))
                .collect();
            Ok(make_superposition(&terms)?)
        }
    }
}

fn build_pointer(cfg: &PointerConfig) -> Result<QubitPairState, CliError> {
    Ok(match *cfg {
        PointerConfig::Basis { j1, j2 } => {
            if j1 > 1 || j2 > 1 {
                return Err(CliError::Config("basis bits must be 0 or 1".into()));
            }
            QubitPairState::basis(j1, j2)
        }
        PointerConfig::Separable { phi1, phi2 } => make_separable_optimal(phi1, phi2),
        PointerConfig::Bell { phi } => make_bell(phi),
        PointerConfig::Amplitudes { re, im } => {
            let e: [C64; 4] = std::array::from_fn(|i| C64::new(re[i], im[i]));
            QubitPairState::new(e[0], e[1], e[2], e[3])?
        }
    })
}
