//! Sampling the characteristic function over a `λ` grid and inverting it to
//! the momentum density
//!
//! ```text
//! ρ(p) = (1/2π) ∫ C_P(λ) e^{−iλp} dλ
//! ```
//!
//! by trapezoidal quadrature over a window `[−λ_max, λ_max]`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::analytic::{self, Correlations, Part, PointerScheme};
use crate::states::{CouplingSchedule, ParticleState, ScheduleTemplate};
use crate::{oracle, Error, Result, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// Largest imaginary part tolerated in an inverted density value.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;
/// Tolerance of the Hermitian-symmetry check on extended samples.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Densities below `-NEGATIVE_DENSITY_TOL` flag a negative excursion.
pub const NEGATIVE_DENSITY_TOL: f64 = 1e-6;

/// How correlation means are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSource {
    Analytic,
    Oracle,
    Shots,
}

impl SampleSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleSource::Analytic => "analytic",
            SampleSource::Oracle => "oracle",
            SampleSource::Shots => "shots",
        }
    }
}

impl From<Engine> for SampleSource {
    fn from(e: Engine) -> Self {
        match e {
            Engine::Analytic => SampleSource::Analytic,
            Engine::Oracle => SampleSource::Oracle,
        }
    }
}

/// Standard errors of the real and imaginary parts of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StdErr {
    pub re: f64,
    pub im: f64,
}

/// Estimates of `C_P(λ)` at strictly increasing positive `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFnSamples {
    lambdas: Vec<f64>,
    values: Vec<C64>,
    stderr: Option<Vec<StdErr>>,
    source: SampleSource,
}

impl CharFnSamples {
    pub fn new(
        lambdas: Vec<f64>,
        values: Vec<C64>,
        stderr: Option<Vec<StdErr>>,
        source: SampleSource,
    ) -> Result<Self> {
        if lambdas.len() != values.len() || stderr.as_ref().is_some_and(|s| s.len() != lambdas.len()) {
            return Err(Error::InvalidSamples("column lengths differ"));
        }
        if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidSamples("lambdas must be finite and positive"));
        }
        if lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSamples("lambdas must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidSamples("values must be finite"));
        }
        if let Some(s) = &stderr {
            if s.iter().any(|e| !(e.re >= 0.0 && e.im >= 0.0 && e.re.is_finite() && e.im.is_finite())) {
                return Err(Error::InvalidSamples("standard errors must be finite and non-negative"));
            }
        }
        Ok(Self { lambdas, values, stderr, source })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn stderr(&self) -> Option<&[StdErr]> {
        self.stderr.as_deref()
    }

    pub fn source(&self) -> SampleSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Indices whose magnitude exceeds `1 + 3σ` (σ the combined standard
    /// error, zero for exact sources) by more than `1e-10`.
    pub fn magnitude_violations(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                let sigma = self.stderr.as_ref().map_or(0.0, |s| s[i].re.hypot(s[i].im));
                self.values[i].norm() > 1.0 + 3.0 * sigma + 1e-10
            })
            .collect()
    }
}

/// Uniform grid `step, 2·step, …, λ_max`.
pub fn lambda_grid(lambda_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0 && lambda_max.is_finite() && lambda_max >= step) {
        return Err(Error::InvalidSamples("need 0 < step <= lambda_max"));
    }
    let count = (lambda_max / step).round();
    if (count * step - lambda_max).abs() > 1e-9 * lambda_max {
        return Err(Error::NonUniformLambdaGrid);
    }
    Ok((1..=count as usize).map(|k| k as f64 * step).collect())
}

/// Mean of every measurement setting of `scheme` at one schedule, in the
/// order of [`PointerScheme::settings`].
pub fn setting_means(
    particle: &ParticleState,
    schedule: &CouplingSchedule,
    scheme: PointerScheme,
    engine: Engine,
) -> Result<Vec<f64>> {
    let mut cached: Option<(crate::states::QubitPairState, Correlations)> = None;
    let mut means = Vec::new();
    for setting in scheme.settings() {
        let corr = match cached {
            Some((q, c)) if q == setting.qubits => c,
            _ => {
                let c = match engine {
                    Engine::Analytic => analytic::correlations(particle, &setting.qubits, schedule)?,
                    Engine::Oracle => oracle::correlations(particle, &setting.qubits, schedule)?,
                };
                cached = Some((setting.qubits, c));
                c
            }
        };
        means.push(corr.get(setting.correlator));
    }
    Ok(means)
}

/// `Re C + i Im C` from per-setting means: each part is the sum of the
/// means of its settings.
pub fn assemble(scheme: PointerScheme, means: &[f64]) -> C64 {
    let mut value = C64::new(0.0, 0.0);
    for (setting, m) in scheme.settings().iter().zip(means) {
        match setting.part {
            Part::Re => value.re += m,
            Part::Im => value.im += m,
        }
    }
    value
}

/// `C_P(λ)` for every `λ` through the chosen measurement scheme.
pub fn sample_char_fn(
    particle: &ParticleState,
    template: &ScheduleTemplate,
    scheme: PointerScheme,
    lambdas: &[f64],
    engine: Engine,
) -> Result<CharFnSamples> {
    let values = lambdas
        .iter()
        .map(|&l| {
            let schedule = template.at_lambda(l)?;
            Ok(assemble(scheme, &setting_means(particle, &schedule, scheme, engine)?))
        })
        .collect::<Result<Vec<_>>>()?;
    CharFnSamples::new(lambdas.to_vec(), values, None, engine.into())
}

/// Samples on a grid symmetric about `λ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSamples {
    lambdas: Vec<f64>,
    values: Vec<C64>,
}

impl SymmetricSamples {
    /// Unchecked; [`invert_to_momentum_distribution`] validates.
    pub fn from_raw(lambdas: Vec<f64>, values: Vec<C64>) -> Self {
        Self { lambdas, values }
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn at(&self, lambda: f64) -> Option<C64> {
        self.lambdas.iter().position(|&l| l == lambda).map(|i| self.values[i])
    }
}

/// Mirrors `C(−λ) = C*(λ)` and inserts the exact anchor `C(0) = 1`.
pub fn extend_hermitian(samples: &CharFnSamples) -> SymmetricSamples {
    let n = samples.len();
    let mut lambdas = Vec::with_capacity(2 * n + 1);
    let mut values = Vec::with_capacity(2 * n + 1);
    for i in (0..n).rev() {
        lambdas.push(-samples.lambdas[i]);
        values.push(samples.values[i].conj());
    }
    lambdas.push(0.0);
    values.push(C64::new(1.0, 0.0));
    lambdas.extend_from_slice(&samples.lambdas);
    values.extend_from_slice(&samples.values);
    SymmetricSamples { lambdas, values }
}

/// Uniform momentum grid `start + i·step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl MomentumGrid {
    /// `n_points` values spanning `[p_min, p_max]` inclusive.
    pub fn new(p_min: f64, p_max: f64, n_points: usize) -> Result<Self> {
        if !(p_min.is_finite() && p_max.is_finite() && p_max > p_min) {
            return Err(Error::InvalidMomentumGrid("need finite p_min < p_max"));
        }
        if n_points < 2 {
            return Err(Error::InvalidMomentumGrid("need at least two points"));
        }
        Ok(Self { start: p_min, step: (p_max - p_min) / (n_points - 1) as f64, len: n_points })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn p(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.p(i))
    }
}

/// Density sampled on a [`MomentumGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDistribution {
    pub p_grid: MomentumGrid,
    pub density: Vec<f64>,
    /// `|C(λ_max)|`; the truncated tail of the inversion integral scales
    /// with it. Zero for reference densities.
    pub truncation_bound: f64,
    pub metrics: Option<Metrics>,
}

impl MomentumDistribution {
    pub fn from_fn(p_grid: MomentumGrid, f: impl Fn(f64) -> f64) -> Self {
        let density = p_grid.points().map(f).collect();
        Self { p_grid, density, truncation_bound: 0.0, metrics: None }
    }

    /// Exact `|ψ̃(p)|²` of a grid state, by direct quadrature at each `p`.
    pub fn of_state(particle: &ParticleState, p_grid: MomentumGrid) -> Self {
        Self::from_fn(p_grid, |p| particle.momentum_amplitude_at(p).norm_sqr())
    }

    /// `Σ ρ Δp`.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.p_grid.step
    }

    pub fn min_density(&self) -> f64 {
        self.density.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when some value lies below `-NEGATIVE_DENSITY_TOL`; shot noise
    /// can cause this.
    pub fn has_negative_excursion(&self) -> bool {
        self.min_density() < -NEGATIVE_DENSITY_TOL
    }

    /// Copy with negative values set to zero.
    pub fn clipped(&self) -> Self {
        let mut out = self.clone();
        out.density.iter_mut().for_each(|d| *d = d.max(0.0));
        out
    }

    /// Momenta of local maxima reaching `rel_threshold` of the global
    /// maximum.
    pub fn peaks(&self, rel_threshold: f64) -> Vec<f64> {
        let d = &self.density;
        let top = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (0..d.len())
            .filter(|&i| {
                let left = i == 0 || d[i] > d[i - 1];
                let right = i + 1 == d.len() || d[i] >= d[i + 1];
                left && right && d[i] >= rel_threshold * top
            })
            .map(|i| self.p_grid.p(i))
            .collect()
    }
}

/// `ρ(p) = (Δλ/2π) Σ_k w_k C(λ_k) e^{−iλ_k p}` with trapezoid weights.
pub fn invert_to_momentum_distribution(samples: &SymmetricSamples, p_grid: MomentumGrid) -> Result<MomentumDistribution> {
    let (lambdas, values) = (&samples.lambdas, &samples.values);
    let n = lambdas.len();
    if n < 3 || n % 2 == 0 || lambdas.len() != values.len() {
        return Err(Error::AsymmetricSamples);
    }
    let mid = n / 2;
    let step = lambdas[mid + 1] - lambdas[mid];
    if step.is_nan() || step <= 0.0 || lambdas.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step) {
        return Err(Error::NonUniformLambdaGrid);
    }
    if lambdas[mid].abs() > 1e-12 * step {
        return Err(Error::AsymmetricSamples);
    }
    for k in 1..=mid {
        let (lo, hi) = (mid - k, mid + k);
        if (lambdas[lo] + lambdas[hi]).abs() > 1e-9 * step || (values[lo] - values[hi].conj()).norm() > SYMMETRY_TOL {
            return Err(Error::AsymmetricSamples);
        }
    }
    let mut density = Vec::with_capacity(p_grid.len());
    for p in p_grid.points() {
        let mut acc = C64::new(0.0, 0.0);
        for (i, (l, c)) in lambdas.iter().zip(values).enumerate() {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            acc += c * C64::from_polar(w, -l * p);
        }
        acc *= step / (2.0 * PI);
        if acc.im.abs() > IMAGINARY_RESIDUE_TOL {
            return Err(Error::ImaginaryResidue(acc.im));
        }
        density.push(acc.re);
    }
    Ok(MomentumDistribution { p_grid, density, truncation_bound: values[n - 1].norm(), metrics: None })
}

/// Discrete distances between two densities on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub l1: f64,
    pub linf: f64,
    pub total_variation: f64,
    /// For each reference peak, signed offset of the nearest estimated peak.
    pub peak_offsets: Vec<f64>,
}

/// Relative height a local maximum needs to count as a peak.
pub const PEAK_THRESHOLD: f64 = 0.1;

pub fn compare_distributions(estimate: &MomentumDistribution, reference: &MomentumDistribution) -> Result<Metrics> {
    if estimate.p_grid != reference.p_grid {
        return Err(Error::InvalidMomentumGrid("distributions live on different grids"));
    }
    let dp = estimate.p_grid.step;
    let (mut l1, mut linf) = (0.0f64, 0.0f64);
    for (a, b) in estimate.density.iter().zip(&reference.density) {
        let d = (a - b).abs();
        l1 += d * dp;
        linf = linf.max(d);
    }
    let est_peaks = estimate.peaks(PEAK_THRESHOLD);
    let peak_offsets = reference
        .peaks(PEAK_THRESHOLD)
        .iter()
        .filter_map(|r| {
            est_peaks.iter().map(|e| e - r).min_by(|a, b| a.abs().total_cmp(&b.abs()))
        })
        .collect();
    Ok(Metrics { l1, linf, total_variation: l1 / 2.0, peak_offsets })
}
