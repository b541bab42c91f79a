//! Grids, particle wave functions, two-qubit pointer states and coupling
//! schedules shared by every other module.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fft::{signed_index, Fft};
use crate::{Error, Result, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// Tolerance on the unit norm of grid states.
pub const NORM_TOL: f64 = 1e-10;
/// Tolerance on the unit norm of pointer states.
pub const QUBIT_NORM_TOL: f64 = 1e-12;
/// Largest wave-function modulus tolerated at the domain boundary when a
/// packet is constructed.
pub const BOUNDARY_TAIL: f64 = 1e-12;

/// Uniform periodic position grid `x_j = x_min + j·Δx`, `j < n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n_points: usize,
    x_min: f64,
    x_max: f64,
}

impl GridSpec {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite"));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid("x_max must exceed x_min"));
        }
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid("n_points must be a power of two >= 2"));
        }
        Ok(Self { n_points, x_min, x_max })
    }

    /// 4096 points on `[-60, 60]`.
    pub fn reference() -> Self {
        Self { n_points: 4096, x_min: -60.0, x_max: 60.0 }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.width() / self.n_points as f64
    }

    /// Spacing of the conjugate momentum grid, `2π / (n Δx)`.
    pub fn dp(&self) -> f64 {
        2.0 * PI / self.width()
    }

    pub fn p_nyquist(&self) -> f64 {
        PI / self.dx()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Momentum of FFT bin `k` (natural FFT ordering).
    pub fn bin_momentum(&self, k: usize) -> f64 {
        signed_index(k, self.n_points) as f64 * self.dp()
    }

    pub(crate) fn fft(&self) -> Fft {
        Fft::new(self.n_points)
    }
}

/// Pure particle state sampled on a [`GridSpec`], normalized so that
/// `Σ|ψ_j|² Δx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    grid: GridSpec,
    amplitudes: Vec<C64>,
}

impl ParticleState {
    /// Wraps already normalized samples.
    pub fn from_amplitudes(grid: GridSpec, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::MismatchedGrids);
        }
        let state = Self { grid, amplitudes };
        let norm = state.norm_squared();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state)
    }

    /// Rescales arbitrary samples to unit norm.
    pub fn normalized(grid: GridSpec, mut amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::MismatchedGrids);
        }
        let norm = norm_squared(&amplitudes, grid.dx());
        if !(norm.is_finite() && norm > 1e-300) {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / norm.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        norm_squared(&self.amplitudes, self.grid.dx())
    }

    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        self.grid
            .positions()
            .zip(&self.amplitudes)
            .map(|(x, a)| x * a.norm_sqr())
            .sum::<f64>()
            * dx
    }

    pub fn mean_momentum(&self) -> f64 {
        let rep = self.momentum_representation();
        let dp = rep.dp();
        rep.momenta.iter().zip(&rep.amplitudes).map(|(p, a)| p * a.norm_sqr()).sum::<f64>() * dp
    }

    /// `ψ̃(p) = (2π)^{-1/2} ∫ ψ(x) e^{-ipx} dx` on the conjugate grid,
    /// ordered by increasing momentum.
    pub fn momentum_representation(&self) -> MomentumWavefunction {
        let n = self.grid.n_points();
        let dx = self.grid.dx();
        let mut bins = self.amplitudes.clone();
        self.grid.fft().forward(&mut bins);
        let scale = dx / (2.0 * PI).sqrt();
        let mut momenta = Vec::with_capacity(n);
        let mut amplitudes = Vec::with_capacity(n);
        for k in (n / 2..n).chain(0..n / 2) {
            let p = self.grid.bin_momentum(k);
            momenta.push(p);
            amplitudes.push(bins[k] * C64::from_polar(scale, -p * self.grid.x_min()));
        }
        MomentumWavefunction { grid: self.grid, momenta, amplitudes }
    }

    /// `ψ̃(p)` at an arbitrary momentum by direct quadrature over the grid.
    pub fn momentum_amplitude_at(&self, p: f64) -> C64 {
        let dx = self.grid.dx();
        let sum: C64 = self
            .grid
            .positions()
            .zip(&self.amplitudes)
            .map(|(x, a)| a * C64::from_polar(1.0, -p * x))
            .sum();
        sum * (dx / (2.0 * PI).sqrt())
    }

    /// Samples of `ψ(x + shift)`, interpolated spectrally.
    pub fn translated(&self, shift: f64) -> Vec<C64> {
        let n = self.grid.n_points();
        let fft = self.grid.fft();
        let mut buf = self.amplitudes.clone();
        fft.forward(&mut buf);
        for (k, b) in buf.iter_mut().enumerate() {
            *b *= C64::from_polar(1.0 / n as f64, self.grid.bin_momentum(k) * shift);
        }
        fft.inverse(&mut buf);
        buf
    }
}

pub(crate) fn norm_squared(amplitudes: &[C64], dx: f64) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx
}

/// Momentum-space wave function on the grid conjugate to a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumWavefunction {
    grid: GridSpec,
    momenta: Vec<f64>,
    amplitudes: Vec<C64>,
}

impl MomentumWavefunction {
    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dp(&self) -> f64 {
        self.grid.dp()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dp()
    }

    /// Inverse transform back to the position grid.
    pub fn to_position(&self) -> Vec<C64> {
        let n = self.grid.n_points();
        let scale = self.grid.dp() / (2.0 * PI).sqrt();
        let mut bins = alloc::vec![C64::new(0.0, 0.0); n];
        // sorted index i corresponds to FFT bin (i + n/2) mod n
        for (i, (p, a)) in self.momenta.iter().zip(&self.amplitudes).enumerate() {
            bins[(i + n / 2) % n] = a * C64::from_polar(scale, p * self.grid.x_min());
        }
        self.grid.fft().inverse(&mut bins);
        bins
    }
}

/// Normalized Gaussian packet `∝ exp(-(x-x0)²/(4σ²)) e^{i p0 x}`.
pub fn make_gaussian(grid: GridSpec, x0: f64, p0: f64, sigma: f64) -> Result<ParticleState> {
    if !(sigma.is_finite() && sigma > 0.0 && x0.is_finite() && p0.is_finite()) {
        return Err(Error::InvalidGrid("packet parameters must be finite with sigma > 0"));
    }
    let min_sigma = 4.0 * grid.dx();
    if sigma < min_sigma {
        return Err(Error::GridTooCoarse { what: "sigma", value: sigma, limit: min_sigma });
    }
    // momentum spread is 1/(2σ); keep 8 of them inside the Nyquist band
    let p_reach = p0.abs() + 8.0 / (2.0 * sigma);
    if p_reach > grid.p_nyquist() {
        return Err(Error::GridTooCoarse { what: "momentum reach", value: p_reach, limit: grid.p_nyquist() });
    }
    let peak = (2.0 * PI * sigma * sigma).powf(-0.25);
    let envelope = |x: f64| peak * (-(x - x0) * (x - x0) / (4.0 * sigma * sigma)).exp();
    let tail = envelope(grid.x_min()).max(envelope(grid.x_max()));
    if tail > BOUNDARY_TAIL {
        return Err(Error::PacketEscapesDomain { weight: tail, limit: BOUNDARY_TAIL });
    }
    let amplitudes = grid.positions().map(|x| C64::from_polar(envelope(x), p0 * x)).collect();
    ParticleState::normalized(grid, amplitudes)
}

/// Coherent, renormalized sum `Σ w_i ψ_i`.
pub fn make_superposition(terms: &[(C64, &ParticleState)]) -> Result<ParticleState> {
    let (_, first) = terms.first().ok_or(Error::ZeroNorm)?;
    let grid = first.grid;
    if terms.iter().any(|(_, s)| s.grid != grid) {
        return Err(Error::MismatchedGrids);
    }
    let mut amplitudes = alloc::vec![C64::new(0.0, 0.0); grid.n_points()];
    for (w, s) in terms {
        for (acc, a) in amplitudes.iter_mut().zip(&s.amplitudes) {
            *acc += w * a;
        }
    }
    let total: f64 = terms.iter().map(|(w, _)| w.norm_sqr()).sum();
    if norm_squared(&amplitudes, grid.dx()) <= 1e-20 * total.max(f64::MIN_POSITIVE) {
        return Err(Error::ZeroNorm);
    }
    ParticleState::normalized(grid, amplitudes)
}

/// One of the two qubit pointers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pointer {
    First,
    Second,
}

impl Pointer {
    /// Bit position of this pointer inside a two-qubit basis index
    /// `2·j1 + j2`.
    fn shift(self) -> usize {
        match self {
            Pointer::First => 1,
            Pointer::Second => 0,
        }
    }

    /// Bit `j_k` of this pointer in basis index `index`.
    pub fn bit(self, index: usize) -> usize {
        (index >> self.shift()) & 1
    }

    /// σᶻ eigenvalue of this pointer in basis index `index`: +1 for bit 0,
    /// -1 for bit 1.
    pub fn sz(self, index: usize) -> f64 {
        if self.bit(index) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl TryFrom<u8> for Pointer {
    type Error = Error;

    fn try_from(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Pointer::First),
            2 => Ok(Pointer::Second),
            other => Err(Error::InvalidPointerIndex(other)),
        }
    }
}

/// Two-qubit pointer state `Σ ε_{j1 j2} |j1 j2⟩`, stored in the order
/// `00, 01, 10, 11`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPairState {
    amps: [C64; 4],
}

impl QubitPairState {
    pub fn new(e00: C64, e01: C64, e10: C64, e11: C64) -> Result<Self> {
        let s = Self { amps: [e00, e01, e10, e11] };
        let norm = s.norm_squared();
        if (norm - 1.0).abs() > QUBIT_NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(s)
    }

    /// Computational basis state `|j1 j2⟩`.
    pub fn basis(j1: u8, j2: u8) -> Self {
        let mut amps = [C64::new(0.0, 0.0); 4];
        amps[2 * (j1 as usize & 1) + (j2 as usize & 1)] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amps
    }

    pub fn e00(&self) -> C64 {
        self.amps[0]
    }

    pub fn e01(&self) -> C64 {
        self.amps[1]
    }

    pub fn e10(&self) -> C64 {
        self.amps[2]
    }

    pub fn e11(&self) -> C64 {
        self.amps[3]
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨σᶻ_k⟩` in this state.
    pub fn mean_sz(&self, pointer: Pointer) -> f64 {
        self.amps.iter().enumerate().map(|(i, a)| pointer.sz(i) * a.norm_sqr()).sum()
    }
}

/// Delta-kick coupling schedule with `0 < t1 < t2 < T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSchedule {
    kappa: f64,
    t1: f64,
    t2: f64,
    t_read: f64,
    omega: f64,
}

impl CouplingSchedule {
    pub fn new(kappa: f64, t1: f64, t2: f64, t_read: f64, omega: f64) -> Result<Self> {
        if ![kappa, t1, t2, t_read, omega].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSchedule("parameters must be finite"));
        }
        if kappa <= 0.0 {
            return Err(Error::InvalidSchedule("kappa must be positive"));
        }
        if omega < 0.0 {
            return Err(Error::InvalidSchedule("omega must be non-negative"));
        }
        if !(0.0 < t1 && t1 < t2 && t2 < t_read) {
            return Err(Error::InvalidSchedule("times must satisfy 0 < t1 < t2 < T"));
        }
        Ok(Self { kappa, t1, t2, t_read, omega })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn t_read(&self) -> f64 {
        self.t_read
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Interaction time of `pointer`.
    pub fn kick_time(&self, pointer: Pointer) -> f64 {
        match pointer {
            Pointer::First => self.t1,
            Pointer::Second => self.t2,
        }
    }

    /// `λ = 2κ(t2 − t1)`.
    pub fn lambda(&self) -> f64 {
        2.0 * self.kappa * (self.t2 - self.t1)
    }
}

/// A schedule with the second interaction time left open; `t2` is fixed
/// per requested `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleTemplate {
    pub kappa: f64,
    pub t1: f64,
    pub t_read: f64,
    pub omega: f64,
}

impl ScheduleTemplate {
    /// Schedule with `t2 = t1 + λ/(2κ)`.
    pub fn at_lambda(&self, lambda: f64) -> Result<CouplingSchedule> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidSchedule("kappa must be positive"));
        }
        let t2 = self.t1 + lambda / (2.0 * self.kappa);
        if !(lambda > 0.0 && t2 < self.t_read) {
            return Err(Error::ScheduleInfeasible { lambda, t2, t_read: self.t_read });
        }
        CouplingSchedule::new(self.kappa, self.t1, t2, self.t_read, self.omega)
    }
}

/// Step function with `θ(0) = 1`.
fn heaviside(t: f64) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Integrated coupling `a_k(t) = κ θ(t − t_k)`.
pub fn coefficient_a(schedule: &CouplingSchedule, k: Pointer, t: f64) -> f64 {
    schedule.kappa * heaviside(t - schedule.kick_time(k))
}

/// Doubly integrated coupling `b_k(t) = κ (t − t_k) θ(t − t_k)`.
pub fn coefficient_b(schedule: &CouplingSchedule, k: Pointer, t: f64) -> f64 {
    let dt = t - schedule.kick_time(k);
    schedule.kappa * dt * heaviside(dt)
}

/// Particle ⊗ two-qubit state: one grid wave function per basis state
/// `00, 01, 10, 11`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    grid: GridSpec,
    branches: [Vec<C64>; 4],
}

impl CompositeState {
    /// `|ψ⟩ ⊗ |φ⟩`.
    pub fn product(particle: &ParticleState, qubits: &QubitPairState) -> Self {
        let branches = core::array::from_fn(|i| {
            let e = qubits.amps[i];
            particle.amplitudes.iter().map(|a| a * e).collect()
        });
        Self { grid: particle.grid, branches }
    }

    pub(crate) fn from_branches(grid: GridSpec, branches: [Vec<C64>; 4]) -> Self {
        Self { grid, branches }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn branch(&self, index: usize) -> &[C64] {
        &self.branches[index]
    }

    pub fn branches(&self) -> &[Vec<C64>; 4] {
        &self.branches
    }

    pub(crate) fn into_branches(self) -> [Vec<C64>; 4] {
        self.branches
    }

    pub fn norm_squared(&self) -> f64 {
        let dx = self.grid.dx();
        self.branches.iter().map(|b| norm_squared(b, dx)).sum()
    }

    /// `⟨branch_a | branch_b⟩ = ∫ branch_a*(x) branch_b(x) dx`.
    pub fn overlap(&self, a: usize, b: usize) -> C64 {
        self.branches[a]
            .iter()
            .zip(&self.branches[b])
            .map(|(u, v)| u.conj() * v)
            .sum::<C64>()
            * self.grid.dx()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn small_grid() -> GridSpec {
        GridSpec::new(512, -20.0, 20.0).unwrap()
    }

    /// Momentum density by direct summation over x, independent of the FFT.
    fn direct_momentum_moments(state: &ParticleState) -> (f64, f64) {
        let g = state.grid();
        let n = g.n_points() as i64;
        let dp = g.dp();
        let (mut mass, mut first) = (0.0, 0.0);
        for k in -n / 2..n / 2 {
            let p = k as f64 * dp;
            let mut acc = C64::new(0.0, 0.0);
            for (x, a) in g.positions().zip(state.amplitudes()) {
                let phase = -p * x;
                acc += a * C64::new(phase.cos(), phase.sin());
            }
            let d = (acc * g.dx()).norm_sqr() / (2.0 * PI);
            mass += d * dp;
            first += p * d * dp;
        }
        (mass, first)
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1000, -1.0, 1.0).is_err());
        assert!(GridSpec::new(1, -1.0, 1.0).is_err());
        assert!(GridSpec::new(64, 1.0, 1.0).is_err());
        let g = GridSpec::new(64, -2.0, 2.0).unwrap();
        assert_abs_diff_eq!(g.dx(), 4.0 / 64.0);
        assert_abs_diff_eq!(g.dp(), 2.0 * PI / (64.0 * g.dx()), epsilon = 1e-15);
    }

    #[test]
    fn standard_gaussian() {
        let g = GridSpec::reference();
        let psi = make_gaussian(g, 0.0, 0.0, FRAC_1_SQRT_2).unwrap();
        assert_abs_diff_eq!(psi.norm_squared(), 1.0, epsilon = 1e-12);
        let c = PI.powf(-0.25);
        for (x, a) in g.positions().zip(psi.amplitudes()) {
            assert_abs_diff_eq!(a.re, c * (-x * x / 2.0).exp(), epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gaussian_momentum_mean_matches_direct_dft() {
        let psi = make_gaussian(small_grid(), 0.0, 2.0, FRAC_1_SQRT_2).unwrap();
        let (mass, first) = direct_momentum_moments(&psi);
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(first, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(psi.mean_momentum(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn gaussian_position_mean() {
        let psi = make_gaussian(GridSpec::reference(), 3.0, 0.0, FRAC_1_SQRT_2).unwrap();
        assert_abs_diff_eq!(psi.mean_position(), 3.0, epsilon = 1e-10);
    }

    #[test]
    fn gaussian_guards() {
        let g = GridSpec::new(64, -10.0, 10.0).unwrap();
        assert!(matches!(make_gaussian(g, 0.0, 0.0, 0.5), Err(Error::GridTooCoarse { .. })));
        let g = GridSpec::new(256, -5.0, 5.0).unwrap();
        assert!(matches!(make_gaussian(g, 0.0, 0.0, 1.0), Err(Error::PacketEscapesDomain { .. })));
        assert!(matches!(
            make_gaussian(GridSpec::reference(), 55.0, 0.0, FRAC_1_SQRT_2),
            Err(Error::PacketEscapesDomain { .. })
        ));
    }

    #[test]
    fn superposition_identity_and_cancellation() {
        let psi = make_gaussian(small_grid(), 0.0, 1.0, 1.0).unwrap();
        let same = make_superposition(&[(C64::new(1.0, 0.0), &psi)]).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(same.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        let err = make_superposition(&[(C64::new(1.0, 0.0), &psi), (C64::new(-1.0, 0.0), &psi)]);
        assert_eq!(err, Err(Error::ZeroNorm));
        let other = make_gaussian(GridSpec::new(512, -21.0, 21.0).unwrap(), 0.0, 0.0, 1.0).unwrap();
        assert_eq!(
            make_superposition(&[(C64::new(1.0, 0.0), &psi), (C64::new(1.0, 0.0), &other)]),
            Err(Error::MismatchedGrids)
        );
    }

    #[test]
    fn bimodal_superposition_has_two_momentum_peaks() {
        let g = GridSpec::reference();
        let plus = make_gaussian(g, 0.0, 2.0, FRAC_1_SQRT_2).unwrap();
        let minus = make_gaussian(g, 0.0, -2.0, FRAC_1_SQRT_2).unwrap();
        let w = C64::new(FRAC_1_SQRT_2, 0.0);
        let psi = make_superposition(&[(w, &plus), (w, &minus)]).unwrap();
        let rep = psi.momentum_representation();
        let density = rep.density();
        let dp = rep.dp();
        let argmax = |lo: f64, hi: f64| {
            rep.momenta()
                .iter()
                .zip(&density)
                .filter(|(p, _)| **p > lo && **p < hi)
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(p, _)| *p)
                .unwrap()
        };
        assert!((argmax(0.0, 10.0) - 2.0).abs() <= dp);
        assert!((argmax(-10.0, 0.0) + 2.0).abs() <= dp);
    }

    #[test]
    fn momentum_representation_of_standard_gaussian() {
        let psi = make_gaussian(GridSpec::reference(), 0.0, 0.0, FRAC_1_SQRT_2).unwrap();
        let rep = psi.momentum_representation();
        assert_abs_diff_eq!(rep.norm_squared(), 1.0, epsilon = 1e-10);
        for (p, d) in rep.momenta().iter().zip(rep.density()) {
            assert_abs_diff_eq!(d, (-p * p).exp() / PI.sqrt(), epsilon = 1e-8);
        }
        let shifted = make_gaussian(GridSpec::reference(), 0.0, 2.0, FRAC_1_SQRT_2).unwrap();
        let rep = shifted.momentum_representation();
        let density = rep.density();
        let (i, _) = density.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert!((rep.momenta()[i] - 2.0).abs() <= rep.dp());
    }

    #[test]
    fn momentum_representation_agrees_with_direct_quadrature() {
        let psi = make_gaussian(small_grid(), 1.0, -1.5, 0.9).unwrap();
        let rep = psi.momentum_representation();
        for i in (0..rep.momenta().len()).step_by(37) {
            let direct = psi.momentum_amplitude_at(rep.momenta()[i]);
            assert!((direct - rep.amplitudes()[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_round_trip() {
        let psi = make_gaussian(GridSpec::reference(), -2.0, 3.0, 1.3).unwrap();
        let back = psi.momentum_representation().to_position();
        for (a, b) in psi.amplitudes().iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn translation_moves_the_packet() {
        let psi = make_gaussian(small_grid(), 0.0, 0.7, 1.0).unwrap();
        let shifted = ParticleState::normalized(*psi.grid(), psi.translated(1.25)).unwrap();
        assert_abs_diff_eq!(shifted.mean_position(), -1.25, epsilon = 1e-10);
    }

    #[test]
    fn qubit_states() {
        let h = C64::new(0.5, 0.0);
        assert!(QubitPairState::new(h, h, h, h).is_ok());
        assert!(matches!(QubitPairState::new(h, h, h, C64::new(0.0, 0.0)), Err(Error::NotNormalized { .. })));
        let s = QubitPairState::basis(1, 0);
        assert_eq!(s.e10(), C64::new(1.0, 0.0));
        assert_eq!(s.mean_sz(Pointer::First), -1.0);
        assert_eq!(s.mean_sz(Pointer::Second), 1.0);
    }

    #[test]
    fn pointer_index() {
        assert_eq!(Pointer::try_from(1), Ok(Pointer::First));
        assert_eq!(Pointer::try_from(2), Ok(Pointer::Second));
        assert_eq!(Pointer::try_from(3), Err(Error::InvalidPointerIndex(3)));
        assert_eq!(Pointer::First.bit(0b10), 1);
        assert_eq!(Pointer::Second.bit(0b10), 0);
    }

    #[test]
    fn schedule_validation() {
        assert!(CouplingSchedule::new(1.0, 1.0, 2.0, 3.0, 0.0).is_ok());
        assert!(CouplingSchedule::new(1.0, 2.0, 2.0, 3.0, 0.0).is_err());
        assert!(CouplingSchedule::new(1.0, 1.0, 2.0, 2.0, 0.0).is_err());
        assert!(CouplingSchedule::new(0.0, 1.0, 2.0, 3.0, 0.0).is_err());
        assert!(CouplingSchedule::new(1.0, 0.0, 2.0, 3.0, 0.0).is_err());
        assert!(CouplingSchedule::new(1.0, 1.0, 2.0, 3.0, -1.0).is_err());
        let s = CouplingSchedule::new(0.5, 1.0, 3.0, 4.0, 0.0).unwrap();
        assert_abs_diff_eq!(s.lambda(), 2.0);
    }

    #[test]
    fn template_feasibility() {
        let t = ScheduleTemplate { kappa: 2.0, t1: 0.5, t_read: 3.0, omega: 0.0 };
        let s = t.at_lambda(8.0).unwrap();
        assert_abs_diff_eq!(s.t2(), 2.5);
        assert_abs_diff_eq!(s.lambda(), 8.0, epsilon = 1e-14);
        assert!(matches!(t.at_lambda(10.0), Err(Error::ScheduleInfeasible { .. })));
        assert!(matches!(t.at_lambda(0.0), Err(Error::ScheduleInfeasible { .. })));
    }

    #[test]
    fn coefficients() {
        let s = CouplingSchedule::new(1.0, 1.0, 2.0, 4.0, 0.0).unwrap();
        assert_eq!(coefficient_a(&s, Pointer::First, 0.5), 0.0);
        assert_eq!(coefficient_a(&s, Pointer::First, 2.0), 1.0);
        assert_eq!(coefficient_a(&s, Pointer::First, 1.0), 1.0);
        assert_eq!(coefficient_b(&s, Pointer::First, 0.5), 0.0);
        assert_eq!(coefficient_b(&s, Pointer::First, 3.0), 2.0);
        let s = CouplingSchedule::new(0.5, 1.0, 2.0, 4.0, 0.0).unwrap();
        assert_eq!(coefficient_a(&s, Pointer::Second, 3.0), 0.5);
        let s = CouplingSchedule::new(2.0, 1.0, 2.0, 4.0, 0.0).unwrap();
        assert_eq!(coefficient_b(&s, Pointer::Second, 2.0), 0.0);
    }

    #[test]
    fn coefficient_b_is_running_integral_of_a() {
        let s = CouplingSchedule::new(1.3, 0.7, 1.9, 4.0, 0.0).unwrap();
        let h = 1e-4;
        for k in [Pointer::First, Pointer::Second] {
            for t in [0.3f64, 0.7, 1.0, 2.5, 3.99] {
                let steps = (t / h).round() as usize;
                // midpoint rule
                let integral: f64 =
                    (0..steps).map(|i| coefficient_a(&s, k, (i as f64 + 0.5) * h)).sum::<f64>() * h;
                assert_abs_diff_eq!(integral, coefficient_b(&s, k, t), epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn composite_product_norm() {
        let psi = make_gaussian(small_grid(), 0.0, 0.0, 1.0).unwrap();
        let h = C64::new(0.5, 0.0);
        let q = QubitPairState::new(h, h, h, C64::new(0.0, 0.5)).unwrap();
        let c = CompositeState::product(&psi, &q);
        assert_abs_diff_eq!(c.norm_squared(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.overlap(0, 3).im, 0.25, epsilon = 1e-12);
    }
}
