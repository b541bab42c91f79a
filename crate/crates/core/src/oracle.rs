//! Brute-force propagation of the particle ⊗ two-qubit state.
//!
//! Between kicks the Hamiltonian `P²/2 + (ω/2)(σᶻ₁ + σᶻ₂)` is diagonal in
//! momentum and in the qubit basis, so each free segment is applied exactly
//! as a phase in momentum space. A delta kick `κ δ(t − t_k) X ⊗ σᶻ_k` is the
//! position phase `e^{−iκ x s_k}` on every branch, `s_k = ±1` the σᶻ
//! eigenvalue of pointer `k`. No time stepping is involved.

use alloc::vec::Vec;

use crate::states::{CompositeState, CouplingSchedule, GridSpec, ParticleState, Pointer, QubitPairState};
use crate::{Error, Result, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// Fraction of the grid, at each end, watched by the boundary monitor.
pub const BOUNDARY_FRACTION: f64 = 0.02;
/// Largest probability tolerated inside the monitored boundary strips.
pub const BOUNDARY_LIMIT: f64 = 1e-8;

/// Hermitian operator on the two-qubit basis `00, 01, 10, 11`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitObservable {
    matrix: [[C64; 4]; 4],
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

type Pauli = [[C64; 2]; 2];
const ID: Pauli = [[ONE, ZERO], [ZERO, ONE]];
const SX: Pauli = [[ZERO, ONE], [ONE, ZERO]];
const SY: Pauli = [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]];
const SZ: Pauli = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];

fn kron(a: &Pauli, b: &Pauli) -> [[C64; 4]; 4] {
    core::array::from_fn(|r| core::array::from_fn(|c| a[r >> 1][c >> 1] * b[r & 1][c & 1]))
}

impl TwoQubitObservable {
    pub fn new(matrix: [[C64; 4]; 4]) -> Result<Self> {
        let hermitian = (0..4).all(|r| (0..4).all(|c| (matrix[r][c] - matrix[c][r].conj()).norm() <= 1e-14));
        if !hermitian {
            return Err(Error::InvalidSamples("observable is not Hermitian"));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &[[C64; 4]; 4] {
        &self.matrix
    }

    /// `σˣ₁σˣ₂`.
    pub fn xx() -> Self {
        Self { matrix: kron(&SX, &SX) }
    }

    /// `σʸ₁σʸ₂`.
    pub fn yy() -> Self {
        Self { matrix: kron(&SY, &SY) }
    }

    pub fn zz() -> Self {
        Self { matrix: kron(&SZ, &SZ) }
    }

    pub fn z1() -> Self {
        Self { matrix: kron(&SZ, &ID) }
    }

    pub fn z2() -> Self {
        Self { matrix: kron(&ID, &SZ) }
    }
}

/// Free flight for `duration`: kinetic phase `e^{−ip²d/2}` on every branch
/// and qubit phase `e^{−iωd(s1+s2)/2}` on branch `(j1 j2)`.
pub fn evolve_free(state: &CompositeState, duration: f64, omega: f64) -> Result<CompositeState> {
    if !(duration.is_finite() && duration >= 0.0 && omega.is_finite()) {
        return Err(Error::InvalidSchedule("free evolution needs a finite duration >= 0"));
    }
    let grid = *state.grid();
    let n = grid.n_points();
    let fft = crate::fft::Fft::new(n);
    let kinetic: Vec<C64> = (0..n)
        .map(|k| {
            let p = grid.bin_momentum(k);
            C64::from_polar(1.0 / n as f64, -p * p * duration / 2.0)
        })
        .collect();
    let mut branches = state.clone().into_branches();
    for (index, branch) in branches.iter_mut().enumerate() {
        let s = Pointer::First.sz(index) + Pointer::Second.sz(index);
        let qubit_phase = C64::from_polar(1.0, -omega * duration * s / 2.0);
        fft.forward(branch);
        for (b, k) in branch.iter_mut().zip(&kinetic) {
            *b *= k * qubit_phase;
        }
        fft.inverse(branch);
    }
    Ok(CompositeState::from_branches(grid, branches))
}

/// Instantaneous kick `e^{−iκ X ⊗ σᶻ_k}`: bit 0 of `pointer` picks up
/// `e^{−iκx}`, bit 1 picks up `e^{+iκx}`.
pub fn apply_kick(state: &CompositeState, pointer: Pointer, kappa: f64) -> CompositeState {
    let grid = *state.grid();
    let mut branches = state.clone().into_branches();
    for (index, branch) in branches.iter_mut().enumerate() {
        let s = pointer.sz(index);
        for (a, x) in branch.iter_mut().zip(grid.positions()) {
            *a *= C64::from_polar(1.0, -kappa * s * x);
        }
    }
    CompositeState::from_branches(grid, branches)
}

/// Probability held in the outer [`BOUNDARY_FRACTION`] of the grid at
/// either end.
pub fn boundary_weight(state: &CompositeState) -> f64 {
    let grid = state.grid();
    let n = grid.n_points();
    let strip = ((n as f64 * BOUNDARY_FRACTION).ceil() as usize).max(1);
    state
        .branches()
        .iter()
        .map(|b| b[..strip].iter().chain(&b[n - strip..]).map(|a| a.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        * grid.dx()
}

fn monitor(state: CompositeState) -> Result<CompositeState> {
    let weight = boundary_weight(&state);
    if weight > BOUNDARY_LIMIT {
        return Err(Error::PacketEscapesDomain { weight, limit: BOUNDARY_LIMIT });
    }
    Ok(state)
}

/// States after each stage of a schedule run: the initial product state,
/// then free flight to `t1`, kick 1, flight to `t2`, kick 2, flight to `T`.
pub fn run_schedule_stages(
    particle: &ParticleState,
    qubits: &QubitPairState,
    schedule: &CouplingSchedule,
) -> Result<Vec<CompositeState>> {
    let omega = schedule.omega();
    let kappa = schedule.kappa();
    let mut stages = Vec::with_capacity(6);
    stages.push(monitor(CompositeState::product(particle, qubits))?);
    let step = |s: &CompositeState, i: usize| -> Result<CompositeState> {
        match i {
            0 => evolve_free(s, schedule.t1(), omega),
            1 => Ok(apply_kick(s, Pointer::First, kappa)),
            2 => evolve_free(s, schedule.t2() - schedule.t1(), omega),
            3 => Ok(apply_kick(s, Pointer::Second, kappa)),
            _ => evolve_free(s, schedule.t_read() - schedule.t2(), omega),
        }
    };
    for i in 0..5 {
        let next = step(stages.last().expect("initial stage"), i)?;
        stages.push(monitor(next)?);
    }
    Ok(stages)
}

/// Composite state at the read-out time.
pub fn run_schedule(
    particle: &ParticleState,
    qubits: &QubitPairState,
    schedule: &CouplingSchedule,
) -> Result<CompositeState> {
    let mut stages = run_schedule_stages(particle, qubits, schedule)?;
    let last = stages.pop().expect("six stages");
    let norm = last.norm_squared();
    if (norm - 1.0).abs() > crate::states::NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(last)
}

/// Reduced two-qubit density matrix `ρ_ab = ⟨branch_b | branch_a⟩`.
pub fn reduced_qubit_state(state: &CompositeState) -> [[C64; 4]; 4] {
    core::array::from_fn(|a| core::array::from_fn(|b| state.overlap(b, a)))
}

/// `Σ_ab O_ab ⟨branch_a | branch_b⟩`.
pub fn expect_two_qubit(state: &CompositeState, obs: &TwoQubitObservable) -> f64 {
    let mut acc = ZERO;
    for a in 0..4 {
        for b in 0..4 {
            let o = obs.matrix[a][b];
            if o != ZERO {
                acc += o * state.overlap(a, b);
            }
        }
    }
    debug_assert!(acc.im.abs() < 1e-12, "imaginary residue {}", acc.im);
    acc.re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

/// `⟨X⟩` or `⟨P⟩` of the particle, traced over the pointers.
pub fn expect_particle(state: &CompositeState, which: Quadrature) -> f64 {
    let grid = *state.grid();
    match which {
        Quadrature::X => {
            state
                .branches()
                .iter()
                .map(|b| grid.positions().zip(b).map(|(x, a)| x * a.norm_sqr()).sum::<f64>())
                .sum::<f64>()
                * grid.dx()
        }
        Quadrature::P => {
            let n = grid.n_points();
            let fft = crate::fft::Fft::new(n);
            // Σ|FFT|² Δx/n equals Σ|ψ̃|² Δp
            let scale = grid.dx() / n as f64;
            state
                .branches()
                .iter()
                .map(|b| {
                    let mut buf = b.clone();
                    fft.forward(&mut buf);
                    buf.iter().enumerate().map(|(k, a)| grid.bin_momentum(k) * a.norm_sqr()).sum::<f64>()
                })
                .sum::<f64>()
                * scale
        }
    }
}

/// Both correlations `⟨σˣˣ(T)⟩`, `⟨σʸʸ(T)⟩` from one propagated state.
pub fn correlations(
    particle: &ParticleState,
    qubits: &QubitPairState,
    schedule: &CouplingSchedule,
) -> Result<crate::analytic::Correlations> {
    let state = run_schedule(particle, qubits, schedule)?;
    Ok(crate::analytic::Correlations {
        xx: expect_two_qubit(&state, &TwoQubitObservable::xx()),
        yy: expect_two_qubit(&state, &TwoQubitObservable::yy()),
    })
}

/// Closed-form free evolution of the Gaussian `∝ exp(−(x−x0)²/(4σ²) + ip0x)`
/// after time `t`, sampled on `grid`.
pub fn spreading_gaussian(grid: &GridSpec, x0: f64, p0: f64, sigma: f64, t: f64) -> Vec<C64> {
    let s = sigma * sigma;
    let a = C64::new(1.0, t / (2.0 * s));
    let prefactor = (2.0 * core::f64::consts::PI * s).powf(-0.25) / a.sqrt();
    grid.positions()
        .map(|x| {
            let d = x - x0 - p0 * t;
            let exponent = -d * d / (4.0 * s * a) + C64::new(0.0, p0 * x - p0 * p0 * t / 2.0);
            prefactor * exponent.exp()
        })
        .collect()
}
