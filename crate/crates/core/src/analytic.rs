//! Closed-form pointer correlations.
//!
//! For a product state `|ψ⟩ ⊗ Σ ε_ij |ij⟩` the read-out correlations are
//!
//! ```text
//! ⟨σˣˣ(T)⟩ = Re{2 ε01 ε10* C_P(λ)} + Re{2 ε00* ε11 ⟨e^{iμ}⟩}
//! ⟨σʸʸ(T)⟩ = Re{2 ε01 ε10* C_P(λ)} − Re{2 ε00* ε11 ⟨e^{iμ}⟩}
//! ```
//!
//! with `λ = 2κ(t2 − t1)` and `μ = 4κX + 2κ(t1 + t2)P + 2ωT`. The
//! exponential of `μ` is Weyl-ordered: composing the two kick exponentials
//! produces a scalar phase that the σᶻ₁-dependent phase of the second
//! pointer cancels exactly.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use crate::states::{CouplingSchedule, ParticleState, QubitPairState};
use crate::{Error, Result, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// Split of the correlation phase operators into their particle
/// prefactors: `η = λ P` and `μ = mu_alpha X + mu_beta P + mu_phase`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaMuDecomposition {
    pub lambda: f64,
    pub mu_alpha: f64,
    pub mu_beta: f64,
    pub mu_phase: f64,
}

impl EtaMuDecomposition {
    pub fn new(schedule: &CouplingSchedule) -> Self {
        let kappa = schedule.kappa();
        Self {
            lambda: schedule.lambda(),
            mu_alpha: 4.0 * kappa,
            mu_beta: 2.0 * kappa * (schedule.t1() + schedule.t2()),
            mu_phase: 2.0 * schedule.omega() * schedule.t_read(),
        }
    }
}

fn check_shift(particle: &ParticleState, shift: f64) -> Result<()> {
    let limit = particle.grid().width() / 2.0;
    if !shift.is_finite() || shift.abs() >= limit {
        return Err(Error::LambdaOutOfRange { lambda: shift, limit });
    }
    Ok(())
}

/// `∫ ψ*(x) e^{iαx} ψ(x + β) dx` with the shifted copy interpolated
/// spectrally.
fn shifted_overlap(particle: &ParticleState, alpha: f64, beta: f64) -> C64 {
    let grid = particle.grid();
    let shifted = particle.translated(beta);
    let sum: C64 = grid
        .positions()
        .zip(particle.amplitudes())
        .zip(&shifted)
        .map(|((x, a), b)| a.conj() * C64::from_polar(1.0, alpha * x) * b)
        .sum();
    sum * grid.dx()
}

/// Characteristic function `C_P(λ) = ⟨e^{iλP}⟩`, evaluated as the overlap
/// `∫ ψ*(x) ψ(x + λ) dx`.
pub fn char_fn(particle: &ParticleState, lambda: f64) -> Result<C64> {
    check_shift(particle, lambda)?;
    Ok(shifted_overlap(particle, 0.0, lambda))
}

/// `C_P(λ)` through the momentum density, `∫ |ψ̃(p)|² e^{iλp} dp`.
pub fn char_fn_momentum(particle: &ParticleState, lambda: f64) -> Result<C64> {
    check_shift(particle, lambda)?;
    let rep = particle.momentum_representation();
    let sum: C64 = rep
        .momenta()
        .iter()
        .zip(rep.amplitudes())
        .map(|(p, a)| C64::from_polar(a.norm_sqr(), lambda * p))
        .sum();
    Ok(sum * rep.dp())
}

/// `⟨e^{i(αX + βP)}⟩ = e^{iαβ/2} ∫ ψ*(x) e^{iαx} ψ(x + β) dx`.
pub fn weyl_expectation(particle: &ParticleState, alpha: f64, beta: f64) -> Result<C64> {
    check_shift(particle, beta)?;
    Ok(C64::from_polar(1.0, alpha * beta / 2.0) * shifted_overlap(particle, alpha, beta))
}

/// Both read-out correlations of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlations {
    pub xx: f64,
    pub yy: f64,
}

/// Which two-qubit correlator is read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Correlator {
    Xx,
    Yy,
}

impl Correlations {
    pub fn get(&self, which: Correlator) -> f64 {
        match which {
            Correlator::Xx => self.xx,
            Correlator::Yy => self.yy,
        }
    }
}

pub fn correlations(
    particle: &ParticleState,
    qubits: &QubitPairState,
    schedule: &CouplingSchedule,
) -> Result<Correlations> {
    let d = EtaMuDecomposition::new(schedule);
    let eta_weight = 2.0 * qubits.e01() * qubits.e10().conj();
    let eta = if eta_weight == C64::new(0.0, 0.0) {
        0.0
    } else {
        (eta_weight * char_fn(particle, d.lambda)?).re
    };
    let mu_weight = 2.0 * qubits.e00().conj() * qubits.e11();
    let mu = if mu_weight == C64::new(0.0, 0.0) {
        0.0
    } else {
        let w = weyl_expectation(particle, d.mu_alpha, d.mu_beta)?;
        (mu_weight * C64::from_polar(1.0, d.mu_phase) * w).re
    };
    Ok(Correlations { xx: eta + mu, yy: eta - mu })
}

/// `⟨σˣ₁σˣ₂⟩` at the read-out time.
pub fn corr_xx(particle: &ParticleState, qubits: &QubitPairState, schedule: &CouplingSchedule) -> Result<f64> {
    correlations(particle, qubits, schedule).map(|c| c.xx)
}

/// `⟨σʸ₁σʸ₂⟩` at the read-out time.
pub fn corr_yy(particle: &ParticleState, qubits: &QubitPairState, schedule: &CouplingSchedule) -> Result<f64> {
    correlations(particle, qubits, schedule).map(|c| c.yy)
}

/// `(|0⟩ + e^{iφ1}|1⟩) ⊗ (|0⟩ + e^{iφ2}|1⟩) / 2`.
pub fn make_separable_optimal(phi1: f64, phi2: f64) -> QubitPairState {
    QubitPairState::new(
        C64::new(0.5, 0.0),
        C64::from_polar(0.5, phi2),
        C64::from_polar(0.5, phi1),
        C64::from_polar(0.5, phi1 + phi2),
    )
    .expect("product of normalized qubits")
}

/// `(|01⟩ + e^{iφ}|10⟩) / √2`.
pub fn make_bell(phi: f64) -> QubitPairState {
    QubitPairState::new(
        C64::new(0.0, 0.0),
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::from_polar(FRAC_1_SQRT_2, phi),
        C64::new(0.0, 0.0),
    )
    .expect("normalized Bell state")
}

/// A pointer preparation with its phases fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeSetting {
    /// Optimal separable pointers; the value is `⟨σˣˣ⟩ + ⟨σʸʸ⟩`.
    Separable { phi1: f64, phi2: f64 },
    /// Bell pointers with relative phase `φ`; the value is the single
    /// selected correlation.
    Entangled { phi: f64, which: Correlator },
}

/// `Re{C_P(λ) e^{i(φ2−φ1)}}` for separable or `Re{C_P(λ) e^{−iφ}}` for
/// entangled pointers, computed from the correlation functions.
pub fn scheme_value(particle: &ParticleState, schedule: &CouplingSchedule, scheme: SchemeSetting) -> Result<f64> {
    match scheme {
        SchemeSetting::Separable { phi1, phi2 } => {
            let c = correlations(particle, &make_separable_optimal(phi1, phi2), schedule)?;
            Ok(c.xx + c.yy)
        }
        SchemeSetting::Entangled { phi, which } => {
            Ok(correlations(particle, &make_bell(phi), schedule)?.get(which))
        }
    }
}

/// Real or imaginary part of `C_P(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// One ensemble measurement: a pointer preparation and the correlator read
/// out on it. Its mean contributes to `part` of `C_P(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    pub qubits: QubitPairState,
    pub correlator: Correlator,
    pub part: Part,
}

/// Measurement protocol for the full complex `C_P(λ)` at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointerScheme {
    /// Four settings: `⟨σˣˣ⟩` and `⟨σʸʸ⟩` at `φ1 − φ2 ∈ {0, π/2}`; each part
    /// is the sum of its two correlations.
    Separable,
    /// Two settings: one correlator at `φ ∈ {0, π/2}`.
    Entangled(Correlator),
}

impl PointerScheme {
    pub fn settings_per_lambda(&self) -> usize {
        match self {
            PointerScheme::Separable => 4,
            PointerScheme::Entangled(_) => 2,
        }
    }

    pub fn settings(&self) -> Vec<MeasurementSetting> {
        match *self {
            PointerScheme::Separable => {
                let re = make_separable_optimal(0.0, 0.0);
                let im = make_separable_optimal(FRAC_PI_2, 0.0);
                alloc::vec![
                    MeasurementSetting { qubits: re, correlator: Correlator::Xx, part: Part::Re },
                    MeasurementSetting { qubits: re, correlator: Correlator::Yy, part: Part::Re },
                    MeasurementSetting { qubits: im, correlator: Correlator::Xx, part: Part::Im },
                    MeasurementSetting { qubits: im, correlator: Correlator::Yy, part: Part::Im },
                ]
            }
            PointerScheme::Entangled(which) => alloc::vec![
                MeasurementSetting { qubits: make_bell(0.0), correlator: which, part: Part::Re },
                MeasurementSetting { qubits: make_bell(FRAC_PI_2), correlator: which, part: Part::Im },
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_gaussian, GridSpec};
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    fn gaussian(p0: f64) -> ParticleState {
        make_gaussian(GridSpec::reference(), 0.0, p0, FRAC_1_SQRT_2).unwrap()
    }

    fn schedule(kappa: f64, t1: f64, t2: f64, t_read: f64, omega: f64) -> CouplingSchedule {
        CouplingSchedule::new(kappa, t1, t2, t_read, omega).unwrap()
    }

    /// Composite Simpson rule for `∫ f` over `[a, b]` with `n` (even) panels.
    fn simpson(f: impl Fn(f64) -> C64, a: f64, b: f64, n: usize) -> C64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += f(a + i as f64 * h) * w;
        }
        acc * (h / 3.0)
    }

    /// Continuous standard Gaussian with momentum `p0`.
    fn psi(x: f64, p0: f64) -> C64 {
        C64::from_polar(PI.powf(-0.25) * (-x * x / 2.0).exp(), p0 * x)
    }

    #[test]
    fn gaussian_char_fn_oracle_by_quadrature() {
        // closed form e^{-λ²/4} e^{iλp0} cross-checked by independent quadrature
        for &(p0, lambda) in &[(0.0, 0.5), (0.0, 2.0), (2.0, 1.0), (2.0, 3.5)] {
            let quad = simpson(|x| psi(x, p0).conj() * psi(x + lambda, p0), -30.0, 30.0, 20_000);
            let closed = C64::from_polar((-lambda * lambda / 4.0).exp(), lambda * p0);
            assert!((quad - closed).norm() < 1e-10);
            let grid = char_fn(&gaussian(p0), lambda).unwrap();
            assert!((grid - closed).norm() < 1e-10, "{grid} vs {closed}");
        }
    }

    #[test]
    fn char_fn_examples() {
        let g = gaussian(0.0);
        assert!((char_fn(&g, 0.0).unwrap() - 1.0).norm() < 1e-12);
        let c = char_fn(&gaussian(2.0), 1.0).unwrap();
        let expected = C64::from_polar((-0.25f64).exp(), 2.0);
        assert!((c - expected).norm() < 1e-10);
    }

    #[test]
    fn char_fn_range_guard() {
        let g = gaussian(0.0);
        assert!(matches!(char_fn(&g, 60.0), Err(Error::LambdaOutOfRange { .. })));
        assert!(matches!(char_fn(&g, -61.0), Err(Error::LambdaOutOfRange { .. })));
        assert!(char_fn(&g, 59.0).is_ok());
        assert!(matches!(weyl_expectation(&g, 0.0, 70.0), Err(Error::LambdaOutOfRange { .. })));
    }

    #[test]
    fn dual_route_agreement() {
        for p0 in [0.0, 2.0, -1.3] {
            let g = gaussian(p0);
            for lambda in [-4.0, -0.3, 0.0, 0.7, 2.0, 8.0] {
                let a = char_fn(&g, lambda).unwrap();
                let b = char_fn_momentum(&g, lambda).unwrap();
                assert!((a - b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn weyl_examples() {
        let g = gaussian(0.0);
        for lambda in [0.3, 1.7] {
            let w = weyl_expectation(&g, 0.0, lambda).unwrap();
            assert!((w - char_fn(&g, lambda).unwrap()).norm() < 1e-14);
        }
        assert!((weyl_expectation(&g, 0.0, 0.0).unwrap() - 1.0).norm() < 1e-12);
        // symmetric Gaussian: ⟨e^{i(X+P)}⟩ = exp(-(⟨X²⟩ + ⟨P²⟩)/2) = e^{-1/2}
        let quad = simpson(|x| psi(x, 0.0) * C64::from_polar(1.0, x) * psi(x + 1.0, 0.0), -30.0, 30.0, 20_000)
            * C64::from_polar(1.0, 0.5);
        assert!((quad - (-0.5f64).exp()).norm() < 1e-10);
        let w = weyl_expectation(&g, 1.0, 1.0).unwrap();
        assert!((w - (-0.5f64).exp()).norm() < 1e-10, "{w}");
    }

    #[test]
    fn correlation_examples() {
        let g = gaussian(0.0);
        let s = schedule(1.0, 1.0, 2.0, 3.0, 0.0);
        let basis = QubitPairState::basis(0, 0);
        assert_eq!(corr_xx(&g, &basis, &s).unwrap(), 0.0);
        assert_eq!(corr_yy(&g, &basis, &s).unwrap(), 0.0);
        let bell = make_bell(0.0);
        let e = (-1.0f64).exp();
        assert_abs_diff_eq!(corr_xx(&g, &bell, &s).unwrap(), e, epsilon = 1e-10);
        assert_abs_diff_eq!(corr_yy(&g, &bell, &s).unwrap(), e, epsilon = 1e-10);
        let s = schedule(1.0, 1.0, 2.0, 3.0, 2.7);
        assert_abs_diff_eq!(corr_xx(&g, &bell, &s).unwrap(), e, epsilon = 1e-10);
    }

    #[test]
    fn separable_sum_is_real_part() {
        let g = gaussian(2.0);
        let s = schedule(0.5, 1.0, 2.5, 4.0, 1.0);
        let c = char_fn(&g, s.lambda()).unwrap();
        let q = make_separable_optimal(0.0, 0.0);
        let sum = corr_xx(&g, &q, &s).unwrap() + corr_yy(&g, &q, &s).unwrap();
        assert_abs_diff_eq!(sum, c.re, epsilon = 1e-12);
    }

    #[test]
    fn state_constructors() {
        let q = make_separable_optimal(0.0, 0.0);
        for a in q.amplitudes() {
            assert_abs_diff_eq!(a.re, 0.5);
            assert_abs_diff_eq!(a.im, 0.0);
        }
        let q = make_separable_optimal(0.0, PI);
        assert_abs_diff_eq!(q.e00().re, 0.5);
        assert_abs_diff_eq!(q.e10().re, 0.5);
        assert_abs_diff_eq!(q.e01().re, -0.5);
        assert_abs_diff_eq!(q.e11().re, -0.5);
        assert_abs_diff_eq!((q.e01() * q.e10()).norm(), 0.25, epsilon = 1e-15);

        let b = make_bell(0.0);
        assert_eq!(b.e00(), C64::new(0.0, 0.0));
        assert_abs_diff_eq!(b.e01().re, FRAC_1_SQRT_2);
        assert_abs_diff_eq!(b.e10().re, FRAC_1_SQRT_2);
        let b = make_bell(PI);
        assert_abs_diff_eq!(b.e10().re, -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!((b.e01() * b.e10()).norm(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn scheme_values_pick_real_and_imaginary_parts() {
        let g = gaussian(2.0);
        let s = schedule(1.0, 1.0, 1.6, 4.0, 1.0);
        let c = char_fn(&g, s.lambda()).unwrap();
        let v = |scheme| scheme_value(&g, &s, scheme).unwrap();
        assert_abs_diff_eq!(v(SchemeSetting::Separable { phi1: 0.3, phi2: 0.3 }), c.re, epsilon = 1e-12);
        assert_abs_diff_eq!(v(SchemeSetting::Separable { phi1: FRAC_PI_2, phi2: 0.0 }), c.im, epsilon = 1e-12);
        assert_abs_diff_eq!(v(SchemeSetting::Entangled { phi: 0.0, which: Correlator::Xx }), c.re, epsilon = 1e-12);
        assert_abs_diff_eq!(
            v(SchemeSetting::Entangled { phi: FRAC_PI_2, which: Correlator::Yy }),
            c.im,
            epsilon = 1e-12
        );
    }

    #[test]
    fn setting_counts() {
        assert_eq!(PointerScheme::Separable.settings().len(), 4);
        assert_eq!(PointerScheme::Entangled(Correlator::Xx).settings().len(), 2);
        assert_eq!(PointerScheme::Separable.settings_per_lambda(), 4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn qubits() -> impl Strategy<Value = QubitPairState> {
            proptest::array::uniform8(-1.0f64..1.0).prop_filter_map("zero", |v| {
                let amps: [C64; 4] = core::array::from_fn(|i| C64::new(v[2 * i], v[2 * i + 1]));
                let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                (n > 1e-3).then(|| QubitPairState::new(amps[0] / n, amps[1] / n, amps[2] / n, amps[3] / n).unwrap())
            })
        }

        fn schedules() -> impl Strategy<Value = CouplingSchedule> {
            (0.2f64..1.5, 0.1f64..1.5, 0.05f64..2.0, 0.05f64..2.0, 0.0f64..3.0)
                .prop_map(|(k, t1, d2, dt, w)| CouplingSchedule::new(k, t1, t1 + d2, t1 + d2 + dt, w).unwrap())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn hermitian_symmetry(p0 in -3.0f64..3.0, x0 in -3.0f64..3.0, lambda in 0.0f64..10.0) {
                let g = make_gaussian(GridSpec::reference(), x0, p0, 0.9).unwrap();
                let a = char_fn(&g, lambda).unwrap();
                let b = char_fn(&g, -lambda).unwrap();
                prop_assert!((a - b.conj()).norm() < 1e-12);
                prop_assert!(a.norm() <= 1.0 + 1e-10);
            }

            #[test]
            fn bell_correlations_coincide(phi in -PI..PI, p0 in -2.0f64..2.0, s in schedules()) {
                let c = correlations(&gaussian(p0), &make_bell(phi), &s).unwrap();
                prop_assert!((c.xx - c.yy).abs() < 1e-14);
            }

            #[test]
            fn mu_terms_cancel_in_sum(q in qubits(), s in schedules(), w in 0.0f64..5.0) {
                let g = gaussian(1.0);
                let c1 = correlations(&g, &q, &s).unwrap();
                let shifted = CouplingSchedule::new(s.kappa(), s.t1(), s.t2(), s.t_read(), w).unwrap();
                let c2 = correlations(&g, &q, &shifted).unwrap();
                let eta = (2.0 * q.e01() * q.e10().conj() * char_fn(&g, s.lambda()).unwrap()).re;
                prop_assert!((c1.xx + c1.yy - 2.0 * eta).abs() < 1e-12);
                prop_assert!((c1.xx + c1.yy - c2.xx - c2.yy).abs() < 1e-12);
            }

            #[test]
            fn correlation_bound(q in qubits(), s in schedules(), p0 in -2.0f64..2.0) {
                let c = correlations(&gaussian(p0), &q, &s).unwrap();
                let bound = 2.0 * (q.e01() * q.e10()).norm() + 2.0 * (q.e00() * q.e11()).norm();
                prop_assert!(bound <= 1.0 + 1e-12);
                prop_assert!(c.xx.abs() <= bound + 1e-10);
                prop_assert!(c.yy.abs() <= bound + 1e-10);
            }
        }
    }
}
