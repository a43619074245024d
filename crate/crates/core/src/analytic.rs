//! Closed-form states and stored energies for the resonant qubit, the
//! sequential and simultaneous qutrit protocols, and the adiabatic
//! average-frequency drive.
//!
//! These are the oracles the numerical integrator is checked against.
//! Energies are measured from the ground level (`ω0 = 0`).

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64 as C64;

use crate::device::LevelSpectrum;
use crate::error::{Error, Result};
use crate::hamiltonian::{ProtocolKind, ProtocolSpec};
use crate::state::{Frame, StateVector};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn check_fraction(a: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::param("a", format!("must lie in [0, 1], got {a}")));
    }
    Ok(())
}

/// Resonant Rabi rotation by `theta` of `√a|0⟩ + √(1−a)e^{iφ}|1⟩`.
pub fn qubit_state(a: f64, phi: f64, theta: f64) -> Result<StateVector> {
    let initial = StateVector::qubit(a, phi)?;
    Ok(rabi_rotation(&initial, 0, theta))
}

/// `exp(-i θ/2 σx)` acting on levels `(lower, lower+1)`.
fn rabi_rotation(state: &StateVector, lower: usize, theta: f64) -> StateVector {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut amps = state.amplitudes();
    let (x, y) = (amps[lower], amps[lower + 1]);
    amps[lower] = c * x - I * s * y;
    amps[lower + 1] = c * y - I * s * x;
    StateVector::from_raw(amps, state.frame())
}

/// Stored energy of the driven qubit after accumulating phase `theta`.
///
/// `Δ [a sin²(θ/2) − 2√(a(1−a)) sinφ sin(θ/2)cos(θ/2) + (1−a) cos²(θ/2)]`.
/// The cross term carries the sign produced by `H = (g/2) f σx`.
pub fn qubit_energy(a: f64, phi: f64, theta: f64, spectrum: &LevelSpectrum) -> Result<f64> {
    check_fraction(a)?;
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let cross = 2.0 * (a * (1.0 - a)).sqrt() * phi.sin() * s * c;
    Ok(spectrum.delta() * (a * s * s - cross + (1.0 - a) * c * c))
}

/// Two-step energy as a function of the combined phase `φ_m ∈ [0, 2π]`.
pub fn sequential_energy_vs_phase(phi_m: f64, spectrum: &LevelSpectrum) -> Result<f64> {
    if !(0.0..=2.0 * PI).contains(&phi_m) {
        return Err(Error::param("phi_m", format!("must lie in [0, 2π], got {phi_m}")));
    }
    Ok(if phi_m <= PI {
        spectrum.delta() * (phi_m / 2.0).sin().powi(2)
    } else {
        spectrum.delta() + spectrum.delta_prime() * ((phi_m - PI) / 2.0).sin().powi(2)
    })
}

/// Splits `φ_m` into the two pulse areas `(θ1_m, θ2_m)`.
pub fn sequential_phases(phi_m: f64) -> (f64, f64) {
    if phi_m <= PI {
        (phi_m, 0.0)
    } else {
        (PI, phi_m - PI)
    }
}

fn require_kind(spec: &ProtocolSpec, kind: ProtocolKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::Protocol(format!(
            "expected a {kind:?} protocol, got {:?}",
            spec.kind
        )));
    }
    Ok(())
}

fn require_disjoint(spec: &ProtocolSpec) -> Result<()> {
    require_kind(spec, ProtocolKind::Sequential)?;
    if !spec.is_disjoint() {
        return Err(Error::Protocol(
            "overlapping sequential pulses have no closed form; use the integrator".into(),
        ));
    }
    Ok(())
}

/// Exact state of the disjoint sequential protocol: the two rotations
/// commute with time ordering because the pulses never overlap.
pub fn sequential_state(t: f64, spec: &ProtocolSpec) -> Result<StateVector> {
    require_disjoint(spec)?;
    let first = rabi_rotation(&spec.initial, 0, spec.drives[0].phase(t));
    Ok(rabi_rotation(&first, 1, spec.drives[1].phase(t)))
}

/// Piecewise energy `Δ sin²(θ1/2)` then `Δ + Δ′ sin²(θ2/2)`, assuming the
/// first pulse leaves the battery in `|1⟩`.
pub fn sequential_energy_vs_time(t: f64, spec: &ProtocolSpec) -> Result<f64> {
    require_disjoint(spec)?;
    let s = &spec.spectrum;
    let handoff = spec.drives[1].envelope.support().0;
    Ok(if t < handoff {
        s.delta() * (spec.drives[0].phase(t) / 2.0).sin().powi(2)
    } else {
        s.delta() + s.delta_prime() * (spec.drives[1].phase(t) / 2.0).sin().powi(2)
    })
}

/// State reached from `|0⟩` by the simultaneous protocol:
/// `(c2, c1, c0) = (½(cosΘ−1), −(i/√2) sinΘ, ½(cosΘ+1))`.
pub fn simultaneous_state(big_theta: f64) -> StateVector {
    let (c, s) = (big_theta.cos(), big_theta.sin());
    StateVector::from_raw(
        [
            C64::new(0.5 * (c + 1.0), 0.0),
            C64::new(0.0, -FRAC_1_SQRT_2 * s),
            C64::new(0.5 * (c - 1.0), 0.0),
        ],
        Frame::Rotating,
    )
}

/// `(Δ/2) sin²Θ + (Δ_max/4)(1 − cosΘ)²`.
pub fn simultaneous_energy(big_theta: f64, spectrum: &LevelSpectrum) -> f64 {
    let (c, s) = (big_theta.cos(), big_theta.sin());
    0.5 * spectrum.delta() * s * s + 0.25 * spectrum.delta_max() * (1.0 - c).powi(2)
}

/// `Θ(t) = (g/√2) ∫ f` for the simultaneous and adiabatic protocols.
pub fn dressed_phase(t: f64, spec: &ProtocolSpec) -> f64 {
    spec.drives[0].phase(t) / SQRT_2
}

/// Diagonalizing frame of the simultaneous coupling matrix `T`.
///
/// Rows of the unitary are the dressed states `|−⟩, |+⟩, |B⟩` written in the
/// spinor basis `(c2, c1, c0)`; `T` has eigenvalues `−√2, √2, 0` on them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFrame;

impl EigenFrame {
    pub const EIGENVALUES: [f64; 3] = [-SQRT_2, SQRT_2, 0.0];

    pub fn unitary() -> [[f64; 3]; 3] {
        [
            [0.5, -FRAC_1_SQRT_2, 0.5],
            [0.5, FRAC_1_SQRT_2, 0.5],
            [-FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2],
        ]
    }

    /// `(c−, c+, c_B)` of a state.
    pub fn dressed_amplitudes(state: &StateVector) -> [C64; 3] {
        let u = Self::unitary();
        let v = state.spinor();
        u.map(|row| row[0] * v[0] + row[1] * v[1] + row[2] * v[2])
    }

    /// Inverse of [`Self::dressed_amplitudes`].
    pub fn from_dressed(dressed: [C64; 3], frame: Frame) -> StateVector {
        let u = Self::unitary();
        let mut spinor = [C64::new(0.0, 0.0); 3];
        for (k, s) in spinor.iter_mut().enumerate() {
            *s = (0..3).map(|r| u[r][k] * dressed[r]).sum();
        }
        StateVector::from_raw([spinor[2], spinor[1], spinor[0]], frame)
    }

    /// Evolves any initial state under `(g/2) f(t) T` given `Θ`.
    pub fn evolve(initial: &StateVector, big_theta: f64) -> StateVector {
        let d = Self::dressed_amplitudes(initial);
        let evolved = [
            d[0] * C64::from_polar(1.0, big_theta),
            d[1] * C64::from_polar(1.0, -big_theta),
            d[2],
        ];
        Self::from_dressed(evolved, initial.frame())
    }

    /// Berry phases `(γ_B, γ_±)` of the instantaneous eigenstates of the
    /// average-frequency Hamiltonian.
    pub fn berry_phases(delta: f64, t: f64) -> (f64, f64) {
        (0.0, -delta * t / 2.0)
    }

    /// Instantaneous eigenstates `|Ψ_B⟩, |Ψ_+⟩, |Ψ_−⟩` in spinor order.
    pub fn instantaneous_eigenstates(delta: f64, t: f64) -> [[C64; 3]; 3] {
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        let half = C64::new(0.5, 0.0);
        let mid = C64::from_polar(FRAC_1_SQRT_2, delta * t);
        [
            [-r, C64::new(0.0, 0.0), r],
            [half, mid, half],
            [half, -mid, half],
        ]
    }
}

/// Adiabatic state from `|0⟩` for phase `Θ` and anharmonic phase `δt`:
/// `(½(cosΘ e^{−iδt/2} − 1), −(i/√2) sinΘ e^{iδt/2}, ½(cosΘ e^{−iδt/2} + 1))`.
pub fn adiabatic_state_from(big_theta: f64, delta_t: f64) -> StateVector {
    let (c, s) = (big_theta.cos(), big_theta.sin());
    let back = C64::from_polar(c, -delta_t / 2.0);
    StateVector::from_raw(
        [
            0.5 * (back + 1.0),
            C64::from_polar(FRAC_1_SQRT_2 * s, delta_t / 2.0) * (-I),
            0.5 * (back - 1.0),
        ],
        Frame::Rotating,
    )
}

/// `(Δ/2) sin²Θ + (Δ_max/4)[1 − 2 cosΘ cos(δt/2) + cos²Θ]`.
pub fn adiabatic_energy_from(big_theta: f64, delta_t: f64, spectrum: &LevelSpectrum) -> f64 {
    let (c, s) = (big_theta.cos(), big_theta.sin());
    0.5 * spectrum.delta() * s * s
        + 0.25 * spectrum.delta_max() * (1.0 - 2.0 * c * (delta_t / 2.0).cos() + c * c)
}

fn require_adiabatic(spec: &ProtocolSpec) -> Result<()> {
    require_kind(spec, ProtocolKind::AdiabaticAverage)?;
    if spec.initial.distance(&StateVector::ground()) > 1e-12 {
        return Err(Error::Protocol(
            "the adiabatic solution is only available from the ground state".into(),
        ));
    }
    Ok(())
}

pub fn adiabatic_state(t: f64, spec: &ProtocolSpec) -> Result<StateVector> {
    require_adiabatic(spec)?;
    let delta = spec.spectrum.half_anharmonicity();
    Ok(adiabatic_state_from(dressed_phase(t, spec), delta * t))
}

pub fn adiabatic_energy(t: f64, spec: &ProtocolSpec) -> Result<f64> {
    require_adiabatic(spec)?;
    let delta = spec.spectrum.half_anharmonicity();
    Ok(adiabatic_energy_from(dressed_phase(t, spec), delta * t, &spec.spectrum))
}

/// Closed-form rotating-frame state at `t` for any protocol that has one.
pub fn analytic_state(t: f64, spec: &ProtocolSpec) -> Result<StateVector> {
    match spec.kind {
        ProtocolKind::QubitResonant => Ok(rabi_rotation(&spec.initial, 0, spec.drives[0].phase(t))),
        ProtocolKind::Sequential => sequential_state(t, spec),
        ProtocolKind::Simultaneous => Ok(EigenFrame::evolve(&spec.initial, dressed_phase(t, spec))),
        ProtocolKind::AdiabaticAverage => adiabatic_state(t, spec),
        ProtocolKind::Custom => Err(Error::Protocol(
            "custom schedules have no closed form; use the integrator".into(),
        )),
    }
}

/// Closed-form stored energy at `t`, using the formula specific to each protocol.
pub fn analytic_energy(t: f64, spec: &ProtocolSpec) -> Result<f64> {
    match spec.kind {
        ProtocolKind::QubitResonant => {
            let c0 = spec.initial.amplitude(0);
            let c1 = spec.initial.amplitude(1);
            let a = c0.norm_sqr().clamp(0.0, 1.0);
            // Global phase is irrelevant; φ is the relative phase of c1 to c0.
            let phi = if c0.norm() > 0.0 { (c1 / c0).arg() } else { c1.arg() };
            qubit_energy(a, phi, spec.drives[0].phase(t), &spec.spectrum)
        }
        ProtocolKind::Sequential => sequential_energy_vs_time(t, spec),
        ProtocolKind::Simultaneous if spec.initial.distance(&StateVector::ground()) <= 1e-12 => {
            Ok(simultaneous_energy(dressed_phase(t, spec), &spec.spectrum))
        }
        ProtocolKind::AdiabaticAverage => adiabatic_energy(t, spec),
        _ => {
            let p = analytic_state(t, spec)?.populations();
            Ok(spec.spectrum.delta() * p[1] + spec.spectrum.delta_max() * p[2])
        }
    }
}
