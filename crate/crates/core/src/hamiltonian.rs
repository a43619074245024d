//! Drive terms, protocol descriptions and the Hamiltonian matrices they
//! generate in the lab frame, the interaction picture and the rotating
//! frame under the rotating-wave approximation.

use std::f64::consts::SQRT_2;

use num_complex::Complex64 as C64;

use crate::device::LevelSpectrum;
use crate::error::{Error, Result};
use crate::pulses::{make_gaussian, Envelope, PulseEnvelope};
use crate::state::StateVector;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative tolerance for carrier/resonance checks.
const RESONANCE_TOLERANCE: f64 = 1e-12;

/// A dipole-allowed transition between neighbouring levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// |0⟩ ↔ |1⟩
    Lower,
    /// |1⟩ ↔ |2⟩
    Upper,
}

impl Transition {
    pub fn from_levels(a: usize, b: usize) -> Result<Self> {
        match (a.min(b), a.max(b)) {
            (0, 1) => Ok(Transition::Lower),
            (1, 2) => Ok(Transition::Upper),
            (lo, hi) => Err(Error::Protocol(format!(
                "transition ({lo},{hi}) is not dipole-allowed; only (0,1) and (1,2) can be driven"
            ))),
        }
    }

    /// Lower level index of the pair.
    pub fn lower(&self) -> usize {
        match self {
            Transition::Lower => 0,
            Transition::Upper => 1,
        }
    }

    fn spacing(&self, spectrum: &LevelSpectrum) -> f64 {
        match self {
            Transition::Lower => spectrum.delta(),
            Transition::Upper => spectrum.delta_prime(),
        }
    }
}

/// `g f(t) cos(Ω t)` coupling on one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveTerm {
    pub coupling: f64,
    pub envelope: Envelope,
    pub carrier: f64,
    pub transition: Transition,
}

impl DriveTerm {
    pub fn new(
        coupling: f64,
        envelope: impl Into<Envelope>,
        carrier: f64,
        transition: Transition,
    ) -> Result<Self> {
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(Error::param("g", format!("coupling must be > 0, got {coupling}")));
        }
        if !(carrier >= 0.0 && carrier.is_finite()) {
            return Err(Error::param("carrier", format!("must be finite and >= 0, got {carrier}")));
        }
        Ok(Self {
            coupling,
            envelope: envelope.into(),
            carrier,
            transition,
        })
    }

    /// Accumulated phase `g ∫ f` up to `t`.
    pub fn phase(&self, t: f64) -> f64 {
        self.coupling * self.envelope.area(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    QubitResonant,
    Sequential,
    Simultaneous,
    AdiabaticAverage,
    Custom,
}

/// How a pulse amplitude is derived from its target phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `N = θ_m / (g σ √(2π))`; the truncated support delivers slightly less than θ_m.
    #[default]
    FullLine,
    /// Amplitude chosen so the truncated pulse delivers exactly θ_m.
    Delivered,
}

/// Gaussian pulse shape shared by the protocol constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    /// σ as a fraction of the pulse window (t_m, or t_m/2 for each sequential pulse).
    pub sigma_ratio: f64,
    pub normalization: Normalization,
}

impl Default for PulseShape {
    fn default() -> Self {
        Self {
            sigma_ratio: 0.125,
            normalization: Normalization::FullLine,
        }
    }
}

impl PulseShape {
    pub fn delivered(sigma_ratio: f64) -> Self {
        Self {
            sigma_ratio,
            normalization: Normalization::Delivered,
        }
    }

    /// Pulse centred in `[0, window]` delivering `theta`.
    pub fn build(&self, theta: f64, g: f64, window: f64) -> Result<PulseEnvelope> {
        let unit = make_gaussian(theta, g, window, self.sigma_ratio)?;
        match self.normalization {
            Normalization::FullLine => Ok(unit),
            Normalization::Delivered => PulseEnvelope::with_delivered_phase(
                theta,
                g,
                unit.center(),
                unit.sigma(),
                (0.0, window),
            ),
        }
    }
}

/// Everything needed to simulate one charging run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub drives: Vec<DriveTerm>,
    pub spectrum: LevelSpectrum,
    pub t_m: f64,
    pub initial: StateVector,
}

fn check_t_m(t_m: f64) -> Result<()> {
    if !(t_m > 0.0 && t_m.is_finite()) {
        return Err(Error::param("t_m", format!("must be > 0, got {t_m}")));
    }
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RESONANCE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

impl ProtocolSpec {
    /// Two-level battery driven resonantly on |0⟩↔|1⟩, starting from `√a|0⟩ + √(1−a)e^{iφ}|1⟩`.
    #[allow(clippy::too_many_arguments)]
    pub fn qubit(
        spectrum: &LevelSpectrum,
        g: f64,
        t_m: f64,
        theta_m: f64,
        shape: PulseShape,
        a: f64,
        phi: f64,
    ) -> Result<Self> {
        check_t_m(t_m)?;
        let pulse = shape.build(theta_m, g, t_m)?;
        let spectrum = spectrum.as_qubit();
        let drive = DriveTerm::new(g, pulse, spectrum.delta(), Transition::Lower)?;
        Self::checked(ProtocolKind::QubitResonant, vec![drive], spectrum, t_m, StateVector::qubit(a, phi)?)
    }

    /// Two pulses of width `t_m/16`, the second delayed by `t_m/2`.
    pub fn sequential(
        spectrum: &LevelSpectrum,
        g: f64,
        t_m: f64,
        theta1_m: f64,
        theta2_m: f64,
        shape: PulseShape,
    ) -> Result<Self> {
        Self::sequential_with_delay(spectrum, g, t_m, theta1_m, theta2_m, shape, t_m / 2.0)
    }

    /// Sequential protocol with an arbitrary delay between the pulse centres.
    /// Delays shorter than `t_m/2` make the two supports overlap.
    #[allow(clippy::too_many_arguments)]
    pub fn sequential_with_delay(
        spectrum: &LevelSpectrum,
        g: f64,
        t_m: f64,
        theta1_m: f64,
        theta2_m: f64,
        shape: PulseShape,
        delay: f64,
    ) -> Result<Self> {
        check_t_m(t_m)?;
        if !(delay > 0.0 && delay <= t_m / 2.0) {
            return Err(Error::param("delay", format!("must lie in (0, t_m/2], got {delay}")));
        }
        let half = t_m / 2.0;
        let first = shape.build(theta1_m, g, half)?;
        let second = shape.build(theta2_m, g, half)?.shifted(delay);
        let drives = vec![
            DriveTerm::new(g, first, spectrum.delta(), Transition::Lower)?,
            DriveTerm::new(g, second, spectrum.delta_prime(), Transition::Upper)?,
        ];
        Self::checked(ProtocolKind::Sequential, drives, *spectrum, t_m, StateVector::ground())
    }

    /// Both resonant drives with one envelope; `Θ_m = θ_m/√2`.
    pub fn simultaneous(
        spectrum: &LevelSpectrum,
        g: f64,
        t_m: f64,
        big_theta_m: f64,
        shape: PulseShape,
    ) -> Result<Self> {
        check_t_m(t_m)?;
        let pulse = shape.build(SQRT_2 * big_theta_m, g, t_m)?;
        let drives = vec![
            DriveTerm::new(g, pulse, spectrum.delta(), Transition::Lower)?,
            DriveTerm::new(g, pulse, spectrum.delta_prime(), Transition::Upper)?,
        ];
        Self::checked(ProtocolKind::Simultaneous, drives, *spectrum, t_m, StateVector::ground())
    }

    /// Both drives at the average frequency `(Δ+Δ′)/2` with one envelope.
    pub fn adiabatic(
        spectrum: &LevelSpectrum,
        g: f64,
        t_m: f64,
        big_theta_m: f64,
        shape: PulseShape,
    ) -> Result<Self> {
        check_t_m(t_m)?;
        let pulse = shape.build(SQRT_2 * big_theta_m, g, t_m)?;
        let carrier = spectrum.delta_max() / 2.0;
        let drives = vec![
            DriveTerm::new(g, pulse, carrier, Transition::Lower)?,
            DriveTerm::new(g, pulse, carrier, Transition::Upper)?,
        ];
        Self::checked(ProtocolKind::AdiabaticAverage, drives, *spectrum, t_m, StateVector::ground())
    }

    /// Arbitrary schedule; detuned drives are handled in the rotating frame
    /// through their residual phases.
    pub fn custom(
        spectrum: &LevelSpectrum,
        t_m: f64,
        drives: Vec<DriveTerm>,
        initial: StateVector,
    ) -> Result<Self> {
        check_t_m(t_m)?;
        Self::checked(ProtocolKind::Custom, drives, *spectrum, t_m, initial)
    }

    pub fn with_initial(mut self, initial: StateVector) -> Result<Self> {
        self.initial = initial;
        self.validate()?;
        Ok(self)
    }

    fn checked(
        kind: ProtocolKind,
        drives: Vec<DriveTerm>,
        spectrum: LevelSpectrum,
        t_m: f64,
        initial: StateVector,
    ) -> Result<Self> {
        let spec = Self { kind, drives, spectrum, t_m, initial };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the structural invariants of `kind`.
    pub fn validate(&self) -> Result<()> {
        let err = |msg: &str| Err(Error::Protocol(format!("{:?}: {msg}", self.kind)));
        let s = &self.spectrum;
        if s.levels() == 2 && self.drives.iter().any(|d| d.transition == Transition::Upper) {
            return err("a two-level battery cannot be driven on |1>-|2>");
        }
        if s.levels() == 2 && self.initial.amplitude(2).norm() > 0.0 {
            return err("a two-level battery cannot start with population in |2>");
        }
        let pair = || -> Option<(&DriveTerm, &DriveTerm)> {
            match self.drives.as_slice() {
                [a, b] if a.transition == Transition::Lower && b.transition == Transition::Upper => Some((a, b)),
                _ => None,
            }
        };
        match self.kind {
            ProtocolKind::QubitResonant => match self.drives.as_slice() {
                [d] if d.transition == Transition::Lower && close(d.carrier, s.delta()) => Ok(()),
                _ => err("needs a single drive on |0>-|1> with carrier = Delta"),
            },
            ProtocolKind::Sequential => match pair() {
                Some((a, b)) if close(a.carrier, s.delta()) && close(b.carrier, s.delta_prime()) => {
                    let (_, end1) = a.envelope.support();
                    let (start2, _) = b.envelope.support();
                    if start2 < a.envelope.support().0 || end1 > b.envelope.support().1 {
                        return err("the second pulse must follow the first");
                    }
                    Ok(())
                }
                _ => err("needs drives on |0>-|1> at Delta then |1>-|2> at Delta'"),
            },
            ProtocolKind::Simultaneous => match pair() {
                Some((a, b))
                    if close(a.carrier, s.delta())
                        && close(b.carrier, s.delta_prime())
                        && a.envelope == b.envelope =>
                {
                    Ok(())
                }
                _ => err("needs identical envelopes with carriers Delta and Delta'"),
            },
            ProtocolKind::AdiabaticAverage => match pair() {
                Some((a, b))
                    if close(a.carrier, s.delta_max() / 2.0)
                        && close(b.carrier, s.delta_max() / 2.0)
                        && a.envelope == b.envelope =>
                {
                    Ok(())
                }
                _ => err("needs identical envelopes at the average frequency (Delta+Delta')/2"),
            },
            ProtocolKind::Custom => Ok(()),
        }
    }

    /// Sequential pulses whose supports do not overlap.
    pub fn is_disjoint(&self) -> bool {
        match self.drives.as_slice() {
            [a, b] => a.envelope.support().1 <= b.envelope.support().0,
            _ => true,
        }
    }

    /// Common coupling of all drives, if they share one.
    pub fn coupling(&self) -> Option<f64> {
        let g = self.drives.first()?.coupling;
        self.drives.iter().all(|d| d.coupling == g).then_some(g)
    }

    /// Largest rotating-frame step that resolves every envelope and, for
    /// detuned drives, 20 points per period of the residual phase.
    pub fn max_rotating_step(&self) -> f64 {
        let resonant = matches!(
            self.kind,
            ProtocolKind::QubitResonant | ProtocolKind::Sequential | ProtocolKind::Simultaneous
        );
        self.drives
            .iter()
            .map(|d| {
                let detuning = (d.carrier - d.transition.spacing(&self.spectrum)).abs();
                let phase_limit = if resonant || detuning == 0.0 {
                    f64::INFINITY
                } else {
                    2.0 * std::f64::consts::PI / detuning / 20.0
                };
                d.envelope.max_step().min(phase_limit)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest lab-frame step: 20 points per period of the fastest frequency.
    pub fn max_lab_step(&self) -> f64 {
        let fastest = self
            .drives
            .iter()
            .map(|d| d.carrier)
            .chain(self.spectrum.omega())
            .fold(0.0, f64::max);
        let carrier_limit = if fastest > 0.0 {
            2.0 * std::f64::consts::PI / fastest / 20.0
        } else {
            f64::INFINITY
        };
        carrier_limit.min(self.max_rotating_step())
    }
}

/// Dense 3×3 Hermitian matrix; two-level Hamiltonians leave row/column 2 empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: [[C64; 3]; 3],
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: [[ZERO; 3]; 3] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[row][col]
    }

    pub fn entries(&self) -> [[C64; 3]; 3] {
        self.entries
    }

    fn add_coupling(&mut self, lower: usize, value: C64) {
        self.entries[lower][lower + 1] += value;
        self.entries[lower + 1][lower] += value.conj();
    }

    pub fn apply(&self, v: &[C64; 3]) -> [C64; 3] {
        let m = &self.entries;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Largest entrywise `|H_ij − conj(H_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.entries[i][j] - self.entries[j][i].conj()).norm());
            }
        }
        worst
    }
}

/// `H_QB + Σ g f_k(t) cos(Ω_k t)(|n⟩⟨n+1| + h.c.)`.
pub fn lab_frame(spec: &ProtocolSpec, t: f64) -> HermitianMatrix {
    let mut h = HermitianMatrix::zeros(spec.spectrum.levels());
    for (n, w) in spec.spectrum.omega().into_iter().enumerate().take(spec.spectrum.levels()) {
        h.entries[n][n] = C64::new(w, 0.0);
    }
    for d in &spec.drives {
        let v = d.coupling * d.envelope.value(t) * (d.carrier * t).cos();
        h.add_coupling(d.transition.lower(), C64::new(v, 0.0));
    }
    h
}

/// Drive in the interaction picture without the RWA: `S H_C S†` with `S = e^{iH_QB t}`.
pub fn interaction_frame(spec: &ProtocolSpec, t: f64) -> HermitianMatrix {
    let mut h = HermitianMatrix::zeros(spec.spectrum.levels());
    for d in &spec.drives {
        let v = d.coupling * d.envelope.value(t) * (d.carrier * t).cos();
        let spacing = d.transition.spacing(&spec.spectrum);
        h.add_coupling(d.transition.lower(), C64::from_polar(v, -spacing * t));
    }
    h
}

/// Rotating-frame Hamiltonian under the RWA.
///
/// Each drive contributes `(g f/2) e^{i(Ω − ω_{n+1} + ω_n)t}` on `⟨n|·|n+1⟩`,
/// so resonant drives are real and the average-frequency drive picks up the
/// `e^{∓iδt}` phases.
pub fn rwa_frame(spec: &ProtocolSpec, t: f64) -> Result<HermitianMatrix> {
    spec.validate()?;
    Ok(rwa_frame_unchecked(spec, t))
}

pub(crate) fn rwa_frame_unchecked(spec: &ProtocolSpec, t: f64) -> HermitianMatrix {
    let mut h = HermitianMatrix::zeros(spec.spectrum.levels());
    let resonant = matches!(
        spec.kind,
        ProtocolKind::QubitResonant | ProtocolKind::Sequential | ProtocolKind::Simultaneous
    );
    for d in &spec.drives {
        let amp = 0.5 * d.coupling * d.envelope.value(t);
        let value = if resonant {
            C64::new(amp, 0.0)
        } else {
            let detuning = d.carrier - d.transition.spacing(&spec.spectrum);
            C64::from_polar(amp, detuning * t)
        };
        h.add_coupling(d.transition.lower(), value);
    }
    h
}
