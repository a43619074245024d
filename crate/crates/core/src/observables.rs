//! Stored energy, charging time, charging power and final-energy sweeps.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    adiabatic_energy, analytic_energy, qubit_energy, sequential_energy_vs_phase, sequential_phases,
    simultaneous_energy,
};
use crate::device::LevelSpectrum;
use crate::error::{Error, Result};
use crate::hamiltonian::{Normalization, ProtocolKind, ProtocolSpec, PulseShape};
use crate::integrator::{evolve, Trajectory};
use crate::state::{Frame, StateVector, NORM_TOLERANCE};

/// Default number of points in a sweep grid.
pub const DEFAULT_GRID_POINTS: usize = 65;

/// Integration step used by numeric sweeps, as a fraction of the narrowest σ.
pub const SWEEP_STEP_FRACTION: f64 = 1.0 / 32.0;

/// `Δ |c1|² + Δ_max |c2|²`, measured from the ground level.
pub fn stored_energy(state: &StateVector, spectrum: &LevelSpectrum) -> Result<f64> {
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Normalization { norm });
    }
    let p = state.populations();
    Ok(spectrum.delta() * p[1] + spectrum.delta_max() * p[2])
}

/// Sampled stored energy and populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCurve {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub populations: Vec<[f64; 3]>,
    pub norm_drift: Vec<f64>,
    pub t_m: f64,
    pub full_scale: f64,
}

impl EnergyCurve {
    /// States between renormalizations may drift by up to the integrator's
    /// failure limit; observables use the renormalized state and the drift
    /// itself is kept in `norm_drift`.
    pub fn from_trajectory(traj: &Trajectory, spectrum: &LevelSpectrum, t_m: f64) -> Result<Self> {
        let mut energy = Vec::with_capacity(traj.len());
        let mut populations = Vec::with_capacity(traj.len());
        for s in &traj.states {
            let s = s.normalized();
            energy.push(stored_energy(&s, spectrum)?);
            populations.push(s.populations());
        }
        Ok(Self {
            times: traj.times.clone(),
            energy,
            populations,
            norm_drift: traj.norm_drift.clone(),
            t_m,
            full_scale: spectrum.full_scale(),
        })
    }

    /// Closed-form curve on `points` uniform samples of `[0, t_m]`.
    pub fn analytic(spec: &ProtocolSpec, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::param("points", format!("need at least 2, got {points}")));
        }
        let mut times = Vec::with_capacity(points);
        let mut energy = Vec::with_capacity(points);
        let mut populations = Vec::with_capacity(points);
        for k in 0..points {
            let t = spec.t_m * k as f64 / (points - 1) as f64;
            let state = crate::analytic::analytic_state(t, spec)?;
            times.push(t);
            energy.push(analytic_energy(t, spec)?);
            populations.push(state.populations());
        }
        Ok(Self {
            times,
            energy,
            populations,
            norm_drift: vec![0.0; points],
            t_m: spec.t_m,
            full_scale: spec.spectrum.full_scale(),
        })
    }

    /// Integrated curve from `spec.initial` at step `h`.
    pub fn numeric(spec: &ProtocolSpec, frame: Frame, h: f64) -> Result<Self> {
        let traj = evolve(spec, frame, &spec.initial, h)?;
        Self::from_trajectory(&traj, &spec.spectrum, spec.t_m)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_fraction(&self) -> f64 {
        self.energy.iter().copied().fold(f64::NEG_INFINITY, f64::max) / self.full_scale
    }
}

/// First threshold crossing, plus the last upward crossing as a stability
/// diagnostic for curves that dip back below threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargingTime {
    pub time: f64,
    /// Time after which the curve stays at or above threshold, if it ends there.
    pub settled: Option<f64>,
}

fn check_threshold(threshold_fraction: f64, full_scale: f64) -> Result<f64> {
    if !(threshold_fraction > 0.0 && threshold_fraction.is_finite()) {
        return Err(Error::param(
            "threshold",
            format!("must be a positive fraction of full scale, got {threshold_fraction}"),
        ));
    }
    if full_scale.is_nan() || full_scale <= 0.0 {
        return Err(Error::param("full_scale", format!("must be > 0, got {full_scale}")));
    }
    Ok(threshold_fraction * full_scale)
}

fn interpolate(t0: f64, e0: f64, t1: f64, e1: f64, level: f64) -> f64 {
    if e1 == e0 {
        t1
    } else {
        t0 + (level - e0) * (t1 - t0) / (e1 - e0)
    }
}

/// Charging time by linear interpolation between bracketing grid points.
pub fn charging_time(curve: &EnergyCurve, threshold_fraction: f64, full_scale: f64) -> Result<ChargingTime> {
    let level = check_threshold(threshold_fraction, full_scale)?;
    let (t, e) = (&curve.times, &curve.energy);
    let first = e.iter().position(|&v| v >= level).ok_or(Error::NotCharged {
        max_fraction: e.iter().copied().fold(f64::NEG_INFINITY, f64::max) / full_scale,
    })?;
    let time = if first == 0 {
        t[0]
    } else {
        interpolate(t[first - 1], e[first - 1], t[first], e[first], level)
    };
    let settled = match e.iter().rposition(|&v| v < level) {
        None => Some(t[0]),
        Some(j) if j + 1 < e.len() => Some(interpolate(t[j], e[j], t[j + 1], e[j + 1], level)),
        Some(_) => None,
    };
    Ok(ChargingTime { time, settled })
}

/// Samples used to bracket the first crossing before bisection.
const BRACKET_SAMPLES: usize = 4096;

/// Charging time located by bisection on the closed-form `E(t)`.
pub fn charging_time_analytic(spec: &ProtocolSpec, threshold_fraction: f64) -> Result<ChargingTime> {
    let full_scale = spec.spectrum.full_scale();
    let level = check_threshold(threshold_fraction, full_scale)?;
    let energy = |t: f64| analytic_energy(t, spec);
    let grid = |k: usize| spec.t_m * k as f64 / BRACKET_SAMPLES as f64;

    let mut first = None;
    let mut last_below = None;
    let mut best = f64::NEG_INFINITY;
    let mut prev = (0.0, energy(0.0)?);
    if prev.1 >= level {
        first = Some(0.0);
    } else {
        last_below = Some(0);
    }
    best = best.max(prev.1);
    let mut brackets = Vec::new();
    for k in 1..=BRACKET_SAMPLES {
        let cur = (grid(k), energy(grid(k))?);
        best = best.max(cur.1);
        if prev.1 < level && cur.1 >= level {
            brackets.push((prev.0, cur.0));
        }
        if cur.1 < level {
            last_below = Some(k);
        }
        prev = cur;
    }
    let bisect = |(mut lo, mut hi): (f64, f64)| -> Result<f64> {
        while hi - lo > 1e-13 * spec.t_m {
            let mid = 0.5 * (lo + hi);
            if energy(mid)? >= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    };
    let time = match (first, brackets.first()) {
        (Some(t), _) => t,
        (None, Some(&b)) => bisect(b)?,
        (None, None) => return Err(Error::NotCharged { max_fraction: best / full_scale }),
    };
    let settled = match last_below {
        None => Some(0.0),
        Some(k) if k < BRACKET_SAMPLES => Some(bisect(*brackets.last().expect("an upward crossing follows"))?),
        Some(_) => None,
    };
    Ok(ChargingTime { time, settled })
}

/// `E(t_c) / t_c`.
pub fn average_power(energy_at_tc: f64, t_c: f64) -> Result<f64> {
    if t_c == 0.0 {
        return Err(Error::ZeroChargingTime);
    }
    if !(t_c > 0.0 && t_c.is_finite()) {
        return Err(Error::param("t_c", format!("must be > 0, got {t_c}")));
    }
    Ok(energy_at_tc / t_c)
}

/// Which quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Qubit pulse area θ_m.
    ThetaM,
    /// Combined sequential phase φ_m.
    PhiM,
    /// Simultaneous or adiabatic phase Θ_m.
    BigThetaM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    Numeric,
}

/// Everything about a protocol except the swept phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepTemplate {
    pub kind: ProtocolKind,
    pub spectrum: LevelSpectrum,
    pub g: f64,
    pub t_m: f64,
    pub sigma_ratio: f64,
    /// Qubit initial state `√a|0⟩ + √(1−a)e^{iφ}|1⟩`.
    pub a: f64,
    pub phi: f64,
    /// Delay between the sequential pulse centres; `None` means `t_m/2`.
    pub delay: Option<f64>,
}

impl SweepTemplate {
    pub fn new(kind: ProtocolKind, spectrum: LevelSpectrum, g: f64, t_m: f64, sigma_ratio: f64) -> Self {
        Self { kind, spectrum, g, t_m, sigma_ratio, a: 1.0, phi: 0.0, delay: None }
    }

    pub fn variable(&self) -> Result<SweepVariable> {
        match self.kind {
            ProtocolKind::QubitResonant => Ok(SweepVariable::ThetaM),
            ProtocolKind::Sequential => Ok(SweepVariable::PhiM),
            ProtocolKind::Simultaneous | ProtocolKind::AdiabaticAverage => Ok(SweepVariable::BigThetaM),
            ProtocolKind::Custom => Err(Error::Protocol("custom schedules cannot be swept".into())),
        }
    }

    /// Protocol whose pulses deliver exactly `eta` by `t_m`.
    pub fn protocol(&self, eta: f64) -> Result<ProtocolSpec> {
        let shape = PulseShape { sigma_ratio: self.sigma_ratio, normalization: Normalization::Delivered };
        let (s, g, t_m) = (&self.spectrum, self.g, self.t_m);
        match self.kind {
            ProtocolKind::QubitResonant => ProtocolSpec::qubit(s, g, t_m, eta, shape, self.a, self.phi),
            ProtocolKind::Sequential => {
                let (th1, th2) = sequential_phases(eta);
                let delay = self.delay.unwrap_or(t_m / 2.0);
                ProtocolSpec::sequential_with_delay(s, g, t_m, th1, th2, shape, delay)
            }
            ProtocolKind::Simultaneous => ProtocolSpec::simultaneous(s, g, t_m, eta, shape),
            ProtocolKind::AdiabaticAverage => ProtocolSpec::adiabatic(s, g, t_m, eta, shape),
            ProtocolKind::Custom => Err(Error::Protocol("custom schedules cannot be swept".into())),
        }
    }

    pub fn full_scale(&self) -> f64 {
        match self.kind {
            ProtocolKind::QubitResonant => self.spectrum.delta(),
            _ => self.spectrum.delta_max(),
        }
    }

    /// Final energy at `t_m` for one grid value.
    pub fn final_energy(&self, eta: f64, engine: Engine) -> Result<f64> {
        match engine {
            Engine::Analytic => match self.kind {
                ProtocolKind::QubitResonant => qubit_energy(self.a, self.phi, eta, &self.spectrum),
                ProtocolKind::Sequential => {
                    let spec = self.protocol(eta)?;
                    if !spec.is_disjoint() {
                        return Err(Error::Protocol(
                            "overlapping sequential pulses have no closed form; use the numeric engine".into(),
                        ));
                    }
                    sequential_energy_vs_phase(eta, &self.spectrum)
                }
                ProtocolKind::Simultaneous => Ok(simultaneous_energy(eta, &self.spectrum)),
                ProtocolKind::AdiabaticAverage => adiabatic_energy(self.t_m, &self.protocol(eta)?),
                ProtocolKind::Custom => Err(Error::Protocol("custom schedules cannot be swept".into())),
            },
            Engine::Numeric => stored_energy(&self.final_state(eta, engine)?, &self.spectrum),
        }
    }

    /// Final rotating-frame state at `t_m`.
    pub fn final_state(&self, eta: f64, engine: Engine) -> Result<StateVector> {
        let spec = self.protocol(eta)?;
        match engine {
            Engine::Analytic => crate::analytic::analytic_state(self.t_m, &spec),
            Engine::Numeric => {
                let h = spec.max_rotating_step() * 16.0 * SWEEP_STEP_FRACTION;
                Ok(evolve(&spec, Frame::Rotating, &spec.initial, h)?.final_state().normalized())
            }
        }
    }
}

/// Final stored energy as a function of the swept phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub eta: Vec<f64>,
    pub energy: Vec<f64>,
    /// Statistical error bar per point; zero for noiseless engines.
    pub stderr: Vec<f64>,
    pub full_scale: f64,
}

impl SweepResult {
    pub fn fractions(&self) -> Vec<f64> {
        self.energy.iter().map(|e| e / self.full_scale).collect()
    }
}

/// Checks that a grid is strictly increasing and within `[0, 2π]`.
pub fn check_grid(eta: &[f64]) -> Result<()> {
    if eta.is_empty() {
        return Err(Error::param("eta", "grid is empty"));
    }
    if eta.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("eta", "grid must be strictly increasing"));
    }
    if eta[0] < 0.0 || eta[eta.len() - 1] > 2.0 * PI + 1e-12 {
        return Err(Error::param("eta", "grid must lie within [0, 2π]"));
    }
    Ok(())
}

/// `points` uniform values on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Default grid for the template's sweep variable: `[0, π]` or `[0, 2π]` for φ_m.
pub fn default_grid(variable: SweepVariable) -> Vec<f64> {
    let hi = if variable == SweepVariable::PhiM { 2.0 * PI } else { PI };
    uniform_grid(0.0, hi, DEFAULT_GRID_POINTS)
}

pub fn sweep_final_energy(template: &SweepTemplate, eta: &[f64], engine: Engine) -> Result<SweepResult> {
    check_grid(eta)?;
    let variable = template.variable()?;
    let energy = eta
        .par_iter()
        .map(|&x| template.final_energy(x, engine))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        variable,
        eta: eta.to_vec(),
        stderr: vec![0.0; eta.len()],
        energy,
        full_scale: template.full_scale(),
    })
}

/// Reference charging-time table rows: `(a, φ, E_thr/Δ, reference t_c/t_m)`.
pub const TABLE1_ROWS: [(f64, f64, f64, f64); 7] = [
    (1.0, 0.0, 0.92, 0.58),
    (1.0, 0.0, 0.95, 0.59),
    (1.0, 0.0, 0.99, 0.63),
    (0.98, 0.0, 0.95, 0.61),
    (0.98, PI / 4.0, 0.95, 0.63),
    (0.96, 0.0, 0.95, 0.63),
    (0.96, PI / 4.0, 0.95, 0.68),
];

/// Gaussian width used by the charging-time table, `σ = t_m/8`.
pub const TABLE1_SIGMA_RATIO: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub a: f64,
    pub phi: f64,
    pub threshold: f64,
    pub reference: f64,
    /// t_c/t_m with the stated Gaussian of standard deviation σ.
    pub closed_form: f64,
    /// t_c/t_m when the accumulated phase is `(θ_m/2)[erf((t−t0)/σ) + 1]`,
    /// i.e. a Gaussian of standard deviation σ/√2.
    pub erf_width: f64,
}

/// Recomputes the charging-time table on the closed-form qubit curve with θ_m = π.
pub fn table1() -> Result<Vec<Table1Row>> {
    let spectrum = crate::device::qubit_spectrum(1.0)?;
    let stated = PulseShape { sigma_ratio: TABLE1_SIGMA_RATIO, normalization: Normalization::FullLine };
    let narrow = PulseShape { sigma_ratio: TABLE1_SIGMA_RATIO / SQRT_2, ..stated };
    TABLE1_ROWS
        .iter()
        .map(|&(a, phi, threshold, reference)| {
            let t_c = |shape: PulseShape| -> Result<f64> {
                let spec = ProtocolSpec::qubit(&spectrum, 1.0, 1.0, PI, shape, a, phi)?;
                Ok(charging_time_analytic(&spec, threshold)?.time)
            };
            Ok(Table1Row {
                a,
                phi,
                threshold,
                reference,
                closed_form: t_c(stated)?,
                erf_width: t_c(narrow)?,
            })
        })
        .collect()
}
