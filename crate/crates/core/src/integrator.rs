//! Fixed-step fourth-order Runge–Kutta propagation of `i ψ̇ = H(t) ψ`.
//!
//! Rotating-frame runs use the RWA Hamiltonian. Lab-frame runs keep the
//! counter-rotating terms: the amplitudes are propagated in the interaction
//! picture `e^{iH_QB t}` (exact, no RWA) and mapped back to the lab frame for
//! output, which keeps the stiff diagonal out of the stepping.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonian::{interaction_frame, rwa_frame_unchecked, HermitianMatrix, ProtocolSpec};
use crate::state::{Frame, StateVector, NORM_TOLERANCE};

/// Steps between renormalizations.
pub const RENORMALIZE_EVERY: usize = 64;

/// Norm drift above which integration is abandoned.
pub const FAILURE_DRIFT: f64 = 1e-6;

/// Relative offset of the one-sided endpoint samples.
const EDGE_INSET: f64 = 1e-9;

/// States on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `|‖ψ‖ − 1|` at each grid point before any renormalization.
    pub norm_drift: Vec<f64>,
    pub frame: Frame,
    pub step: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectories hold at least the initial state")
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Largest admissible step for `frame`.
pub fn step_limit(spec: &ProtocolSpec, frame: Frame) -> f64 {
    match frame {
        Frame::Rotating => spec.max_rotating_step(),
        Frame::Lab => spec.max_lab_step(),
    }
}

/// Propagates `initial` over `[0, t_m]`.
pub fn evolve(spec: &ProtocolSpec, frame: Frame, initial: &StateVector, h: f64) -> Result<Trajectory> {
    evolve_span(spec, frame, initial, 0.0, spec.t_m, h)
}

/// Propagates `initial` from `t_from` to `t_to`; `t_to < t_from` integrates
/// backwards in time. The step is shrunk so the grid ends exactly on `t_to`.
pub fn evolve_span(
    spec: &ProtocolSpec,
    frame: Frame,
    initial: &StateVector,
    t_from: f64,
    t_to: f64,
    h: f64,
) -> Result<Trajectory> {
    spec.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param("h", format!("step must be > 0, got {h}")));
    }
    let limit = step_limit(spec, frame);
    if h > limit * (1.0 + 1e-12) {
        return Err(Error::Resolution { step: h, limit });
    }
    let start_drift = (initial.norm() - 1.0).abs();
    if start_drift > NORM_TOLERANCE {
        return Err(Error::Normalization { norm: initial.norm() });
    }

    let omega = spec.spectrum.omega();
    let span = t_to - t_from;
    let n = (span.abs() / h - 1e-9).ceil().max(1.0) as usize;
    let dt = span / n as f64;

    // Amplitudes are always stepped in the rotating (interaction) picture.
    let mut psi = match (frame, initial.frame()) {
        (Frame::Lab, Frame::Lab) => initial.to_rotating(omega, t_from).amplitudes(),
        _ => initial.amplitudes(),
    };
    let hamiltonian = |t: f64| -> HermitianMatrix {
        match frame {
            Frame::Rotating => rwa_frame_unchecked(spec, t),
            Frame::Lab => interaction_frame(spec, t),
        }
    };
    let output = |amps: [C64; 3], t: f64| -> StateVector {
        let s = StateVector::from_raw(amps, Frame::Rotating);
        match frame {
            Frame::Rotating => s,
            Frame::Lab => s.to_lab(omega, t),
        }
    };

    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut norm_drift = Vec::with_capacity(n + 1);
    times.push(t_from);
    states.push(output(psi, t_from));
    norm_drift.push(start_drift);

    for k in 0..n {
        let t = t_from + k as f64 * dt;
        psi = rk4_step(&hamiltonian, psi, t, dt);
        let t_next = if k + 1 == n { t_to } else { t_from + (k + 1) as f64 * dt };
        let norm = norm_of(&psi);
        let drift = (norm - 1.0).abs();
        if drift > FAILURE_DRIFT {
            return Err(Error::IntegrationFailure { drift, limit: FAILURE_DRIFT });
        }
        if (k + 1) % RENORMALIZE_EVERY == 0 {
            psi = psi.map(|c| c / norm);
        }
        times.push(t_next);
        states.push(output(psi, t_next));
        norm_drift.push(drift);
    }

    Ok(Trajectory { times, states, norm_drift, frame, step: dt.abs() })
}

fn norm_of(psi: &[C64; 3]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn derivative(h: &HermitianMatrix, psi: &[C64; 3]) -> [C64; 3] {
    let minus_i = C64::new(0.0, -1.0);
    h.apply(psi).map(|c| minus_i * c)
}

fn axpy(psi: &[C64; 3], k: &[C64; 3], a: f64) -> [C64; 3] {
    [psi[0] + k[0] * a, psi[1] + k[1] * a, psi[2] + k[2] * a]
}

fn rk4_step(hamiltonian: &impl Fn(f64) -> HermitianMatrix, psi: [C64; 3], t: f64, dt: f64) -> [C64; 3] {
    // Endpoints are sampled from inside the step, so a truncated envelope edge
    // that falls on a grid point is seen by one step only.
    let inset = EDGE_INSET * dt;
    let h0 = hamiltonian(t + inset);
    let hm = hamiltonian(t + 0.5 * dt);
    let h1 = hamiltonian(t + dt - inset);
    let k1 = derivative(&h0, &psi);
    let k2 = derivative(&hm, &axpy(&psi, &k1, 0.5 * dt));
    let k3 = derivative(&hm, &axpy(&psi, &k2, 0.5 * dt));
    let k4 = derivative(&h1, &axpy(&psi, &k3, dt));
    let mut out = psi;
    for i in 0..3 {
        out[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
    }
    out
}

/// Largest final-amplitude difference between steps `h` and `h/2`.
/// Lab-frame runs are compared in the interaction picture.
pub fn self_convergence(spec: &ProtocolSpec, frame: Frame, initial: &StateVector, h: f64) -> Result<f64> {
    let coarse = evolve(spec, frame, initial, h)?;
    let fine = evolve(spec, frame, initial, h / 2.0)?;
    Ok(coarse.final_state().distance(fine.final_state()))
}
