//! Gaussian drive envelopes, their accumulated phases and sampled forms.
//!
//! Times are in nanoseconds and couplings in rad/ns. A Gaussian envelope is
//! time-limited: it vanishes identically outside `[t0 - 4σ, t0 + 4σ]`
//! intersected with the protocol window, so two pulses placed back to back
//! never overlap.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Half-width of the support, in units of sigma.
pub const SUPPORT_HALF_WIDTH: f64 = 4.0;

/// Largest accepted `sigma / t_m` for [`make_gaussian`].
pub const MAX_SIGMA_RATIO: f64 = 0.25;

/// A truncated Gaussian `f(t) = N exp(-(t - t0)^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseEnvelope {
    amplitude: f64,
    center: f64,
    sigma: f64,
    start: f64,
    end: f64,
}

impl PulseEnvelope {
    pub fn new(amplitude: f64, center: f64, sigma: f64, start: f64, end: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::param("amplitude", format!("must be finite and >= 0, got {amplitude}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param("sigma", format!("must be > 0, got {sigma}")));
        }
        if !(start < center && center < end) {
            return Err(Error::param(
                "support",
                format!("need start < center < end, got [{start}, {end}] around {center}"),
            ));
        }
        Ok(Self { amplitude, center, sigma, start, end })
    }

    /// Gaussian centred at `center` whose support is `center ± 4σ` clipped to `window`.
    pub fn gaussian(amplitude: f64, center: f64, sigma: f64, window: (f64, f64)) -> Result<Self> {
        let start = (center - SUPPORT_HALF_WIDTH * sigma).max(window.0);
        let end = (center + SUPPORT_HALF_WIDTH * sigma).min(window.1);
        Self::new(amplitude, center, sigma, start, end)
    }

    /// Gaussian whose truncated integral, weighted by `coupling`, equals `phase` exactly.
    pub fn with_delivered_phase(
        phase: f64,
        coupling: f64,
        center: f64,
        sigma: f64,
        window: (f64, f64),
    ) -> Result<Self> {
        check_coupling(coupling)?;
        if !(phase >= 0.0 && phase.is_finite()) {
            return Err(Error::param("phase", format!("must be finite and >= 0, got {phase}")));
        }
        let unit = Self::gaussian(1.0, center, sigma, window)?;
        let amplitude = phase / (coupling * unit.total_area());
        Ok(Self { amplitude, ..unit })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn support(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn value(&self, t: f64) -> f64 {
        if t < self.start || t > self.end {
            return 0.0;
        }
        let x = (t - self.center) / self.sigma;
        self.amplitude * (-0.5 * x * x).exp()
    }

    /// `∫ f` from the start of the support up to `t`.
    pub fn area(&self, t: f64) -> f64 {
        if t <= self.start {
            return 0.0;
        }
        let t = t.min(self.end);
        let scale = SQRT_2 * self.sigma;
        let lo = erf((self.start - self.center) / scale);
        let hi = erf((t - self.center) / scale);
        self.amplitude * self.sigma * (PI / 2.0).sqrt() * (hi - lo)
    }

    /// Integral over the whole (truncated) support.
    pub fn total_area(&self) -> f64 {
        self.area(self.end)
    }

    /// Integral of the untruncated Gaussian over the real line, `N σ √(2π)`.
    pub fn full_line_area(&self) -> f64 {
        self.amplitude * self.sigma * (2.0 * PI).sqrt()
    }

    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            center: self.center + dt,
            start: self.start + dt,
            end: self.end + dt,
            ..*self
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitude: self.amplitude * factor,
            ..*self
        }
    }

    /// Copy of this envelope with the support clipped to `window`.
    pub fn clipped(&self, window: (f64, f64)) -> Result<Self> {
        Self::new(
            self.amplitude,
            self.center,
            self.sigma,
            self.start.max(window.0),
            self.end.min(window.1),
        )
    }
}

/// Intended total phase of a pulse together with the coupling that delivers it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTarget {
    pub theta_m: f64,
    pub coupling: f64,
}

impl PhaseTarget {
    pub fn new(theta_m: f64, coupling: f64) -> Result<Self> {
        if !(theta_m >= 0.0 && theta_m.is_finite()) {
            return Err(Error::param("theta_m", format!("must be finite and >= 0, got {theta_m}")));
        }
        check_coupling(coupling)?;
        Ok(Self { theta_m, coupling })
    }

    /// Peak amplitude `θ_m / (g σ √(2π))`.
    pub fn amplitude(&self, sigma: f64) -> f64 {
        self.theta_m / (self.coupling * sigma * (2.0 * PI).sqrt())
    }
}

fn check_coupling(g: f64) -> Result<()> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::param("g", format!("coupling must be > 0, got {g}")));
    }
    Ok(())
}

/// Gaussian centred at `t_m / 2` with `σ = sigma_ratio · t_m` and support inside `[0, t_m]`.
pub fn make_gaussian(theta_m: f64, g: f64, t_m: f64, sigma_ratio: f64) -> Result<PulseEnvelope> {
    if !(t_m > 0.0 && t_m.is_finite()) {
        return Err(Error::param("t_m", format!("must be > 0, got {t_m}")));
    }
    if !(sigma_ratio > 0.0 && sigma_ratio <= MAX_SIGMA_RATIO) {
        return Err(Error::param(
            "sigma_ratio",
            format!("must lie in (0, {MAX_SIGMA_RATIO}], got {sigma_ratio}"),
        ));
    }
    let target = PhaseTarget::new(theta_m, g)?;
    let sigma = sigma_ratio * t_m;
    PulseEnvelope::gaussian(target.amplitude(sigma), t_m / 2.0, sigma, (0.0, t_m))
}

/// `θ(t) = g ∫ f`, from the start of the support to `t`.
pub fn accumulated_phase(envelope: &PulseEnvelope, g: f64, t: f64) -> f64 {
    g * envelope.area(t)
}

/// Envelope sampled at cell midpoints over its support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedPulse {
    dt: f64,
    start: f64,
    samples: Vec<f64>,
}

impl DiscretizedPulse {
    pub fn from_samples(start: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        if samples.is_empty() {
            return Err(Error::param("samples", "at least one sample is required"));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(Error::param("samples", format!("non-finite sample {bad}")));
        }
        Ok(Self { dt, start, samples })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.dt * self.samples.len() as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Piecewise-constant value; zero outside the sampled span.
    pub fn value(&self, t: f64) -> f64 {
        if t < self.start || t >= self.end() {
            return 0.0;
        }
        let k = ((t - self.start) / self.dt) as usize;
        self.samples[k.min(self.samples.len() - 1)]
    }

    /// Integral of the piecewise-constant signal up to `t`.
    pub fn area(&self, t: f64) -> f64 {
        if t <= self.start {
            return 0.0;
        }
        let span = (t.min(self.end()) - self.start) / self.dt;
        let full = (span.floor() as usize).min(self.samples.len());
        let mut acc: f64 = self.samples[..full].iter().sum::<f64>() * self.dt;
        if full < self.samples.len() {
            acc += self.samples[full] * (span - full as f64) * self.dt;
        }
        acc
    }

    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.dt
    }
}

/// Midpoint sampling of `envelope`. The step is shrunk so an integer number
/// of cells tiles the support exactly.
pub fn discretize(envelope: &PulseEnvelope, dt: f64) -> Result<DiscretizedPulse> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    if dt >= envelope.sigma() {
        return Err(Error::Undersampled { dt, sigma: envelope.sigma() });
    }
    let (start, end) = envelope.support();
    let cells = ((end - start) / dt).ceil().max(1.0) as usize;
    let step = (end - start) / cells as f64;
    let samples = (0..cells)
        .map(|k| envelope.value(start + (k as f64 + 0.5) * step))
        .collect();
    DiscretizedPulse::from_samples(start, step, samples)
}

/// Drive envelope used by the Hamiltonian: either an analytic Gaussian or a
/// tabulated schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    Gaussian(PulseEnvelope),
    Sampled(DiscretizedPulse),
}

impl Envelope {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Envelope::Gaussian(p) => p.value(t),
            Envelope::Sampled(p) => p.value(t),
        }
    }

    pub fn area(&self, t: f64) -> f64 {
        match self {
            Envelope::Gaussian(p) => p.area(t),
            Envelope::Sampled(p) => p.area(t),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Envelope::Gaussian(p) => p.support(),
            Envelope::Sampled(p) => (p.start(), p.end()),
        }
    }

    /// Largest integrator step that still resolves this envelope.
    pub fn max_step(&self) -> f64 {
        match self {
            Envelope::Gaussian(p) => p.sigma() / 16.0,
            Envelope::Sampled(p) => p.dt(),
        }
    }

    pub fn as_gaussian(&self) -> Option<&PulseEnvelope> {
        match self {
            Envelope::Gaussian(p) => Some(p),
            Envelope::Sampled(_) => None,
        }
    }
}

impl From<PulseEnvelope> for Envelope {
    fn from(p: PulseEnvelope) -> Self {
        Envelope::Gaussian(p)
    }
}

impl From<DiscretizedPulse> for Envelope {
    fn from(p: DiscretizedPulse) -> Self {
        Envelope::Sampled(p)
    }
}
