//! Run configuration read from a TOML file.
//!
//! ```toml
//! [device]
//! charging_energy = 0.25    # or omega1 = 4.75, omega2 = 9.25
//! josephson_energy = 12.5
//!
//! [protocol]
//! kind = "simultaneous"     # qubit | sequential | simultaneous | adiabatic
//! t_m = 8.0
//! big_theta_m = 3.141592653589793
//!
//! [integrator]
//! frame = "rotating"
//!
//! [readout]
//! enabled = true
//! shots = 1024
//!
//! [output]
//! units = "fraction"
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use qbattery::device::{spectrum_from_frequencies, transmon_spectrum};
use qbattery::hamiltonian::{Normalization, PulseShape};
use qbattery::observables::{Engine, SweepTemplate};
use qbattery::readout::{ClusterModel, IqPoint};
use qbattery::{Frame, LevelSpectrum, ProtocolKind, ProtocolSpec, TransmonParams};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: Option<DeviceSection>,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub readout: ReadoutSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    pub charging_energy: Option<f64>,
    pub josephson_energy: Option<f64>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    /// 2 or 3; defaults to 2 for the qubit protocol and 3 otherwise.
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Qubit,
    Sequential,
    Simultaneous,
    Adiabatic,
}

impl KindName {
    fn kind(self) -> ProtocolKind {
        match self {
            KindName::Qubit => ProtocolKind::QubitResonant,
            KindName::Sequential => ProtocolKind::Sequential,
            KindName::Simultaneous => ProtocolKind::Simultaneous,
            KindName::Adiabatic => ProtocolKind::AdiabaticAverage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationName {
    #[default]
    FullLine,
    Delivered,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    /// Defaults to `simultaneous`.
    pub kind: KindName,
    pub coupling: f64,
    pub t_m: f64,
    /// σ over the pulse window (t_m, or t_m/2 per sequential pulse).
    pub sigma_ratio: Option<f64>,
    pub normalization: NormalizationName,
    pub theta_m: Option<f64>,
    pub phi_m: Option<f64>,
    pub big_theta_m: Option<f64>,
    pub a: f64,
    pub phi: f64,
    /// Delay between the sequential pulse centres; defaults to `t_m/2`.
    pub delay: Option<f64>,
    /// Charging threshold as a fraction of full scale.
    pub threshold: f64,
    /// Samples of closed-form curves.
    pub points: usize,
    pub grid_points: usize,
    pub grid_max: Option<f64>,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            kind: KindName::Simultaneous,
            coupling: 1.0,
            t_m: 8.0,
            sigma_ratio: None,
            normalization: NormalizationName::FullLine,
            theta_m: None,
            phi_m: None,
            big_theta_m: None,
            a: 1.0,
            phi: 0.0,
            delay: None,
            threshold: 0.95,
            points: 401,
            grid_points: qbattery::observables::DEFAULT_GRID_POINTS,
            grid_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameName {
    #[default]
    Rotating,
    Lab,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub frame: FrameName,
    /// Step size; defaults to half the largest admissible step.
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    #[default]
    Benchmark,
    Noiseless,
    Custom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutSection {
    pub enabled: bool,
    pub shots: u64,
    pub seed: u64,
    pub calibration_shots: u64,
    pub model: ModelName,
    pub centers: Option<[[f64; 2]; 3]>,
    pub spreads: Option<[f64; 3]>,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        Self {
            enabled: false,
            shots: 1024,
            seed: 0,
            calibration_shots: 1024,
            model: ModelName::Benchmark,
            centers: None,
            spreads: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// Fraction of full scale (Δ for a qubit, Δ_max for a qutrit).
    #[default]
    Fraction,
    /// rad/ns.
    RadPerNs,
    /// μeV.
    MicroEv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub units: Units,
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), units: Units::Fraction, plots: false }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string().trim_end().to_string()))
    }

    pub fn spectrum(&self) -> CliResult<LevelSpectrum> {
        let d = self.device.as_ref().ok_or_else(|| config_err("missing section [device]"))?;
        let transmon = d.charging_energy.is_some() || d.josephson_energy.is_some();
        let measured = d.omega1.is_some() || d.omega2.is_some();
        let spectrum = match (transmon, measured) {
            (true, true) => {
                return Err(config_err(
                    "ambiguous [device]: give either charging_energy/josephson_energy or omega1/omega2, not both",
                ))
            }
            (false, false) => {
                return Err(config_err(
                    "missing field device.charging_energy/device.josephson_energy or device.omega1/device.omega2",
                ))
            }
            (true, false) => {
                let ec = d.charging_energy.ok_or_else(|| config_err("missing field device.charging_energy"))?;
                let ej = d.josephson_energy.ok_or_else(|| config_err("missing field device.josephson_energy"))?;
                transmon_spectrum(&TransmonParams::new(ec, ej)?, 3)?
            }
            (false, true) => {
                let w1 = d.omega1.ok_or_else(|| config_err("missing field device.omega1"))?;
                let w2 = d.omega2.ok_or_else(|| config_err("missing field device.omega2"))?;
                spectrum_from_frequencies(w1, w2)?
            }
        };
        let default_levels = if self.protocol.kind == KindName::Qubit { 2 } else { 3 };
        match d.levels.unwrap_or(default_levels) {
            2 => Ok(spectrum.as_qubit()),
            3 => Ok(spectrum),
            n => Err(config_err(format!("device.levels must be 2 or 3, got {n}"))),
        }
    }

    pub fn kind(&self) -> ProtocolKind {
        self.protocol.kind.kind()
    }

    pub fn shape(&self) -> PulseShape {
        PulseShape {
            sigma_ratio: self.protocol.sigma_ratio.unwrap_or(PulseShape::default().sigma_ratio),
            normalization: match self.protocol.normalization {
                NormalizationName::FullLine => Normalization::FullLine,
                NormalizationName::Delivered => Normalization::Delivered,
            },
        }
    }

    fn target(&self, value: Option<f64>, field: &str) -> CliResult<f64> {
        value.ok_or_else(|| config_err(format!("missing field protocol.{field} for kind {:?}", self.protocol.kind)))
    }

    pub fn protocol_spec(&self) -> CliResult<ProtocolSpec> {
        let s = self.spectrum()?;
        let p = &self.protocol;
        let shape = self.shape();
        let spec = match p.kind {
            KindName::Qubit => {
                let theta = self.target(p.theta_m, "theta_m")?;
                ProtocolSpec::qubit(&s, p.coupling, p.t_m, theta, shape, p.a, p.phi)?
            }
            KindName::Sequential => {
                let phi_m = self.target(p.phi_m, "phi_m")?;
                if !(0.0..=2.0 * PI).contains(&phi_m) {
                    return Err(config_err(format!("protocol.phi_m must lie in [0, 2π], got {phi_m}")));
                }
                let (th1, th2) = qbattery::analytic::sequential_phases(phi_m);
                let delay = p.delay.unwrap_or(p.t_m / 2.0);
                ProtocolSpec::sequential_with_delay(&s, p.coupling, p.t_m, th1, th2, shape, delay)?
            }
            KindName::Simultaneous => {
                let big = self.target(p.big_theta_m, "big_theta_m")?;
                ProtocolSpec::simultaneous(&s, p.coupling, p.t_m, big, shape)?
            }
            KindName::Adiabatic => {
                let big = self.target(p.big_theta_m, "big_theta_m")?;
                ProtocolSpec::adiabatic(&s, p.coupling, p.t_m, big, shape)?
            }
        };
        Ok(spec)
    }

    pub fn sweep_template(&self) -> CliResult<SweepTemplate> {
        let p = &self.protocol;
        let mut t = SweepTemplate::new(self.kind(), self.spectrum()?, p.coupling, p.t_m, self.shape().sigma_ratio);
        t.a = p.a;
        t.phi = p.phi;
        t.delay = p.delay;
        Ok(t)
    }

    pub fn grid(&self) -> CliResult<Vec<f64>> {
        let p = &self.protocol;
        let default_max = if p.kind == KindName::Sequential { 2.0 * PI } else { PI };
        if p.grid_points < 2 {
            return Err(config_err(format!("protocol.grid_points must be >= 2, got {}", p.grid_points)));
        }
        Ok(qbattery::observables::uniform_grid(0.0, p.grid_max.unwrap_or(default_max), p.grid_points))
    }

    pub fn frame(&self) -> Frame {
        match self.integrator.frame {
            FrameName::Rotating => Frame::Rotating,
            FrameName::Lab => Frame::Lab,
        }
    }

    pub fn step(&self, spec: &ProtocolSpec) -> f64 {
        self.integrator.step.unwrap_or_else(|| match self.frame() {
            Frame::Rotating => spec.max_rotating_step() / 2.0,
            Frame::Lab => spec.max_lab_step(),
        })
    }

    pub fn cluster_model(&self) -> CliResult<ClusterModel> {
        let r = &self.readout;
        match r.model {
            ModelName::Benchmark => Ok(ClusterModel::benchmark()),
            ModelName::Noiseless => Ok(ClusterModel::noiseless()),
            ModelName::Custom => {
                let centers = r.centers.ok_or_else(|| config_err("missing field readout.centers for model custom"))?;
                let spreads = r.spreads.ok_or_else(|| config_err("missing field readout.spreads for model custom"))?;
                Ok(ClusterModel::new(centers.map(|[i, q]| IqPoint::new(i, q)), spreads)?)
            }
        }
    }
}

/// Engine chosen on the command line; `None` picks the closed form when one exists.
pub fn resolve_engine(requested: Option<Engine>, spec: &ProtocolSpec) -> Engine {
    let has_closed_form = match spec.kind {
        ProtocolKind::Sequential => spec.is_disjoint(),
        ProtocolKind::Custom => false,
        _ => true,
    };
    match requested {
        Some(e) => e,
        None if has_closed_form => Engine::Analytic,
        None => Engine::Numeric,
    }
}
