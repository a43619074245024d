//! Transmon level spectrum and unit conversion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in μeV·ns (CODATA 2018).
pub const HBAR_UEV_NS: f64 = 0.658_211_956_9;

/// Smallest accepted `E_J / E_C`.
pub const MIN_TRANSMON_RATIO: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    /// E_C in rad/ns.
    pub charging_energy: f64,
    /// E_J in rad/ns.
    pub josephson_energy: f64,
}

impl TransmonParams {
    pub fn new(charging_energy: f64, josephson_energy: f64) -> Result<Self> {
        if !(charging_energy > 0.0 && charging_energy.is_finite()) {
            return Err(Error::param("E_C", format!("must be > 0, got {charging_energy}")));
        }
        if !(josephson_energy > 0.0 && josephson_energy.is_finite()) {
            return Err(Error::param("E_J", format!("must be > 0, got {josephson_energy}")));
        }
        let ratio = josephson_energy / charging_energy;
        if ratio < MIN_TRANSMON_RATIO {
            return Err(Error::TransmonRegime { ratio, min: MIN_TRANSMON_RATIO });
        }
        Ok(Self { charging_energy, josephson_energy })
    }

    /// Plasma frequency `√(8 E_C E_J)`.
    pub fn plasma_frequency(&self) -> f64 {
        (8.0 * self.charging_energy * self.josephson_energy).sqrt()
    }
}

/// Level energies `ω0 = 0 ≤ ω1 ≤ ω2` and the derived spacings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSpectrum {
    omega: [f64; 3],
    levels: usize,
    half_anharmonicity: f64,
}

impl LevelSpectrum {
    pub fn omega(&self) -> [f64; 3] {
        self.omega
    }

    /// Number of levels the battery uses (2 or 3).
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Δ = ω1 − ω0.
    pub fn delta(&self) -> f64 {
        self.omega[1] - self.omega[0]
    }

    /// Δ′ = ω2 − ω1.
    pub fn delta_prime(&self) -> f64 {
        self.omega[2] - self.omega[1]
    }

    /// Δ_max = Δ + Δ′.
    pub fn delta_max(&self) -> f64 {
        self.delta() + self.delta_prime()
    }

    /// δ = (Δ − Δ′)/2.
    pub fn half_anharmonicity(&self) -> f64 {
        self.half_anharmonicity
    }

    /// Full-scale stored energy: Δ for a qubit, Δ_max for a qutrit.
    pub fn full_scale(&self) -> f64 {
        if self.levels == 2 {
            self.delta()
        } else {
            self.delta_max()
        }
    }

    /// Same frequencies restricted to the lowest two levels.
    pub fn as_qubit(&self) -> Self {
        Self { levels: 2, ..*self }
    }
}

/// First-order Duffing spectrum `ω_n = (ω_P − E_C) n − E_C n(n−1)/2`.
pub fn transmon_spectrum(params: &TransmonParams, n_levels: usize) -> Result<LevelSpectrum> {
    if !(2..=3).contains(&n_levels) {
        return Err(Error::param("n_levels", format!("must be 2 or 3, got {n_levels}")));
    }
    let params = TransmonParams::new(params.charging_energy, params.josephson_energy)?;
    let ec = params.charging_energy;
    let wp = params.plasma_frequency();
    let level = |n: f64| (wp - ec) * n - 0.5 * ec * n * (n - 1.0);
    Ok(LevelSpectrum {
        omega: [0.0, level(1.0), level(2.0)],
        levels: n_levels,
        half_anharmonicity: ec / 2.0,
    })
}

/// Spectrum from measured transition frequencies, no transmon guard.
pub fn spectrum_from_frequencies(omega1: f64, omega2: f64) -> Result<LevelSpectrum> {
    if !(omega1 > 0.0 && omega2 > omega1 && omega2.is_finite()) {
        return Err(Error::LevelOrdering { omega1, omega2 });
    }
    let delta = omega1;
    let delta_prime = omega2 - omega1;
    Ok(LevelSpectrum {
        omega: [0.0, omega1, omega2],
        levels: 3,
        half_anharmonicity: (delta - delta_prime) / 2.0,
    })
}

/// Two-level spectrum with spacing Δ. The second excited level is placed
/// at 2Δ and never driven.
pub fn qubit_spectrum(delta: f64) -> Result<LevelSpectrum> {
    Ok(spectrum_from_frequencies(delta, 2.0 * delta)?.as_qubit())
}

/// Angular frequency (rad/ns) to energy in μeV.
pub fn energy_to_physical(value: f64) -> f64 {
    value * HBAR_UEV_NS
}

/// Energy in μeV to angular frequency (rad/ns).
pub fn physical_to_energy(micro_ev: f64) -> f64 {
    micro_ev / HBAR_UEV_NS
}
