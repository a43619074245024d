use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance on `|‖ψ‖ − 1|` accepted by [`StateVector::new`].
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    Rotating,
}

/// Complex amplitudes of a qubit or qutrit, indexed by level (`c0, c1, c2`).
///
/// Qubit states are stored with `c2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    amps: [C64; 3],
    frame: Frame,
}

impl StateVector {
    pub fn new(amps: [C64; 3], frame: Frame) -> Result<Self> {
        let s = Self { amps, frame };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Normalization { norm });
        }
        Ok(s)
    }

    /// No normalization check; used by the integrator between steps.
    pub(crate) fn from_raw(amps: [C64; 3], frame: Frame) -> Self {
        Self { amps, frame }
    }

    /// Basis state `|level⟩`.
    pub fn basis(level: usize, frame: Frame) -> Self {
        let mut amps = [C64::new(0.0, 0.0); 3];
        amps[level] = C64::new(1.0, 0.0);
        Self { amps, frame }
    }

    pub fn ground() -> Self {
        Self::basis(0, Frame::Rotating)
    }

    /// `√a |0⟩ + √(1−a) e^{iφ} |1⟩`.
    pub fn qubit(a: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::param("a", format!("must lie in [0, 1], got {a}")));
        }
        Ok(Self {
            amps: [
                C64::new(a.sqrt(), 0.0),
                C64::from_polar((1.0 - a).sqrt(), phi),
                C64::new(0.0, 0.0),
            ],
            frame: Frame::Rotating,
        })
    }

    /// Build from the spinor ordering `(c2, c1, c0)`.
    pub fn from_spinor(spinor: [C64; 3], frame: Frame) -> Result<Self> {
        Self::new([spinor[2], spinor[1], spinor[0]], frame)
    }

    pub fn amplitudes(&self) -> [C64; 3] {
        self.amps
    }

    pub fn amplitude(&self, level: usize) -> C64 {
        self.amps[level]
    }

    /// Amplitudes in the spinor ordering `(c2, c1, c0)`.
    pub fn spinor(&self) -> [C64; 3] {
        [self.amps[2], self.amps[1], self.amps[0]]
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn with_frame(self, frame: Frame) -> Self {
        Self { frame, ..self }
    }

    pub fn populations(&self) -> [f64; 3] {
        self.amps.map(|c| c.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.populations().iter().sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            amps: self.amps.map(|c| c / n),
            frame: self.frame,
        }
    }

    /// Largest entrywise modulus of the difference.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Lab-frame state from a rotating-frame one: `ψ = e^{-iH_QB t} ψ'`.
    pub fn to_lab(&self, omega: [f64; 3], t: f64) -> Self {
        let mut amps = self.amps;
        for (c, w) in amps.iter_mut().zip(omega) {
            *c *= C64::from_polar(1.0, -w * t);
        }
        Self { amps, frame: Frame::Lab }
    }

    /// Rotating-frame state from a lab-frame one: `ψ' = e^{iH_QB t} ψ`.
    pub fn to_rotating(&self, omega: [f64; 3], t: f64) -> Self {
        let mut amps = self.amps;
        for (c, w) in amps.iter_mut().zip(omega) {
            *c *= C64::from_polar(1.0, w * t);
        }
        Self { amps, frame: Frame::Rotating }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_initial_state() {
        let s = StateVector::qubit(0.25, 0.3).unwrap();
        let p = s.populations();
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15 && p[2] == 0.0);
        assert!((s.amplitude(1).arg() - 0.3).abs() < 1e-15);
        assert!(StateVector::qubit(1.2, 0.0).is_err());
    }

    #[test]
    fn rejects_unnormalized() {
        let half = C64::new(0.5, 0.0);
        assert!(matches!(
            StateVector::new([half, half, half], Frame::Rotating),
            Err(Error::Normalization { .. })
        ));
    }

    #[test]
    fn spinor_order_is_reversed() {
        let s = StateVector::basis(2, Frame::Rotating);
        assert_eq!(s.spinor()[0], C64::new(1.0, 0.0));
        let back = StateVector::from_spinor(s.spinor(), Frame::Rotating).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn frame_round_trip() {
        let s = StateVector::qubit(0.3, 1.0).unwrap();
        let omega = [0.0, 4.75, 9.25];
        let back = s.to_lab(omega, 3.2).to_rotating(omega, 3.2);
        assert!(back.distance(&s) < 1e-14);
        assert_eq!(back.populations().map(|p| (p * 1e12).round()), s.populations().map(|p| (p * 1e12).round()));
    }
}
