//! Simulated dispersive readout: projective shots, IQ-plane clouds, a
//! nearest-centroid classifier and energy estimation from label counts.
//!
//! Every random draw comes from a ChaCha8 stream keyed by `(seed, channel)`
//! with the shot index as stream number, so results do not depend on the
//! order or thread in which shots are evaluated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::LevelSpectrum;
use crate::error::{Error, Result};
use crate::observables::{check_grid, Engine, SweepResult, SweepTemplate};
use crate::state::StateVector;

/// Tolerance on `Σ p − 1` accepted by [`sample_shots`].
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Channel reserved for calibration shots.
pub const CALIBRATION_CHANNEL: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqPoint {
    pub i: f64,
    pub q: f64,
}

impl IqPoint {
    pub fn new(i: f64, q: f64) -> Self {
        Self { i, q }
    }

    fn distance_sqr(&self, other: &IqPoint) -> f64 {
        (self.i - other.i).powi(2) + (self.q - other.q).powi(2)
    }
}

/// Isotropic Gaussian cloud per label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterModel {
    pub centers: [IqPoint; 3],
    pub spreads: [f64; 3],
}

impl ClusterModel {
    pub fn new(centers: [IqPoint; 3], spreads: [f64; 3]) -> Result<Self> {
        let m = Self { centers, spreads };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, c) in self.centers.iter().enumerate() {
            if !(c.i.is_finite() && c.q.is_finite()) {
                return Err(Error::param("centers", format!("center {k} is not finite")));
            }
        }
        for a in 0..3 {
            for b in a + 1..3 {
                if self.centers[a] == self.centers[b] {
                    return Err(Error::param("centers", format!("centers {a} and {b} coincide")));
                }
            }
        }
        if let Some(s) = self.spreads.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::param("spreads", format!("must be finite and >= 0, got {s}")));
        }
        Ok(())
    }

    /// Unit equilateral triangle of centres.
    pub fn triangle(spreads: [f64; 3]) -> Result<Self> {
        let h = 3f64.sqrt() / 2.0;
        Self::new([IqPoint::new(-0.5, 0.0), IqPoint::new(0.5, 0.0), IqPoint::new(0.0, h)], spreads)
    }

    /// Noise-free clouds: every shot lands on its centre.
    pub fn noiseless() -> Self {
        Self::triangle([0.0; 3]).expect("fixed geometry is valid")
    }

    /// Spreads giving per-label nearest-centroid accuracies of about
    /// 95.5%, 95.7% and 90.0% on the unit triangle.
    pub fn benchmark() -> Self {
        Self::triangle([0.254_623_174_261, 0.252_037_848_080, 0.317_059_829_359]).expect("fixed geometry is valid")
    }
}

/// Nearest-centroid decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub centroids: [IqPoint; 3],
}

impl Classifier {
    /// Nearest centroid; ties go to the smaller label.
    pub fn classify(&self, p: &IqPoint) -> usize {
        let mut best = 0;
        let mut best_d = p.distance_sqr(&self.centroids[0]);
        for (k, c) in self.centroids.iter().enumerate().skip(1) {
            let d = p.distance_sqr(c);
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }

    pub fn from_model(model: &ClusterModel) -> Self {
        Self { centroids: model.centers }
    }
}

/// Label counts of `shots` projective measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shots: u64,
    pub counts: [u64; 3],
    pub seed: u64,
}

impl ShotRecord {
    pub fn frequencies(&self) -> [f64; 3] {
        self.counts.map(|n| n as f64 / self.shots as f64)
    }
}

/// `|⟨i|ψ⟩|²`.
pub fn measure_populations(state: &StateVector) -> [f64; 3] {
    state.populations()
}

/// Generator for one shot of one channel.
pub fn shot_rng(seed: u64, channel: u64, shot: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&channel.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(shot);
    rng
}

fn check_probabilities(probs: &[f64; 3]) -> Result<()> {
    if probs.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(Error::Distribution(format!("negative or non-finite entry in {probs:?}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(Error::Distribution(format!("probabilities sum to {total}")));
    }
    Ok(())
}

fn draw_label(probs: &[f64; 3], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    if u < probs[0] {
        0
    } else if u < probs[0] + probs[1] || probs[2] == 0.0 {
        1
    } else {
        2
    }
}

fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::param("shots", "need at least one shot"));
    }
    Ok(())
}

/// Multinomial draw of `shots` labels on channel 0.
pub fn sample_shots(probs: [f64; 3], shots: u64, seed: u64) -> Result<ShotRecord> {
    sample_shots_on(probs, shots, seed, 0)
}

pub fn sample_shots_on(probs: [f64; 3], shots: u64, seed: u64, channel: u64) -> Result<ShotRecord> {
    check_probabilities(&probs)?;
    check_shots(shots)?;
    let mut counts = [0u64; 3];
    for shot in 0..shots {
        counts[draw_label(&probs, &mut shot_rng(seed, channel, shot))] += 1;
    }
    Ok(ShotRecord { shots, counts, seed })
}

/// `center_ℓ` plus isotropic Gaussian noise of spread `s_ℓ`.
pub fn synthesize_iq(label: usize, model: &ClusterModel, rng: &mut impl Rng) -> Result<IqPoint> {
    if label > 2 {
        return Err(Error::param("label", format!("must be 0, 1 or 2, got {label}")));
    }
    let c = model.centers[label];
    let s = model.spreads[label];
    let di: f64 = rng.sample(StandardNormal);
    let dq: f64 = rng.sample(StandardNormal);
    Ok(IqPoint::new(c.i + s * di, c.q + s * dq))
}

/// Per-label means of the training points.
pub fn train_classifier(points: &[(usize, IqPoint)]) -> Result<Classifier> {
    let mut sums = [(0.0, 0.0); 3];
    let mut counts = [0usize; 3];
    for (label, p) in points {
        if *label > 2 {
            return Err(Error::Training(format!("label {label} is out of range")));
        }
        sums[*label].0 += p.i;
        sums[*label].1 += p.q;
        counts[*label] += 1;
    }
    if let Some(missing) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Training(format!("no training points for label {missing}")));
    }
    let centroids = [0, 1, 2].map(|k| IqPoint::new(sums[k].0 / counts[k] as f64, sums[k].1 / counts[k] as f64));
    Ok(Classifier { centroids })
}

/// Trains on `per_label` synthetic shots of each basis state.
pub fn calibrate(model: &ClusterModel, per_label: u64, seed: u64) -> Result<Classifier> {
    model.validate()?;
    let mut points = Vec::with_capacity(3 * per_label as usize);
    for label in 0..3 {
        for k in 0..per_label {
            let mut rng = shot_rng(seed, CALIBRATION_CHANNEL, label as u64 * per_label + k);
            points.push((label, synthesize_iq(label, model, &mut rng)?));
        }
    }
    train_classifier(&points)
}

/// Fraction of calibration-style shots of each label classified correctly.
pub fn label_accuracy(model: &ClusterModel, classifier: &Classifier, per_label: u64, seed: u64) -> Result<[f64; 3]> {
    let mut acc = [0.0; 3];
    for (label, a) in acc.iter_mut().enumerate() {
        let mut hits = 0u64;
        for k in 0..per_label {
            let mut rng = shot_rng(seed, label as u64, k);
            if classifier.classify(&synthesize_iq(label, model, &mut rng)?) == label {
                hits += 1;
            }
        }
        *a = hits as f64 / per_label as f64;
    }
    Ok(acc)
}

/// `Δ n1/N + Δ_max n2/N`.
pub fn estimate_energy(record: &ShotRecord, spectrum: &LevelSpectrum) -> f64 {
    let f = record.frequencies();
    spectrum.delta() * f[1] + spectrum.delta_max() * f[2]
}

/// Multinomial standard error of [`estimate_energy`].
pub fn energy_stderr(record: &ShotRecord, spectrum: &LevelSpectrum) -> f64 {
    let f = record.frequencies();
    let e = [0.0, spectrum.delta(), spectrum.delta_max()];
    let mean: f64 = (0..3).map(|k| f[k] * e[k]).sum();
    let second: f64 = (0..3).map(|k| f[k] * e[k] * e[k]).sum();
    ((second - mean * mean).max(0.0) / record.shots as f64).sqrt()
}

/// One shot as seen by the readout chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub true_label: usize,
    pub point: IqPoint,
    pub measured: usize,
}

/// Outcome of the readout chain at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutPoint {
    pub eta: f64,
    pub populations: [f64; 3],
    pub true_counts: ShotRecord,
    pub measured: ShotRecord,
    /// Individual shots, kept only when requested.
    pub shots: Vec<Shot>,
}

/// Readout chain settings for [`end_to_end_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutSettings {
    pub shots: u64,
    pub seed: u64,
    pub model: ClusterModel,
    pub classifier: Classifier,
    pub engine: Engine,
    pub keep_shots: bool,
}

/// Runs `shots` measurements of `state` on `channel`.
pub fn read_out(state: &StateVector, eta: f64, channel: u64, settings: &ReadoutSettings) -> Result<ReadoutPoint> {
    check_shots(settings.shots)?;
    let populations = measure_populations(state);
    let sum: f64 = populations.iter().sum();
    let probs = populations.map(|p| p / sum);
    check_probabilities(&probs)?;
    let mut true_counts = [0u64; 3];
    let mut measured = [0u64; 3];
    let mut shots = Vec::new();
    for shot in 0..settings.shots {
        let mut rng = shot_rng(settings.seed, channel, shot);
        let true_label = draw_label(&probs, &mut rng);
        let point = synthesize_iq(true_label, &settings.model, &mut rng)?;
        let label = settings.classifier.classify(&point);
        true_counts[true_label] += 1;
        measured[label] += 1;
        if settings.keep_shots {
            shots.push(Shot { true_label, point, measured: label });
        }
    }
    let record = |counts| ShotRecord { shots: settings.shots, counts, seed: settings.seed };
    Ok(ReadoutPoint { eta, populations, true_counts: record(true_counts), measured: record(measured), shots })
}

/// evolve → populations → shots → IQ points → classification → energy, per grid point.
pub fn end_to_end_sweep(
    template: &SweepTemplate,
    eta: &[f64],
    settings: &ReadoutSettings,
) -> Result<(SweepResult, Vec<ReadoutPoint>)> {
    check_grid(eta)?;
    settings.model.validate()?;
    let variable = template.variable()?;
    let points = eta
        .par_iter()
        .enumerate()
        .map(|(k, &x)| {
            let state = template.final_state(x, settings.engine)?;
            read_out(&state, x, k as u64, settings)
        })
        .collect::<Result<Vec<_>>>()?;
    let spectrum = &template.spectrum;
    let result = SweepResult {
        variable,
        eta: eta.to_vec(),
        energy: points.iter().map(|p| estimate_energy(&p.measured, spectrum)).collect(),
        stderr: points.iter().map(|p| energy_stderr(&p.measured, spectrum)).collect(),
        full_scale: template.full_scale(),
    };
    Ok((result, points))
}
