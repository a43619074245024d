//! Acceptance gate. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qbattery::analytic::{
    adiabatic_energy, adiabatic_energy_from, analytic_state, dressed_phase, sequential_energy_vs_phase,
    simultaneous_energy,
};
use qbattery::device::{
    energy_to_physical, physical_to_energy, spectrum_from_frequencies, transmon_spectrum, LevelSpectrum,
    TransmonParams,
};
use qbattery::integrator::{evolve, self_convergence};
use qbattery::observables::{
    charging_time_analytic, stored_energy, sweep_final_energy, table1, uniform_grid, Engine, SweepTemplate,
};
use qbattery::readout::{calibrate, end_to_end_sweep, Classifier, ClusterModel, ReadoutSettings};
use qbattery::{Frame, ProtocolKind, ProtocolSpec, PulseShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Gate {
    failures: usize,
    max_drift: f64,
}

impl Gate {
    fn report(&mut self, id: &str, ok: bool, detail: String) {
        println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }

    fn note(&self, text: String) {
        println!("     note: {text}");
    }
}

fn transmon() -> LevelSpectrum {
    transmon_spectrum(&TransmonParams::new(0.25, 12.5).unwrap(), 3).unwrap()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Largest pointwise population error against the closed form, and the raw drift.
fn oracle_error(spec: &ProtocolSpec, h: f64) -> (f64, f64) {
    let traj = evolve(spec, Frame::Rotating, &spec.initial, h).unwrap();
    let mut worst: f64 = 0.0;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let exact = analytic_state(*t, spec).unwrap().populations();
        for (a, b) in s.populations().iter().zip(exact) {
            worst = worst.max((a - b).abs());
        }
    }
    (worst, traj.max_norm_drift())
}

fn criterion_1(gate: &mut Gate) {
    let s = transmon();
    let t_m = 8.0;
    let cases = [
        ("qubit", ProtocolSpec::qubit(&s, 1.0, t_m, PI, PulseShape::default(), 1.0, 0.0).unwrap(), t_m / 8.0),
        (
            "sequential",
            ProtocolSpec::sequential(&s, 1.0, t_m, PI, PI, PulseShape::default()).unwrap(),
            t_m / 16.0,
        ),
        (
            "simultaneous",
            ProtocolSpec::simultaneous(&s, 1.0, t_m, PI, PulseShape::default()).unwrap(),
            t_m / 8.0,
        ),
    ];
    for (name, spec, sigma) in cases {
        let start = Instant::now();
        let (err, drift) = oracle_error(&spec, sigma / 32.0);
        let took = secs(start.elapsed());
        gate.max_drift = gate.max_drift.max(drift);
        gate.report(
            &format!("1 ({name})"),
            err <= 1e-6 && took < 1.0,
            format!("max population error {err:.3e} (tol 1e-6), {took:.3}s (< 1 s)"),
        );
    }
}

fn criterion_2(gate: &mut Gate) {
    let start = Instant::now();
    let rows = table1().unwrap();
    let took = secs(start.elapsed());
    let ordered = |v: &[f64]| v[0] < v[1] && v[1] < v[2] && v[1] < v[3] && v[3] < v[5] && v[3] < v[4] && v[5] < v[6];
    let closed: Vec<f64> = rows.iter().map(|r| r.closed_form).collect();
    let width: Vec<f64> = rows.iter().map(|r| r.erf_width).collect();
    let worst = rows.iter().map(|r| (r.erf_width - r.reference).abs()).fold(0.0, f64::max);
    gate.report(
        "2",
        ordered(&closed) && ordered(&width) && worst <= 0.05 && took < 1.0,
        format!(
            "ordering holds on both columns; max |t_c/t_m - reference| = {worst:.4} (tol 0.05), {took:.3}s"
        ),
    );
    for r in &rows {
        gate.note(format!(
            "a={:.2} phi={:.4} thr={:.2}: reference {:.2}, width-sigma/sqrt2 {:.4}, stated-sigma {:.4} (offset {:+.4})",
            r.a,
            r.phi,
            r.threshold,
            r.reference,
            r.erf_width,
            r.closed_form,
            r.closed_form - r.reference
        ));
    }
}

fn criterion_3(gate: &mut Gate) {
    let start = Instant::now();
    let s = transmon().as_qubit();
    let grid = uniform_grid(0.0, PI, 65);
    let template = |ratio: f64| SweepTemplate::new(ProtocolKind::QubitResonant, s, 1.0, 8.0, ratio);
    let expected: Vec<f64> = grid.iter().map(|t| (t / 2.0).sin().powi(2)).collect();
    let max_dev = |v: &[f64], w: &[f64]| v.iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let analytic = sweep_final_energy(&template(1.0 / 8.0), &grid, Engine::Analytic).unwrap().fractions();
    let numeric: Vec<Vec<f64>> = [8.0, 12.0, 16.0]
        .iter()
        .map(|d| sweep_final_energy(&template(1.0 / d), &grid, Engine::Numeric).unwrap().fractions())
        .collect();
    let e_analytic = max_dev(&analytic, &expected);
    let e_numeric = numeric.iter().map(|n| max_dev(n, &expected)).fold(0.0, f64::max);
    let e_sigma = max_dev(&numeric[0], &numeric[1]).max(max_dev(&numeric[0], &numeric[2]));
    let took = secs(start.elapsed());
    gate.report(
        "3",
        e_analytic <= 1e-9 && e_numeric <= 1e-6 && e_sigma <= 1e-4 && took < 5.0,
        format!(
            "analytic {e_analytic:.2e} (tol 1e-9), numeric {e_numeric:.2e} (tol 1e-6), sigma spread {e_sigma:.2e} (tol 1e-4), {took:.2}s"
        ),
    );
}

fn criterion_4(gate: &mut Gate) {
    let s = transmon();
    let grid = uniform_grid(0.0, 2.0 * PI, 65);
    let t = SweepTemplate::new(ProtocolKind::Sequential, s, 1.0, 8.0, 1.0 / 8.0);
    let analytic = sweep_final_energy(&t, &grid, Engine::Analytic).unwrap();
    let numeric = sweep_final_energy(&t, &grid, Engine::Numeric).unwrap();
    let piecewise = |x: f64| {
        if x <= PI {
            s.delta() * (x / 2.0).sin().powi(2)
        } else {
            s.delta() + s.delta_prime() * ((x - PI) / 2.0).sin().powi(2)
        }
    };
    let form = grid
        .iter()
        .zip(&analytic.energy)
        .map(|(x, e)| (e - piecewise(*x)).abs())
        .fold(0.0, f64::max);
    let num = analytic
        .energy
        .iter()
        .zip(&numeric.energy)
        .map(|(a, b)| (a - b).abs() / s.delta_max())
        .fold(0.0, f64::max);
    let eps = 1e-9;
    let jump = (sequential_energy_vs_phase(PI + eps, &s).unwrap() - sequential_energy_vs_phase(PI - eps, &s).unwrap()).abs();
    let end = (analytic.energy[64] - s.delta_max()).abs();
    gate.report(
        "4",
        form <= 1e-12 && jump <= 1e-12 && end <= 1e-12 && num <= 1e-6,
        format!(
            "piecewise form {form:.1e}, jump at pi {jump:.1e} (tol 1e-12), |E(2pi) - Dmax| {end:.1e}, numeric vs analytic {num:.1e}"
        ),
    );
}

fn criterion_5(gate: &mut Gate) {
    let s = transmon();
    let seq = ProtocolSpec::sequential(&s, 1.0, 1.0, PI, PI, PulseShape::default()).unwrap();
    let sim = ProtocolSpec::simultaneous(&s, 1.0, 1.0, PI, PulseShape::default()).unwrap();
    let t_seq = charging_time_analytic(&seq, 0.95).unwrap().time;
    let t_sim = charging_time_analytic(&sim, 0.95).unwrap().time;
    let ratio = t_sim / t_seq;
    let target = 0.633 / 0.82;
    gate.report(
        "5",
        t_sim < t_seq && (ratio - target).abs() <= 0.02,
        format!("t_c(sim) = {t_sim:.4}, t_c(seq) = {t_seq:.4}, ratio {ratio:.4} vs {target:.4} +/- 0.02"),
    );
}

/// Largest `|E_numeric − E_ad| / Δ_max` along the trajectory.
fn adiabatic_gap(ratio: f64, sigma_ratio: f64, gate: &mut Gate) -> f64 {
    let (t_m, big_theta) = (1.0, PI);
    let sigma = sigma_ratio * t_m;
    let g_n = big_theta / (sigma * PI.sqrt());
    let delta = g_n / ratio;
    let big_delta = 50.0;
    let s = spectrum_from_frequencies(big_delta, 2.0 * big_delta - 2.0 * delta).unwrap();
    let shape = PulseShape { sigma_ratio, ..PulseShape::default() };
    let spec = ProtocolSpec::adiabatic(&s, 1.0, t_m, big_theta, shape).unwrap();
    let traj = evolve(&spec, Frame::Rotating, &spec.initial, sigma / 32.0).unwrap();
    gate.max_drift = gate.max_drift.max(traj.max_norm_drift());
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, st)| (stored_energy(st, &s).unwrap() - adiabatic_energy(*t, &spec).unwrap()).abs() / s.delta_max())
        .fold(0.0, f64::max)
}

fn criterion_6(gate: &mut Gate) {
    let start = Instant::now();
    let harmonic = spectrum_from_frequencies(1.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let theta_m: f64 = rng.random_range(0.0..2.0 * PI);
        let t: f64 = rng.random_range(0.0..1.0);
        let spec = ProtocolSpec::adiabatic(&harmonic, 1.0, 1.0, theta_m, PulseShape::default()).unwrap();
        let e_ad = adiabatic_energy(t, &spec).unwrap();
        let e_sim = simultaneous_energy(dressed_phase(t, &spec), &harmonic);
        worst = worst.max((e_ad - e_sim).abs());
        let big_theta: f64 = rng.random_range(-10.0..10.0);
        worst = worst.max((adiabatic_energy_from(big_theta, 0.0, &harmonic) - simultaneous_energy(big_theta, &harmonic)).abs());
    }
    gate.report("6a", worst <= 1e-12, format!("max |E_ad(delta=0) - E_sim| over 1000 points = {worst:.1e} (tol 1e-12)"));

    let gaps: Vec<f64> = [10.0, 3.0, 1.0].iter().map(|r| adiabatic_gap(*r, 0.25, gate)).collect();
    let took = secs(start.elapsed());
    gate.report(
        "6b",
        gaps[0] <= 5e-2 && gaps[0] < gaps[1] && gaps[1] < gaps[2] && took < 10.0,
        format!(
            "sigma = t_m/4: max |dE|/Dmax at gN/delta = 10, 3, 1: {:.4}, {:.4}, {:.4} (tol 5e-2 at 10, increasing), {took:.2}s",
            gaps[0], gaps[1], gaps[2]
        ),
    );
    let narrow: Vec<f64> = [10.0, 3.0, 1.0].iter().map(|r| adiabatic_gap(*r, 0.125, gate)).collect();
    gate.note(format!(
        "sigma = t_m/8 for comparison: {:.4}, {:.4}, {:.4}",
        narrow[0], narrow[1], narrow[2]
    ));
}

fn criterion_7(gate: &mut Gate) {
    let d = gate.max_drift;
    gate.report("7", d <= 1e-9, format!("max raw norm drift over criteria 1-6 integrations {d:.2e} (tol 1e-9)"));
}

fn criterion_8(gate: &mut Gate) {
    let start = Instant::now();
    let s = spectrum_from_frequencies(1.0, 2.0).unwrap().as_qubit();
    let spec = ProtocolSpec::qubit(&s, 0.02, 600.0, PI, PulseShape::default(), 1.0, 0.0).unwrap();
    let h = spec.max_lab_step();
    let lab = evolve(&spec, Frame::Lab, &spec.initial, h).unwrap();
    let rwa = evolve(&spec, Frame::Rotating, &spec.initial, spec.max_rotating_step() / 2.0).unwrap();
    let (pl, pr) = (lab.final_state().populations(), rwa.final_state().populations());
    let diff = pl.iter().zip(pr).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let took = secs(start.elapsed());
    gate.report(
        "8",
        diff < 1e-2 && took < 30.0,
        format!("g/Delta = 0.02: max |P_lab - P_rwa| = {diff:.2e} (tol 1e-2), lab drift {:.1e}, {took:.2}s", lab.max_norm_drift()),
    );
    let conv = self_convergence(&spec, Frame::Lab, &spec.initial, h).unwrap();
    gate.note(format!("lab frame self-convergence, 20 vs 40 points per period: {conv:.2e}"));
}

fn criterion_9(gate: &mut Gate) {
    let s = transmon();
    let template = SweepTemplate::new(ProtocolKind::Simultaneous, s, 1.0, 8.0, 1.0 / 8.0);
    let grid = uniform_grid(0.0, PI, 65);
    let exact = sweep_final_energy(&template, &grid, Engine::Analytic).unwrap();

    let clean = ClusterModel::noiseless();
    let settings = ReadoutSettings {
        shots: 100_000,
        seed: 2024,
        model: clean,
        classifier: calibrate(&clean, 1024, 1).unwrap(),
        engine: Engine::Numeric,
        keep_shots: false,
    };
    let (recovered, _) = end_to_end_sweep(&template, &grid, &settings).unwrap();
    let dev = recovered
        .energy
        .iter()
        .zip(&exact.energy)
        .map(|(a, b)| (a - b).abs() / s.delta_max())
        .fold(0.0, f64::max);

    let noisy = ClusterModel::benchmark();
    let biased = ReadoutSettings {
        shots: 1024,
        model: noisy,
        classifier: Classifier::from_model(&noisy),
        ..settings
    };
    let (first, _) = end_to_end_sweep(&template, &grid, &biased).unwrap();
    let (second, _) = end_to_end_sweep(&template, &grid, &biased).unwrap();
    let peak = first.fractions().into_iter().fold(0.0, f64::max);
    gate.report(
        "9",
        dev <= 1e-2 && (0.90..=0.94).contains(&peak) && first == second,
        format!(
            "noiseless N=1e5 max deviation {dev:.2e} Dmax (tol 1e-2); benchmark peak {peak:.4} Dmax (in [0.90, 0.94]); deterministic: {}",
            first == second
        ),
    );
}

fn criterion_10(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    let mut x = 1e-3;
    while x < 1e4 {
        let back = physical_to_energy(energy_to_physical(x));
        worst = worst.max((back - x).abs() / x);
        x *= 1.37;
    }
    gate.report("10", worst <= 1e-12, format!("rad/ns -> ueV -> rad/ns max relative error {worst:.1e} (tol 1e-12)"));
    gate.note("hardware data points, device-scale t_c and relaxation times are not reproducible here".into());
}

fn main() {
    let mut gate = Gate { failures: 0, max_drift: 0.0 };
    criterion_1(&mut gate);
    criterion_2(&mut gate);
    criterion_3(&mut gate);
    criterion_4(&mut gate);
    criterion_5(&mut gate);
    criterion_6(&mut gate);
    criterion_7(&mut gate);
    criterion_8(&mut gate);
    criterion_9(&mut gate);
    criterion_10(&mut gate);
    if gate.failures > 0 {
        println!("{} criteria failed", gate.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
