use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const TRANSMON: &str = "[device]\ncharging_energy = 0.25\njosephson_energy = 12.5\n";

fn qbsim(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qbsim"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report_value(o: &Output, key: &str) -> f64 {
    let text = stdout(o);
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"));
    line.split(" = ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|f| f.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn simultaneous(extra: &str) -> String {
    format!("{TRANSMON}[protocol]\nkind = \"simultaneous\"\nbig_theta_m = {PI}\n{extra}")
}

#[test]
fn spectrum_reports_transmon_levels() {
    let dir = TempDir::new().unwrap();
    let o = qbsim(dir.path(), TRANSMON, &["spectrum"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(report_value(&o, "Δ_max"), 9.25);
    assert_eq!(report_value(&o, "Δ"), 4.75);
    assert_eq!(report_value(&o, "δ"), 0.125);
    assert!(stdout(&o).contains("μeV"));
}

#[test]
fn config_errors_exit_with_usage_status() {
    let dir = TempDir::new().unwrap();
    let missing = qbsim(dir.path(), "[protocol]\nkind = \"qubit\"\n", &["spectrum"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("[device]"));

    let both = format!("{TRANSMON}omega1 = 4.75\nomega2 = 9.25\n");
    let ambiguous = qbsim(dir.path(), &both, &["spectrum"]);
    assert_eq!(ambiguous.status.code(), Some(2));
    assert!(stderr(&ambiguous).contains("ambiguous"));

    let half = qbsim(dir.path(), "[device]\nomega1 = 4.75\n", &["spectrum"]);
    assert_eq!(half.status.code(), Some(2));
    assert!(stderr(&half).contains("device.omega2"));

    let typo = qbsim(dir.path(), &format!("{TRANSMON}[protocol]\nt_n = 3.0\n"), &["spectrum"]);
    assert_eq!(typo.status.code(), Some(2));
    assert!(stderr(&typo).contains("t_n"));
}

#[test]
fn simultaneous_curve_reaches_full_scale_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let o = qbsim(dir.path(), &simultaneous(""), &["simulate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("out/curve.csv"));
    assert_eq!(header, ["t_over_tm", "E", "E_over_full_scale", "P0", "P1", "P2", "norm_drift"]);
    let last = rows.last().unwrap();
    assert_eq!(last[0], 1.0);
    assert!(last[2] >= 0.999, "{}", last[2]);

    assert_eq!(report_value(&o, "samples"), rows.len() as f64);
    assert_eq!(report_value(&o, "final_E_over_full_scale"), last[2]);
    let max = rows.iter().map(|r| r[2]).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(report_value(&o, "max_E_over_full_scale"), max);
    let drift = rows.iter().map(|r| r[6]).fold(0.0, f64::max);
    assert_eq!(report_value(&o, "max_norm_drift"), drift);
    for r in &rows {
        assert!((r[3] + r[4] + r[5] - 1.0).abs() < 1e-12);
        assert!((r[1] - r[2]).abs() == 0.0, "fraction units put E in full-scale units");
    }
}

#[test]
fn numeric_engine_agrees_with_closed_form() {
    let dir = TempDir::new().unwrap();
    let a = qbsim(dir.path(), &simultaneous(""), &["simulate", "--engine", "analytic"]);
    let (_, exact) = read_csv(&dir.path().join("out/curve.csv"));
    let n = qbsim(dir.path(), &simultaneous(""), &["simulate", "--engine", "numeric"]);
    assert!(a.status.success() && n.status.success(), "{}", stderr(&n));
    assert!(stdout(&n).contains("engine = numeric"));
    let (_, numeric) = read_csv(&dir.path().join("out/curve.csv"));
    let diff = (exact.last().unwrap()[2] - numeric.last().unwrap()[2]).abs();
    assert!(diff < 1e-6, "{diff}");
}

#[test]
fn units_flag_rescales_energy_column() {
    let dir = TempDir::new().unwrap();
    let o = qbsim(dir.path(), &simultaneous(""), &["simulate", "--units", "rad-per-ns"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("out/curve.csv"));
    let last = rows.last().unwrap();
    assert!((last[1] - 9.25 * last[2]).abs() < 1e-12);
    let o = qbsim(dir.path(), &simultaneous("[output]\nunits = \"micro_ev\"\n"), &["simulate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("out/curve.csv"));
    let last = rows.last().unwrap();
    assert!((last[1] - 9.25 * 0.658_211_956_9 * last[2]).abs() < 1e-9);
}

#[test]
fn sequential_curve_pauses_on_first_level() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{TRANSMON}[protocol]\nkind = \"sequential\"\nphi_m = {}\n", 2.0 * PI);
    let o = qbsim(dir.path(), &cfg, &["simulate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("out/curve.csv"));
    let plateau = 4.75 / 9.25;
    let mid = rows.iter().find(|r| r[0] >= 0.5).unwrap();
    assert!((mid[2] - plateau).abs() < 1e-3, "{}", mid[2]);
    assert!(rows.last().unwrap()[2] > 0.999);
}

#[test]
fn adiabatic_pair_shows_less_stable_charging() {
    let dir = TempDir::new().unwrap();
    let base = format!("{TRANSMON}[protocol]\nt_m = 30.0\nbig_theta_m = {PI}\n");
    let sim = qbsim(dir.path(), &base.replace("[protocol]\n", "[protocol]\nkind = \"simultaneous\"\n"), &["simulate"]);
    assert!(sim.status.success());
    let sim_final = report_value(&sim, "final_E_over_full_scale");
    assert_eq!(sim_final, report_value(&sim, "max_E_over_full_scale"));
    let ad = qbsim(dir.path(), &base.replace("[protocol]\n", "[protocol]\nkind = \"adiabatic\"\n"), &["simulate"]);
    assert!(ad.status.success(), "{}", stderr(&ad));
    let ad_final = report_value(&ad, "final_E_over_full_scale");
    let ad_max = report_value(&ad, "max_E_over_full_scale");
    assert!(ad_max - ad_final > 0.1, "{ad_max} {ad_final}");
}

#[test]
fn charging_time_in_nanoseconds() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{TRANSMON}[protocol]\nkind = \"simultaneous\"\nt_m = 30.0\nbig_theta_m = {PI}\n");
    let o = qbsim(dir.path(), &cfg, &["charging-time"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ratio = report_value(&o, "t_c_over_t_m");
    let t_c = report_value(&o, "t_c");
    assert!((t_c - 30.0 * ratio).abs() < 1e-12);
    assert!(ratio > 0.5 && ratio < 0.75, "{ratio}");
}

#[test]
fn unreachable_threshold_has_its_own_exit_status() {
    let dir = TempDir::new().unwrap();
    let o = qbsim(dir.path(), &simultaneous("threshold = 1.01\n"), &["charging-time"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("never reached"));

    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let cfg = dir.path().join("run.toml");
    let io = Command::new(env!("CARGO_BIN_EXE_qbsim"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("sub"))
        .arg("table1")
        .output()
        .unwrap();
    assert_eq!(io.status.code(), Some(3), "{}", stderr(&io));
}

#[test]
fn qubit_sweep_follows_rabi_curve() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{TRANSMON}[protocol]\nkind = \"qubit\"\ngrid_points = 17\n");
    let o = qbsim(dir.path(), &cfg, &["sweep"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("out/sweep.csv"));
    assert_eq!(header, ["eta", "E", "E_over_full_scale", "stderr"]);
    assert_eq!(rows.len(), 17);
    for r in &rows {
        assert!((r[2] - (r[0] / 2.0).sin().powi(2)).abs() < 1e-12, "{r:?}");
        assert_eq!(r[3], 0.0);
    }
    assert_eq!(rows.last().unwrap()[0], PI);
}

#[test]
fn simultaneous_sweep_ends_at_full_scale() {
    let dir = TempDir::new().unwrap();
    let o = qbsim(dir.path(), &simultaneous("grid_points = 9\n"), &["sweep", "--engine", "numeric"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_csv(&dir.path().join("out/sweep.csv"));
    assert!((rows.last().unwrap()[2] - 1.0).abs() < 1e-6);
}

#[test]
fn noisy_sweep_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = simultaneous("grid_points = 9\n[readout]\nenabled = true\nshots = 1024\nseed = 11\n");
    let read = |args: &[&str]| {
        let o = qbsim(dir.path(), &cfg, args);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(dir.path().join("out/sweep_readout.csv")).unwrap()
    };
    let first = read(&["sweep"]);
    assert_eq!(first, read(&["sweep"]));
    assert_ne!(first, read(&["sweep", "--seed", "12"]));
    let (_, rows) = read_csv(&dir.path().join("out/sweep_readout.csv"));
    assert!(rows.iter().skip(1).all(|r| r[3] > 0.0));
}

#[test]
fn readout_dumps_are_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = simultaneous("grid_points = 5\n[readout]\nshots = 64\nseed = 3\n");
    let files = ["readout_shots.csv", "readout_summary.csv", "sweep_readout.csv"];
    let run = || {
        let o = qbsim(dir.path(), &cfg, &["readout"]);
        assert!(o.status.success(), "{}", stderr(&o));
        files.map(|f| std::fs::read(dir.path().join("out").join(f)).unwrap())
    };
    let a = run();
    assert_eq!(a, run());
    let (header, rows) = read_csv(&dir.path().join("out/readout_shots.csv"));
    assert_eq!(header, ["eta", "shot", "true_label", "I", "Q", "measured"]);
    assert_eq!(rows.len(), 5 * 64);
}

#[test]
fn noiseless_readout_lands_on_centers() {
    let dir = TempDir::new().unwrap();
    let cfg = simultaneous(
        "grid_points = 5\n[readout]\nshots = 32\nmodel = \"custom\"\ncenters = [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.5]]\nspreads = [0.0, 0.0, 0.0]\n",
    );
    let o = qbsim(dir.path(), &cfg, &["readout"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let centers = [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.5]];
    let (_, rows) = read_csv(&dir.path().join("out/readout_shots.csv"));
    for r in &rows {
        let label = r[2] as usize;
        assert_eq!([r[3], r[4]], centers[label]);
        assert_eq!(r[5], r[2], "noiseless shots are never misclassified");
    }
    let (_, summary) = read_csv(&dir.path().join("out/readout_summary.csv"));
    for s in &summary {
        assert_eq!(&s[4..7], &s[7..10]);
    }
}

#[test]
fn table1_has_seven_rows() {
    let dir = TempDir::new().unwrap();
    for args in [&["table1"][..], &["charging-time", "--table1"][..]] {
        let o = qbsim(dir.path(), "", args);
        assert!(o.status.success(), "{}", stderr(&o));
        let (header, rows) = read_csv(&dir.path().join("out/table1.csv"));
        assert_eq!(header, ["a", "phi", "threshold", "reference", "closed_form", "erf_width"]);
        assert_eq!(rows.len(), 7);
        for r in &rows {
            assert!(r[4] > 0.0 && r[4] < 1.0);
            assert!((r[5] - r[3]).abs() < 0.01, "{r:?}");
        }
    }
}

#[test]
fn plots_are_written_on_request() {
    let dir = TempDir::new().unwrap();
    let o = qbsim(dir.path(), &simultaneous("grid_points = 5\n"), &["simulate", "--plots"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(dir.path().join("out/curve.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    let o = qbsim(dir.path(), &simultaneous("grid_points = 5\n[output]\nplots = true\n"), &["sweep"]);
    assert!(o.status.success());
    assert!(dir.path().join("out/sweep.svg").exists());
}
