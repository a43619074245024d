use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qbattery::device::energy_to_physical;
use qbattery::observables::{EnergyCurve, SweepResult, Table1Row};
use qbattery::readout::ReadoutPoint;

use crate::config::Units;
use crate::error::{CliError, CliResult};

pub const CURVE_HEADER: [&str; 7] = ["t_over_tm", "E", "E_over_full_scale", "P0", "P1", "P2", "norm_drift"];
pub const SWEEP_HEADER: [&str; 4] = ["eta", "E", "E_over_full_scale", "stderr"];

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Converts an energy in rad/ns into the requested unit.
pub fn energy_in(units: Units, e: f64, full_scale: f64) -> f64 {
    match units {
        Units::Fraction => e / full_scale,
        Units::RadPerNs => e,
        Units::MicroEv => energy_to_physical(e),
    }
}

pub fn unit_label(units: Units) -> &'static str {
    match units {
        Units::Fraction => "full scale",
        Units::RadPerNs => "rad/ns",
        Units::MicroEv => "μeV",
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

struct Csv {
    path: PathBuf,
    writer: csv::Writer<std::fs::File>,
}

impl Csv {
    fn create(path: &Path) -> CliResult<Self> {
        let writer = csv::Writer::from_path(path).map_err(|source| CliError::Csv { path: path.into(), source })?;
        Ok(Self { path: path.into(), writer })
    }

    fn row<I, T>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|source| CliError::Csv { path: self.path.clone(), source })
    }

    fn finish(mut self) -> CliResult<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

pub fn write_curve(path: &Path, curve: &EnergyCurve, units: Units) -> CliResult<()> {
    let mut w = Csv::create(path)?;
    w.row(CURVE_HEADER)?;
    for k in 0..curve.len() {
        let e = curve.energy[k];
        let p = curve.populations[k];
        w.row([
            num(curve.times[k] / curve.t_m),
            num(energy_in(units, e, curve.full_scale)),
            num(e / curve.full_scale),
            num(p[0]),
            num(p[1]),
            num(p[2]),
            num(curve.norm_drift[k]),
        ])?;
    }
    w.finish()
}

pub fn write_sweep(path: &Path, sweep: &SweepResult, units: Units) -> CliResult<()> {
    let mut w = Csv::create(path)?;
    w.row(SWEEP_HEADER)?;
    for k in 0..sweep.eta.len() {
        let e = sweep.energy[k];
        w.row([
            num(sweep.eta[k]),
            num(energy_in(units, e, sweep.full_scale)),
            num(e / sweep.full_scale),
            num(energy_in(units, sweep.stderr[k], sweep.full_scale)),
        ])?;
    }
    w.finish()
}

pub fn write_table1(path: &Path, rows: &[Table1Row]) -> CliResult<()> {
    let mut w = Csv::create(path)?;
    w.row(["a", "phi", "threshold", "reference", "closed_form", "erf_width"])?;
    for r in rows {
        w.row([r.a, r.phi, r.threshold, r.reference, r.closed_form, r.erf_width].map(num))?;
    }
    w.finish()
}

pub fn write_readout_summary(path: &Path, points: &[ReadoutPoint]) -> CliResult<()> {
    let mut w = Csv::create(path)?;
    w.row(["eta", "P0", "P1", "P2", "true0", "true1", "true2", "meas0", "meas1", "meas2"])?;
    for p in points {
        let mut fields = vec![num(p.eta)];
        fields.extend(p.populations.map(num));
        fields.extend(p.true_counts.counts.map(|c| c.to_string()));
        fields.extend(p.measured.counts.map(|c| c.to_string()));
        w.row(fields)?;
    }
    w.finish()
}

pub fn write_shots(path: &Path, points: &[ReadoutPoint]) -> CliResult<()> {
    let mut w = Csv::create(path)?;
    w.row(["eta", "shot", "true_label", "I", "Q", "measured"])?;
    for p in points {
        for (k, s) in p.shots.iter().enumerate() {
            w.row([
                num(p.eta),
                k.to_string(),
                s.true_label.to_string(),
                num(s.point.i),
                num(s.point.q),
                s.measured.to_string(),
            ])?;
        }
    }
    w.finish()
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 4] = ["#000000", "#1f77b4", "#d62728", "#2ca02c"];

/// Line plot of several series sharing an x axis, as a standalone SVG.
pub fn line_plot(title: &str, xlabel: &str, x: &[f64], series: &[(&str, Vec<f64>)]) -> String {
    let finite = |v: &f64| v.is_finite();
    let (x0, x1) = bounds(x.iter().copied().filter(finite));
    let (mut y0, mut y1) = bounds(series.iter().flat_map(|(_, ys)| ys.iter().copied().filter(finite)));
    y0 = y0.min(0.0);
    y1 = y1.max(1.0);
    let sx = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(svg, r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(xlabel)
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="{anchor}" font-size="10">{v:.3}</text>"#,
            sx(v),
            HEIGHT - MARGIN + 14.0
        );
    }
    for v in [y0, y1] {
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="10">{v:.3}</text>"#, MARGIN - 4.0, sy(v) + 4.0);
    }
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = x
            .iter()
            .zip(ys)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(&a, &b)| format!("{:.2},{:.2}", sx(a), sy(b)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 90.0,
            MARGIN + 16.0 + 14.0 * k as f64,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
