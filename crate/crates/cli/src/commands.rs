use std::path::PathBuf;

use qbattery::device::energy_to_physical;
use qbattery::observables::{
    average_power, charging_time, charging_time_analytic, sweep_final_energy, table1, ChargingTime, Engine,
    EnergyCurve, SweepTemplate,
};
use qbattery::readout::{calibrate, end_to_end_sweep, label_accuracy, ReadoutPoint, ReadoutSettings};
use qbattery::{ProtocolKind, ProtocolSpec};

use crate::config::{resolve_engine, RunConfig, Units};
use crate::error::{CliError, CliResult};
use crate::output::{self, energy_in, num, unit_label};

/// Settings shared by every subcommand after flags override the config file.
pub struct Context {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub units: Units,
    pub engine: Option<Engine>,
    pub seed: u64,
    pub plots: bool,
}

impl Context {
    fn path(&self, name: &str) -> CliResult<PathBuf> {
        output::ensure_dir(&self.out_dir)?;
        Ok(self.out_dir.join(name))
    }

    fn energy(&self, e: f64, full_scale: f64) -> String {
        num(energy_in(self.units, e, full_scale))
    }

    fn curve(&self, spec: &ProtocolSpec) -> CliResult<(EnergyCurve, Engine)> {
        let engine = resolve_engine(self.engine, spec);
        let curve = match engine {
            Engine::Analytic => EnergyCurve::analytic(spec, self.config.protocol.points)?,
            Engine::Numeric => EnergyCurve::numeric(spec, self.config.frame(), self.config.step(spec))?,
        };
        Ok((curve, engine))
    }

    fn sweep_engine(&self, template: &SweepTemplate) -> CliResult<Engine> {
        let probe = template.protocol(1.0)?;
        Ok(resolve_engine(self.engine, &probe))
    }

    fn readout_settings(&self, engine: Engine, keep_shots: bool) -> CliResult<ReadoutSettings> {
        let r = &self.config.readout;
        let model = self.config.cluster_model()?;
        let classifier = calibrate(&model, r.calibration_shots, self.seed)?;
        Ok(ReadoutSettings { shots: r.shots, seed: self.seed, model, classifier, engine, keep_shots })
    }
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Analytic => "analytic",
        Engine::Numeric => "numeric",
    }
}

pub fn spectrum(ctx: &Context) -> CliResult<()> {
    let s = ctx.config.spectrum()?;
    let fs = s.full_scale();
    println!("levels = {}", s.levels());
    let omega = s.omega();
    println!("omega = [{}, {}, {}] rad/ns", omega[0], omega[1], omega[2]);
    let rows = [
        ("Δ", s.delta()),
        ("Δ′", s.delta_prime()),
        ("Δ_max", s.delta_max()),
        ("δ", s.half_anharmonicity()),
    ];
    for (name, v) in rows {
        println!(
            "{name} = {v} rad/ns = {:.6} μeV ({} {})",
            energy_to_physical(v),
            energy_in(ctx.units, v, fs),
            unit_label(ctx.units)
        );
    }
    println!("full_scale = {fs} rad/ns");
    Ok(())
}

pub fn simulate(ctx: &Context) -> CliResult<()> {
    let spec = ctx.config.protocol_spec()?;
    let (curve, engine) = ctx.curve(&spec)?;
    let path = ctx.path("curve.csv")?;
    output::write_curve(&path, &curve, ctx.units)?;
    let fs = curve.full_scale;
    let last = curve.len() - 1;
    let max_drift = curve.norm_drift.iter().copied().fold(0.0, f64::max);
    println!("engine = {}", engine_name(engine));
    println!("samples = {}", curve.len());
    println!("final_E = {}", ctx.energy(curve.energy[last], fs));
    println!("final_E_over_full_scale = {}", num(curve.energy[last] / fs));
    println!("max_E_over_full_scale = {}", num(curve.max_fraction()));
    println!("max_norm_drift = {}", num(max_drift));
    println!("wrote {}", path.display());
    if ctx.plots {
        let x: Vec<f64> = curve.times.iter().map(|t| t / curve.t_m).collect();
        let series = vec![
            ("E/full", curve.energy.iter().map(|e| e / fs).collect()),
            ("P0", curve.populations.iter().map(|p| p[0]).collect()),
            ("P1", curve.populations.iter().map(|p| p[1]).collect()),
            ("P2", curve.populations.iter().map(|p| p[2]).collect()),
        ];
        let svg_path = ctx.path("curve.svg")?;
        output::write_text(&svg_path, &output::line_plot("Stored energy", "t / t_m", &x, &series))?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

pub fn sweep(ctx: &Context) -> CliResult<()> {
    let template = ctx.config.sweep_template()?;
    let grid = ctx.config.grid()?;
    let engine = ctx.sweep_engine(&template)?;
    let result = sweep_final_energy(&template, &grid, engine)?;
    let path = ctx.path("sweep.csv")?;
    output::write_sweep(&path, &result, ctx.units)?;
    println!("engine = {}", engine_name(engine));
    println!("variable = {:?}", result.variable);
    println!("points = {}", result.eta.len());
    println!("wrote {}", path.display());

    let mut series = vec![("exact", result.fractions())];
    if ctx.config.readout.enabled {
        let settings = ctx.readout_settings(engine, false)?;
        let (noisy, points) = end_to_end_sweep(&template, &grid, &settings)?;
        let noisy_path = ctx.path("sweep_readout.csv")?;
        output::write_sweep(&noisy_path, &noisy, ctx.units)?;
        let summary = ctx.path("readout_summary.csv")?;
        output::write_readout_summary(&summary, &points)?;
        println!("readout shots = {}, seed = {}", settings.shots, settings.seed);
        println!("wrote {}", noisy_path.display());
        println!("wrote {}", summary.display());
        series.push(("readout", noisy.fractions()));
    }
    if ctx.plots {
        let svg_path = ctx.path("sweep.svg")?;
        let svg = output::line_plot("Final stored energy", &format!("{:?}", result.variable), &grid, &series);
        output::write_text(&svg_path, &svg)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

pub fn charging_time_report(ctx: &Context) -> CliResult<()> {
    let spec = ctx.config.protocol_spec()?;
    let threshold = ctx.config.protocol.threshold;
    let fs = spec.spectrum.full_scale();
    let engine = resolve_engine(ctx.engine, &spec);
    let tc: ChargingTime = match engine {
        Engine::Analytic => charging_time_analytic(&spec, threshold)?,
        Engine::Numeric => {
            let curve = EnergyCurve::numeric(&spec, ctx.config.frame(), ctx.config.step(&spec))?;
            charging_time(&curve, threshold, fs)?
        }
    };
    let e_c = threshold * fs;
    let power = average_power(e_c, tc.time)?;
    println!("engine = {}", engine_name(engine));
    println!("threshold = {threshold}");
    println!("t_c_over_t_m = {}", num(tc.time / spec.t_m));
    println!("t_c = {} ns", num(tc.time));
    match tc.settled {
        Some(t) if t != tc.time => println!("settled_after = {} ns", num(t)),
        Some(_) => {}
        None => println!("settled_after = none (curve ends below threshold)"),
    }
    println!("average_power = {} {}/ns", ctx.energy(power, fs), unit_label(ctx.units));
    Ok(())
}

pub fn table(ctx: &Context) -> CliResult<()> {
    let rows = table1()?;
    println!("{:>6} {:>8} {:>9} {:>10} {:>12} {:>12}", "a", "phi", "threshold", "reference", "closed_form", "erf_width");
    for r in &rows {
        println!(
            "{:>6.2} {:>8.4} {:>9.2} {:>10.2} {:>12.6} {:>12.6}",
            r.a, r.phi, r.threshold, r.reference, r.closed_form, r.erf_width
        );
    }
    let path = ctx.path("table1.csv")?;
    output::write_table1(&path, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn readout(ctx: &Context) -> CliResult<()> {
    let template = ctx.config.sweep_template()?;
    if template.kind == ProtocolKind::Custom {
        return Err(CliError::Config("readout needs a sweepable protocol kind".into()));
    }
    let grid = ctx.config.grid()?;
    let engine = ctx.sweep_engine(&template)?;
    let settings = ctx.readout_settings(engine, true)?;
    let accuracy = label_accuracy(&settings.model, &settings.classifier, ctx.config.readout.calibration_shots, ctx.seed)?;
    let (result, points): (_, Vec<ReadoutPoint>) = end_to_end_sweep(&template, &grid, &settings)?;
    let shots = ctx.path("readout_shots.csv")?;
    output::write_shots(&shots, &points)?;
    let summary = ctx.path("readout_summary.csv")?;
    output::write_readout_summary(&summary, &points)?;
    let sweep = ctx.path("sweep_readout.csv")?;
    output::write_sweep(&sweep, &result, ctx.units)?;
    println!("engine = {}", engine_name(engine));
    println!("shots = {}, seed = {}", settings.shots, settings.seed);
    let c = settings.classifier.centroids;
    for (k, p) in c.iter().enumerate() {
        println!("centroid {k} = ({}, {}), accuracy {:.4}", num(p.i), num(p.q), accuracy[k]);
    }
    println!("wrote {}", shots.display());
    println!("wrote {}", summary.display());
    println!("wrote {}", sweep.display());
    Ok(())
}
