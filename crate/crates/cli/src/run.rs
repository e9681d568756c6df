//! Executes a [`RunConfig`] and writes its artifacts.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use virtphot::circuit::to_physical;
use virtphot::design::{sweep, RegionLabel};
use virtphot::dynamics::{run_case, EvolveOptions, Sample, SweepRow};
use virtphot::eqr::{Interaction, LabeledEigensystem};
use virtphot::measurement::{estimate, MeasurementEstimate};
use virtphot::merit::{merit_slice, MeritRow};
use virtphot::study::{prepare, CaseStudy};

use crate::config::{Command, RunConfig};
use crate::plot::{emit_plot, PlotSpec};
use crate::report::{CliError, Context};

pub const OUT_DIR_ENV: &str = "VIRTPHOT_OUT_DIR";

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
    plots: bool,
}

impl Writer {
    fn write(&mut self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::io("output", &path, e))?;
        self.files.push(name.to_string());
        Ok(path)
    }

    fn csv<I: IntoIterator<Item = String>>(&mut self, name: &str, header: &str, rows: I) -> Result<PathBuf, CliError> {
        let mut body = String::from(header);
        body.push('\n');
        for r in rows {
            body.push_str(&r);
            body.push('\n');
        }
        self.write(name, &body)
    }

    fn plot(&mut self, csv: &Path, spec: PlotSpec) -> Result<(), CliError> {
        if !self.plots {
            return Ok(());
        }
        if emit_plot(csv, &spec, &self.dir)?.is_some() {
            self.files.push(spec.output);
        }
        Ok(())
    }
}

#[derive(Serialize)]
pub struct Summary {
    pub command: Command,
    pub version: &'static str,
    pub config_sha256: String,
    pub config: Value,
    pub outputs: Vec<String>,
    pub results: Value,
}

fn spectrum_rows(variant: Interaction, eig: &LabeledEigensystem, out: &mut Vec<String>) {
    let e0 = eig.energies[0];
    let mut label_of = vec![String::new(); eig.dim()];
    let mut overlap = vec![f64::NAN; eig.dim()];
    for (l, &m) in &eig.labels {
        label_of[m] = l.to_string();
        overlap[m] = eig.label_overlaps.get(l).copied().unwrap_or(f64::NAN);
    }
    use virtphot::design::fmt_num;
    for m in 0..eig.dim() {
        out.push(format!(
            "{},{},{},{},{},{}",
            variant.name(),
            m,
            label_of[m],
            fmt_num(eig.energies[m]),
            fmt_num(eig.energies[m] - e0),
            fmt_num(overlap[m])
        ));
    }
}

const SPECTRUM_HEADER: &str = "variant,index,label,energy_over_ej,energy_above_ground,label_overlap";

fn headline_sample(s: &Sample) -> Value {
    json!({ "p_Psi0u": s.p_psi0u, "p_Psi0": s.p_psi0, "p_Psi2u": s.p_psi2u, "eta": s.eta, "n_u": s.n_u, "n_total": s.n_total, "norm": s.norm })
}

fn run_spectrum(cs: &CaseStudy, w: &mut Writer) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    spectrum_rows(Interaction::Full, &cs.eig_full, &mut rows);
    spectrum_rows(Interaction::RotatingWave, &cs.eig_rw, &mut rows);
    w.csv("spectrum.csv", SPECTRUM_HEADER, rows)?;
    let energies = |eig: &LabeledEigensystem| -> Value {
        eig.labels.iter().map(|(l, &m)| (l.to_string(), json!(eig.energies[m] - eig.energies[0]))).collect::<serde_json::Map<_, _>>().into()
    };
    Ok(json!({
        "labeled_energies_full": energies(&cs.eig_full),
        "labeled_energies_rotating_wave": energies(&cs.eig_rw),
        "boundary_weight_full": cs.eig_full.boundary_weight,
        "boundary_weight_rotating_wave": cs.eig_rw.boundary_weight,
    }))
}

fn run_merit(cfg: &RunConfig, w: &mut Writer) -> Result<Value, CliError> {
    let base = cfg.circuit.design();
    let mut designs = vec![base];
    for &u in &cfg.merit.u11_values {
        designs.push(virtphot::circuit::CircuitDesign { u11_over_ej: u, ..base });
    }
    let rows = merit_slice(&designs, &cfg.study_options(), cfg.parallelism());
    w.csv("merit.csv", MeritRow::CSV_HEADER, rows.iter().map(MeritRow::csv_row))?;
    let own = rows.iter().find(|r| r.design.u11_over_ej == base.u11_over_ej).and_then(|r| r.report.clone());
    Ok(serde_json::to_value(own).expect("merit serializes"))
}

fn run_dynamics(cfg: &RunConfig, cs: &CaseStudy, w: &mut Writer) -> Result<Value, CliError> {
    let opts = EvolveOptions { n_samples: cfg.output.trajectory_samples, ..cfg.evolve };
    let mut out = serde_json::Map::new();
    for &v in &cfg.dynamics.variants {
        let (protocol, traj) = run_case(cs, v, &cfg.protocol, &opts).at("dynamics", "evolve")?;
        let name = match v {
            Interaction::Full => "trajectory.csv".to_string(),
            _ => format!("trajectory_{}.csv", v.name()),
        };
        let stem = name.trim_end_matches(".csv").to_string();
        let path = w.csv(&name, Sample::CSV_HEADER, traj.samples.iter().map(Sample::csv_row))?;
        w.plot(
            &path,
            PlotSpec::line("t", &["p_Psi0u", "p_Psi0", "p_Psi2u"], &format!("populations ({})", v.name()), "t (1/E_J)", "population", &format!("{stem}_populations.svg")),
        )?;
        w.plot(
            &path,
            PlotSpec::line("t", &["eta", "n_u", "n_total"], &format!("photons ({})", v.name()), "t (1/E_J)", "", &format!("{stem}_photons.svg")),
        )?;
        out.insert(
            v.name().to_string(),
            json!({
                "final": headline_sample(&traj.final_state),
                "norm_drift": traj.norm_drift,
                "steps": traj.steps,
                "dt": traj.dt,
                "basis_dim": traj.basis_dim,
                "dt_shift": traj.dt_shift,
                "protocol": protocol,
            }),
        );
    }
    Ok(Value::Object(out))
}

fn run_sweep_t(cfg: &RunConfig, cs: &CaseStudy, w: &mut Writer) -> Result<Value, CliError> {
    let s = &cfg.sweep_t;
    let base = virtphot::dynamics::ProtocolParams { omega0: s.omega0, ..cfg.protocol };
    let opts = EvolveOptions { n_samples: 1, ..cfg.evolve };
    let rows = virtphot::dynamics::sweep_t(cs, &s.ports, &s.variants, &base, &s.t_values, &opts, cfg.parallelism());
    let path = w.csv("sweepT.csv", SweepRow::CSV_HEADER, rows.iter().map(SweepRow::csv_row))?;
    let mut spec = PlotSpec::line("T", &["eta_final"], "efficiency vs pulse width", "T (1/E_J)", "eta(t_f)", "sweepT.svg");
    spec.group_by = vec!["variant".into(), "port".into()];
    w.plot(&path, spec)?;
    Ok(serde_json::to_value(&rows).expect("rows serialize"))
}

fn run_sweep(cfg: &RunConfig, w: &mut Writer) -> Result<Value, CliError> {
    let rows = sweep(&cfg.sweep, &cfg.basis, cfg.parallelism()).at("design", "sweep")?;
    let path = w.csv("sweep.csv", RegionLabel::CSV_HEADER, rows.iter().map(RegionLabel::csv_row))?;
    let mut spec = PlotSpec::line("x", &["y"], "feasible designs", "E_C1/E_J", "U11/E_J", "sweep.svg");
    spec.kind = crate::plot::PlotKind::Region;
    spec.value = Some("feasible".into());
    w.plot(&path, spec)?;
    let feasible = rows.iter().filter(|r| r.feasible).count();
    if feasible == 0 {
        return Err(CliError::AllInfeasible);
    }
    Ok(json!({ "points": rows.len(), "feasible": feasible }))
}

const MEASUREMENT_PREFIX: &str = "ej_ghz,c1_ff,lj_nh,ic_na,l_nh,l2_nh,c2_ff,z2_kohm,eps_eg_ghz";

fn run_measurement(cfg: &RunConfig, cs: &CaseStudy, w: &mut Writer) -> Result<Value, CliError> {
    use virtphot::design::fmt_num;
    let pc = to_physical(&cs.outcome.design, cfg.circuit.ej_ghz).at("circuit", "to_physical")?;
    let est: MeasurementEstimate =
        estimate(cs.outcome.omega_c, cfg.circuit.ej_ghz, cfg.protocol.t_width, &cfg.measurement).at("measurement", "estimate")?;
    let prefix = [pc.ej_ghz, pc.c1_ff, pc.lj_nh, pc.ic_na, pc.l_nh, pc.l2_nh, pc.c2_ff, pc.z2_kohm, cs.outcome.eps_eg * cfg.circuit.ej_ghz]
        .iter()
        .map(|&v| fmt_num(v))
        .collect::<Vec<_>>()
        .join(",");
    w.csv("measurement.csv", &format!("{MEASUREMENT_PREFIX},{}", MeasurementEstimate::CSV_HEADER), [format!("{prefix},{}", est.csv_row())])?;
    Ok(json!({ "physical": pc, "estimate": est }))
}

/// Output directory: the environment override wins over the config.
pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
}

pub fn run(cfg: &RunConfig) -> Result<Summary, CliError> {
    let dir = output_dir(cfg);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io("output directory", &dir, e))?;
    let mut w = Writer { dir, files: Vec::new(), plots: cfg.output.plots };
    let mut results = serde_json::Map::new();
    let needs_case = !matches!(cfg.command, Command::Sweep | Command::Merit);
    let cs = if needs_case { Some(prepare(&cfg.circuit.design(), &cfg.study_options()).at("study", "prepare")?) } else { None };
    if let Some(cs) = &cs {
        results.insert("design".into(), serde_json::to_value(&cs.outcome).expect("outcome serializes"));
    }
    let case = || cs.as_ref().expect("case prepared");
    use Command as C;
    let c = cfg.command;
    if matches!(c, C::Spectrum | C::FullPipeline) {
        results.insert("spectrum".into(), run_spectrum(case(), &mut w)?);
    }
    if matches!(c, C::Merit | C::FullPipeline) {
        results.insert("merit".into(), run_merit(cfg, &mut w)?);
    }
    if c == C::Sweep {
        results.insert("sweep".into(), run_sweep(cfg, &mut w)?);
    }
    if matches!(c, C::Dynamics | C::FullPipeline) {
        results.insert("dynamics".into(), run_dynamics(cfg, case(), &mut w)?);
    }
    if matches!(c, C::SweepT | C::FullPipeline) {
        results.insert("sweep_t".into(), run_sweep_t(cfg, case(), &mut w)?);
    }
    if matches!(c, C::Measurement | C::FullPipeline) {
        results.insert("measurement".into(), run_measurement(cfg, case(), &mut w)?);
    }
    let (config, config_sha256) = cfg.resolved();
    w.files.push("summary.json".into());
    let summary = Summary { command: c, version: env!("CARGO_PKG_VERSION"), config_sha256, config, outputs: w.files.clone(), results: Value::Object(results) };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    let path = w.dir.join("summary.json");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::io("output", &path, e))?;
    Ok(summary)
}
