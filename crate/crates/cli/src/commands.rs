use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use equiflow_core::evolve::{energy_identity_residual, run};
use equiflow_core::gauge::GaugeState;
use equiflow_core::modulation::{bump_phi, crossing_seed, fit_mu_scoped, normal_form_correction, psi_and_c};
use equiflow_core::scenarios::{build_initial_data, classify_behavior, perturbed_harmonic, predict_log_s};
use equiflow_core::snapshot::{read_snapshots, write_snapshots};
use equiflow_core::{Error, Mu, NormKind, RadialGrid, Result, SphereMap};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, InitialData, SweepMode};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Decompose,
    Predict,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Decompose => "decompose",
            Command::Predict => "predict",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub status: String,
    pub exit_code: i32,
    pub error: Option<ErrorInfo>,
    pub summary: BTreeMap<String, Value>,
    pub files: Vec<String>,
}

/// 2 for bad input (config, arguments, unreadable or unwritable files), 3 for numerical failure.
pub fn exit_code_for(e: &Error) -> i32 {
    if e.is_config() || matches!(e, Error::Io(_) | Error::GridMismatch { .. }) {
        2
    } else {
        3
    }
}

impl Report {
    pub fn failed(command: &str, e: &Error) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            command: command.into(),
            status: "error".into(),
            exit_code: exit_code_for(e),
            error: Some(ErrorInfo { code: e.code().into(), message: e.to_string() }),
            summary: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let f = File::create(dir.join("report.json"))?;
        let mut w = BufWriter::new(f);
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }
}

struct Outcome {
    summary: BTreeMap<String, Value>,
    files: Vec<String>,
    exit_code: i32,
    error: Option<ErrorInfo>,
}

impl Outcome {
    fn ok(summary: BTreeMap<String, Value>, files: Vec<String>) -> Self {
        Self { summary, files, exit_code: 0, error: None }
    }
}

/// Runs `cmd`, writes its outputs and `report.json` into `out`, and returns the report.
pub fn execute(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> Report {
    let result = std::fs::create_dir_all(out).map_err(Error::from).and_then(|_| match cmd {
        Command::Simulate => simulate(cfg, out),
        Command::Decompose => decompose(cfg, out),
        Command::Predict => predict(cfg, out),
        Command::Sweep => sweep(cfg, out),
    });
    let report = match result {
        Ok(o) => Report {
            schema: REPORT_SCHEMA,
            command: cmd.name().into(),
            status: if o.exit_code == 0 { "ok".into() } else { "error".into() },
            exit_code: o.exit_code,
            error: o.error,
            summary: o.summary,
            files: o.files,
        },
        Err(e) => Report::failed(cmd.name(), &e),
    };
    if let Err(e) = report.write(out) {
        warn!("could not write report: {e}");
        let mut r = Report::failed(cmd.name(), &e);
        r.summary = report.summary;
        return r;
    }
    report
}

fn num(x: f64) -> Value {
    json!(x)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Builds the initial map and the grid it lives on.
pub fn initial_data(cfg: &ExperimentConfig) -> Result<(SphereMap, RadialGrid)> {
    match &cfg.initial {
        InitialData::Snapshot(path) => {
            let (meta, snaps) = load_snapshots(path)?;
            if meta.m != cfg.m {
                return Err(Error::Config(format!(
                    "snapshot has m = {} but the config asks for m = {}",
                    meta.m, cfg.m
                )));
            }
            let grid = meta.grid()?;
            if cfg.grid_explicit && (cfg.n != meta.n || cfg.rho_min != meta.rho_min || cfg.rho_max != meta.rho_max) {
                return Err(Error::Config("config grid differs from the snapshot grid".into()));
            }
            let last = snaps.into_iter().last().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("{} holds no profiles", path.display()),
            })?;
            let planar = last.v.iter().all(|x| x.y == 0.0);
            let v = if planar {
                SphereMap::from_beta(meta.m, last.v.iter().map(|x| x.z.atan2(x.x)).collect())
            } else {
                SphereMap::new(meta.m, last.v)?
            };
            Ok((v, grid))
        }
        other => {
            let grid = cfg.grid()?;
            let mu = Mu::new(cfg.m, cfg.s0, cfg.alpha0)?;
            let v = match other {
                InitialData::Harmonic => SphereMap::harmonic(mu, &grid),
                InitialData::Perturbed => perturbed_harmonic(mu, cfg.delta, cfg.seed, cfg.planar, &grid)?,
                InitialData::Tail(kind) => {
                    build_initial_data(&cfg.tail_family(*kind), cfg.m, cfg.delta, &grid)?.0
                }
                InitialData::Snapshot(_) => unreachable!(),
            };
            Ok((v, grid))
        }
    }
}

fn load_snapshots(path: &PathBuf) -> Result<(equiflow_core::SnapshotMeta, Vec<equiflow_core::Snapshot>)> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_snapshots(BufReader::new(f))
}

fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let (v0, grid) = initial_data(cfg)?;
    let flow = cfg.flow()?;
    info!("simulate: m = {}, a = {}, n = {}, t_end = {}", cfg.m, cfg.a, grid.n(), cfg.t_end);
    let series = run(&v0, &flow, &grid)?;
    let mut files = vec!["series.csv".to_string(), "final.csv".to_string()];
    series.write_csv(create(out, "series.csv")?)?;
    let fin = series.final_map.as_ref().expect("run stores the final map");
    let t_last = series.records.last().map(|r| r.t).unwrap_or(0.0);
    write_snapshots(create(out, "final.csv")?, cfg.m, &grid, &[(t_last, fin.v.clone())])?;
    if cfg.snapshot_every.is_some() {
        write_snapshots(create(out, "snapshots.csv")?, cfg.m, &grid, &series.snapshots)?;
        files.push("snapshots.csv".into());
    }
    let first = &series.records[0];
    let last = series.records.last().unwrap();
    let log_t: Vec<f64> = series.times().iter().map(|t| t.ln()).collect();
    let class = classify_behavior(&log_t, &series.log_s());
    let mut s = BTreeMap::new();
    s.insert("m".into(), json!(cfg.m));
    s.insert("a".into(), json!([cfg.a.re, cfg.a.im]));
    s.insert("records".into(), json!(series.records.len()));
    s.insert("t_end".into(), num(last.t));
    s.insert("energy_initial".into(), num(first.energy));
    s.insert("energy_final".into(), num(last.energy));
    s.insert("energy_excess".into(), num(first.energy - 4.0 * std::f64::consts::PI * cfg.m as f64));
    s.insert("energy_identity_residual".into(), num(energy_identity_residual(&series)));
    s.insert("s_initial".into(), num(first.s));
    s.insert("s_final".into(), num(last.s));
    s.insert("alpha_final".into(), num(last.alpha));
    s.insert("log_s_drift".into(), num(last.log_s() - first.log_s()));
    s.insert("q_l2_initial".into(), num(first.q_norm));
    s.insert("q_l2_final".into(), num(last.q_norm));
    s.insert("z_sup_final".into(), num(last.z_sup));
    s.insert("unit_defect_final".into(), num(fin.unit_defect()));
    s.insert("prediction_final".into(), last.prediction.map(num).unwrap_or(Value::Null));
    s.insert("class".into(), class.number().map(|k| json!(k)).unwrap_or(Value::Null));
    Ok(Outcome::ok(s, files))
}

fn decompose(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let path = cfg
        .snapshot
        .as_ref()
        .ok_or_else(|| Error::Config("decompose needs the snapshot key".into()))?;
    let (meta, snaps) = load_snapshots(path)?;
    let grid = meta.grid()?;
    let m = meta.m;
    if snaps.is_empty() {
        return Err(Error::Parse { line: 0, msg: format!("{} holds no profiles", path.display()) });
    }
    let phi = bump_phi(m, &grid)?;
    let psi = if m >= 2 { Some(psi_and_c(&phi, &grid)?) } else { None };
    let mut w = create(out, "decomposition.csv")?;
    writeln!(w, "# equiflow decomposition schema {REPORT_SCHEMA}")?;
    writeln!(w, "# t: time; s, alpha: fitted parameters; q_l2: L2 norm of q; z_x, z_sup: X and sup norms of z; nf_re, nf_im: normal-form correction")?;
    writeln!(w, "t,s,alpha,q_l2,z_x,z_sup,nf_re,nf_im")?;
    let mut last = None;
    for snap in &snaps {
        let planar = snap.v.iter().all(|x| x.y == 0.0);
        let seed = crossing_seed(&snap.v, m, &grid)?;
        let mut st = fit_mu_scoped(&snap.v, seed, &phi, &grid, planar, cfg.fit_scope)?;
        let gs = GaugeState::forward(&snap.v, st.mu, cfg.a, &grid)?;
        st.attach_gauge(&gs);
        let nf = match &psi {
            Some(p) => normal_form_correction(&gs.q, st.mu, gs.alpha_tilde(), p, &grid)?.value,
            None => num_complex::Complex64::new(f64::NAN, f64::NAN),
        };
        let row = [snap.t, st.mu.s, st.mu.alpha, gs.q_norm(&grid), st.z_x(&grid), st.z_sup(), nf.re, nf.im];
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
        last = Some((snap.t, st, gs, nf));
    }
    w.flush()?;
    let (t, st, gs, nf) = last.unwrap();
    let mut f = create(out, "fields.csv")?;
    writeln!(f, "# equiflow fields schema {REPORT_SCHEMA}")?;
    writeln!(f, "# fields of the last profile (t = {t:.17e}); q: gauge field; z: remainder against h[mu]")?;
    writeln!(f, "rho,r,q_re,q_im,z_re,z_im")?;
    for i in 0..grid.n() {
        writeln!(
            f,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            grid.rho()[i],
            grid.r()[i],
            gs.q[i].re,
            gs.q[i].im,
            st.z[i].re,
            st.z[i].im
        )?;
    }
    f.flush()?;
    let mut s = BTreeMap::new();
    s.insert("m".into(), json!(m));
    s.insert("profiles".into(), json!(snaps.len()));
    s.insert("t".into(), num(t));
    s.insert("s".into(), num(st.mu.s));
    s.insert("alpha".into(), num(st.mu.alpha));
    s.insert("alpha_tilde".into(), st.alpha_tilde.map(num).unwrap_or(Value::Null));
    s.insert("q_l2".into(), num(gs.q_norm(&grid)));
    s.insert("z_x".into(), num(grid.norm(&st.z, NormKind::X)?));
    s.insert("z_sup".into(), num(st.z_sup()));
    s.insert("fit_iterations".into(), json!(st.iterations));
    s.insert("normal_form".into(), json!([nf.re, nf.im]));
    Ok(Outcome::ok(s, vec!["decomposition.csv".into(), "fields.csv".into()]))
}

fn predict(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let (v0, grid) = initial_data(cfg)?;
    let ts = cfg.t_grid();
    let p = predict_log_s(&v0, cfg.a.re, &ts, &grid)?;
    let mut w = create(out, "prediction.csv")?;
    writeln!(w, "# equiflow prediction schema {REPORT_SCHEMA}")?;
    writeln!(w, "# t: time; r: sqrt(a1 t); v1_form: (2/pi) int v1/r dr; q_form: (1/pi) int q dr; both from s(0) to r")?;
    writeln!(w, "t,r,v1_form,q_form")?;
    for (k, t) in ts.iter().enumerate() {
        writeln!(w, "{:.17e},{:.17e},{:.17e},{:.17e}", t, (cfg.a.re * t).sqrt(), p.v1_form[k], p.q_form[k])?;
    }
    w.flush()?;
    let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let class = classify_behavior(&log_t, &p.v1_form);
    let mut s = BTreeMap::new();
    s.insert("s0".into(), num(p.s0));
    s.insert("max_t".into(), num(p.max_t));
    s.insert("drift_v1_form".into(), num(*p.v1_form.last().unwrap() - p.v1_form[0]));
    s.insert("drift_q_form".into(), num(*p.q_form.last().unwrap() - p.q_form[0]));
    s.insert("final_v1_form".into(), num(*p.v1_form.last().unwrap()));
    s.insert("final_q_form".into(), num(*p.q_form.last().unwrap()));
    s.insert("class".into(), class.number().map(|k| json!(k)).unwrap_or(Value::Null));
    Ok(Outcome::ok(s, vec!["prediction.csv".into()]))
}

/// One sweep result, keyed by `(kappa, delta, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kappa: f64,
    pub delta: f64,
    pub seed: u64,
    pub status: String,
    pub error_code: String,
    pub drift: f64,
    pub class: Option<u8>,
    pub q_final: f64,
    pub energy_final: f64,
}

fn sweep_row(cfg: &ExperimentConfig) -> SweepRow {
    let mut row = SweepRow {
        kappa: cfg.kappa,
        delta: cfg.delta,
        seed: cfg.seed,
        status: "ok".into(),
        error_code: String::new(),
        drift: f64::NAN,
        class: None,
        q_final: f64::NAN,
        energy_final: f64::NAN,
    };
    let res = (|| -> Result<()> {
        let (v0, grid) = initial_data(cfg)?;
        match cfg.sweep_mode {
            SweepMode::Predict => {
                let ts = cfg.t_grid();
                let p = predict_log_s(&v0, cfg.a.re, &ts, &grid)?;
                let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
                row.drift = *p.v1_form.last().unwrap() - p.v1_form[0];
                row.class = classify_behavior(&log_t, &p.v1_form).number();
                row.energy_final = v0.energy(&grid);
            }
            SweepMode::Simulate => {
                let series = run(&v0, &cfg.flow()?, &grid)?;
                let (first, last) = (&series.records[0], series.records.last().unwrap());
                let log_t: Vec<f64> = series.times().iter().map(|t| t.ln()).collect();
                row.drift = last.log_s() - first.log_s();
                row.class = classify_behavior(&log_t, &series.log_s()).number();
                row.q_final = last.q_norm;
                row.energy_final = last.energy;
            }
        }
        Ok(())
    })();
    if let Err(e) = res {
        row.status = "error".into();
        row.error_code = e.code().into();
        warn!("sweep point kappa = {}, delta = {}, seed = {}: {e}", cfg.kappa, cfg.delta, cfg.seed);
    }
    row
}

fn thread_count() -> Result<usize> {
    match std::env::var("EQUIFLOW_THREADS") {
        Err(_) => Ok(0),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("EQUIFLOW_THREADS must be a non-negative integer (got {s:?})"))),
    }
}

/// Runs every `(kappa, delta, seed)` combination; rows come back sorted by that key.
pub fn sweep_rows(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let kappas = if cfg.sweep_kappa.is_empty() { vec![cfg.kappa] } else { cfg.sweep_kappa.clone() };
    let deltas = if cfg.sweep_delta.is_empty() { vec![cfg.delta] } else { cfg.sweep_delta.clone() };
    let seeds = if cfg.sweep_seed.is_empty() { vec![cfg.seed] } else { cfg.sweep_seed.clone() };
    let mut points = Vec::new();
    for &k in &kappas {
        for &d in &deltas {
            for &s in &seeds {
                let mut c = cfg.clone();
                c.kappa = k;
                c.delta = d;
                c.seed = s;
                points.push(c);
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut rows: Vec<SweepRow> = pool.install(|| points.par_iter().map(sweep_row).collect());
    rows.sort_by(|a, b| {
        a.kappa
            .total_cmp(&b.kappa)
            .then(a.delta.total_cmp(&b.delta))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(rows)
}

fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let rows = sweep_rows(cfg)?;
    let mut w = create(out, "sweep.csv")?;
    writeln!(w, "# equiflow sweep schema {REPORT_SCHEMA}")?;
    let what = match cfg.sweep_mode {
        SweepMode::Simulate => "log s(T) - log s(0) of the run",
        SweepMode::Predict => "predicted [log s] between t_min and t_max",
    };
    writeln!(w, "# kappa, delta, seed: sweep key; status, error_code: outcome; drift: {what}")?;
    writeln!(w, "# class: behaviour class (empty if undetermined); q_final: final L2 norm of q; energy_final: final energy")?;
    writeln!(w, "kappa,delta,seed,status,error_code,drift,class,q_final,energy_final")?;
    for r in &rows {
        writeln!(
            w,
            "{:.17e},{:.17e},{},{},{},{:.17e},{},{:.17e},{:.17e}",
            r.kappa,
            r.delta,
            r.seed,
            r.status,
            r.error_code,
            r.drift,
            r.class.map(|c| c.to_string()).unwrap_or_default(),
            r.q_final,
            r.energy_final
        )?;
    }
    w.flush()?;
    let failed: Vec<&SweepRow> = rows.iter().filter(|r| r.status != "ok").collect();
    let mut s = BTreeMap::new();
    s.insert("rows".into(), json!(rows.len()));
    s.insert("failed".into(), json!(failed.len()));
    s.insert("drifts".into(), json!(rows.iter().map(|r| r.drift).collect::<Vec<_>>()));
    let mut o = Outcome::ok(s, vec!["sweep.csv".into()]);
    if let Some(first) = failed.first() {
        o.exit_code = 3;
        o.error = Some(ErrorInfo {
            code: first.error_code.clone(),
            message: format!("{} of {} sweep points failed", failed.len(), rows.len()),
        });
    }
    Ok(o)
}
