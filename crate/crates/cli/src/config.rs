//! Flat TOML experiment configuration.
//!
//! Every key is optional; see [`ExperimentConfig::defaults`] for the values used when a key
//! is absent. Unknown keys are rejected.

use std::path::PathBuf;

use equiflow_core::evolve::{DtPolicy, FlowConfig, Scheme};
use equiflow_core::modulation::FitScope;
use equiflow_core::{Error, RadialGrid, Result, TailFamily, TailKind};
use num_complex::Complex64;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    m: Option<i64>,
    a1: Option<f64>,
    a2: Option<f64>,
    rho_min: Option<f64>,
    rho_max: Option<f64>,
    n: Option<i64>,
    scheme: Option<String>,
    dt: Option<f64>,
    dt_ratio: Option<f64>,
    dt_max: Option<f64>,
    t_end: Option<f64>,
    family: Option<String>,
    s0: Option<f64>,
    alpha0: Option<f64>,
    delta: Option<f64>,
    seed: Option<u64>,
    planar: Option<bool>,
    kappa: Option<f64>,
    lambda: Option<f64>,
    r1: Option<f64>,
    sign: Option<f64>,
    snapshot: Option<PathBuf>,
    output_every: Option<i64>,
    snapshot_every: Option<i64>,
    diagnostics: Option<bool>,
    fit_scope: Option<String>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    t_points: Option<i64>,
    sweep_mode: Option<String>,
    sweep_kappa: Option<Vec<f64>>,
    sweep_delta: Option<Vec<f64>>,
    sweep_seed: Option<Vec<u64>>,
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `h[mu]` with `mu = (s0, alpha0)`.
    Harmonic,
    /// `h[mu]` plus a seeded bump with `||q|| = delta`.
    Perturbed,
    /// Great-circle data with a far-field tail (`m = 2`).
    Tail(TailKind),
    /// Last profile stored in a snapshot file.
    Snapshot(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Simulate,
    Predict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: u32,
    pub a: Complex64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub n: usize,
    /// Whether any grid key was given explicitly.
    pub grid_explicit: bool,
    pub scheme: Scheme,
    pub dt: DtPolicy,
    pub t_end: f64,
    pub initial: InitialData,
    pub s0: f64,
    pub alpha0: f64,
    pub delta: f64,
    pub seed: u64,
    pub planar: bool,
    pub kappa: f64,
    pub lambda: f64,
    pub r1: f64,
    pub sign: f64,
    pub snapshot: Option<PathBuf>,
    pub output_every: usize,
    pub snapshot_every: Option<usize>,
    pub diagnostics: bool,
    /// Defaults to `bump` for tail families and `global` otherwise.
    pub fit_scope: FitScope,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub sweep_mode: SweepMode,
    pub sweep_kappa: Vec<f64>,
    pub sweep_delta: Vec<f64>,
    pub sweep_seed: Vec<u64>,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults() -> Self {
        Self {
            m: 2,
            a: Complex64::new(1.0, 0.0),
            rho_min: -10.0,
            rho_max: 10.0,
            n: 801,
            grid_explicit: false,
            scheme: Scheme::ImexProjected,
            dt: DtPolicy::Fixed(0.01),
            t_end: 1.0,
            initial: InitialData::Harmonic,
            s0: 1.0,
            alpha0: 0.0,
            delta: 0.05,
            seed: 0,
            planar: false,
            kappa: 0.0,
            lambda: 1.0,
            r1: std::f64::consts::E,
            sign: 1.0,
            snapshot: None,
            output_every: 1,
            snapshot_every: None,
            diagnostics: true,
            fit_scope: FitScope::Global,
            t_min: 1.0,
            t_max: 1e4,
            t_points: 41,
            sweep_mode: SweepMode::Simulate,
            sweep_kappa: Vec::new(),
            sweep_delta: Vec::new(),
            sweep_seed: Vec::new(),
            out_dir: PathBuf::from("out"),
        }
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.rho_min, self.rho_max, self.n)
    }

    pub fn flow(&self) -> Result<FlowConfig> {
        let mut f = FlowConfig::new(self.a, self.scheme, self.dt, self.t_end)?;
        f.output_every = self.output_every;
        f.snapshot_every = self.snapshot_every;
        f.delta = self.delta;
        f.diagnostics = self.diagnostics;
        f.fit_scope = self.fit_scope;
        Ok(f)
    }

    pub fn tail_family(&self, kind: TailKind) -> TailFamily {
        let mut fam = TailFamily::new(kind, self.kappa);
        fam.lambda = self.lambda;
        fam.r1 = self.r1;
        fam.sign = self.sign;
        fam.s0 = self.s0;
        fam
    }

    /// Log-spaced prediction times on `[t_min, t_max]`.
    pub fn t_grid(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let k = self.t_points - 1;
        (0..self.t_points).map(|i| (a + (b - a) * i as f64 / k as f64).exp()).collect()
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        Error::Parse { line, msg: e.message().to_string() }
    })?;
    build(raw)
}

fn build(raw: RawConfig) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::defaults();
    let mut bad: Vec<String> = Vec::new();

    if let Some(m) = raw.m {
        if m < 1 || m > 64 {
            bad.push(format!("m must be an integer in [1, 64] (got {m})"));
        } else {
            c.m = m as u32;
        }
    }
    c.a = Complex64::new(raw.a1.unwrap_or(c.a.re), raw.a2.unwrap_or(c.a.im));
    if c.a.norm() == 0.0 {
        bad.push("a must be nonzero".into());
    }
    if c.a.re < 0.0 {
        bad.push(format!("a1 = Re a must be >= 0 (got {})", c.a.re));
    }
    if !c.a.re.is_finite() || !c.a.im.is_finite() {
        bad.push("a must be finite".into());
    }

    c.grid_explicit = raw.rho_min.is_some() || raw.rho_max.is_some() || raw.n.is_some();
    c.rho_min = raw.rho_min.unwrap_or(c.rho_min);
    c.rho_max = raw.rho_max.unwrap_or(c.rho_max);
    if let Some(n) = raw.n {
        if n < 0 {
            bad.push(format!("n must be positive (got {n})"));
        } else {
            c.n = n as usize;
        }
    }
    if let Err(Error::Config(msg)) = c.grid() {
        bad.push(msg);
    }

    match raw.scheme.as_deref() {
        None | Some("imex") => c.scheme = Scheme::ImexProjected,
        Some("scalar") => c.scheme = Scheme::ScalarBeta,
        Some(other) => bad.push(format!("scheme must be \"imex\" or \"scalar\" (got {other:?})")),
    }

    let dt0 = raw.dt.unwrap_or(0.01);
    c.dt = match (raw.dt_ratio, raw.dt_max) {
        (None, None) => DtPolicy::Fixed(dt0),
        (Some(ratio), dt_max) => {
            DtPolicy::Proportional { dt0, ratio, dt_max: dt_max.unwrap_or(f64::MAX) }
        }
        (None, Some(_)) => {
            bad.push("dt_max needs dt_ratio".into());
            DtPolicy::Fixed(dt0)
        }
    };
    let dt_ok = match c.dt {
        DtPolicy::Fixed(dt) => dt > 0.0 && dt.is_finite(),
        DtPolicy::Proportional { dt0, ratio, dt_max } => dt0 > 0.0 && ratio > 0.0 && dt_max >= dt0,
    };
    if !dt_ok {
        bad.push(format!("invalid time step: dt > 0, dt_ratio > 0 and dt_max >= dt required ({:?})", c.dt));
    }
    c.t_end = raw.t_end.unwrap_or(c.t_end);
    if !(c.t_end > 0.0) || !c.t_end.is_finite() {
        bad.push(format!("t_end must be positive (got {})", c.t_end));
    }

    c.s0 = raw.s0.unwrap_or(c.s0);
    if !(c.s0 > 0.0) {
        bad.push(format!("s0 must be positive (got {})", c.s0));
    }
    c.alpha0 = raw.alpha0.unwrap_or(c.alpha0);
    c.delta = raw.delta.unwrap_or(c.delta);
    if !(c.delta >= 0.0) {
        bad.push(format!("delta must be >= 0 (got {})", c.delta));
    }
    c.seed = raw.seed.unwrap_or(c.seed);
    c.planar = raw.planar.unwrap_or(c.planar);
    c.kappa = raw.kappa.unwrap_or(c.kappa);
    c.lambda = raw.lambda.unwrap_or(c.lambda);
    c.r1 = raw.r1.unwrap_or(c.r1);
    c.sign = raw.sign.unwrap_or(c.sign);
    if c.sign.abs() != 1.0 {
        bad.push(format!("sign must be 1 or -1 (got {})", c.sign));
    }
    c.snapshot = raw.snapshot;

    c.initial = match raw.family.as_deref() {
        None | Some("harmonic") => InitialData::Harmonic,
        Some("perturbed") => InitialData::Perturbed,
        Some("snapshot") => match &c.snapshot {
            Some(p) => InitialData::Snapshot(p.clone()),
            None => {
                bad.push("family = \"snapshot\" needs the snapshot key".into());
                InitialData::Harmonic
            }
        },
        Some(other) => match TailKind::parse(other) {
            Ok(kind) => InitialData::Tail(kind),
            Err(_) => {
                bad.push(format!(
                    "unknown family {other:?} (harmonic, perturbed, snapshot, none, log_drift, ln_ln_oscillation, mixed)"
                ));
                InitialData::Harmonic
            }
        },
    };
    if let InitialData::Tail(_) = c.initial {
        if c.m != 2 {
            bad.push(format!("tail families need m = 2 (got {})", c.m));
        }
        if !(c.r1 >= std::f64::consts::E) {
            bad.push(format!("r1 must be >= e (got {})", c.r1));
        }
    }
    let planar_data = match c.initial {
        InitialData::Harmonic => c.alpha0 == 0.0,
        InitialData::Perturbed => c.planar && c.alpha0 == 0.0,
        InitialData::Tail(_) => true,
        InitialData::Snapshot(_) => true,
    };
    if c.scheme == Scheme::ScalarBeta {
        if c.a.im != 0.0 {
            bad.push("scheme = \"scalar\" requires a2 = 0".into());
        }
        if !planar_data {
            bad.push("scheme = \"scalar\" requires great-circle data (alpha0 = 0, planar = true)".into());
        }
    }
    if c.planar && c.alpha0 != 0.0 {
        bad.push("planar = true requires alpha0 = 0".into());
    }

    if let Some(k) = raw.output_every {
        if k < 1 {
            bad.push(format!("output_every must be >= 1 (got {k})"));
        } else {
            c.output_every = k as usize;
        }
    }
    if let Some(k) = raw.snapshot_every {
        if k < 1 {
            bad.push(format!("snapshot_every must be >= 1 (got {k})"));
        } else {
            c.snapshot_every = Some(k as usize);
        }
    }
    c.diagnostics = raw.diagnostics.unwrap_or(c.diagnostics);
    c.fit_scope = match (raw.fit_scope.as_deref(), &c.initial) {
        (None, InitialData::Tail(_)) => FitScope::Bump,
        (None, _) | (Some("global"), _) => FitScope::Global,
        (Some("bump"), _) => FitScope::Bump,
        (Some(other), _) => {
            bad.push(format!("fit_scope must be \"global\" or \"bump\" (got {other:?})"));
            FitScope::Global
        }
    };

    c.t_min = raw.t_min.unwrap_or(c.t_min);
    c.t_max = raw.t_max.unwrap_or(c.t_max);
    if !(c.t_min > 0.0) || !(c.t_max > c.t_min) || !c.t_max.is_finite() {
        bad.push(format!("need 0 < t_min < t_max (got {} and {})", c.t_min, c.t_max));
    }
    if let Some(k) = raw.t_points {
        if k < 2 {
            bad.push(format!("t_points must be >= 2 (got {k})"));
        } else {
            c.t_points = k as usize;
        }
    }

    match raw.sweep_mode.as_deref() {
        None | Some("simulate") => c.sweep_mode = SweepMode::Simulate,
        Some("predict") => c.sweep_mode = SweepMode::Predict,
        Some(other) => bad.push(format!("sweep_mode must be \"simulate\" or \"predict\" (got {other:?})")),
    }
    c.sweep_kappa = raw.sweep_kappa.unwrap_or_default();
    c.sweep_delta = raw.sweep_delta.unwrap_or_default();
    c.sweep_seed = raw.sweep_seed.unwrap_or_default();
    if c.sweep_kappa.iter().chain(&c.sweep_delta).any(|x| !x.is_finite()) {
        bad.push("sweep values must be finite".into());
    }
    if c.sweep_delta.iter().any(|d| *d < 0.0) {
        bad.push("sweep_delta values must be >= 0".into());
    }
    if let Some(dir) = raw.out_dir {
        c.out_dir = dir;
    }

    if bad.is_empty() {
        Ok(c)
    } else {
        Err(Error::Config(bad.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse_config("m = 2\na1 = 1.0\na2 = 0.0\n").unwrap();
        assert_eq!(c.m, 2);
        assert_eq!(c.a, Complex64::new(1.0, 0.0));
        assert_eq!(c.n, 801);
        assert_eq!(c.initial, InitialData::Harmonic);
        assert!(!c.grid_explicit);
        assert!(parse_config("").is_ok());
    }

    #[test]
    fn zero_a_is_rejected() {
        let e = parse_config("a1 = 0.0\na2 = 0.0\n").unwrap_err();
        assert!(e.to_string().contains("a must be nonzero"), "{e}");
    }

    #[test]
    fn negative_dissipation_is_rejected() {
        let e = parse_config("a1 = -1.0\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        assert!(e.to_string().contains("Re a must be >= 0"));
    }

    #[test]
    fn violations_are_listed_together() {
        let e = parse_config("m = 0\nn = 3\nt_end = -1\nsign = 2\n").unwrap_err();
        let s = e.to_string();
        for needle in ["m must be", "at least 16 nodes", "t_end", "sign"] {
            assert!(s.contains(needle), "{needle} missing from {s}");
        }
    }

    #[test]
    fn unknown_keys_report_their_line() {
        match parse_config("m = 2\n\nfoo = 1\n") {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("foo"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        match parse_config("m = 2\nt_end = \n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn families_and_schemes() {
        let c = parse_config("family = \"log_drift\"\nkappa = -0.8\nscheme = \"scalar\"\n").unwrap();
        assert_eq!(c.initial, InitialData::Tail(TailKind::LogDrift));
        assert_eq!(c.tail_family(TailKind::LogDrift).kappa, -0.8);
        assert_eq!(c.fit_scope, FitScope::Bump);
        assert_eq!(parse_config("").unwrap().fit_scope, FitScope::Global);
        assert!(parse_config("fit_scope = \"wide\"\n").is_err());
        assert!(parse_config("family = \"log_drift\"\nm = 3\n").is_err());
        assert!(parse_config("scheme = \"scalar\"\na2 = 1.0\n").is_err());
        assert!(parse_config("family = \"snapshot\"\n").is_err());
        assert!(parse_config("family = \"spiral\"\n").is_err());
    }

    #[test]
    fn dt_policies() {
        let c = parse_config("dt = 0.01\ndt_ratio = 0.1\ndt_max = 1.0\n").unwrap();
        assert_eq!(c.dt, DtPolicy::Proportional { dt0: 0.01, ratio: 0.1, dt_max: 1.0 });
        assert!(parse_config("dt_max = 1.0\n").is_err());
        assert!(parse_config("dt = 0.0\n").is_err());
    }

    #[test]
    fn time_grid_is_log_spaced() {
        let c = parse_config("t_min = 1.0\nt_max = 100.0\nt_points = 3\n").unwrap();
        let t = c.t_grid();
        assert!((t[1] - 10.0).abs() < 1e-12 && (t[2] - 100.0).abs() < 1e-12);
    }
}
