//! Run orchestration: solve a [`ProblemConfig`] in one of several modes and export
//! the snapshots as CSV or JSON.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{InitialData, ProblemConfig};
use crate::error::{Error, Result};
use crate::grid::{Analytic, C1Function, GridFunction};
use crate::hamiltonian::{localization_radii, max_step_delta1, Convexity, HamiltonianModel, Radii};
use crate::operator::{hopf_lax, iterated_operator, lax_oleinik_step, variational_step, wavefront, IterationSchedule, OperatorConfig, WavefrontRecord};
use crate::reference::{solve_lax_friedrichs, sup_distance, FdConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// One variational step from s to each output time.
    Variational,
    /// Iterated variational operator with step δ between outputs.
    Iterated,
    HopfLax,
    LaxOleinik,
    /// Lax-Friedrichs reference.
    ViscosityFd,
    /// Characteristics plus the selected (variational) section.
    Wavefront,
}

impl RunMode {
    pub const ALL: [RunMode; 6] = [Self::Variational, Self::Iterated, Self::HopfLax, Self::LaxOleinik, Self::ViscosityFd, Self::Wavefront];

    pub fn name(self) -> &'static str {
        match self {
            Self::Variational => "variational",
            Self::Iterated => "iterated",
            Self::HopfLax => "hopf_lax",
            Self::LaxOleinik => "lax_oleinik",
            Self::ViscosityFd => "viscosity_fd",
            Self::Wavefront => "wavefront",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|m| m.name()).collect();
            Error::InvalidArgument(format!("unknown mode '{s}'; available: {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidArgument(format!("unknown format '{other}'; available: csv, json"))),
        }
    }
}

/// Solution values on a uniform grid at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub origin: f64,
    pub h: f64,
    pub lip: f64,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn from_grid(t: f64, g: &GridFunction) -> Self {
        Self { t, origin: g.origin(), h: g.step(), lip: g.lip(), values: g.values().to_vec() }
    }

    pub fn to_grid(&self) -> Result<GridFunction> {
        GridFunction::new(self.origin, self.h, self.values.clone(), self.lip)
    }
}

/// Effective constants of a run; enough to recompute every theoretical bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub mode: RunMode,
    pub model: String,
    #[serde(rename = "C")]
    pub constant_c: f64,
    /// Lipschitz constant of the initial data.
    #[serde(rename = "L")]
    pub lip: f64,
    pub integrable: bool,
    pub convexity: Convexity,
    pub s: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub domain: (f64, f64),
    pub h: f64,
    /// ln(3/2)/C.
    pub delta1: f64,
    /// ln(3/2)/(C(1+ε)), the step limit of the cut-off model.
    pub delta1_cutoff: f64,
    /// Localization radii of a single step s → T.
    pub radii: Radii,
    pub cutoff_eps: f64,
    /// 4·L·h.
    pub grid_slack: f64,
    /// Step of the iterated schedule, when one was used.
    pub schedule_delta: Option<f64>,
    pub operator: OperatorConfig,
    pub fd: Option<FdConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub metadata: RunMetadata,
    pub snapshots: Vec<Snapshot>,
    /// Characteristic records (wavefront mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavefront: Option<Vec<WavefrontRecord>>,
}

impl RunResult {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_mode(h: &HamiltonianModel, mode: RunMode) -> Result<()> {
    match mode {
        RunMode::HopfLax if !(h.is_integrable() && matches!(h.convexity(), Convexity::Convex(_))) => Err(Error::Incompatible(format!(
            "mode hopf_lax needs a convex Hamiltonian depending on p only; '{}' is {}",
            h.name(),
            describe(h)
        ))),
        RunMode::LaxOleinik if matches!(h.convexity(), Convexity::None) => Err(Error::Incompatible(format!(
            "mode lax_oleinik needs a convex or concave Hamiltonian; '{}' is {}",
            h.name(),
            describe(h)
        ))),
        _ => Ok(()),
    }
}

fn describe(h: &HamiltonianModel) -> String {
    let shape = match h.convexity() {
        Convexity::Convex(_) => "convex",
        Convexity::Concave(_) => "concave",
        Convexity::None => "neither convex nor concave",
    };
    let dep = if h.is_integrable() { "a function of p only" } else { "(t, q)-dependent" };
    format!("{shape} and {dep}")
}

/// Uniform steps of length at most δ from `a` to `b`.
fn segment(a: f64, b: f64, delta: f64) -> Result<IterationSchedule> {
    IterationSchedule::uniform(a, b, delta)
}

/// Solves the problem in the given mode, returning a snapshot at every output time.
pub fn run_solve(cfg: &ProblemConfig, mode: RunMode) -> Result<RunResult> {
    let h = cfg.hamiltonian()?;
    check_mode(&h, mode)?;
    let init = cfg.initial()?;
    let (s, horizon) = (cfg.time.s, cfg.time.horizon);
    let op = &cfg.operator;
    let u0 = init.to_grid(cfg.grid.domain, cfg.grid.h)?;
    let outputs = cfg.outputs();
    let c = h.constant_c();
    let lip = init.lip();
    let delta1_cutoff = max_step_delta1(c * (1.0 + op.cutoff_eps))?;
    let schedule_delta = match mode {
        RunMode::Iterated => Some(cfg.time.schedule.first().copied().unwrap_or(delta1_cutoff)),
        RunMode::LaxOleinik => cfg.time.schedule.first().copied(),
        _ => None,
    };

    let mut snapshots = Vec::with_capacity(outputs.len());
    let mut records = None;
    match mode {
        RunMode::Variational => {
            for &t in &outputs {
                snapshots.push(Snapshot::from_grid(t, &variational_step(&h, &u0, s, t, op)?));
            }
        }
        RunMode::HopfLax => {
            for &t in &outputs {
                snapshots.push(Snapshot::from_grid(t, &hopf_lax(&h, &u0, s, t)?));
            }
        }
        RunMode::Iterated | RunMode::LaxOleinik => {
            let mut u = u0.clone();
            let mut prev = s;
            for &t in &outputs {
                if t > prev {
                    match (mode, schedule_delta) {
                        (RunMode::Iterated, Some(d)) => u = iterated_operator(&h, &u, &segment(prev, t, d)?, op)?,
                        (_, Some(d)) => {
                            for w in segment(prev, t, d)?.times().windows(2) {
                                u = lax_oleinik_step(&h, &u, w[0], w[1], op)?;
                            }
                        }
                        _ => u = lax_oleinik_step(&h, &u, prev, t, op)?,
                    }
                }
                snapshots.push(Snapshot::from_grid(t, &u));
                prev = t;
            }
        }
        RunMode::ViscosityFd => {
            let fd = cfg.fd.config();
            let fd_h = cfg.fd.h.unwrap_or(cfg.grid.h);
            let fd_domain = cfg.fd.domain.unwrap_or(cfg.grid.domain);
            let mut u = init.to_grid(fd_domain, fd_h)?;
            let mut prev = s;
            for &t in &outputs {
                u = solve_lax_friedrichs(&h, &u, prev, t, &fd)?;
                snapshots.push(Snapshot::from_grid(t, &u));
                prev = t;
            }
        }
        RunMode::Wavefront => {
            let du: Box<dyn C1Function> = match &init {
                InitialData::Named(ic) if ic.is_smooth() => {
                    let (a, b) = (ic.clone(), ic.clone());
                    Box::new(Analytic::new(move |q| a.eval(q), move |q| b.deriv(q)))
                }
                _ => Box::new(u0.mollified(op.mollify_width)),
            };
            let starts: Vec<f64> = u0.nodes().collect();
            let w = wavefront(&h, &u0, du.as_ref(), s, &outputs, &starts, op)?;
            for (t, g) in w.times.iter().zip(&w.selected) {
                snapshots.push(Snapshot::from_grid(*t, g));
            }
            records = Some(w.records.into_iter().flatten().collect());
        }
    }

    let metadata = RunMetadata {
        mode,
        model: h.name().to_string(),
        constant_c: c,
        lip,
        integrable: h.is_integrable(),
        convexity: h.convexity(),
        s,
        horizon,
        domain: cfg.grid.domain,
        h: cfg.grid.h,
        delta1: max_step_delta1(c)?,
        delta1_cutoff,
        radii: localization_radii(c, lip, s, horizon, h.is_integrable())?,
        cutoff_eps: op.cutoff_eps,
        grid_slack: 4.0 * lip * cfg.grid.h,
        schedule_delta,
        operator: op.clone(),
        fd: (mode == RunMode::ViscosityFd).then(|| cfg.fd.config()),
    };
    Ok(RunResult { metadata, snapshots, wavefront: records })
}

/// Distance between a run and the Lax-Friedrichs reference at one output time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub t: f64,
    pub window: (f64, f64),
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub mode: RunMode,
    pub reference: RunMode,
    pub rows: Vec<CompareRow>,
}

/// Runs `mode` and the finite-difference reference, and reports their sup distance
/// on the overlap of the two output domains at each output time.
pub fn run_compare(cfg: &ProblemConfig, mode: RunMode) -> Result<CompareReport> {
    let a = run_solve(cfg, mode)?;
    let b = run_solve(cfg, RunMode::ViscosityFd)?;
    let mut rows = Vec::with_capacity(a.snapshots.len());
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        let (gx, gy) = (x.to_grid()?, y.to_grid()?);
        let (dx, dy) = (gx.domain(), gy.domain());
        let window = (dx.0.max(dy.0), dx.1.min(dy.1));
        if !(window.1 > window.0) {
            return Err(Error::EmptyOverlap(window.0, window.1));
        }
        rows.push(CompareRow { t: x.t, window, distance: sup_distance(&gx, &gy, window)? });
    }
    Ok(CompareReport { mode, reference: RunMode::ViscosityFd, rows })
}

/// Writes the CSV form: `t,q,value` per grid node, or `t,q,value,branch,P` per
/// characteristic for wavefront runs.
pub fn write_csv(result: &RunResult, mut w: impl Write) -> Result<()> {
    match &result.wavefront {
        Some(records) => {
            writeln!(w, "t,q,value,branch,P")?;
            for r in records {
                writeln!(w, "{},{},{},{},{}", r.t, r.q, r.value, r.branch, r.p)?;
            }
        }
        None => {
            writeln!(w, "t,q,value")?;
            for snap in &result.snapshots {
                for (i, v) in snap.values.iter().enumerate() {
                    writeln!(w, "{},{},{}", snap.t, snap.origin + snap.h * i as f64, v)?;
                }
            }
        }
    }
    Ok(())
}

pub fn to_json(result: &RunResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(result)?)
}

/// Writes the result to `path`; output depends only on the result.
pub fn export(result: &RunResult, format: ExportFormat, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        ExportFormat::Csv => write_csv(result, &mut buf)?,
        ExportFormat::Json => {
            buf.extend_from_slice(to_json(result)?.as_bytes());
            buf.push(b'\n');
        }
    }
    std::fs::write(path, buf)?;
    Ok(())
}
