//! Parameter sweeps over one cycle parameter, with CSV output.

use std::fmt;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::propagators::{evolve, propagator, ClosedFormVariant, PropagatorMode};
use crate::spin::{initial_state, CycleParams};
use crate::squeezing::{l1_coherence, xi_closed_form, xi_closed_form_with_free, xi_general};
use crate::thermo::{
    energetics_cf, energetics_closed_with, energetics_trace, EnergyBook, Regime,
};

pub const CSV_HEADER: &str = "swept_value,eps_a,eps_b,beta_a,beta_b,kappa,omega,tau,W,Q_H,Q_C,Sigma,eta,power,xi_general,xi_closed,coherence_l1,regime,resid_closed,resid_cf";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Tau,
    Kappa,
    Omega,
    /// `eps_b / eps_a`, with `eps_a` held fixed.
    EpsRatio,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Tau => "tau",
            SweepVariable::Kappa => "kappa",
            SweepVariable::Omega => "omega",
            SweepVariable::EpsRatio => "eps_ratio",
        }
    }

    /// `base` with this variable set to `value`.
    pub fn apply(self, base: &CycleParams, value: f64) -> CycleParams {
        let mut p = *base;
        match self {
            SweepVariable::Tau => p.tau = value,
            SweepVariable::Kappa => p.kappa = value,
            SweepVariable::Omega => p.omega = value,
            SweepVariable::EpsRatio => p.eps_b = value * p.eps_a,
        }
        p
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(SweepVariable::Tau),
            "kappa" => Ok(SweepVariable::Kappa),
            "omega" => Ok(SweepVariable::Omega),
            "eps_ratio" => Ok(SweepVariable::EpsRatio),
            _ => Err(Error::invalid(format!(
                "unknown sweep variable '{s}' (expected tau, kappa, omega or eps_ratio)"
            ))),
        }
    }
}

/// Which evaluation routes a sweep runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Routes {
    pub trace: bool,
    pub closed: bool,
    pub cf: bool,
}

impl Default for Routes {
    fn default() -> Self {
        Routes { trace: true, closed: true, cf: true }
    }
}

impl FromStr for Routes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut r = Routes { trace: false, closed: false, cf: false };
        for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match part {
                "trace" => r.trace = true,
                "closed" => r.closed = true,
                "cf" => r.cf = true,
                _ => {
                    return Err(Error::invalid(format!(
                        "unknown route '{part}' (expected trace, closed, cf)"
                    )))
                }
            }
        }
        if !(r.trace || r.closed || r.cf) {
            return Err(Error::invalid("at least one route is required"));
        }
        Ok(r)
    }
}

impl fmt::Display for Routes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.trace, "trace"), (self.closed, "closed"), (self.cf, "cf")]
            .iter()
            .filter(|(on, _)| *on)
            .map(|(_, n)| *n)
            .collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: CycleParams,
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    /// Number of grid points; `1` is accepted only with `start == stop`.
    pub points: usize,
    pub mode: PropagatorMode,
    pub routes: Routes,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::invalid("sweep bounds must be finite"));
        }
        match self.points {
            0 => Err(Error::invalid("points must be positive")),
            1 if self.start != self.stop => {
                Err(Error::invalid("a single-point sweep needs start == stop"))
            }
            1 => Ok(()),
            _ if self.start >= self.stop => Err(Error::invalid(format!(
                "start ({}) must be below stop ({})",
                self.start, self.stop
            ))),
            _ => Ok(()),
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start + span * i as f64 / last })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub swept_value: f64,
    pub params: CycleParams,
    /// Energetics from the first requested route (trace, then closed, then cf).
    pub book: Option<EnergyBook>,
    pub xi_general: Option<f64>,
    pub xi_closed: Option<f64>,
    pub coherence_l1: Option<f64>,
    /// Largest `|trace - closed|` over `W, Q_H, Q_C, Sigma`.
    pub resid_closed: Option<f64>,
    /// Largest `|trace - cf| / max(1, |trace|)` over the same four.
    pub resid_cf: Option<f64>,
    pub failures: Vec<String>,
}

impl SweepRow {
    pub fn regime_label(&self) -> &'static str {
        match &self.book {
            Some(b) => b.regime.as_str(),
            None => "Error",
        }
    }

    pub fn failed(&self) -> bool {
        !self.failures.is_empty()
    }
}

fn closed_mode(mode: PropagatorMode) -> bool {
    mode.includes_free()
}

/// Evaluates one grid point; module errors are recorded on the row.
pub fn evaluate_point(spec: &SweepSpec, value: f64) -> SweepRow {
    let p = spec.variable.apply(&spec.base, value);
    let mut row = SweepRow {
        swept_value: value,
        params: p,
        book: None,
        xi_general: None,
        xi_closed: None,
        coherence_l1: None,
        resid_closed: None,
        resid_cf: None,
        failures: Vec::new(),
    };
    let mut note = |route: &str, e: Error| row.failures.push(format!("{route}: {e}"));

    let trace = spec.routes.trace.then(|| energetics_trace(&p, spec.mode));
    let closed = spec
        .routes
        .closed
        .then(|| energetics_closed_with(&p, closed_mode(spec.mode), ClosedFormVariant::Exact));
    let cf = spec.routes.cf.then(|| energetics_cf(&p, spec.mode));

    let mut keep = |route: &str, r: Option<Result<EnergyBook>>| match r {
        Some(Ok(b)) => Some(b),
        Some(Err(e)) => {
            note(route, e);
            None
        }
        None => None,
    };
    let trace = keep("trace", trace);
    let closed = keep("closed", closed);
    let cf = keep("cf", cf);

    if let Some(t) = &trace {
        row.resid_closed = closed.as_ref().map(|c| t.max_abs_diff(c));
        row.resid_cf = cf.as_ref().map(|c| t.max_scaled_diff(c));
    }
    let book = trace.or(closed).or(cf);

    let state: Result<CMat> = initial_state(&p)
        .and_then(|rho0| Ok((rho0, propagator(&p, spec.mode)?)))
        .and_then(|(rho0, u)| evolve(&rho0, &u));
    match state {
        Ok(rho) => {
            row.coherence_l1 = Some(l1_coherence(&rho));
            match xi_general(&rho) {
                Ok(r) => row.xi_general = Some(r.xi),
                Err(e) => row.failures.push(format!("xi_general: {e}")),
            }
        }
        Err(e) => row.failures.push(format!("state: {e}")),
    }
    let xi_closed = if closed_mode(spec.mode) {
        xi_closed_form_with_free(&p)
    } else {
        xi_closed_form(&p, ClosedFormVariant::Exact)
    };
    match xi_closed {
        Ok(x) => row.xi_closed = Some(x),
        Err(e) => row.failures.push(format!("xi_closed: {e}")),
    }
    row.book = book;
    row
}

/// Runs the sweep on `workers` threads (`0` picks the rayon default).
/// Rows come back in grid order whatever the pool width.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.base.validate()?;
    let grid = spec.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| grid.par_iter().map(|&v| evaluate_point(spec, v)).collect()))
}

fn num(out: &mut String, x: Option<f64>) {
    if let Some(x) = x {
        // adding +0 turns -0 into +0
        let _ = write!(out, "{:.16e}", x + 0.0);
    }
}

pub fn format_row(row: &SweepRow) -> String {
    let mut s = String::with_capacity(400);
    let p = &row.params;
    for x in [row.swept_value, p.eps_a, p.eps_b, p.beta_a, p.beta_b, p.kappa, p.omega, p.tau] {
        num(&mut s, Some(x));
        s.push(',');
    }
    let b = row.book.as_ref();
    for x in [
        b.map(|b| b.w),
        b.map(|b| b.q_hot),
        b.map(|b| b.q_cold),
        b.map(|b| b.sigma),
        b.and_then(|b| b.eta),
        b.map(|b| b.power),
        row.xi_general,
        row.xi_closed,
        row.coherence_l1,
    ] {
        num(&mut s, x);
        s.push(',');
    }
    s.push_str(row.regime_label());
    s.push(',');
    num(&mut s, row.resid_closed);
    s.push(',');
    num(&mut s, row.resid_cf);
    s
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 400 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format_row(r));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(to_csv(rows).as_bytes())?;
    f.flush()
}

/// Counts and extremes for the end-of-run summary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepSummary {
    pub rows: usize,
    pub failures: usize,
    pub engine: usize,
    pub refrigerator: usize,
    pub accelerator: usize,
    pub other: usize,
    pub max_eta: Option<f64>,
    pub min_xi: Option<f64>,
    pub max_resid_closed: Option<f64>,
    pub max_resid_cf: Option<f64>,
}

impl SweepSummary {
    pub fn of(rows: &[SweepRow]) -> Self {
        let max_opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let mut s = SweepSummary { rows: rows.len(), ..Default::default() };
        for r in rows {
            if r.failed() {
                s.failures += 1;
            }
            match r.book.map(|b| b.regime) {
                Some(Regime::Engine) => s.engine += 1,
                Some(Regime::Refrigerator) => s.refrigerator += 1,
                Some(Regime::Accelerator) => s.accelerator += 1,
                Some(Regime::Other) => s.other += 1,
                None => {}
            }
            s.max_eta = max_opt(s.max_eta, r.book.and_then(|b| b.eta));
            s.min_xi = match (s.min_xi, r.xi_general) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            s.max_resid_closed = max_opt(s.max_resid_closed, r.resid_closed);
            s.max_resid_cf = max_opt(s.max_resid_cf, r.resid_cf);
        }
        s
    }
}

impl fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6e}"));
        write!(
            f,
            "rows {} | failed {} | engine {} refrigerator {} accelerator {} other {} | max eta {} | min xi {} | resid closed {} cf {}",
            self.rows,
            self.failures,
            self.engine,
            self.refrigerator,
            self.accelerator,
            self.other,
            opt(self.max_eta),
            opt(self.min_xi),
            opt(self.max_resid_closed),
            opt(self.max_resid_cf),
        )
    }
}

/// One curve of a figure preset.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    /// Empty for single-series presets; otherwise used as a file-name infix.
    pub label: String,
    pub spec: SweepSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigurePreset {
    pub name: &'static str,
    pub description: &'static str,
    pub series: Vec<Series>,
}

pub const PRESET_NAMES: [&str; 9] =
    ["fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5", "fig9", "fig10"];

const RATIO_RANGE: (f64, f64, usize) = (0.05, 2.0, 400);
/// Time axis of the trace presets; covers several oscillation periods.
const TAU_RANGE: (f64, f64, usize) = (0.0, 60.0, 1200);

fn regime_map_params(kappa: f64) -> CycleParams {
    // "Omega = 10 kappa", with tau tied to kappa by the caller
    CycleParams { eps_a: 1.0, eps_b: 1.0, beta_a: 1.0, beta_b: 2.0, kappa, omega: 10.0 * kappa, tau: kappa }
}

fn engine_point(kappa: f64) -> CycleParams {
    CycleParams { eps_a: 1.0, eps_b: 0.6, beta_a: 1.0, beta_b: 2.0, kappa, omega: 0.5, tau: 0.0 }
}

fn spec(base: CycleParams, variable: SweepVariable, range: (f64, f64, usize), mode: PropagatorMode) -> SweepSpec {
    SweepSpec {
        base,
        variable,
        start: range.0,
        stop: range.1,
        points: range.2,
        mode,
        routes: Routes::default(),
        output: None,
    }
}

fn kappa_label(kappa: f64) -> String {
    format!("kappa{kappa:.2}")
}

fn both_modes(base: CycleParams) -> Vec<Series> {
    [PropagatorMode::Full, PropagatorMode::InteractionOnly]
        .into_iter()
        .map(|mode| Series {
            label: mode.as_str().to_string(),
            spec: spec(base, SweepVariable::EpsRatio, RATIO_RANGE, mode),
        })
        .collect()
}

/// Parameter sets of the named figure presets.
///
/// - `fig2a`: regime map over `eps_b/eps_a`, with kappa = 1, Omega = 10 kappa, tau = kappa.
/// - `fig2b`: squeezing over `eps_b/eps_a` for kappa in {0.1, 0.12}; "Omega = 10 kappa,
///   tau = 10 kappa" is applied per series, so each curve has its own
///   Omega and tau.
/// - `fig3a` .. `fig5`: time traces at eps_b = 0.6, Omega = 0.5 for kappa in
///   {0.10, 0.12}, tau in [0, 60] on 1200 points.
/// - `fig9`: squeezing over `eps_b/eps_a` at kappa = 0.1, Omega = 1, tau = 0.1,
///   with and without the free Hamiltonian in the stroke.
/// - `fig10`: the `fig2a` parameters, with and without the free Hamiltonian.
pub fn figure_preset(name: &str) -> Result<FigurePreset> {
    let interaction = PropagatorMode::InteractionOnly;
    let time_traces = |name, description| FigurePreset {
        name,
        description,
        series: [0.10, 0.12]
            .into_iter()
            .map(|k| Series {
                label: kappa_label(k),
                spec: spec(engine_point(k), SweepVariable::Tau, TAU_RANGE, interaction),
            })
            .collect(),
    };
    Ok(match name {
        "fig2a" => FigurePreset {
            name: "fig2a",
            description: "regimes of operation versus eps_b/eps_a",
            series: vec![Series {
                label: String::new(),
                spec: spec(regime_map_params(1.0), SweepVariable::EpsRatio, RATIO_RANGE, interaction),
            }],
        },
        "fig2b" => FigurePreset {
            name: "fig2b",
            description: "squeezing versus eps_b/eps_a",
            series: [0.1, 0.12]
                .into_iter()
                .map(|k| {
                    let base = CycleParams { tau: 10.0 * k, ..regime_map_params(k) };
                    Series {
                        label: kappa_label(k),
                        spec: spec(base, SweepVariable::EpsRatio, RATIO_RANGE, interaction),
                    }
                })
                .collect(),
        },
        "fig3a" => time_traces("fig3a", "squeezing versus interaction time"),
        "fig3b" => time_traces("fig3b", "l1 coherence versus interaction time"),
        "fig4a" => time_traces("fig4a", "efficiency versus interaction time"),
        "fig4b" => time_traces("fig4b", "power versus interaction time"),
        "fig5" => time_traces("fig5", "entropy production versus interaction time"),
        "fig9" => FigurePreset {
            name: "fig9",
            description: "squeezing with and without the free Hamiltonian",
            series: both_modes(CycleParams { tau: 0.1, ..regime_map_params(0.1) }),
        },
        "fig10" => FigurePreset {
            name: "fig10",
            description: "energetics with and without the free Hamiltonian",
            series: both_modes(regime_map_params(1.0)),
        },
        _ => {
            return Err(Error::invalid(format!(
                "unknown preset '{name}'; valid presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}

/// Output path of a series: `out` itself for a lone unlabeled series,
/// otherwise `<stem>.<label>.<ext>` next to it.
pub fn series_path(out: &Path, label: &str) -> PathBuf {
    if label.is_empty() {
        return out.to_path_buf();
    }
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.{label}.{ext}"),
        None => format!("{stem}.{label}"),
    };
    out.with_file_name(name)
}

/// A gnuplot script plotting every numeric column of the given CSV files
/// against the swept value.
pub fn plot_script(csv_paths: &[PathBuf], variable: SweepVariable) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key autotitle columnhead\n");
    let _ = writeln!(s, "set xlabel '{variable}'");
    let columns = [("W", 9), ("Q_H", 10), ("Q_C", 11), ("Sigma", 12), ("eta", 13), ("power", 14), ("xi_general", 15), ("coherence_l1", 17)];
    for (name, col) in columns {
        let _ = writeln!(s, "set ylabel '{name}'");
        let curves: Vec<String> = csv_paths
            .iter()
            .map(|p| format!("'{}' using 1:{col} with lines title '{}'", p.display(), p.file_name().and_then(|n| n.to_str()).unwrap_or("")))
            .collect();
        let _ = writeln!(s, "plot {}\npause -1", curves.join(", "));
    }
    s
}
