//! Run configuration files.
//!
//! Cycle parameters are top-level keys, the sweep lives in a `[sweep]` table:
//!
//! ```toml
//! eps_a = 1.0
//! eps_b = 0.6
//! beta_a = 1.0
//! beta_b = 2.0
//! kappa = 0.1
//! omega = 0.5
//! tau = 0.0
//!
//! [sweep]
//! variable = "tau"
//! start = 0.0
//! stop = 60.0
//! points = 1200
//! mode = "interaction"
//! routes = "trace,closed,cf"
//! output = "fig3.csv"
//! ```
//!
//! Any value may be left out of the file and supplied as an override instead.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::propagators::PropagatorMode;
use crate::spin::CycleParams;
use crate::sweep::{Routes, SweepSpec, SweepVariable};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamValues {
    pub eps_a: Option<f64>,
    pub eps_b: Option<f64>,
    pub beta_a: Option<f64>,
    pub beta_b: Option<f64>,
    pub kappa: Option<f64>,
    pub omega: Option<f64>,
    pub tau: Option<f64>,
}

impl ParamValues {
    /// Values set in `other` win.
    pub fn overlay(&mut self, other: &ParamValues) {
        let pairs = [
            (&mut self.eps_a, other.eps_a),
            (&mut self.eps_b, other.eps_b),
            (&mut self.beta_a, other.beta_a),
            (&mut self.beta_b, other.beta_b),
            (&mut self.kappa, other.kappa),
            (&mut self.omega, other.omega),
            (&mut self.tau, other.tau),
        ];
        for (slot, v) in pairs {
            if v.is_some() {
                *slot = v;
            }
        }
    }

    /// Writes the set values into `p`, leaving the swept variable alone.
    pub fn apply_to(&self, p: &mut CycleParams, swept: SweepVariable) {
        use SweepVariable as V;
        let pairs = [
            (&mut p.eps_a, self.eps_a, false),
            (&mut p.eps_b, self.eps_b, swept == V::EpsRatio),
            (&mut p.beta_a, self.beta_a, false),
            (&mut p.beta_b, self.beta_b, false),
            (&mut p.kappa, self.kappa, swept == V::Kappa),
            (&mut p.omega, self.omega, swept == V::Omega),
            (&mut p.tau, self.tau, swept == V::Tau),
        ];
        for (slot, v, skip) in pairs {
            if let (Some(v), false) = (v, skip) {
                *slot = v;
            }
        }
    }

    /// The swept variable may be absent; it is overwritten at every grid point.
    fn resolve(&self, swept: SweepVariable) -> Result<CycleParams> {
        let get = |name: &str, v: Option<f64>, skip: bool| match v {
            Some(x) => Ok(x),
            None if skip => Ok(0.0),
            None => Err(Error::invalid(format!("missing parameter '{name}'"))),
        };
        use SweepVariable as V;
        Ok(CycleParams {
            eps_a: get("eps_a", self.eps_a, false)?,
            eps_b: get("eps_b", self.eps_b, swept == V::EpsRatio)?,
            beta_a: get("beta_a", self.beta_a, false)?,
            beta_b: get("beta_b", self.beta_b, false)?,
            kappa: get("kappa", self.kappa, swept == V::Kappa)?,
            omega: get("omega", self.omega, swept == V::Omega)?,
            tau: get("tau", self.tau, swept == V::Tau)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RouteList {
    Joined(String),
    List(Vec<String>),
}

impl RouteList {
    fn parse(&self) -> Result<Routes> {
        match self {
            RouteList::Joined(s) => s.parse(),
            RouteList::List(v) => v.join(",").parse(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: Option<SweepVariable>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub mode: Option<String>,
    pub routes: Option<RouteList>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub eps_a: Option<f64>,
    pub eps_b: Option<f64>,
    pub beta_a: Option<f64>,
    pub beta_b: Option<f64>,
    pub kappa: Option<f64>,
    pub omega: Option<f64>,
    pub tau: Option<f64>,
    #[serde(default)]
    pub sweep: SweepSection,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub params: ParamValues,
    pub mode: Option<PropagatorMode>,
    pub routes: Option<Routes>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn params(&self) -> ParamValues {
        ParamValues {
            eps_a: self.eps_a,
            eps_b: self.eps_b,
            beta_a: self.beta_a,
            beta_b: self.beta_b,
            kappa: self.kappa,
            omega: self.omega,
            tau: self.tau,
        }
    }

    pub fn into_spec(self, over: &Overrides) -> Result<SweepSpec> {
        let mut params = self.params();
        params.overlay(&over.params);
        let s = self.sweep;
        let missing = |k: &str| Error::invalid(format!("missing [sweep] key '{k}'"));
        let variable = s.variable.ok_or_else(|| missing("variable"))?;
        let mode = match (over.mode, s.mode) {
            (Some(m), _) => m,
            (None, Some(m)) => m.parse()?,
            (None, None) => PropagatorMode::InteractionOnly,
        };
        let routes = match (over.routes, s.routes) {
            (Some(r), _) => r,
            (None, Some(r)) => r.parse()?,
            (None, None) => Routes::default(),
        };
        let spec = SweepSpec {
            base: params.resolve(variable)?,
            variable,
            start: s.start.ok_or_else(|| missing("start"))?,
            stop: s.stop.ok_or_else(|| missing("stop"))?,
            points: s.points.ok_or_else(|| missing("points"))?,
            mode,
            routes,
            output: over.output.clone().or(s.output),
        };
        spec.validate()?;
        Ok(spec)
    }
}
