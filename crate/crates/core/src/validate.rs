//! Cross-route consistency suite run by the `validate` subcommand.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::propagators::{
    phase_aligned_diff, propagator_full_closed, propagator_full_closed_with,
    propagator_interaction_closed, propagator_interaction_closed_with, propagator_oracle,
    ClosedFormVariant, PropagatorMode,
};
use crate::spin::{initial_state, CycleParams};
use crate::squeezing::{xi_closed_form, xi_general};
use crate::thermo::{
    characteristic_function, characteristic_function_six_term, energetics_cf,
    energetics_closed_with, energetics_trace,
};

pub const GRID_SEED: u64 = 0x5eed_2024;

/// 500 parameter points: the regime-map line, the time-trace line, the
/// small-gap squeezing line, and 250 seeded random points covering the same
/// ranges.
pub fn validation_grid() -> Vec<CycleParams> {
    let line = |n: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    let regime = CycleParams { eps_a: 1.0, eps_b: 1.0, beta_a: 1.0, beta_b: 2.0, kappa: 1.0, omega: 10.0, tau: 1.0 };
    let engine = CycleParams { eps_a: 1.0, eps_b: 0.6, beta_a: 1.0, beta_b: 2.0, kappa: 0.1, omega: 0.5, tau: 0.0 };
    let small = CycleParams { kappa: 0.1, omega: 1.0, tau: 0.1, ..regime };

    let mut grid = Vec::with_capacity(500);
    grid.extend(line(100, 0.05, 2.0).into_iter().map(|r| CycleParams { eps_b: r, ..regime }));
    grid.extend(line(100, 0.0, 60.0).into_iter().enumerate().map(|(i, tau)| CycleParams {
        kappa: if i % 2 == 0 { 0.1 } else { 0.12 },
        tau,
        ..engine
    }));
    grid.extend(line(50, 0.05, 2.0).into_iter().map(|r| CycleParams { eps_b: r, ..small }));

    let mut rng = ChaCha8Rng::seed_from_u64(GRID_SEED);
    grid.extend((0..250).map(|_| CycleParams {
        eps_a: 1.0,
        eps_b: rng.random_range(0.05..2.0),
        beta_a: 1.0,
        beta_b: rng.random_range(1.2..3.0),
        kappa: rng.random_range(0.0..1.2),
        omega: rng.random_range(0.05..12.0),
        tau: rng.random_range(0.0..60.0),
    }));
    grid
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported only.
    Info,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub limit: f64,
}

impl Check {
    fn gate(name: impl Into<String>, worst: f64, limit: f64) -> Self {
        let status = if worst <= limit { Status::Pass } else { Status::Fail };
        Check { name: name.into(), status, worst, limit }
    }

    fn info(name: impl Into<String>, worst: f64) -> Self {
        Check { name: name.into(), status: Status::Info, worst, limit: f64::NAN }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        };
        if self.limit.is_nan() {
            write!(f, "{tag}  {:<58} {:>12.3e}", self.name, self.worst)
        } else {
            write!(f, "{tag}  {:<58} {:>12.3e} (limit {:.0e})", self.name, self.worst, self.limit)
        }
    }
}

fn fold_max(it: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    it.into_iter().try_fold(0.0f64, |m, x| Ok(m.max(x?)))
}

/// Runs every check on [`validation_grid`].
pub fn run_validation() -> Result<Vec<Check>> {
    let grid = validation_grid();
    let mut out = Vec::new();

    out.push(Check::gate(
        "interaction propagator: closed vs exponential",
        fold_max(grid.iter().map(|p| {
            Ok(propagator_interaction_closed(p)?.max_abs_diff(&propagator_oracle(p, false)?))
        }))?,
        1e-10,
    ));
    out.push(Check::gate(
        "full propagator: closed vs exponential (phase aligned)",
        fold_max(grid.iter().map(|p| {
            Ok(phase_aligned_diff(&propagator_full_closed(p)?, &propagator_oracle(p, true)?))
        }))?,
        1e-10,
    ));

    for mode in [PropagatorMode::InteractionOnly, PropagatorMode::Full] {
        let mut closed = 0.0f64;
        let mut cf = 0.0f64;
        let mut first_law = 0.0f64;
        let mut sigma_min = f64::INFINITY;
        for p in &grid {
            let t = energetics_trace(p, mode)?;
            closed = closed.max(t.max_abs_diff(&energetics_closed_with(p, mode.includes_free(), ClosedFormVariant::Exact)?));
            cf = cf.max(t.max_scaled_diff(&energetics_cf(p, mode)?));
            first_law = first_law.max((t.w + t.q_hot + t.q_cold).abs());
            sigma_min = sigma_min.min(t.sigma);
        }
        out.push(Check::gate(format!("{mode}: energetics closed vs trace"), closed, 1e-9));
        out.push(Check::gate(format!("{mode}: energetics cf vs trace (relative)"), cf, 1e-6));
        out.push(Check::gate(format!("{mode}: |W + Q_H + Q_C|"), first_law, 1e-12));
        out.push(Check::gate(format!("{mode}: -min Sigma"), 0.0 - sigma_min, 1e-12));
    }

    let mut xi_excess = f64::NEG_INFINITY;
    let mut xi_closed = 0.0f64;
    for p in &grid {
        let u = propagator_oracle(p, false)?;
        let rho = crate::propagators::evolve(&initial_state(p)?, &u)?;
        let xi = xi_general(&rho)?.xi;
        xi_excess = xi_excess.max(xi - 1.0);
        xi_closed = xi_closed.max((xi - xi_closed_form(p, ClosedFormVariant::Exact)?).abs());
    }
    out.push(Check::gate("xi - 1", xi_excess, 1e-12));
    out.push(Check::gate("xi: closed form vs general", xi_closed, 1e-8));

    let mut rng = ChaCha8Rng::seed_from_u64(GRID_SEED + 1);
    let norm = fold_max(grid.iter().map(|p| Ok((characteristic_function(p, 0.0, 0.0)? - 1.0).norm())))?;
    out.push(Check::gate("|F(0,0) - 1|", norm, 1e-12));
    let mut cf_forms = 0.0f64;
    for i in 0..100 {
        let p = &grid[(i * 5) % grid.len()];
        let (l, n) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let a = characteristic_function(p, l, n)?;
        let b = characteristic_function_six_term(p, l, n, false, ClosedFormVariant::Exact)?;
        cf_forms = cf_forms.max((a - b).norm());
    }
    out.push(Check::gate("F: operator vs six-term form", cf_forms, 1e-10));

    let half = ClosedFormVariant::HalfSplitting;
    out.push(Check::info(
        "half-splitting interaction propagator vs exponential",
        fold_max(grid.iter().map(|p| {
            Ok(propagator_interaction_closed_with(p, half)?.max_abs_diff(&propagator_oracle(p, false)?))
        }))?,
    ));
    out.push(Check::info(
        "half-splitting full propagator vs exponential (phase aligned)",
        fold_max(grid.iter().map(|p| {
            Ok(phase_aligned_diff(&propagator_full_closed_with(p, half)?, &propagator_oracle(p, true)?))
        }))?,
    ));
    out.push(Check::info(
        "half-splitting xi closed form vs general",
        fold_max(grid.iter().map(|p| {
            let rho = crate::propagators::evolve(&initial_state(p)?, &propagator_oracle(p, false)?)?;
            Ok((xi_general(&rho)?.xi - xi_closed_form(p, half)?).abs())
        }))?,
    ));
    out.push(Check::info(
        "half-splitting energetics vs trace",
        fold_max(grid.iter().map(|p| {
            let t = energetics_trace(p, PropagatorMode::InteractionOnly)?;
            Ok(t.max_abs_diff(&energetics_closed_with(p, false, half)?))
        }))?,
    ));
    Ok(out)
}
