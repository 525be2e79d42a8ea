//! Cycle energetics: work, heats, entropy production, efficiency and power.
//!
//! Three independent routes are implemented:
//! - trace formulas on the evolved state,
//! - closed forms in the initial populations and the two block transition
//!   probabilities,
//! - finite-difference moments of the two-point-measurement characteristic
//!   function.
//!
//! Sign conventions: `W = Tr[H_0 (rho_tau - rho_0)]` (negative when work is
//! extracted), `Q_H = -Tr[(H_a ⊗ 1)(rho_tau - rho_0)]` is the energy the hot
//! qubit gives away in the stroke and later recovers from its bath, likewise
//! `Q_C` for the cold one, so `W + Q_H + Q_C = 0`. Entropy production is
//! `(beta_b - beta_a) Q_H + beta_b W`, which equals `-beta_a Q_H - beta_b Q_C`.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::propagators::{
    evolve, propagator, BlockParams, ClosedFormVariant, PropagatorMode,
};
use crate::spin::{initial_state, local_parts, CycleParams, EE, EG, GE, GG};

/// Magnitudes below this count as zero when reading off sign patterns.
pub const REGIME_DEADBAND: f64 = 1e-12;
/// Largest `|W + Q_H + Q_C|` accepted by [`classify_regime`].
pub const FIRST_LAW_TOL: f64 = 1e-10;
/// Base finite-difference step for the characteristic function.
pub const CF_STEP: f64 = 1e-4;
/// Largest imaginary part tolerated in a first moment.
pub const CF_IMAG_TOL: f64 = 1e-8;
/// Same for second moments, whose stencils divide roundoff by `h^2`.
pub const CF_IMAG_TOL_SECOND: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Engine,
    Refrigerator,
    Accelerator,
    Other,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Engine => "Engine",
            Regime::Refrigerator => "Refrigerator",
            Regime::Accelerator => "Accelerator",
            Regime::Other => "Other",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evaluation route that produced an [`EnergyBook`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    Trace,
    Closed,
    Cf,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Trace => "trace",
            Route::Closed => "closed",
            Route::Cf => "cf",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBook {
    pub w: f64,
    pub q_hot: f64,
    pub q_cold: f64,
    pub sigma: f64,
    /// `-W/Q_H`, only in the engine regime.
    pub eta: Option<f64>,
    /// `-W/tau`; zero (with `degenerate` set) when `tau = 0`.
    pub power: f64,
    pub degenerate: bool,
    pub regime: Regime,
    pub route: Route,
    pub mode: PropagatorMode,
}

impl EnergyBook {
    fn assemble(
        p: &CycleParams,
        w: f64,
        q_hot: f64,
        q_cold: f64,
        route: Route,
        mode: PropagatorMode,
    ) -> Result<Self> {
        let regime = classify_regime(w, q_hot, q_cold)?;
        let eta = (regime == Regime::Engine).then(|| -w / q_hot);
        let degenerate = p.tau == 0.0;
        Ok(EnergyBook {
            w,
            q_hot,
            q_cold,
            sigma: entropy_production(p, w, q_hot),
            eta,
            power: if degenerate { 0.0 } else { -w / p.tau },
            degenerate,
            regime,
            route,
            mode,
        })
    }

    /// Largest absolute difference over `W, Q_H, Q_C, Sigma`.
    pub fn max_abs_diff(&self, other: &EnergyBook) -> f64 {
        [
            self.w - other.w,
            self.q_hot - other.q_hot,
            self.q_cold - other.q_cold,
            self.sigma - other.sigma,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Like [`max_abs_diff`](Self::max_abs_diff), each term divided by `max(1, |self|)`.
    pub fn max_scaled_diff(&self, other: &EnergyBook) -> f64 {
        [
            (self.w, other.w),
            (self.q_hot, other.q_hot),
            (self.q_cold, other.q_cold),
            (self.sigma, other.sigma),
        ]
        .iter()
        .fold(0.0, |m, (a, b)| m.max((a - b).abs() / a.abs().max(1.0)))
    }
}

/// `(beta_b - beta_a) Q_H + beta_b W`.
pub fn entropy_production(p: &CycleParams, w: f64, q_hot: f64) -> f64 {
    (p.beta_b - p.beta_a) * q_hot + p.beta_b * w
}

pub fn classify_regime(w: f64, q_hot: f64, q_cold: f64) -> Result<Regime> {
    let residual = w + q_hot + q_cold;
    if !residual.is_finite() || residual.abs() > FIRST_LAW_TOL {
        return Err(Error::invalid(format!(
            "energy balance violated: W + Q_H + Q_C = {residual:.3e}"
        )));
    }
    let sign = |x: f64| {
        if x.abs() < REGIME_DEADBAND {
            0
        } else if x > 0.0 {
            1
        } else {
            -1
        }
    };
    Ok(match (sign(q_hot), sign(q_cold), sign(w)) {
        (1, -1, -1) => Regime::Engine,
        (-1, 1, 1) => Regime::Refrigerator,
        (1, -1, 1) => Regime::Accelerator,
        _ => Regime::Other,
    })
}

pub fn energetics_trace(p: &CycleParams, mode: PropagatorMode) -> Result<EnergyBook> {
    let rho0 = initial_state(p)?;
    let rho_t = evolve(&rho0, &propagator(p, mode)?)?;
    let (ha, hb) = local_parts(p)?;
    let drho = rho_t - rho0;
    let q_hot = -drho.expect(&ha).re;
    let q_cold = -drho.expect(&hb).re;
    let w = drho.expect(&(ha + hb)).re;
    EnergyBook::assemble(p, w, q_hot, q_cold, Route::Trace, mode)
}

fn transitions(p: &CycleParams, include_free: bool, variant: ClosedFormVariant) -> Result<(f64, f64)> {
    let bp = BlockParams::new(p, variant)?;
    Ok((bp.corner_transition(include_free), bp.center_transition(include_free)))
}

/// Closed-form energetics of the interaction-only stroke (exact constants).
pub fn energetics_closed(p: &CycleParams) -> Result<EnergyBook> {
    energetics_closed_with(p, false, ClosedFormVariant::Exact)
}

/// Closed-form energetics.
///
/// With populations `p_xy` of the initial product state,
/// `X = p_ee - p_gg = (e^{b_a e_a + b_b e_b} - 1)/(Z_a Z_b)` and
/// `Y = p_eg - p_ge = (e^{b_a e_a} - e^{b_b e_b})/(Z_a Z_b)`:
///
/// - `W     = (eps_a + eps_b) P_c X + (eps_a - eps_b) P_s Y`
/// - `Q_H   = -eps_a (P_c X + P_s Y)`
/// - `Sigma = (b_a e_a + b_b e_b) P_c X + (b_a e_a - b_b e_b) P_s Y`
/// - `Q_C   = -W - Q_H`
///
/// where `P_c = kappa^2 sin^2(gamma tau/2)/gamma^2` is the corner-block
/// transition probability and `P_s` the center one (`(1 - cos kappa tau)/2`
/// for the interaction-only stroke). With `include_free` the block
/// frequencies `gamma1`, `gamma2` of the full generator are used instead.
pub fn energetics_closed_with(
    p: &CycleParams,
    include_free: bool,
    variant: ClosedFormVariant,
) -> Result<EnergyBook> {
    let (pc, ps) = transitions(p, include_free, variant)?;
    let pops = p.pair_populations();
    let x = pops[EE] - pops[GG];
    let y = pops[EG] - pops[GE];
    let (ea, eb) = (p.eps_a, p.eps_b);
    let (ba, bb) = (p.beta_a, p.beta_b);

    let w = (ea + eb) * pc * x + (ea - eb) * ps * y;
    let q_hot = -ea * (pc * x + ps * y);
    let q_cold = -w - q_hot;
    let sigma = (ba * ea + bb * eb) * pc * x + (ba * ea - bb * eb) * ps * y;

    let mode = if include_free { PropagatorMode::Full } else { PropagatorMode::InteractionOnly };
    let mut book = EnergyBook::assemble(p, w, q_hot, q_cold, Route::Closed, mode)?;
    book.sigma = sigma;
    Ok(book)
}

/// The two entropy-production terms of the closed form, each nonnegative.
pub fn entropy_terms_closed(p: &CycleParams) -> Result<(f64, f64)> {
    let (pc, ps) = transitions(p, false, ClosedFormVariant::Exact)?;
    let pops = p.pair_populations();
    let x = pops[EE] - pops[GG];
    let y = pops[EG] - pops[GE];
    let (xa, xb) = (p.beta_a * p.eps_a, p.beta_b * p.eps_b);
    Ok(((xa + xb) * pc * x, (xa - xb) * ps * y))
}

/// Characteristic function of `(W, Q_H)` for the interaction-only stroke,
/// evaluated in operator form with the matrix-exponential propagator.
pub fn characteristic_function(p: &CycleParams, lambda: f64, nu: f64) -> Result<C64> {
    let u = propagator(p, PropagatorMode::OracleInteraction)?;
    characteristic_function_operator(p, lambda, nu, &u)
}

/// `Tr[U† e^{i(l-n)H_a} e^{i l H_b} U e^{-i(l-n)H_a} e^{-i l H_b} rho_0]`.
pub fn characteristic_function_operator(
    p: &CycleParams,
    lambda: f64,
    nu: f64,
    u: &CMat,
) -> Result<C64> {
    let rho0 = initial_state(p)?;
    let (ha, hb) = local_parts(p)?;
    // both local Hamiltonians are diagonal, so the exponentials are too
    let phases: Vec<C64> = (0..4)
        .map(|i| {
            let arg = (lambda - nu) * ha[(i, i)].re + lambda * hb[(i, i)].re;
            C64::from_polar(1.0, arg)
        })
        .collect();
    let fwd = CMat::from_diag(&phases)?;
    let back = fwd.adjoint();
    Ok((u.adjoint() * fwd * *u * back * rho0).trace())
}

/// The six-term scalar form of the characteristic function.
///
/// Only `|U_jk|^2` enters, so the same expression serves both generators:
/// the interaction-only blocks (`|Theta|^2`, `cos^2(kappa tau/2)`,
/// `|mu0 sin|^2`, `sin^2(kappa tau/2)`) or, with `include_free`, the full ones.
pub fn characteristic_function_six_term(
    p: &CycleParams,
    lambda: f64,
    nu: f64,
    include_free: bool,
    variant: ClosedFormVariant,
) -> Result<C64> {
    let bp = BlockParams::new(p, variant)?;
    let (stay_corner, stay_center, flip_corner, flip_center) = if include_free {
        (
            bp.phi_plus.norm_sqr(),
            bp.lambda_plus.norm_sqr(),
            bp.corner_offdiag_full().norm_sqr(),
            bp.center_offdiag_full().norm_sqr(),
        )
    } else {
        let half = 0.5 * p.kappa * p.tau;
        (
            bp.theta_plus.norm_sqr(),
            half.cos().powi(2),
            bp.corner_offdiag_interaction().norm_sqr(),
            half.sin().powi(2),
        )
    };
    let pops = p.pair_populations();
    let (ea, eb) = (p.eps_a, p.eps_b);
    let a = ea * (lambda - nu);
    let b = lambda * eb;
    let ph = |arg: f64| C64::from_polar(1.0, arg);

    let mut f = C64::new(stay_corner * (pops[GG] + pops[EE]), 0.0);
    f += stay_center * (pops[GE] + pops[EG]);
    f += flip_corner * pops[GG] * ph(-a - b);
    f += flip_corner * pops[EE] * ph(a + b);
    f += flip_center * pops[EG] * ph(a - b);
    f += flip_center * pops[GE] * ph(-a + b);
    Ok(f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondMoments {
    /// `<W^2>`
    pub ww: f64,
    /// `<W Q_H>`
    pub wq: f64,
    /// `<Q_H^2>`
    pub qq: f64,
}

/// Moments recovered from the characteristic function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CfMoments {
    pub lambda_step: f64,
    pub nu_step: f64,
    pub w_mean: f64,
    pub qh_mean: f64,
    pub second: Option<SecondMoments>,
}

impl CfMoments {
    /// `<W^n Q_H^m>` for `n + m` in `{1, 2}`, when computed.
    pub fn moment(&self, n: u32, m: u32) -> Option<f64> {
        match (n, m) {
            (1, 0) => Some(self.w_mean),
            (0, 1) => Some(self.qh_mean),
            (2, 0) => self.second.map(|s| s.ww),
            (1, 1) => self.second.map(|s| s.wq),
            (0, 2) => self.second.map(|s| s.qq),
            _ => None,
        }
    }
}

/// Moments for the interaction-only stroke.
pub fn moments_from_cf(p: &CycleParams, n: u32, m: u32) -> Result<CfMoments> {
    moments_from_cf_with(p, n, m, PropagatorMode::OracleInteraction)
}

/// Central differences with one Richardson step, base step [`CF_STEP`].
///
/// The first moments are always returned; `n + m = 2` additionally fills
/// all three second moments.
pub fn moments_from_cf_with(
    p: &CycleParams,
    n: u32,
    m: u32,
    mode: PropagatorMode,
) -> Result<CfMoments> {
    if !(1..=2).contains(&(n + m)) {
        return Err(Error::invalid(format!("moment order n + m must be 1 or 2, got {}", n + m)));
    }
    let u = propagator(p, mode)?;
    let cf = |l: f64, v: f64| characteristic_function_operator(p, l, v, &u);
    let h = CF_STEP;
    let richardson = |coarse: C64, fine: C64| (fine * 4.0 - coarse) / 3.0;

    let d_lambda = |h: f64| -> Result<C64> { Ok((cf(h, 0.0)? - cf(-h, 0.0)?) / (2.0 * h)) };
    let d_nu = |h: f64| -> Result<C64> { Ok((cf(0.0, h)? - cf(0.0, -h)?) / (2.0 * h)) };

    // <X> = (-i) dF
    let first = |d: C64| -> Result<f64> {
        let v = -crate::linalg::I * d;
        if v.im.abs() > CF_IMAG_TOL {
            return Err(Error::NumericalConsistency(format!(
                "first moment has imaginary residue {:.3e}",
                v.im
            )));
        }
        Ok(v.re)
    };
    let w_mean = first(richardson(d_lambda(h)?, d_lambda(h / 2.0)?))?;
    let qh_mean = first(richardson(d_nu(h)?, d_nu(h / 2.0)?))?;

    let second = if n + m == 2 {
        let f0 = cf(0.0, 0.0)?;
        let d_ll = |h: f64| -> Result<C64> {
            Ok((cf(h, 0.0)? - f0 * 2.0 + cf(-h, 0.0)?) / (h * h))
        };
        let d_nn = |h: f64| -> Result<C64> {
            Ok((cf(0.0, h)? - f0 * 2.0 + cf(0.0, -h)?) / (h * h))
        };
        let d_ln = |h: f64| -> Result<C64> {
            Ok((cf(h, h)? - cf(h, -h)? - cf(-h, h)? + cf(-h, -h)?) / (4.0 * h * h))
        };
        // <XY> = (-i)^2 d^2 F = -d^2 F
        let take = |d: C64| -> Result<f64> {
            let v = -d;
            if v.im.abs() > CF_IMAG_TOL_SECOND {
                return Err(Error::NumericalConsistency(format!(
                    "second moment has imaginary residue {:.3e}",
                    v.im
                )));
            }
            Ok(v.re)
        };
        Some(SecondMoments {
            ww: take(richardson(d_ll(h)?, d_ll(h / 2.0)?))?,
            wq: take(richardson(d_ln(h)?, d_ln(h / 2.0)?))?,
            qq: take(richardson(d_nn(h)?, d_nn(h / 2.0)?))?,
        })
    } else {
        None
    };

    Ok(CfMoments { lambda_step: h, nu_step: h, w_mean, qh_mean, second })
}

/// Energetics from the characteristic-function moments; `Q_C` and `Sigma`
/// follow from energy balance and the entropy-production formula.
pub fn energetics_cf(p: &CycleParams, mode: PropagatorMode) -> Result<EnergyBook> {
    let mom = moments_from_cf_with(p, 1, 0, mode.oracle_counterpart())?;
    let q_cold = -mom.w_mean - mom.qh_mean;
    EnergyBook::assemble(p, mom.w_mean, mom.qh_mean, q_cold, Route::Cf, mode)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Performance {
    pub eta: Option<f64>,
    pub power: f64,
    /// `1 - eps_b/eps_a`, reference line only.
    pub eta_otto: f64,
    /// `1 - beta_a/beta_b`, reference line only.
    pub eta_carnot: f64,
}

pub fn performance(book: &EnergyBook, p: &CycleParams) -> Performance {
    let eta = match book.regime {
        Regime::Engine if book.q_hot != 0.0 => Some(-book.w / book.q_hot),
        _ => None,
    };
    Performance {
        eta,
        power: if p.tau > 0.0 { -book.w / p.tau } else { 0.0 },
        eta_otto: 1.0 - p.eps_b / p.eps_a,
        eta_carnot: 1.0 - p.beta_a / p.beta_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::propagator_oracle;
    use proptest::prelude::*;

    fn fig2(eps_b: f64) -> CycleParams {
        CycleParams { eps_a: 1.0, eps_b, beta_a: 1.0, beta_b: 2.0, kappa: 1.0, omega: 10.0, tau: 1.0 }
    }

    fn fig3(kappa: f64, tau: f64) -> CycleParams {
        CycleParams { eps_a: 1.0, eps_b: 0.6, beta_a: 1.0, beta_b: 2.0, kappa, omega: 0.5, tau }
    }

    /// `sum_jk |U_jk|^2 p_k f(E_j - E_k)` for the two-point-measurement
    /// statistics of `(W, Q_H)`.
    fn tpm_moment(p: &CycleParams, f: impl Fn(f64, f64) -> f64) -> f64 {
        let u = propagator_oracle(p, false).unwrap();
        let (ha, hb) = local_parts(p).unwrap();
        let pops = p.pair_populations();
        let mut acc = 0.0;
        for j in 0..4 {
            for k in 0..4 {
                let w = (ha[(j, j)].re + hb[(j, j)].re) - (ha[(k, k)].re + hb[(k, k)].re);
                let q = -(ha[(j, j)].re - ha[(k, k)].re);
                acc += u[(j, k)].norm_sqr() * pops[k] * f(w, q);
            }
        }
        acc
    }

    #[test]
    fn zero_time_and_no_twisting_are_trivial() {
        for mode in PropagatorMode::ALL {
            let b = energetics_trace(&fig3(0.1, 0.0), mode).unwrap();
            assert_eq!((b.w, b.q_hot, b.q_cold, b.sigma), (0.0, 0.0, 0.0, 0.0));
            assert!(b.degenerate && b.power == 0.0 && b.regime == Regime::Other);

            let b = energetics_trace(&fig3(0.0, 7.0), mode).unwrap();
            for v in [b.w, b.q_hot, b.q_cold, b.sigma] {
                assert!(v.abs() < 1e-14, "{mode}: {b:?}");
            }
        }
        let b = energetics_closed(&fig3(0.0, 7.0)).unwrap();
        assert_eq!((b.w, b.q_hot, b.sigma), (0.0, 0.0, 0.0));
    }

    #[test]
    fn fig2_regime_sequence() {
        let mut seen = Vec::new();
        for i in 0..400 {
            let r = 0.05 + (2.0 - 0.05) * i as f64 / 399.0;
            let b = energetics_trace(&fig2(r), PropagatorMode::InteractionOnly).unwrap();
            if seen.last() != Some(&b.regime) {
                seen.push(b.regime);
            }
        }
        assert_eq!(seen.first(), Some(&Regime::Refrigerator));
        assert_eq!(seen.last(), Some(&Regime::Accelerator));
        assert!(seen.contains(&Regime::Engine));
    }

    #[test]
    fn closed_form_matches_trace() {
        for i in 0..50 {
            let p = fig3(0.12, 1.2 * i as f64);
            let t = energetics_trace(&p, PropagatorMode::OracleInteraction).unwrap();
            let c = energetics_closed(&p).unwrap();
            assert!(t.max_abs_diff(&c) < 1e-12, "{t:?} {c:?}");
            let tf = energetics_trace(&p, PropagatorMode::OracleFull).unwrap();
            let cf = energetics_closed_with(&p, true, ClosedFormVariant::Exact).unwrap();
            assert!(tf.max_abs_diff(&cf) < 1e-12);
        }
    }

    #[test]
    fn matched_boltzmann_exponents_leave_only_corner_term() {
        // beta_a eps_a = beta_b eps_b kills the center contribution
        let p = CycleParams { eps_b: 0.5, ..fig3(0.3, 2.0) };
        let (corner, center) = entropy_terms_closed(&p).unwrap();
        assert_eq!(center, 0.0);
        let (pc, _) = transitions(&p, false, ClosedFormVariant::Exact).unwrap();
        let pops = p.pair_populations();
        let b = energetics_closed(&p).unwrap();
        assert!((b.w - 1.5 * pc * (pops[EE] - pops[GG])).abs() < 1e-15);
        assert!((b.sigma - corner).abs() < 1e-15);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_regime(-0.1, 0.25, -0.15).unwrap(), Regime::Engine);
        assert_eq!(classify_regime(0.1, -0.25, 0.15).unwrap(), Regime::Refrigerator);
        assert_eq!(classify_regime(0.1, 0.05, -0.15).unwrap(), Regime::Accelerator);
        assert_eq!(classify_regime(0.0, 0.0, 0.0).unwrap(), Regime::Other);
        assert_eq!(classify_regime(1e-13, -1e-13, 0.0).unwrap(), Regime::Other);
        assert!(matches!(classify_regime(0.1, 0.1, 0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn performance_reference_lines() {
        let p = fig3(0.1, 6.0);
        let book = EnergyBook::assemble(&p, -0.1, 0.25, -0.15, Route::Trace, PropagatorMode::InteractionOnly).unwrap();
        let perf = performance(&book, &p);
        assert!((perf.eta.unwrap() - 0.4).abs() < 1e-15);
        assert!((perf.eta_carnot - 0.5).abs() < 1e-15);
        assert!((perf.eta_otto - 0.4).abs() < 1e-15);
        assert!((perf.power - 0.1 / 6.0).abs() < 1e-15);

        let fridge = EnergyBook::assemble(&p, 0.1, -0.25, 0.15, Route::Trace, PropagatorMode::InteractionOnly).unwrap();
        assert_eq!(performance(&fridge, &p).eta, None);
        assert_eq!(fridge.eta, None);
    }

    #[test]
    fn cf_normalization_and_trivial_cases() {
        let p = fig3(0.12, 2.0);
        assert!((characteristic_function(&p, 0.0, 0.0).unwrap() - 1.0).norm() < 1e-12);
        let flat = fig3(0.0, 2.0);
        for (l, v) in [(0.3, 0.1), (-2.0, 5.0), (7.0, -1.0)] {
            let six = characteristic_function_six_term(&flat, l, v, false, ClosedFormVariant::Exact).unwrap();
            assert!((six - 1.0).norm() < 1e-15);
        }
        let m = moments_from_cf(&flat, 1, 0).unwrap();
        assert!(m.w_mean.abs() < 1e-12 && m.qh_mean.abs() < 1e-12);
    }

    #[test]
    fn cf_operator_equals_six_term() {
        let p = fig3(0.1, 2.0);
        let a = characteristic_function(&p, 0.3, 0.1).unwrap();
        let b = characteristic_function_six_term(&p, 0.3, 0.1, false, ClosedFormVariant::Exact).unwrap();
        assert!((a - b).norm() < 1e-10);

        let u = propagator_oracle(&p, true).unwrap();
        let a = characteristic_function_operator(&p, -0.8, 1.7, &u).unwrap();
        let b = characteristic_function_six_term(&p, -0.8, 1.7, true, ClosedFormVariant::Exact).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn cf_first_moments_match_trace() {
        for kappa in [0.1, 0.12] {
            let p = fig3(kappa, 2.0);
            let t = energetics_trace(&p, PropagatorMode::InteractionOnly).unwrap();
            let m = moments_from_cf(&p, 1, 0).unwrap();
            assert!((m.w_mean - t.w).abs() <= 1e-6 * t.w.abs());
            let m = moments_from_cf(&p, 0, 1).unwrap();
            assert!((m.qh_mean - t.q_hot).abs() <= 1e-6 * t.q_hot.abs());
        }
    }

    #[test]
    fn cf_second_moments_match_tpm_sums() {
        let p = CycleParams { kappa: 0.8, ..fig3(0.8, 2.3) };
        let m = moments_from_cf(&p, 1, 1).unwrap();
        let s = m.second.unwrap();
        assert!((s.ww - tpm_moment(&p, |w, _| w * w)).abs() < 1e-6);
        assert!((s.wq - tpm_moment(&p, |w, q| w * q)).abs() < 1e-6);
        assert!((s.qq - tpm_moment(&p, |_, q| q * q)).abs() < 1e-6);
        assert!((m.w_mean - tpm_moment(&p, |w, _| w)).abs() < 1e-10);
        assert_eq!(m.moment(0, 2), Some(s.qq));
        assert!(moments_from_cf(&p, 1, 2).is_err());
        assert!(moments_from_cf(&p, 0, 0).is_err());
    }

    fn params_strategy() -> impl Strategy<Value = CycleParams> {
        (0.05f64..2.0, 0.0f64..1.2, 0.05f64..12.0, 0.0f64..60.0, 1.1f64..3.0).prop_map(
            |(eps_b, kappa, omega, tau, beta_b)| CycleParams {
                eps_a: 1.0,
                eps_b,
                beta_a: 1.0,
                beta_b,
                kappa,
                omega,
                tau,
            },
        )
    }

    proptest! {
        #[test]
        fn laws_hold(p in params_strategy()) {
            for mode in PropagatorMode::ALL {
                let b = energetics_trace(&p, mode).unwrap();
                prop_assert!((b.w + b.q_hot + b.q_cold).abs() < 1e-12);
                prop_assert!(b.sigma >= -1e-12);
                let alt = -p.beta_a * b.q_hot - p.beta_b * b.q_cold;
                prop_assert!((alt - b.sigma).abs() < 1e-12);
                if let Some(eta) = b.eta {
                    prop_assert!(eta <= 1.0 - p.beta_a / p.beta_b + 1e-9);
                }
            }
            let (t1, t2) = entropy_terms_closed(&p).unwrap();
            prop_assert!(t1 >= 0.0 && t2 >= 0.0);
        }
    }
}
