//! Kitagawa-Ueda squeezing parameter and l1 coherence for the spin pair.
//!
//! The cycle's states always have their mean spin along z, so the squeezing
//! variance is minimized over directions `n = x cos(phi) + y sin(phi)` in the
//! xy plane. With `N = 2` the parameter is `xi = 2 * delta_min`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::propagators::{ratio_sin, BlockParams, ClosedFormVariant};
use crate::spin::{collective_ops, CycleParams, EE, EG, GE, GG};

/// Bound on `|<S_x>|`, `|<S_y>|` for the mean spin to count as along z.
pub const MSD_TOL: f64 = 1e-8;
/// Smallest `|<S_z>|` for which a mean spin direction exists.
pub const SZ_MIN: f64 = 1e-10;
const DENSITY_TOL: f64 = 1e-10;
const N_SPINS: f64 = 2.0;

/// Spin expectation values entering the squeezing formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinMoments {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    /// `<S_x^2 + S_y^2>`
    pub transverse: f64,
    /// `<S_x^2 - S_y^2>`
    pub anisotropy: f64,
    /// `<{S_x, S_y}>`
    pub cross: f64,
}

impl SpinMoments {
    /// Moments of `rho / Tr rho`, so that states which are diagonal up to
    /// roundoff in the trace still give `xi = 1` exactly.
    pub fn of(rho: &CMat) -> Self {
        let s = collective_ops();
        let sx2 = s.sx * s.sx;
        let sy2 = s.sy * s.sy;
        let norm = rho.trace().re;
        let mean = |op: &CMat| rho.expect(op).re / norm;
        SpinMoments {
            sx: mean(&s.sx),
            sy: mean(&s.sy),
            sz: mean(&s.sz),
            transverse: mean(&(sx2 + sy2)),
            anisotropy: mean(&(sx2 - sy2)),
            cross: mean(&s.sx.anticommutator(&s.sy)),
        }
    }

    pub fn msd_along_z(&self) -> bool {
        self.sx.abs() < MSD_TOL && self.sy.abs() < MSD_TOL && self.sz.abs() > SZ_MIN
    }

    fn check_msd(&self) -> Result<()> {
        if self.sx.abs() >= MSD_TOL {
            return Err(Error::Precondition(format!(
                "<S_x> = {:.3e} is not zero; mean spin not along z",
                self.sx
            )));
        }
        if self.sy.abs() >= MSD_TOL {
            return Err(Error::Precondition(format!(
                "<S_y> = {:.3e} is not zero; mean spin not along z",
                self.sy
            )));
        }
        if self.sz.abs() <= SZ_MIN {
            return Err(Error::Precondition(format!(
                "<S_z> = {:.3e}: mean spin direction undefined",
                self.sz
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeReport {
    pub xi: f64,
    /// Optimal squeezing angle in `[0, pi)`.
    pub phi_opt: f64,
    pub delta_min: f64,
    pub coherence_l1: f64,
    pub msd_ok: bool,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

fn check_density(rho: &CMat) -> Result<()> {
    if !rho.is_density(DENSITY_TOL) {
        return Err(Error::invalid("argument is not a density matrix"));
    }
    Ok(())
}

/// Squeezing report without enforcing the mean-spin precondition; `msd_ok`
/// records whether it held.
pub fn squeeze_report(rho: &CMat) -> SqueezeReport {
    let m = SpinMoments::of(rho);
    let alpha1 = 2.0 * m.transverse / N_SPINS;
    let alpha2 = 4.0 * m.anisotropy.powi(2) / (N_SPINS * N_SPINS);
    let alpha3 = 4.0 * m.cross.powi(2) / (N_SPINS * N_SPINS);
    let spread = m.anisotropy.hypot(m.cross);
    let delta_min = 0.5 * (m.transverse - spread);
    // cos(2 phi) B + sin(2 phi) C is smallest when 2 phi points opposite to (B, C).
    let phi_opt = (0.5 * m.cross.atan2(m.anisotropy) + 0.5 * PI).rem_euclid(PI);
    SqueezeReport {
        xi: alpha1 - (alpha2 + alpha3).sqrt(),
        phi_opt,
        delta_min,
        coherence_l1: l1_coherence(rho),
        msd_ok: m.msd_along_z(),
        alpha1,
        alpha2,
        alpha3,
    }
}

pub fn xi_general(rho: &CMat) -> Result<SqueezeReport> {
    check_density(rho)?;
    SpinMoments::of(rho).check_msd()?;
    Ok(squeeze_report(rho))
}

/// Variance of `S_x cos(phi) + S_y sin(phi)` for a state with zero transverse mean.
pub fn variance_orthogonal(rho: &CMat, phi: f64) -> Result<f64> {
    check_density(rho)?;
    let m = SpinMoments::of(rho);
    m.check_msd()?;
    Ok(0.5 * m.transverse
        + 0.5 * m.anisotropy * (2.0 * phi).cos()
        + 0.5 * (2.0 * phi).sin() * m.cross)
}

/// Closed-form squeezing parameter after the interaction-only stroke,
/// `1 - kappa zbar eta_sq |sin(gamma0 tau/2)| / gamma0^2`,
/// with `eta_sq = sqrt(16 Omega^2 + 2 kappa^2 [1 + cos(gamma1 tau)])`.
///
/// `HalfSplitting` uses `gamma0 = sqrt(kappa^2 + Omega^2)` and
/// `gamma1 = sqrt(kappa^2 + (Omega - eps_p/2)^2)`; `Exact` uses the
/// interaction-only corner frequency `sqrt(kappa^2 + 4 Omega^2)` for both.
pub fn xi_closed_form(p: &CycleParams, variant: ClosedFormVariant) -> Result<f64> {
    let bp = BlockParams::new(p, variant)?;
    let (k, om, t) = (p.kappa, p.omega, p.tau);
    let gamma0 = bp.gamma0;
    let gamma_osc = match variant {
        ClosedFormVariant::Exact => bp.gamma0,
        ClosedFormVariant::HalfSplitting => bp.gamma1,
    };
    let eta_sq = (16.0 * om * om + 2.0 * k * k * (1.0 + (gamma_osc * t).cos())).sqrt();
    // kappa |sin(g t/2)| / g^2 == |ratio_sin(kappa, g, t)| / g
    Ok(1.0 - p.z_bar() * eta_sq * ratio_sin(k, gamma0, t).abs() / gamma0)
}

/// Closed form when the stroke also carries the free Hamiltonian.
///
/// The evolved state keeps the block structure, and
/// `xi = 1 + 2 Re rho_{ge,eg} - 2 |rho_{gg,ee}|`. Without the free part the
/// center coherence is purely imaginary and this reduces to
/// [`xi_closed_form`]; with it the center block is detuned by `eps_a - eps_b`
/// and the real part survives. Both coherences are built from the
/// closed-form block amplitudes and the initial populations.
pub fn xi_closed_form_with_free(p: &CycleParams) -> Result<f64> {
    let bp = BlockParams::new(p, ClosedFormVariant::Exact)?;
    let pops = p.pair_populations();
    let corner_off = bp.corner_offdiag_full();
    let center_off = bp.center_offdiag_full();
    let corner = bp.phi_plus * corner_off.conj() * pops[GG] + corner_off * bp.phi_minus.conj() * pops[EE];
    let center = bp.lambda_plus * center_off.conj() * pops[GE] + center_off * bp.lambda_minus.conj() * pops[EG];
    Ok(1.0 + 2.0 * center.re - 2.0 * corner.norm())
}

/// Sum of off-diagonal magnitudes in the computational basis, which is the
/// eigenbasis of the free Hamiltonian (fixed by convention when `eps_a = eps_b`).
pub fn l1_coherence(rho: &CMat) -> f64 {
    let n = rho.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += rho[(i, j)].norm();
            }
        }
    }
    acc
}
