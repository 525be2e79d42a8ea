//! Physical building blocks of the two-qubit machine.
//!
//! Basis conventions, fixed for the whole crate:
//! - single qubit: `|g>` then `|e>`, with `sigma_z |g> = +|g>`;
//! - pair: qubit `a` (hot) in the leading tensor slot, so the computational
//!   order is `|gg>, |ge>, |eg>, |ee>`.
//!
//! The local Hamiltonian keeps the sign `-eps |e><e|`, i.e. the excited level
//! sits *below* the ground level. Nothing is re-gauged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, re, CMat, Dim, I, ONE, ZERO};

pub const GG: usize = 0;
pub const GE: usize = 1;
pub const EG: usize = 2;
pub const EE: usize = 3;

/// Largest Boltzmann exponent `beta * eps` accepted anywhere in the model.
pub const MAX_BOLTZMANN_EXPONENT: f64 = 700.0;

/// Controls of one machine cycle (`hbar = k_B = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleParams {
    pub eps_a: f64,
    pub eps_b: f64,
    pub beta_a: f64,
    pub beta_b: f64,
    /// One-axis-twisting strength.
    pub kappa: f64,
    /// Transverse field along z.
    pub omega: f64,
    /// Duration of the unitary stroke.
    pub tau: f64,
}

impl CycleParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eps_a", self.eps_a),
            ("eps_b", self.eps_b),
            ("beta_a", self.beta_a),
            ("beta_b", self.beta_b),
            ("kappa", self.kappa),
            ("omega", self.omega),
            ("tau", self.tau),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in &fields[..4] {
            if *v <= 0.0 {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in &fields[4..] {
            if *v < 0.0 {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.beta_a >= self.beta_b {
            return Err(Error::invalid(format!(
                "qubit a must be the hot one: need beta_a < beta_b, got {} >= {}",
                self.beta_a, self.beta_b
            )));
        }
        for x in [self.beta_a * self.eps_a, self.beta_b * self.eps_b] {
            if x > MAX_BOLTZMANN_EXPONENT {
                return Err(Error::Overflow(x));
            }
        }
        Ok(())
    }

    pub fn delta_eps(&self) -> f64 {
        self.eps_a - self.eps_b
    }

    pub fn eps_sum(&self) -> f64 {
        self.eps_a + self.eps_b
    }

    /// `Z_i = 1 + exp(beta_i eps_i)` for qubits a and b.
    pub fn partition_functions(&self) -> (f64, f64) {
        (
            partition_function(self.eps_a, self.beta_a),
            partition_function(self.eps_b, self.beta_b),
        )
    }

    /// `1 - 1/Z_a - 1/Z_b`, the population imbalance between `|ee>` and `|gg>`.
    pub fn z_bar(&self) -> f64 {
        let pops = self.pair_populations();
        pops[EE] - pops[GG]
    }

    /// Initial diagonal populations in computational order.
    ///
    /// Products of logistic factors; algebraically `e^{...}/(Z_a Z_b)` but
    /// without forming the (possibly huge) exponentials.
    pub fn pair_populations(&self) -> [f64; 4] {
        let (ag, ae) = logistic_pair(self.beta_a * self.eps_a);
        let (bg, be) = logistic_pair(self.beta_b * self.eps_b);
        [ag * bg, ag * be, ae * bg, ae * be]
    }
}

pub fn partition_function(eps: f64, beta: f64) -> f64 {
    1.0 + (beta * eps).exp()
}

/// `(1/(1+e^x), e^x/(1+e^x))` evaluated without overflow.
fn logistic_pair(x: f64) -> (f64, f64) {
    if x >= 0.0 {
        let q = (-x).exp();
        (q / (1.0 + q), 1.0 / (1.0 + q))
    } else {
        let q = x.exp();
        (1.0 / (1.0 + q), q / (1.0 + q))
    }
}

/// Collective spin operators `S_alpha = (sigma_alpha ⊗ 1 + 1 ⊗ sigma_alpha) / 2`.
#[derive(Clone, Copy, Debug)]
pub struct SpinOps {
    pub sx: CMat,
    pub sy: CMat,
    pub sz: CMat,
}

pub fn pauli_x() -> CMat {
    CMat::from_row_major(&[ZERO, ONE, ONE, ZERO]).expect("2x2")
}

pub fn pauli_y() -> CMat {
    CMat::from_row_major(&[ZERO, -I, I, ZERO]).expect("2x2")
}

pub fn pauli_z() -> CMat {
    CMat::from_real_diag(&[1.0, -1.0]).expect("2x2")
}

pub fn collective_ops() -> SpinOps {
    let id = CMat::identity(Dim::Two);
    let collect = |s: CMat| -> CMat {
        (kron(&s, &id).expect("2x2") + kron(&id, &s).expect("2x2")).scale(re(0.5))
    };
    SpinOps {
        sx: collect(pauli_x()),
        sy: collect(pauli_y()),
        sz: collect(pauli_z()),
    }
}

/// `-eps |e><e|` = `diag(0, -eps)`.
pub fn local_hamiltonian(eps: f64) -> Result<CMat> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("energy gap must be > 0, got {eps}")));
    }
    CMat::from_real_diag(&[0.0, -eps])
}

/// Gibbs state `exp(-beta H)/Z` of a single qubit.
pub fn thermal_state(eps: f64, beta: f64) -> Result<CMat> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("energy gap must be > 0, got {eps}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("inverse temperature must be > 0, got {beta}")));
    }
    let x = beta * eps;
    if x > MAX_BOLTZMANN_EXPONENT {
        return Err(Error::Overflow(x));
    }
    let (pg, pe) = logistic_pair(x);
    CMat::from_real_diag(&[pg, pe])
}

/// `kappa S_x^2 + Omega S_z`.
pub fn interaction_hamiltonian(kappa: f64, omega: f64) -> Result<CMat> {
    if !(kappa >= 0.0 && kappa.is_finite() && omega >= 0.0 && omega.is_finite()) {
        return Err(Error::invalid(format!(
            "kappa and omega must be finite and >= 0, got kappa={kappa}, omega={omega}"
        )));
    }
    if kappa == 0.0 && omega == 0.0 {
        return Err(Error::invalid("kappa = omega = 0 leaves no interaction stroke"));
    }
    let s = collective_ops();
    Ok((s.sx * s.sx).scale(re(kappa)) + s.sz.scale(re(omega)))
}

/// `H_a ⊗ 1 + 1 ⊗ H_b`.
pub fn free_hamiltonian(p: &CycleParams) -> Result<CMat> {
    p.validate()?;
    let (ha, hb) = local_parts(p)?;
    Ok(ha + hb)
}

/// The two embedded local Hamiltonians `(H_a ⊗ 1, 1 ⊗ H_b)`.
pub fn local_parts(p: &CycleParams) -> Result<(CMat, CMat)> {
    let id = CMat::identity(Dim::Two);
    Ok((
        kron(&local_hamiltonian(p.eps_a)?, &id)?,
        kron(&id, &local_hamiltonian(p.eps_b)?)?,
    ))
}

/// Uncorrelated product of the two local Gibbs states.
pub fn initial_state(p: &CycleParams) -> Result<CMat> {
    p.validate()?;
    kron(&thermal_state(p.eps_a, p.beta_a)?, &thermal_state(p.eps_b, p.beta_b)?)
}

/// Swaps the two tensor factors of a two-qubit operator.
pub fn swap_qubits(m: &CMat) -> CMat {
    let perm = [GG, EG, GE, EE];
    let mut out = CMat::zeros(Dim::Four);
    for i in 0..4 {
        for j in 0..4 {
            out[(perm[i], perm[j])] = m[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig2() -> CycleParams {
        CycleParams { eps_a: 1.0, eps_b: 0.5, beta_a: 1.0, beta_b: 2.0, kappa: 1.0, omega: 10.0, tau: 1.0 }
    }

    #[test]
    fn local_hamiltonian_values() {
        assert_eq!(local_hamiltonian(1.0).unwrap(), CMat::from_real_diag(&[0.0, -1.0]).unwrap());
        assert_eq!(local_hamiltonian(0.6).unwrap(), CMat::from_real_diag(&[0.0, -0.6]).unwrap());
        assert!(local_hamiltonian(0.0).is_err());
        assert!(local_hamiltonian(-1.0).is_err());
    }

    #[test]
    fn thermal_state_limits() {
        let hot = thermal_state(1.0, 1e-12).unwrap();
        assert!((hot[(0, 0)].re - 0.5).abs() < 1e-9 && (hot[(1, 1)].re - 0.5).abs() < 1e-9);

        let mid = thermal_state(1.0, 1.0).unwrap();
        assert!((mid[(0, 0)].re - 0.26894).abs() < 1e-5);
        assert!((mid[(1, 1)].re - 0.73106).abs() < 1e-5);
        assert!(mid.is_density(1e-14));

        let cold = thermal_state(1.0, 50.0).unwrap();
        assert!(cold[(0, 0)].re.abs() < 1e-9 && (cold[(1, 1)].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn thermal_state_errors() {
        assert!(matches!(thermal_state(1.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(thermal_state(0.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(thermal_state(2.0, 400.0), Err(Error::Overflow(_))));
        // just under the guard is still a valid state
        let s = thermal_state(1.0, 699.0).unwrap();
        assert!(s.is_density(1e-14));
    }

    #[test]
    fn collective_ops_structure() {
        let s = collective_ops();
        assert_eq!(s.sz, CMat::from_real_diag(&[1.0, 0.0, 0.0, -1.0]).unwrap());

        let xx = kron(&pauli_x(), &pauli_x()).unwrap();
        let expected = (CMat::identity(Dim::Four) + xx).scale(re(0.5));
        assert!((s.sx * s.sx).max_abs_diff(&expected) < 1e-15);

        let comm = s.sx.commutator(&s.sy) - s.sz.scale(I);
        assert!(comm.max_abs() < 1e-14);
        for op in [s.sx, s.sy, s.sz] {
            assert!(op.is_hermitian(0.0));
        }
    }

    #[test]
    fn interaction_hamiltonian_limits() {
        let h = interaction_hamiltonian(0.0, 3.0).unwrap();
        assert!(h.max_abs_diff(&CMat::from_real_diag(&[3.0, 0.0, 0.0, -3.0]).unwrap()) < 1e-15);

        let h = interaction_hamiltonian(0.7, 0.0).unwrap();
        let xx = kron(&pauli_x(), &pauli_x()).unwrap();
        let expected = (CMat::identity(Dim::Four) + xx).scale(re(0.35));
        assert!(h.max_abs_diff(&expected) < 1e-15);

        assert!(matches!(interaction_hamiltonian(0.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(interaction_hamiltonian(-1.0, 1.0).is_err());
    }

    #[test]
    fn interaction_hamiltonian_is_block_sparse() {
        let h = interaction_hamiltonian(1.0, 10.0).unwrap();
        assert!(h.is_hermitian(1e-14));
        for i in [GG, EE] {
            for j in [GE, EG] {
                assert_eq!(h[(i, j)], ZERO);
                assert_eq!(h[(j, i)], ZERO);
            }
        }
    }

    #[test]
    fn free_hamiltonian_diagonal() {
        let p = CycleParams { eps_b: 0.6, ..fig2() };
        let h0 = free_hamiltonian(&p).unwrap();
        assert!(h0.max_abs_diff(&CMat::from_real_diag(&[0.0, -0.6, -1.0, -1.6]).unwrap()) < 1e-15);

        let diag_int = interaction_hamiltonian(0.0, 0.5).unwrap();
        assert_eq!(h0.commutator(&diag_int).max_abs(), 0.0);

        let twisted = interaction_hamiltonian(0.1, 0.5).unwrap();
        assert!(h0.commutator(&twisted).max_abs() > 1e-3);
    }

    #[test]
    fn initial_state_fig2() {
        let p = fig2();
        let rho = initial_state(&p).unwrap();
        assert!(rho.is_density(1e-14));
        let ta = thermal_state(1.0, 1.0).unwrap();
        let tb = thermal_state(0.5, 2.0).unwrap();
        let mut sum = 0.0;
        for (k, (i, j)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            let expected = ta[(i, i)].re * tb[(j, j)].re;
            let got = rho[(k, k)].re;
            assert!((got - expected).abs() < 1e-15);
            assert!(got > 0.0 && got < 1.0);
            sum += got;
        }
        assert!((sum - 1.0).abs() < 1e-15);

        let s = collective_ops();
        assert!(rho.expect(&s.sx).norm() < 1e-15);
        assert!(rho.expect(&s.sy).norm() < 1e-15);
    }

    #[test]
    fn initial_state_symmetric_for_identical_qubits() {
        let p = CycleParams { eps_a: 0.8, eps_b: 0.8, beta_a: 1.0, beta_b: 1.0 + 1e-9, ..fig2() };
        let rho = initial_state(&p).unwrap();
        assert!(swap_qubits(&rho).max_abs_diff(&rho) < 1e-9);
    }

    #[test]
    fn validation() {
        assert!(fig2().validate().is_ok());
        let bad = [
            CycleParams { eps_a: 0.0, ..fig2() },
            CycleParams { beta_b: 0.5, ..fig2() },
            CycleParams { beta_a: 2.0, ..fig2() },
            CycleParams { kappa: -0.1, ..fig2() },
            CycleParams { tau: f64::NAN, ..fig2() },
        ];
        for p in bad {
            assert!(matches!(p.validate(), Err(Error::InvalidArgument(_))), "{p:?}");
        }
        let hot = CycleParams { eps_b: 400.0, ..fig2() };
        assert!(matches!(hot.validate(), Err(Error::Overflow(_))));
    }

    proptest! {
        #[test]
        fn partition_and_zbar(eps_a in 0.01f64..5.0, eps_b in 0.01f64..5.0, beta_a in 0.01f64..5.0, dbeta in 0.01f64..5.0) {
            let p = CycleParams { eps_a, eps_b, beta_a, beta_b: beta_a + dbeta, kappa: 0.1, omega: 0.5, tau: 1.0 };
            let (za, zb) = p.partition_functions();
            prop_assert!(za > 2.0 && zb > 2.0);
            let zbar = p.z_bar();
            prop_assert!((zbar - (1.0 - 1.0 / za - 1.0 / zb)).abs() < 1e-12);
            prop_assert!((0.0..1.0).contains(&zbar));
            let rho = initial_state(&p).unwrap();
            prop_assert!(rho.is_density(1e-14));
            prop_assert!(free_hamiltonian(&p).unwrap().is_hermitian(1e-14));
        }
    }
}
