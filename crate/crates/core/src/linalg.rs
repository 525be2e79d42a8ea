//! Dense complex matrices of dimension 2 and 4.
//!
//! Everything in the model lives on one or two qubits, so matrices are stored
//! inline in a fixed 16-slot array and never touch the heap except inside the
//! eigensolver.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance on Hermiticity accepted by the eigensolver and the exponential.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on unitarity of propagators.
pub const UNITARY_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Matrix dimension: a single qubit or a qubit pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dim {
    Two,
    Four,
}

impl Dim {
    pub const fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Four => 4,
        }
    }

    pub fn from_n(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dim::Two),
            4 => Ok(Dim::Four),
            _ => Err(Error::invalid(format!("matrix dimension must be 2 or 4, got {n}"))),
        }
    }
}

/// Square complex matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct CMat {
    dim: Dim,
    data: [C64; 16],
}

impl CMat {
    pub fn zeros(dim: Dim) -> Self {
        CMat { dim, data: [ZERO; 16] }
    }

    pub fn identity(dim: Dim) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim.n() {
            m.data[i * dim.n() + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries; the dimension is inferred from
    /// the entry count (4 or 16).
    pub fn from_row_major(entries: &[C64]) -> Result<Self> {
        let dim = match entries.len() {
            4 => Dim::Two,
            16 => Dim::Four,
            n => {
                return Err(Error::invalid(format!(
                    "expected 4 or 16 entries for a square matrix, got {n}"
                )))
            }
        };
        let mut m = Self::zeros(dim);
        m.data[..entries.len()].copy_from_slice(entries);
        Ok(m)
    }

    pub fn from_real_diag(diag: &[f64]) -> Result<Self> {
        let dim = Dim::from_n(diag.len())?;
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = re(d);
        }
        Ok(m)
    }

    pub fn from_diag(diag: &[C64]) -> Result<Self> {
        let dim = Dim::from_n(diag.len())?;
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Ok(m)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.dim.n()
    }

    /// Row-major view of the `n*n` live entries.
    pub fn entries(&self) -> &[C64] {
        &self.data[..self.n() * self.n()]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.n()).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n();
        let mut out = Self::zeros(self.dim);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.n()).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut out = *self;
        let len = self.n() * self.n();
        for z in &mut out.data[..len] {
            *z = f(*z);
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `Tr[self * op]`, the expectation value of `op` when `self` is a state.
    pub fn expect(&self, op: &Self) -> C64 {
        assert_eq!(self.dim, op.dim, "dimension mismatch");
        let n = self.n();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * op[(k, i)];
            }
        }
        acc
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.adjoint() * *self).max_abs_diff(&Self::identity(self.dim)) <= tol
    }

    /// Hermitian, unit trace and positive semidefinite, all within `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return false;
        }
        match eig_hermitian(&self.hermitian_part()) {
            Ok((vals, _)) => vals.iter().all(|&v| v >= -tol),
            Err(_) => false,
        }
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(re(0.5))
    }

    fn to_nalgebra(self) -> DMatrix<C64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        let n = self.n();
        assert!(i < n && j < n, "index ({i}, {j}) out of bounds for {n}x{n}");
        &self.data[i * n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        let n = self.n();
        assert!(i < n && j < n, "index ({i}, {j}) out of bounds for {n}x{n}");
        &mut self.data[i * n + j]
    }
}

impl Mul for CMat {
    type Output = CMat;
    fn mul(self, rhs: CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.n();
        let mut out = CMat::zeros(self.dim);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for CMat {
    type Output = CMat;
    fn add(self, rhs: CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self;
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        out
    }
}

impl Sub for CMat {
    type Output = CMat;
    fn sub(self, rhs: CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self;
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        out
    }
}

impl Neg for CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.map(|z| -z)
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n();
        writeln!(f, "CMat {n}x{n} [")?;
        for i in 0..n {
            write!(f, "  ")?;
            for j in 0..n {
                let z = self[(i, j)];
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product of two single-qubit operators, first factor on the
/// leading tensor slot: basis order `|00>, |01>, |10>, |11>`.
pub fn kron(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.dim != Dim::Two || b.dim != Dim::Two {
        return Err(Error::invalid(format!(
            "kron expects two 2x2 operands, got {}x{} and {}x{}",
            a.n(),
            a.n(),
            b.n(),
            b.n()
        )));
    }
    let mut out = CMat::zeros(Dim::Four);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

fn require_hermitian(h: &CMat) -> Result<()> {
    let dev = h.max_abs_diff(&h.adjoint());
    if dev > HERMITIAN_TOL {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (max |H - H^dagger| = {dev:.3e})"
        )));
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the unitary whose columns are
/// the matching eigenvectors, so that `h = V diag(vals) V†`.
pub fn eig_hermitian(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    require_hermitian(h)?;
    let n = h.n();
    let eig = SymmetricEigen::new(h.hermitian_part().to_nalgebra());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(h.dim);
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vecs[(row, col)] = eig.eigenvectors[(row, k)];
        }
    }
    Ok((vals, vecs))
}

/// `exp(-i h t)` for Hermitian `h`, via the spectral decomposition.
pub fn expm_unitary(h: &CMat, t: f64) -> Result<CMat> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("time must be finite, got {t}")));
    }
    let (vals, v) = eig_hermitian(h)?;
    if t == 0.0 {
        return Ok(CMat::identity(h.dim()));
    }
    let phases: Vec<C64> = vals.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
    let d = CMat::from_diag(&phases)?;
    Ok(v * d * v.adjoint())
}
