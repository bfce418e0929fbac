//! Dense Hermitian and density matrices.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{LreError, Result};
use crate::pauli::QubitCount;

/// Hermiticity tolerance on `|a_rc - conj(a_cr)|`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Trace and eigenvalue tolerance for physical states.
pub const PHYSICAL_TOL: f64 = 1e-10;

/// Dense complex matrix, row-major, expected to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity_scaled(dim: usize, scale: f64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            m.data[r * dim + r] = Complex64::new(scale, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data and checks conjugate symmetry.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        let m = Self::from_row_major_unchecked(dim, data)?;
        let asym = m.max_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(LreError::NotHermitian(asym));
        }
        Ok(m)
    }

    pub(crate) fn from_row_major_unchecked(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(LreError::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self::from_row_major(dim, data)
    }

    /// Outer product `|psi><psi|`.
    pub fn outer(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let data = (0..dim * dim)
            .map(|k| psi[k / dim] * psi[k % dim].conj())
            .collect();
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Qubit count when the dimension is a power of two.
    pub fn qubits(&self) -> Option<QubitCount> {
        if self.dim.is_power_of_two() {
            QubitCount::new(self.dim.trailing_zeros()).ok()
        } else {
            None
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|r| self.get(r, r).re).sum()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(LreError::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn to_faer(&self) -> Mat<Complex64> {
        Mat::from_fn(self.dim, self.dim, |r, c| self.get(r, c))
    }

    pub(crate) fn from_faer(m: &Mat<Complex64>) -> Self {
        let dim = m.nrows();
        let data = (0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect();
        Self { dim, data }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigen()?.values)
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        HermitianEigen::new(self)
    }

    /// Replaces the matrix by `(A + A^dagger) / 2`.
    pub(crate) fn symmetrize(&mut self) {
        let d = self.dim;
        for r in 0..d {
            self.data[r * d + r].im = 0.0;
            for c in r + 1..d {
                let avg = (self.data[r * d + c] + self.data[c * d + r].conj()) * 0.5;
                self.data[r * d + c] = avg;
                self.data[c * d + r] = avg.conj();
            }
        }
    }
}

/// Spectral decomposition `A = V diag(values) V^dagger`, values ascending.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<Complex64>,
}

impl HermitianEigen {
    pub fn new(a: &HermitianMatrix) -> Result<Self> {
        let m = a.to_faer();
        let eig = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| LreError::Eigen(format!("{e:?}")))?;
        let s = eig.S().column_vector();
        let mut order: Vec<usize> = (0..a.dim).collect();
        let raw: Vec<f64> = (0..a.dim).map(|k| s[k].re).collect();
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(LreError::Eigen("non-finite eigenvalue".into()));
        }
        order.sort_by(|&x, &y| raw[x].total_cmp(&raw[y]));
        let u = eig.U();
        let vectors = Mat::from_fn(a.dim, a.dim, |r, c| u[(r, order[c])]);
        let values = order.iter().map(|&k| raw[k]).collect();
        Ok(Self { values, vectors })
    }

    /// `V diag(f(values)) V^dagger`, skipping columns where `f` vanishes.
    pub fn rebuild(&self, values: &[f64]) -> HermitianMatrix {
        let dim = self.values.len();
        let keep: Vec<usize> = (0..dim).filter(|&k| values[k] != 0.0).collect();
        let v = Mat::from_fn(dim, keep.len(), |r, c| self.vectors[(r, keep[c])]);
        let vs = Mat::from_fn(dim, keep.len(), |r, c| v[(r, c)] * values[keep[c]]);
        let prod = &vs * v.adjoint();
        let mut out = HermitianMatrix::from_faer(&prod);
        out.symmetrize();
        out
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (eigenvalues >= -1e-10).
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        let asym = m.max_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(LreError::NotHermitian(asym));
        }
        let tr = m.trace();
        if (tr - 1.0).abs() > PHYSICAL_TOL {
            return Err(LreError::TraceMismatch {
                trace: tr,
                tolerance: PHYSICAL_TOL,
            });
        }
        let min = m.eigenvalues()?.first().copied().unwrap_or(0.0);
        if min < -PHYSICAL_TOL {
            return Err(LreError::Unphysical(format!("minimum eigenvalue {min:e}")));
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: HermitianMatrix) -> Self {
        Self(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianMatrix::identity_scaled(dim, 1.0 / dim as f64))
    }

    /// `|psi><psi|` for a normalised `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > PHYSICAL_TOL {
            return Err(LreError::Unphysical(format!("state vector norm^2 {norm}")));
        }
        Ok(Self(HermitianMatrix::outer(psi)))
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.0
    }
}

impl std::ops::Deref for DensityMatrix {
    type Target = HermitianMatrix;

    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}
