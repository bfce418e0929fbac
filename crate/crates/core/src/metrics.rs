//! Error functionals and the asymptotic error predictors.
//!
//! Shot accounting: `N0` below is the number of copies per measurement
//! projector, `N0 = N / 6^n` for `N` total copies. All `2^n` projectors of a
//! setting are measured on the same copies, so one setting receives
//! `d * N0` shots.

use serde::{Deserialize, Serialize};

use crate::error::{LreError, Result};
use crate::matrix::{HermitianMatrix, HERMITIAN_TOL, PHYSICAL_TOL};
use crate::pauli::{gamma_single_qubit, Axis, QubitCount, SettingIndex};
use crate::reconstruct::Reconstruction;
use crate::simulator::{dense_to_theta, theta_to_probabilities, TrueState};

/// Largest qubit count for the dense `6^n x 4^n` predictor.
pub const MAX_DENSE_PREDICTOR_QUBITS: u32 = 4;

/// `N0 = shots / d`.
pub fn copies_per_projector(n: QubitCount, shots_per_setting: u64) -> f64 {
    shots_per_setting as f64 / n.dim() as f64
}

/// `d * N0`.
pub fn shots_per_setting(n: QubitCount, copies_per_projector: u64) -> u64 {
    copies_per_projector * n.dim() as u64
}

/// `Tr((a - b)^2)`, the squared Frobenius distance.
pub fn hs_squared_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    Ok(a.frobenius_distance(b)?.powi(2))
}

fn check_physical(m: &HermitianMatrix) -> Result<Vec<f64>> {
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
    let values = m.eigenvalues()?;
    if values[0] < -PHYSICAL_TOL {
        return Err(LreError::Unphysical(format!(
            "minimum eigenvalue {:e}",
            values[0]
        )));
    }
    Ok(values)
}

fn is_maximally_mixed(m: &HermitianMatrix) -> bool {
    let d = m.dim();
    let target = 1.0 / d as f64;
    (0..d).all(|r| {
        (0..d).all(|c| {
            let z = m.get(r, c);
            let want = if r == c { target } else { 0.0 };
            (z.re - want).abs() <= 1e-15 && z.im.abs() <= 1e-15
        })
    })
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
///
/// Uses closed forms when either argument is `I/d` or pure; see
/// [`fidelity_general`] for the unconditional spectral route.
pub fn fidelity(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    if is_maximally_mixed(rho) {
        return fidelity_with_maximally_mixed(sigma);
    }
    if is_maximally_mixed(sigma) {
        return fidelity_with_maximally_mixed(rho);
    }
    check_physical(rho)?;
    check_physical(sigma)?;
    for (pure, other) in [(rho, sigma), (sigma, rho)] {
        let e = pure.eigen()?;
        let top = *e.values.last().expect("nonempty");
        if top >= 1.0 - 1e-12 {
            let d = pure.dim();
            let psi: Vec<_> = (0..d).map(|r| e.vectors[(r, d - 1)]).collect();
            let mut f = num_complex::Complex64::new(0.0, 0.0);
            for r in 0..d {
                for c in 0..d {
                    f += psi[r].conj() * other.get(r, c) * psi[c];
                }
            }
            return Ok(f.re.clamp(0.0, 1.0));
        }
    }
    fidelity_spectral(rho, sigma)
}

/// `F(I/d, sigma) = (sum_k sqrt(lambda_k / d))^2`.
pub fn fidelity_with_maximally_mixed(sigma: &HermitianMatrix) -> Result<f64> {
    let values = check_physical(sigma)?;
    let d = sigma.dim() as f64;
    let s: f64 = values.iter().map(|&l| (l.max(0.0) / d).sqrt()).sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// Fidelity via spectral square roots, without shortcuts.
pub fn fidelity_general(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    check_physical(rho)?;
    check_physical(sigma)?;
    fidelity_spectral(rho, sigma)
}

fn fidelity_spectral(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    let e = rho.eigen()?;
    let roots: Vec<f64> = e.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let sqrt_rho = e.rebuild(&roots).to_faer();
    let inner = &sqrt_rho * sigma.to_faer() * &sqrt_rho;
    let mut m = HermitianMatrix::from_faer(&inner);
    m.symmetrize();
    let s: f64 = m.eigenvalues()?.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((s * s).clamp(0.0, 1.0))
}

fn same_dim(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(LreError::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(())
}

/// `(1 / N0) (5/6)^n`.
pub fn predicted_mse_max_mixed(n: QubitCount, n0: f64) -> f64 {
    (5.0f64 / 6.0).powi(n.get() as i32) / n0
}

/// `(1 / (4 N0)) (5/3)^n`; meaningful only once `N0` is large enough that
/// the least-squares estimate is already positive.
pub fn predicted_infidelity_max_mixed(n: QubitCount, n0: f64) -> f64 {
    (5.0f64 / 3.0).powi(n.get() as i32) / (4.0 * n0)
}

/// Outcome covariance used in the dense predictor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceModel {
    /// `P = diag(p_j - p_j^2)`, dropping the within-setting correlations.
    #[default]
    Diagonal,
    /// Full multinomial covariance `diag(p) - p p^T` inside each setting;
    /// exact for the sampler in this crate.
    Multinomial,
    /// `P = I / d`, the first-order form for the maximally mixed state.
    MaximallyMixedApprox,
}

/// Dense evaluation of
/// `E Tr(mu - rho)^2 = (M / (N d)) Tr[(X^T X)^-1 X^T P X (X^T X)^-1]`
/// with `N = M N0`. Materialises `X` (`6^n x 4^n`), so `n <= 4`.
pub fn predicted_mse_dense(rho: &HermitianMatrix, n0: f64, model: CovarianceModel) -> Result<f64> {
    let n = rho.qubits().ok_or(LreError::NotPowerOfTwo(rho.dim()))?;
    if n.get() > MAX_DENSE_PREDICTOR_QUBITS {
        return Err(LreError::TooLarge(
            "dense error predictor",
            MAX_DENSE_PREDICTOR_QUBITS,
            n.get(),
        ));
    }
    check_physical(rho)?;
    if n0.is_nan() || n0 <= 0.0 {
        return Err(LreError::InvalidArgument("N0 must be positive".into()));
    }
    let d = n.dim();
    let basis = n.num_basis();
    let theta = dense_to_theta(rho)?;

    // Rows of X: tensor products of single-qubit Gamma vectors.
    let rows: Vec<Vec<f64>> = (0..n.num_settings() as u64)
        .flat_map(|w| {
            let axes = SettingIndex(w).axes(n);
            (0..d).map(move |s| gamma_row(&axes, s))
        })
        .collect();
    let gram: Vec<f64> = (0..basis)
        .map(|i| rows.iter().map(|r| r[i] * r[i]).sum())
        .collect();

    let mut probs = Vec::with_capacity(rows.len());
    for w in 0..n.num_settings() as u64 {
        probs.extend(theta_to_probabilities(&theta, SettingIndex(w))?);
    }

    // Tr[A P A^T] with A = (X^T X)^-1 X^T, i.e. A_ij = X_ji / g_i.
    let overlap = |j: usize, k: usize| -> f64 {
        (0..basis)
            .map(|i| rows[j][i] * rows[k][i] / (gram[i] * gram[i]))
            .sum()
    };
    let mut total = 0.0;
    for w in 0..n.num_settings() {
        let block = w * d..(w + 1) * d;
        for j in block.clone() {
            match model {
                CovarianceModel::Diagonal => {
                    total += (probs[j] - probs[j] * probs[j]) * overlap(j, j);
                }
                CovarianceModel::MaximallyMixedApprox => {
                    total += overlap(j, j) / d as f64;
                }
                CovarianceModel::Multinomial => {
                    for k in block.clone() {
                        let c = if j == k { probs[j] } else { 0.0 } - probs[j] * probs[k];
                        if c != 0.0 {
                            total += c * overlap(j, k);
                        }
                    }
                }
            }
        }
    }
    Ok(total / (n0 * d as f64))
}

fn gamma_row(axes: &[Axis], s: usize) -> Vec<f64> {
    let nq = axes.len();
    let mut row = vec![1.0];
    for (k, &a) in axes.iter().enumerate() {
        let bit = (s >> (nq - 1 - k)) & 1;
        let g = gamma_single_qubit(a, if bit == 0 { 1 } else { -1 });
        row = row
            .iter()
            .flat_map(|&x| g.iter().map(move |&y| x * y))
            .collect();
    }
    row
}

/// Estimation errors of one reconstruction against the true state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub n: u32,
    pub shots_per_setting: u64,
    /// Copies per projector, `N0`.
    pub n0: f64,
    pub hs_squared_mu: Option<f64>,
    pub hs_squared_rho: f64,
    pub infidelity: f64,
    pub predicted_hs: Option<f64>,
    pub predicted_infidelity: Option<f64>,
}

/// Predicted mean squared HS distance for `truth` at `N0` copies per
/// projector: the closed form for `I/d`, the dense diagonal formula for other
/// states up to four qubits, otherwise none.
pub fn predicted_hs_for(truth: &TrueState, n0: f64) -> Result<Option<f64>> {
    let n = truth.qubits();
    if truth.is_maximally_mixed() {
        Ok(Some(predicted_mse_max_mixed(n, n0)))
    } else if n.get() <= MAX_DENSE_PREDICTOR_QUBITS {
        let rho = truth.density_matrix()?;
        predicted_mse_dense(&rho, n0, CovarianceModel::Diagonal).map(Some)
    } else {
        Ok(None)
    }
}

pub fn predicted_infidelity_for(truth: &TrueState, n0: f64) -> Option<f64> {
    truth
        .is_maximally_mixed()
        .then(|| predicted_infidelity_max_mixed(truth.qubits(), n0))
}

impl ErrorReport {
    /// Report for a full reconstruction (both `mu` and `rho` available).
    pub fn from_reconstruction(
        truth: &TrueState,
        recon: &Reconstruction,
        shots_per_setting: u64,
    ) -> Result<Self> {
        let rho = truth.density_matrix()?;
        let mut report = Self::from_estimate(truth, &rho, &recon.rho, shots_per_setting)?;
        report.hs_squared_mu = Some(hs_squared_distance(&recon.mu, &rho)?);
        Ok(report)
    }

    /// Report for a physical estimate alone.
    pub fn from_estimate(
        truth: &TrueState,
        truth_matrix: &HermitianMatrix,
        estimate: &HermitianMatrix,
        shots_per_setting: u64,
    ) -> Result<Self> {
        let n = truth.qubits();
        if estimate.dim() != n.dim() {
            return Err(LreError::DimensionMismatch {
                expected: n.dim(),
                actual: estimate.dim(),
            });
        }
        let n0 = copies_per_projector(n, shots_per_setting);
        Ok(Self {
            n: n.get(),
            shots_per_setting,
            n0,
            hs_squared_mu: None,
            hs_squared_rho: hs_squared_distance(estimate, truth_matrix)?,
            infidelity: 1.0 - fidelity(truth_matrix, estimate)?,
            predicted_hs: predicted_hs_for(truth, n0)?,
            predicted_infidelity: predicted_infidelity_for(truth, n0),
        })
    }
}
