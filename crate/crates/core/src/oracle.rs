//! Slow dense reference implementations used to check the fast paths.
//!
//! Everything here is built from explicit Kronecker products of Pauli
//! matrices and generic dense linear algebra, without reusing any index
//! arithmetic from the rest of the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::HermitianMatrix;

type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrix for digit 0..=3 (I, X, Y, Z).
pub fn pauli(digit: usize) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match digit {
        0 => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        1 => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("pauli digit {digit}"),
    }
}

fn kron_all(factors: impl IntoIterator<Item = CMat>) -> CMat {
    factors
        .into_iter()
        .fold(CMat::identity(1, 1), |acc, f| acc.kronecker(&f))
}

/// Base-4 digits of a basis index, qubit 1 first.
fn digits4(n: u32, i: u64) -> Vec<usize> {
    (0..n)
        .map(|k| ((i >> (2 * (n - 1 - k))) & 3) as usize)
        .collect()
}

/// Axis digits (1..=3) of a setting index, qubit 1 first.
fn setting_axes(n: u32, w: u64) -> Vec<usize> {
    let mut out = vec![0; n as usize];
    let mut rest = w;
    for k in (0..n as usize).rev() {
        out[k] = (rest % 3) as usize + 1;
        rest /= 3;
    }
    out
}

/// Normalized Pauli basis operator `2^{-n/2} σ_{i_1} ⊗ … ⊗ σ_{i_n}`.
pub fn omega(n: u32, i: u64) -> CMat {
    kron_all(digits4(n, i).into_iter().map(pauli)) * c(2f64.powf(-(n as f64) / 2.0), 0.0)
}

/// Projector onto outcome `s` of setting `w`; bit `n - k` of `s` is the
/// outcome of qubit `k`, 0 meaning eigenvalue +1.
pub fn projector(n: u32, w: u64, s: u64) -> CMat {
    let axes = setting_axes(n, w);
    kron_all((0..n as usize).map(|k| {
        let bit = (s >> (n as usize - 1 - k)) & 1;
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        (pauli(0) + pauli(axes[k]) * c(sign, 0.0)) * c(0.5, 0.0)
    }))
}

/// Coefficients `Tr(P Ω_i)` of one projector.
pub fn gamma(n: u32, w: u64, s: u64) -> Vec<f64> {
    let p = projector(n, w, s);
    (0..4u64.pow(n))
        .map(|i| (&p * omega(n, i)).trace().re)
        .collect()
}

/// Design matrix with one row per projector, rows ordered by setting then
/// outcome.
pub fn design_matrix(n: u32) -> DMatrix<f64> {
    let d = 1u64 << n;
    let rows = 3u64.pow(n) * d;
    let cols = 4usize.pow(n);
    let mut x = DMatrix::<f64>::zeros(rows as usize, cols);
    for w in 0..3u64.pow(n) {
        for s in 0..d {
            let g = gamma(n, w, s);
            for (j, v) in g.into_iter().enumerate() {
                x[((w * d + s) as usize, j)] = v;
            }
        }
    }
    x
}

/// Gram matrix `Σ_j Γ_j Γ_jᵀ`.
pub fn gram_matrix(n: u32) -> DMatrix<f64> {
    let x = design_matrix(n);
    x.transpose() * x
}

/// `(XᵀX)^{-1} Xᵀ p` by a generic dense solve.
pub fn least_squares_theta(n: u32, p: &[f64]) -> Vec<f64> {
    let x = design_matrix(n);
    let pv = nalgebra::DVector::from_column_slice(p);
    let gram = x.transpose() * &x;
    let rhs = x.transpose() * pv;
    gram.lu()
        .solve(&rhs)
        .expect("singular gram matrix")
        .as_slice()
        .to_vec()
}

/// `Σ_i θ_i Ω_i`.
pub fn theta_to_dense(n: u32, theta: &[f64]) -> CMat {
    let d = 1usize << n;
    theta
        .iter()
        .enumerate()
        .fold(CMat::zeros(d, d), |acc, (i, &t)| {
            acc + omega(n, i as u64) * c(t, 0.0)
        })
}

/// Outcome probabilities `Tr(P ρ)` of every setting, rows ordered as in
/// [`design_matrix`].
pub fn probabilities(n: u32, rho: &CMat) -> Vec<f64> {
    let d = 1u64 << n;
    let mut out = Vec::new();
    for w in 0..3u64.pow(n) {
        for s in 0..d {
            out.push((projector(n, w, s) * rho).trace().re);
        }
    }
    out
}

pub fn to_dense(m: &HermitianMatrix) -> CMat {
    CMat::from_row_slice(m.dim(), m.dim(), m.as_slice())
}

pub fn from_dense(m: &CMat) -> HermitianMatrix {
    let d = m.nrows();
    HermitianMatrix::from_fn(d, |r, col| (m[(r, col)] + m[(col, r)].conj()) * 0.5)
        .expect("square matrix")
}

/// Euclidean projection onto the probability simplex by bisection on the
/// threshold `τ` with `Σ max(v - τ, 0) = 1`.
pub fn simplex_projection_bisection(v: &[f64]) -> Vec<f64> {
    let mass = |tau: f64| v.iter().map(|x| (x - tau).max(0.0)).sum::<f64>();
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (max - 1.0, max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

/// Random Hermitian matrix with unit trace; generally not positive.
pub fn random_hermitian_trace_one<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let g = gaussian_matrix(d, d, rng);
    let mut h = (&g + g.adjoint()) * c(0.5, 0.0);
    let shift = (h.trace().re - 1.0) / d as f64;
    for k in 0..d {
        h[(k, k)] -= c(shift, 0.0);
    }
    from_dense(&h)
}

/// Random density matrix of random rank.
pub fn random_physical<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let rank = rng.random_range(1..=d);
    let g = gaussian_matrix(d, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    from_dense(&(m * c(1.0 / tr, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_is_orthonormal() {
        for i in 0..16 {
            for j in 0..16 {
                let ip = (omega(2, i).adjoint() * omega(2, j)).trace();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn projectors_resolve_identity() {
        for w in 0..9 {
            let sum = (0..4).fold(CMat::zeros(4, 4), |acc, s| acc + projector(2, w, s));
            assert!((sum - CMat::identity(4, 4)).norm() < 1e-12);
        }
    }

    #[test]
    fn bisection_projection_small_cases() {
        let p = simplex_projection_bisection(&[0.5, 0.5]);
        assert!((p[0] - 0.5).abs() < 1e-14);
        let p = simplex_projection_bisection(&[1.2, -0.2]);
        assert!((p[0] - 1.0).abs() < 1e-14 && p[1] == 0.0);
    }
}
