//! The three-step linear regression estimator.
//!
//! 1. least squares: frequencies to Pauli coefficients `theta`;
//! 2. assembly: `theta` to the trace-one Hermitian matrix `mu`;
//! 3. projection: `mu` to the nearest density matrix `rho`.
//!
//! Steps 1 and 2 exploit the tensor structure of the Pauli basis. Every
//! setting touches the same `2^n` basis positions for all of its outcomes and
//! the coefficient pattern is the Walsh-Hadamard sign matrix, so one setting
//! costs either `O(n 2^n)` ([`Kernel::Fast`]) or `O(4^n)` with the explicit
//! sign matrix ([`Kernel::PaperDirect`]). The Gram matrix `X^T X` is diagonal
//! with entries `3^(#identity factors)`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LreError, Result};
use crate::matrix::{DensityMatrix, HermitianMatrix};
use crate::pauli::{
    basis_from_mask_choice, minus_i_pow, nonzero_locations_into, walsh_hadamard_in_place,
    BasisIndex, QubitCount, SettingIndex,
};

/// Largest qubit count for the dense steps (2) and (3).
pub const MAX_DENSE_PIPELINE_QUBITS: u32 = 12;
/// Trace tolerance accepted by the projection step.
pub const PROJECTION_TRACE_TOL: f64 = 1e-8;

const DIRECT_BATCH: usize = 16;

/// Source of per-setting outcome frequencies (measured or exact).
pub trait SettingFrequencies: Sync {
    fn qubits(&self) -> QubitCount;

    /// Writes the `2^n` frequencies of setting `w` into `out`.
    fn frequencies_into(&self, w: SettingIndex, out: &mut [f64]) -> Result<()>;
}

/// Dense table of frequencies, `3^n` rows of `2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    n: QubitCount,
    values: Vec<f64>,
}

impl FrequencyTable {
    pub fn new(n: QubitCount, values: Vec<f64>) -> Result<Self> {
        let expected = n.num_settings() * n.dim();
        if values.len() != expected {
            return Err(LreError::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Self { n, values })
    }

    pub fn collect<S: SettingFrequencies + ?Sized>(src: &S) -> Result<Self> {
        let n = src.qubits();
        let d = n.dim();
        let mut values = vec![0.0; n.num_settings() * d];
        for (w, row) in values.chunks_mut(d).enumerate() {
            src.frequencies_into(SettingIndex(w as u64), row)?;
        }
        Ok(Self { n, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl SettingFrequencies for FrequencyTable {
    fn qubits(&self) -> QubitCount {
        self.n
    }

    fn frequencies_into(&self, w: SettingIndex, out: &mut [f64]) -> Result<()> {
        let d = self.n.dim();
        let start = w.check(self.n)?.0 as usize * d;
        out.copy_from_slice(&self.values[start..start + d]);
        Ok(())
    }
}

/// Coefficients of a state in the normalised Pauli basis, length `4^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector {
    n: QubitCount,
    values: Vec<f64>,
}

impl ThetaVector {
    pub fn new(n: QubitCount, values: Vec<f64>) -> Result<Self> {
        if values.len() != n.num_basis() {
            return Err(LreError::DimensionMismatch {
                expected: n.num_basis(),
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LreError::InvalidArgument(format!(
                "theta[{i}] is not finite"
            )));
        }
        Ok(Self { n, values })
    }

    pub fn qubits(&self) -> QubitCount {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: BasisIndex) -> f64 {
        self.values[i.0 as usize]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    /// Walsh-Hadamard butterflies, `O(n 2^n)` per group.
    #[default]
    Fast,
    /// Explicit `2^n x 2^n` sign-matrix product, `O(4^n)` per group.
    PaperDirect,
}

impl FromStr for Kernel {
    type Err = LreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Kernel::Fast),
            "paper-direct" => Ok(Kernel::PaperDirect),
            other => Err(LreError::InvalidArgument(format!(
                "unknown kernel `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Fast => "fast",
            Kernel::PaperDirect => "paper-direct",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTimings {
    pub step1: Duration,
    pub step2: Duration,
    pub step3: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub theta: ThetaVector,
    pub mu: HermitianMatrix,
    pub rho: DensityMatrix,
    pub timings: StepTimings,
}

/// Configured estimator. Immutable after construction; each call owns its
/// scratch memory.
pub struct Reconstructor {
    threads: usize,
    kernel: Kernel,
    pool: rayon::ThreadPool,
}

impl fmt::Debug for Reconstructor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reconstructor")
            .field("threads", &self.threads)
            .field("kernel", &self.kernel)
            .finish()
    }
}

impl Reconstructor {
    pub fn new(threads: usize, kernel: Kernel) -> Result<Self> {
        if threads == 0 {
            return Err(LreError::InvalidArgument("threads must be >= 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| LreError::InvalidArgument(e.to_string()))?;
        Ok(Self {
            threads,
            kernel,
            pool,
        })
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// Step (1): `theta_i = sum_{w,s} p_{w,s} gamma_i^{(w,s)} / 3^{zeros(i)}`.
    ///
    /// Settings are split into `threads` contiguous chunks; each worker
    /// accumulates into a private vector and the partials are summed in worker
    /// order, so the result is bitwise reproducible for a fixed thread count.
    pub fn step_one<S: SettingFrequencies + ?Sized>(&self, src: &S) -> Result<ThetaVector> {
        let n = src.qubits();
        let settings = n.num_settings();
        let workers = self.threads.min(settings);
        let signs = match self.kernel {
            Kernel::PaperDirect => Some(sign_matrix(n)),
            Kernel::Fast => None,
        };
        let partials: Vec<Vec<f64>> = self.pool.install(|| {
            (0..workers)
                .into_par_iter()
                .map(|j| {
                    let lo = j * settings / workers;
                    let hi = (j + 1) * settings / workers;
                    match &signs {
                        None => accumulate_fast(src, n, lo..hi),
                        Some(m) => accumulate_direct(src, n, m, lo..hi),
                    }
                })
                .collect::<Result<_>>()
        })?;
        let mut iter = partials.into_iter();
        let mut theta = iter.next().expect("at least one worker");
        let rest: Vec<Vec<f64>> = iter.collect();
        let norm = n.basis_norm();
        const CHUNK: usize = 1 << 14;
        self.pool.install(|| {
            theta
                .par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(c, out)| {
                    let base = c * CHUNK;
                    let len = out.len();
                    for p in &rest {
                        for (o, v) in out.iter_mut().zip(&p[base..base + len]) {
                            *o += v;
                        }
                    }
                    for (k, o) in out.iter_mut().enumerate() {
                        let i = BasisIndex((base + k) as u64);
                        *o *= norm / 3f64.powi(i.zero_count(n) as i32);
                    }
                })
        });
        ThetaVector::new(n, theta)
    }

    /// Step (2): `mu = sum_i theta_i Omega_i`.
    ///
    /// The operators sharing a row-to-column flip mask `m` fill exactly the
    /// entries `(r, r ^ m)`. For fixed `m` those `d` entries are a signed sum
    /// over the `2^n` operators in the group, again a Walsh-Hadamard pattern.
    /// Groups are independent and computed in parallel.
    pub fn step_two(&self, theta: &ThetaVector) -> HermitianMatrix {
        let n = theta.qubits();
        let d = n.dim();
        let norm = Complex64::new(n.basis_norm(), 0.0);
        let vals = theta.values();
        let kernel = self.kernel;
        let mut by_mask = vec![Complex64::new(0.0, 0.0); d * d];
        self.pool.install(|| {
            by_mask.par_chunks_mut(d).enumerate().for_each(|(m, out)| {
                let m = m as u64;
                let coeffs: Vec<Complex64> = (0..d as u64)
                    .map(|c| {
                        let i = basis_from_mask_choice(n, m, c);
                        minus_i_pow((c & m).count_ones()) * vals[i as usize]
                    })
                    .collect();
                match kernel {
                    Kernel::Fast => {
                        out.copy_from_slice(&coeffs);
                        walsh_hadamard_in_place(out);
                    }
                    Kernel::PaperDirect => {
                        for (r, o) in out.iter_mut().enumerate() {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (c, v) in coeffs.iter().enumerate() {
                                if (c & r).count_ones() & 1 == 0 {
                                    acc += v;
                                } else {
                                    acc -= v;
                                }
                            }
                            *o = acc;
                        }
                    }
                }
                for o in out.iter_mut() {
                    *o *= norm;
                }
            })
        });
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        self.pool.install(|| {
            data.par_chunks_mut(d).enumerate().for_each(|(r, row)| {
                for (c, o) in row.iter_mut().enumerate() {
                    *o = by_mask[(r ^ c) * d + r];
                }
            })
        });
        let mut mu = HermitianMatrix::from_row_major_unchecked(d, data).expect("square buffer");
        mu.symmetrize();
        mu
    }

    /// Step (3), see [`project_to_density`].
    pub fn step_three(&self, mu: &HermitianMatrix) -> Result<DensityMatrix> {
        project_to_density(mu)
    }

    /// Runs all three steps and records the wall-clock time of each.
    pub fn reconstruct<S: SettingFrequencies + ?Sized>(&self, src: &S) -> Result<Reconstruction> {
        let n = src.qubits();
        if n.get() > MAX_DENSE_PIPELINE_QUBITS {
            return Err(LreError::TooLarge(
                "dense reconstruction (d x d complex matrix)",
                MAX_DENSE_PIPELINE_QUBITS,
                n.get(),
            ));
        }
        let start = Instant::now();
        let theta = self.step_one(src)?;
        let t1 = start.elapsed();
        let mu = self.step_two(&theta);
        let t2 = start.elapsed();
        let rho = self.step_three(&mu)?;
        let t3 = start.elapsed();
        Ok(Reconstruction {
            theta,
            mu,
            rho,
            timings: StepTimings {
                step1: t1,
                step2: t2 - t1,
                step3: t3 - t2,
                total: t3,
            },
        })
    }
}

/// `+-1` entries of the per-group coefficient matrix, row-major `[t][s]`.
fn sign_matrix(n: QubitCount) -> Vec<f64> {
    let d = n.dim();
    let mut m = vec![0.0; d * d];
    for (k, v) in m.iter_mut().enumerate() {
        let (t, s) = (k / d, k % d);
        *v = if (t & s).count_ones() & 1 == 0 {
            1.0
        } else {
            -1.0
        };
    }
    m
}

fn accumulate_fast<S: SettingFrequencies + ?Sized>(
    src: &S,
    n: QubitCount,
    settings: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    let d = n.dim();
    let mut acc = vec![0.0; n.num_basis()];
    let mut p = vec![0.0; d];
    let mut locs = Vec::with_capacity(d);
    for w in settings {
        let w = SettingIndex(w as u64);
        src.frequencies_into(w, &mut p)?;
        walsh_hadamard_in_place(&mut p);
        nonzero_locations_into(n, w, &mut locs);
        for (&l, &v) in locs.iter().zip(&p) {
            acc[l as usize] += v;
        }
    }
    Ok(acc)
}

fn accumulate_direct<S: SettingFrequencies + ?Sized>(
    src: &S,
    n: QubitCount,
    signs: &[f64],
    settings: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    let d = n.dim();
    let mut acc = vec![0.0; n.num_basis()];
    let mut p = vec![0.0; d];
    // Frequencies of up to DIRECT_BATCH settings, laid out [s][b].
    let mut batch = vec![0.0; d * DIRECT_BATCH];
    let mut locs = Vec::with_capacity(d);
    let mut out = vec![[0.0f64; DIRECT_BATCH]; d];
    let mut w = settings.start;
    while w < settings.end {
        let width = DIRECT_BATCH.min(settings.end - w);
        for b in 0..width {
            src.frequencies_into(SettingIndex((w + b) as u64), &mut p)?;
            for (s, v) in p.iter().enumerate() {
                batch[s * DIRECT_BATCH + b] = *v;
            }
        }
        for b in width..DIRECT_BATCH {
            for s in 0..d {
                batch[s * DIRECT_BATCH + b] = 0.0;
            }
        }
        for (t, o) in out.iter_mut().enumerate() {
            let row = &signs[t * d..(t + 1) * d];
            let mut sum = [0.0f64; DIRECT_BATCH];
            for (s, &sv) in row.iter().enumerate() {
                let col = &batch[s * DIRECT_BATCH..(s + 1) * DIRECT_BATCH];
                for (a, &x) in sum.iter_mut().zip(col) {
                    *a += sv * x;
                }
            }
            *o = sum;
        }
        for b in 0..width {
            nonzero_locations_into(n, SettingIndex((w + b) as u64), &mut locs);
            for (&l, o) in locs.iter().zip(&out) {
                acc[l as usize] += o[b];
            }
        }
        w += width;
    }
    Ok(acc)
}

/// Euclidean projection of a unit-sum spectrum onto the probability simplex.
///
/// Eigenvalues are visited from the smallest up with a running deficit `a`:
/// a value that stays negative after receiving its share `a / remaining` is
/// zeroed and its mass added to `a`; at the first value that survives, the
/// share is added to it and every larger value.
pub fn project_spectrum(values: &[f64]) -> Vec<f64> {
    let len = values.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    let mut out = values.to_vec();
    let mut deficit = 0.0;
    let mut k = 0;
    while k < len {
        let remaining = (len - k) as f64;
        let v = values[order[k]];
        if v + deficit / remaining < 0.0 {
            deficit += v;
            out[order[k]] = 0.0;
            k += 1;
        } else {
            let share = deficit / remaining;
            for &idx in &order[k..] {
                out[idx] = values[idx] + share;
            }
            break;
        }
    }
    out
}

/// Nearest density matrix to a trace-one Hermitian `mu`: eigendecompose,
/// project the spectrum onto the simplex and rebuild. A `mu` that is already
/// positive semidefinite is returned unchanged.
pub fn project_to_density(mu: &HermitianMatrix) -> Result<DensityMatrix> {
    let tr = mu.trace();
    if (tr - 1.0).abs() > PROJECTION_TRACE_TOL {
        return Err(LreError::TraceMismatch {
            trace: tr,
            tolerance: PROJECTION_TRACE_TOL,
        });
    }
    let eig = mu.eigen()?;
    if eig.values.first().is_none_or(|&v| v >= 0.0) {
        return Ok(DensityMatrix::new_unchecked(mu.clone()));
    }
    let projected = project_spectrum(&eig.values);
    Ok(DensityMatrix::new_unchecked(eig.rebuild(&projected)))
}
