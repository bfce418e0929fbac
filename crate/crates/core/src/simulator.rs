//! True states, exact outcome probabilities and simulated measurement counts.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{LreError, Result};
use crate::matrix::{DensityMatrix, HermitianMatrix, HERMITIAN_TOL};
use crate::pauli::{
    nonzero_locations_into, omega_entry_factor, walsh_hadamard_in_place, BasisIndex, QubitCount,
    SettingIndex,
};
use crate::reconstruct::{SettingFrequencies, ThetaVector};
use crate::record::MeasurementRecord;

/// Largest qubit count for states that need dense `d x d` storage.
pub const MAX_DENSE_STATE_QUBITS: u32 = 8;
/// Largest qubit count for which [`TrueState::density_matrix`] materialises
/// a closed-form state.
pub const MAX_DENSE_QUBITS: u32 = 12;

const PROBABILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    MaximallyMixed,
    Ghz,
    /// Computational basis state; bit `n - k` holds qubit `k`.
    ProductZ(u64),
    /// `G G^dagger / Tr(G G^dagger)` with complex Gaussian `G`.
    RandomDensity(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateDescriptor {
    pub kind: StateKind,
    pub n: QubitCount,
}

impl StateDescriptor {
    pub fn new(kind: StateKind, n: QubitCount) -> Result<Self> {
        match kind {
            StateKind::ProductZ(bits) if n.get() < 64 && bits >> n.get() != 0 => Err(
                LreError::InvalidState(format!("productz bits {bits:#b} exceed {n} qubits")),
            ),
            StateKind::RandomDensity(_) if n.get() > MAX_DENSE_STATE_QUBITS => Err(
                LreError::TooLarge("random density state", MAX_DENSE_STATE_QUBITS, n.get()),
            ),
            _ => Ok(Self { kind, n }),
        }
    }

    /// Parses `maxmixed`, `ghz`, `productz:<bits>` (binary, qubit 1 first,
    /// left-padded with zeros) or `random:<seed>`.
    pub fn parse(s: &str, n: QubitCount) -> Result<Self> {
        Self::new(s.parse()?, n).and_then(|d| match d.kind {
            StateKind::ProductZ(_) => {
                let bits = s.split_once(':').map(|(_, b)| b).unwrap_or("");
                if bits.len() > n.get() as usize {
                    Err(LreError::InvalidState(s.to_string()))
                } else {
                    Ok(d)
                }
            }
            _ => Ok(d),
        })
    }

    pub fn label(&self) -> String {
        match self.kind {
            StateKind::MaximallyMixed => "maxmixed".into(),
            StateKind::Ghz => "ghz".into(),
            StateKind::ProductZ(bits) => {
                let n = self.n.get() as usize;
                format!("productz:{bits:0n$b}")
            }
            StateKind::RandomDensity(seed) => format!("random:{seed}"),
        }
    }
}

impl FromStr for StateKind {
    type Err = LreError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || LreError::InvalidState(s.to_string());
        match s.split_once(':') {
            None if s == "maxmixed" => Ok(StateKind::MaximallyMixed),
            None if s == "ghz" => Ok(StateKind::Ghz),
            Some(("productz", bits)) if !bits.is_empty() && bits.len() <= 63 => {
                u64::from_str_radix(bits, 2)
                    .map(StateKind::ProductZ)
                    .map_err(|_| bad())
            }
            Some(("random", seed)) => seed
                .parse()
                .map(StateKind::RandomDensity)
                .map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for StateDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A state descriptor plus whatever precomputation its probabilities need.
#[derive(Debug, Clone)]
pub struct TrueState {
    desc: StateDescriptor,
    dense: Option<(DensityMatrix, ThetaVector)>,
}

impl TrueState {
    pub fn prepare(desc: StateDescriptor) -> Result<Self> {
        let dense = match desc.kind {
            StateKind::RandomDensity(seed) => {
                let rho = random_density(desc.n, seed)?;
                let theta = dense_to_theta(&rho)?;
                Some((rho, theta))
            }
            _ => None,
        };
        Ok(Self { desc, dense })
    }

    pub fn descriptor(&self) -> &StateDescriptor {
        &self.desc
    }

    pub fn qubits(&self) -> QubitCount {
        self.desc.n
    }

    pub fn is_maximally_mixed(&self) -> bool {
        self.desc.kind == StateKind::MaximallyMixed
    }

    /// Outcome probabilities of setting `w`.
    pub fn exact_probabilities(&self, w: SettingIndex) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.desc.n.dim()];
        self.probabilities_into(w, &mut out)?;
        Ok(out)
    }

    pub fn probabilities_into(&self, w: SettingIndex, out: &mut [f64]) -> Result<()> {
        let n = self.desc.n;
        let d = n.dim();
        if out.len() != d {
            return Err(LreError::DimensionMismatch {
                expected: d,
                actual: out.len(),
            });
        }
        match self.desc.kind {
            StateKind::MaximallyMixed => out.fill(1.0 / d as f64),
            StateKind::ProductZ(bits) => {
                let axes = w.axes(n);
                let nz = n.get();
                for (s, p) in out.iter_mut().enumerate() {
                    let mut v = 1.0;
                    for (k, a) in axes.iter().enumerate() {
                        let bit = nz - 1 - k as u32;
                        if *a == crate::pauli::Axis::Z {
                            if (s as u64 >> bit) & 1 != (bits >> bit) & 1 {
                                v = 0.0;
                                break;
                            }
                        } else {
                            v *= 0.5;
                        }
                    }
                    *p = v;
                }
            }
            StateKind::Ghz => ghz_probabilities(n, w, out),
            StateKind::RandomDensity(_) => {
                let (_, theta) = self.dense.as_ref().expect("prepared random state");
                theta_to_probabilities_into(theta, w, out)?;
            }
        }
        Ok(())
    }

    /// Dense matrix of the state (closed-form states up to 12 qubits).
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        let n = self.desc.n;
        if let Some((rho, _)) = &self.dense {
            return Ok(rho.clone());
        }
        if n.get() > MAX_DENSE_QUBITS {
            return Err(LreError::TooLarge("dense state", MAX_DENSE_QUBITS, n.get()));
        }
        let d = n.dim();
        let zero = Complex64::new(0.0, 0.0);
        Ok(match self.desc.kind {
            StateKind::MaximallyMixed => DensityMatrix::maximally_mixed(d),
            StateKind::Ghz => {
                let mut psi = vec![zero; d];
                let h = std::f64::consts::FRAC_1_SQRT_2;
                psi[0] = Complex64::new(h, 0.0);
                psi[d - 1] = Complex64::new(h, 0.0);
                DensityMatrix::pure(&psi)?
            }
            StateKind::ProductZ(bits) => {
                let mut psi = vec![zero; d];
                psi[bits as usize] = Complex64::new(1.0, 0.0);
                DensityMatrix::pure(&psi)?
            }
            StateKind::RandomDensity(_) => unreachable!("handled above"),
        })
    }
}

impl SettingFrequencies for TrueState {
    fn qubits(&self) -> QubitCount {
        self.desc.n
    }

    fn frequencies_into(&self, w: SettingIndex, out: &mut [f64]) -> Result<()> {
        self.probabilities_into(w, out)
    }
}

fn ghz_probabilities(n: QubitCount, w: SettingIndex, out: &mut [f64]) {
    let nq = n.get();
    let d = n.dim() as f64;
    let mut z_mask = 0u64;
    let mut y_count = 0u32;
    for (k, a) in w.axes(n).iter().enumerate() {
        let bit = nq - 1 - k as u32;
        match a {
            crate::pauli::Axis::Z => z_mask |= 1 << bit,
            crate::pauli::Axis::Y => y_count += 1,
            crate::pauli::Axis::X => {}
        }
    }
    // Population part: the Z qubits are perfectly correlated.
    let pop = 2f64.powi(z_mask.count_ones() as i32) / (2.0 * d);
    // Coherence part: only when no qubit is measured along Z, with
    // expectation Re(i^#Y).
    let coherence = if z_mask == 0 {
        match y_count % 4 {
            0 => 1.0,
            2 => -1.0,
            _ => 0.0,
        }
    } else {
        0.0
    };
    for (s, p) in out.iter_mut().enumerate() {
        let sz = s as u64 & z_mask;
        let mut v = 0.0;
        if sz == 0 {
            v += pop;
        }
        if sz == z_mask {
            v += pop;
        }
        if coherence != 0.0 {
            let sign = if (s as u64).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            v += sign * coherence / d;
        }
        *p = v;
    }
}

/// Row `r` of `Omega_i` (without the `2^(-n/2)` factor): the nonzero value
/// and its column, assembled one qubit at a time.
pub(crate) fn omega_row_entry(n: QubitCount, i: BasisIndex, r: usize) -> (Complex64, usize) {
    let nq = n.get();
    let mut value = Complex64::new(1.0, 0.0);
    let mut col = 0usize;
    for k in 1..=nq {
        let bit = nq - k;
        let (f, cb) = omega_entry_factor(i.digit(n, k), ((r >> bit) & 1) as u8);
        value *= f;
        col |= (cb as usize) << bit;
    }
    (value, col)
}

/// `theta_i = Tr(rho Omega_i)` for every basis operator, `O(8^n)`.
pub fn dense_to_theta(rho: &HermitianMatrix) -> Result<ThetaVector> {
    let n = rho.qubits().ok_or(LreError::NotPowerOfTwo(rho.dim()))?;
    if n.get() > MAX_DENSE_STATE_QUBITS {
        return Err(LreError::TooLarge(
            "dense_to_theta",
            MAX_DENSE_STATE_QUBITS,
            n.get(),
        ));
    }
    let asym = rho.max_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(LreError::NotHermitian(asym));
    }
    let d = n.dim();
    let norm = n.basis_norm();
    let values: Vec<f64> = (0..n.num_basis() as u64)
        .into_par_iter()
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..d {
                let (v, c) = omega_row_entry(n, BasisIndex(i), r);
                acc += v * rho.get(c, r);
            }
            norm * acc.re
        })
        .collect();
    ThetaVector::new(n, values)
}

/// Outcome probabilities `p[s] = Gamma^(w,s) . theta` of setting `w`.
pub fn theta_to_probabilities(theta: &ThetaVector, w: SettingIndex) -> Result<Vec<f64>> {
    let mut out = vec![0.0; theta.qubits().dim()];
    theta_to_probabilities_into(theta, w, &mut out)?;
    Ok(out)
}

fn theta_to_probabilities_into(
    theta: &ThetaVector,
    w: SettingIndex,
    out: &mut [f64],
) -> Result<()> {
    let n = theta.qubits();
    w.check(n)?;
    let mut locs = Vec::with_capacity(n.dim());
    nonzero_locations_into(n, w, &mut locs);
    let vals = theta.values();
    for (o, &l) in out.iter_mut().zip(&locs) {
        *o = vals[l as usize];
    }
    walsh_hadamard_in_place(out);
    let norm = n.basis_norm();
    let mut total = 0.0;
    for (s, p) in out.iter_mut().enumerate() {
        *p *= norm;
        if *p < -PROBABILITY_TOL {
            return Err(LreError::Unphysical(format!(
                "setting {} outcome {s} has probability {p:e}",
                w.label(n)
            )));
        }
        total += *p;
    }
    if (total - 1.0).abs() > PROBABILITY_TOL {
        return Err(LreError::Unphysical(format!(
            "setting {} probabilities sum to {total}",
            w.label(n)
        )));
    }
    Ok(())
}

/// Seeded generator for the substream belonging to one setting.
pub fn setting_rng(seed: u64, w: SettingIndex) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(w.0);
    rng
}

/// Seed of trial `t` in a Monte-Carlo loop keyed by `base`.
pub fn trial_seed(base: u64, t: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = base.wrapping_add(t.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `shots` outcomes from `probs` by sequential conditional binomials.
pub fn sample_multinomial<R: rand::Rng + ?Sized>(
    rng: &mut R,
    shots: u64,
    probs: &[f64],
    out: &mut [u64],
) {
    let mut remaining = shots;
    let mut mass = 1.0f64;
    let last = probs.len() - 1;
    for (s, (&p, o)) in probs.iter().zip(out.iter_mut()).enumerate() {
        if remaining == 0 {
            *o = 0;
            continue;
        }
        if s == last {
            *o = remaining;
            remaining = 0;
            continue;
        }
        let q = if mass > 0.0 {
            (p.max(0.0) / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = if q == 0.0 {
            0
        } else if q == 1.0 {
            remaining
        } else {
            Binomial::new(remaining, q)
                .expect("valid binomial parameters")
                .sample(rng)
        };
        *o = k;
        remaining -= k;
        mass -= p.max(0.0);
    }
}

/// Samples `shots` outcomes per setting from the exact distribution of
/// `state`. Setting `w` draws from the substream `(seed, w)`, so the record
/// does not depend on the thread schedule.
pub fn sample_counts(state: &TrueState, shots: u64, seed: u64) -> Result<MeasurementRecord> {
    if shots == 0 {
        return Err(LreError::InvalidArgument(
            "shots per setting must be >= 1".into(),
        ));
    }
    let n = state.qubits();
    let d = n.dim();
    let mut counts = vec![0u64; n.num_settings() * d];
    counts.par_chunks_mut(d).enumerate().try_for_each_init(
        || vec![0.0; d],
        |probs, (w, row)| -> Result<()> {
            let w = SettingIndex(w as u64);
            state.probabilities_into(w, probs)?;
            let mut rng = setting_rng(seed, w);
            sample_multinomial(&mut rng, shots, probs, row);
            Ok(())
        },
    )?;
    MeasurementRecord::new(
        n,
        shots,
        Some(seed),
        Some(state.descriptor().label()),
        counts,
    )
}

/// Counts equal to `shots * p` exactly; fails unless every product is an
/// integer (to 1e-9).
pub fn exact_counts(state: &TrueState, shots: u64) -> Result<MeasurementRecord> {
    let n = state.qubits();
    let d = n.dim();
    let mut counts = vec![0u64; n.num_settings() * d];
    let mut probs = vec![0.0; d];
    for (w, row) in counts.chunks_mut(d).enumerate() {
        let w = SettingIndex(w as u64);
        state.probabilities_into(w, &mut probs)?;
        for (c, p) in row.iter_mut().zip(&probs) {
            let x = p * shots as f64;
            let r = x.round();
            if (x - r).abs() > 1e-9 {
                return Err(LreError::InvalidArgument(format!(
                    "exact counts need shots*p integral; setting {} has {x}",
                    w.label(n)
                )));
            }
            *c = r as u64;
        }
    }
    MeasurementRecord::new(n, shots, None, Some(state.descriptor().label()), counts)
}

/// Full-rank random state `G G^dagger / Tr(G G^dagger)`.
pub fn random_density(n: QubitCount, seed: u64) -> Result<DensityMatrix> {
    if n.get() > MAX_DENSE_STATE_QUBITS {
        return Err(LreError::TooLarge(
            "random density state",
            MAX_DENSE_STATE_QUBITS,
            n.get(),
        ));
    }
    random_density_dim(n.dim(), seed)
}

/// Random density matrix of arbitrary dimension (same ensemble).
pub fn random_density_dim(d: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let g: Vec<Complex64> = (0..d * d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let mut data = vec![Complex64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in r..d {
            let v: Complex64 = (0..d).map(|k| g[r * d + k] * g[c * d + k].conj()).sum();
            data[r * d + c] = v;
            data[c * d + r] = v.conj();
        }
    }
    let tr: f64 = (0..d).map(|r| data[r * d + r].re).sum();
    for z in &mut data {
        *z /= tr;
    }
    let mut m = HermitianMatrix::from_row_major_unchecked(d, data)?;
    m.symmetrize();
    Ok(DensityMatrix::new_unchecked(m))
}
