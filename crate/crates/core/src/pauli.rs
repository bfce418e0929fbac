//! Index arithmetic for the tensor-product Pauli basis and the structured
//! transforms built on it.
//!
//! Conventions used throughout the crate:
//!
//! * qubit 1 is the most significant digit (or bit) of every index, so a basis
//!   index is `i = sum_k i_k * 4^(n-k)`;
//! * a basis digit is `0 = I, 1 = X, 2 = Y, 3 = Z`;
//! * a setting digit reuses the values `1 = X, 2 = Y, 3 = Z`, stored in base 3
//!   as `w_k - 1`;
//! * an outcome bit is `0` for eigenvalue `+1` and `1` for eigenvalue `-1`.
//!
//! Inside a setting the `2^n` nonzero basis positions are labelled by a subset
//! mask `t`: bit `b` of `t` (LSB = 0) refers to qubit `n - b`, matching the
//! outcome bit layout. With that layout the sign `prod_{k in t} (-1)^{s_k}` is
//! `(-1)^popcount(s & t)` and the per-setting sign matrix is the plain
//! Walsh-Hadamard matrix.

use std::fmt;
use std::ops::{Add, Sub};

use num_complex::Complex64;

use crate::error::{LreError, Result};

/// Largest qubit count accepted; keeps `4^n` and `6^n` inside `u64`.
pub const MAX_QUBITS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitCount(u32);

impl QubitCount {
    pub fn new(n: u32) -> Result<Self> {
        if (1..=MAX_QUBITS).contains(&n) {
            Ok(Self(n))
        } else {
            Err(LreError::InvalidQubitCount(n))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Hilbert space dimension `d = 2^n`, also the number of outcomes per setting.
    #[inline]
    pub fn dim(self) -> usize {
        1usize << self.0
    }

    /// Number of Pauli settings, `3^n`.
    #[inline]
    pub fn num_settings(self) -> usize {
        3usize.pow(self.0)
    }

    /// Number of basis operators, `4^n`.
    #[inline]
    pub fn num_basis(self) -> usize {
        1usize << (2 * self.0)
    }

    /// Number of measurement projectors `M = 6^n`.
    #[inline]
    pub fn num_projectors(self) -> u64 {
        6u64.pow(self.0)
    }

    /// The global `2^(-n/2)` normalisation of the basis operators.
    #[inline]
    pub fn basis_norm(self) -> f64 {
        (self.dim() as f64).sqrt().recip()
    }
}

impl fmt::Display for QubitCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X = 1,
    Y = 2,
    Z = 3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    #[inline]
    pub fn digit(self) -> u8 {
        self as u8
    }

    pub fn from_digit(d: u8) -> Option<Self> {
        match d {
            1 => Some(Axis::X),
            2 => Some(Axis::Y),
            3 => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }
}

/// Label of a basis operator `Omega_i`, `i` in `[0, 4^n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex(pub u64);

impl BasisIndex {
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        QubitCount::new(digits.len() as u32)?;
        let mut i = 0u64;
        for &d in digits {
            if d > 3 {
                return Err(LreError::InvalidArgument(format!("basis digit {d} > 3")));
            }
            i = (i << 2) | d as u64;
        }
        Ok(Self(i))
    }

    pub fn check(self, n: QubitCount) -> Result<Self> {
        if (self.0 as usize) < n.num_basis() {
            Ok(self)
        } else {
            Err(LreError::IndexOutOfRange {
                what: "basis",
                index: self.0,
                n: n.get(),
            })
        }
    }

    /// Digit of qubit `k` (1-based).
    #[inline]
    pub fn digit(self, n: QubitCount, k: u32) -> u8 {
        ((self.0 >> (2 * (n.get() - k))) & 3) as u8
    }

    pub fn digits(self, n: QubitCount) -> Vec<u8> {
        (1..=n.get()).map(|k| self.digit(n, k)).collect()
    }

    /// Number of identity factors.
    #[inline]
    pub fn zero_count(self, n: QubitCount) -> u32 {
        let nonzero = (self.0 | (self.0 >> 1)) & 0x5555_5555_5555_5555;
        n.get() - nonzero.count_ones()
    }

    /// Bit mask (qubit 1 at bit `n-1`) of the qubits whose factor is `X` or `Y`,
    /// i.e. the row-to-column flip pattern of `Omega_i`.
    #[inline]
    pub fn flip_mask(self, n: QubitCount) -> u64 {
        let mut m = 0u64;
        for b in 0..n.get() {
            let d = (self.0 >> (2 * b)) & 3;
            if d == 1 || d == 2 {
                m |= 1 << b;
            }
        }
        m
    }
}

/// Label of a measurement setting, `w` in `[0, 3^n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SettingIndex(pub u64);

impl SettingIndex {
    pub fn from_axes(axes: &[Axis]) -> Result<Self> {
        QubitCount::new(axes.len() as u32)?;
        Ok(Self(
            axes.iter()
                .fold(0u64, |w, a| w * 3 + (a.digit() as u64 - 1)),
        ))
    }

    pub fn check(self, n: QubitCount) -> Result<Self> {
        if (self.0 as usize) < n.num_settings() {
            Ok(self)
        } else {
            Err(LreError::IndexOutOfRange {
                what: "setting",
                index: self.0,
                n: n.get(),
            })
        }
    }

    /// Axes with qubit 1 first.
    pub fn axes(self, n: QubitCount) -> Vec<Axis> {
        let mut out = vec![Axis::X; n.get() as usize];
        let mut w = self.0;
        for slot in out.iter_mut().rev() {
            *slot = Axis::from_digit((w % 3) as u8 + 1).expect("base-3 digit");
            w /= 3;
        }
        out
    }

    /// The setting written as `n` letters from `{X, Y, Z}`.
    pub fn label(self, n: QubitCount) -> String {
        self.axes(n).into_iter().map(Axis::letter).collect()
    }

    pub fn parse_label(label: &str) -> Option<Self> {
        let axes: Option<Vec<Axis>> = label.chars().map(Axis::from_letter).collect();
        Self::from_axes(&axes?).ok()
    }

    /// The basis index whose digits are exactly the setting's axes.
    pub fn full_basis_index(self, n: QubitCount) -> BasisIndex {
        BasisIndex(
            self.axes(n)
                .iter()
                .fold(0u64, |i, a| (i << 2) | a.digit() as u64),
        )
    }
}

/// Outcome label `s` in `[0, 2^n)` within one setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeIndex(pub u64);

impl OutcomeIndex {
    /// `prod_{k in t} (-1)^{s_k}` for the subset mask `t`.
    #[inline]
    pub fn sign(self, t: u64) -> f64 {
        if (self.0 & t).count_ones() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Coefficient vector of a single-qubit eigenprojector in the normalised
/// basis `{I, X, Y, Z} / sqrt(2)`.
pub fn gamma_single_qubit(axis: Axis, sign: i8) -> [f64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut g = [h, 0.0, 0.0, 0.0];
    g[axis.digit() as usize] = if sign >= 0 { h } else { -h };
    g
}

/// Positions of the `2^n` nonzero coefficients shared by every outcome of
/// setting `w`, in ascending subset-mask order.
pub fn nonzero_locations(n: QubitCount, w: SettingIndex) -> Vec<BasisIndex> {
    let mut out = Vec::with_capacity(n.dim());
    nonzero_locations_into(n, w, &mut out);
    out.into_iter().map(BasisIndex).collect()
}

/// Same as [`nonzero_locations`] but writes raw indices into a reusable buffer.
pub fn nonzero_locations_into(n: QubitCount, w: SettingIndex, out: &mut Vec<u64>) {
    let full = w.full_basis_index(n).0;
    let dim = n.dim();
    out.clear();
    out.resize(dim, 0);
    for t in 1..dim {
        let low = t.trailing_zeros();
        out[t] = out[t & (t - 1)] | (full & (3u64 << (2 * low)));
    }
}

/// In-place unnormalised Walsh-Hadamard transform. `x.len()` must be a power
/// of two.
pub fn walsh_hadamard_in_place<T>(x: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let len = x.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in x.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

/// `u[t] = sum_s (-1)^popcount(s & t) v[s]`, unnormalised.
pub fn walsh_hadamard_transform(v: &[f64]) -> Result<Vec<f64>> {
    if !v.len().is_power_of_two() {
        return Err(LreError::NotPowerOfTwo(v.len()));
    }
    let mut u = v.to_vec();
    walsh_hadamard_in_place(&mut u);
    Ok(u)
}

/// Diagonal entry of `X^T X` for the complete Pauli measurement set.
#[inline]
pub fn xtx_diagonal(n: QubitCount, i: BasisIndex) -> f64 {
    3f64.powi(i.zero_count(n) as i32)
}

/// The single nonzero entry of `sigma_digit` in row `row_bit`, and its column.
#[inline]
pub fn omega_entry_factor(digit: u8, row_bit: u8) -> (Complex64, u8) {
    let odd = row_bit & 1 == 1;
    match digit {
        0 => (Complex64::new(1.0, 0.0), row_bit),
        1 => (Complex64::new(1.0, 0.0), 1 - row_bit),
        2 => (
            Complex64::new(0.0, if odd { 1.0 } else { -1.0 }),
            1 - row_bit,
        ),
        3 => (Complex64::new(if odd { -1.0 } else { 1.0 }, 0.0), row_bit),
        _ => panic!("Pauli digit {digit} out of range"),
    }
}

/// `(-i)^k` for small non-negative `k`.
#[inline]
pub(crate) fn minus_i_pow(k: u32) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Basis index of the operator with flip mask `m` and phase choice `c`: on
/// each qubit, `m = 0` selects `I`/`Z` and `m = 1` selects `X`/`Y`, with `c`
/// choosing the second of each pair.
#[inline]
pub(crate) fn basis_from_mask_choice(n: QubitCount, m: u64, c: u64) -> u64 {
    let mut i = 0u64;
    for b in 0..n.get() {
        let mb = (m >> b) & 1;
        let cb = (c >> b) & 1;
        let d = if mb == 1 { 1 + cb } else { 3 * cb };
        i |= d << (2 * b);
    }
    i
}
