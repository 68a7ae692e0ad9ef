//! Register states as chains over the face complex of an `l`-vertex simplex.
//!
//! A basis vector of an `l`-bit register is labelled by the subset of bits
//! that are in state `|1⟩`; that subset is a face of the simplex whose
//! vertices are the bits. Amplitude index `i` holds the coefficient of the
//! face whose bitmask is `i`: bit `k` (0-based) of the register is binary
//! digit `k` of the index, so bit 0 is the least-significant digit.
//!
//! The empty face (index 0, all bits `|0⟩`) has dimension −1 and is kept as a
//! grade of its own.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported register length (2^24 amplitudes).
pub const MAX_BITS: usize = 24;

/// Default relative threshold below which an amplitude counts as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// A face of the register simplex, identified by a bitmask over the `l` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SimplexIndex {
    bits: usize,
    #[serde(rename = "l")]
    len: usize,
}

impl SimplexIndex {
    pub fn new(bits: usize, len: usize) -> Result<Self> {
        if len > MAX_BITS || bits >> len != 0 {
            return Err(Error::SimplexOutOfRange { bits, l: len });
        }
        Ok(Self { bits, len })
    }

    pub fn empty(len: usize) -> Self {
        Self { bits: 0, len }
    }

    /// The single-vertex face `{bit}`.
    pub fn vertex(bit: usize, len: usize) -> Result<Self> {
        if bit >= len {
            return Err(Error::BitOutOfRange { bit, l: len });
        }
        Ok(Self { bits: 1 << bit, len })
    }

    /// Builds a face from 0-based bit positions.
    pub fn from_bits<I: IntoIterator<Item = usize>>(bits: I, len: usize) -> Result<Self> {
        let mut mask = 0usize;
        for b in bits {
            if b >= len {
                return Err(Error::BitOutOfRange { bit: b, l: len });
            }
            mask |= 1 << b;
        }
        Ok(Self { bits: mask, len })
    }

    #[inline]
    pub fn bits(&self) -> usize {
        self.bits
    }

    #[inline]
    pub fn register_len(&self) -> usize {
        self.len
    }

    /// Number of vertices minus one; the empty face has dimension −1.
    #[inline]
    pub fn dimension(&self) -> i32 {
        self.bits.count_ones() as i32 - 1
    }

    #[inline]
    pub fn contains(&self, bit: usize) -> bool {
        bit < self.len && self.bits >> bit & 1 == 1
    }

    pub fn with(&self, bit: usize) -> Self {
        Self { bits: self.bits | 1 << bit, len: self.len }
    }

    pub fn without(&self, bit: usize) -> Self {
        Self { bits: self.bits & !(1 << bit), len: self.len }
    }

    /// 0-based positions of the bits present in the face, ascending.
    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&b| self.bits >> b & 1 == 1)
    }
}

impl fmt::Display for SimplexIndex {
    /// Prints the face as a set of 1-based vertex labels, e.g. `{1,2}` or `∅`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits == 0 {
            return write!(f, "∅");
        }
        write!(f, "{{")?;
        for (i, v) in self.vertices().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "}}")
    }
}

/// Pure state of an `l`-bit register: `2^l` complex amplitudes indexed by
/// face bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct RegisterState {
    len: usize,
    amplitudes: Vec<Complex64>,
}

impl RegisterState {
    /// Validates length and finiteness. Zero states are allowed here; the
    /// decomposer rejects them at its own entry.
    pub fn new(len: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(len)?;
        let expected = 1usize << len;
        if amplitudes.len() != expected {
            return Err(Error::AmplitudeCount { l: len, expected, found: amplitudes.len() });
        }
        if let Some(index) = amplitudes.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { len, amplitudes })
    }

    /// Infers `l` from the amplitude count, which must be a power of two ≥ 2.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Precondition(format!(
                "amplitude count {n} is not a power of two >= 2"
            )));
        }
        Self::new(n.trailing_zeros() as usize, amplitudes)
    }

    pub fn zero(len: usize) -> Result<Self> {
        check_len(len)?;
        Ok(Self { len, amplitudes: vec![Complex64::new(0.0, 0.0); 1 << len] })
    }

    /// The computational basis vector `|s⟩`.
    pub fn basis(len: usize, bits: usize) -> Result<Self> {
        let s = SimplexIndex::new(bits, len)?;
        let mut state = Self::zero(len)?;
        state.amplitudes[s.bits()] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Explicit tensor product of single-bit vectors; `factors[k]` acts on bit `k`.
    pub fn product(factors: &[[Complex64; 2]]) -> Result<Self> {
        let len = factors.len();
        check_len(len)?;
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        for (k, f) in factors.iter().enumerate() {
            let half = 1usize << k;
            amplitudes.resize(half * 2, Complex64::new(0.0, 0.0));
            for i in 0..half {
                let a = amplitudes[i];
                amplitudes[i] = a * f[0];
                amplitudes[i + half] = a * f[1];
            }
        }
        Self::new(len, amplitudes)
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(len: usize) -> Result<Self> {
        let mut state = Self::zero(len)?;
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        state.amplitudes[0] = amp;
        let last = state.amplitudes.len() - 1;
        state.amplitudes[last] = amp;
        Ok(state)
    }

    /// Equal superposition of the `l` single-excitation basis vectors.
    pub fn w(len: usize) -> Result<Self> {
        let mut state = Self::zero(len)?;
        let amp = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        for k in 0..len {
            state.amplitudes[1 << k] = amp;
        }
        Ok(state)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    #[inline]
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    #[inline]
    pub fn amplitude(&self, s: SimplexIndex) -> Complex64 {
        self.amplitudes[s.bits()]
    }

    /// Amplitude of the empty face, `h^∅`.
    #[inline]
    pub fn empty_amplitude(&self) -> Complex64 {
        self.amplitudes[0]
    }

    /// Amplitude of the single-vertex face `{bit}`.
    #[inline]
    pub fn single_amplitude(&self, bit: usize) -> Complex64 {
        self.amplitudes[1 << bit]
    }

    pub fn squared_norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { len: self.len, amplitudes: self.amplitudes.iter().map(|a| a * factor).collect() }
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Elementwise difference `self − other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_len(other)?;
        let amplitudes = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a - b).collect();
        Ok(Self { len: self.len, amplitudes })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_len(other)?;
        let amplitudes = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a + b).collect();
        Ok(Self { len: self.len, amplitudes })
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len, other.len, "register length mismatch");
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Count of amplitudes with modulus above `rel_tol · ‖h‖`.
    pub fn nonzero_count(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.norm();
        self.amplitudes.iter().filter(|a| a.norm() > cut).count()
    }

    /// Largest `|h^{k}|` over the single-vertex faces.
    pub fn max_single_excitation(&self) -> f64 {
        (0..self.len).map(|k| self.single_amplitude(k).norm()).fold(0.0, f64::max)
    }

    /// Entries of the `n`-skeleton (faces with `n + 1` vertices) in ascending
    /// index order. Without `include_zeros`, entries with modulus at most
    /// [`ZERO_TOL`]` · ‖h‖` are dropped.
    pub fn skeleton(&self, n: i32, include_zeros: bool) -> Result<Vec<(SimplexIndex, Complex64)>> {
        let max = self.len as i32 - 1;
        if n < -1 || n > max {
            return Err(Error::DimensionOutOfRange { n, max });
        }
        let cut = ZERO_TOL * self.norm();
        let want = (n + 1) as u32;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, a)| i.count_ones() == want && (include_zeros || a.norm() > cut))
            .map(|(i, &a)| (SimplexIndex { bits: i, len: self.len }, a))
            .collect())
    }

    fn check_same_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::AmplitudeCount {
                l: self.len,
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

pub(crate) fn check_len(len: usize) -> Result<()> {
    if !(1..=MAX_BITS).contains(&len) {
        return Err(Error::RegisterLength { l: len, min: 1, max: MAX_BITS });
    }
    Ok(())
}

/// Random unit vector with i.i.d. standard complex Gaussian entries,
/// deterministic for a fixed `(len, seed)`.
pub fn random_state(len: usize, seed: u64) -> Result<RegisterState> {
    check_len(len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state_with(len, &mut rng)
}

pub(crate) fn random_state_with<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> Result<RegisterState> {
    check_len(len)?;
    let amplitudes: Vec<Complex64> = (0..1usize << len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    RegisterState::new(len, amplitudes)?.normalized()
}

/// Random unit vector in `C²`, uniform on the Bloch sphere.
pub(crate) fn random_qubit<R: rand::Rng + ?Sized>(rng: &mut R) -> [Complex64; 2] {
    let v: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    [Complex64::new(v[0] / n, v[1] / n), Complex64::new(v[2] / n, v[3] / n)]
}

/// Random product state `⊗_k v_k`, each factor uniform on the Bloch sphere.
pub fn random_product_state(len: usize, seed: u64) -> Result<RegisterState> {
    check_len(len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<[Complex64; 2]> = (0..len).map(|_| random_qubit(&mut rng)).collect();
    RegisterState::product(&factors)
}
