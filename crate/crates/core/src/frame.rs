//! Per-bit unitaries and their tensor products.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::register::{random_qubit, RegisterState};

/// Allowed deviation of `U·U†` from the identity, entrywise.
pub const UNITARY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A 2×2 unitary acting on one bit, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[Complex64; 2]; 2]", into = "[[Complex64; 2]; 2]")]
pub struct LocalUnitary {
    rows: [[Complex64; 2]; 2],
}

impl TryFrom<[[Complex64; 2]; 2]> for LocalUnitary {
    type Error = Error;

    fn try_from(rows: [[Complex64; 2]; 2]) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<LocalUnitary> for [[Complex64; 2]; 2] {
    fn from(u: LocalUnitary) -> Self {
        u.rows
    }
}

impl LocalUnitary {
    pub fn new(rows: [[Complex64; 2]; 2]) -> Result<Self> {
        let u = Self { rows };
        let deviation = u.unitarity_deviation();
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }

    #[cfg(test)]
    pub(crate) fn new_unchecked(rows: [[Complex64; 2]; 2]) -> Self {
        Self { rows }
    }

    pub const fn identity() -> Self {
        Self { rows: [[ONE, ZERO], [ZERO, ONE]] }
    }

    /// The label swap `|0⟩ ↔ |1⟩`.
    pub const fn flip() -> Self {
        Self { rows: [[ZERO, ONE], [ONE, ZERO]] }
    }

    /// Builds
    /// ```text
    /// [ cos θ            −e^{iλ} sin θ     ]
    /// [ e^{iφ} sin θ      e^{i(φ+λ)} cos θ ]
    /// ```
    pub fn from_angles(theta: f64, phi: f64, lambda: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            rows: [
                [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
                [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
            ],
        }
    }

    /// Unitary whose first row is `conj(v)` for a unit vector `v`, so that
    /// it maps `v` onto `|0⟩`.
    pub(crate) fn aligning(v: [Complex64; 2]) -> Self {
        Self { rows: [[v[0].conj(), v[1].conj()], [-v[1], v[0]]] }
    }

    /// Haar-random up to a global phase.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::aligning(random_qubit(rng))
    }

    #[inline]
    pub fn rows(&self) -> &[[Complex64; 2]; 2] {
        &self.rows
    }

    pub fn adjoint(&self) -> Self {
        let r = &self.rows;
        Self { rows: [[r[0][0].conj(), r[1][0].conj()], [r[0][1].conj(), r[1][1].conj()]] }
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.rows, &rhs.rows);
        Self {
            rows: std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j])),
        }
    }

    #[inline]
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let r = &self.rows;
        [r[0][0] * v[0] + r[0][1] * v[1], r[1][0] * v[0] + r[1][1] * v[1]]
    }

    /// Column `b` of `U†`: the image of `|b⟩` when mapping the primed basis
    /// back to the original one.
    #[inline]
    pub fn back_transformed_basis(&self, b: usize) -> [Complex64; 2] {
        [self.rows[b][0].conj(), self.rows[b][1].conj()]
    }

    /// Gram-Schmidt on the rows; removes rounding drift from long products.
    pub(crate) fn reorthonormalized(&self) -> Self {
        let [r0, r1] = self.rows;
        let n0 = (r0[0].norm_sqr() + r0[1].norm_sqr()).sqrt();
        let r0 = [r0[0] / n0, r0[1] / n0];
        let overlap = r0[0].conj() * r1[0] + r0[1].conj() * r1[1];
        let r1 = [r1[0] - overlap * r0[0], r1[1] - overlap * r0[1]];
        let n1 = (r1[0].norm_sqr() + r1[1].norm_sqr()).sqrt();
        Self { rows: [r0, [r1[0] / n1, r1[1] / n1]] }
    }

    /// Largest entrywise modulus of `U·U† − I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.mul(&self.adjoint());
        let mut dev: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { ONE } else { ZERO };
                dev = dev.max((p.rows[i][j] - target).norm());
            }
        }
        if dev.is_nan() {
            f64::INFINITY
        } else {
            dev
        }
    }
}

impl Default for LocalUnitary {
    fn default() -> Self {
        Self::identity()
    }
}

/// One unitary per bit; entry `m` acts on bit `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocalFrame {
    unitaries: Vec<LocalUnitary>,
}

impl LocalFrame {
    pub fn new(unitaries: Vec<LocalUnitary>) -> Self {
        Self { unitaries }
    }

    pub fn identity(len: usize) -> Self {
        Self { unitaries: vec![LocalUnitary::identity(); len] }
    }

    /// Label swaps on exactly the bits set in `mask`.
    pub fn flips(mask: usize, len: usize) -> Self {
        Self {
            unitaries: (0..len)
                .map(|k| if mask >> k & 1 == 1 { LocalUnitary::flip() } else { LocalUnitary::identity() })
                .collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self { unitaries: (0..len).map(|_| LocalUnitary::random(rng)).collect() }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    #[inline]
    pub fn unitaries(&self) -> &[LocalUnitary] {
        &self.unitaries
    }

    #[inline]
    pub fn get(&self, bit: usize) -> &LocalUnitary {
        &self.unitaries[bit]
    }

    pub fn adjoint(&self) -> Self {
        Self { unitaries: self.unitaries.iter().map(LocalUnitary::adjoint).collect() }
    }

    /// Left-multiplies bit `bit` by `u`, i.e. the frame now applies `u`
    /// after what it applied before.
    pub(crate) fn push_left(&mut self, bit: usize, u: &LocalUnitary) {
        self.unitaries[bit] = u.mul(&self.unitaries[bit]).reorthonormalized();
    }

    /// The frame that applies `self` first and then `after`.
    pub fn then(&self, after: &Self) -> Self {
        assert_eq!(self.len(), after.len(), "frame length mismatch");
        Self { unitaries: self.unitaries.iter().zip(&after.unitaries).map(|(a, b)| b.mul(a)).collect() }
    }

    pub fn max_unitarity_deviation(&self) -> f64 {
        self.unitaries.iter().map(LocalUnitary::unitarity_deviation).fold(0.0, f64::max)
    }
}

/// Applies `u` to bit `bit` of an amplitude vector in place.
pub(crate) fn apply_bit_in_place(amps: &mut [Complex64], bit: usize, u: &LocalUnitary) {
    let r = &u.rows;
    let stride = 1usize << bit;
    for block in amps.chunks_exact_mut(stride * 2) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a0, *a1);
            *a0 = r[0][0] * x + r[0][1] * y;
            *a1 = r[1][0] * x + r[1][1] * y;
        }
    }
}

/// Returns `(⊗_m U_m) h`, the amplitudes of `h` in the basis selected by `frame`.
pub fn apply_local_frame(h: &RegisterState, frame: &LocalFrame) -> Result<RegisterState> {
    if frame.len() != h.len() {
        return Err(Error::FrameShape { expected: h.len(), found: frame.len() });
    }
    let deviation = frame.max_unitarity_deviation();
    if !(deviation <= UNITARY_TOL) {
        return Err(Error::NotUnitary { deviation });
    }
    let mut g = h.clone();
    for (bit, u) in frame.unitaries().iter().enumerate() {
        if *u != LocalUnitary::identity() {
            apply_bit_in_place(g.amplitudes_mut(), bit, u);
        }
    }
    Ok(g)
}
