//! Product-state test and factorization through the exchangeability
//! condition `h^s · h^t = h^{s∖v} · h^{t∪v}` (for `v ∈ s`, `v ∉ t`).
//!
//! A chain is a product state exactly when every such condition holds. The
//! full family of triples is `O(4^l · l)`; [`is_product`] checks a spanning
//! subfamily of size `2^l`: after relabelling so that `h^∅` is an amplitude
//! of maximal modulus, it suffices that every face `s` with at least two
//! vertices satisfies the condition against `t = ∅` with `v` its lowest
//! vertex. Induction on the dimension of `s` then pins every amplitude to
//! the closed form `h^s = h^∅ · Π_{k∈s} (h^{k} / h^∅)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::register::{RegisterState, SimplexIndex, ZERO_TOL};

/// Default tolerance for product tests, relative to `‖h‖²`.
pub const PRODUCT_TOL: f64 = 1e-10;

/// Largest register length accepted by [`worst_defect_full`].
pub const FULL_SCAN_MAX_BITS: usize = 10;

/// One exchangeability condition `(s, t, v)` and its defect
/// `h^s·h^t − h^{s∖v}·h^{t∪v}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectTriple {
    pub s: SimplexIndex,
    pub t: SimplexIndex,
    /// 0-based bit index of the exchanged vertex.
    pub vertex: usize,
    pub defect: Complex64,
    pub magnitude: f64,
}

impl fmt::Display for DefectTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(s={}, t={}, v={})", self.s, self.t, self.vertex + 1)
    }
}

/// `h^s·h^t − h^{s∖v}·h^{t∪v}`; requires `v ∈ s` and `v ∉ t`.
pub fn exchangeability_defect(
    h: &RegisterState,
    s: SimplexIndex,
    t: SimplexIndex,
    vertex: usize,
) -> Result<Complex64> {
    let l = h.len();
    if s.register_len() != l || t.register_len() != l {
        return Err(Error::Precondition(format!("simplex registers differ from l = {l}")));
    }
    if vertex >= l {
        return Err(Error::BitOutOfRange { bit: vertex, l });
    }
    if !s.contains(vertex) {
        return Err(Error::Precondition(format!("vertex {} not in s = {s}", vertex + 1)));
    }
    if t.contains(vertex) {
        return Err(Error::Precondition(format!("vertex {} already in t = {t}", vertex + 1)));
    }
    Ok(raw_defect(h.amplitudes(), s.bits(), t.bits(), vertex))
}

#[inline]
fn raw_defect(a: &[Complex64], s: usize, t: usize, v: usize) -> Complex64 {
    a[s] * a[t] - a[s & !(1 << v)] * a[t | 1 << v]
}

/// Bitmask of the amplitude with the largest modulus (smallest index on
/// ties). Flipping exactly these bits moves that amplitude to index 0.
pub fn relabel_mask(h: &RegisterState) -> usize {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, a) in h.amplitudes().iter().enumerate() {
        let m = a.norm_sqr();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    best
}

/// Worst defect over every valid `(s, t, v)` triple.
pub fn worst_defect_full(h: &RegisterState) -> Result<Option<DefectTriple>> {
    let l = h.len();
    if l > FULL_SCAN_MAX_BITS {
        return Err(Error::Shape { what: "full exchangeability scan", constraint: "<= 10", l });
    }
    let a = h.amplitudes();
    let mut worst: Option<DefectTriple> = None;
    for s in 1..a.len() {
        for t in 0..a.len() {
            for v in 0..l {
                if s >> v & 1 == 0 || t >> v & 1 == 1 {
                    continue;
                }
                let defect = raw_defect(a, s, t, v);
                let magnitude = defect.norm();
                if worst.is_none_or(|w| magnitude > w.magnitude) {
                    worst = Some(DefectTriple {
                        s: SimplexIndex::new(s, l)?,
                        t: SimplexIndex::new(t, l)?,
                        vertex: v,
                        defect,
                        magnitude,
                    });
                }
            }
        }
    }
    Ok(worst)
}

/// Worst defect over the reduced spanning family, evaluated after the
/// relabelling of [`relabel_mask`] and reported as the equivalent triple in
/// the original labelling (the defect value is unchanged by the relabelling).
pub fn worst_defect_reduced(h: &RegisterState) -> Option<DefectTriple> {
    let l = h.len();
    let mask = relabel_mask(h);
    let a = h.amplitudes();
    // amplitude in the relabelled frame
    let g = |i: usize| a[i ^ mask];
    let mut worst: Option<DefectTriple> = None;
    for i in 3..a.len() {
        if i.count_ones() < 2 {
            continue;
        }
        let v = i.trailing_zeros() as usize;
        let defect = g(i) * g(0) - g(i & !(1 << v)) * g(1 << v);
        let magnitude = defect.norm();
        if worst.is_none_or(|w| magnitude > w.magnitude) {
            let (s, t) = if mask >> v & 1 == 1 { (mask, i ^ mask) } else { (i ^ mask, mask) };
            worst = Some(DefectTriple {
                s: SimplexIndex::new(s, l).expect("index within register"),
                t: SimplexIndex::new(t, l).expect("index within register"),
                vertex: v,
                defect,
                magnitude,
            });
        }
    }
    worst
}

fn nonzero_norm_sqr(h: &RegisterState) -> Result<f64> {
    let n2 = h.squared_norm();
    if n2 == 0.0 {
        return Err(Error::ZeroState);
    }
    Ok(n2)
}

/// Product test over the reduced family: all defects within `tol · ‖h‖²`.
pub fn is_product(h: &RegisterState, tol: f64) -> Result<bool> {
    let n2 = nonzero_norm_sqr(h)?;
    Ok(worst_defect_reduced(h).is_none_or(|w| w.magnitude <= tol * n2))
}

/// Product test over every triple; `O(4^l · l)`, limited to small registers.
pub fn is_product_full(h: &RegisterState, tol: f64) -> Result<bool> {
    let n2 = nonzero_norm_sqr(h)?;
    Ok(worst_defect_full(h)?.is_none_or(|w| w.magnitude <= tol * n2))
}

/// Canonical factorization
/// `scale · global_phase · ⊗_k (cos α_k |0⟩ + e^{iφ_k} sin α_k |1⟩)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductFactorization {
    pub global_phase: Complex64,
    pub overall_scale: f64,
    /// `α_k ∈ [0, π/2]`.
    pub angles: Vec<f64>,
    /// `φ_k ∈ (−π, π]`, zero where `sin α_k` vanishes.
    pub phases: Vec<f64>,
    /// Bits whose labels were swapped to move a maximal amplitude to `∅`
    /// before reading off the parameters. Already folded into the angles.
    pub relabel_mask: usize,
}

impl ProductFactorization {
    /// Unit single-bit factors `(cos α_k, e^{iφ_k} sin α_k)`.
    pub fn factors(&self) -> Vec<[Complex64; 2]> {
        self.angles
            .iter()
            .zip(&self.phases)
            .map(|(&alpha, &phi)| {
                let (s, c) = alpha.sin_cos();
                [Complex64::new(c, 0.0), Complex64::from_polar(s, phi)]
            })
            .collect()
    }

    pub fn reconstruct(&self) -> Result<RegisterState> {
        let p = RegisterState::product(&self.factors())?;
        Ok(p.scaled(self.global_phase * self.overall_scale))
    }
}

fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Reads the factor parameters of a product state: `tan α_k = |h^{k}/h^∅|`
/// and `φ_k = arg h^{k} − arg h^∅`, after relabelling so that `h^∅` is maximal.
pub fn factorize_product(h: &RegisterState, tol: f64) -> Result<ProductFactorization> {
    let n2 = nonzero_norm_sqr(h)?;
    if let Some(w) = worst_defect_reduced(h) {
        if w.magnitude > tol * n2 {
            return Err(Error::NotProduct(w));
        }
    }
    let l = h.len();
    let scale = n2.sqrt();
    let mask = relabel_mask(h);
    let a = h.amplitudes();
    let g0 = a[mask];
    let theta0 = g0.arg();
    let mut global_phase = Complex64::from_polar(1.0, theta0);
    let mut angles = Vec::with_capacity(l);
    let mut phases = Vec::with_capacity(l);
    for k in 0..l {
        let gk = a[(1 << k) ^ mask];
        let mut alpha = gk.norm().atan2(g0.norm());
        let mut phi = if gk.norm() > 0.0 { wrap_phase(gk.arg() - theta0) } else { 0.0 };
        if mask >> k & 1 == 1 {
            // (cos α, e^{iφ} sin α) with labels swapped is
            // e^{iφ} · (cos(π/2 − α), e^{−iφ} sin(π/2 − α))
            global_phase *= Complex64::from_polar(1.0, phi);
            alpha = FRAC_PI_2 - alpha;
            phi = wrap_phase(-phi);
        }
        if alpha.sin() <= ZERO_TOL {
            phi = 0.0;
        }
        angles.push(alpha.clamp(0.0, FRAC_PI_2));
        phases.push(phi);
    }
    Ok(ProductFactorization { global_phase, overall_scale: scale, angles, phases, relabel_mask: mask })
}
