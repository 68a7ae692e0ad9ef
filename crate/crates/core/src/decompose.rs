//! Local-frame optimization and the orthogonal product decomposition.
//!
//! The optimizer maximizes `|g^∅|²` for `g = (⊗_m U_m) h` by cyclic
//! coordinate ascent over the bits. For fixed other bits the best `U_m` has
//! a closed form: rotate the pair `(g^∅, g^{m})` onto `|0⟩`, which raises
//! `|g^∅|²` by exactly `|g^{m}|²` and zeroes `g^{m}`. A sweep is therefore
//! at a fixed point exactly when every single-excitation amplitude vanishes.
//!
//! At such a point the leading vector of `g` is (up to the residual
//! single-excitation error) `g^∅|0…0⟩`, and every other nonzero amplitude of
//! `g` belongs to a face with at least two vertices. Mapping those basis
//! vectors back through the frame gives at most `2^l − l` mutually
//! orthogonal product terms.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{apply_bit_in_place, apply_local_frame, LocalFrame, LocalUnitary};
use crate::leading::leading_vector;
use crate::product::relabel_mask;
use crate::register::{RegisterState, SimplexIndex};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_sweeps: usize,
    /// Number of starting frames; restart 0 starts from the identity.
    pub restarts: usize,
    pub seed: u64,
    /// Sweep gain in `|g^∅|²` below which a sweep counts as stalled,
    /// relative to `‖h‖²`.
    pub conv_eps: f64,
    /// Bound on `max_m |g^{m}|` at convergence, relative to `‖h‖`.
    pub stationarity_tol: f64,
    /// Amplitudes at or below this (relative to `‖h‖`) count as zero.
    pub zero_tol: f64,
    pub reconstruction_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 1000,
            restarts: 8,
            seed: 0,
            conv_eps: 1e-14,
            stationarity_tol: 1e-10,
            zero_tol: 1e-12,
            reconstruction_tol: 1e-10,
        }
    }
}

/// Rotates the pair `(g^∅, g^{m})` of `amps` onto `|0⟩` in place. Returns
/// `None` (no change) when `g^{m}` is already zero or both entries vanish.
fn update_bit_in_place(amps: &mut [Complex64], bit: usize) -> Option<LocalUnitary> {
    let (h0, hm) = (amps[0], amps[1 << bit]);
    if hm == Complex64::new(0.0, 0.0) {
        return None;
    }
    let n = (h0.norm_sqr() + hm.norm_sqr()).sqrt();
    if n == 0.0 {
        return None;
    }
    let u = LocalUnitary::aligning([h0 / n, hm / n]);
    apply_bit_in_place(amps, bit, &u);
    amps[0] = Complex64::new(n, 0.0);
    amps[1 << bit] = Complex64::new(0.0, 0.0);
    Some(u)
}

/// One coordinate step on bit `bit`: the unitary whose first row is
/// `(conj g^∅, conj g^{m}) / √(|g^∅|² + |g^{m}|²)`, and the rotated state.
/// Returns the identity when `g^{m} = 0` or both amplitudes vanish.
pub fn sweep_update_bit(h: &RegisterState, bit: usize) -> Result<(LocalUnitary, RegisterState)> {
    if bit >= h.len() {
        return Err(Error::BitOutOfRange { bit, l: h.len() });
    }
    let mut g = h.clone();
    let u = update_bit_in_place(g.amplitudes_mut(), bit).unwrap_or_default();
    Ok((u, g))
}

/// Outcome of [`optimize_frame`].
#[derive(Clone, Debug, PartialEq)]
pub struct FrameOptimum {
    pub frame: LocalFrame,
    /// `apply_local_frame(h, frame)`.
    pub state: RegisterState,
    pub sweeps: usize,
    pub converged: bool,
    /// Index of the winning restart.
    pub restart: usize,
    pub restarts_used: usize,
}

struct Run {
    frame: LocalFrame,
    state: RegisterState,
    sweeps: usize,
    converged: bool,
}

/// Scratch space for [`contract_sweep`].
struct Contraction {
    left: Vec<Complex64>,
    next: Vec<Complex64>,
    env: Vec<Complex64>,
}

impl Contraction {
    fn new(len: usize) -> Self {
        let half = 1usize << (len - 1);
        Self { left: Vec::with_capacity(half), next: Vec::with_capacity(half), env: Vec::with_capacity(half) }
    }
}

/// Environment of the lowest bit of `t` (a tensor over bits `lo..l`, `lo`
/// least significant): every higher bit `k` contracted with `rows[k]`.
fn environment(t: &[Complex64], rows: &[[Complex64; 2]], lo: usize, env: &mut Vec<Complex64>) -> [Complex64; 2] {
    if t.len() == 2 {
        return [t[0], t[1]];
    }
    let mut k = lo + t.len().trailing_zeros() as usize;
    env.clear();
    env.extend_from_slice(t);
    while env.len() > 2 {
        k -= 1;
        let half = env.len() / 2;
        let w = rows[k];
        for i in 0..half {
            env[i] = w[0] * env[i] + w[1] * env[i + half];
        }
        env.truncate(half);
    }
    [env[0], env[1]]
}

/// One pass over the bits computing each bit's environment vector
/// `e_m[b] = Σ_{s: s_m = b} h^s Π_{k≠m} U_k[0][s_k]` without materializing
/// the rotated state; then `(g^∅, g^{m}) = U_m e_m`. Bits below `m` use the
/// rows as updated earlier in the same pass, which reproduces the cyclic
/// coordinate ascent of [`sweep_update_bit`] exactly.
///
/// With `update` set, each bit is rotated like [`sweep_update_bit`] does.
/// Returns `(|g^∅|² before the pass, |g^∅|² after, max_m |g^{m}| seen)`.
fn contract_sweep(h: &[Complex64], frame: &mut LocalFrame, update: bool, buf: &mut Contraction) -> (f64, f64, f64) {
    let l = frame.len();
    let mut rows: Vec<[Complex64; 2]> = frame.unitaries().iter().map(|u| u.rows()[0]).collect();
    let (mut before, mut after, mut max_single) = (0.0, 0.0, 0.0f64);
    for m in 0..l {
        let e = if m == 0 {
            environment(h, &rows, 0, &mut buf.env)
        } else {
            environment(&buf.left, &rows, m, &mut buf.env)
        };
        let [g0, gm] = frame.get(m).apply(e);
        if m == 0 {
            before = g0.norm_sqr();
        }
        max_single = max_single.max(gm.norm());
        after = g0.norm_sqr();
        if update && gm != Complex64::new(0.0, 0.0) {
            let n = (g0.norm_sqr() + gm.norm_sqr()).sqrt();
            if n > 0.0 {
                frame.push_left(m, &LocalUnitary::aligning([g0 / n, gm / n]));
                rows[m] = frame.get(m).rows()[0];
                after = n * n;
            }
        }
        if m + 1 < l {
            // contract bit m (lowest remaining) with its current row
            let src: &[Complex64] = if m == 0 { h } else { &buf.left };
            let w = rows[m];
            buf.next.clear();
            buf.next.extend(src.chunks_exact(2).map(|p| w[0] * p[0] + w[1] * p[1]));
            std::mem::swap(&mut buf.left, &mut buf.next);
        }
    }
    (before, after, max_single)
}

fn start_frame(len: usize, cfg: &OptimizerConfig, restart: usize) -> LocalFrame {
    if restart == 0 {
        return LocalFrame::identity(len);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    LocalFrame::random(len, &mut rng)
}

fn run_from(h: &RegisterState, mut frame: LocalFrame, cfg: &OptimizerConfig) -> Result<Run> {
    let l = h.len();
    let norm = h.norm();
    let amps = h.amplitudes();
    let mut buf = Contraction::new(l);
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < cfg.max_sweeps {
        let (before, after, _) = contract_sweep(amps, &mut frame, true, &mut buf);
        sweeps += 1;
        if after.sqrt() <= cfg.zero_tol * norm {
            // every (g^∅, g^{m}) pair vanished; swap labels so the largest
            // amplitude sits on ∅ and carry on
            let mask = relabel_mask(&apply_local_frame(h, &frame)?);
            for bit in (0..l).filter(|b| mask >> b & 1 == 1) {
                frame.push_left(bit, &LocalUnitary::flip());
            }
            continue;
        }
        if after - before <= cfg.conv_eps * norm * norm {
            let (_, _, max_single) = contract_sweep(amps, &mut frame, false, &mut buf);
            if max_single <= cfg.stationarity_tol * norm {
                converged = true;
                break;
            }
        }
    }
    let state = apply_local_frame(h, &frame)?;
    Ok(Run { frame, state, sweeps, converged })
}

/// Maximizes `|g^∅|` over local frames from `cfg.restarts` starting points
/// and keeps the best one (lowest restart index on ties). Restart 0 starts
/// from the identity frame, so the result never has a smaller `|g^∅|` than
/// `h` itself.
pub fn optimize_frame(h: &RegisterState, cfg: &OptimizerConfig) -> Result<FrameOptimum> {
    if h.squared_norm() == 0.0 {
        return Err(Error::ZeroState);
    }
    let restarts = cfg.restarts.max(1);
    let runs: Vec<Result<Run>> =
        (0..restarts).into_par_iter().map(|r| run_from(h, start_frame(h.len(), cfg, r), cfg)).collect();
    let mut best: Option<(usize, Run)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        let better = best
            .as_ref()
            .is_none_or(|(_, b)| run.state.empty_amplitude().norm_sqr() > b.state.empty_amplitude().norm_sqr());
        if better {
            best = Some((r, run));
        }
    }
    let (restart, run) = best.expect("at least one restart");
    Ok(FrameOptimum {
        frame: run.frame,
        state: run.state,
        sweeps: run.sweeps,
        converged: run.converged,
        restart,
        restarts_used: restarts,
    })
}

/// One rank-one term `coefficient · ⊗_k factors[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductTerm {
    pub coefficient: Complex64,
    /// Unit vectors, one per bit.
    pub factors: Vec<[Complex64; 2]>,
}

impl ProductTerm {
    pub fn expand(&self) -> Result<RegisterState> {
        Ok(RegisterState::product(&self.factors)?.scaled(self.coefficient))
    }

    /// `⟨self|other⟩` computed factor by factor.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.factors.iter().zip(&other.factors).fold(self.coefficient.conj() * other.coefficient, |acc, (a, b)| {
            acc * (a[0].conj() * b[0] + a[1].conj() * b[1])
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sweeps: usize,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub converged: bool,
    /// `|g^∅|` in the optimized frame.
    pub leading_amplitude: f64,
    /// `κ = ‖lv g‖²` at the optimum.
    pub leading_sq_norm: f64,
    pub residual_sq_norm: f64,
    pub max_single_excitation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Leading term first, then residual terms by ascending face index.
    pub terms: Vec<ProductTerm>,
    pub frame: LocalFrame,
    pub leading_index: usize,
    /// Face of the optimized basis behind each residual term (`terms[1..]`).
    pub residual_faces: Vec<SimplexIndex>,
    pub input_norm: f64,
    pub diagnostics: Diagnostics,
}

impl Decomposition {
    pub fn register_len(&self) -> usize {
        self.frame.len()
    }

    /// Sums the terms. Residual terms are basis vectors of the optimized
    /// frame, so they are summed in that frame and mapped back in one pass.
    pub fn reconstruct(&self) -> Result<RegisterState> {
        let l = self.register_len();
        let mut in_frame = RegisterState::zero(l)?;
        let amps = in_frame.amplitudes_mut();
        for (term, face) in self.terms.iter().skip(1).zip(&self.residual_faces) {
            amps[face.bits()] += term.coefficient;
        }
        let residual = apply_local_frame(&in_frame, &self.frame.adjoint())?;
        residual.add(&self.terms[self.leading_index].expand()?)
    }

    pub fn leading(&self) -> &ProductTerm {
        &self.terms[self.leading_index]
    }
}

/// Terms whose coefficient modulus exceeds `zero_tol · ‖h‖`.
pub fn term_count(d: &Decomposition, zero_tol: f64) -> usize {
    let cut = zero_tol * d.input_norm;
    d.terms.iter().filter(|t| t.coefficient.norm() > cut).count()
}

/// Decomposes `h` into at most `2^l − l` mutually orthogonal product terms.
///
/// The leading term is the leading vector of `h` in the optimized frame;
/// every other term is one residual amplitude on a face with at least two
/// vertices, carried back to the original basis.
pub fn decompose(h: &RegisterState, cfg: &OptimizerConfig) -> Result<Decomposition> {
    let opt = optimize_frame(h, cfg)?;
    let l = h.len();
    let input_norm = h.norm();
    let g = &opt.state;
    let lv = leading_vector(g)?;
    let g0 = g.empty_amplitude();
    let frame = &opt.frame;

    // lv = ⊗_k (g^∅, g^{k}) / (g^∅)^{l−1}; with unit factors whose first
    // entry is real, the coefficient carries |lv| and the phase of g^∅.
    let leading_sq_norm = lv.squared_norm();
    let phase0 = Complex64::from_polar(1.0, -g0.arg());
    let factors = (0..l)
        .map(|k| {
            let gk = g.single_amplitude(k) * phase0;
            let n = (g0.norm_sqr() + gk.norm_sqr()).sqrt();
            let (a, b) = (Complex64::new(g0.norm() / n, 0.0), gk / n);
            let u = frame.get(k);
            let (e0, e1) = (u.back_transformed_basis(0), u.back_transformed_basis(1));
            [a * e0[0] + b * e1[0], a * e0[1] + b * e1[1]]
        })
        .collect();
    let mut terms =
        vec![ProductTerm { coefficient: Complex64::from_polar(leading_sq_norm.sqrt(), g0.arg()), factors }];

    let cut = cfg.zero_tol * input_norm;
    let mut residual_faces = Vec::new();
    let mut residual_sq_norm = 0.0;
    for (s, (gs, ls)) in g.amplitudes().iter().zip(lv.amplitudes()).enumerate() {
        if s.count_ones() < 2 {
            continue;
        }
        let r = gs - ls;
        residual_sq_norm += r.norm_sqr();
        if r.norm() <= cut {
            continue;
        }
        let factors = (0..l).map(|k| frame.get(k).back_transformed_basis(s >> k & 1)).collect();
        terms.push(ProductTerm { coefficient: r, factors });
        residual_faces.push(SimplexIndex::new(s, l)?);
    }

    Ok(Decomposition {
        terms,
        frame: opt.frame.clone(),
        leading_index: 0,
        residual_faces,
        input_norm,
        diagnostics: Diagnostics {
            sweeps: opt.sweeps,
            restarts_used: opt.restarts_used,
            best_restart: opt.restart,
            converged: opt.converged,
            leading_amplitude: g0.norm(),
            leading_sq_norm,
            residual_sq_norm,
            max_single_excitation: g.max_single_excitation(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::{random_product_state, random_state};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn zero_single_excitation_is_fixed_point() {
        let ghz = RegisterState::ghz(3).unwrap();
        for m in 0..3 {
            let (u, g) = sweep_update_bit(&ghz, m).unwrap();
            assert_eq!(u, LocalUnitary::identity());
            assert_eq!(g, ghz);
        }
        assert!(sweep_update_bit(&ghz, 3).is_err());
    }

    #[test]
    fn two_term_example_collapses() {
        let h = RegisterState::new(
            2,
            vec![
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let (_, g) = sweep_update_bit(&h, 0).unwrap();
        assert!(g.max_abs_diff(&RegisterState::basis(2, 0).unwrap()) < 1e-15);
    }

    #[test]
    fn gain_equals_single_excitation() {
        for seed in 0..100 {
            let h = random_state(4, seed).unwrap();
            let m = seed as usize % 4;
            let (u, g) = sweep_update_bit(&h, m).unwrap();
            let gain = g.empty_amplitude().norm_sqr() - h.empty_amplitude().norm_sqr();
            assert!((gain - h.single_amplitude(m).norm_sqr()).abs() < 1e-12);
            assert_eq!(g.single_amplitude(m), Complex64::new(0.0, 0.0));
            assert!(u.unitarity_deviation() < 1e-14);
            let mut frame = LocalFrame::identity(4);
            frame.push_left(m, &u);
            assert!(apply_local_frame(&h, &frame).unwrap().max_abs_diff(&g) < 1e-14);
        }
    }

    #[test]
    fn product_state_converges_fast() {
        let cfg = OptimizerConfig { restarts: 1, ..Default::default() };
        for seed in 0..20 {
            let p = random_product_state(5, seed).unwrap();
            let opt = optimize_frame(&p, &cfg).unwrap();
            assert!(opt.converged);
            assert!(opt.sweeps <= 2, "seed {seed}: {} sweeps", opt.sweeps);
            assert!((opt.state.empty_amplitude().norm() - p.norm()).abs() < 1e-10);
            let d = decompose(&p, &cfg).unwrap();
            assert_eq!(term_count(&d, cfg.zero_tol), 1);
        }
    }

    #[test]
    fn all_ones_needs_relabel() {
        let h = RegisterState::basis(3, 0b111).unwrap();
        let cfg = OptimizerConfig { restarts: 1, ..Default::default() };
        let d = decompose(&h, &cfg).unwrap();
        assert!(d.diagnostics.converged);
        assert_eq!(d.terms.len(), 1);
        assert!((d.diagnostics.leading_amplitude - 1.0).abs() < 1e-15);
        assert!(d.reconstruct().unwrap().max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn ghz_two_terms() {
        let d = decompose(&RegisterState::ghz(3).unwrap(), &OptimizerConfig::default()).unwrap();
        assert!(d.diagnostics.converged);
        assert_eq!(term_count(&d, 1e-12), 2);
        assert!((d.diagnostics.leading_amplitude - FRAC_1_SQRT_2).abs() < 1e-8);
    }

    #[test]
    fn zero_state_rejected() {
        let z = RegisterState::zero(3).unwrap();
        assert_eq!(decompose(&z, &OptimizerConfig::default()), Err(Error::ZeroState));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let h = random_state(4, 99).unwrap();
        let cfg = OptimizerConfig { seed: 5, ..Default::default() };
        assert_eq!(decompose(&h, &cfg).unwrap(), decompose(&h, &cfg).unwrap());
    }

    #[test]
    fn monotone_over_a_run() {
        let mut g = random_state(5, 8).unwrap();
        let mut last = g.empty_amplitude().norm_sqr();
        for step in 0..200 {
            let (_, next) = sweep_update_bit(&g, step % 5).unwrap();
            let now = next.empty_amplitude().norm_sqr();
            assert!(now >= last - 1e-15);
            last = now;
            g = next;
        }
    }
}
