//! Independent reference computations used to cross-check the decomposer.
//!
//! Nothing here calls into [`crate::decompose`] or [`crate::leading`]; each
//! routine recomputes its answer by a different route (closed-form 2×2 SVD,
//! random search plus a brute-force alternating polish, literal tensor
//! expansion). [`run_verification`] compares the two sides.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::{decompose, term_count, Decomposition, OptimizerConfig, ProductTerm};
use crate::error::{Error, Result};
use crate::frame::{LocalFrame, LocalUnitary};
use crate::leading::{kappa, leading_vector};
use crate::product::{factorize_product, is_product, is_product_full, PRODUCT_TOL};
use crate::register::{random_product_state, random_state, RegisterState, ZERO_TOL};

/// Largest register accepted by [`brute_force_max_leading`].
pub const BRUTE_FORCE_MAX_BITS: usize = 3;
pub const BRUTE_FORCE_MIN_SAMPLES: usize = 10_000;
/// Largest register accepted by the literal tensor expansions.
pub const EXPANSION_MAX_BITS: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Schmidt decomposition of a two-bit state,
/// `h = Σ_i sigma[i] · left_vectors[i] ⊗ right_vectors[i]` (bit 1 left).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtResult {
    /// `σ₁ ≥ σ₂ ≥ 0`.
    pub sigma: [f64; 2],
    pub left_vectors: [[Complex64; 2]; 2],
    pub right_vectors: [[Complex64; 2]; 2],
}

impl SchmidtResult {
    pub fn reconstruct(&self) -> Result<RegisterState> {
        let mut out = RegisterState::zero(2)?.into_amplitudes();
        for i in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    out[a + 2 * b] += self.sigma[i] * self.left_vectors[i][a] * self.right_vectors[i][b];
                }
            }
        }
        RegisterState::new(2, out)
    }
}

fn complement(v: [Complex64; 2]) -> [Complex64; 2] {
    [-v[1].conj(), v[0].conj()]
}

fn norm2(v: [Complex64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// Closed-form SVD of `M[a][b] = h[a + 2b]` through the eigenvectors of `M†M`.
pub fn schmidt_svd(h: &RegisterState) -> Result<SchmidtResult> {
    if h.len() != 2 {
        return Err(Error::Shape { what: "Schmidt decomposition", constraint: "= 2", l: h.len() });
    }
    if h.squared_norm() == 0.0 {
        return Err(Error::ZeroState);
    }
    let a = h.amplitudes();
    let m = [[a[0], a[2]], [a[1], a[3]]];
    let mul = |v: [Complex64; 2]| [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];

    // M†M = [[p, q], [q*, r]]
    let p = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let r = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let q = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let lambda1 = 0.5 * (p + r) + (0.25 * (p - r).powi(2) + q.norm_sqr()).sqrt();

    let c1 = [q, Complex64::new(lambda1 - p, 0.0)];
    let c2 = [Complex64::new(lambda1 - r, 0.0), q.conj()];
    let (n1, n2) = (norm2(c1), norm2(c2));
    let mut v1 = if n1 >= n2 { c1 } else { c2 };
    let nv = n1.max(n2);
    if nv <= 1e-300 {
        v1 = [Complex64::new(1.0, 0.0), ZERO];
    } else {
        v1 = [v1[0] / nv, v1[1] / nv];
    }
    let mut vs = [v1, complement(v1)];
    let mut images = [mul(vs[0]), mul(vs[1])];
    let mut sigma = [norm2(images[0]), norm2(images[1])];
    if sigma[1] > sigma[0] {
        vs.swap(0, 1);
        images.swap(0, 1);
        sigma.swap(0, 1);
    }
    let u1 = [images[0][0] / sigma[0], images[0][1] / sigma[0]];
    let u2 = if sigma[1] > 0.0 { [images[1][0] / sigma[1], images[1][1] / sigma[1]] } else { complement(u1) };
    Ok(SchmidtResult {
        sigma,
        left_vectors: [u1, u2],
        right_vectors: [[vs[0][0].conj(), vs[0][1].conj()], [vs[1][0].conj(), vs[1][1].conj()]],
    })
}

/// `Σ_s h^s Π_k rows[k][s_k]`, summed term by term.
fn overlap(h: &RegisterState, rows: &[[Complex64; 2]]) -> Complex64 {
    h.amplitudes()
        .iter()
        .enumerate()
        .map(|(s, a)| rows.iter().enumerate().fold(*a, |acc, (k, r)| acc * r[s >> k & 1]))
        .sum()
}

/// Alternating maximization of `|overlap|`: for each bit in turn, the best
/// unit row is the conjugate of that bit's environment, normalized.
fn polish(h: &RegisterState, rows: &mut [[Complex64; 2]], rounds: usize) -> f64 {
    let l = rows.len();
    for _ in 0..rounds {
        for m in 0..l {
            let mut env = [ZERO; 2];
            for (s, a) in h.amplitudes().iter().enumerate() {
                let w = (0..l).filter(|&k| k != m).fold(*a, |acc, k| acc * rows[k][s >> k & 1]);
                env[s >> m & 1] += w;
            }
            let n = norm2(env);
            if n > 0.0 {
                rows[m] = [env[0].conj() / n, env[1].conj() / n];
            }
        }
    }
    overlap(h, rows).norm()
}

/// Lower bound on `max_F |(F h)^∅|` from `samples` random local frames
/// (three uniform angles per bit), followed by an alternating polish of the
/// ten best samples.
pub fn brute_force_max_leading(h: &RegisterState, samples: usize, seed: u64) -> Result<f64> {
    if h.len() > BRUTE_FORCE_MAX_BITS {
        return Err(Error::Shape { what: "brute-force leading search", constraint: "<= 3", l: h.len() });
    }
    if samples < BRUTE_FORCE_MIN_SAMPLES {
        return Err(Error::Precondition(format!("need at least {BRUTE_FORCE_MIN_SAMPLES} samples, got {samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut top: Vec<(f64, Vec<[Complex64; 2]>)> = Vec::with_capacity(11);
    for _ in 0..samples {
        let rows: Vec<[Complex64; 2]> = (0..h.len())
            .map(|_| {
                let theta = rng.random_range(0.0..FRAC_PI_2);
                let phi = rng.random_range(0.0..2.0 * PI);
                let lambda = rng.random_range(0.0..2.0 * PI);
                LocalUnitary::from_angles(theta, phi, lambda).rows()[0]
            })
            .collect();
        let value = overlap(h, &rows).norm();
        if top.len() < 10 || value > top[top.len() - 1].0 {
            let at = top.partition_point(|(v, _)| *v >= value);
            top.insert(at, (value, rows));
            top.truncate(10);
        }
    }
    Ok(top.into_iter().map(|(_, mut rows)| polish(h, &mut rows, 200)).fold(0.0, f64::max))
}

/// Leading vector by literal expansion of `⊗_k (h^∅|0⟩ + h^{k}|1⟩)` and
/// division by `(h^∅)^{l−1}`.
pub fn naive_leading_vector(h: &RegisterState) -> Result<RegisterState> {
    let l = h.len();
    if l > EXPANSION_MAX_BITS {
        return Err(Error::Shape { what: "naive leading vector", constraint: "<= 10", l });
    }
    let h0 = h.empty_amplitude();
    let norm = h.norm();
    if norm == 0.0 {
        return Err(Error::ZeroState);
    }
    if h0.norm() <= ZERO_TOL * norm {
        return Err(Error::LeadingUndefined { magnitude: h0.norm() / norm });
    }
    let denom = h0.powi(l as i32 - 1);
    let amps = (0..h.dim())
        .map(|s| {
            let mut prod = Complex64::new(1.0, 0.0);
            for k in 0..l {
                prod *= if s >> k & 1 == 1 { h.single_amplitude(k) } else { h0 };
            }
            prod / denom
        })
        .collect();
    RegisterState::new(l, amps)
}

/// `Σ_t c_t ⊗_k f_{t,k}`, evaluated amplitude by amplitude.
pub fn expand_terms(terms: &[ProductTerm], len: usize) -> Result<RegisterState> {
    if len > EXPANSION_MAX_BITS {
        return Err(Error::Shape { what: "term expansion", constraint: "<= 10", l: len });
    }
    let mut out = RegisterState::zero(len)?.into_amplitudes();
    for t in terms {
        if t.factors.len() != len {
            return Err(Error::FrameShape { expected: len, found: t.factors.len() });
        }
        for (s, slot) in out.iter_mut().enumerate() {
            *slot += t.factors.iter().enumerate().fold(t.coefficient, |acc, (k, f)| acc * f[s >> k & 1]);
        }
    }
    RegisterState::new(len, out)
}

/// Largest `|⟨t_i|t_j⟩|` over distinct pairs of expanded terms.
pub fn max_pairwise_overlap(terms: &[ProductTerm]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            worst = worst.max(terms[i].inner(&terms[j]).norm());
        }
    }
    worst
}

/// Outcome of one cross-checked property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    /// Largest observed error (or violation measure) for the property.
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub l: usize,
    pub trials: usize,
    pub seed: u64,
    pub properties: Vec<PropertyCheck>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    checked: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, checked: 0, failures: 0, worst: 0.0 }
    }

    /// Records an error value; fails when it exceeds the tolerance.
    fn error(&mut self, err: f64) {
        self.checked += 1;
        self.worst = self.worst.max(err);
        if !(err <= self.tolerance) {
            self.failures += 1;
        }
    }

    fn flag(&mut self, ok: bool) {
        self.error(if ok { 0.0 } else { 1.0 });
    }

    fn finish(self) -> PropertyCheck {
        PropertyCheck {
            name: self.name.to_string(),
            passed: self.failures == 0 && self.checked > 0,
            checked: self.checked,
            failures: self.failures,
            worst: self.worst,
            tolerance: self.tolerance,
        }
    }
}

fn relative(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Runs the oracle cross-check suite on `trials` random states of length
/// `l ∈ [1, 3]`.
pub fn run_verification(l: usize, trials: usize, seed: u64, cfg: &OptimizerConfig) -> Result<VerificationReport> {
    if !(1..=BRUTE_FORCE_MAX_BITS).contains(&l) {
        return Err(Error::Shape { what: "verification suite", constraint: "in [1, 3]", l });
    }
    let bound = (1usize << l) - l;
    let mut schmidt = Tally::new("schmidt_leading_amplitude", 1e-8);
    let mut brute = Tally::new("brute_force_not_better", 1e-6);
    let mut naive = Tally::new("naive_leading_vector", 1e-10);
    let mut kappa_t = Tally::new("kappa_matches_leading_norm", 1e-10);
    let mut recon = Tally::new("reconstruction", cfg.reconstruction_tol);
    let mut stationary = Tally::new("stationarity", cfg.stationarity_tol);
    let mut ortho = Tally::new("pairwise_orthogonality", 1e-10);
    let mut pythagoras = Tally::new("pythagoras", 1e-10);
    let mut count = Tally::new("term_count_bound", 0.0);
    let mut converged = Tally::new("converged", 0.0);
    let mut product_rt = Tally::new("product_round_trip", 1e-10);
    let mut reduced_full = Tally::new("reduced_vs_full_product_test", 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let state_seed: u64 = rng.random();
        let h = random_state(l, state_seed)?;
        let norm = h.norm();
        let d: Decomposition = decompose(&h, cfg)?;
        let lead = d.diagnostics.leading_amplitude;

        converged.flag(d.diagnostics.converged);
        if l == 2 {
            let svd = schmidt_svd(&h)?;
            schmidt.error((svd.sigma[0] - lead).abs());
            schmidt.flag(term_count(&d, cfg.zero_tol) == 2);
        }
        brute.error((brute_force_max_leading(&h, BRUTE_FORCE_MIN_SAMPLES, state_seed ^ 0x5eed)? - lead).max(0.0));
        if h.empty_amplitude().norm() > ZERO_TOL * norm {
            naive.error(relative(naive_leading_vector(&h)?.max_abs_diff(&leading_vector(&h)?), norm));
        }
        let frame = LocalFrame::random(l, &mut rng);
        if let (Ok(k), Ok(g)) = (kappa(&h, &frame), crate::frame::apply_local_frame(&h, &frame)) {
            let direct = naive_leading_vector(&g)?.squared_norm();
            kappa_t.error(relative((k - direct).abs(), direct));
        }
        recon.error(relative(expand_terms(&d.terms, l)?.max_abs_diff(&h), norm));
        if d.diagnostics.converged {
            stationary.error(relative(d.diagnostics.max_single_excitation, norm));
            count.flag(d.terms.len() <= bound);
        }
        ortho.error(relative(max_pairwise_overlap(&d.terms), norm * norm));
        pythagoras.error(relative(
            (d.diagnostics.leading_sq_norm + d.diagnostics.residual_sq_norm - norm * norm).abs(),
            norm * norm,
        ));

        let p = random_product_state(l, state_seed.wrapping_add(trial as u64))?;
        let ok = is_product(&p, PRODUCT_TOL)?;
        let rt = factorize_product(&p, PRODUCT_TOL)?.reconstruct()?.max_abs_diff(&p);
        let single = term_count(&decompose(&p, cfg)?, cfg.zero_tol) == 1;
        product_rt.error(if ok && single { rt } else { f64::INFINITY });

        for state in [&h, &p] {
            reduced_full.flag(is_product(state, PRODUCT_TOL)? == is_product_full(state, PRODUCT_TOL)?);
        }
    }

    let mut properties = Vec::new();
    if l == 2 {
        properties.push(schmidt.finish());
    }
    properties.extend(
        [brute, naive, kappa_t, recon, converged, stationary, ortho, pythagoras, count, product_rt, reduced_full]
            .into_iter()
            .map(Tally::finish),
    );
    Ok(VerificationReport { l, trials, seed, properties })
}
