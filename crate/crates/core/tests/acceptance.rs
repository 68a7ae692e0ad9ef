//! Exit criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p lvdecomp --test acceptance -- --nocapture` to see them.
//!
//! Tests hold a shared lock so the timing criteria are not measured while
//! sibling tests compete for the CPU.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use lvdecomp::oracle::{brute_force_max_leading, expand_terms, max_pairwise_overlap, schmidt_svd};
use lvdecomp::product::{worst_defect_full, PRODUCT_TOL};
use lvdecomp::{
    apply_local_frame, decompose, factorize_product, is_product, is_product_full, kappa, leading_vector,
    random_product_state, random_state, term_count, Decomposition, LocalFrame, OptimizerConfig, RegisterState,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: &str, ok: bool, detail: String) {
    println!("[{}] {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} failed: {detail}");
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Leading amplitudes found by `brute_force_max_leading` (10^4 samples plus
/// polish) for GHZ_3 and W_3; the oracle test below re-derives them.
const GHZ3_LEADING: f64 = FRAC_1_SQRT_2;
const W3_LEADING: f64 = 2.0 / 3.0;

#[test]
fn ac1_schmidt_equivalence() {
    let _g = lock();
    let cfg = OptimizerConfig::default();
    let states: Vec<RegisterState> = (0..100).map(|s| random_state(2, s).unwrap()).collect();
    let t = Instant::now();
    let decs: Vec<Decomposition> = states.iter().map(|h| decompose(h, &cfg).unwrap()).collect();
    let elapsed = t.elapsed();
    let (mut worst_sigma, mut worst_recon, mut bad_counts) = (0.0f64, 0.0f64, 0);
    for (h, d) in states.iter().zip(&decs) {
        if d.terms.len() != 2 {
            bad_counts += 1;
            continue;
        }
        let svd = schmidt_svd(h).unwrap();
        let mut c: Vec<f64> = d.terms.iter().map(|t| t.coefficient.norm()).collect();
        c.sort_by(|a, b| b.partial_cmp(a).unwrap());
        worst_sigma = worst_sigma.max((c[0] - svd.sigma[0]).abs()).max((c[1] - svd.sigma[1]).abs());
        worst_recon = worst_recon.max(expand_terms(&d.terms, 2).unwrap().max_abs_diff(h));
    }
    let ok = bad_counts == 0 && worst_sigma <= 1e-8 && worst_recon <= 1e-10 && elapsed < Duration::from_secs(1);
    report(
        "AC1 Schmidt equivalence (l=2, 100 states)",
        ok,
        format!(
            "non-2-term runs {bad_counts}, max |coef - sigma| {worst_sigma:.2e} (tol 1e-8), \
             max recon {worst_recon:.2e} (tol 1e-10), time {elapsed:?} (< 1s)"
        ),
    );
}

#[test]
fn ac2_term_count_bounds() {
    let _g = lock();
    let cfg = OptimizerConfig::default();
    let mut details = Vec::new();
    let mut ok = true;
    for (l, bound) in [(3usize, 5usize), (4, 12)] {
        let (mut converged, mut within, mut exact) = (0, 0, 0);
        for seed in 0..100 {
            let d = decompose(&random_state(l, 1000 * l as u64 + seed).unwrap(), &cfg).unwrap();
            if !d.diagnostics.converged {
                continue;
            }
            converged += 1;
            let n = term_count(&d, cfg.zero_tol);
            within += usize::from(n <= bound);
            exact += usize::from(n == bound);
        }
        ok &= converged == 100 && within == converged && exact as f64 >= 0.95 * converged as f64;
        details.push(format!("l={l}: converged {converged}/100, <= {bound}: {within}, == {bound}: {exact}"));
    }
    report("AC2 term-count bounds", ok, details.join("; "));
}

fn sample_runs() -> Vec<(RegisterState, Decomposition)> {
    let cfg = OptimizerConfig::default();
    (0..200u64)
        .map(|seed| {
            let l = 2 + seed as usize % 4;
            let h = random_state(l, 77_000 + seed).unwrap().scaled(Complex64::new(0.5 + seed as f64 * 0.01, 0.0));
            let d = decompose(&h, &cfg).unwrap();
            (h, d)
        })
        .collect()
}

#[test]
fn ac3_stationarity() {
    let _g = lock();
    let runs = sample_runs();
    let mut worst = 0.0f64;
    let mut converged = 0;
    for (h, d) in &runs {
        if d.diagnostics.converged {
            converged += 1;
            let g = apply_local_frame(h, &d.frame).unwrap();
            worst = worst.max(g.max_single_excitation() / h.norm());
        }
    }
    report(
        "AC3 stationarity",
        converged == runs.len() && worst <= 1e-10,
        format!("converged {converged}/{}, max_m |g^m| / |h| = {worst:.2e} (tol 1e-10)", runs.len()),
    );
}

#[test]
fn ac4_orthogonal_split() {
    let _g = lock();
    let runs = sample_runs();
    let (mut worst_pyth, mut worst_inner) = (0.0f64, 0.0f64);
    for (h, d) in runs.iter().filter(|(_, d)| d.diagnostics.converged) {
        let n2 = h.squared_norm();
        let pyth = d.diagnostics.leading_sq_norm + d.diagnostics.residual_sq_norm;
        worst_pyth = worst_pyth.max((pyth - n2).abs() / n2);
        worst_inner = worst_inner.max(max_pairwise_overlap(&d.terms));
    }
    report(
        "AC4 orthogonal split",
        worst_pyth <= 1e-10 && worst_inner <= 1e-10,
        format!("Pythagoras rel. error {worst_pyth:.2e}, max pairwise |<t_i|t_j>| {worst_inner:.2e} (tol 1e-10)"),
    );
}

#[test]
fn ac5_named_states() {
    let _g = lock();
    let ghz = RegisterState::ghz(3).unwrap();
    let w = RegisterState::w(3).unwrap();
    // the frozen targets must agree with the oracle
    let ghz_oracle = brute_force_max_leading(&ghz, 10_000, 11).unwrap();
    let w_oracle = brute_force_max_leading(&w, 10_000, 12).unwrap();

    let cfg = OptimizerConfig { restarts: 8, ..Default::default() };
    let dg = decompose(&ghz, &cfg).unwrap();
    let dw = decompose(&w, &cfg).unwrap();
    let ghz_lead = dg.diagnostics.leading_amplitude;
    let w_lead = dw.diagnostics.leading_amplitude;
    let ok = (ghz_oracle - GHZ3_LEADING).abs() <= 1e-4
        && (w_oracle - W3_LEADING).abs() <= 1e-4
        && dg.diagnostics.converged
        && dw.diagnostics.converged
        && (ghz_lead - GHZ3_LEADING).abs() <= 1e-6
        && term_count(&dg, cfg.zero_tol) == 2
        && (w_lead - W3_LEADING).abs() <= 1e-6;
    report(
        "AC5 named states",
        ok,
        format!(
            "GHZ_3 leading {ghz_lead:.12} (target 1/sqrt2, oracle {ghz_oracle:.8}), terms {}; \
             W_3 leading {w_lead:.12} (target 2/3, oracle {w_oracle:.8})",
            term_count(&dg, cfg.zero_tol)
        ),
    );
}

#[test]
fn ac6_product_round_trip() {
    let _g = lock();
    let cfg = OptimizerConfig::default();
    let (mut not_product, mut multi_term, mut worst_rt) = (0, 0, 0.0f64);
    for seed in 0..100u64 {
        let l = 2 + seed as usize % 5;
        let p = random_product_state(l, 5_000 + seed).unwrap();
        if !is_product(&p, PRODUCT_TOL).unwrap() {
            not_product += 1;
        }
        let f = factorize_product(&p, PRODUCT_TOL).unwrap();
        worst_rt = worst_rt.max(f.reconstruct().unwrap().max_abs_diff(&p));
        if term_count(&decompose(&p, &cfg).unwrap(), cfg.zero_tol) != 1 {
            multi_term += 1;
        }
    }
    report(
        "AC6 product round trip (l=2..6, 100 states)",
        not_product == 0 && multi_term == 0 && worst_rt <= 1e-10,
        format!("not product {not_product}, multi-term {multi_term}, max round-trip error {worst_rt:.2e} (tol 1e-10)"),
    );
}

#[test]
fn ac7_leading_vector_laws() {
    let _g = lock();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_hom, mut worst_kappa, mut worst_cancel) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..100u64 {
        let l = 1 + seed as usize % 8;
        let h = random_state(l, 9_000 + seed).unwrap();
        let lambda = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let lv = leading_vector(&h).unwrap();
        let lv_scaled = leading_vector(&h.scaled(lambda)).unwrap();
        worst_hom = worst_hom.max(lv_scaled.max_abs_diff(&lv.scaled(lambda)) / (lambda.norm() * lv.norm()));

        let frame = LocalFrame::random(l, &mut rng);
        let direct = leading_vector(&apply_local_frame(&h, &frame).unwrap()).unwrap().squared_norm();
        worst_kappa = worst_kappa.max((kappa(&h, &frame).unwrap() - direct).abs() / direct);

        let mut cancel = (lv.empty_amplitude() - h.empty_amplitude()).norm();
        for k in 0..l {
            cancel = cancel.max((lv.single_amplitude(k) - h.single_amplitude(k)).norm());
        }
        worst_cancel = worst_cancel.max(cancel);
    }
    report(
        "AC7 leading-vector laws (100 trials each)",
        worst_hom <= 1e-12 && worst_kappa <= 1e-10 && worst_cancel <= 1e-15,
        format!(
            "homogeneity {worst_hom:.2e} (tol 1e-12), kappa {worst_kappa:.2e} (tol 1e-10), \
             cancellation {worst_cancel:.2e}"
        ),
    );
}

#[test]
fn ac8_reduced_vs_full_product_test() {
    let _g = lock();
    let mut disagreements = 0;
    let mut products_flagged = 0;
    let mut states_flagged = 0;
    for seed in 0..1000u64 {
        let l = 1 + seed as usize % 4;
        for (h, is_prod_input) in
            [(random_state(l, 20_000 + seed).unwrap(), false), (random_product_state(l, 30_000 + seed).unwrap(), true)]
        {
            let reduced = is_product(&h, PRODUCT_TOL).unwrap();
            let full = is_product_full(&h, PRODUCT_TOL).unwrap();
            disagreements += usize::from(reduced != full);
            if is_prod_input {
                products_flagged += usize::from(reduced);
            } else {
                states_flagged += usize::from(reduced);
            }
        }
    }
    // l = 1 states are products too
    let single_bit = (0..1000).filter(|s| s % 4 == 0).count();
    let ok = disagreements == 0 && products_flagged == 1000 && states_flagged == single_bit;
    let bell = RegisterState::ghz(2).unwrap();
    let full_worst = worst_defect_full(&bell).unwrap().unwrap().magnitude;
    report(
        "AC8 reduced vs full exchangeability scan (l<=4)",
        ok,
        format!(
            "disagreements {disagreements}/2000, products accepted {products_flagged}/1000, \
             random states accepted {states_flagged} (expected {single_bit}, the l=1 cases); Bell full-scan defect {full_worst}"
        ),
    );
}

#[test]
fn ac9_scale_check() {
    let _g = lock();
    let h = random_state(16, 16).unwrap();
    let cfg = OptimizerConfig { restarts: 8, ..Default::default() };
    let t = Instant::now();
    let d = decompose(&h, &cfg).unwrap();
    let elapsed = t.elapsed();
    let recon = d.reconstruct().unwrap().max_abs_diff(&h) / h.norm();
    let bound = (1usize << 16) - 16;
    let stationarity = apply_local_frame(&h, &d.frame).unwrap().max_single_excitation() / h.norm();
    let ok = d.diagnostics.converged
        && elapsed < Duration::from_secs(5)
        && recon <= cfg.reconstruction_tol
        && d.terms.len() <= bound
        && stationarity <= 1e-10;
    report(
        "AC9 scale check (l=16, 8 restarts)",
        ok,
        format!(
            "time {elapsed:?} (< 5s), converged {}, sweeps {}, terms {} (<= {bound}), recon {recon:.2e}, \
             stationarity {stationarity:.2e}",
            d.diagnostics.converged,
            d.diagnostics.sweeps,
            d.terms.len()
        ),
    );
}
