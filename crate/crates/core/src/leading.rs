//! The leading vector of a state and the split `h = lv h + (h − lv h)`.
//!
//! For `h^∅ ≠ 0` the leading vector is the product state
//! `lv h = (h^∅)^{1−l} ⊗_k (h^∅|0⟩ + h^{k}|1⟩)`, whose amplitudes are
//! `(lv h)^s = h^∅ · Π_{k∈s} (h^{k} / h^∅)`. It agrees with `h` on the empty
//! face and on all `l` single-vertex faces, so the residual has at most
//! `2^l − l − 1` nonzero entries.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{apply_local_frame, LocalFrame};
use crate::register::{RegisterState, ZERO_TOL};

/// Below `|h^∅| < LOG_PATH_THRESHOLD · ‖h‖` amplitudes are built in
/// log-magnitude/phase form.
pub const LOG_PATH_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct LeadingSplit {
    pub leading: RegisterState,
    pub residual: RegisterState,
    /// `‖lv h‖²`.
    pub kappa: f64,
}

fn check_leading_defined(h: &RegisterState) -> Result<Complex64> {
    let h0 = h.empty_amplitude();
    let norm = h.norm();
    if norm == 0.0 {
        return Err(Error::ZeroState);
    }
    if h0.norm() <= ZERO_TOL * norm {
        return Err(Error::LeadingUndefined { magnitude: h0.norm() / norm });
    }
    Ok(h0)
}

/// Leading vector of `h` in its current basis.
pub fn leading_vector(h: &RegisterState) -> Result<RegisterState> {
    let h0 = check_leading_defined(h)?;
    let l = h.len();
    let a = h.amplitudes();
    let mut lv = vec![Complex64::new(0.0, 0.0); a.len()];

    if h0.norm() >= LOG_PATH_THRESHOLD * h.norm() {
        let ratios: Vec<Complex64> = (0..l).map(|k| a[1 << k] / h0).collect();
        lv[0] = h0;
        for i in 1..a.len() {
            let low = i.trailing_zeros() as usize;
            let rest = i & (i - 1);
            lv[i] = if rest == 0 { a[i] } else { lv[rest] * ratios[low] };
        }
    } else {
        // (h^∅)^{1−|s|} · Π h^{k} overflows or underflows term by term for
        // small h^∅; accumulate logs instead.
        let (ln0, arg0) = (h0.norm().ln(), h0.arg());
        let steps: Vec<Option<(f64, f64)>> = (0..l)
            .map(|k| {
                let hk = a[1 << k];
                (hk.norm() > 0.0).then(|| (hk.norm().ln() - ln0, hk.arg() - arg0))
            })
            .collect();
        let mut logs: Vec<Option<(f64, f64)>> = vec![None; a.len()];
        logs[0] = Some((ln0, arg0));
        lv[0] = h0;
        for i in 1..a.len() {
            let low = i.trailing_zeros() as usize;
            let rest = i & (i - 1);
            logs[i] = match (logs[rest], steps[low]) {
                (Some((m, p)), Some((dm, dp))) => Some((m + dm, p + dp)),
                _ => None,
            };
            lv[i] = if rest == 0 {
                a[i]
            } else {
                logs[i].map_or(Complex64::new(0.0, 0.0), |(m, p)| Complex64::from_polar(m.exp(), p))
            };
        }
    }
    RegisterState::new(l, lv)
}

/// `lv h` together with the residual `h − lv h` and `κ = ‖lv h‖²`.
pub fn leading_split(h: &RegisterState) -> Result<LeadingSplit> {
    let leading = leading_vector(h)?;
    let residual = h.sub(&leading)?;
    let kappa = leading.squared_norm();
    Ok(LeadingSplit { leading, residual, kappa })
}

/// `‖lv g‖²` for `g` in its current basis, from the closed form
/// `|g^∅|^{−2(l−1)} · Π_k (|g^∅|² + |g^{k}|²)`.
pub fn kappa_of(g: &RegisterState) -> Result<f64> {
    let g0 = check_leading_defined(g)?;
    let p0 = g0.norm_sqr();
    let l = g.len();
    let log_sum: f64 = (0..l).map(|k| (p0 + g.single_amplitude(k).norm_sqr()).ln()).sum();
    Ok((log_sum - (l as f64 - 1.0) * p0.ln()).exp())
}

/// Squared norm of the leading vector of `h` expressed in the basis chosen
/// by `frame`.
pub fn kappa(h: &RegisterState, frame: &LocalFrame) -> Result<f64> {
    kappa_of(&apply_local_frame(h, frame)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::{random_product_state, random_state};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn ghz_leading_vector() {
        let ghz = RegisterState::ghz(3).unwrap();
        let split = leading_split(&ghz).unwrap();
        let expect = RegisterState::basis(3, 0).unwrap().scaled(Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert!(split.leading.max_abs_diff(&expect) < 1e-15);
        assert_eq!(split.residual.nonzero_count(ZERO_TOL), 1);
        assert!((split.residual.amplitudes()[7].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((split.kappa - 0.5).abs() < 1e-15);
        assert!((kappa(&ghz, &LocalFrame::identity(3)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ground_state_kappa_is_one() {
        let h = RegisterState::basis(5, 0).unwrap();
        assert_eq!(kappa(&h, &LocalFrame::identity(5)).unwrap(), 1.0);
    }

    #[test]
    fn refuses_vanishing_empty_amplitude() {
        let w = RegisterState::w(3).unwrap();
        assert!(matches!(leading_vector(&w), Err(Error::LeadingUndefined { .. })));
        assert!(matches!(kappa_of(&w), Err(Error::LeadingUndefined { .. })));
        assert_eq!(leading_vector(&RegisterState::zero(2).unwrap()), Err(Error::ZeroState));
    }

    #[test]
    fn product_is_own_leading_vector() {
        for seed in 0..50 {
            let p = random_product_state(1 + seed as usize % 6, seed).unwrap();
            let split = leading_split(&p).unwrap();
            assert!(split.residual.norm() <= 1e-10 * p.norm());
        }
    }

    #[test]
    fn cancellation_and_term_bound() {
        for seed in 0..100 {
            let h = random_state(3, seed).unwrap();
            let split = leading_split(&h).unwrap();
            assert_eq!(split.leading.empty_amplitude(), h.empty_amplitude());
            for k in 0..3 {
                assert_eq!(split.leading.single_amplitude(k), h.single_amplitude(k));
                assert_eq!(split.residual.single_amplitude(k), Complex64::new(0.0, 0.0));
            }
            assert_eq!(split.residual.empty_amplitude(), Complex64::new(0.0, 0.0));
            assert!(split.residual.nonzero_count(ZERO_TOL) <= 4);
            assert!(split.leading.add(&split.residual).unwrap().max_abs_diff(&h) <= 1e-14);
        }
    }

    #[test]
    fn log_path_matches_direct_path() {
        // scale h^∅ down so the log path is taken, then compare with the
        // direct ratio recursion evaluated by hand
        for seed in 0..20 {
            let mut amps = random_state(6, seed).unwrap().into_amplitudes();
            amps[0] *= 1e-5;
            let h = RegisterState::new(6, amps).unwrap();
            assert!(h.empty_amplitude().norm() < LOG_PATH_THRESHOLD * h.norm());
            let lv = leading_vector(&h).unwrap();
            let a = h.amplitudes();
            for s in [0b11usize, 0b101, 0b111000, 0b101011] {
                let mut expect = a[0];
                for k in 0..6 {
                    if s >> k & 1 == 1 {
                        expect *= a[1 << k] / a[0];
                    }
                }
                assert!((lv.amplitudes()[s] - expect).norm() <= 1e-9 * expect.norm(), "seed {seed} s {s:b}");
            }
        }
    }

    #[test]
    fn orthogonal_when_single_excitations_vanish() {
        let mut amps = random_state(4, 11).unwrap().into_amplitudes();
        for k in 0..4 {
            amps[1 << k] = Complex64::new(0.0, 0.0);
        }
        let h = RegisterState::new(4, amps).unwrap();
        let split = leading_split(&h).unwrap();
        assert_eq!(split.leading.max_abs_diff(&RegisterState::basis(4, 0).unwrap().scaled(h.empty_amplitude())), 0.0);
        assert!(split.leading.inner(&split.residual).norm() <= 1e-12 * h.squared_norm());
    }
}
