//! Shared inputs for the benchmarks.

use lvdecomp::{random_state, LocalFrame, OptimizerConfig, RegisterState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Register lengths exercised by every benchmark group.
pub const LENGTHS: [usize; 3] = [4, 8, 12];

pub fn state(l: usize) -> RegisterState {
    random_state(l, 0xbe7c + l as u64).expect("valid length")
}

pub fn frame(l: usize) -> LocalFrame {
    LocalFrame::random(l, &mut ChaCha8Rng::seed_from_u64(l as u64))
}

/// A single restart keeps timings about one optimizer run.
pub fn single_restart() -> OptimizerConfig {
    OptimizerConfig { restarts: 1, ..Default::default() }
}
