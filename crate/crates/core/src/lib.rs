//! Decomposition of pure states of an `l`-qubit register into at most
//! `2^l − l` mutually orthogonal product states.
//!
//! States are chains over the face complex of an `l`-vertex simplex (see
//! [`register`]). The decomposer picks a local frame, one 2×2 unitary per
//! bit, in which every single-excitation amplitude vanishes; the leading
//! vector in that frame is then orthogonal to the rest, and the rest has
//! no amplitude on the empty face or on any single-vertex face.
//!
//! ```
//! use lvdecomp::{decompose, term_count, OptimizerConfig, RegisterState};
//!
//! let ghz = RegisterState::ghz(3).unwrap();
//! let d = decompose(&ghz, &OptimizerConfig::default()).unwrap();
//! assert_eq!(term_count(&d, 1e-12), 2);
//! ```

pub mod decompose;
pub mod error;
pub mod format;
pub mod frame;
pub mod leading;
pub mod oracle;
pub mod product;
pub mod register;

pub use decompose::{
    decompose, optimize_frame, sweep_update_bit, term_count, Decomposition, Diagnostics, FrameOptimum,
    OptimizerConfig, ProductTerm,
};
pub use error::{Error, Result};
pub use frame::{apply_local_frame, LocalFrame, LocalUnitary};
pub use leading::{kappa, kappa_of, leading_split, leading_vector, LeadingSplit};
pub use product::{
    exchangeability_defect, factorize_product, is_product, is_product_full, DefectTriple, ProductFactorization,
};
pub use register::{random_product_state, random_state, RegisterState, SimplexIndex, MAX_BITS, ZERO_TOL};
