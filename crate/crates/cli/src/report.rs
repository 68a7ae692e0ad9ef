//! Machine-readable reports written by every subcommand.

use lvdecomp::oracle::VerificationReport;
use lvdecomp::product::{DefectTriple, ProductFactorization};
use lvdecomp::{Decomposition, Diagnostics, LeadingSplit, LocalFrame, ProductTerm, RegisterState, SimplexIndex};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    pub result: Payload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

impl Report {
    pub fn new(command: &str, input: Option<&RegisterState>, result: Payload) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            input_digest: input.map(input_digest),
            result,
            diagnostics: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Decomposition(DecompositionPayload),
    Product(ProductPayload),
    Leading(LeadingPayload),
    Random(RandomPayload),
    Verification(VerificationReport),
}

/// A set of bits, given both as the index mask and as 1-based vertex labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub mask: usize,
    pub vertices: Vec<usize>,
}

impl From<SimplexIndex> for Face {
    fn from(s: SimplexIndex) -> Self {
        Self { mask: s.bits(), vertices: s.vertices().map(|k| k + 1).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPayload {
    pub l: usize,
    pub converged: bool,
    pub term_count: usize,
    pub leading_index: usize,
    pub terms: Vec<ProductTerm>,
    pub frame: LocalFrame,
    pub residual_faces: Vec<Face>,
    pub reconstruction_error: f64,
}

impl DecompositionPayload {
    pub fn new(h: &RegisterState, d: &Decomposition) -> lvdecomp::Result<Self> {
        Ok(Self {
            l: d.register_len(),
            converged: d.diagnostics.converged,
            term_count: d.terms.len(),
            leading_index: d.leading_index,
            terms: d.terms.clone(),
            frame: d.frame.clone(),
            residual_faces: d.residual_faces.iter().copied().map(Face::from).collect(),
            reconstruction_error: d.reconstruct()?.max_abs_diff(h),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub s: Face,
    pub t: Face,
    /// 1-based label of the exchanged vertex.
    pub v: usize,
    pub defect: Complex64,
    pub magnitude: f64,
}

impl From<DefectTriple> for Defect {
    fn from(d: DefectTriple) -> Self {
        Self { s: d.s.into(), t: d.t.into(), v: d.vertex + 1, defect: d.defect, magnitude: d.magnitude }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductPayload {
    pub l: usize,
    pub is_product: bool,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factorization: Option<ProductFactorization>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<[Complex64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_trip_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_defect: Option<Defect>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingPayload {
    pub l: usize,
    pub kappa: f64,
    pub leading: Vec<Complex64>,
    pub residual: Vec<Complex64>,
    /// Residual amplitudes above the zero tolerance.
    pub residual_count: usize,
    pub residual_sq_norm: f64,
}

impl LeadingPayload {
    pub fn new(split: &LeadingSplit, zero_tol: f64) -> Self {
        let cutoff = zero_tol * (split.leading.squared_norm() + split.residual.squared_norm()).sqrt();
        Self {
            l: split.leading.len(),
            kappa: split.kappa,
            leading: split.leading.amplitudes().to_vec(),
            residual: split.residual.amplitudes().to_vec(),
            residual_count: split.residual.amplitudes().iter().filter(|a| a.norm() > cutoff).count(),
            residual_sq_norm: split.residual.squared_norm(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomPayload {
    pub l: usize,
    pub seed: u64,
    pub product: bool,
    pub path: String,
}

/// `sha256:` followed by the hex digest of the amplitudes as little-endian
/// `f64` pairs in index order.
pub fn input_digest(h: &RegisterState) -> String {
    let mut hasher = Sha256::new();
    for a in h.amplitudes() {
        hasher.update(a.re.to_le_bytes());
        hasher.update(a.im.to_le_bytes());
    }
    let hex: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}
