//! JSON state files and the number formatting shared by every JSON output.
//!
//! A state file is `{"l": <int>, "amplitudes": [[re, im], …]}` with exactly
//! `2^l` pairs in amplitude-index order (bit `k` ↔ binary digit `k`).

use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

use crate::error::{Error, Result};
use crate::register::RegisterState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub l: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&RegisterState> for StateFile {
    fn from(h: &RegisterState) -> Self {
        Self { l: h.len(), amplitudes: h.amplitudes().iter().map(|a| [a.re, a.im]).collect() }
    }
}

impl TryFrom<StateFile> for RegisterState {
    type Error = Error;

    fn try_from(f: StateFile) -> Result<Self> {
        let amps = f.amplitudes.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        RegisterState::new(f.l, amps)
    }
}

pub fn parse_state(text: &str) -> Result<RegisterState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.try_into()
}

pub fn state_to_json(h: &RegisterState) -> String {
    to_json(&StateFile::from(h))
}

/// Compact JSON with every float written to 17 significant digits, enough
/// to read back the identical double.
pub struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f32(writer, value)
    }
}

/// Serializes with [`Digits17`]. Panics only if `value` contains a
/// non-finite float or a map with non-string keys.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17);
    value.serialize(&mut ser).expect("JSON serialization of finite values");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::random_state;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_layout() {
        let h = parse_state(r#"{"l": 1, "amplitudes": [[0.6, 0], [0, -0.8]]}"#).unwrap();
        assert_eq!(h.amplitudes(), &[Complex64::new(0.6, 0.0), Complex64::new(0.0, -0.8)]);
    }

    #[test]
    fn wrong_count_message() {
        let err = parse_state(r#"{"l": 2, "amplitudes": [[1,0],[0,0],[0,0]]}"#).unwrap_err();
        assert!(err.to_string().contains("expected 4 amplitudes"), "{err}");
    }

    #[test]
    fn malformed_rejected() {
        assert!(matches!(parse_state("{"), Err(Error::Format(_))));
        assert!(matches!(parse_state(r#"{"l": 1, "amplitudes": [[1]]}"#), Err(Error::Format(_))));
        assert!(matches!(parse_state(r#"{"l": 1, "amplitudes": [[1,0],[0,0]], "x": 1}"#), Err(Error::Format(_))));
    }

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(to_json(&[0.1f64]), "[1.0000000000000001e-1]");
    }

    proptest! {
        #[test]
        fn state_round_trip_is_exact(seed in any::<u64>(), len in 1usize..6) {
            let h = random_state(len, seed).unwrap();
            prop_assert_eq!(parse_state(&state_to_json(&h)).unwrap(), h);
        }
    }
}
