//! JSON state files.
//!
//! Format: {"n_parties": N, "local_dim": d, "amplitudes": [[re,im],...]} with
//! amplitudes in flat row-major order. The reader renormalizes and reports
//! the pre-normalization norm so callers can detect sloppy inputs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MdentError, Result};
use crate::state::State;
use crate::C64;

#[derive(Debug, Serialize, Deserialize)]
struct StateFile {
    n_parties: usize,
    local_dim: usize,
    amplitudes: Vec<[f64; 2]>,
}

/// A state read from disk together with the norm it had before
/// renormalization.
#[derive(Debug, Clone)]
pub struct LoadedState {
    pub state: State,
    pub pre_norm: f64,
}

/// Parses a state from its JSON representation.
pub fn state_from_json(json: &str) -> Result<LoadedState> {
    let file: StateFile = serde_json::from_str(json)?;
    let amps: Vec<C64> = file
        .amplitudes
        .iter()
        .map(|[re, im]| C64::new(*re, *im))
        .collect();
    let pre_norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !pre_norm.is_finite() {
        return Err(MdentError::InvalidState(
            "amplitudes must be finite".into(),
        ));
    }
    let state = State::from_amplitudes(file.n_parties, file.local_dim, amps)?;
    Ok(LoadedState { state, pre_norm })
}

/// Serializes a state to the JSON file format.
pub fn state_to_json(state: &State) -> String {
    let file = StateFile {
        n_parties: state.n_parties(),
        local_dim: state.local_dim(),
        amplitudes: state
            .amplitudes()
            .iter()
            .map(|z| [z.re, z.im])
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("state serialization cannot fail")
}

pub fn load_state<P: AsRef<Path>>(path: P) -> Result<LoadedState> {
    let json = fs::read_to_string(path)?;
    state_from_json(&json)
}

pub fn save_state<P: AsRef<Path>>(path: P, state: &State) -> Result<()> {
    fs::write(path, state_to_json(state))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn round_trip_preserves_amplitudes() {
        let inv = 1.0 / 2f64.sqrt();
        let amps = vec![
            C64::new(inv, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, -inv),
        ];
        let s = State::from_amplitudes(2, 2, amps).unwrap();
        let loaded = state_from_json(&state_to_json(&s)).unwrap();
        assert_abs_diff_eq!(loaded.pre_norm, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            (loaded.state.amplitudes() - s.amplitudes()).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn reader_renormalizes_and_reports_pre_norm() {
        let json = r#"{"n_parties": 2, "local_dim": 2,
                       "amplitudes": [[2.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]}"#;
        let loaded = state_from_json(json).unwrap();
        assert_abs_diff_eq!(loaded.pre_norm, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(loaded.state.amplitude(0).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reader_rejects_bad_inputs() {
        // Wrong amplitude count.
        let short = r#"{"n_parties": 2, "local_dim": 2, "amplitudes": [[1.0,0.0]]}"#;
        assert!(state_from_json(short).is_err());
        // All-zero state.
        let zero = r#"{"n_parties": 1, "local_dim": 2, "amplitudes": [[0.0,0.0],[0.0,0.0]]}"#;
        assert!(state_from_json(zero).is_err());
        // Malformed JSON.
        assert!(state_from_json("{").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let s = State::basis_state(2, 3, &[1, 2]).unwrap();
        save_state(&path, &s).unwrap();
        let loaded = load_state(&path).unwrap();
        assert_abs_diff_eq!(
            (loaded.state.amplitudes() - s.amplitudes()).norm(),
            0.0,
            epsilon = 1e-15
        );
    }
}
