//! JSON state files.
//!
//! ```json
//! { "labels": ["A", "B"], "dims": [2, 2],
//!   "matrix": [[[0.5, 0.0], [0.0, 0.0], ...], ...] }
//! ```
//!
//! Pure states use `"vector": [[re, im], ...]` instead of `"matrix"`. A basis file holds only
//! `"matrix"`, whose columns are the basis vectors.

use serde::{Deserialize, Serialize};

use super::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, SubsystemLayout, C64};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vector: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateFile {
    Mixed(DensityMatrix),
    Pure(PureState),
}

impl StateFile {
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            Self::Mixed(rho) => rho.clone(),
            Self::Pure(psi) => super::from_pure(psi),
        }
    }
}

fn to_c64(z: &[f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

fn parse_rows(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(to_c64).collect()).collect();
    ComplexMatrix::from_rows(&rows)
}

fn rows_of(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Parses a state file, enforcing all state invariants.
pub fn parse_state(text: &str) -> Result<StateFile> {
    let raw: RawState = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let (labels, dims) = match (raw.labels, raw.dims) {
        (Some(l), Some(d)) => (l, d),
        _ => return Err(Error::Format("state file requires `labels` and `dims`".into())),
    };
    if labels.len() != dims.len() {
        return Err(Error::Format(format!(
            "{} labels but {} dims",
            labels.len(),
            dims.len()
        )));
    }
    let layout = SubsystemLayout::new(labels.into_iter().zip(dims))?;
    match (raw.matrix, raw.vector) {
        (Some(m), None) => Ok(StateFile::Mixed(DensityMatrix::new(parse_rows(&m)?, layout)?)),
        (None, Some(v)) => Ok(StateFile::Pure(PureState::new(
            v.iter().map(to_c64).collect(),
            layout,
        )?)),
        _ => Err(Error::Format("exactly one of `matrix` or `vector` is required".into())),
    }
}

pub fn density_to_json(rho: &DensityMatrix) -> String {
    let raw = RawState {
        labels: Some(rho.layout().labels().iter().map(|s| s.to_string()).collect()),
        dims: Some(rho.layout().dims()),
        matrix: Some(rows_of(rho.matrix())),
        vector: None,
    };
    serde_json::to_string_pretty(&raw).expect("state serializes")
}

pub fn pure_to_json(psi: &PureState) -> String {
    let raw = RawState {
        labels: Some(psi.layout().labels().iter().map(|s| s.to_string()).collect()),
        dims: Some(psi.layout().dims()),
        matrix: None,
        vector: Some(psi.amplitudes().iter().map(|z| [z.re, z.im]).collect()),
    };
    serde_json::to_string_pretty(&raw).expect("state serializes")
}

/// Parses a basis file: `{"matrix": rows}` with basis vectors as columns.
pub fn parse_basis_matrix(text: &str) -> Result<ComplexMatrix> {
    let raw: RawState = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let m = raw
        .matrix
        .ok_or_else(|| Error::Format("basis file requires `matrix`".into()))?;
    let m = parse_rows(&m)?;
    if !m.is_square() {
        return Err(Error::Format("basis matrix must be square".into()));
    }
    Ok(m)
}

pub fn basis_to_json(columns: &ComplexMatrix) -> String {
    let raw = RawState {
        labels: None,
        dims: None,
        matrix: Some(rows_of(columns)),
        vector: None,
    };
    serde_json::to_string_pretty(&raw).expect("basis serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{named_family, random_pure};

    #[test]
    fn bell_file_parses() {
        let text = r#"{"labels":["A","B"],"dims":[2,2],"matrix":[
            [[0.5,0],[0,0],[0,0],[0.5,0]],
            [[0,0],[0,0],[0,0],[0,0]],
            [[0,0],[0,0],[0,0],[0,0]],
            [[0.5,0],[0,0],[0,0],[0.5,0]]]}"#;
        let rho = parse_state(text).unwrap().to_density();
        assert!(rho.matrix().max_abs_diff(named_family("bell", &[]).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn round_trips() {
        let rho = named_family("werner", &[0.7]).unwrap();
        assert_eq!(parse_state(&density_to_json(&rho)).unwrap(), StateFile::Mixed(rho));
        let psi = random_pure(&SubsystemLayout::qubits(&["A", "B", "R"]), 3).unwrap();
        assert_eq!(parse_state(&pure_to_json(&psi)).unwrap(), StateFile::Pure(psi));
    }

    #[test]
    fn rejects_invalid_contents() {
        // trace 2
        let bad = r#"{"labels":["A"],"dims":[2],"matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(parse_state(bad), Err(Error::InvalidState(_))));
        // unnormalized vector
        let bad = r#"{"labels":["A"],"dims":[2],"vector":[[1,0],[1,0]]}"#;
        assert!(parse_state(bad).is_err());
        // both payloads
        let bad = r#"{"labels":["A"],"dims":[1],"vector":[[1,0]],"matrix":[[[1,0]]]}"#;
        assert!(matches!(parse_state(bad), Err(Error::Format(_))));
        // dimension mismatch
        let bad = r#"{"labels":["A","B"],"dims":[2,2],"vector":[[1,0],[0,0]]}"#;
        assert!(matches!(parse_state(bad), Err(Error::DimensionMismatch(_))));
        assert!(parse_state("not json").is_err());
    }

    #[test]
    fn basis_round_trip() {
        let u = crate::states::random_unitary(3, 4);
        assert_eq!(parse_basis_matrix(&basis_to_json(&u)).unwrap(), u);
    }
}
