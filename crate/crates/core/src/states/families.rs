use std::fmt;

use super::{from_pure, DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::qmat::{kron, ComplexMatrix, SubsystemLayout, C64};

/// Named state families. Bipartite families use labels `A`, `B`; GHZ uses `A`, `B`, `C`.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `|Φ+⟩ = (|00⟩ + |11⟩)/√2`
    Bell,
    /// `p |Φ+⟩⟨Φ+| + (1 - p) I/4`, `p ∈ [0, 1]`.
    Werner(f64),
    /// `Σ_i p_i |ii⟩⟨ii|` on `d ⊗ d` with `d = probs.len()`.
    ClassicalClassical(Vec<f64>),
    /// `Σ_i p_i ρ_A(r_i) ⊗ |i⟩⟨i|_B`: qubit `A` with Bloch vectors `r_i`, classical `B`.
    /// Zero discord when `B` is the measured side.
    ClassicalQuantum { probs: Vec<f64>, bloch: Vec<[f64; 3]> },
    /// `ρ_A(r_a) ⊗ ρ_B(r_b)` for two qubit Bloch vectors.
    Product { a: [f64; 3], b: [f64; 3] },
    /// `(|000⟩ + |111⟩)/√2`
    Ghz,
}

impl Family {
    /// Builds a family from its name and a flat parameter list.
    ///
    /// `classical_quantum` takes `k` probabilities followed by `3k` Bloch coordinates;
    /// `product` takes six Bloch coordinates (`A` then `B`).
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let expect_len = |n: usize| -> Result<()> {
            if params.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "{name} expects {n} parameters, got {}",
                    params.len()
                )));
            }
            Ok(())
        };
        match name {
            "bell" => {
                expect_len(0)?;
                Ok(Self::Bell)
            }
            "ghz" => {
                expect_len(0)?;
                Ok(Self::Ghz)
            }
            "werner" => {
                expect_len(1)?;
                Ok(Self::Werner(params[0]))
            }
            "classical_classical" | "cc" => Ok(Self::ClassicalClassical(params.to_vec())),
            "classical_quantum" | "cq" => {
                if params.is_empty() || !params.len().is_multiple_of(4) {
                    return Err(Error::InvalidParameter(format!(
                        "classical_quantum expects k probabilities and 3k Bloch coordinates, got {} numbers",
                        params.len()
                    )));
                }
                let k = params.len() / 4;
                let bloch = params[k..]
                    .chunks_exact(3)
                    .map(|c| [c[0], c[1], c[2]])
                    .collect();
                Ok(Self::ClassicalQuantum {
                    probs: params[..k].to_vec(),
                    bloch,
                })
            }
            "product" => {
                expect_len(6)?;
                Ok(Self::Product {
                    a: [params[0], params[1], params[2]],
                    b: [params[3], params[4], params[5]],
                })
            }
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bell => "bell",
            Self::Werner(_) => "werner",
            Self::ClassicalClassical(_) => "classical_classical",
            Self::ClassicalQuantum { .. } => "classical_quantum",
            Self::Product { .. } => "product",
            Self::Ghz => "ghz",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Self::Bell | Self::Ghz => vec![],
            Self::Werner(p) => vec![*p],
            Self::ClassicalClassical(p) => p.clone(),
            Self::ClassicalQuantum { probs, bloch } => {
                let mut v = probs.clone();
                v.extend(bloch.iter().flatten());
                v
            }
            Self::Product { a, b } => a.iter().chain(b).copied().collect(),
        }
    }

    pub fn build(&self) -> Result<DensityMatrix> {
        match self {
            Self::Bell => Ok(from_pure(&bell_pure())),
            Self::Ghz => {
                let s = 0.5f64.sqrt();
                let mut amps = vec![C64::new(0.0, 0.0); 8];
                amps[0] = C64::new(s, 0.0);
                amps[7] = C64::new(s, 0.0);
                let psi = PureState::new(amps, SubsystemLayout::qubits(&["A", "B", "C"]))?;
                Ok(from_pure(&psi))
            }
            Self::Werner(p) => {
                let p = *p;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!("werner p = {p} outside [0, 1]")));
                }
                let bell = from_pure(&bell_pure());
                let mixed = ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
                DensityMatrix::new(
                    &bell.matrix().scale_real(p) + &mixed,
                    SubsystemLayout::qubits(&["A", "B"]),
                )
            }
            Self::ClassicalClassical(probs) => {
                check_distribution(probs)?;
                let d = probs.len();
                let mut diag = vec![0.0; d * d];
                for (i, &p) in probs.iter().enumerate() {
                    diag[i * d + i] = p;
                }
                DensityMatrix::new(
                    ComplexMatrix::from_real_diagonal(&diag),
                    SubsystemLayout::new([("A", d), ("B", d)])?,
                )
            }
            Self::ClassicalQuantum { probs, bloch } => {
                check_distribution(probs)?;
                if bloch.len() != probs.len() {
                    return Err(Error::InvalidParameter(
                        "one Bloch vector per probability required".into(),
                    ));
                }
                let k = probs.len();
                let mut acc = ComplexMatrix::zeros(2 * k, 2 * k);
                for (i, (&p, r)) in probs.iter().zip(bloch).enumerate() {
                    let ra = DensityMatrix::qubit_from_bloch("A", *r)?;
                    let mut proj = vec![0.0; k];
                    proj[i] = 1.0;
                    let term = kron(ra.matrix(), &ComplexMatrix::from_real_diagonal(&proj));
                    acc = &acc + &term.scale_real(p);
                }
                DensityMatrix::new(acc, SubsystemLayout::new([("A", 2), ("B", k)])?)
            }
            Self::Product { a, b } => {
                let ra = DensityMatrix::qubit_from_bloch("A", *a)?;
                let rb = DensityMatrix::qubit_from_bloch("B", *b)?;
                ra.tensor(&rb)
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            write!(f, "{}", self.name())
        } else {
            let p: Vec<String> = params.iter().map(|x| x.to_string()).collect();
            write!(f, "{}({})", self.name(), p.join(","))
        }
    }
}

/// Looks up a family by name and builds it.
pub fn named_family(name: &str, params: &[f64]) -> Result<DensityMatrix> {
    Family::from_name(name, params)?.build()
}

pub(crate) fn bell_pure() -> PureState {
    let s = 0.5f64.sqrt();
    PureState::new(
        vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)],
        SubsystemLayout::qubits(&["A", "B"]),
    )
    .expect("Bell state is normalized")
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidParameter("empty probability list".into()));
    }
    if p.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidParameter(format!("negative probability in {p:?}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("probabilities sum to {sum}")));
    }
    Ok(())
}
