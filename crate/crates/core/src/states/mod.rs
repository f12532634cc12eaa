//! Density matrices, pure states and their constructors.

mod families;
pub mod file;
mod random;

pub use families::{named_family, Family};
pub use random::{random_density, random_pure, random_state, random_unitary, seeded_rng};

use crate::error::{Error, Result};
use crate::qmat::{hermitian_eig, kron, partial_trace, permute_factors, permute_vector};
use crate::qmat::{ComplexMatrix, SubsystemLayout, C64, HERMITIAN_TOL};

/// Trace and minimum-eigenvalue tolerance for [`DensityMatrix`].
pub const STATE_TOL: f64 = 1e-10;

/// Eigenvalues at or below this count as zero when computing numerical rank.
pub const RANK_TOL: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite operator on a labelled tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    layout: SubsystemLayout,
}

impl DensityMatrix {
    /// Validates and stores the Hermitian part of `mat`.
    pub fn new(mat: ComplexMatrix, layout: SubsystemLayout) -> Result<Self> {
        if !mat.is_square() || mat.rows() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for layout {layout}",
                mat.rows(),
                mat.cols()
            )));
        }
        let asym = mat.hermitian_asymmetry();
        if !(asym <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let mat = mat.hermitian_part();
        let tr = mat.trace().re;
        if !((tr - 1.0).abs() <= STATE_TOL) {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = hermitian_eig(&mat)?
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min_eig:e} is negative"
            )));
        }
        Ok(Self { mat, layout })
    }

    /// For outputs of operations that preserve validity by construction.
    pub(crate) fn from_trusted(mat: ComplexMatrix, layout: SubsystemLayout) -> Self {
        debug_assert_eq!(mat.rows(), layout.total_dim());
        Self {
            mat: mat.hermitian_part(),
            layout,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.layout.labels()
    }

    /// Reduced state on `keep` (layout order preserved).
    pub fn reduced(&self, keep: &[&str]) -> Result<Self> {
        let mat = partial_trace(&self.mat, &self.layout, keep)?;
        Ok(Self::from_trusted(mat, self.layout.restrict(keep)?))
    }

    pub fn permuted(&self, order: &[&str]) -> Result<Self> {
        let (mat, layout) = permute_factors(&self.mat, &self.layout, order)?;
        Ok(Self { mat, layout })
    }

    pub fn relabeled(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            mat: self.mat.clone(),
            layout: self.layout.relabel(from, to)?,
        })
    }

    /// `self ⊗ other`; labels must be disjoint.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        let mut parts = self.layout.parts().to_vec();
        parts.extend(other.layout.parts().iter().cloned());
        Ok(Self {
            mat: kron(&self.mat, &other.mat),
            layout: SubsystemLayout::new(parts)?,
        })
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eig(&self.mat)
            .expect("density matrices are Hermitian")
            .eigenvalues
    }

    /// Number of eigenvalues above [`RANK_TOL`].
    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > RANK_TOL).count()
    }

    /// Maximally mixed state on `layout`.
    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        Self {
            mat: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            layout,
        }
    }

    /// Qubit state `(I + r·σ)/2`.
    pub fn qubit_from_bloch(label: &str, r: [f64; 3]) -> Result<Self> {
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "Bloch vector {r:?} has length {norm} > 1"
            )));
        }
        let mat = ComplexMatrix::from_rows(&[
            vec![C64::new((1.0 + r[2]) / 2.0, 0.0), C64::new(r[0] / 2.0, -r[1] / 2.0)],
            vec![C64::new(r[0] / 2.0, r[1] / 2.0), C64::new((1.0 - r[2]) / 2.0, 0.0)],
        ])?;
        Ok(Self {
            mat,
            layout: SubsystemLayout::new([(label, 2)])?,
        })
    }
}

/// Unit vector on a labelled tensor product.
///
/// Global phase is fixed so that the first amplitude with modulus above 1e-12 is real and
/// nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    layout: SubsystemLayout,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, layout: SubsystemLayout) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for layout {layout}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= STATE_TOL) {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(Self::canonical_phase(amplitudes, layout))
    }

    /// Normalizes before validating.
    pub fn normalized(amplitudes: Vec<C64>, layout: SubsystemLayout) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect(), layout)
    }

    fn canonical_phase(mut amplitudes: Vec<C64>, layout: SubsystemLayout) -> Self {
        if let Some(first) = amplitudes.iter().find(|a| a.norm() > 1e-12) {
            let phase = first.conj() / first.norm();
            for a in &mut amplitudes {
                *a *= phase;
            }
        }
        Self { amplitudes, layout }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn permuted(&self, order: &[&str]) -> Result<Self> {
        let (amps, layout) = permute_vector(&self.amplitudes, &self.layout, order)?;
        Ok(Self::canonical_phase(amps, layout))
    }

    pub fn relabeled(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            amplitudes: self.amplitudes.clone(),
            layout: self.layout.relabel(from, to)?,
        })
    }

    /// Applies an isometry mapping this layout into `layout`.
    pub(crate) fn apply_isometry(&self, v: &ComplexMatrix, layout: SubsystemLayout) -> Result<Self> {
        let amps = v.mul_vec(&self.amplitudes)?;
        Self::normalized(amps, layout)
    }
}

/// `|ψ⟩⟨ψ|` on the same layout.
pub fn from_pure(psi: &PureState) -> DensityMatrix {
    DensityMatrix::from_trusted(
        ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()),
        psi.layout().clone(),
    )
}

/// Purification `Σ_l √λ_l |r_l⟩|l⟩` with a reference factor of dimension `rank(ρ)`.
pub fn purify(rho: &DensityMatrix, ref_label: &str) -> Result<PureState> {
    if rho.layout().contains(ref_label) {
        return Err(Error::LabelCollision(ref_label.to_string()));
    }
    let eig = hermitian_eig(rho.matrix())?;
    let support: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&l| eig.eigenvalues[l] > RANK_TOL)
        .collect();
    let r = support.len().max(1);
    let layout = rho.layout().with_part(ref_label, r)?;
    let d = rho.dim();
    let mut amps = vec![C64::new(0.0, 0.0); d * r];
    for (k, &l) in support.iter().enumerate() {
        let w = eig.eigenvalues[l].sqrt();
        for i in 0..d {
            amps[i * r + k] = eig.eigenvectors[(i, l)] * w;
        }
    }
    PureState::normalized(amps, layout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn from_pure_examples() {
        let zero = PureState::new(vec![c(1.0), c(0.0)], SubsystemLayout::new([("A", 2)]).unwrap()).unwrap();
        assert_eq!(from_pure(&zero).matrix(), &ComplexMatrix::from_real_diagonal(&[1.0, 0.0]));

        let s = 0.5f64.sqrt();
        let phi = PureState::new(vec![c(s), c(0.0), c(0.0), c(s)], SubsystemLayout::qubits(&["A", "B"]))
            .unwrap();
        let rho = from_pure(&phi);
        let halves = [(0, 0), (0, 3), (3, 0), (3, 3)];
        for r in 0..4 {
            for col in 0..4 {
                let expected = if halves.contains(&(r, col)) { 0.5 } else { 0.0 };
                assert!((rho.matrix()[(r, col)] - c(expected)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn phase_convention() {
        let psi = PureState::new(
            vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            SubsystemLayout::new([("A", 2)]).unwrap(),
        )
        .unwrap();
        assert_eq!(psi.amplitudes()[1], c(1.0));
    }

    #[test]
    fn rejects_invalid_states() {
        let l = SubsystemLayout::new([("A", 2)]).unwrap();
        assert!(PureState::new(vec![c(1.0), c(1.0)], l.clone()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.6, 0.6]), l.clone()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.2, -0.2]), l.clone()).is_err());
        let non_herm = ComplexMatrix::from_rows(&[vec![c(0.5), c(0.3)], vec![c(0.0), c(0.5)]]).unwrap();
        assert!(matches!(DensityMatrix::new(non_herm, l), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn purify_pure_input_has_trivial_reference() {
        let rho = DensityMatrix::new(
            ComplexMatrix::from_real_diagonal(&[1.0, 0.0]),
            SubsystemLayout::new([("A", 2)]).unwrap(),
        )
        .unwrap();
        let psi = purify(&rho, "R").unwrap();
        assert_eq!(psi.layout().dim_of("R").unwrap(), 1);
        assert!((psi.amplitudes()[0] - c(1.0)).norm() < 1e-15);
        let back = from_pure(&psi).reduced(&["A"]).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn purify_maximally_mixed_qubit() {
        let rho = DensityMatrix::maximally_mixed(SubsystemLayout::new([("A", 2)]).unwrap());
        let psi = purify(&rho, "R").unwrap();
        assert_eq!(psi.layout().dims(), vec![2, 2]);
        let full = from_pure(&psi);
        assert!(full.reduced(&["A"]).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-12);
        assert!(full.reduced(&["R"]).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn purify_label_collision() {
        let rho = DensityMatrix::maximally_mixed(SubsystemLayout::new([("A", 2)]).unwrap());
        assert!(matches!(purify(&rho, "A"), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn purify_random_round_trip() {
        let layout = SubsystemLayout::qubits(&["A", "B"]);
        for seed in 0..20 {
            let rho = random_state(&layout, 1 + (seed as usize % 4), seed).unwrap();
            let psi = purify(&rho, "R").unwrap();
            assert_eq!(psi.layout().dim_of("R").unwrap(), rho.rank());
            let back = from_pure(&psi).reduced(&["A", "B"]).unwrap();
            assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-9);
        }
    }

    #[test]
    fn bloch_qubit() {
        let rho = DensityMatrix::qubit_from_bloch("A", [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(rho.matrix(), &ComplexMatrix::from_real_diagonal(&[1.0, 0.0]));
        assert!(DensityMatrix::qubit_from_bloch("A", [1.0, 1.0, 0.0]).is_err());
    }
}
