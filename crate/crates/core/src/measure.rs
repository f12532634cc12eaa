//! Measurements on one subsystem: outcome ensembles, measured conditional entropy,
//! dephasing, and the coherent ancilla extension that records a projective measurement.

use crate::entropy::{self, shannon_entropy, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::qmat::{embed_local, hermitian_eig, kron, partial_trace, ComplexMatrix, SubsystemLayout};
use crate::states::{DensityMatrix, PureState};

/// Positivity tolerance for POVM elements.
pub const POVM_PSD_TOL: f64 = 1e-10;
/// Completeness tolerance (`Σ Π_i = I`).
pub const POVM_COMPLETENESS_TOL: f64 = 1e-9;
/// Outcomes below this probability are dropped from entropy sums.
pub const ZERO_PROB: f64 = 1e-12;

/// Finite set of positive operators on one subsystem summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    subsystem: String,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(subsystem: &str, elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let d = first.rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (i, e) in elements.iter().enumerate() {
            if e.rows() != d || e.cols() != d {
                return Err(Error::InvalidPovm(format!("element {i} is not {d}x{d}")));
            }
            let eig = hermitian_eig(e).map_err(|err| Error::InvalidPovm(format!("element {i}: {err}")))?;
            let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
            if min < -POVM_PSD_TOL {
                return Err(Error::InvalidPovm(format!(
                    "element {i} has negative eigenvalue {min:e}"
                )));
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if dev > POVM_COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {dev:e}"
            )));
        }
        Ok(Self {
            subsystem: subsystem.to_string(),
            elements,
        })
    }

    /// Rank-1 projectors onto the columns of a unitary.
    pub fn from_basis(subsystem: &str, basis: &ComplexMatrix) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::InvalidPovm("basis matrix must be square".into()));
        }
        let d = basis.rows();
        let gram = &basis.adjoint() * basis;
        let dev = gram.max_abs_diff(&ComplexMatrix::identity(d));
        if dev > POVM_COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "basis vectors are orthonormal only within {dev:e}"
            )));
        }
        let elements = (0..d)
            .map(|j| {
                let v = basis.column(j);
                ComplexMatrix::outer(&v, &v)
            })
            .collect();
        Ok(Self {
            subsystem: subsystem.to_string(),
            elements,
        })
    }

    pub fn computational(subsystem: &str, dim: usize) -> Self {
        Self::from_basis(subsystem, &ComplexMatrix::identity(dim)).expect("identity is unitary")
    }

    pub fn subsystem(&self) -> &str {
        &self.subsystem
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn with_subsystem(mut self, subsystem: &str) -> Self {
        self.subsystem = subsystem.to_string();
        self
    }

    pub fn is_rank_one(&self) -> bool {
        self.elements.iter().all(|e| {
            hermitian_eig(e)
                .map(|eig| eig.eigenvalues.iter().skip(1).all(|l| l.abs() <= POVM_PSD_TOL))
                .unwrap_or(false)
        })
    }

    /// Unitary whose columns span the elements, if this is a complete rank-1 orthogonal
    /// projective measurement.
    pub fn orthonormal_basis(&self) -> Result<ComplexMatrix> {
        let d = self.dim();
        if self.len() != d {
            return Err(Error::InvalidPovm(format!(
                "{} elements cannot form an orthogonal basis of dimension {d}",
                self.len()
            )));
        }
        let mut cols = Vec::with_capacity(d);
        for (i, e) in self.elements.iter().enumerate() {
            let eig = hermitian_eig(e)?;
            let top = eig.eigenvalues[0];
            if (top - 1.0).abs() > POVM_COMPLETENESS_TOL
                || eig.eigenvalues.iter().skip(1).any(|l| l.abs() > POVM_COMPLETENESS_TOL)
            {
                return Err(Error::InvalidPovm(format!(
                    "element {i} is not a rank-1 projector (spectrum {:?})",
                    eig.eigenvalues
                )));
            }
            cols.push(eig.eigenvectors.column(0));
        }
        let u = ComplexMatrix::from_fn(d, d, |r, c| cols[c][r]);
        let dev = (&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(d));
        if dev > POVM_COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "projectors are not mutually orthogonal (deviation {dev:e})"
            )));
        }
        Ok(u)
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub prob: f64,
    /// State of the unmeasured factors; maximally mixed placeholder when `prob` is zero.
    pub post_state: DensityMatrix,
}

#[derive(Debug, Clone)]
pub struct MeasurementEnsemble {
    pub outcomes: Vec<Outcome>,
}

impl MeasurementEnsemble {
    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.prob).collect()
    }

    /// `Σ p_i ρ_i`, the unconditioned state of the unmeasured factors.
    pub fn average(&self) -> ComplexMatrix {
        let d = self.outcomes[0].post_state.dim();
        self.outcomes.iter().fold(ComplexMatrix::zeros(d, d), |acc, o| {
            &acc + &o.post_state.matrix().scale_real(o.prob)
        })
    }
}

fn check_povm_on(rho_layout: &SubsystemLayout, povm: &Povm) -> Result<Vec<String>> {
    let d = rho_layout.dim_of(povm.subsystem())?;
    if d != povm.dim() {
        return Err(Error::InvalidPovm(format!(
            "measurement of dimension {} on `{}` of dimension {d}",
            povm.dim(),
            povm.subsystem()
        )));
    }
    let rest: Vec<String> = rho_layout
        .complement(&[povm.subsystem()])
        .into_iter()
        .map(String::from)
        .collect();
    if rest.is_empty() {
        return Err(Error::InvalidLayout("no unmeasured subsystem left".into()));
    }
    Ok(rest)
}

/// Outcome probabilities `tr((I⊗Π_i)ρ)` and conditional states of the unmeasured factors.
pub fn povm_outcomes(rho: &DensityMatrix, povm: &Povm) -> Result<MeasurementEnsemble> {
    let rest = check_povm_on(rho.layout(), povm)?;
    let rest: Vec<&str> = rest.iter().map(String::as_str).collect();
    let rest_layout = rho.layout().restrict(&rest)?;
    let mut outcomes = Vec::with_capacity(povm.len());
    for e in povm.elements() {
        let full = embed_local(e, rho.layout(), povm.subsystem())?;
        let weighted = &full * rho.matrix();
        let prob = weighted.trace().re;
        let outcome = if prob < ZERO_PROB {
            Outcome {
                prob: 0.0,
                post_state: DensityMatrix::maximally_mixed(rest_layout.clone()),
            }
        } else {
            let reduced = partial_trace(&weighted, rho.layout(), &rest)?;
            Outcome {
                prob,
                post_state: DensityMatrix::from_trusted(reduced.scale_real(1.0 / prob), rest_layout.clone()),
            }
        };
        outcomes.push(outcome);
    }
    Ok(MeasurementEnsemble { outcomes })
}

/// `Σ_i p_i S(ρ_{rest|i})`.
pub fn measured_conditional_entropy(rho: &DensityMatrix, povm: &Povm) -> Result<f64> {
    let ens = povm_outcomes(rho, povm)?;
    let mut s = 0.0;
    for o in &ens.outcomes {
        if o.prob >= ZERO_PROB {
            s += o.prob * von_neumann_entropy(&o.post_state)?;
        }
    }
    Ok(s)
}

/// Measures `basis.subsystem()` in a complete orthonormal basis and forgets the outcome.
pub fn dephase(rho: &DensityMatrix, basis: &Povm) -> Result<DensityMatrix> {
    check_povm_on(rho.layout(), basis)?;
    basis.orthonormal_basis()?;
    let d = rho.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for e in basis.elements() {
        let p = embed_local(e, rho.layout(), basis.subsystem())?;
        out = &out + &(&(&p * rho.matrix()) * &p);
    }
    Ok(DensityMatrix::from_trusted(out, rho.layout().clone()))
}

/// A label not present in `layout`, starting from `base`.
pub fn fresh_label(layout: &SubsystemLayout, base: &str) -> String {
    let mut label = base.to_string();
    while layout.contains(&label) {
        label.push('\'');
    }
    label
}

/// Isometry `V = Σ_j Π_j ⊗ |j⟩_C` that copies the measurement outcome into a fresh factor
/// appended on the right.
pub fn measurement_isometry(
    layout: &SubsystemLayout,
    basis: &Povm,
    ancilla: &str,
) -> Result<(ComplexMatrix, SubsystemLayout)> {
    basis.orthonormal_basis()?;
    let d_b = layout.dim_of(basis.subsystem())?;
    if d_b != basis.dim() {
        return Err(Error::InvalidPovm(format!(
            "basis of dimension {} on `{}` of dimension {d_b}",
            basis.dim(),
            basis.subsystem()
        )));
    }
    let new_layout = layout.with_part(ancilla, basis.len())?;
    let total = layout.total_dim();
    let mut v = ComplexMatrix::zeros(total * basis.len(), total);
    for (j, e) in basis.elements().iter().enumerate() {
        let mut ket = vec![Default::default(); basis.len()];
        ket[j] = crate::qmat::C64::new(1.0, 0.0);
        let term = kron(
            &embed_local(e, layout, basis.subsystem())?,
            &ComplexMatrix::column_vector(&ket),
        );
        v = &v + &term;
    }
    Ok((v, new_layout))
}

/// `ρ′ = Σ_{j,k} Π_j ρ Π_k ⊗ |j⟩⟨k|_C`: the measured factor coherently recorded in a fresh
/// ancilla of the same dimension.
pub fn ancilla_extension(rho: &DensityMatrix, basis: &Povm, ancilla: &str) -> Result<DensityMatrix> {
    let (v, layout) = measurement_isometry(rho.layout(), basis, ancilla)?;
    let ext = &(&v * rho.matrix()) * &v.adjoint();
    Ok(DensityMatrix::from_trusted(ext, layout))
}

/// Pure-state version of [`ancilla_extension`].
pub fn ancilla_extension_pure(psi: &PureState, basis: &Povm, ancilla: &str) -> Result<PureState> {
    let (v, layout) = measurement_isometry(psi.layout(), basis, ancilla)?;
    psi.apply_isometry(&v, layout)
}

/// The entropies of the ancilla construction and the residuals of the identities relating
/// them to the original state.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    pub s_rho_ab: f64,
    pub s_rho_b: f64,
    /// `S(A|B)` of the input.
    pub cond_entropy: f64,
    pub s_ext_abc: f64,
    pub s_ext_ab: f64,
    pub s_ext_bc: f64,
    pub s_ext_b: f64,
    /// Shannon entropy of the outcome distribution.
    pub s_p: f64,
    /// Measured conditional entropy `Σ p_j S(A|j)`.
    pub tilde_s: f64,
    /// Strong-subadditivity slack of the extended state with `B` in the middle.
    pub ssa_slack: f64,
    /// `S(ρ′_ABC) - S(ρ_AB)`
    pub residual_abc: f64,
    /// `S(ρ′_AB) - S(p) - Σ p_j S(A|j)`
    pub residual_ab: f64,
    /// `S(ρ′_BC) - S(ρ_B)`
    pub residual_bc: f64,
    /// `S(ρ′_B) - S(p)`
    pub residual_b: f64,
    /// `ssa_slack - (tilde_s - cond_entropy)`
    pub residual_slack: f64,
    pub discord_lower_bound_ok: bool,
}

impl Theorem1Report {
    pub fn max_residual(&self) -> f64 {
        [
            self.residual_abc,
            self.residual_ab,
            self.residual_bc,
            self.residual_b,
            self.residual_slack,
        ]
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()))
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.discord_lower_bound_ok
    }
}

/// Builds the ancilla extension of a bipartite state for a measurement basis on one factor
/// and evaluates every entropy that enters the positivity argument.
pub fn theorem1_report(rho_ab: &DensityMatrix, basis: &Povm) -> Result<Theorem1Report> {
    if rho_ab.layout().len() != 2 {
        return Err(Error::NotBipartite(rho_ab.layout().to_string()));
    }
    let b = basis.subsystem().to_string();
    let rest = rho_ab.layout().complement(&[&b]);
    let a = rest
        .first()
        .copied()
        .ok_or_else(|| Error::UnknownLabel(b.clone()))?
        .to_string();
    let c = fresh_label(rho_ab.layout(), "C");
    let (a, b, c) = (a.as_str(), b.as_str(), c.as_str());

    let ens = povm_outcomes(rho_ab, basis)?;
    let probs = ens.probabilities();
    let s_p = shannon_entropy(&probs)?;
    let mut tilde_s = 0.0;
    for o in &ens.outcomes {
        if o.prob >= ZERO_PROB {
            tilde_s += o.prob * von_neumann_entropy(&o.post_state)?;
        }
    }

    let ext = ancilla_extension(rho_ab, basis, c)?;
    let s_rho_ab = von_neumann_entropy(rho_ab)?;
    let s_rho_b = entropy::entropy_of(rho_ab, &[b])?;
    let s_ext_abc = von_neumann_entropy(&ext)?;
    let s_ext_ab = entropy::entropy_of(&ext, &[a, b])?;
    let s_ext_bc = entropy::entropy_of(&ext, &[b, c])?;
    let s_ext_b = entropy::entropy_of(&ext, &[b])?;
    let slack = entropy::ssa_slack(&ext, &[a], &[b], &[c])?.slack;
    let cond_entropy = s_rho_ab - s_rho_b;

    Ok(Theorem1Report {
        s_rho_ab,
        s_rho_b,
        cond_entropy,
        s_ext_abc,
        s_ext_ab,
        s_ext_bc,
        s_ext_b,
        s_p,
        tilde_s,
        ssa_slack: slack,
        residual_abc: s_ext_abc - s_rho_ab,
        residual_ab: s_ext_ab - (s_p + tilde_s),
        residual_bc: s_ext_bc - s_rho_b,
        residual_b: s_ext_b - s_p,
        residual_slack: slack - (tilde_s - cond_entropy),
        discord_lower_bound_ok: tilde_s >= cond_entropy - 1e-9,
    })
}
