//! Entropic functionals, in bits.

use crate::error::{Error, Result};
use crate::qmat::{hermitian_eigenvalues, ComplexMatrix};
use crate::states::DensityMatrix;

/// Eigenvalues below `-EIGEN_CLAMP` mark an invalid state.
pub const EIGEN_CLAMP: f64 = 1e-10;

/// `-Σ λ log₂ λ` over a spectrum, clamping into `[0, 1]`.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -EIGEN_CLAMP {
            return Err(Error::InvalidState(format!("eigenvalue {l:e} below -{EIGEN_CLAMP:e}")));
        }
        let l = l.clamp(0.0, 1.0);
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Entropy of a (possibly unnormalized-by-rounding) density operator given as a raw matrix.
pub fn matrix_entropy(m: &ComplexMatrix) -> Result<f64> {
    spectrum_entropy(&hermitian_eigenvalues(m)?)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    matrix_entropy(rho.matrix())
}

pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if p.iter().any(|&x| !(x >= -1e-12)) {
        return Err(Error::InvalidDistribution(format!("negative or NaN entry in {p:?}")));
    }
    let sum: f64 = p.iter().sum();
    if !((sum - 1.0).abs() <= 1e-9) {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0))
}

/// Entropy of the reduced state on `labels`.
pub fn entropy_of(rho: &DensityMatrix, labels: &[&str]) -> Result<f64> {
    if labels.len() == rho.layout().len() && labels.iter().all(|l| rho.layout().contains(l)) {
        return von_neumann_entropy(rho);
    }
    von_neumann_entropy(&rho.reduced(labels)?)
}

fn check_partition(rho: &DensityMatrix, groups: &[&[&str]]) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for g in groups {
        if g.is_empty() {
            return Err(Error::InvalidLayout("empty label group".into()));
        }
        for l in *g {
            rho.layout().position(l)?;
            if seen.contains(l) {
                return Err(Error::InvalidLayout(format!("label `{l}` appears in two groups")));
            }
            seen.push(l);
        }
    }
    if seen.len() != rho.layout().len() {
        return Err(Error::InvalidLayout(format!(
            "groups {groups:?} do not cover layout {}",
            rho.layout()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub s_a: f64,
    pub s_b: f64,
    pub s_ab: f64,
    /// `I(A:B) = S(A) + S(B) - S(AB)`
    pub mutual_info: f64,
    /// `S(A|B) = S(AB) - S(B)`
    pub cond_entropy: f64,
    /// `I(A⟩B) = -S(A|B)`
    pub coherent_info: f64,
}

/// Correlation quantities across the cut `a | b`, which must partition the layout.
pub fn correlation_report(rho: &DensityMatrix, a: &[&str], b: &[&str]) -> Result<CorrelationReport> {
    check_partition(rho, &[a, b])?;
    let s_a = entropy_of(rho, a)?;
    let s_b = entropy_of(rho, b)?;
    let s_ab = von_neumann_entropy(rho)?;
    let cond_entropy = s_ab - s_b;
    Ok(CorrelationReport {
        s_a,
        s_b,
        s_ab,
        mutual_info: s_a + s_b - s_ab,
        cond_entropy,
        coherent_info: -cond_entropy,
    })
}

/// `I(X:Y)` between two disjoint label groups of a larger state.
pub fn mutual_information(rho: &DensityMatrix, x: &[&str], y: &[&str]) -> Result<f64> {
    let xy: Vec<&str> = x.iter().chain(y).copied().collect();
    let joint = rho.reduced(&xy)?;
    Ok(correlation_report(&joint, x, y)?.mutual_info)
}

/// `S(X|Y)` between two disjoint label groups of a larger state.
pub fn conditional_entropy(rho: &DensityMatrix, x: &[&str], y: &[&str]) -> Result<f64> {
    let xy: Vec<&str> = x.iter().chain(y).copied().collect();
    Ok(entropy_of(rho, &xy)? - entropy_of(rho, y)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsaSlack {
    /// `S(AB) + S(BC) - S(ABC) - S(B)`, nonnegative for every valid state.
    pub slack: f64,
    /// `S(A|B) - S(A|BC)`: the same quantity evaluated through conditional entropies.
    pub conditional_form: f64,
}

/// Strong-subadditivity slack with `b` as the middle system. The three groups must
/// partition the layout.
pub fn ssa_slack(rho: &DensityMatrix, a: &[&str], b: &[&str], c: &[&str]) -> Result<SsaSlack> {
    check_partition(rho, &[a, b, c])?;
    let ab: Vec<&str> = a.iter().chain(b).copied().collect();
    let bc: Vec<&str> = b.iter().chain(c).copied().collect();
    let s_ab = entropy_of(rho, &ab)?;
    let s_bc = entropy_of(rho, &bc)?;
    let s_b = entropy_of(rho, b)?;
    let s_abc = von_neumann_entropy(rho)?;
    let cond_a_b = s_ab - s_b;
    let cond_a_bc = s_abc - s_bc;
    Ok(SsaSlack {
        slack: s_ab + s_bc - s_abc - s_b,
        conditional_form: cond_a_b - cond_a_bc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::SubsystemLayout;
    use crate::states::{named_family, random_state};

    #[test]
    fn vn_examples() {
        let bell = named_family("bell", &[]).unwrap();
        assert!(von_neumann_entropy(&bell).unwrap().abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(SubsystemLayout::new([("A", 2)]).unwrap());
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn werner_matches_closed_form_spectrum() {
        for &p in &[0.0, 0.25, 0.5, 0.9] {
            let rho = named_family("werner", &[p]).unwrap();
            let l1: f64 = (1.0 + 3.0 * p) / 4.0;
            let l2: f64 = (1.0 - p) / 4.0;
            let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
            let oracle = term(l1) + 3.0 * term(l2);
            assert!((von_neumann_entropy(&rho).unwrap() - oracle).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn spectrum_clamp_and_error() {
        assert!(spectrum_entropy(&[1.0 + 1e-12, -5e-11]).unwrap().abs() < 1e-9);
        assert!(matches!(spectrum_entropy(&[1.1, -0.1]), Err(Error::InvalidState(_))));
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(shannon_entropy(&[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(shannon_entropy(&[0.25; 4]).unwrap(), 2.0);
        assert!(shannon_entropy(&[0.5, 0.6]).is_err());
        assert!(shannon_entropy(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn report_bell() {
        let r = correlation_report(&named_family("bell", &[]).unwrap(), &["A"], &["B"]).unwrap();
        assert!((r.s_a - 1.0).abs() < 1e-12);
        assert!(r.s_ab.abs() < 1e-12);
        assert!((r.mutual_info - 2.0).abs() < 1e-12);
        assert!((r.cond_entropy + 1.0).abs() < 1e-12);
        assert!((r.coherent_info - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_product_and_classical() {
        let prod = named_family("product", &[0.1, 0.2, 0.3, 0.0, 0.0, 0.5]).unwrap();
        let r = correlation_report(&prod, &["A"], &["B"]).unwrap();
        assert!(r.mutual_info.abs() < 1e-12);
        assert!((r.cond_entropy - r.s_a).abs() < 1e-12);
        let cc = named_family("cc", &[0.5, 0.5]).unwrap();
        let r = correlation_report(&cc, &["A"], &["B"]).unwrap();
        assert!((r.mutual_info - 1.0).abs() < 1e-12);
        assert!(r.cond_entropy.abs() < 1e-12);
    }

    #[test]
    fn report_requires_partition() {
        let ghz = named_family("ghz", &[]).unwrap();
        assert!(correlation_report(&ghz, &["A"], &["B"]).is_err());
        assert!(correlation_report(&ghz, &["A", "B"], &["B", "C"]).is_err());
        assert!(correlation_report(&ghz, &["A"], &["B", "C"]).is_ok());
    }

    #[test]
    fn ssa_product_saturates() {
        let a = DensityMatrix::qubit_from_bloch("A", [0.3, 0.0, 0.1]).unwrap();
        let b = DensityMatrix::qubit_from_bloch("B", [0.0, 0.5, 0.0]).unwrap();
        let c = DensityMatrix::qubit_from_bloch("C", [0.0, 0.0, -0.9]).unwrap();
        let abc = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let s = ssa_slack(&abc, &["A"], &["B"], &["C"]).unwrap();
        assert!(s.slack.abs() < 1e-10);
        assert!(s.conditional_form.abs() < 1e-10);
    }

    #[test]
    fn ssa_ghz_every_labeling() {
        // GHZ reductions: S(X)=1, S(XY)=1, S(XYZ)=0, so slack = 1 + 1 - 0 - 1 = 1 for any middle.
        let ghz = named_family("ghz", &[]).unwrap();
        let labels = ["A", "B", "C"];
        for m in 0..3 {
            let (x, y, z) = (labels[(m + 1) % 3], labels[m], labels[(m + 2) % 3]);
            let s = ssa_slack(&ghz, &[x], &[y], &[z]).unwrap();
            let oracle = entropy_of(&ghz, &[x, y]).unwrap() + entropy_of(&ghz, &[y, z]).unwrap()
                - von_neumann_entropy(&ghz).unwrap()
                - entropy_of(&ghz, &[y]).unwrap();
            assert!((s.slack - oracle).abs() < 1e-12);
            assert!((s.slack - 1.0).abs() < 1e-10);
            assert!(s.slack >= 0.0);
        }
    }

    #[test]
    fn ssa_random_sweep() {
        let layout = SubsystemLayout::qubits(&["A", "B", "C"]);
        let mut worst = f64::INFINITY;
        for seed in 0..200 {
            let rho = random_state(&layout, 4, seed).unwrap();
            let s = ssa_slack(&rho, &["A"], &["B"], &["C"]).unwrap();
            assert!((s.slack - s.conditional_form).abs() < 1e-10);
            worst = worst.min(s.slack);
        }
        assert!(worst >= -1e-9, "min slack {worst}");
    }

    #[test]
    fn pure_tripartite_complement_symmetry() {
        let psi = crate::states::random_pure(&SubsystemLayout::qubits(&["A", "B", "C"]), 17).unwrap();
        let rho = crate::states::from_pure(&psi);
        assert!((entropy_of(&rho, &["A", "B"]).unwrap() - entropy_of(&rho, &["C"]).unwrap()).abs() < 1e-9);
    }
}
